use std::sync::Arc;

use inquest::llm::{constrain_possibilities, open_set_update, LlmGenerator};
use inquest::providers::ScriptedProvider;
use inquest::templates::{render_prompt, TemplateError, TemplateId};
use inquest_core::{
    CallCounters, Catalog, ChatMessage, ChatProvider, ChatRequest, Domain, Exchange, GenerationError,
    GenerationRequest, PossibilitySet, QuestionGenerator, Role,
};

fn catalog(labels: &[&str]) -> Catalog {
    let mut c = Catalog::new();
    for l in labels {
        c.push(l, None).unwrap();
    }
    c
}

fn labels(c: &Catalog, s: &PossibilitySet) -> Vec<String> {
    c.labels(s)
}

const BREATHING: &str = "Question 1: Do you have difficulty breathing?
YES: pneumonia, asthma
Count of YES: 2
NO: flu, enteritis
Count of NO: 2";

#[test]
fn breathing_question_becomes_one_partition() {
    let cat = catalog(&["flu", "pneumonia", "enteritis", "asthma"]);
    let set = cat.full_set();
    let req = GenerationRequest { set: &set, context: &[], fanout: 3, catalog: &cat };
    let counters = Arc::new(CallCounters::new());
    // The prompt the generator will send, built from the raw template text.
    let expected_prompt = inquest::templates::template(Domain::Medical, TemplateId::QuestionGeneration)
        .unwrap()
        .replace("{item_set}", "flu, pneumonia, enteritis, asthma")
        .replace("{ancestral_context}", "")
        .replace("{n}", "3");
    let provider = Arc::new(ScriptedProvider::new().on_prompt(&expected_prompt, BREATHING));
    let generator = LlmGenerator::new(provider.clone(), Domain::Medical, counters.clone());

    let parts = generator.generate(&req).unwrap();
    assert_eq!(parts.len(), 1);
    assert_eq!(parts[0].question, "Do you have difficulty breathing?");
    assert_eq!(labels(&cat, &parts[0].yes), vec!["pneumonia", "asthma"]);
    assert_eq!(labels(&cat, &parts[0].no), vec!["flu", "enteritis"]);
    assert_eq!(counters.qgc(), 1);
    assert_eq!(counters.other_calls(), 0);
    assert!(provider.misses().is_empty());
}

#[test]
fn each_generation_call_counts_once() {
    let cat = catalog(&["flu", "pneumonia", "enteritis", "asthma"]);
    let set = cat.full_set();
    let req = GenerationRequest { set: &set, context: &[], fanout: 3, catalog: &cat };
    let counters = Arc::new(CallCounters::new());
    let generator = LlmGenerator::new(Arc::new(ScriptedProvider::new().with_fallback(BREATHING)), Domain::Medical, counters.clone());
    for _ in 0..7 {
        generator.generate(&req).unwrap();
    }
    assert_eq!(counters.qgc(), 7);
}

#[test]
fn unusable_responses_fail_generation() {
    let cat = catalog(&["flu", "pneumonia", "enteritis", "asthma"]);
    let set = cat.full_set();
    let req = GenerationRequest { set: &set, context: &[], fanout: 3, catalog: &cat };
    let counters = Arc::new(CallCounters::new());
    let garbage = LlmGenerator::new(Arc::new(ScriptedProvider::new().with_fallback("I am not sure.")), Domain::Medical, counters.clone());
    assert!(matches!(garbage.generate(&req), Err(GenerationError::ParseFailed)));
    let all_yes = "Question 1: Do you feel unwell?\nYES: flu, pneumonia, enteritis, asthma\nNO: ";
    let degenerate = LlmGenerator::new(Arc::new(ScriptedProvider::new().with_fallback(all_yes)), Domain::Medical, counters.clone());
    assert!(matches!(degenerate.generate(&req), Err(GenerationError::NoValidCandidates)));
    // unscripted prompts surface as provider errors
    let silent = LlmGenerator::new(Arc::new(ScriptedProvider::new()), Domain::Medical, counters.clone());
    assert!(matches!(silent.generate(&req), Err(GenerationError::Provider(_))));
    assert_eq!(counters.qgc(), 3);
}

#[test]
fn constrained_set_keeps_the_classified_subset() {
    let cat = catalog(&["gastritis", "enteritis", "gastric ulcer", "flu"]);
    let full = cat.full_set();
    let counters = CallCounters::new();
    let pair = ScriptedProvider::new().with_fallback("YES: gastric ulcer, gastritis\nNO: enteritis, flu");
    let got = constrain_possibilities("My stomach hurts after meals.", &full, &cat, Domain::Medical, &pair, &counters).unwrap();
    assert_eq!(labels(&cat, &got), vec!["gastritis", "gastric ulcer"]);

    let everything = ScriptedProvider::new().with_fallback("YES: gastritis, enteritis, gastric ulcer, flu\nNO:");
    let got = constrain_possibilities("x", &full, &cat, Domain::Medical, &everything, &counters).unwrap();
    assert_eq!(got, full);

    let outside = ScriptedProvider::new().with_fallback("YES: migraine, sprained ankle\nNO: gastritis");
    let got = constrain_possibilities("x", &full, &cat, Domain::Medical, &outside, &counters).unwrap();
    assert_eq!(got, full);

    assert_eq!(counters.other_calls(), 3);
    assert_eq!(counters.qgc(), 0);
}

#[test]
fn classify_prompt_is_the_medical_template() {
    let cat = catalog(&["gastritis", "flu"]);
    let prompt = inquest::templates::template(Domain::Medical, TemplateId::Classify)
        .unwrap()
        .replace("{item_set}", "gastritis, flu")
        .replace("{problem_description}", "I cough.");
    let provider = ScriptedProvider::new().on_prompt(&prompt, "YES: flu\nNO: gastritis");
    let got = constrain_possibilities("I cough.", &cat.full_set(), &cat, Domain::Medical, &provider, &CallCounters::new()).unwrap();
    assert_eq!(labels(&cat, &got), vec!["flu"]);
}

#[test]
fn open_set_initial_proposal() {
    let prompt = inquest::templates::template(Domain::Troubleshooting, TemplateId::OpenInitial)
        .unwrap()
        .replace("{problem_description}", "My car continues to overheat.")
        .replace("{size}", "5");
    let reply = r#"["radiator leak", "thermostat failure", "water pump failure", "low coolant", "fan failure"]"#;
    let provider = ScriptedProvider::new().on_prompt(&prompt, reply);
    let counters = CallCounters::new();
    let out = open_set_update("My car continues to overheat.", &[], &[], 5, Domain::Troubleshooting, &provider, &counters).unwrap();
    assert_eq!(out, vec!["radiator leak", "thermostat failure", "water pump failure", "low coolant", "fan failure"]);
    assert_eq!(counters.other_calls(), 1);
    assert_eq!(counters.qgc(), 0);
}

#[test]
fn open_set_renewal_repairs_the_proposal() {
    let history = vec![Exchange { question: String::from("Is the coolant low?"), answer: String::from("No.") }];
    let existing = vec![String::from("radiator leak")];
    let renewal = inquest::templates::template(Domain::Troubleshooting, TemplateId::OpenRenewal)
        .unwrap()
        .replace("{size}", "5")
        .replace("{existing_items}", "\"radiator leak\"");
    let req = ChatRequest::new(vec![
        ChatMessage { role: Role::Assistant, content: String::from("Is the coolant low?") },
        ChatMessage::user("No."),
        ChatMessage::user(renewal),
    ]);
    let omits = r#"["a", "b", "c", "d", "e"]"#;
    let provider = ScriptedProvider::new().on_request(&req, omits);
    let out = open_set_update("", &history, &existing, 5, Domain::Troubleshooting, &provider, &CallCounters::new()).unwrap();
    assert_eq!(out.len(), 5);
    assert!(out.contains(&String::from("radiator leak")));
    assert!(provider.misses().is_empty(), "{:?}", provider.misses());

    let eight = r#"["a", "b", "radiator leak", "c", "d", "e", "f", "g"]"#;
    let provider = ScriptedProvider::new().with_fallback(eight);
    let out = open_set_update("", &history, &existing, 5, Domain::Troubleshooting, &provider, &CallCounters::new()).unwrap();
    assert_eq!(out, vec!["a", "b", "radiator leak", "c", "d"]);
}

#[test]
fn provider_errors_propagate() {
    let cat = catalog(&["flu", "asthma"]);
    let none = ScriptedProvider::new();
    assert!(constrain_possibilities("x", &cat.full_set(), &cat, Domain::Medical, &none, &CallCounters::new()).is_err());
    assert!(open_set_update("x", &[], &[], 5, Domain::Medical, &none, &CallCounters::new()).is_err());
    let empty = ChatRequest::new(Vec::new());
    assert!(none.complete(&empty).is_err());
}

#[test]
fn domains_without_a_template_report_it() {
    let b = std::collections::BTreeMap::new();
    assert!(matches!(
        render_prompt(Domain::TwentyQuestions, TemplateId::Classify, &b),
        Err(TemplateError::Unknown { .. })
    ));
}
