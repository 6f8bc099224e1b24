//! Prompt templates, one resource file per (domain, template id), rendered by
//! plain placeholder substitution.

use std::collections::{BTreeMap, BTreeSet};

use inquest_core::{Branch, Domain};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TemplateId {
    QuestionerPrologue,
    AnswererPrologue,
    AnswererHistory,
    Targeting,
    QuestionGeneration,
    Classify,
    OpenInitial,
    OpenRenewal,
}

impl TemplateId {
    pub const ALL: [TemplateId; 8] = [
        TemplateId::QuestionerPrologue,
        TemplateId::AnswererPrologue,
        TemplateId::AnswererHistory,
        TemplateId::Targeting,
        TemplateId::QuestionGeneration,
        TemplateId::Classify,
        TemplateId::OpenInitial,
        TemplateId::OpenRenewal,
    ];

    pub fn file_stem(self) -> &'static str {
        match self {
            TemplateId::QuestionerPrologue => "questioner_prologue",
            TemplateId::AnswererPrologue => "answerer_prologue",
            TemplateId::AnswererHistory => "answerer_history",
            TemplateId::Targeting => "targeting",
            TemplateId::QuestionGeneration => "question_generation",
            TemplateId::Classify => "classify",
            TemplateId::OpenInitial => "open_initial",
            TemplateId::OpenRenewal => "open_renewal",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TemplateError {
    #[error("no template `{template}` for domain `{domain}`")]
    Unknown { domain: &'static str, template: &'static str },
    #[error("unbound placeholders: {}", .0.join(", "))]
    MissingPlaceholder(Vec<String>),
}

macro_rules! resource {
    ($domain:literal, $stem:literal) => {
        include_str!(concat!("../templates/", $domain, "/", $stem, ".txt"))
    };
}

/// The raw template text, if the domain has one.
pub fn template(domain: Domain, id: TemplateId) -> Option<&'static str> {
    use TemplateId::*;
    Some(match (domain, id) {
        (Domain::TwentyQuestions, QuestionerPrologue) => resource!("twenty_questions", "questioner_prologue"),
        (Domain::TwentyQuestions, AnswererPrologue) => resource!("twenty_questions", "answerer_prologue"),
        (Domain::TwentyQuestions, Targeting) => resource!("twenty_questions", "targeting"),
        (Domain::TwentyQuestions, QuestionGeneration) => resource!("twenty_questions", "question_generation"),
        (Domain::Medical, QuestionerPrologue) => resource!("medical", "questioner_prologue"),
        (Domain::Medical, AnswererPrologue) => resource!("medical", "answerer_prologue"),
        (Domain::Medical, AnswererHistory) => resource!("medical", "answerer_history"),
        (Domain::Medical, Targeting) => resource!("medical", "targeting"),
        (Domain::Medical, QuestionGeneration) => resource!("medical", "question_generation"),
        (Domain::Medical, Classify) => resource!("medical", "classify"),
        (Domain::Medical, OpenInitial) => resource!("medical", "open_initial"),
        (Domain::Medical, OpenRenewal) => resource!("medical", "open_renewal"),
        (Domain::Troubleshooting, QuestionerPrologue) => resource!("troubleshooting", "questioner_prologue"),
        (Domain::Troubleshooting, AnswererPrologue) => resource!("troubleshooting", "answerer_prologue"),
        (Domain::Troubleshooting, Targeting) => resource!("troubleshooting", "targeting"),
        (Domain::Troubleshooting, QuestionGeneration) => resource!("troubleshooting", "question_generation"),
        (Domain::Troubleshooting, Classify) => resource!("troubleshooting", "classify"),
        (Domain::Troubleshooting, OpenInitial) => resource!("troubleshooting", "open_initial"),
        (Domain::Troubleshooting, OpenRenewal) => resource!("troubleshooting", "open_renewal"),
        _ => return None,
    })
}

/// Names of every `{placeholder}` in `text`, in first-seen order.
pub fn placeholders(text: &str) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    let mut rest = text;
    while let Some(open) = rest.find('{') {
        let after = &rest[open + 1..];
        match after.find('}') {
            Some(close) => {
                let name = &after[..close];
                if !name.is_empty() && name.bytes().all(|b| b.is_ascii_lowercase() || b == b'_') {
                    if !out.iter().any(|n| n == name) {
                        out.push(name.to_string());
                    }
                    rest = &after[close + 1..];
                } else {
                    rest = after;
                }
            }
            None => break,
        }
    }
    out
}

/// Substitutes every placeholder; nothing else in the text changes.
pub fn render_text(text: &str, bindings: &BTreeMap<&str, String>) -> Result<String, TemplateError> {
    let wanted = placeholders(text);
    let missing: Vec<String> = wanted.iter().filter(|n| !bindings.contains_key(n.as_str())).cloned().collect();
    if !missing.is_empty() {
        return Err(TemplateError::MissingPlaceholder(missing));
    }
    let known: BTreeSet<&str> = wanted.iter().map(String::as_str).collect();
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let after = &rest[open + 1..];
        match after.find('}') {
            Some(close) if known.contains(&after[..close]) => {
                out.push_str(&bindings[&after[..close]]);
                rest = &after[close + 1..];
            }
            _ => {
                out.push('{');
                rest = after;
            }
        }
    }
    out.push_str(rest);
    Ok(out)
}

pub fn render_prompt(domain: Domain, id: TemplateId, bindings: &BTreeMap<&str, String>) -> Result<String, TemplateError> {
    let text = template(domain, id)
        .ok_or(TemplateError::Unknown { domain: domain.as_str(), template: id.file_stem() })?;
    render_text(text, bindings)
}

/// Value for `{inform_set}`: empty after the first turn.
pub fn inform_set(labels: &[String]) -> String {
    if labels.is_empty() {
        String::new()
    } else {
        format!("X is possibly one of the following: {}", labels.join(", "))
    }
}

/// Value for `{ancestral_context}`: blank at a root.
pub fn ancestral_context(context: &[(String, Branch)]) -> String {
    if context.is_empty() {
        return String::new();
    }
    let pairs: Vec<String> = context.iter().map(|(q, a)| format!("{q} {a}")).collect();
    format!(
        "For context, following questions were already asked to build the above set of possibilities: {}",
        pairs.join("; ")
    )
}
