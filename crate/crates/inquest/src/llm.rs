//! Model-backed question generation, constrained-set classification,
//! open-set proposals and free-text answer classification.

use std::collections::BTreeMap;
use std::sync::Arc;

use inquest_core::generate::{parse_classification, parse_generation_response, repair_candidates, split_items};
use inquest_core::{
    casefold, AnswerClassifier, Branch, CallCounters, Catalog, ChatMessage, ChatProvider, ChatRequest, Domain, Exchange,
    GenerationError, GenerationRequest, Partition, PossibilitySet, ProviderError, QuestionGenerator, SetRenewer,
};
use thiserror::Error;

use crate::templates::{ancestral_context, render_prompt, TemplateError, TemplateId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LlmError {
    #[error(transparent)]
    Provider(#[from] ProviderError),
    #[error(transparent)]
    Template(#[from] TemplateError),
}

impl From<LlmError> for ProviderError {
    fn from(e: LlmError) -> Self {
        match e {
            LlmError::Provider(p) => p,
            LlmError::Template(t) => ProviderError::BadResponse(t.to_string()),
        }
    }
}

/// Generates all `m` candidates with one prompt; each call is one QGC.
pub struct LlmGenerator {
    provider: Arc<dyn ChatProvider>,
    domain: Domain,
    counters: Arc<CallCounters>,
}

impl LlmGenerator {
    pub fn new(provider: Arc<dyn ChatProvider>, domain: Domain, counters: Arc<CallCounters>) -> Self {
        Self { provider, domain, counters }
    }

    pub fn prompt(&self, req: &GenerationRequest<'_>) -> Result<String, TemplateError> {
        let mut b = BTreeMap::new();
        b.insert("item_set", req.catalog.labels(req.set).join(", "));
        b.insert("ancestral_context", ancestral_context(req.context));
        b.insert("m", req.fanout.to_string());
        b.insert("n", req.fanout.to_string());
        render_prompt(self.domain, TemplateId::QuestionGeneration, &b)
    }
}

impl QuestionGenerator for LlmGenerator {
    fn generate(&self, req: &GenerationRequest<'_>) -> Result<Vec<Partition>, GenerationError> {
        let prompt = self.prompt(req).map_err(|e| GenerationError::Prompt(e.to_string()))?;
        self.counters.record_generation_call();
        let text = self.provider.complete(&ChatRequest::single(prompt))?;
        let raws = parse_generation_response(&text)?;
        repair_candidates(&raws, req)
    }
}

/// Asks the model which outcomes fit the description. Hallucinated labels
/// are dropped; an empty answer keeps the full set.
pub fn constrain_possibilities(
    problem_description: &str,
    full_set: &PossibilitySet,
    catalog: &Catalog,
    domain: Domain,
    provider: &dyn ChatProvider,
    counters: &CallCounters,
) -> Result<PossibilitySet, LlmError> {
    let mut b = BTreeMap::new();
    b.insert("item_set", catalog.labels(full_set).join(", "));
    b.insert("problem_description", problem_description.to_string());
    let prompt = render_prompt(domain, TemplateId::Classify, &b)?;
    counters.record_other_call();
    let text = provider.complete(&ChatRequest::single(prompt))?;
    let Some((yes, _)) = parse_classification(&text) else { return Ok(full_set.clone()) };
    let chosen: PossibilitySet = yes
        .iter()
        .filter_map(|l| catalog.lookup(l))
        .filter(|id| full_set.contains(*id))
        .collect();
    // keep the catalog order of the full set
    let ordered: PossibilitySet = full_set.iter().filter(|id| chosen.contains(*id)).collect();
    if ordered.is_empty() {
        return Ok(full_set.clone());
    }
    Ok(ordered)
}

/// Reads a `["a", "b"]` style list, falling back to one item per line.
pub fn parse_label_list(text: &str) -> Vec<String> {
    if let (Some(open), Some(close)) = (text.find('['), text.rfind(']')) {
        if open < close {
            return split_items(&text[open + 1..close]);
        }
    }
    text.lines()
        .map(|l| l.trim().trim_start_matches(|c: char| c == '-' || c == '*' || c.is_ascii_digit() || c == '.').trim())
        .flat_map(split_items)
        .collect()
}

/// Repairs a proposal: duplicates dropped, missing `existing` labels
/// appended, then trailing non-existing labels dropped until `size` remain.
pub fn repair_open_set(proposed: &[String], existing: &[String], size: usize) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    let has = |out: &Vec<String>, l: &str| out.iter().any(|o| casefold(o) == casefold(l));
    for l in proposed {
        if !has(&out, l) {
            out.push(l.clone());
        }
    }
    for l in existing {
        if !has(&out, l) {
            out.push(l.clone());
        }
    }
    let is_existing = |l: &str| existing.iter().any(|e| casefold(e) == casefold(l));
    while out.len() > size {
        match out.iter().rposition(|l| !is_existing(l)) {
            Some(i) => {
                out.remove(i);
            }
            None => {
                out.truncate(size);
            }
        }
    }
    out
}

/// Initial proposal (empty history and existing) or renewal of an open set.
pub fn open_set_update(
    problem_description: &str,
    history: &[Exchange],
    existing: &[String],
    size: usize,
    domain: Domain,
    provider: &dyn ChatProvider,
    counters: &CallCounters,
) -> Result<Vec<String>, LlmError> {
    let mut b = BTreeMap::new();
    b.insert("size", size.to_string());
    let mut messages = Vec::new();
    if history.is_empty() && existing.is_empty() {
        b.insert("problem_description", problem_description.to_string());
        messages.push(ChatMessage::user(render_prompt(domain, TemplateId::OpenInitial, &b)?));
    } else {
        let quoted: Vec<String> = existing.iter().map(|e| format!("\"{e}\"")).collect();
        b.insert("existing_items", quoted.join(", "));
        for ex in history {
            messages.push(ChatMessage { role: inquest_core::Role::Assistant, content: ex.question.clone() });
            messages.push(ChatMessage::user(ex.answer.clone()));
        }
        messages.push(ChatMessage::user(render_prompt(domain, TemplateId::OpenRenewal, &b)?));
    }
    counters.record_other_call();
    let text = provider.complete(&ChatRequest::new(messages))?;
    Ok(repair_open_set(&parse_label_list(&text), existing, size))
}

/// [`SetRenewer`] over [`open_set_update`].
pub struct LlmRenewer {
    pub provider: Arc<dyn ChatProvider>,
    pub domain: Domain,
    pub counters: Arc<CallCounters>,
    pub problem_description: String,
}

impl SetRenewer for LlmRenewer {
    fn renew(&self, history: &[Exchange], existing: &[String], size: usize) -> Result<Vec<String>, ProviderError> {
        open_set_update(&self.problem_description, history, existing, size, self.domain, &*self.provider, &self.counters)
            .map_err(ProviderError::from)
    }
}

/// Maps free-text answers to yes/no with a short yes-or-no prompt.
pub struct LlmClassifier {
    pub provider: Arc<dyn ChatProvider>,
    pub counters: Arc<CallCounters>,
}

impl AnswerClassifier for LlmClassifier {
    fn classify(&self, question: &str, answer: &str) -> Result<Option<Branch>, ProviderError> {
        let prompt = format!(
            "Question: {question}\nAnswer: {answer}\nDoes the answer mean YES or NO to the question? Reply with YES or NO only."
        );
        self.counters.record_other_call();
        let text = self.provider.complete(&ChatRequest::single(prompt))?;
        let word: String = text.trim_start().chars().take_while(|c| c.is_alphabetic()).collect();
        Ok(match word.to_ascii_lowercase().as_str() {
            "yes" => Some(Branch::Yes),
            "no" => Some(Branch::No),
            _ => None,
        })
    }
}
