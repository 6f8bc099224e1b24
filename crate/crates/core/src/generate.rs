//! The question-generation contract, the attribute oracle, and parsing of
//! model responses into partitions.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use thiserror::Error;

use crate::gateway::{CallCounters, ProviderError};
use crate::tree::Branch;
use crate::types::{casefold, normalize_partition, Catalog, Partition, PossibilitySet};

/// What a generator sees when asked to expand an answer node.
#[derive(Debug, Clone, Copy)]
pub struct GenerationRequest<'a> {
    pub set: &'a PossibilitySet,
    /// (question, answer) pairs from the root down to the node.
    pub context: &'a [(String, Branch)],
    pub fanout: usize,
    pub catalog: &'a Catalog,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenerationError {
    #[error("no candidate question survived repair")]
    NoValidCandidates,
    #[error("could not parse any question block from the response")]
    ParseFailed,
    #[error("provider: {0}")]
    Provider(#[from] ProviderError),
    #[error("prompt: {0}")]
    Prompt(String),
}

/// Produces up to `fanout` normalized partitions of `req.set`.
pub trait QuestionGenerator: Send + Sync {
    fn generate(&self, req: &GenerationRequest<'_>) -> Result<Vec<Partition>, GenerationError>;
}

/// A question block as written by the model, before labels are resolved.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RawPartition {
    pub question: String,
    pub yes: Vec<String>,
    pub no: Vec<String>,
}

/// Splits on boolean attribute signatures, preferring attributes whose
/// split is closest to even, then lower attribute index.
#[derive(Debug, Clone, Default)]
pub struct OracleGenerator {
    counters: Arc<CallCounters>,
    attribute_names: Vec<String>,
}

impl OracleGenerator {
    pub fn new(counters: Arc<CallCounters>) -> Self {
        Self { counters, attribute_names: Vec::new() }
    }

    /// Optional human-readable attribute names used in question text.
    pub fn with_attribute_names(mut self, names: Vec<String>) -> Self {
        self.attribute_names = names;
        self
    }

    pub fn counters(&self) -> &Arc<CallCounters> {
        &self.counters
    }

    fn question_text(&self, attr: usize) -> String {
        match self.attribute_names.get(attr) {
            Some(name) => format!("Is X {name}?"),
            None => format!("Does X have attribute {attr}?"),
        }
    }
}

impl QuestionGenerator for OracleGenerator {
    fn generate(&self, req: &GenerationRequest<'_>) -> Result<Vec<Partition>, GenerationError> {
        self.counters.record_generation_call();
        let width = req.catalog.signature_len().unwrap_or(0);
        let mut ranked: Vec<(usize, usize, Partition)> = Vec::new();
        for attr in 0..width {
            let mut yes = PossibilitySet::new();
            let mut no = PossibilitySet::new();
            for id in req.set.iter() {
                let bit = req
                    .catalog
                    .get(id)
                    .and_then(|o| o.signature.as_ref())
                    .and_then(|s| s.get(attr).copied())
                    .unwrap_or(false);
                if bit {
                    yes.insert(id);
                } else {
                    no.insert(id);
                }
            }
            if yes.is_empty() || no.is_empty() {
                continue;
            }
            let gap = yes.len().abs_diff(no.len());
            ranked.push((gap, attr, Partition::new(self.question_text(attr), yes, no)));
        }
        ranked.sort_by_key(|(gap, attr, _)| (*gap, *attr));
        let out: Vec<Partition> = ranked.into_iter().take(req.fanout).map(|(_, _, p)| p).collect();
        if out.is_empty() {
            return Err(GenerationError::NoValidCandidates);
        }
        Ok(out)
    }
}

fn strip_decoration(line: &str) -> &str {
    line.trim().trim_start_matches(['*', '-', '#', '>', ' ']).trim()
}

/// `"YES: a, b"` -> `Some("a, b")` for the given tag, tolerating markdown
/// emphasis around the tag.
fn tagged<'a>(line: &'a str, tag: &str) -> Option<&'a str> {
    let line = strip_decoration(line);
    let head = line.get(..tag.len())?;
    if !head.eq_ignore_ascii_case(tag) {
        return None;
    }
    let rest = line[tag.len()..].trim_start_matches('*').trim_start();
    let rest = rest.strip_prefix(':')?;
    Some(rest.trim_start_matches('*').trim())
}

fn question_line(line: &str) -> Option<&str> {
    let line = strip_decoration(line);
    let head = line.get(..8)?;
    if !head.eq_ignore_ascii_case("question") {
        return None;
    }
    let rest = line[8..].trim_start();
    let digits = rest.bytes().take_while(u8::is_ascii_digit).count();
    if digits == 0 {
        return None;
    }
    let rest = rest[digits..].trim_start_matches('*').trim_start();
    let rest = rest.strip_prefix(':').or_else(|| rest.strip_prefix('.'))?;
    Some(rest.trim_start_matches('*').trim())
}

/// Splits a comma-separated item list, dropping quotes, brackets, trailing
/// periods and template filler such as `...`.
pub fn split_items(list: &str) -> Vec<String> {
    list.split(',')
        .map(|s| {
            s.trim()
                .trim_matches(|c: char| {
                    matches!(c, '"' | '\'' | '`' | '[' | ']' | '.' | '\u{2018}' | '\u{2019}' | '\u{201c}' | '\u{201d}')
                })
                .trim()
        })
        .filter(|s| !s.is_empty() && !s.eq_ignore_ascii_case("none"))
        .map(String::from)
        .collect()
}

/// Extracts every `Question i:` block carrying both a YES and a NO line.
/// Count lines are ignored; blocks missing either list are skipped.
pub fn parse_generation_response(text: &str) -> Result<Vec<RawPartition>, GenerationError> {
    let mut out = Vec::new();
    let mut current: Option<(RawPartition, bool, bool)> = None;
    let flush = |cur: Option<(RawPartition, bool, bool)>, out: &mut Vec<RawPartition>| {
        if let Some((raw, has_yes, has_no)) = cur {
            if has_yes && has_no && !raw.question.is_empty() {
                out.push(raw);
            }
        }
    };
    for line in text.lines() {
        if let Some(q) = question_line(line) {
            flush(current.take(), &mut out);
            current = Some((RawPartition { question: String::from(q), ..RawPartition::default() }, false, false));
            continue;
        }
        let Some((raw, has_yes, has_no)) = current.as_mut() else { continue };
        if let Some(items) = tagged(line, "YES") {
            raw.yes = split_items(items);
            *has_yes = true;
        } else if let Some(items) = tagged(line, "NO") {
            raw.no = split_items(items);
            *has_no = true;
        }
    }
    flush(current.take(), &mut out);
    if out.is_empty() {
        return Err(GenerationError::ParseFailed);
    }
    Ok(out)
}

/// Reads the YES and NO lists of a classification answer.
pub fn parse_classification(text: &str) -> Option<(Vec<String>, Vec<String>)> {
    let mut yes = None;
    let mut no = None;
    for line in text.lines() {
        if yes.is_none() {
            if let Some(items) = tagged(line, "YES") {
                yes = Some(split_items(items));
                continue;
            }
        }
        if no.is_none() {
            if let Some(items) = tagged(line, "NO") {
                no = Some(split_items(items));
            }
        }
    }
    match (yes, no) {
        (None, None) => None,
        (y, n) => Some((y.unwrap_or_default(), n.unwrap_or_default())),
    }
}

/// Resolves labels against `set` (exact after case-folding); anything not
/// in `set` is dropped.
pub fn resolve_raw(raw: &RawPartition, set: &PossibilitySet, catalog: &Catalog) -> Partition {
    let resolve = |labels: &[String]| -> PossibilitySet {
        labels
            .iter()
            .filter_map(|l| catalog.lookup(l))
            .filter(|id| set.contains(*id))
            .collect()
    };
    Partition::new(raw.question.trim(), resolve(&raw.yes), resolve(&raw.no))
}

/// Resolve, repair and de-duplicate raw blocks; keeps at most `fanout`.
pub fn repair_candidates(raws: &[RawPartition], req: &GenerationRequest<'_>) -> Result<Vec<Partition>, GenerationError> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for raw in raws {
        let resolved = resolve_raw(raw, req.set, req.catalog);
        let Ok(p) = normalize_partition(&resolved, req.set) else { continue };
        if seen.insert(casefold(&p.question)) {
            out.push(p);
        }
        if out.len() == req.fanout {
            break;
        }
    }
    if out.is_empty() {
        return Err(GenerationError::NoValidCandidates);
    }
    Ok(out)
}
