//! Batch benchmark: simulated answerer, per-sample records and the
//! SR / MSC / QGC report.

use std::fmt::Write as _;
use std::sync::Arc;

use inquest_core::{
    CallCounters, Catalog, ChatProvider, ClusterError, ClusterId, ClusterStore, Domain, EmbeddingProvider,
    HashedBagOfWords, Mode, OracleGenerator, OutcomeId, Partition, PossibilitySet, ProviderError, QuestionGenerator,
    QuestionTree, Session, SessionDeps, SessionError, SetRenewer, Status, Step,
};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::config::Config;
use crate::dataset::Dataset;
use crate::llm::{constrain_possibilities, open_set_update, LlmError, LlmGenerator, LlmRenewer};

/// What the answerer is looking at.
#[derive(Debug, Clone, Copy)]
pub enum Asked<'a> {
    Info(&'a Partition),
    Target(OutcomeId),
}

/// Truthful answer on behalf of `target`.
pub fn simulated_answer(asked: Asked<'_>, target: OutcomeId, catalog: &Catalog, domain: Domain) -> String {
    match asked {
        Asked::Info(p) if p.yes.contains(target) => String::from("Yes."),
        Asked::Info(_) => String::from("No."),
        Asked::Target(id) if id == target => domain.confirmation(catalog.label(target)),
        Asked::Target(_) => String::from("No."),
    }
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("dataset has no samples")]
    EmptyDataset,
    #[error("{0} mode needs a chat provider")]
    MissingProvider(&'static str),
    #[error(transparent)]
    Cluster(#[from] ClusterError),
    #[error("embedding failed: {0}")]
    Embedding(ProviderError),
}

/// Generator, optional chat provider, embedder and the shared counters.
pub struct Engine {
    pub generator: Box<dyn QuestionGenerator>,
    pub chat: Option<Arc<dyn ChatProvider>>,
    pub embedder: Box<dyn EmbeddingProvider>,
    pub counters: Arc<CallCounters>,
}

impl Engine {
    /// Perfect-split generator over the dataset's attribute signatures.
    pub fn oracle(dataset: &Dataset) -> Self {
        let counters = Arc::new(CallCounters::new());
        let generator = OracleGenerator::new(counters.clone()).with_attribute_names(dataset.attribute_names.clone());
        Self { generator: Box::new(generator), chat: None, embedder: Box::new(HashedBagOfWords::default()), counters }
    }

    /// Model-backed generation; the same provider serves set classification.
    pub fn llm(provider: Arc<dyn ChatProvider>, domain: Domain) -> Self {
        let counters = Arc::new(CallCounters::new());
        let generator = LlmGenerator::new(provider.clone(), domain, counters.clone());
        Self {
            generator: Box::new(generator),
            chat: Some(provider),
            embedder: Box::new(HashedBagOfWords::default()),
            counters,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TranscriptEntry {
    pub turn: u32,
    pub phase: &'static str,
    pub question: String,
    pub answer: String,
    pub set_size_after: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleResult {
    pub id: String,
    pub target: String,
    pub cluster: u32,
    pub success: bool,
    pub turns: u32,
    pub qgc: u64,
    pub max_turn_qgc: u64,
    /// Target never left the current node's set (closed-set runs).
    pub target_always_in_set: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub transcript: Vec<TranscriptEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchmarkReport {
    pub dataset_id: String,
    pub mode: &'static str,
    pub n_samples: usize,
    /// Percentage of successful conversations.
    pub sr: f64,
    /// Mean turns over successes; absent without any success.
    pub msc: Option<f64>,
    pub mean_qgc: f64,
    /// Mean over every sample but the first.
    pub mean_qgc_warm: Option<f64>,
    pub total_qgc: u64,
    pub other_calls: u64,
    pub samples: Vec<SampleResult>,
}

#[derive(Debug, Clone)]
pub struct BenchOptions {
    pub config: Config,
    pub mode: Mode,
    /// Shuffles the sample order; file order otherwise.
    pub shuffle_seed: Option<u64>,
}

impl BenchOptions {
    pub fn new(config: Config, mode: Mode) -> Self {
        Self { config, mode, shuffle_seed: None }
    }
}

/// Runs every sample through a full session against the shared `tree` and
/// `clusters`, which keep their cache and bonuses for the next run.
pub fn run_benchmark(
    dataset: &mut Dataset,
    tree: &mut QuestionTree,
    clusters: &mut ClusterStore,
    engine: &Engine,
    opts: &BenchOptions,
) -> Result<BenchmarkReport, BenchError> {
    if dataset.samples.is_empty() {
        return Err(BenchError::EmptyDataset);
    }
    if opts.mode != Mode::Closed && engine.chat.is_none() {
        return Err(BenchError::MissingProvider(opts.mode.as_str()));
    }
    let mut order: Vec<usize> = (0..dataset.samples.len()).collect();
    if let Some(seed) = opts.shuffle_seed {
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    }
    let qgc_start = engine.counters.qgc();
    let other_start = engine.counters.other_calls();
    let mut samples = Vec::with_capacity(order.len());
    for i in order {
        let sample = dataset.samples[i].clone();
        let embedding = engine.embedder.embed(&sample.problem_description).map_err(BenchError::Embedding)?;
        let cluster = clusters.assign(embedding)?;
        let result = run_sample(&sample, cluster, dataset, tree, engine, opts);
        samples.push(result);
    }
    Ok(summarize(
        dataset.id.clone(),
        opts.mode,
        samples,
        engine.counters.qgc() - qgc_start,
        engine.counters.other_calls() - other_start,
    ))
}

fn initial_set(
    description: &str,
    dataset: &mut Dataset,
    engine: &Engine,
    opts: &BenchOptions,
) -> Result<PossibilitySet, String> {
    let full = dataset.catalog.full_set();
    let Some(chat) = &engine.chat else { return Ok(full) };
    match opts.mode {
        Mode::Closed => Ok(full),
        Mode::Constrained => {
            constrain_possibilities(description, &full, &dataset.catalog, dataset.domain, &**chat, &engine.counters)
                .map_err(|e| e.to_string())
        }
        Mode::Open => {
            let labels = open_set_update(
                description,
                &[],
                &[],
                opts.config.open_set_size,
                dataset.domain,
                &**chat,
                &engine.counters,
            )
            .map_err(|e: LlmError| e.to_string())?;
            let mut set = PossibilitySet::new();
            for l in labels {
                set.insert(dataset.catalog.intern(&l).map_err(|e| e.to_string())?);
            }
            Ok(set)
        }
    }
}

fn run_sample(
    sample: &crate::dataset::Sample,
    cluster: ClusterId,
    dataset: &mut Dataset,
    tree: &mut QuestionTree,
    engine: &Engine,
    opts: &BenchOptions,
) -> SampleResult {
    let mut result = SampleResult {
        id: sample.id.clone(),
        target: dataset.catalog.label(sample.target).to_string(),
        cluster: cluster.0,
        success: false,
        turns: 0,
        qgc: 0,
        max_turn_qgc: 0,
        target_always_in_set: true,
        error: None,
        transcript: Vec::new(),
    };
    let qgc_before = engine.counters.qgc();
    let set = match initial_set(&sample.problem_description, dataset, engine, opts) {
        Ok(s) => s,
        Err(e) => {
            result.error = Some(e);
            return result;
        }
    };
    let renewer = engine.chat.as_ref().filter(|_| opts.mode == Mode::Open).map(|chat| LlmRenewer {
        provider: chat.clone(),
        domain: dataset.domain,
        counters: engine.counters.clone(),
        problem_description: sample.problem_description.clone(),
    });
    let params = opts.config.session_params(opts.mode, dataset.domain);
    let domain = dataset.domain;
    let mut deps = SessionDeps {
        tree,
        catalog: &mut dataset.catalog,
        generator: &*engine.generator,
        classifier: None,
        renewer: renewer.as_ref().map(|r| r as &dyn SetRenewer),
    };

    let mut mark = engine.counters.qgc();
    let started = Session::start(params, cluster, set, &mut deps);
    let (mut session, mut step) = match started {
        Ok(pair) => pair,
        Err(e) => {
            result.error = Some(e.to_string());
            result.qgc = engine.counters.qgc() - qgc_before;
            return result;
        }
    };
    let mut outcome: Result<(), SessionError> = Ok(());
    loop {
        let now = engine.counters.qgc();
        result.max_turn_qgc = result.max_turn_qgc.max(now - mark);
        mark = now;
        if !deps.tree.answer(session.node()).set.contains(sample.target) {
            result.target_always_in_set = false;
        }
        let Step::Ask { .. } = &step else { break };
        let answer = {
            let asked = match (session.pending_target(), session.asked().last()) {
                (Some(id), _) => Asked::Target(id),
                (None, Some(&q)) => Asked::Info(&deps.tree.question(q).partition),
                (None, None) => break,
            };
            simulated_answer(asked, sample.target, deps.catalog, domain)
        };
        match session.answer(&answer, &mut deps) {
            Ok(next) => step = next,
            Err(e) => {
                outcome = Err(e);
                break;
            }
        }
    }
    if let Err(e) = outcome {
        result.error = Some(e.to_string());
    }
    if let Status::Success { label, turns } = session.status() {
        result.success = dataset_label_matches(deps.catalog, label, sample.target);
        result.turns = *turns;
    } else {
        result.turns = session.turn();
    }
    result.transcript = session
        .transcript()
        .iter()
        .map(|r| TranscriptEntry {
            turn: r.turn,
            phase: r.phase.as_str(),
            question: r.question.clone(),
            answer: r.answer.clone(),
            set_size_after: r.set_size_after,
        })
        .collect();
    result.qgc = engine.counters.qgc() - qgc_before;
    result
}

fn dataset_label_matches(catalog: &Catalog, label: &str, target: OutcomeId) -> bool {
    catalog.lookup(label) == Some(target)
}

/// Aggregates per-sample records; also used to cross-check stored reports.
pub fn summarize(
    dataset_id: String,
    mode: Mode,
    samples: Vec<SampleResult>,
    total_qgc: u64,
    other_calls: u64,
) -> BenchmarkReport {
    let n = samples.len();
    let wins: Vec<u32> = samples.iter().filter(|s| s.success).map(|s| s.turns).collect();
    let sr = if n == 0 { 0.0 } else { 100.0 * wins.len() as f64 / n as f64 };
    let msc = (!wins.is_empty()).then(|| wins.iter().map(|t| *t as f64).sum::<f64>() / wins.len() as f64);
    let mean_qgc = if n == 0 { 0.0 } else { total_qgc as f64 / n as f64 };
    let mean_qgc_warm =
        (n > 1).then(|| samples[1..].iter().map(|s| s.qgc as f64).sum::<f64>() / (n - 1) as f64);
    BenchmarkReport { dataset_id, mode: mode.as_str(), n_samples: n, sr, msc, mean_qgc, mean_qgc_warm, total_qgc, other_calls, samples }
}

/// Aligned two-column summary.
pub fn render_table(report: &BenchmarkReport) -> String {
    let fmt = |v: Option<f64>| v.map_or_else(|| String::from("n/a"), |x| format!("{x:.2}"));
    let rows = [
        ("dataset", report.dataset_id.clone()),
        ("mode", report.mode.to_string()),
        ("samples", report.n_samples.to_string()),
        ("SR (%)", format!("{:.2}", report.sr)),
        ("MSC", fmt(report.msc)),
        ("mean QGC", format!("{:.2}", report.mean_qgc)),
        ("mean QGC (warm)", fmt(report.mean_qgc_warm)),
        ("total QGC", report.total_qgc.to_string()),
        ("other calls", report.other_calls.to_string()),
    ];
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    let mut out = String::new();
    for (k, v) in rows {
        let _ = writeln!(out, "{k:<width$}  {v}");
    }
    out
}
