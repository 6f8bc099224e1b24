//! Depth-limited MCTS over the question tree.
//!
//! The search root is always the answer node the conversation currently sits
//! at. Each iteration picks one of its child questions by the bonus-augmented
//! UCT score, runs a random rollout below it, and credits the rollout value to
//! that question only. Rollouts may expand a single node: the answer child
//! directly under the selected question. If the root itself needed expanding
//! this turn, that expansion uses the first iteration's allowance, so a turn
//! issues at most `iterations` generation calls.

use rand::Rng;
use thiserror::Error;

use crate::cluster::ClusterId;
use crate::generate::{GenerationError, GenerationRequest, QuestionGenerator};
use crate::rewards::{expected_reward, RewardConfig};
use crate::tree::{AnswerId, Branch, NodeRef, QuestionId, QuestionTree, TreeError};
use crate::types::Catalog;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchConfig {
    /// K
    pub iterations: u32,
    /// C
    pub exploration: f64,
    /// d_s
    pub sim_depth: u32,
    /// m
    pub fanout: usize,
    pub reward: RewardConfig,
    pub rng_seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self { iterations: 10, exploration: 0.2, sim_depth: 3, fanout: 3, reward: RewardConfig::default(), rng_seed: 0 }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<(), PlanError> {
        if self.iterations == 0 {
            return Err(PlanError::InvalidConfig("iterations must be at least 1"));
        }
        if self.sim_depth == 0 {
            return Err(PlanError::InvalidConfig("sim_depth must be at least 1"));
        }
        if self.fanout == 0 {
            return Err(PlanError::InvalidConfig("fanout must be at least 1"));
        }
        if !(self.exploration >= 0.0 && self.exploration.is_finite()) {
            return Err(PlanError::InvalidConfig("exploration must be non-negative"));
        }
        if !(self.reward.lambda > 0.0) {
            return Err(PlanError::InvalidConfig("lambda must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlanError {
    #[error("search root holds at most two outcomes")]
    TerminalRoot,
    #[error("question generation failed: {0}")]
    GenerationFailed(#[from] GenerationError),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error("invalid search config: {0}")]
    InvalidConfig(&'static str),
}

/// `R_total/N + C*sqrt(ln N_p / N) + B_k`; unvisited questions score `+inf`.
pub fn uct_score(tree: &QuestionTree, q: QuestionId, parent_visits: u64, cluster: ClusterId, c: f64) -> f64 {
    let node = tree.question(q);
    if node.visits == 0 {
        return f64::INFINITY;
    }
    let n = node.visits as f64;
    let np = (parent_visits.max(node.visits)) as f64;
    node.r_total / n + c * libm::sqrt(libm::log(np) / n) + node.bonus_for(cluster)
}

/// Adds `value` to `r_total` and one visit to every question on `path`.
pub fn backpropagate(tree: &mut QuestionTree, value: f64, path: &[QuestionId]) {
    for &q in path {
        let node = tree.question_mut(q);
        node.r_total += value;
        node.visits += 1;
    }
}

fn expand(
    tree: &mut QuestionTree,
    at: AnswerId,
    cfg: &SearchConfig,
    catalog: &Catalog,
    gen: &dyn QuestionGenerator,
) -> Result<(), PlanError> {
    let context = tree.ancestral_context(at);
    let set = tree.answer(at).set.clone();
    let req = GenerationRequest { set: &set, context: &context, fanout: cfg.fanout, catalog };
    let partitions = gen.generate(&req)?;
    let mut attached = 0;
    for p in partitions {
        if tree.attach_question(at, p, &cfg.reward).is_ok() {
            attached += 1;
        }
    }
    if attached == 0 {
        return Err(PlanError::GenerationFailed(GenerationError::NoValidCandidates));
    }
    Ok(())
}

fn first_max(values: impl Iterator<Item = f64>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in values.enumerate() {
        if best.map_or(true, |(_, b)| v > b) {
            best = Some((i, v));
        }
    }
    best.map(|(i, _)| i)
}

/// Runs `cfg.iterations` search iterations from `root` and returns the child
/// question with the highest expected reward (lowest index on ties).
pub fn plan_question<R: Rng + ?Sized>(
    tree: &mut QuestionTree,
    root: AnswerId,
    cluster: ClusterId,
    cfg: &SearchConfig,
    catalog: &Catalog,
    gen: &dyn QuestionGenerator,
    rng: &mut R,
) -> Result<QuestionId, PlanError> {
    cfg.validate()?;
    if tree.answer(root).is_terminal() {
        return Err(PlanError::TerminalRoot);
    }
    let mut root_expanded_now = false;
    if !tree.answer(root).is_expanded() {
        expand(tree, root, cfg, catalog, gen)?;
        root_expanded_now = true;
    }
    for i in 0..cfg.iterations {
        let children = tree.answer(root).children.clone();
        let np: u64 = children.iter().map(|&c| tree.question(c).visits).sum();
        let pick = first_max(children.iter().map(|&c| uct_score(tree, c, np, cluster, cfg.exploration)))
            .expect("expanded root has children");
        let q = children[pick];
        let may_expand = !(i == 0 && root_expanded_now);
        let value = rollout(tree, q, cfg, catalog, gen, rng, may_expand)?;
        backpropagate(tree, value, &[q]);
    }
    let children = &tree.answer(root).children;
    let best = first_max(children.iter().map(|&c| expected_reward(tree, NodeRef::Question(c))))
        .expect("expanded root has children");
    Ok(children[best])
}

/// Random descent of at most `cfg.sim_depth` levels below `start`; returns
/// the expected reward of the last node reached.
pub fn simulate_rollout<R: Rng + ?Sized>(
    tree: &mut QuestionTree,
    start: QuestionId,
    cfg: &SearchConfig,
    catalog: &Catalog,
    gen: &dyn QuestionGenerator,
    rng: &mut R,
) -> Result<f64, PlanError> {
    rollout(tree, start, cfg, catalog, gen, rng, true)
}

fn rollout<R: Rng + ?Sized>(
    tree: &mut QuestionTree,
    start: QuestionId,
    cfg: &SearchConfig,
    catalog: &Catalog,
    gen: &dyn QuestionGenerator,
    rng: &mut R,
    may_expand: bool,
) -> Result<f64, PlanError> {
    let mut node = NodeRef::Question(start);
    let mut cur = start;
    for level in 0..cfg.sim_depth {
        let branch = if rng.random_bool(0.5) { Branch::Yes } else { Branch::No };
        let a = tree.question(cur).child(branch);
        node = NodeRef::Answer(a);
        let answer = tree.answer(a);
        if answer.is_terminal() {
            break;
        }
        if !answer.is_expanded() {
            if level == 0 && may_expand {
                expand(tree, a, cfg, catalog, gen)?;
            } else {
                break;
            }
        }
        let children = &tree.answer(a).children;
        cur = children[rng.random_range(0..children.len())];
        node = NodeRef::Question(cur);
    }
    Ok(expected_reward(tree, node))
}
