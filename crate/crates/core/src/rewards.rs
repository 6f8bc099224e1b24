//! Entropy reward of a split and the accumulated / expected reward recursions.

use thiserror::Error;

use crate::tree::{NodeRef, QuestionId, QuestionTree};

/// Sharpening scale for the information-gain reward.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardConfig {
    pub lambda: f64,
}

impl Default for RewardConfig {
    fn default() -> Self {
        Self { lambda: 0.4 }
    }
}

impl RewardConfig {
    pub fn new(lambda: f64) -> Result<Self, RewardError> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(RewardError::InvalidLambda(lambda));
        }
        Ok(Self { lambda })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum RewardError {
    #[error("probability {0} outside [0, 1]")]
    Domain(f64),
    #[error("lambda must be positive and finite, got {0}")]
    InvalidLambda(f64),
}

fn plogp(p: f64) -> f64 {
    if p <= 0.0 {
        0.0
    } else {
        p * libm::log2(p)
    }
}

/// Binary entropy of a YES/NO split (base 2), damped by its imbalance:
/// `H(p) / (1 + |p_yes - p_no| / lambda)`.
///
/// A perfectly balanced split scores exactly 1.0, a one-sided split 0.0.
pub fn information_gain(p_yes: f64, cfg: &RewardConfig) -> Result<f64, RewardError> {
    if !(0.0..=1.0).contains(&p_yes) {
        return Err(RewardError::Domain(p_yes));
    }
    if !(cfg.lambda > 0.0) {
        return Err(RewardError::InvalidLambda(cfg.lambda));
    }
    let p_no = 1.0 - p_yes;
    let entropy = -plogp(p_yes) - plogp(p_no);
    let imbalance = libm::fabs(p_yes - p_no);
    Ok(entropy / (1.0 + imbalance / cfg.lambda))
}

/// Sum of `r_ig` over every question from the root trajectory down to `q`.
pub fn accumulated_reward(tree: &QuestionTree, q: QuestionId) -> f64 {
    let mut total = 0.0;
    let mut cur = Some(q);
    while let Some(id) = cur {
        let node = tree.question(id);
        total += node.r_ig;
        cur = tree.answer(node.parent).parent.map(|(p, _)| p);
    }
    total
}

/// Expected reward of a node.
///
/// * question whose answer children are both unexpanded: its accumulated reward;
/// * other questions: `p_yes * R_e(yes) + (1 - p_yes) * R_e(no)`;
/// * answer node with children: unweighted mean over its questions;
/// * answer node without children: the accumulated reward of the question
///   above it (0 for a bare root).
pub fn expected_reward(tree: &QuestionTree, node: NodeRef) -> f64 {
    match node {
        NodeRef::Question(q) => {
            let qn = tree.question(q);
            let yes = tree.answer(qn.yes_child);
            let no = tree.answer(qn.no_child);
            if !yes.is_expanded() && !no.is_expanded() {
                return accumulated_reward(tree, q);
            }
            qn.p_yes * expected_reward(tree, NodeRef::Answer(qn.yes_child))
                + (1.0 - qn.p_yes) * expected_reward(tree, NodeRef::Answer(qn.no_child))
        }
        NodeRef::Answer(a) => {
            let an = tree.answer(a);
            if an.children.is_empty() {
                return match an.parent {
                    Some((q, _)) => accumulated_reward(tree, q),
                    None => 0.0,
                };
            }
            let sum: f64 = an.children.iter().map(|&c| expected_reward(tree, NodeRef::Question(c))).sum();
            sum / an.children.len() as f64
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::{AnswerId, QuestionTree};
    use crate::types::{OutcomeId, Partition, PossibilitySet};
    use alloc::vec::Vec;

    fn ids(v: core::ops::Range<u32>) -> PossibilitySet {
        v.map(OutcomeId).collect()
    }

    // Independent of the implementation: natural log, explicit cases.
    fn oracle_ig(p: f64, lambda: f64) -> f64 {
        let h = |x: f64| if x == 0.0 { 0.0 } else { -x * x.ln() / core::f64::consts::LN_2 };
        (h(p) + h(1.0 - p)) / (1.0 + ((p - (1.0 - p)).abs()) / lambda)
    }

    #[test]
    fn balanced_split_is_one() {
        assert_eq!(information_gain(0.5, &RewardConfig::default()).unwrap(), 1.0);
    }

    #[test]
    fn degenerate_split_is_zero() {
        assert_eq!(information_gain(1.0, &RewardConfig::default()).unwrap(), 0.0);
        assert_eq!(information_gain(0.0, &RewardConfig::default()).unwrap(), 0.0);
    }

    #[test]
    fn three_quarter_split_matches_hand_value() {
        let v = information_gain(0.75, &RewardConfig::default()).unwrap();
        assert!((v - oracle_ig(0.75, 0.4)).abs() < 1e-12);
        assert!((v - 0.360568).abs() < 5e-7);
    }

    #[test]
    fn out_of_range_is_a_domain_error() {
        let cfg = RewardConfig::default();
        assert_eq!(information_gain(1.2, &cfg), Err(RewardError::Domain(1.2)));
        assert!(information_gain(f64::NAN, &cfg).is_err());
        assert!(RewardConfig::new(0.0).is_err());
    }

    #[test]
    fn symmetric_and_decreasing_in_imbalance() {
        let cfg = RewardConfig::default();
        let mut prev = f64::INFINITY;
        for i in 0..=50 {
            let p = 0.5 + i as f64 / 100.0;
            let v = information_gain(p, &cfg).unwrap();
            assert_eq!(v, information_gain(1.0 - p, &cfg).unwrap());
            assert!(v < prev, "not strictly decreasing at p = {p}");
            prev = v;
        }
    }

    fn chain(r_igs: usize) -> (QuestionTree, Vec<crate::tree::QuestionId>) {
        // 2^(n+1) outcomes split in half n times: every r_ig is exactly 1.
        let n = 1u32 << (r_igs + 1);
        let mut t = QuestionTree::new("t");
        let mut at: AnswerId = t.push_root(ids(0..n));
        let mut qs = Vec::new();
        let cfg = RewardConfig::default();
        let lo = 0;
        let mut hi = n;
        for i in 0..r_igs {
            let mid = (lo + hi) / 2;
            let q = t
                .attach_question(at, Partition::new(alloc::format!("q{i}"), ids(lo..mid), ids(mid..hi)), &cfg)
                .unwrap();
            qs.push(q);
            at = t.question(q).yes_child;
            hi = mid;
        }
        (t, qs)
    }

    #[test]
    fn accumulated_reward_unrolls() {
        let (t, qs) = chain(3);
        assert_eq!(accumulated_reward(&t, qs[0]), 1.0);
        assert_eq!(accumulated_reward(&t, qs[1]), 2.0);
        assert_eq!(accumulated_reward(&t, qs[2]), 3.0);
    }

    #[test]
    fn accumulated_reward_with_uneven_gains() {
        // r_ig chain [1.0, 0.9, 0.5] assembled through restore of r_ig values.
        let (mut t, qs) = chain(3);
        t.question_mut(qs[1]).r_ig = 0.9;
        t.question_mut(qs[2]).r_ig = 0.5;
        assert!((accumulated_reward(&t, qs[1]) - 1.9).abs() < 1e-12);
        assert!((accumulated_reward(&t, qs[2]) - 2.4).abs() < 1e-12);
    }

    #[test]
    fn expected_reward_of_leaf_question_is_accumulated() {
        let (mut t, qs) = chain(3);
        t.question_mut(qs[1]).r_ig = 0.9;
        t.question_mut(qs[2]).r_ig = 0.5;
        assert!((expected_reward(&t, NodeRef::Question(qs[2])) - 2.4).abs() < 1e-12);
    }

    #[test]
    fn question_mixture_and_answer_mean() {
        // root {0..8}: q splits 4/4; yes child gets question r_ig such that
        // R_e(yes) = 2.0, no child R_e = 4.0 via hand-set r_ig.
        let mut t = QuestionTree::new("t");
        let cfg = RewardConfig::default();
        let root = t.push_root(ids(0..8));
        let q = t.attach_question(root, Partition::new("q", ids(0..4), ids(4..8)), &cfg).unwrap();
        let (ya, na) = (t.question(q).yes_child, t.question(q).no_child);
        let qy = t.attach_question(ya, Partition::new("y", ids(0..2), ids(2..4)), &cfg).unwrap();
        let qn = t.attach_question(na, Partition::new("n", ids(4..6), ids(6..8)), &cfg).unwrap();
        t.question_mut(q).r_ig = 1.0;
        t.question_mut(qy).r_ig = 1.0; // R_a = 2.0
        t.question_mut(qn).r_ig = 3.0; // R_a = 4.0
        assert_eq!(expected_reward(&t, NodeRef::Answer(ya)), 2.0);
        assert_eq!(expected_reward(&t, NodeRef::Answer(na)), 4.0);
        assert_eq!(expected_reward(&t, NodeRef::Question(q)), 3.0);

        // answer node with three child questions of values 1, 2, 3
        let mut t = QuestionTree::new("t");
        let root = t.push_root(ids(0..6));
        for (i, r) in [1.0, 2.0, 3.0].into_iter().enumerate() {
            let c = t
                .attach_question(root, Partition::new(alloc::format!("c{i}"), ids(0..3), ids(3..6)), &cfg)
                .unwrap();
            t.question_mut(c).r_ig = r;
        }
        assert_eq!(expected_reward(&t, NodeRef::Answer(root)), 2.0);
    }

    #[test]
    fn bare_root_and_unexpanded_answer_fallbacks() {
        let (t, qs) = chain(1);
        assert_eq!(expected_reward(&t, NodeRef::Answer(t.roots()[0])), 1.0);
        let lone = QuestionTree::new("x");
        let mut lone = lone;
        let r = lone.push_root(ids(0..3));
        assert_eq!(expected_reward(&lone, NodeRef::Answer(r)), 0.0);
        assert_eq!(expected_reward(&t, NodeRef::Answer(t.question(qs[0]).no_child)), 1.0);
    }
}
