//! The cached question tree.
//!
//! Answer nodes hold a surviving possibility set; question nodes hold a
//! partition of their parent answer node plus the MCTS statistics. Nodes live
//! in two arenas and refer to each other by index, so the whole tree of one
//! dataset is a single owned value that can sit behind one lock.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::cluster::ClusterId;
use crate::rewards::{information_gain, RewardConfig};
use crate::types::{Partition, PossibilitySet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AnswerId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct QuestionId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeRef {
    Answer(AnswerId),
    Question(QuestionId),
}

/// Which answer edge leads from a question to its child.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Branch {
    Yes,
    No,
}

impl Branch {
    pub fn as_str(self) -> &'static str {
        match self {
            Branch::Yes => "yes",
            Branch::No => "no",
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Branch::Yes => "Yes",
            Branch::No => "No",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnswerNode {
    pub set: PossibilitySet,
    pub depth: u32,
    pub children: Vec<QuestionId>,
    pub parent: Option<(QuestionId, Branch)>,
}

impl AnswerNode {
    /// At most two outcomes left: time to guess.
    pub fn is_terminal(&self) -> bool {
        self.set.len() <= 2
    }

    pub fn is_expanded(&self) -> bool {
        !self.children.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuestionNode {
    pub partition: Partition,
    pub p_yes: f64,
    pub r_ig: f64,
    pub r_total: f64,
    pub visits: u64,
    pub bonus: BTreeMap<ClusterId, f64>,
    pub parent: AnswerId,
    pub yes_child: AnswerId,
    pub no_child: AnswerId,
}

impl QuestionNode {
    pub fn child(&self, branch: Branch) -> AnswerId {
        match branch {
            Branch::Yes => self.yes_child,
            Branch::No => self.no_child,
        }
    }

    pub fn bonus_for(&self, cluster: ClusterId) -> f64 {
        self.bonus.get(&cluster).copied().unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TreeError {
    #[error("unknown answer node {0:?}")]
    UnknownAnswer(AnswerId),
    #[error("partition `{question}` is not a disjoint cover of its parent set")]
    NotACover { question: String },
    #[error("partition `{question}` leaves one side empty")]
    Degenerate { question: String },
    #[error("invalid statistics: {0}")]
    InvalidStats(&'static str),
}

/// All roots, answer nodes and question nodes of one dataset.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct QuestionTree {
    dataset_id: String,
    answers: Vec<AnswerNode>,
    questions: Vec<QuestionNode>,
    roots: Vec<AnswerId>,
}

impl QuestionTree {
    pub fn new(dataset_id: impl Into<String>) -> Self {
        Self { dataset_id: dataset_id.into(), ..Self::default() }
    }

    pub fn dataset_id(&self) -> &str {
        &self.dataset_id
    }

    pub fn roots(&self) -> &[AnswerId] {
        &self.roots
    }

    pub fn answer(&self, id: AnswerId) -> &AnswerNode {
        &self.answers[id.0 as usize]
    }

    pub fn question(&self, id: QuestionId) -> &QuestionNode {
        &self.questions[id.0 as usize]
    }

    pub(crate) fn question_mut(&mut self, id: QuestionId) -> &mut QuestionNode {
        &mut self.questions[id.0 as usize]
    }

    pub fn answer_count(&self) -> usize {
        self.answers.len()
    }

    pub fn question_count(&self) -> usize {
        self.questions.len()
    }

    pub fn answer_ids(&self) -> impl Iterator<Item = AnswerId> {
        (0..self.answers.len() as u32).map(AnswerId)
    }

    pub fn question_ids(&self) -> impl Iterator<Item = QuestionId> {
        (0..self.questions.len() as u32).map(QuestionId)
    }

    /// Depth of the answer node a question was asked at.
    pub fn question_depth(&self, id: QuestionId) -> u32 {
        self.answer(self.question(id).parent).depth
    }

    /// First root (registry order) whose set covers `candidate`; a new root
    /// holding `candidate` otherwise.
    pub fn find_or_create_root(&mut self, candidate: &PossibilitySet) -> AnswerId {
        if let Some(&root) = self.roots.iter().find(|r| self.answer(**r).set.is_superset_of(candidate)) {
            return root;
        }
        self.push_root(candidate.clone())
    }

    /// Appends a root unconditionally.
    pub fn push_root(&mut self, set: PossibilitySet) -> AnswerId {
        let id = AnswerId(self.answers.len() as u32);
        self.answers.push(AnswerNode { set, depth: 0, children: Vec::new(), parent: None });
        self.roots.push(id);
        id
    }

    /// Hangs a normalized partition under `at` as a new question node with
    /// fresh YES/NO answer children.
    pub fn attach_question(
        &mut self,
        at: AnswerId,
        partition: Partition,
        reward: &RewardConfig,
    ) -> Result<QuestionId, TreeError> {
        let parent = self.answers.get(at.0 as usize).ok_or(TreeError::UnknownAnswer(at))?;
        let covers = partition.yes.is_disjoint(&partition.no)
            && partition.yes.len() + partition.no.len() == parent.set.len()
            && parent.set.is_superset_of(&partition.yes)
            && parent.set.is_superset_of(&partition.no);
        if !covers {
            return Err(TreeError::NotACover { question: partition.question });
        }
        if parent.set.len() > 1 && (partition.yes.is_empty() || partition.no.is_empty()) {
            return Err(TreeError::Degenerate { question: partition.question });
        }
        let depth = parent.depth + 1;
        let p_yes = partition.p_yes();
        // p_yes is a ratio of counts, always inside [0, 1].
        let r_ig = information_gain(p_yes, reward).unwrap_or(0.0);

        let qid = QuestionId(self.questions.len() as u32);
        let yes_child = AnswerId(self.answers.len() as u32);
        let no_child = AnswerId(yes_child.0 + 1);
        self.answers.push(AnswerNode {
            set: partition.yes.clone(),
            depth,
            children: Vec::new(),
            parent: Some((qid, Branch::Yes)),
        });
        self.answers.push(AnswerNode {
            set: partition.no.clone(),
            depth,
            children: Vec::new(),
            parent: Some((qid, Branch::No)),
        });
        self.questions.push(QuestionNode {
            partition,
            p_yes,
            r_ig,
            r_total: 0.0,
            visits: 0,
            bonus: BTreeMap::new(),
            parent: at,
            yes_child,
            no_child,
        });
        self.answers[at.0 as usize].children.push(qid);
        Ok(qid)
    }

    /// Overwrites the search statistics of a question (snapshot restore).
    pub fn restore_stats(
        &mut self,
        id: QuestionId,
        r_total: f64,
        visits: u64,
        bonus: BTreeMap<ClusterId, f64>,
    ) -> Result<(), TreeError> {
        if visits == 0 && r_total != 0.0 {
            return Err(TreeError::InvalidStats("r_total must be 0 when visits is 0"));
        }
        if !r_total.is_finite() {
            return Err(TreeError::InvalidStats("r_total must be finite"));
        }
        if bonus.values().any(|b| !(b.is_finite() && *b >= 0.0)) {
            return Err(TreeError::InvalidStats("bonus values must be finite and non-negative"));
        }
        let q = self.question_mut(id);
        q.r_total = r_total;
        q.visits = visits;
        q.bonus = bonus;
        Ok(())
    }

    /// Overwrites the stored entropy reward of a question (snapshot restore).
    pub fn restore_gain(&mut self, id: QuestionId, r_ig: f64) -> Result<(), TreeError> {
        if !(r_ig.is_finite() && (0.0..=1.0).contains(&r_ig)) {
            return Err(TreeError::InvalidStats("r_ig must lie in [0, 1]"));
        }
        self.question_mut(id).r_ig = r_ig;
        Ok(())
    }

    /// (question, answer) pairs from the root down to `at`.
    pub fn ancestral_context(&self, at: AnswerId) -> Vec<(String, Branch)> {
        let mut out = Vec::new();
        let mut cur = at;
        while let Some((q, branch)) = self.answer(cur).parent {
            let qn = self.question(q);
            out.push((qn.partition.question.clone(), branch));
            cur = qn.parent;
        }
        out.reverse();
        out
    }

    /// Question nodes from the root down to and including `q`.
    pub fn question_path(&self, q: QuestionId) -> Vec<QuestionId> {
        let mut out = Vec::new();
        let mut cur = Some(q);
        while let Some(id) = cur {
            out.push(id);
            cur = self.answer(self.question(id).parent).parent.map(|(p, _)| p);
        }
        out.reverse();
        out
    }

    /// Number of answer nodes at each depth.
    pub fn depth_histogram(&self) -> BTreeMap<u32, usize> {
        let mut hist = BTreeMap::new();
        for a in &self.answers {
            *hist.entry(a.depth).or_insert(0) += 1;
        }
        hist
    }
}
