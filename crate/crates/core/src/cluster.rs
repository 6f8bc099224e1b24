//! Online clustering of problem-description embeddings and the depth-decayed
//! feedback bonus.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::gateway::{EmbeddingProvider, ProviderError};
use crate::tree::{QuestionId, QuestionTree};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct ClusterId(pub u32);

impl fmt::Display for ClusterId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A raw (not necessarily unit) embedding vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding(pub Vec<f64>);

impl Embedding {
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.0.iter().map(|v| v * v).sum())
    }

    /// Cosine similarity on the raw vectors.
    pub fn cosine(&self, other: &Embedding) -> f64 {
        let dot: f64 = self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum();
        dot / (self.norm() * other.norm())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClusterError {
    #[error("embedding has dimension {found}, store expects {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("embedding has zero norm or non-finite values")]
    ZeroNorm,
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("cluster {0} has no members")]
    EmptyCluster(ClusterId),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    pub id: ClusterId,
    pub members: Vec<Embedding>,
    pub medoid_index: usize,
    // Summed cosine of each member against every member, self included.
    row_sums: Vec<f64>,
}

impl Cluster {
    /// Rebuilds a cluster from stored members; the medoid index is kept as given.
    pub fn from_parts(id: ClusterId, members: Vec<Embedding>, medoid_index: usize) -> Result<Self, ClusterError> {
        if members.is_empty() {
            return Err(ClusterError::EmptyCluster(id));
        }
        if medoid_index >= members.len() {
            return Err(ClusterError::InvalidParameter("medoid index out of range"));
        }
        let row_sums = members.iter().map(|x| members.iter().map(|y| x.cosine(y)).sum()).collect();
        Ok(Self { id, members, medoid_index, row_sums })
    }

    pub fn medoid(&self) -> &Embedding {
        &self.members[self.medoid_index]
    }

    fn push(&mut self, e: Embedding) {
        let mut own = 0.0;
        for (m, sum) in self.members.iter().zip(self.row_sums.iter_mut()) {
            let c = m.cosine(&e);
            *sum += c;
            own += c;
        }
        own += e.cosine(&e);
        self.members.push(e);
        self.row_sums.push(own);
        self.medoid_index = argmax_first(&self.row_sums);
    }
}

fn argmax_first(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// Brute-force medoid: the member with the largest summed cosine to all
/// members (self included), lowest index on ties.
pub fn recompute_medoid(cluster: &Cluster) -> usize {
    let sums: Vec<f64> = cluster
        .members
        .iter()
        .map(|x| cluster.members.iter().map(|y| x.cosine(y)).sum())
        .collect();
    argmax_first(&sums)
}

/// Bonus scale and depth decay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeedbackConfig {
    pub beta: f64,
    pub gamma: f64,
}

impl Default for FeedbackConfig {
    fn default() -> Self {
        Self { beta: 0.2, gamma: 0.9 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterStore {
    pub tau: f64,
    pub feedback: FeedbackConfig,
    dim: Option<usize>,
    clusters: Vec<Cluster>,
}

impl Default for ClusterStore {
    fn default() -> Self {
        Self { tau: 0.9, feedback: FeedbackConfig::default(), dim: None, clusters: Vec::new() }
    }
}

impl ClusterStore {
    pub fn new(tau: f64, feedback: FeedbackConfig) -> Result<Self, ClusterError> {
        if !(tau > 0.0 && tau <= 1.0) {
            return Err(ClusterError::InvalidParameter("tau must lie in (0, 1]"));
        }
        if !(feedback.beta > 0.0 && feedback.beta.is_finite()) {
            return Err(ClusterError::InvalidParameter("beta must be positive"));
        }
        if !(feedback.gamma > 0.0 && feedback.gamma < 1.0) {
            return Err(ClusterError::InvalidParameter("gamma must lie in (0, 1)"));
        }
        Ok(Self { tau, feedback, dim: None, clusters: Vec::new() })
    }

    /// Restores a store from snapshot parts.
    pub fn with_clusters(mut self, clusters: Vec<Cluster>) -> Result<Self, ClusterError> {
        let mut dim = None;
        for c in &clusters {
            for m in &c.members {
                match dim {
                    None => dim = Some(m.dim()),
                    Some(d) if d != m.dim() => {
                        return Err(ClusterError::DimensionMismatch { expected: d, found: m.dim() })
                    }
                    _ => {}
                }
            }
        }
        self.dim = dim;
        self.clusters = clusters;
        Ok(self)
    }

    pub fn clusters(&self) -> &[Cluster] {
        &self.clusters
    }

    pub fn cluster(&self, id: ClusterId) -> Option<&Cluster> {
        self.clusters.iter().find(|c| c.id == id)
    }

    pub fn dim(&self) -> Option<usize> {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    /// Joins `e` to the most similar cluster whose medoid clears `tau`, or
    /// opens a new cluster with `e` as its medoid.
    pub fn assign(&mut self, e: Embedding) -> Result<ClusterId, ClusterError> {
        if let Some(d) = self.dim {
            if d != e.dim() {
                return Err(ClusterError::DimensionMismatch { expected: d, found: e.dim() });
            }
        }
        let n = e.norm();
        if !(n > 0.0 && n.is_finite()) {
            return Err(ClusterError::ZeroNorm);
        }
        self.dim = Some(e.dim());

        let mut best: Option<(usize, f64)> = None;
        for (i, c) in self.clusters.iter().enumerate() {
            let sim = e.cosine(c.medoid());
            if sim >= self.tau && best.map_or(true, |(_, s)| sim > s) {
                best = Some((i, sim));
            }
        }
        match best {
            Some((i, _)) => {
                self.clusters[i].push(e);
                Ok(self.clusters[i].id)
            }
            None => {
                let id = ClusterId(self.clusters.len() as u32);
                self.clusters.push(Cluster { id, members: vec![e], medoid_index: 0, row_sums: vec![1.0] });
                Ok(id)
            }
        }
    }
}

/// Credits every asked question of a successful conversation:
/// `bonus[k] += beta * r_total * gamma^d`, with `d` the depth of the answer
/// node the question was asked at.
pub fn propagate_feedback(tree: &mut QuestionTree, trajectory: &[QuestionId], cluster: ClusterId, cfg: &FeedbackConfig) {
    for &q in trajectory {
        let depth = tree.question_depth(q);
        let node = tree.question_mut(q);
        let credit = cfg.beta * node.r_total * libm::pow(cfg.gamma, depth as f64);
        *node.bonus.entry(cluster).or_insert(0.0) += credit;
    }
}

/// Deterministic offline embedder: lower-cased alphanumeric tokens hashed
/// (FNV-1a) into a fixed number of buckets, then unit-normalized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HashedBagOfWords {
    pub dim: usize,
}

impl Default for HashedBagOfWords {
    fn default() -> Self {
        Self { dim: 256 }
    }
}

fn fnv1a(bytes: impl Iterator<Item = u8>) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

impl HashedBagOfWords {
    pub fn embed_text(&self, text: &str) -> Embedding {
        let dim = self.dim.max(1);
        let mut v = vec![0.0; dim];
        for token in text.split(|c: char| !c.is_alphanumeric()).filter(|t| !t.is_empty()) {
            let h = fnv1a(token.to_lowercase().bytes());
            v[(h % dim as u64) as usize] += 1.0;
        }
        let norm = libm::sqrt(v.iter().map(|x| x * x).sum());
        if norm == 0.0 {
            v[0] = 1.0;
        } else {
            v.iter_mut().for_each(|x| *x /= norm);
        }
        Embedding(v)
    }
}

impl EmbeddingProvider for HashedBagOfWords {
    fn embed(&self, text: &str) -> Result<Embedding, ProviderError> {
        Ok(self.embed_text(text))
    }
}
