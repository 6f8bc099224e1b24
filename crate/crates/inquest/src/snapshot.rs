//! JSON snapshots of a question tree and of the cluster store.
//!
//! Trees are written as nested documents keyed by outcome labels, so a
//! snapshot survives catalog reordering. Loading rebuilds the arena in
//! depth-first order; node ids may differ from the saved tree but child
//! order, sets and statistics are preserved.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use inquest_core::{
    AnswerId, Branch, Catalog, CatalogError, Cluster, ClusterError, ClusterId, ClusterStore, Embedding,
    FeedbackConfig, Partition, PossibilitySet, QuestionTree, RewardConfig, TreeError,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const TREE_VERSION: u32 = 1;
pub const CLUSTER_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("snapshot version {found} is not supported (expected {expected})")]
    VersionMismatch { expected: u32, found: u32 },
    #[error("corrupt snapshot: {0}")]
    CorruptSnapshot(String),
    #[error("snapshot io on {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl From<TreeError> for SnapshotError {
    fn from(e: TreeError) -> Self {
        SnapshotError::CorruptSnapshot(e.to_string())
    }
}

impl From<CatalogError> for SnapshotError {
    fn from(e: CatalogError) -> Self {
        SnapshotError::CorruptSnapshot(e.to_string())
    }
}

impl From<ClusterError> for SnapshotError {
    fn from(e: ClusterError) -> Self {
        SnapshotError::CorruptSnapshot(e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeDoc {
    pub version: u32,
    pub dataset_id: String,
    pub roots: Vec<AnswerDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnswerDoc {
    pub set: Vec<String>,
    pub depth: u32,
    pub ancestral_context: Vec<(String, String)>,
    pub children: Vec<QuestionDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionDoc {
    pub question: String,
    pub yes_set: Vec<String>,
    pub no_set: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuestionDoc {
    pub partition: PartitionDoc,
    pub p_yes: f64,
    pub r_ig: f64,
    pub r_total: f64,
    pub visits: u64,
    pub bonus: BTreeMap<String, f64>,
    pub yes_child: AnswerDoc,
    pub no_child: AnswerDoc,
}

fn answer_doc(tree: &QuestionTree, catalog: &Catalog, id: AnswerId) -> AnswerDoc {
    let node = tree.answer(id);
    AnswerDoc {
        set: catalog.labels(&node.set),
        depth: node.depth,
        ancestral_context: tree
            .ancestral_context(id)
            .into_iter()
            .map(|(q, b)| (q, b.as_str().to_string()))
            .collect(),
        children: node
            .children
            .iter()
            .map(|&q| {
                let qn = tree.question(q);
                QuestionDoc {
                    partition: PartitionDoc {
                        question: qn.partition.question.clone(),
                        yes_set: catalog.labels(&qn.partition.yes),
                        no_set: catalog.labels(&qn.partition.no),
                    },
                    p_yes: qn.p_yes,
                    r_ig: qn.r_ig,
                    r_total: qn.r_total,
                    visits: qn.visits,
                    bonus: qn.bonus.iter().map(|(k, v)| (k.0.to_string(), *v)).collect(),
                    yes_child: answer_doc(tree, catalog, qn.yes_child),
                    no_child: answer_doc(tree, catalog, qn.no_child),
                }
            })
            .collect(),
    }
}

pub fn tree_to_doc(tree: &QuestionTree, catalog: &Catalog) -> TreeDoc {
    TreeDoc {
        version: TREE_VERSION,
        dataset_id: tree.dataset_id().to_string(),
        roots: tree.roots().iter().map(|&r| answer_doc(tree, catalog, r)).collect(),
    }
}

pub fn tree_to_json(tree: &QuestionTree, catalog: &Catalog) -> String {
    serde_json::to_string_pretty(&tree_to_doc(tree, catalog)).expect("tree documents always serialize")
}

fn labels_to_set(labels: &[String], catalog: &mut Catalog) -> Result<PossibilitySet, SnapshotError> {
    let mut set = PossibilitySet::new();
    for l in labels {
        if !set.insert(catalog.intern(l)?) {
            return Err(SnapshotError::CorruptSnapshot(format!("label `{l}` repeated in a set")));
        }
    }
    Ok(set)
}

fn restore_children(
    tree: &mut QuestionTree,
    catalog: &mut Catalog,
    at: AnswerId,
    doc: &AnswerDoc,
    reward: &RewardConfig,
) -> Result<(), SnapshotError> {
    let node = tree.answer(at);
    if node.depth != doc.depth {
        return Err(SnapshotError::CorruptSnapshot(format!("depth {} recorded as {}", node.depth, doc.depth)));
    }
    let context: Vec<(String, String)> =
        tree.ancestral_context(at).into_iter().map(|(q, b)| (q, b.as_str().to_string())).collect();
    if context != doc.ancestral_context {
        return Err(SnapshotError::CorruptSnapshot(format!("ancestral context mismatch at depth {}", doc.depth)));
    }
    for child in &doc.children {
        let yes = labels_to_set(&child.partition.yes_set, catalog)?;
        let no = labels_to_set(&child.partition.no_set, catalog)?;
        let q = tree.attach_question(at, Partition::new(child.partition.question.clone(), yes, no), reward)?;
        if (tree.question(q).p_yes - child.p_yes).abs() > 1e-12 {
            return Err(SnapshotError::CorruptSnapshot(format!(
                "p_yes {} disagrees with the partition of `{}`",
                child.p_yes, child.partition.question
            )));
        }
        let mut bonus = BTreeMap::new();
        for (k, v) in &child.bonus {
            let id: u32 = k.parse().map_err(|_| SnapshotError::CorruptSnapshot(format!("bad cluster key `{k}`")))?;
            bonus.insert(ClusterId(id), *v);
        }
        tree.restore_stats(q, child.r_total, child.visits, bonus)?;
        tree.restore_gain(q, child.r_ig)?;
        let (yes_id, no_id) = (tree.question(q).child(Branch::Yes), tree.question(q).child(Branch::No));
        for (id, sub) in [(yes_id, &child.yes_child), (no_id, &child.no_child)] {
            if catalog.labels(&tree.answer(id).set) != sub.set {
                return Err(SnapshotError::CorruptSnapshot(format!(
                    "child set of `{}` disagrees with its partition",
                    child.partition.question
                )));
            }
            restore_children(tree, catalog, id, sub, reward)?;
        }
    }
    Ok(())
}

/// Rebuilds a tree; unknown labels are interned into `catalog`.
pub fn tree_from_doc(doc: &TreeDoc, catalog: &mut Catalog, reward: &RewardConfig) -> Result<QuestionTree, SnapshotError> {
    if doc.version != TREE_VERSION {
        return Err(SnapshotError::VersionMismatch { expected: TREE_VERSION, found: doc.version });
    }
    let mut tree = QuestionTree::new(doc.dataset_id.clone());
    for root in &doc.roots {
        let set = labels_to_set(&root.set, catalog)?;
        if set.is_empty() {
            return Err(SnapshotError::CorruptSnapshot("empty root set".into()));
        }
        let id = tree.push_root(set);
        restore_children(&mut tree, catalog, id, root, reward)?;
    }
    Ok(tree)
}

pub fn tree_from_json(text: &str, catalog: &mut Catalog, reward: &RewardConfig) -> Result<QuestionTree, SnapshotError> {
    let version: VersionProbe =
        serde_json::from_str(text).map_err(|e| SnapshotError::CorruptSnapshot(e.to_string()))?;
    if version.version != TREE_VERSION {
        return Err(SnapshotError::VersionMismatch { expected: TREE_VERSION, found: version.version });
    }
    let doc: TreeDoc = serde_json::from_str(text).map_err(|e| SnapshotError::CorruptSnapshot(e.to_string()))?;
    tree_from_doc(&doc, catalog, reward)
}

#[derive(Deserialize)]
struct VersionProbe {
    version: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterDoc {
    pub version: u32,
    pub tau: f64,
    pub beta: f64,
    pub gamma: f64,
    pub clusters: Vec<ClusterEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterEntry {
    pub id: u32,
    pub medoid_index: usize,
    pub members: Vec<Vec<f64>>,
}

pub fn clusters_to_json(store: &ClusterStore) -> String {
    let doc = ClusterDoc {
        version: CLUSTER_VERSION,
        tau: store.tau,
        beta: store.feedback.beta,
        gamma: store.feedback.gamma,
        clusters: store
            .clusters()
            .iter()
            .map(|c| ClusterEntry {
                id: c.id.0,
                medoid_index: c.medoid_index,
                members: c.members.iter().map(|m| m.0.clone()).collect(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("cluster documents always serialize")
}

pub fn clusters_from_json(text: &str) -> Result<ClusterStore, SnapshotError> {
    let probe: VersionProbe = serde_json::from_str(text).map_err(|e| SnapshotError::CorruptSnapshot(e.to_string()))?;
    if probe.version != CLUSTER_VERSION {
        return Err(SnapshotError::VersionMismatch { expected: CLUSTER_VERSION, found: probe.version });
    }
    let doc: ClusterDoc = serde_json::from_str(text).map_err(|e| SnapshotError::CorruptSnapshot(e.to_string()))?;
    let mut clusters = Vec::with_capacity(doc.clusters.len());
    for (i, c) in doc.clusters.into_iter().enumerate() {
        if c.id as usize != i {
            return Err(SnapshotError::CorruptSnapshot(format!("cluster ids must be dense, found {} at {i}", c.id)));
        }
        let members = c.members.into_iter().map(Embedding).collect();
        clusters.push(Cluster::from_parts(ClusterId(c.id), members, c.medoid_index)?);
    }
    Ok(ClusterStore::new(doc.tau, FeedbackConfig { beta: doc.beta, gamma: doc.gamma })?.with_clusters(clusters)?)
}

/// `trees/foo.json` keeps its clusters in `trees/foo.clusters.json`.
pub fn cluster_path(tree_path: &Path) -> PathBuf {
    let stem = tree_path.file_stem().and_then(|s| s.to_str()).unwrap_or("tree");
    tree_path.with_file_name(format!("{stem}.clusters.json"))
}

fn write_atomic(path: &Path, text: &str) -> Result<(), SnapshotError> {
    let io = |source| SnapshotError::Io { path: path.display().to_string(), source };
    let tmp = path.with_extension("json.tmp");
    std::fs::write(&tmp, text).map_err(io)?;
    std::fs::rename(&tmp, path).map_err(io)
}

pub fn save(path: &Path, tree: &QuestionTree, catalog: &Catalog, clusters: &ClusterStore) -> Result<(), SnapshotError> {
    write_atomic(path, &tree_to_json(tree, catalog))?;
    write_atomic(&cluster_path(path), &clusters_to_json(clusters))
}

/// A missing cluster file yields `default_clusters`.
pub fn load(
    path: &Path,
    catalog: &mut Catalog,
    reward: &RewardConfig,
    default_clusters: ClusterStore,
) -> Result<(QuestionTree, ClusterStore), SnapshotError> {
    let read = |p: &Path| std::fs::read_to_string(p).map_err(|source| SnapshotError::Io { path: p.display().to_string(), source });
    let tree = tree_from_json(&read(path)?, catalog, reward)?;
    let cpath = cluster_path(path);
    let clusters = if cpath.exists() { clusters_from_json(&read(&cpath)?)? } else { default_clusters };
    Ok((tree, clusters))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> (QuestionTree, Catalog) {
        let mut cat = Catalog::new();
        for l in ["a", "b", "c", "d"] {
            cat.push(l, None).unwrap();
        }
        let mut tree = QuestionTree::new("small");
        let root = tree.push_root(cat.full_set());
        let ids: Vec<_> = cat.full_set().iter().collect();
        let cfg = RewardConfig::default();
        let q = tree
            .attach_question(root, Partition::new("Q1?", PossibilitySet::from_ids(ids[..1].to_vec()), PossibilitySet::from_ids(ids[1..].to_vec())), &cfg)
            .unwrap();
        let mut bonus = BTreeMap::new();
        bonus.insert(ClusterId(3), 0.125);
        tree.restore_stats(q, 0.7, 2, bonus).unwrap();
        (tree, cat)
    }

    #[test]
    fn round_trip_is_stable() {
        let (tree, cat) = small();
        let text = tree_to_json(&tree, &cat);
        let mut cat2 = cat.clone();
        let back = tree_from_json(&text, &mut cat2, &RewardConfig::default()).unwrap();
        assert_eq!(tree_to_json(&back, &cat2), text);
        assert_eq!(back, tree);
    }

    #[test]
    fn rejects_other_versions_and_bad_stats() {
        let (tree, cat) = small();
        let mut doc = tree_to_doc(&tree, &cat);
        doc.version = 9;
        let text = serde_json::to_string(&doc).unwrap();
        let mut c = cat.clone();
        assert!(matches!(
            tree_from_json(&text, &mut c, &RewardConfig::default()),
            Err(SnapshotError::VersionMismatch { expected: 1, found: 9 })
        ));
        let mut doc = tree_to_doc(&tree, &cat);
        doc.roots[0].children[0].visits = 0;
        assert!(matches!(tree_from_doc(&doc, &mut c, &RewardConfig::default()), Err(SnapshotError::CorruptSnapshot(_))));
        let mut doc = tree_to_doc(&tree, &cat);
        doc.roots[0].children[0].partition.no_set.pop();
        assert!(matches!(tree_from_doc(&doc, &mut c, &RewardConfig::default()), Err(SnapshotError::CorruptSnapshot(_))));
        assert!(matches!(tree_from_json("{", &mut c, &RewardConfig::default()), Err(SnapshotError::CorruptSnapshot(_))));
    }

    #[test]
    fn clusters_round_trip() {
        let mut store = ClusterStore::default();
        store.assign(Embedding(vec![1.0, 0.0])).unwrap();
        store.assign(Embedding(vec![0.99, 0.1])).unwrap();
        store.assign(Embedding(vec![0.0, 1.0])).unwrap();
        let back = clusters_from_json(&clusters_to_json(&store)).unwrap();
        assert_eq!(back, store);
        assert_eq!(cluster_path(Path::new("/x/tree.json")), PathBuf::from("/x/tree.clusters.json"));
    }
}
