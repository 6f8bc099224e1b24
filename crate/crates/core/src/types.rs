//! Outcomes, possibility sets and question partitions.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

/// Index of an outcome inside its [`Catalog`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OutcomeId(pub u32);

impl fmt::Display for OutcomeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// One candidate target: a disease, a device fault, a 20Q item.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub id: OutcomeId,
    pub label: String,
    /// Boolean attributes, only present for oracle-mode datasets.
    pub signature: Option<Vec<bool>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CatalogError {
    #[error("outcome label is empty")]
    EmptyLabel,
    #[error("duplicate outcome label `{0}`")]
    DuplicateLabel(String),
    #[error("signature length {found} differs from catalog signature length {expected}")]
    SignatureLength { expected: usize, found: usize },
}

/// Labels are compared after trimming and lower-casing.
pub fn casefold(label: &str) -> String {
    label.trim().to_lowercase()
}

/// The outcome universe of one dataset. Ids are dense and assigned in
/// insertion order.
#[derive(Debug, Clone, Default)]
pub struct Catalog {
    outcomes: Vec<Outcome>,
    by_label: BTreeMap<String, OutcomeId>,
}

impl Catalog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, label: &str, signature: Option<Vec<bool>>) -> Result<OutcomeId, CatalogError> {
        let key = casefold(label);
        if key.is_empty() {
            return Err(CatalogError::EmptyLabel);
        }
        if self.by_label.contains_key(&key) {
            return Err(CatalogError::DuplicateLabel(String::from(label.trim())));
        }
        if let (Some(sig), Some(expected)) = (&signature, self.signature_len()) {
            if sig.len() != expected {
                return Err(CatalogError::SignatureLength { expected, found: sig.len() });
            }
        }
        let id = OutcomeId(self.outcomes.len() as u32);
        self.outcomes.push(Outcome { id, label: String::from(label.trim()), signature });
        self.by_label.insert(key, id);
        Ok(id)
    }

    /// Returns the id for `label`, adding a signature-less outcome if unseen.
    /// Used by open-set sessions where the generator invents outcomes.
    pub fn intern(&mut self, label: &str) -> Result<OutcomeId, CatalogError> {
        match self.lookup(label) {
            Some(id) => Ok(id),
            None => self.push(label, None),
        }
    }

    pub fn lookup(&self, label: &str) -> Option<OutcomeId> {
        self.by_label.get(&casefold(label)).copied()
    }

    pub fn get(&self, id: OutcomeId) -> Option<&Outcome> {
        self.outcomes.get(id.0 as usize)
    }

    pub fn label(&self, id: OutcomeId) -> &str {
        self.outcomes.get(id.0 as usize).map(|o| o.label.as_str()).unwrap_or("")
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Outcome> {
        self.outcomes.iter()
    }

    /// Length shared by every signature, if any outcome has one.
    pub fn signature_len(&self) -> Option<usize> {
        self.outcomes.iter().find_map(|o| o.signature.as_ref().map(Vec::len))
    }

    /// Every outcome, in id order.
    pub fn full_set(&self) -> PossibilitySet {
        PossibilitySet::from_ids(self.outcomes.iter().map(|o| o.id))
    }

    pub fn labels(&self, set: &PossibilitySet) -> Vec<String> {
        set.iter().map(|id| String::from(self.label(id))).collect()
    }
}

/// An ordered set of outcome ids. Iteration follows insertion order, which
/// every downstream tie-break relies on.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PossibilitySet {
    members: Vec<OutcomeId>,
}

impl PossibilitySet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a set, silently dropping repeated ids.
    pub fn from_ids<I: IntoIterator<Item = OutcomeId>>(ids: I) -> Self {
        let mut seen = BTreeSet::new();
        let members = ids.into_iter().filter(|id| seen.insert(*id)).collect();
        Self { members }
    }

    pub fn insert(&mut self, id: OutcomeId) -> bool {
        if self.contains(id) {
            return false;
        }
        self.members.push(id);
        true
    }

    pub fn contains(&self, id: OutcomeId) -> bool {
        self.members.contains(&id)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = OutcomeId> + '_ {
        self.members.iter().copied()
    }

    pub fn as_slice(&self) -> &[OutcomeId] {
        &self.members
    }

    pub fn is_superset_of(&self, other: &PossibilitySet) -> bool {
        if other.len() > self.len() {
            return false;
        }
        let mine: BTreeSet<OutcomeId> = self.members.iter().copied().collect();
        other.iter().all(|id| mine.contains(&id))
    }

    pub fn is_disjoint(&self, other: &PossibilitySet) -> bool {
        let mine: BTreeSet<OutcomeId> = self.members.iter().copied().collect();
        other.iter().all(|id| !mine.contains(&id))
    }

    /// Same members, ignoring order.
    pub fn same_members(&self, other: &PossibilitySet) -> bool {
        self.len() == other.len() && self.is_superset_of(other)
    }
}

impl FromIterator<OutcomeId> for PossibilitySet {
    fn from_iter<T: IntoIterator<Item = OutcomeId>>(iter: T) -> Self {
        Self::from_ids(iter)
    }
}

/// One candidate question and the split it induces on its parent set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pub question: String,
    pub yes: PossibilitySet,
    pub no: PossibilitySet,
}

impl Partition {
    pub fn new(question: impl Into<String>, yes: PossibilitySet, no: PossibilitySet) -> Self {
        Self { question: question.into(), yes, no }
    }

    /// Fraction of the partitioned set on the YES side.
    pub fn p_yes(&self) -> f64 {
        let total = self.yes.len() + self.no.len();
        if total == 0 {
            return 0.0;
        }
        self.yes.len() as f64 / total as f64
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PartitionError {
    #[error("parent possibility set is empty")]
    EmptyParent,
    #[error("question text is empty")]
    EmptyQuestion,
    #[error("partition `{0}` does not split its parent set")]
    Rejected(String),
}

/// Repairs a generator partition against its parent set.
///
/// Members outside `parent` are dropped, members listed on both sides stay on
/// YES, and parent members listed nowhere go to NO. Both sides come back in
/// parent order, so the result is canonical and the repair idempotent.
pub fn normalize_partition(raw: &Partition, parent: &PossibilitySet) -> Result<Partition, PartitionError> {
    if parent.is_empty() {
        return Err(PartitionError::EmptyParent);
    }
    let question = raw.question.trim();
    if question.is_empty() {
        return Err(PartitionError::EmptyQuestion);
    }
    let yes_ids: BTreeSet<OutcomeId> = raw.yes.iter().collect();
    let mut yes = PossibilitySet::new();
    let mut no = PossibilitySet::new();
    for id in parent.iter() {
        if yes_ids.contains(&id) {
            yes.insert(id);
        } else {
            no.insert(id);
        }
    }
    if parent.len() > 1 && (yes.is_empty() || no.is_empty()) {
        return Err(PartitionError::Rejected(String::from(question)));
    }
    Ok(Partition { question: String::from(question), yes, no })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn ids(v: &[u32]) -> PossibilitySet {
        v.iter().map(|&i| OutcomeId(i)).collect()
    }

    fn medical() -> (Catalog, PossibilitySet) {
        let mut c = Catalog::new();
        for l in ["flu", "pneumonia", "enteritis", "asthma"] {
            c.push(l, None).unwrap();
        }
        let full = c.full_set();
        (c, full)
    }

    #[test]
    fn breathing_question_is_left_unchanged() {
        let (c, parent) = medical();
        let p = c.lookup("pneumonia").unwrap();
        let a = c.lookup("asthma").unwrap();
        let f = c.lookup("flu").unwrap();
        let e = c.lookup("enteritis").unwrap();
        let raw = Partition::new(
            "Do you have difficulty breathing?",
            PossibilitySet::from_ids([p, a]),
            PossibilitySet::from_ids([f, e]),
        );
        let norm = normalize_partition(&raw, &parent).unwrap();
        assert!(norm.yes.same_members(&raw.yes));
        assert!(norm.no.same_members(&raw.no));
        assert_eq!(norm.question, raw.question);
    }

    #[test]
    fn degenerate_split_is_rejected() {
        let raw = Partition::new("Is it?", ids(&[0, 1]), ids(&[]));
        assert!(matches!(normalize_partition(&raw, &ids(&[0, 1])), Err(PartitionError::Rejected(_))));
    }

    #[test]
    fn foreign_items_dropped_and_missing_routed_to_no() {
        // parent {a,b,c}, yes {a, z}, no {b}
        let raw = Partition::new("q?", ids(&[0, 25]), ids(&[1]));
        let norm = normalize_partition(&raw, &ids(&[0, 1, 2])).unwrap();
        assert_eq!(norm.yes, ids(&[0]));
        assert_eq!(norm.no, ids(&[1, 2]));
    }

    #[test]
    fn duplicates_resolve_to_yes() {
        let raw = Partition::new("q?", ids(&[0, 1]), ids(&[1, 2]));
        let norm = normalize_partition(&raw, &ids(&[0, 1, 2])).unwrap();
        assert_eq!(norm.yes, ids(&[0, 1]));
        assert_eq!(norm.no, ids(&[2]));
    }

    #[test]
    fn singleton_parent_allows_one_sided_split() {
        let raw = Partition::new("q?", ids(&[4]), ids(&[]));
        let norm = normalize_partition(&raw, &ids(&[4])).unwrap();
        assert_eq!(norm.yes.len() + norm.no.len(), 1);
    }

    #[test]
    fn empty_parent_and_question_are_errors() {
        let raw = Partition::new("q?", ids(&[0]), ids(&[]));
        assert_eq!(normalize_partition(&raw, &ids(&[])), Err(PartitionError::EmptyParent));
        let raw = Partition::new("  ", ids(&[0]), ids(&[1]));
        assert_eq!(normalize_partition(&raw, &ids(&[0, 1])), Err(PartitionError::EmptyQuestion));
    }

    #[test]
    fn catalog_rejects_duplicates_and_bad_signatures() {
        let mut c = Catalog::new();
        c.push("Radiator leak", Some(vec![true, false])).unwrap();
        assert!(matches!(c.push("radiator LEAK ", None), Err(CatalogError::DuplicateLabel(_))));
        assert!(matches!(c.push("hose", Some(vec![true])), Err(CatalogError::SignatureLength { .. })));
        assert_eq!(c.push("", None), Err(CatalogError::EmptyLabel));
        assert_eq!(c.lookup("  RADIATOR leak"), Some(OutcomeId(0)));
        let id = c.intern("hose leak").unwrap();
        assert_eq!(c.intern("Hose Leak").unwrap(), id);
    }

    #[test]
    fn set_relations() {
        let big = ids(&[3, 1, 2]);
        assert!(big.is_superset_of(&ids(&[2, 3])));
        assert!(!big.is_superset_of(&ids(&[2, 4])));
        assert!(big.is_disjoint(&ids(&[7])));
        assert!(big.same_members(&ids(&[1, 2, 3])));
        assert_eq!(ids(&[1, 1, 2]).len(), 2);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_case() -> impl Strategy<Value = (Vec<u32>, Vec<u32>, Vec<u32>)> {
            (1usize..=64).prop_flat_map(|n| {
                let parent: Vec<u32> = (0..n as u32).collect();
                (
                    Just(parent),
                    proptest::collection::vec(0u32..80, 0..70),
                    proptest::collection::vec(0u32..80, 0..70),
                )
            })
        }

        proptest! {
            #[test]
            fn normalized_partitions_are_exhaustive_and_disjoint((parent, yes, no) in arb_case()) {
                let parent = ids(&parent);
                let raw = Partition::new("q?", ids(&yes), ids(&no));
                if let Ok(p) = normalize_partition(&raw, &parent) {
                    prop_assert_eq!(p.yes.len() + p.no.len(), parent.len());
                    prop_assert!(p.yes.is_disjoint(&p.no));
                    for id in parent.iter() {
                        prop_assert!(p.yes.contains(id) || p.no.contains(id));
                    }
                }
            }

            #[test]
            fn normalize_is_idempotent((parent, yes, no) in arb_case()) {
                let parent = ids(&parent);
                let raw = Partition::new("q?", ids(&yes), ids(&no));
                if let Ok(once) = normalize_partition(&raw, &parent) {
                    let twice = normalize_partition(&once, &parent).unwrap();
                    prop_assert_eq!(once, twice);
                }
            }
        }
    }
}
