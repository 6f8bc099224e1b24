//! Dataset documents: an outcome list plus samples to play.

use std::path::Path;

use inquest_core::{Catalog, CatalogError, Domain, OutcomeId};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Bit {
    Bool(bool),
    Int(u8),
}

impl Bit {
    fn value(&self) -> bool {
        match self {
            Bit::Bool(b) => *b,
            Bit::Int(i) => *i != 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SampleId {
    Text(String),
    Number(u64),
}

impl SampleId {
    pub fn as_string(&self) -> String {
        match self {
            SampleId::Text(s) => s.clone(),
            SampleId::Number(n) => n.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeRecord {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attributes: Option<Vec<Bit>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub id: SampleId,
    #[serde(default)]
    pub problem_description: String,
    pub target: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub attribute_names: Vec<String>,
    pub outcomes: Vec<OutcomeRecord>,
    #[serde(default)]
    pub samples: Vec<SampleRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub id: String,
    pub problem_description: String,
    pub target: OutcomeId,
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub id: String,
    pub domain: Domain,
    pub catalog: Catalog,
    pub samples: Vec<Sample>,
    pub attribute_names: Vec<String>,
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("reading {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("parsing dataset: {0}")]
    Parse(String),
    #[error("outcome {index}: {source}")]
    Outcome { index: usize, source: CatalogError },
    #[error("sample {sample}: target `{label}` is not an outcome")]
    UnknownTarget { sample: String, label: String },
    #[error("unknown domain `{0}`")]
    UnknownDomain(String),
    #[error("dataset has no outcomes")]
    NoOutcomes,
}

impl Dataset {
    pub fn from_file(file: DatasetFile, fallback_id: &str) -> Result<Self, DatasetError> {
        if file.outcomes.is_empty() {
            return Err(DatasetError::NoOutcomes);
        }
        let domain = match &file.domain {
            None => Domain::TwentyQuestions,
            Some(d) => Domain::parse(d).ok_or_else(|| DatasetError::UnknownDomain(d.clone()))?,
        };
        let mut catalog = Catalog::new();
        for (index, o) in file.outcomes.iter().enumerate() {
            let sig = o.attributes.as_ref().map(|bits| bits.iter().map(Bit::value).collect());
            catalog.push(&o.label, sig).map_err(|source| DatasetError::Outcome { index, source })?;
        }
        let mut samples = Vec::with_capacity(file.samples.len());
        for s in &file.samples {
            let id = s.id.as_string();
            let target = catalog
                .lookup(&s.target)
                .ok_or_else(|| DatasetError::UnknownTarget { sample: id.clone(), label: s.target.clone() })?;
            samples.push(Sample { id, problem_description: s.problem_description.clone(), target });
        }
        Ok(Self {
            id: file.dataset_id.unwrap_or_else(|| fallback_id.to_string()),
            domain,
            catalog,
            samples,
            attribute_names: file.attribute_names,
        })
    }

    pub fn parse(text: &str, fallback_id: &str) -> Result<Self, DatasetError> {
        let file: DatasetFile = serde_json::from_str(text).map_err(|e| DatasetError::Parse(e.to_string()))?;
        Self::from_file(file, fallback_id)
    }

    /// The dataset id defaults to the file stem.
    pub fn load(path: &Path) -> Result<Self, DatasetError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| DatasetError::Io { path: path.display().to_string(), source })?;
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("dataset");
        Self::parse(&text, stem)
    }

    /// `n` outcomes whose signatures are the low `width` bits of their
    /// index, one sample per outcome in index order.
    pub fn synthetic(id: &str, n: u32, width: usize) -> Self {
        let file = synthetic_file(id, n, width);
        Self::from_file(file, id).expect("synthetic dataset is valid")
    }
}

pub fn synthetic_file(id: &str, n: u32, width: usize) -> DatasetFile {
    let outcomes = (0..n)
        .map(|i| OutcomeRecord {
            label: format!("item-{i:03}"),
            attributes: Some((0..width).map(|b| Bit::Bool(i >> b & 1 == 1)).collect()),
        })
        .collect();
    let samples = (0..n)
        .map(|i| SampleRecord { id: SampleId::Number(i as u64), problem_description: String::new(), target: format!("item-{i:03}") })
        .collect();
    DatasetFile {
        dataset_id: Some(id.to_string()),
        domain: Some("twenty_questions".into()),
        attribute_names: Vec::new(),
        outcomes,
        samples,
    }
}
