//! Flat run configuration (JSON or TOML).

use std::path::Path;

use inquest_core::{
    ClusterError, ClusterStore, Domain, FeedbackConfig, Mode, RewardConfig, SearchConfig, SessionError, SessionParams,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    #[serde(rename = "K")]
    pub k: u32,
    #[serde(rename = "C")]
    pub c: f64,
    pub d_s: u32,
    pub m: usize,
    pub lambda: f64,
    pub delta: f64,
    #[serde(rename = "T")]
    pub t: u32,
    pub tau: f64,
    pub beta: f64,
    pub gamma: f64,
    pub seed: u64,
    pub open_set_size: usize,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            k: 10,
            c: 0.2,
            d_s: 3,
            m: 3,
            lambda: 0.4,
            delta: 0.6,
            t: 20,
            tau: 0.9,
            beta: 0.2,
            gamma: 0.9,
            seed: 0,
            open_set_size: 5,
        }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("reading {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("parsing {path}: {message}")]
    Parse { path: String, message: String },
    #[error("invalid config: {0}")]
    Invalid(String),
}

impl From<SessionError> for ConfigError {
    fn from(e: SessionError) -> Self {
        ConfigError::Invalid(e.to_string())
    }
}

impl From<ClusterError> for ConfigError {
    fn from(e: ClusterError) -> Self {
        ConfigError::Invalid(e.to_string())
    }
}

impl Config {
    /// `.toml` files are read as TOML, everything else as JSON.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        let parsed = if path.extension().is_some_and(|e| e == "toml") {
            toml::from_str(&text).map_err(|e| e.to_string())
        } else {
            serde_json::from_str(&text).map_err(|e| e.to_string())
        };
        let cfg: Config = parsed.map_err(|message| ConfigError::Parse { path: path.display().to_string(), message })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn search(&self) -> SearchConfig {
        SearchConfig {
            iterations: self.k,
            exploration: self.c,
            sim_depth: self.d_s,
            fanout: self.m,
            reward: RewardConfig { lambda: self.lambda },
            rng_seed: self.seed,
        }
    }

    pub fn feedback(&self) -> FeedbackConfig {
        FeedbackConfig { beta: self.beta, gamma: self.gamma }
    }

    pub fn session_params(&self, mode: Mode, domain: Domain) -> SessionParams {
        SessionParams {
            max_turns: self.t,
            delta: self.delta,
            search: self.search(),
            feedback: self.feedback(),
            mode,
            domain,
            open_set_size: self.open_set_size,
        }
    }

    pub fn cluster_store(&self) -> Result<ClusterStore, ConfigError> {
        Ok(ClusterStore::new(self.tau, self.feedback())?)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.session_params(Mode::Closed, Domain::TwentyQuestions).validate()?;
        self.cluster_store()?;
        Ok(())
    }
}
