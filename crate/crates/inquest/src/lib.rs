//! Runtime around `inquest-core`: prompt templates, chat providers, the
//! model-backed generator, dataset and config formats, tree snapshots, the
//! batch benchmark and the HTTP session service.

pub mod bench;
pub mod config;
pub mod dataset;
pub mod llm;
pub mod providers;
pub mod service;
pub mod snapshot;
pub mod templates;

pub use bench::{run_benchmark, simulated_answer, Asked, BenchError, BenchOptions, BenchmarkReport, Engine};
pub use config::{Config, ConfigError};
pub use dataset::{Dataset, DatasetError};
pub use providers::{HttpChatProvider, HttpProviderConfig, ScriptedProvider};
