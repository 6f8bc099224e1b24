//! Provider contracts for chat completion and embeddings, plus the call
//! counters behind the QGC metric.

use alloc::string::String;
use alloc::vec::Vec;
use core::sync::atomic::{AtomicU64, Ordering};

use thiserror::Error;

use crate::cluster::Embedding;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    System,
    User,
    Assistant,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::System => "system",
            Role::User => "user",
            Role::Assistant => "assistant",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChatMessage {
    pub role: Role,
    pub content: String,
}

impl ChatMessage {
    pub fn user(content: impl Into<String>) -> Self {
        Self { role: Role::User, content: content.into() }
    }

    pub fn system(content: impl Into<String>) -> Self {
        Self { role: Role::System, content: content.into() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChatRequest {
    pub messages: Vec<ChatMessage>,
    pub temperature: f64,
}

impl ChatRequest {
    /// Temperature defaults to 0.
    pub fn new(messages: Vec<ChatMessage>) -> Self {
        Self { messages, temperature: 0.0 }
    }

    pub fn single(prompt: impl Into<String>) -> Self {
        Self::new(alloc::vec![ChatMessage::user(prompt)])
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProviderError {
    #[error("empty chat request")]
    EmptyRequest,
    #[error("no scripted response for prompt digest {0}")]
    Unscripted(String),
    #[error("transport error: {0}")]
    Transport(String),
    #[error("malformed provider response: {0}")]
    BadResponse(String),
    #[error("provider timed out")]
    Timeout,
}

/// Messages in, text out.
pub trait ChatProvider: Send + Sync {
    fn complete(&self, request: &ChatRequest) -> Result<String, ProviderError>;
}

/// Text in, vector out.
pub trait EmbeddingProvider: Send + Sync {
    fn embed(&self, text: &str) -> Result<Embedding, ProviderError>;
}

/// `qgc` counts question-generation prompts only; every other model call
/// (classification, open-set renewal, answering) goes to `other_calls`.
#[derive(Debug, Default)]
pub struct CallCounters {
    qgc: AtomicU64,
    other: AtomicU64,
}

impl CallCounters {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record_generation_call(&self) {
        self.qgc.fetch_add(1, Ordering::Relaxed);
    }

    pub fn record_other_call(&self) {
        self.other.fetch_add(1, Ordering::Relaxed);
    }

    pub fn qgc(&self) -> u64 {
        self.qgc.load(Ordering::Relaxed)
    }

    pub fn other_calls(&self) -> u64 {
        self.other.load(Ordering::Relaxed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;
    use std::thread;

    #[test]
    fn one_call_one_increment() {
        let c = CallCounters::new();
        c.record_generation_call();
        assert_eq!(c.qgc(), 1);
        assert_eq!(c.other_calls(), 0);
    }

    #[test]
    fn concurrent_workers_lose_nothing() {
        let c = Arc::new(CallCounters::new());
        let handles: Vec<_> = (0..4)
            .map(|_| {
                let c = Arc::clone(&c);
                thread::spawn(move || {
                    for _ in 0..25 {
                        c.record_generation_call();
                    }
                })
            })
            .collect();
        for h in handles {
            h.join().unwrap();
        }
        assert_eq!(c.qgc(), 100);
    }

    #[test]
    fn default_temperature_is_zero() {
        assert_eq!(ChatRequest::single("hi").temperature, 0.0);
        assert_eq!(Role::Assistant.as_str(), "assistant");
    }
}
