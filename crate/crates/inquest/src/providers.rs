//! Chat providers: a scripted replay provider for hermetic runs and an
//! OpenAI-style HTTP adapter.

use std::collections::HashMap;
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use inquest_core::{ChatProvider, ChatRequest, ProviderError};
use serde::Deserialize;
use sha2::{Digest, Sha256};

/// Whitespace-collapsed `role: content` lines, one per message.
pub fn normalized_prompt(req: &ChatRequest) -> String {
    req.messages
        .iter()
        .map(|m| format!("{}: {}", m.role.as_str(), m.content.split_whitespace().collect::<Vec<_>>().join(" ")))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Hex SHA-256 of the normalized prompt.
pub fn prompt_digest(req: &ChatRequest) -> String {
    hex::encode(Sha256::digest(normalized_prompt(req).as_bytes()))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScriptFile {
    #[serde(default)]
    responses: Vec<ScriptEntry>,
    #[serde(default)]
    default: Option<String>,
}

/// One scripted reply. `prompt` is a single user message; `digest` matches
/// any request with that normalized digest.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScriptEntry {
    #[serde(default)]
    prompt: Option<String>,
    #[serde(default)]
    digest: Option<String>,
    response: String,
}

/// Replays canned responses keyed by prompt digest.
#[derive(Debug, Default)]
pub struct ScriptedProvider {
    responses: HashMap<String, String>,
    fallback: Option<String>,
    calls: AtomicU64,
    misses: Mutex<Vec<String>>,
}

impl ScriptedProvider {
    pub fn new() -> Self {
        Self::default()
    }

    /// Scripts a reply for a single-user-message request.
    pub fn on_prompt(mut self, prompt: &str, response: impl Into<String>) -> Self {
        self.responses.insert(prompt_digest(&ChatRequest::single(prompt)), response.into());
        self
    }

    pub fn on_request(mut self, req: &ChatRequest, response: impl Into<String>) -> Self {
        self.responses.insert(prompt_digest(req), response.into());
        self
    }

    pub fn on_digest(mut self, digest: impl Into<String>, response: impl Into<String>) -> Self {
        self.responses.insert(digest.into(), response.into());
        self
    }

    /// Reply used when no script entry matches.
    pub fn with_fallback(mut self, response: impl Into<String>) -> Self {
        self.fallback = Some(response.into());
        self
    }

    pub fn from_json(text: &str) -> Result<Self, ProviderError> {
        let file: ScriptFile =
            serde_json::from_str(text).map_err(|e| ProviderError::BadResponse(format!("script: {e}")))?;
        let mut p = ScriptedProvider::new();
        for entry in file.responses {
            p = match (entry.prompt, entry.digest) {
                (_, Some(d)) => p.on_digest(d, entry.response),
                (Some(prompt), None) => p.on_prompt(&prompt, entry.response),
                (None, None) => return Err(ProviderError::BadResponse("script entry needs prompt or digest".into())),
            };
        }
        p.fallback = file.default;
        Ok(p)
    }

    pub fn from_file(path: &Path) -> Result<Self, ProviderError> {
        let text = std::fs::read_to_string(path).map_err(|e| ProviderError::Transport(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }

    /// Normalized prompts that had no script entry.
    pub fn misses(&self) -> Vec<String> {
        self.misses.lock().map(|m| m.clone()).unwrap_or_default()
    }
}

impl ChatProvider for ScriptedProvider {
    fn complete(&self, req: &ChatRequest) -> Result<String, ProviderError> {
        if req.messages.is_empty() {
            return Err(ProviderError::EmptyRequest);
        }
        self.calls.fetch_add(1, Ordering::Relaxed);
        let digest = prompt_digest(req);
        if let Some(r) = self.responses.get(&digest) {
            return Ok(r.clone());
        }
        if let Ok(mut m) = self.misses.lock() {
            m.push(normalized_prompt(req));
        }
        self.fallback.clone().ok_or(ProviderError::Unscripted(digest))
    }
}

/// Connection settings for a chat-completions endpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct HttpProviderConfig {
    pub endpoint: String,
    pub model: String,
    /// Name of the environment variable holding the API key.
    pub api_key_env: Option<String>,
    pub timeout: Duration,
}

impl HttpProviderConfig {
    /// Reads `INQUEST_LLM_ENDPOINT`, `INQUEST_LLM_MODEL`,
    /// `INQUEST_LLM_API_KEY_ENV` and `INQUEST_LLM_TIMEOUT_SECS`.
    pub fn from_env() -> Option<Self> {
        let endpoint = std::env::var("INQUEST_LLM_ENDPOINT").ok()?;
        let model = std::env::var("INQUEST_LLM_MODEL").unwrap_or_else(|_| String::from("gpt-4o"));
        let api_key_env = std::env::var("INQUEST_LLM_API_KEY_ENV").ok();
        let secs = std::env::var("INQUEST_LLM_TIMEOUT_SECS").ok().and_then(|s| s.parse().ok()).unwrap_or(60);
        Some(Self { endpoint, model, api_key_env, timeout: Duration::from_secs(secs) })
    }
}

/// Blocking OpenAI-style `/chat/completions` client.
pub struct HttpChatProvider {
    cfg: HttpProviderConfig,
    client: reqwest::blocking::Client,
}

impl HttpChatProvider {
    pub fn new(cfg: HttpProviderConfig) -> Result<Self, ProviderError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(cfg.timeout)
            .build()
            .map_err(|e| ProviderError::Transport(e.to_string()))?;
        Ok(Self { cfg, client })
    }
}

#[derive(Deserialize)]
struct CompletionResponse {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: ChoiceMessage,
}

#[derive(Deserialize)]
struct ChoiceMessage {
    content: String,
}

impl ChatProvider for HttpChatProvider {
    fn complete(&self, req: &ChatRequest) -> Result<String, ProviderError> {
        if req.messages.is_empty() {
            return Err(ProviderError::EmptyRequest);
        }
        let messages: Vec<serde_json::Value> = req
            .messages
            .iter()
            .map(|m| serde_json::json!({ "role": m.role.as_str(), "content": m.content }))
            .collect();
        let body = serde_json::json!({
            "model": self.cfg.model,
            "messages": messages,
            "temperature": req.temperature,
        });
        let mut call = self.client.post(&self.cfg.endpoint).json(&body);
        if let Some(var) = &self.cfg.api_key_env {
            let key = std::env::var(var).map_err(|_| ProviderError::Transport(format!("{var} is not set")))?;
            call = call.bearer_auth(key);
        }
        let resp = call.send().map_err(|e| {
            if e.is_timeout() {
                ProviderError::Timeout
            } else {
                ProviderError::Transport(e.to_string())
            }
        })?;
        let status = resp.status();
        if !status.is_success() {
            return Err(ProviderError::Transport(format!("HTTP {status}")));
        }
        let parsed: CompletionResponse = resp.json().map_err(|e| ProviderError::BadResponse(e.to_string()))?;
        parsed
            .choices
            .into_iter()
            .next()
            .map(|c| c.message.content)
            .ok_or_else(|| ProviderError::BadResponse("no choices".into()))
    }
}
