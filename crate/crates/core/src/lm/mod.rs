//! Text-completion clients.
//!
//! Every model interaction in the crate is one prompt in, one text out, so the
//! contract is a single [`LmClient::complete`] call. [`HttpLm`] talks to any
//! chat-completions compatible endpoint; [`MockLm`] replays scripts for tests
//! and demos.

mod http;
mod mock;

use serde::{Deserialize, Serialize};
use std::sync::Arc;

pub use http::{HttpLm, LmConfig};
pub use mock::MockLm;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LmRequest {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<String>,
    pub prompt: String,
    pub temperature: f64,
    pub max_tokens: u32,
    pub model: String,
}

impl LmRequest {
    pub const DEFAULT_MAX_TOKENS: u32 = 1024;

    /// A request with greedy decoding and default limits.
    pub fn new(prompt: impl Into<String>) -> LmRequest {
        LmRequest {
            system: None,
            prompt: prompt.into(),
            temperature: 0.0,
            max_tokens: Self::DEFAULT_MAX_TOKENS,
            model: String::new(),
        }
    }

    pub fn with_system(mut self, system: impl Into<String>) -> LmRequest {
        self.system = Some(system.into());
        self
    }

    pub fn with_max_tokens(mut self, max_tokens: u32) -> LmRequest {
        self.max_tokens = max_tokens;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Usage {
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LmResponse {
    pub text: String,
    pub usage: Option<Usage>,
}

impl LmResponse {
    pub fn text(text: impl Into<String>) -> LmResponse {
        LmResponse {
            text: text.into(),
            usage: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LmError {
    #[error("transport error: {0}")]
    Transport(String),
    #[error("rate limited after {attempts} attempt(s)")]
    RateLimited { attempts: u32 },
    #[error("bad response: {0}")]
    BadResponse(String),
    #[error("mock script exhausted: {0}")]
    ScriptExhausted(String),
}

pub trait LmClient: Send + Sync {
    fn complete(&self, req: &LmRequest) -> Result<LmResponse, LmError>;
}

impl<T: LmClient + ?Sized> LmClient for &T {
    fn complete(&self, req: &LmRequest) -> Result<LmResponse, LmError> {
        (**self).complete(req)
    }
}

impl<T: LmClient + ?Sized> LmClient for Arc<T> {
    fn complete(&self, req: &LmRequest) -> Result<LmResponse, LmError> {
        (**self).complete(req)
    }
}

impl<T: LmClient + ?Sized> LmClient for Box<T> {
    fn complete(&self, req: &LmRequest) -> Result<LmResponse, LmError> {
        (**self).complete(req)
    }
}

/// Convenience: send `prompt` with default settings and return the text.
pub fn complete_text(lm: &dyn LmClient, prompt: impl Into<String>) -> Result<String, LmError> {
    lm.complete(&LmRequest::new(prompt)).map(|r| r.text)
}
