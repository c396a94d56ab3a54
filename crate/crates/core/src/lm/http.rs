use std::path::Path;
use std::thread;
use std::time::Duration;

use serde::Deserialize;
use serde_json::{json, Value};

use super::{LmClient, LmError, LmRequest, LmResponse, Usage};

/// Endpoint settings, read from TOML and overridable through the environment
/// (`AWM_LM_BASE_URL`, `AWM_LM_API_KEY`, `AWM_LM_MODEL`).
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default)]
pub struct LmConfig {
    pub base_url: String,
    pub api_key: Option<String>,
    pub model: String,
    pub max_attempts: u32,
    pub backoff_ms: u64,
    pub timeout_secs: u64,
}

impl Default for LmConfig {
    fn default() -> LmConfig {
        LmConfig {
            base_url: "http://localhost:8000/v1".into(),
            api_key: None,
            model: "gpt-4".into(),
            max_attempts: 4,
            backoff_ms: 500,
            timeout_secs: 120,
        }
    }
}

impl LmConfig {
    pub fn from_toml_str(text: &str) -> Result<LmConfig, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn load(path: &Path) -> Result<LmConfig, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Self::from_toml_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    /// Applies environment overrides through `lookup` (normally `std::env::var`).
    pub fn with_env(mut self, lookup: impl Fn(&str) -> Option<String>) -> LmConfig {
        if let Some(v) = lookup("AWM_LM_BASE_URL") {
            self.base_url = v;
        }
        if let Some(v) = lookup("AWM_LM_API_KEY") {
            self.api_key = Some(v);
        }
        if let Some(v) = lookup("AWM_LM_MODEL") {
            self.model = v;
        }
        self
    }

    pub fn with_process_env(self) -> LmConfig {
        self.with_env(|k| std::env::var(k).ok())
    }
}

/// Chat-completions client with exponential backoff on 429, 5xx and
/// transport failures.
pub struct HttpLm {
    config: LmConfig,
    agent: ureq::Agent,
}

impl HttpLm {
    pub fn new(config: LmConfig) -> HttpLm {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(config.timeout_secs)))
            .http_status_as_error(false)
            .build()
            .into();
        HttpLm { config, agent }
    }

    pub fn config(&self) -> &LmConfig {
        &self.config
    }

    fn body(&self, req: &LmRequest) -> Value {
        let mut messages = Vec::new();
        if let Some(system) = &req.system {
            messages.push(json!({"role": "system", "content": system}));
        }
        messages.push(json!({"role": "user", "content": req.prompt}));
        let model = if req.model.is_empty() { &self.config.model } else { &req.model };
        json!({
            "model": model,
            "messages": messages,
            "temperature": req.temperature,
            "max_tokens": req.max_tokens,
        })
    }

    fn attempt(&self, url: &str, body: &Value) -> Result<Value, Attempt> {
        let mut call = self.agent.post(url).header("Content-Type", "application/json");
        if let Some(key) = &self.config.api_key {
            call = call.header("Authorization", &format!("Bearer {key}"));
        }
        let mut resp = call
            .send(serde_json::to_vec(body).expect("request body serializes").as_slice())
            .map_err(|e| Attempt::Retry(LmError::Transport(e.to_string())))?;
        let status = resp.status().as_u16();
        let text = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| Attempt::Retry(LmError::Transport(e.to_string())))?;
        match status {
            200..=299 => serde_json::from_str(&text).map_err(|e| Attempt::Fatal(LmError::BadResponse(e.to_string()))),
            429 => Err(Attempt::Retry(LmError::RateLimited { attempts: 0 })),
            500..=599 => Err(Attempt::Retry(LmError::Transport(format!("server status {status}")))),
            _ => Err(Attempt::Fatal(LmError::BadResponse(format!("status {status}: {text}")))),
        }
    }
}

enum Attempt {
    Retry(LmError),
    Fatal(LmError),
}

impl LmClient for HttpLm {
    fn complete(&self, req: &LmRequest) -> Result<LmResponse, LmError> {
        let url = format!("{}/chat/completions", self.config.base_url.trim_end_matches('/'));
        let body = self.body(req);
        let attempts = self.config.max_attempts.max(1);
        let mut last = LmError::Transport("no attempt made".into());
        for n in 1..=attempts {
            match self.attempt(&url, &body) {
                Ok(value) => return parse_choice(&value),
                Err(Attempt::Fatal(e)) => return Err(e),
                Err(Attempt::Retry(e)) => {
                    tracing::warn!(attempt = n, error = %e, "lm call failed");
                    last = match e {
                        LmError::RateLimited { .. } => LmError::RateLimited { attempts: n },
                        other => other,
                    };
                    if n < attempts {
                        thread::sleep(Duration::from_millis(self.config.backoff_ms.saturating_mul(1 << (n - 1))));
                    }
                }
            }
        }
        Err(last)
    }
}

fn parse_choice(value: &Value) -> Result<LmResponse, LmError> {
    let text = value
        .pointer("/choices/0/message/content")
        .and_then(Value::as_str)
        .ok_or_else(|| LmError::BadResponse("missing choices[0].message.content".into()))?;
    let usage = value.get("usage").and_then(|u| serde_json::from_value::<Usage>(u.clone()).ok());
    Ok(LmResponse {
        text: text.to_string(),
        usage,
    })
}
