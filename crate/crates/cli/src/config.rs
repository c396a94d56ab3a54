use std::path::Path;

use anyhow::Context;
use awm::lm::LmConfig;
use awm::pipeline::PipelineConfig;
use serde::Deserialize;

/// Which model answers agent, inducer and judge prompts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    /// Simulator-backed stand-ins; no network, fully deterministic.
    #[default]
    Scripted,
    /// A chat-completions endpoint configured under `[lm]`.
    Http,
}

/// Task suite generation settings, used whenever `--tasks` is omitted.
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteConfig {
    pub seed: u64,
    pub templates: usize,
    pub per_template: usize,
    /// Lookahead depth of the demonstrator behind `simgen --demos`.
    pub demo_depth: usize,
}

impl Default for SuiteConfig {
    fn default() -> SuiteConfig {
        SuiteConfig {
            seed: 7,
            templates: 10,
            per_template: 5,
            demo_depth: 8,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub backend: Backend,
    pub pipeline: PipelineConfig,
    pub lm: LmConfig,
    pub suite: SuiteConfig,
}

impl Config {
    pub fn load(path: Option<&Path>) -> anyhow::Result<(Config, Option<String>)> {
        let Some(path) = path else {
            return Ok((Config::default(), None));
        };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let cfg = toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        Ok((cfg, Some(text)))
    }
}
