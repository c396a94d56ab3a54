//! Workflow induction: rule-based and model-based.

mod lm;
mod prompt;
mod rule;

use serde::{Deserialize, Serialize};

use crate::lm::{LmClient, LmError};
use crate::types::{Experience, Workflow};

pub use lm::{
    dedup_workflows, induce_lm, parse_workflow_output, same_pattern, verbalize_workflows, LmInduction, ParsedOutput,
};
pub use prompt::{build_induction_prompt, PromptBatches, INDUCTION_INSTRUCTIONS};
pub use rule::{
    action_signature, dedup_by_signature, dedup_by_template, filter_invalid_steps, induce_rule, DropReason, Dropped,
    RuleInduction,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InductionMode {
    Rule,
    #[default]
    Lm,
}

/// Which parts of the recorded page state are shown to the inducer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvRepr {
    #[default]
    Description,
    Html,
    Both,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct InductionConfig {
    pub mode: InductionMode,
    /// Representatives kept per dedup group.
    pub dedup_n: usize,
    pub seed: Option<u64>,
    pub env_repr: EnvRepr,
    /// Character budget for the experience part of one induction prompt.
    pub max_prompt_chars: usize,
    /// Verbalize induced workflows into natural-language steps.
    pub text_format: bool,
}

impl Default for InductionConfig {
    fn default() -> InductionConfig {
        InductionConfig {
            mode: InductionMode::Lm,
            dedup_n: 1,
            seed: None,
            env_repr: EnvRepr::Description,
            max_prompt_chars: 24_000,
            text_format: false,
        }
    }
}

impl InductionConfig {
    pub fn rule() -> InductionConfig {
        InductionConfig {
            mode: InductionMode::Rule,
            ..InductionConfig::default()
        }
    }

    pub fn validate(&self) -> Result<(), InductionError> {
        if self.dedup_n == 0 {
            return Err(InductionError::Config("dedup_n must be at least 1".into()));
        }
        if self.max_prompt_chars == 0 {
            return Err(InductionError::Config("max_prompt_chars must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum InductionError {
    #[error("experiences span several websites: {0:?}")]
    MixedWebsites(Vec<String>),
    #[error("experience `{id}` renders to {chars} characters, over the {budget} budget")]
    OversizeExperience { id: String, chars: usize, budget: usize },
    #[error("induction batch {batch}: {source}")]
    Lm {
        batch: usize,
        #[source]
        source: LmError,
    },
    #[error("model-based induction needs an LM client")]
    MissingLm,
    #[error("invalid induction config: {0}")]
    Config(String),
}

pub(crate) fn single_website(experiences: &[Experience]) -> Result<Option<&str>, InductionError> {
    let mut sites: Vec<String> = experiences.iter().map(|e| e.website.clone()).collect();
    sites.sort();
    sites.dedup();
    match sites.len() {
        0 => Ok(None),
        1 => Ok(Some(experiences[0].website.as_str())),
        _ => Err(InductionError::MixedWebsites(sites)),
    }
}

/// Runs the configured induction mode and optional verbalization.
pub fn induce(
    experiences: &[Experience],
    cfg: &InductionConfig,
    lm: Option<&dyn LmClient>,
) -> Result<Vec<Workflow>, InductionError> {
    cfg.validate()?;
    let workflows = match cfg.mode {
        InductionMode::Rule => induce_rule(experiences, cfg)?.workflows,
        InductionMode::Lm => induce_lm(experiences, cfg, lm.ok_or(InductionError::MissingLm)?)?.workflows,
    };
    if cfg.text_format && !workflows.is_empty() {
        let lm = lm.ok_or(InductionError::MissingLm)?;
        return verbalize_workflows(&workflows, lm).map_err(|source| InductionError::Lm { batch: 0, source });
    }
    Ok(workflows)
}
