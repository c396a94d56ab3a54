//! The observe-act loop, teacher-forced step prediction and workflow macros.

mod macros;

use serde::{Deserialize, Serialize};

use crate::action::{parse_action_with, Action, Vocabulary};
use crate::lm::{LmClient, LmError, LmRequest};
use crate::memory::WorkflowStore;
use crate::simenv::{TaskSpec, WebEnvironment};
use crate::types::{default_action_docs, Experience, Step};
use crate::workflow_text::action_line;

pub use macros::{expand_macro, register_macro_actions, MacroAction, MacroError, MacroRegistry, MacroRun};

pub const SECTION_TASK: &str = "\n\n# Task\n";
pub const SECTION_PREVIOUS: &str = "\n\n# Previous steps\n";
pub const SECTION_OBSERVATION: &str = "\n\n# Current observation\n";
pub const HISTORY_ACTION_PREFIX: &str = "Action: ";
pub const MEMORY_WORKFLOWS_HEADING: &str = "Workflows:\n";

const REPLY_FORMAT: &str = "\n\n# Reply format\n\
Write one line of reasoning, then exactly one action on the last line, for example click('12').";
const REMINDER: &str = "\n\nReminder: your reply must end with exactly one action line such as click('12') or stop().";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct AgentConfig {
    pub max_steps: usize,
    /// Expose memory workflows as callable actions.
    pub enable_macro_actions: bool,
    pub action_docs: String,
    /// Record a pseudo-HTML snapshot in each step when the environment has one.
    pub record_html: bool,
}

impl Default for AgentConfig {
    fn default() -> AgentConfig {
        AgentConfig {
            max_steps: 15,
            enable_macro_actions: false,
            action_docs: default_action_docs(),
            record_html: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AgentError {
    #[error("no action line in the reply")]
    NoAction,
    #[error(transparent)]
    Lm(#[from] LmError),
}

/// The prompt for one decision: memory, task, prior steps, observation and
/// the reply format. The previous-steps section is omitted when empty.
pub fn build_agent_prompt(instruction: &str, memory_text: &str, observation: &str, history: &[Step]) -> String {
    let mut out = String::with_capacity(memory_text.len() + observation.len() + 256);
    out.push_str(memory_text.trim_end());
    out.push_str(SECTION_TASK);
    out.push_str(instruction.trim());
    if !history.is_empty() {
        out.push_str(SECTION_PREVIOUS);
        for (i, step) in history.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            out.push_str(&format!("Step {}\n", i + 1));
            if let Some(r) = &step.reasoning {
                out.push_str(&format!("Reasoning: {}\n", r.replace('\n', " ")));
            }
            out.push_str(HISTORY_ACTION_PREFIX);
            out.push_str(&step.action.render());
        }
    }
    out.push_str(SECTION_OBSERVATION);
    out.push_str(observation.trim_end());
    out.push_str(REPLY_FORMAT);
    out
}

/// Takes the last line that parses as an action; the text before it is the
/// reasoning.
pub fn parse_agent_reply(text: &str, vocab: &Vocabulary) -> Result<(String, Action), AgentError> {
    let lines: Vec<&str> = text.lines().collect();
    for (i, line) in lines.iter().enumerate().rev() {
        let candidate = line.trim();
        let candidate = candidate.strip_prefix(HISTORY_ACTION_PREFIX).unwrap_or(candidate);
        let parsed = parse_action_with(candidate.trim().trim_matches('`'), vocab)
            .ok()
            .or_else(|| vocab.is_empty().then(|| action_line(candidate)).flatten());
        if let Some(action) = parsed {
            let reasoning = lines[..i].join("\n").trim().to_string();
            return Ok((reasoning, action));
        }
    }
    Err(AgentError::NoAction)
}

/// Outcome of one decision after the retry policy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decision {
    pub reasoning: String,
    pub action: Action,
    pub retried: bool,
    pub forced_stop: bool,
}

/// Asks for an action; on an unparseable reply retries once with a reminder,
/// then falls back to `stop()`.
pub fn decide(lm: &dyn LmClient, prompt: &str, vocab: &Vocabulary) -> Result<Decision, LmError> {
    let reply = lm.complete(&LmRequest::new(prompt))?;
    tracing::trace!(target: "awm::trace", %prompt, reply = %reply.text, "agent call");
    if let Ok((reasoning, action)) = parse_agent_reply(&reply.text, vocab) {
        return Ok(Decision {
            reasoning,
            action,
            retried: false,
            forced_stop: false,
        });
    }
    let retry_prompt = format!("{prompt}{REMINDER}");
    let reply = lm.complete(&LmRequest::new(retry_prompt))?;
    tracing::trace!(target: "awm::trace", reply = %reply.text, "agent retry");
    Ok(match parse_agent_reply(&reply.text, vocab) {
        Ok((reasoning, action)) => Decision {
            reasoning,
            action,
            retried: true,
            forced_stop: false,
        },
        Err(_) => Decision {
            reasoning: "No valid action was produced; stopping.".into(),
            action: Action::stop(),
            retried: true,
            forced_stop: true,
        },
    })
}

/// What an episode is about.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EpisodeTask {
    pub id: String,
    pub website: String,
    pub instruction: String,
    pub template_id: Option<String>,
}

impl From<&TaskSpec> for EpisodeTask {
    fn from(t: &TaskSpec) -> EpisodeTask {
        EpisodeTask {
            id: t.id.clone(),
            website: t.website.clone(),
            instruction: t.instruction.clone(),
            template_id: Some(t.template_id.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EpisodeStats {
    pub retries: usize,
    pub forced_stops: usize,
    pub macro_calls: usize,
    pub env_errors: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Episode {
    pub experience: Experience,
    pub stats: EpisodeStats,
}

/// The memory text the agent sees for `website`, including macro docs when
/// macro actions are enabled.
pub fn memory_text(store: &WorkflowStore, website: &str, cfg: &AgentConfig, macros: &MacroRegistry) -> String {
    let mut docs = cfg.action_docs.clone();
    if cfg.enable_macro_actions && !macros.is_empty() {
        docs = format!("{}\n{}", docs.trim_end(), macros.docs());
    }
    store.render_memory(website, &docs)
}

/// Runs observe, prompt, parse and execute until a terminal action or
/// `cfg.max_steps` steps. Environment errors become the next observation.
pub fn run_episode(
    task: &EpisodeTask,
    env: &mut dyn WebEnvironment,
    store: &WorkflowStore,
    lm: &dyn LmClient,
    cfg: &AgentConfig,
) -> Result<Episode, LmError> {
    let macros = if cfg.enable_macro_actions {
        register_macro_actions(store, &task.website)
    } else {
        MacroRegistry::default()
    };
    let memory = memory_text(store, &task.website, cfg, &macros);
    let mut experience = Experience::new(&task.id, &task.website, &task.instruction);
    experience.template_id = task.template_id.clone();
    let mut stats = EpisodeStats::default();
    let mut observation = env.observe();

    for _ in 0..cfg.max_steps.max(1) {
        let prompt = build_agent_prompt(&task.instruction, &memory, &observation, &experience.steps);
        let decision = decide(lm, &prompt, macros.vocabulary())?;
        stats.retries += usize::from(decision.retried);
        stats.forced_stops += usize::from(decision.forced_stop);

        let mut step = Step::new(observation.clone(), decision.action.clone()).with_reasoning(decision.reasoning);
        if cfg.record_html {
            step.html = env.html();
        }
        experience.steps.push(step);

        let result = match macros.get(&decision.action.name) {
            Some(m) => {
                stats.macro_calls += 1;
                let args: Vec<String> = decision.action.args.iter().map(|a| a.as_str().to_string()).collect();
                match expand_macro(m, &args, env) {
                    Ok(run) => match run.error {
                        None => Ok(run.observation),
                        Some((_, e)) => Err(e.to_string()),
                    },
                    Err(e) => Err(e.to_string()),
                }
            }
            None => env.execute(&decision.action).map_err(|e| e.to_string()),
        };
        observation = match result {
            Ok(obs) => obs,
            Err(e) => {
                stats.env_errors += 1;
                format!("Error: {e}\n{}", env.observe())
            }
        };
        if decision.action.is_terminal() {
            break;
        }
    }
    Ok(Episode { experience, stats })
}

/// Replays recorded actions from the current environment state and returns
/// the observation seen before each step, as [`run_episode`] records them.
pub fn replay_observations(steps: &[Step], env: &mut dyn WebEnvironment, macros: &MacroRegistry) -> Vec<String> {
    let mut out = Vec::with_capacity(steps.len());
    let mut observation = env.observe();
    for step in steps {
        out.push(observation.clone());
        let result = match macros.get(&step.action.name) {
            Some(m) => {
                let args: Vec<String> = step.action.args.iter().map(|a| a.as_str().to_string()).collect();
                match expand_macro(m, &args, env) {
                    Ok(MacroRun { error: None, observation, .. }) => Ok(observation),
                    Ok(MacroRun { error: Some((_, e)), .. }) => Err(e.to_string()),
                    Err(e) => Err(e.to_string()),
                }
            }
            None => env.execute(&step.action).map_err(|e| e.to_string()),
        };
        observation = match result {
            Ok(obs) => obs,
            Err(e) => format!("Error: {e}\n{}", env.observe()),
        };
    }
    out
}

/// Teacher-forced prediction of one step: `gold_history` holds the gold
/// steps before the current one and is the only history shown.
pub fn predict_step(
    instruction: &str,
    gold_history: &[Step],
    observation: &str,
    memory_text: &str,
    lm: &dyn LmClient,
    vocab: &Vocabulary,
) -> Result<Decision, LmError> {
    let prompt = build_agent_prompt(instruction, memory_text, observation, gold_history);
    decide(lm, &prompt, vocab)
}
