//! Binary success judges: a prompted model and a ground-truth oracle.

use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::lm::{LmClient, LmRequest};
use crate::simenv::{State, TaskSpec};
use crate::types::{Experience, JudgeKind};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Judgment {
    pub success: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rationale: Option<String>,
    pub judge_kind: JudgeKind,
}

impl Judgment {
    fn failure(kind: JudgeKind, why: impl Into<String>) -> Judgment {
        Judgment {
            success: false,
            rationale: Some(why.into()),
            judge_kind: kind,
        }
    }
}

/// Evaluator instructions. A functional stand-in for the usual trajectory
/// evaluator prompt: it sees the instruction, the actions and the final
/// answer, and must end with a status line.
pub const JUDGE_INSTRUCTIONS: &str = "You are evaluating whether a web agent completed a user task. \
You are given the user's intent, the actions the agent took with its reasoning, and the agent's final \
response. Decide whether the task was completed successfully. If the agent gave an answer, it must be \
correct and complete. If the task required changing the website, the actions must have made that change.\n\
Reply in this format:\nThoughts: <your reasoning>\nStatus: \"success\" or \"failure\"";

pub fn build_judge_prompt(e: &Experience) -> String {
    let mut out = format!("{JUDGE_INSTRUCTIONS}\n\nUser intent: {}\n\nAction history:\n", e.instruction);
    for (i, step) in e.steps.iter().enumerate() {
        out.push_str(&format!("{}. ", i + 1));
        if let Some(r) = &step.reasoning {
            out.push_str(&format!("{} ", r.replace('\n', " ")));
        }
        out.push_str(&format!("-> {}\n", step.action.render()));
    }
    let last = e.steps.last();
    if let Some(obs) = last.map(|s| s.observation.trim()).filter(|o| !o.is_empty()) {
        out.push_str(&format!("\nLast observation:\n{obs}\n"));
    }
    out.push_str(&format!(
        "\nFinal response: {}\n",
        e.final_message().filter(|m| !m.is_empty()).unwrap_or("N/A")
    ));
    out
}

fn status_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?im)^\s*\**status\**\s*:\s*(.+?)\s*$").expect("valid regex"))
}

/// Success only if at least one status line exists and every status line
/// reads exactly `success` (quotes, asterisks and a final period ignored).
pub fn parse_verdict(reply: &str) -> bool {
    let verdicts: Vec<String> = status_re()
        .captures_iter(reply)
        .map(|c| {
            c[1].trim_matches(|ch: char| ch == '"' || ch == '\'' || ch == '*' || ch == '`' || ch == '.' || ch.is_whitespace())
                .to_ascii_lowercase()
        })
        .collect();
    !verdicts.is_empty() && verdicts.iter().all(|v| v == "success")
}

pub fn judge_lm(e: &Experience, lm: &dyn LmClient) -> Judgment {
    let prompt = build_judge_prompt(e);
    match lm.complete(&LmRequest::new(prompt)) {
        Ok(reply) => {
            tracing::trace!(target: "awm::trace", reply = %reply.text, "judge call");
            Judgment {
                success: parse_verdict(&reply.text),
                rationale: Some(reply.text.trim().to_string()),
                judge_kind: JudgeKind::Lm,
            }
        }
        Err(err) => {
            tracing::warn!(%err, experience = %e.id, "judge call failed");
            Judgment::failure(JudgeKind::Lm, "judge error")
        }
    }
}

/// Checks the task's oracle. The experience must end in a terminal action.
pub fn judge_oracle(e: &Experience, task: &TaskSpec, final_state: &State) -> Judgment {
    if !e.steps.last().is_some_and(|s| s.action.is_terminal()) {
        return Judgment::failure(JudgeKind::Oracle, "episode did not terminate");
    }
    let message = e.final_message();
    if task.oracle.needs_message() && message.is_none() {
        return Judgment::failure(JudgeKind::Oracle, "no final message");
    }
    let success = task.oracle.holds(message, final_state);
    Judgment {
        success,
        rationale: Some(if success { "oracle check holds" } else { "oracle check fails" }.into()),
        judge_kind: JudgeKind::Oracle,
    }
}

/// Everything a judge may look at after an episode.
pub struct EpisodeOutcome<'a> {
    pub experience: &'a Experience,
    pub task: Option<&'a TaskSpec>,
    pub final_state: Option<&'a State>,
}

/// One contract over both judge kinds.
pub trait Judge {
    fn kind(&self) -> JudgeKind;
    fn judge(&self, outcome: &EpisodeOutcome<'_>) -> Judgment;
}

pub struct LmJudge<'a> {
    pub lm: &'a dyn LmClient,
}

impl Judge for LmJudge<'_> {
    fn kind(&self) -> JudgeKind {
        JudgeKind::Lm
    }

    fn judge(&self, outcome: &EpisodeOutcome<'_>) -> Judgment {
        judge_lm(outcome.experience, self.lm)
    }
}

pub struct OracleJudge;

impl Judge for OracleJudge {
    fn kind(&self) -> JudgeKind {
        JudgeKind::Oracle
    }

    fn judge(&self, outcome: &EpisodeOutcome<'_>) -> Judgment {
        match (outcome.task, outcome.final_state) {
            (Some(task), Some(state)) => judge_oracle(outcome.experience, task, state),
            _ => Judgment::failure(JudgeKind::Oracle, "no task oracle available"),
        }
    }
}
