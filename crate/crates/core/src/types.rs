//! Shared value types: steps, experiences, workflows and agent memory.

use serde::{Deserialize, Serialize};

use crate::action::{placeholders_canonical, Action, Primitive};

/// One observe/act step of an episode.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    pub observation: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state_desc: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub html: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reasoning: Option<String>,
    pub action: Action,
}

impl Step {
    pub fn new(observation: impl Into<String>, action: Action) -> Step {
        Step {
            observation: observation.into(),
            state_desc: None,
            html: None,
            reasoning: None,
            action,
        }
    }

    pub fn with_reasoning(mut self, reasoning: impl Into<String>) -> Step {
        self.reasoning = Some(reasoning.into());
        self
    }

    pub fn with_state(mut self, state_desc: impl Into<String>) -> Step {
        self.state_desc = Some(state_desc.into());
        self
    }
}

/// A completed (or attempted) task: instruction plus trajectory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Experience {
    pub id: String,
    pub website: String,
    pub instruction: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub template_id: Option<String>,
    pub steps: Vec<Step>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub success: Option<bool>,
}

impl Experience {
    pub fn new(id: impl Into<String>, website: impl Into<String>, instruction: impl Into<String>) -> Experience {
        Experience {
            id: id.into(),
            website: website.into(),
            instruction: instruction.into(),
            template_id: None,
            steps: Vec::new(),
            success: None,
        }
    }

    pub fn actions(&self) -> impl Iterator<Item = &Action> {
        self.steps.iter().map(|s| &s.action)
    }

    /// Payload of the final terminal action, if the episode ended with one.
    pub fn final_message(&self) -> Option<&str> {
        self.steps.last().and_then(|s| s.action.payload())
    }

    pub fn validate(&self) -> Result<(), SchemaError> {
        if self.website.trim().is_empty() {
            return Err(SchemaError::Invalid(format!("experience `{}` has an empty website", self.id)));
        }
        let terminals: Vec<usize> = self
            .steps
            .iter()
            .enumerate()
            .filter(|(_, s)| s.action.is_terminal())
            .map(|(i, _)| i)
            .collect();
        match terminals.as_slice() {
            [] => Ok(()),
            [i] if *i + 1 == self.steps.len() => Ok(()),
            _ => Err(SchemaError::Invalid(format!(
                "experience `{}`: a terminal action may only appear once, as the last step",
                self.id
            ))),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SchemaError {
    #[error("line {line}: {source}")]
    Json {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("{0}")]
    Invalid(String),
}

/// Serializes one experience as a single JSON line (no trailing newline).
pub fn serialize_experience(e: &Experience) -> String {
    serde_json::to_string(e).expect("experience serialization is infallible")
}

pub fn parse_experience(text: &str) -> Result<Experience, SchemaError> {
    let e: Experience = serde_json::from_str(text).map_err(|source| SchemaError::Json { line: 1, source })?;
    e.validate()?;
    Ok(e)
}

/// Reads newline-delimited JSON; blank lines are skipped.
pub fn read_experiences(text: &str) -> Result<Vec<Experience>, SchemaError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let e: Experience = serde_json::from_str(line).map_err(|source| SchemaError::Json { line: i + 1, source })?;
        e.validate()?;
        out.push(e);
    }
    Ok(out)
}

pub fn write_experiences<'a>(experiences: impl IntoIterator<Item = &'a Experience>) -> String {
    let mut out = String::new();
    for e in experiences {
        out.push_str(&serialize_experience(e));
        out.push('\n');
    }
    out
}

/// A step inside a workflow; arguments may hold placeholders.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorkflowStep {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state_desc: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reasoning: Option<String>,
    pub action: Action,
    /// Natural-language rendering of `action` for text-format workflows.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verbalized: Option<String>,
}

impl WorkflowStep {
    pub fn new(action: Action) -> WorkflowStep {
        WorkflowStep {
            state_desc: None,
            reasoning: None,
            action,
            verbalized: None,
        }
    }

    pub fn with_reasoning(mut self, reasoning: impl Into<String>) -> WorkflowStep {
        self.reasoning = Some(reasoning.into());
        self
    }

    pub fn with_state(mut self, state_desc: impl Into<String>) -> WorkflowStep {
        self.state_desc = Some(state_desc.into());
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WorkflowSource {
    Rule,
    Lm,
    Human,
    Offline,
    Online,
}

impl WorkflowSource {
    pub fn as_str(self) -> &'static str {
        match self {
            WorkflowSource::Rule => "rule",
            WorkflowSource::Lm => "lm",
            WorkflowSource::Human => "human",
            WorkflowSource::Offline => "offline",
            WorkflowSource::Online => "online",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WorkflowFormat {
    #[default]
    Code,
    Text,
}

/// Which kind of judge approved the experience a workflow came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JudgeKind {
    Lm,
    Oracle,
}

impl JudgeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            JudgeKind::Lm => "lm",
            JudgeKind::Oracle => "oracle",
        }
    }
}

/// A reusable routine: a goal description and abstracted steps.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Workflow {
    pub id: String,
    pub website: String,
    pub description: String,
    pub steps: Vec<WorkflowStep>,
    pub source: WorkflowSource,
    #[serde(default)]
    pub format: WorkflowFormat,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub judged_by: Option<JudgeKind>,
}

impl Workflow {
    pub fn signature(&self) -> Vec<&str> {
        self.steps.iter().map(|s| s.action.name.as_str()).collect()
    }

    /// Distinct placeholder names across all step arguments, first occurrence first.
    pub fn placeholders(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for step in &self.steps {
            for p in step.action.placeholders() {
                if !out.contains(&p) {
                    out.push(p);
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.steps.len() < 2 {
            return Err(format!("workflow `{}` has {} step(s); at least 2 required", self.id, self.steps.len()));
        }
        for step in &self.steps {
            if let Some(p) = step.action.primitive_kind() {
                let (lo, hi) = p.arity();
                let n = step.action.args.len();
                if n < lo || n > hi {
                    return Err(format!("workflow `{}`: bad arity for {}", self.id, step.action));
                }
            }
            for arg in &step.action.args {
                if !placeholders_canonical(arg.as_str()) {
                    return Err(format!("workflow `{}`: non-canonical placeholder in `{}`", self.id, arg.as_str()));
                }
            }
        }
        Ok(())
    }
}

/// Built-in action documentation plus the workflows of one website.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgentMemory {
    pub website: String,
    pub base_docs: String,
    pub workflows: Vec<Workflow>,
}

/// Documentation of the primitive actions, used as the baseline memory.
pub fn default_action_docs() -> String {
    let mut out = String::from("You are a web navigation agent. Available actions:\n");
    for p in Primitive::ALL {
        let line = match p {
            Primitive::Click => "click('id'): click the element with the given id",
            Primitive::Fill => "fill('id', 'text'): replace the content of a textbox",
            Primitive::Type => "type('id', 'text'): same as fill",
            Primitive::Hover => "hover('id'): move the pointer over an element",
            Primitive::Press => "press('id', 'Key'): press a key while the element is focused",
            Primitive::SelectOption => "select_option('id', 'option'): choose a dropdown option",
            Primitive::Clear => "clear('id'): empty a textbox",
            Primitive::SendMsgToUser => "send_msg_to_user('text'): answer the user and finish",
            Primitive::Stop => "stop(): finish the task",
        };
        out.push_str("- ");
        out.push_str(line);
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::{parse_action, Arg};

    fn fixture() -> Experience {
        let mut e = Experience::new("e1", "shopping", "Buy cat food");
        for line in ["click('12')", "click('30')", "type('44', 'cat')"] {
            e.steps.push(Step::new("[12] link 'Pets'", parse_action(line).unwrap()));
        }
        e
    }

    #[test]
    fn three_step_record_keeps_order() {
        let e = fixture();
        let line = serialize_experience(&e);
        let v: serde_json::Value = serde_json::from_str(&line).unwrap();
        let steps = v["steps"].as_array().unwrap();
        assert_eq!(steps.len(), 3);
        let names: Vec<&str> = steps.iter().map(|s| s["action"]["name"].as_str().unwrap()).collect();
        assert_eq!(names, ["click", "click", "type"]);
        assert!(v.get("template_id").is_none(), "absent optionals are omitted");
        assert_eq!(parse_experience(&line).unwrap(), e);
    }

    #[test]
    fn missing_website_is_schema_error() {
        let line = r#"{"id":"x","instruction":"q","steps":[]}"#;
        assert!(matches!(parse_experience(line), Err(SchemaError::Json { .. })));
        let line = r#"{"id":"x","website":" ","instruction":"q","steps":[]}"#;
        assert!(matches!(parse_experience(line), Err(SchemaError::Invalid(_))));
    }

    #[test]
    fn terminal_must_be_last() {
        let mut e = fixture();
        e.steps.insert(1, Step::new("", Action::stop()));
        assert!(e.validate().is_err());
        let mut e = fixture();
        e.steps.push(Step::new("", Action::new("send_msg_to_user", vec![Arg::quoted("done")])));
        assert!(e.validate().is_ok());
        assert_eq!(e.final_message(), Some("done"));
    }

    #[test]
    fn ndjson_reports_line_numbers() {
        let good = serialize_experience(&fixture());
        let text = format!("{good}\n\n{{\"id\":1}}\n");
        match read_experiences(&text) {
            Err(SchemaError::Json { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }
}
