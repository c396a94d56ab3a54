//! Plain-text workflow blocks.
//!
//! ```text
//! ## map: Find a place by its name
//! To find a place, I search for its name.
//! fill('145', '{place_name}')
//! press('145', 'Enter')
//! ```
//!
//! A block starts with a `## <website>: <title>` header. Lines that parse as
//! actions close a step; the text lines before an action belong to that step
//! (one line is the reasoning, two or more lines are a state description
//! followed by reasoning). Blocks are separated by blank lines.
//!
//! Checkpoint files add one metadata comment under the header so that ids,
//! provenance and text-format steps survive a reload:
//! `<!-- awm {"id":"map-1","source":"online"} -->`.

use serde::{Deserialize, Serialize};

use crate::action::{parse_action, snake_case, Action};
use crate::types::{JudgeKind, Workflow, WorkflowFormat, WorkflowSource, WorkflowStep};

const META_OPEN: &str = "<!-- awm ";
const META_CLOSE: &str = " -->";
const STATE_PREFIX: &str = "State: ";
const TEXT_ACTION_PREFIX: &str = "Action: ";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WorkflowParseError {
    #[error("workflow block does not start with a `## ` header")]
    Header,
    #[error("workflow `{0}` has no body")]
    EmptyBody(String),
    #[error("workflow `{title}` has {found} action line(s); at least 2 required")]
    MinSteps { title: String, found: usize },
    #[error("bad workflow metadata: {0}")]
    Meta(String),
}

#[derive(Debug, Serialize, Deserialize)]
struct Meta {
    id: String,
    source: WorkflowSource,
    #[serde(default, skip_serializing_if = "is_code")]
    format: WorkflowFormat,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    judged_by: Option<JudgeKind>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    code: Vec<String>,
}

fn is_code(f: &WorkflowFormat) -> bool {
    *f == WorkflowFormat::Code
}

/// The form shown to agents: header, step text and action lines.
pub fn render_workflow(w: &Workflow) -> String {
    render(w, false)
}

/// The checkpoint form: like [`render_workflow`] plus a metadata line.
pub fn render_workflow_record(w: &Workflow) -> String {
    render(w, true)
}

fn render(w: &Workflow, with_meta: bool) -> String {
    let mut out = format!("## {}: {}\n", w.website, w.description);
    if with_meta {
        let meta = Meta {
            id: w.id.clone(),
            source: w.source,
            format: w.format,
            judged_by: w.judged_by,
            code: match w.format {
                WorkflowFormat::Code => Vec::new(),
                WorkflowFormat::Text => w.steps.iter().map(|s| s.action.render()).collect(),
            },
        };
        out.push_str(META_OPEN);
        out.push_str(&serde_json::to_string(&meta).expect("metadata serializes"));
        out.push_str(META_CLOSE);
        out.push('\n');
    }
    for step in &w.steps {
        match (&step.state_desc, &step.reasoning) {
            (Some(state), Some(reasoning)) => {
                out.push_str(state);
                out.push('\n');
                out.push_str(reasoning);
                out.push('\n');
            }
            (Some(state), None) => {
                out.push_str(STATE_PREFIX);
                out.push_str(state);
                out.push('\n');
            }
            (None, Some(reasoning)) => {
                out.push_str(reasoning);
                out.push('\n');
            }
            (None, None) => {}
        }
        match (w.format, &step.verbalized) {
            (WorkflowFormat::Text, Some(sentence)) => {
                out.push_str(TEXT_ACTION_PREFIX);
                out.push_str(sentence);
            }
            _ => out.push_str(&step.action.render()),
        }
        out.push('\n');
    }
    out.pop();
    out
}

/// Parses one block. `website` is used when the header has no `website:` part.
pub fn parse_workflow(text: &str, website: &str) -> Result<Workflow, WorkflowParseError> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with("```"));
    let header = lines.next().ok_or(WorkflowParseError::Header)?;
    let header = header.strip_prefix("## ").ok_or(WorkflowParseError::Header)?.trim();
    let (site, title) = match header.split_once(": ") {
        Some((site, title)) if !site.trim().is_empty() => (site.trim().to_string(), title.trim().to_string()),
        _ => (website.to_string(), header.to_string()),
    };
    if title.is_empty() {
        return Err(WorkflowParseError::Header);
    }

    let mut body: Vec<&str> = lines.collect();
    let mut meta = None;
    if let Some(first) = body.first() {
        if let Some(json) = first.strip_prefix(META_OPEN).and_then(|r| r.strip_suffix(META_CLOSE)) {
            let m: Meta = serde_json::from_str(json).map_err(|e| WorkflowParseError::Meta(e.to_string()))?;
            meta = Some(m);
            body.remove(0);
        }
    }
    if body.is_empty() {
        return Err(WorkflowParseError::EmptyBody(title));
    }
    let format = meta.as_ref().map(|m| m.format).unwrap_or_default();
    let mut code = match &meta {
        Some(m) if format == WorkflowFormat::Text => {
            let mut actions = Vec::with_capacity(m.code.len());
            for line in &m.code {
                actions.push(parse_action(line).map_err(|e| WorkflowParseError::Meta(e.to_string()))?);
            }
            actions.into_iter()
        }
        _ => Vec::new().into_iter(),
    };

    let mut steps = Vec::new();
    let mut pending: Vec<&str> = Vec::new();
    for line in body {
        let step_action = match format {
            WorkflowFormat::Code => action_line(line).map(|a| (a, None)),
            WorkflowFormat::Text => match line.strip_prefix(TEXT_ACTION_PREFIX) {
                Some(sentence) => Some((
                    code.next()
                        .ok_or_else(|| WorkflowParseError::Meta("fewer code actions than text steps".into()))?,
                    Some(sentence.to_string()),
                )),
                None => None,
            },
        };
        match step_action {
            Some((action, verbalized)) => {
                let (state_desc, reasoning) = split_step_text(&pending);
                steps.push(WorkflowStep {
                    state_desc,
                    reasoning,
                    action,
                    verbalized,
                });
                pending.clear();
            }
            None => pending.push(line),
        }
    }
    if steps.len() < 2 {
        return Err(WorkflowParseError::MinSteps {
            title,
            found: steps.len(),
        });
    }

    let (id, source, judged_by) = match meta {
        Some(m) => (m.id, m.source, m.judged_by),
        None => (format!("{}-{}", snake_case(&site), snake_case(&title)), WorkflowSource::Human, None),
    };
    Ok(Workflow {
        id,
        website: site,
        description: title,
        steps,
        source,
        format,
        judged_by,
    })
}

/// Recognizes an action line, tolerating backticks and a trailing `# comment`.
pub fn action_line(line: &str) -> Option<Action> {
    let line = line.trim().trim_matches('`').trim();
    if let Ok(a) = parse_action(line) {
        return Some(a);
    }
    let close = line.rfind(')')?;
    let rest = line[close + 1..].trim_start();
    if rest.starts_with('#') {
        parse_action(&line[..=close]).ok()
    } else {
        None
    }
}

fn split_step_text(lines: &[&str]) -> (Option<String>, Option<String>) {
    match lines {
        [] => (None, None),
        [only] => match only.strip_prefix(STATE_PREFIX) {
            Some(state) => (Some(state.to_string()), None),
            None => (None, Some(only.to_string())),
        },
        [first, rest @ ..] => (Some(first.to_string()), Some(rest.join("\n"))),
    }
}

/// Splits text on blank lines into candidate blocks.
pub fn split_blocks(text: &str) -> Vec<String> {
    let mut blocks = Vec::new();
    let mut current = String::new();
    for line in text.lines() {
        if line.trim().is_empty() {
            if !current.is_empty() {
                blocks.push(std::mem::take(&mut current));
            }
        } else {
            if !current.is_empty() {
                current.push('\n');
            }
            current.push_str(line);
        }
    }
    if !current.is_empty() {
        blocks.push(current);
    }
    blocks
}

pub fn render_workflow_file(workflows: &[Workflow]) -> String {
    let mut out = workflows.iter().map(render_workflow_record).collect::<Vec<_>>().join("\n\n");
    if !out.is_empty() {
        out.push('\n');
    }
    out
}

/// Parses a checkpoint or hand-written workflow file; any bad block is an error.
pub fn parse_workflow_file(text: &str, default_website: &str) -> Result<Vec<Workflow>, (usize, WorkflowParseError)> {
    split_blocks(text)
        .iter()
        .enumerate()
        .map(|(i, block)| parse_workflow(block, default_website).map_err(|e| (i, e)))
        .collect()
}
