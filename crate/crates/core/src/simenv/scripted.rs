//! Scripted model stand-ins for desk-scale end-to-end runs.
//!
//! [`ScriptedAgent`] answers agent prompts by planning in the simulator with
//! the workflows found in its memory; [`ScriptedInducer`] answers induction
//! prompts by abstracting the typed values of each experience. Both speak
//! through the ordinary [`LmClient`] contract, so the pipeline cannot tell
//! them from a real model.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use regex::Regex;

use super::planner::{quoted_values, Plan, Planner};
use super::site::Site;
use super::task::TaskSpec;
use crate::action::{parse_action, snake_case, Action, Arg, Primitive};
use crate::agent::{HISTORY_ACTION_PREFIX, MEMORY_WORKFLOWS_HEADING, SECTION_OBSERVATION, SECTION_PREVIOUS, SECTION_TASK};
use crate::lm::{LmClient, LmError, LmRequest, LmResponse};
use crate::types::Workflow;
use crate::workflow_text::{parse_workflow, split_blocks};

/// Prompt substring that identifies induction requests.
pub const INDUCER_ROUTE: &str = "extract the common workflows";

/// Plans with a bounded lookahead, using memory workflows as single moves.
///
/// With no workflows in memory only tasks within `depth` primitive actions
/// are solvable; each workflow learned shortens the tasks that reuse it.
/// Unsolvable tasks are answered with `stop()`.
pub struct ScriptedAgent {
    sites: HashMap<String, Arc<Site>>,
    tasks: Vec<TaskSpec>,
    depth: usize,
    cache: Mutex<HashMap<(String, String), Option<Plan>>>,
}

impl ScriptedAgent {
    pub fn new(sites: &[Arc<Site>], tasks: Vec<TaskSpec>) -> ScriptedAgent {
        ScriptedAgent {
            sites: sites.iter().map(|s| (s.name.clone(), s.clone())).collect(),
            tasks,
            depth: Planner::DEFAULT_DEPTH,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn with_depth(mut self, depth: usize) -> ScriptedAgent {
        self.depth = depth;
        self
    }

    fn plan_for(&self, instruction: &str, memory: &str) -> Option<Plan> {
        let key = (instruction.to_string(), memory.to_string());
        if let Some(p) = self.cache.lock().expect("plan cache poisoned").get(&key) {
            return p.clone();
        }
        let plan = self.tasks.iter().find(|t| t.instruction == instruction).and_then(|task| {
            let site = self.sites.get(&task.website)?;
            let workflows = memory_workflows(memory, &task.website);
            Planner::new(site.clone()).with_depth(self.depth).plan(task, &workflows)
        });
        self.cache.lock().expect("plan cache poisoned").insert(key, plan.clone());
        plan
    }
}

impl LmClient for ScriptedAgent {
    fn complete(&self, req: &LmRequest) -> Result<LmResponse, LmError> {
        let prompt = AgentPrompt::parse(&req.prompt)
            .ok_or_else(|| LmError::BadResponse("scripted agent got a non-agent prompt".into()))?;
        let plan = self.plan_for(prompt.instruction, prompt.memory);
        let action = match &plan {
            Some(p) => p.actions.get(prompt.history_len).cloned().unwrap_or_else(Action::stop),
            None => {
                return Ok(LmResponse::text(
                    "I cannot find a way to complete this task.\nstop()",
                ))
            }
        };
        let reasoning = describe(&action, prompt.observation);
        Ok(LmResponse::text(format!("{reasoning}\n{}", action.render())))
    }
}

struct AgentPrompt<'a> {
    memory: &'a str,
    instruction: &'a str,
    history_len: usize,
    observation: &'a str,
}

impl<'a> AgentPrompt<'a> {
    fn parse(prompt: &'a str) -> Option<AgentPrompt<'a>> {
        let task_at = prompt.find(SECTION_TASK)?;
        let memory = prompt[..task_at].trim_end();
        let after_task = &prompt[task_at + SECTION_TASK.len()..];
        let obs_at = after_task.find(SECTION_OBSERVATION)?;
        let (head, tail) = after_task.split_at(obs_at);
        let (instruction, history) = match head.find(SECTION_PREVIOUS) {
            Some(i) => (&head[..i], &head[i..]),
            None => (head, ""),
        };
        let observation = &tail[SECTION_OBSERVATION.len()..];
        let observation = observation.split("\n\n#").next().unwrap_or(observation);
        Some(AgentPrompt {
            memory,
            instruction: instruction.trim(),
            history_len: history.lines().filter(|l| l.starts_with(HISTORY_ACTION_PREFIX)).count(),
            observation: observation.trim(),
        })
    }
}

fn memory_workflows(memory: &str, website: &str) -> Vec<Workflow> {
    let Some(at) = memory.find(MEMORY_WORKFLOWS_HEADING) else {
        return Vec::new();
    };
    split_blocks(&memory[at + MEMORY_WORKFLOWS_HEADING.len()..])
        .iter()
        .filter_map(|b| parse_workflow(b, website).ok())
        .collect()
}

fn observed_page(observation: &str) -> &str {
    observation
        .lines()
        .find_map(|l| l.strip_prefix("Page: "))
        .unwrap_or("current")
}

fn observed_label(observation: &str, id: &str) -> Option<String> {
    let prefix = format!("[{id}] ");
    let line = observation.lines().find(|l| l.starts_with(&prefix))?;
    let rest = &line[prefix.len()..];
    let (role, label) = rest.split_once(' ')?;
    let label = label.strip_prefix('\'')?;
    let end = label.find('\'')?;
    Some(format!("'{}' {role}", &label[..end]))
}

fn describe(action: &Action, observation: &str) -> String {
    let page = observed_page(observation);
    let target = action
        .element()
        .and_then(|id| observed_label(observation, id))
        .unwrap_or_else(|| "element".into());
    let what = match action.primitive_kind().map(Primitive::semantic) {
        Some(Primitive::Click) => format!("I click the {target}."),
        Some(Primitive::Fill) => format!("I type the value into the {target}."),
        Some(Primitive::Press) => format!("I press Enter in the {target}."),
        Some(Primitive::SelectOption) => format!("I choose an option in the {target}."),
        Some(Primitive::SendMsgToUser) => "I report the answer to the user.".into(),
        Some(Primitive::Stop) => "The task is complete, so I stop.".into(),
        _ => format!("I use {}.", action.name),
    };
    format!("On the {page} page, {}", lowercase_first(&what))
}

fn lowercase_first(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) if !s.starts_with("I ") => f.to_lowercase().collect::<String>() + c.as_str(),
        Some(f) => f.to_string() + c.as_str(),
        None => String::new(),
    }
}

/// Turns each experience of an induction prompt into one workflow block.
///
/// Typed values that appear double-quoted in the query become placeholders
/// named after the target element's label, final answers become `{answer}`,
/// and clicked element ids stay concrete.
#[derive(Debug, Default, Clone, Copy)]
pub struct ScriptedInducer;

impl LmClient for ScriptedInducer {
    fn complete(&self, req: &LmRequest) -> Result<LmResponse, LmError> {
        let website = req
            .prompt
            .lines()
            .find_map(|l| l.strip_prefix("Website: "))
            .unwrap_or("site")
            .trim()
            .to_string();
        let blocks: Vec<String> = req
            .prompt
            .split("\n\nQuery: ")
            .skip(1)
            .filter_map(|chunk| induce_block(&website, chunk))
            .collect();
        Ok(LmResponse::text(blocks.join("\n\n")))
    }
}

struct RecordedStep {
    reasoning: Option<String>,
    action: Action,
}

fn label_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"'([^']+)'").expect("valid regex"))
}

fn page_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^On the (.+?) page, (.*)$").expect("valid regex"))
}

fn induce_block(website: &str, chunk: &str) -> Option<String> {
    let mut lines = chunk.lines();
    let query = lines.next()?.trim();
    let mut steps: Vec<RecordedStep> = Vec::new();
    let mut reasoning = None;
    for line in lines {
        if let Some(r) = line.strip_prefix("Reasoning: ") {
            reasoning = Some(r.to_string());
        } else if let Some(a) = line.strip_prefix("Action: ") {
            steps.push(RecordedStep {
                reasoning: reasoning.take(),
                action: parse_action(a).ok()?,
            });
        }
    }
    if steps.len() < 2 {
        return None;
    }

    let values = quoted_values(query);
    let mut names: Vec<(String, String)> = Vec::new();
    let mut out_steps = Vec::new();
    for step in &steps {
        let mut action = step.action.clone();
        match action.primitive_kind().map(Primitive::semantic) {
            Some(Primitive::Fill | Primitive::SelectOption) => {
                if let Some(v) = action.args.get(1).map(|a| a.as_str().to_string()) {
                    if values.contains(&v) {
                        let name = match names.iter().find(|(val, _)| *val == v) {
                            Some((_, n)) => n.clone(),
                            None => {
                                let label = step
                                    .reasoning
                                    .as_deref()
                                    .and_then(|r| label_re().captures(r).map(|c| c[1].to_string()))
                                    .unwrap_or_else(|| format!("value {}", names.len() + 1));
                                let mut name = snake_case(&label);
                                if names.iter().any(|(_, n)| *n == name) {
                                    name = format!("{name}_{}", names.len() + 1);
                                }
                                names.push((v.clone(), name.clone()));
                                name
                            }
                        };
                        action.args[1] = Arg::quoted(format!("{{{name}}}"));
                    }
                }
            }
            Some(Primitive::SendMsgToUser) => action.args = vec![Arg::quoted("{answer}")],
            _ => {}
        }
        let (state, thought) = match step.reasoning.as_deref().and_then(|r| page_re().captures(r)) {
            Some(c) => (Some(format!("On the {} page.", &c[1])), Some(capitalize(&c[2]))),
            None => (None, step.reasoning.clone()),
        };
        out_steps.push((state, thought, action));
    }

    let mut description = query.to_string();
    for (value, name) in &names {
        description = description.replace(&format!("\"{value}\""), &format!("{{{name}}}"));
    }
    let mut block = format!("## {website}: {description}");
    for (state, thought, action) in out_steps {
        match (state, thought) {
            (Some(s), Some(t)) => block.push_str(&format!("\n{s}\n{t}")),
            (None, Some(t)) => block.push_str(&format!("\n{t}")),
            (Some(s), None) => block.push_str(&format!("\nState: {s}")),
            (None, None) => {}
        }
        block.push('\n');
        block.push_str(&action.render());
    }
    Some(block)
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().collect::<String>() + c.as_str(),
        None => String::new(),
    }
}
