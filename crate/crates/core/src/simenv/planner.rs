use std::collections::{BTreeMap, HashSet};
use std::sync::{Arc, OnceLock};

use regex::Regex;

use super::env::{Environment, State, WebEnvironment};
use super::site::{Role, Site};
use super::task::TaskSpec;
use crate::action::{placeholder_re, Action, Arg, Primitive};
use crate::types::Workflow;

/// A found solution: primitive actions ending in a terminal action.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Plan {
    pub actions: Vec<Action>,
    /// Ids of workflows whose steps were used as single moves.
    pub workflows_used: Vec<String>,
}

/// Breadth-first lookahead over simulator states.
///
/// A move is either one primitive action or a whole workflow (or a prefix of
/// at least two of its steps) executed as a unit. Plans may use at most
/// `max_depth` moves; the final answer or stop is free. Workflow placeholders
/// bind on demand: element-id slots to ids on the current page, other slots
/// to the double-quoted values of the instruction.
#[derive(Debug, Clone)]
pub struct Planner {
    site: Arc<Site>,
    max_depth: usize,
    max_states: usize,
}

struct Node {
    state: State,
    actions: Vec<Action>,
    used: Vec<String>,
}

struct MacroMove {
    workflow_id: String,
    steps: Vec<Action>,
}

impl Planner {
    pub const DEFAULT_DEPTH: usize = 3;

    pub fn new(site: Arc<Site>) -> Planner {
        Planner {
            site,
            max_depth: Self::DEFAULT_DEPTH,
            max_states: 200_000,
        }
    }

    pub fn with_depth(mut self, max_depth: usize) -> Planner {
        self.max_depth = max_depth;
        self
    }

    pub fn plan(&self, task: &TaskSpec, workflows: &[Workflow]) -> Option<Plan> {
        let mut env = Environment::new(self.site.clone());
        env.reset(task).ok()?;
        let values = quoted_values(&task.instruction);
        let macros = macro_moves(workflows);

        let start = env.state().clone();
        let mut visited: HashSet<State> = HashSet::from([start.clone()]);
        let mut frontier = vec![Node {
            state: start,
            actions: Vec::new(),
            used: Vec::new(),
        }];
        for depth in 0..=self.max_depth {
            for node in &frontier {
                if let Some(terminal) = self.finish(&mut env, task, &node.state) {
                    let mut actions = node.actions.clone();
                    actions.push(terminal);
                    return Some(Plan {
                        actions,
                        workflows_used: node.used.clone(),
                    });
                }
            }
            if depth == self.max_depth {
                break;
            }
            let mut next = Vec::new();
            for node in &frontier {
                for (actions, used) in self.expand(&mut env, &node.state, &values, &macros) {
                    if visited.len() >= self.max_states {
                        return None;
                    }
                    let mut env2 = env.clone();
                    env2.set_state(node.state.clone());
                    if actions.iter().any(|a| env2.execute(a).is_err()) {
                        continue;
                    }
                    let state = env2.state().clone();
                    if state.ended || !visited.insert(state.clone()) {
                        continue;
                    }
                    let mut path = node.actions.clone();
                    path.extend(actions);
                    let mut now_used = node.used.clone();
                    now_used.extend(used);
                    next.push(Node {
                        state,
                        actions: path,
                        used: now_used,
                    });
                }
            }
            frontier = next;
        }
        None
    }

    /// A terminal action that satisfies the oracle from `state`, if any.
    fn finish(&self, env: &mut Environment, task: &TaskSpec, state: &State) -> Option<Action> {
        env.set_state(state.clone());
        let candidates: Vec<Action> = if task.oracle.needs_message() {
            env.elements()
                .into_iter()
                .map(|e| Action::primitive(Primitive::SendMsgToUser, &[&e.label]))
                .collect()
        } else {
            vec![Action::stop()]
        };
        for candidate in candidates {
            env.set_state(state.clone());
            if env.execute(&candidate).is_ok() {
                let end = env.state();
                if task.oracle.holds(end.final_message(), end) {
                    return Some(candidate);
                }
            }
        }
        None
    }

    fn expand(
        &self,
        env: &mut Environment,
        state: &State,
        values: &[String],
        macros: &[MacroMove],
    ) -> Vec<(Vec<Action>, Vec<String>)> {
        env.set_state(state.clone());
        let mut out = Vec::new();
        for e in env.elements() {
            let id = e.id.to_string();
            match e.role {
                Role::Link | Role::Button => out.push(vec![Action::primitive(Primitive::Click, &[&id])]),
                Role::Textbox => {
                    for v in values {
                        out.push(vec![Action::primitive(Primitive::Fill, &[&id, v])]);
                    }
                    out.push(vec![Action::primitive(Primitive::Press, &[&id, "Enter"])]);
                }
                Role::Option => {
                    for o in &e.options {
                        out.push(vec![Action::primitive(Primitive::SelectOption, &[&id, o])]);
                    }
                }
                Role::Text => {}
            }
        }
        let mut moves: Vec<(Vec<Action>, Vec<String>)> = out.into_iter().map(|a| (a, Vec::new())).collect();
        for m in macros {
            let mut runs = Vec::new();
            bind_and_run(env, state, &m.steps, &BTreeMap::new(), values, Vec::new(), &mut runs);
            for actions in runs {
                moves.push((actions, vec![m.workflow_id.clone()]));
            }
        }
        moves
    }
}

/// Executes `steps` from `state`, branching over bindings of unbound
/// placeholders; collects every fully executed action list.
fn bind_and_run(
    env: &mut Environment,
    state: &State,
    steps: &[Action],
    bindings: &BTreeMap<String, String>,
    values: &[String],
    done: Vec<Action>,
    out: &mut Vec<Vec<Action>>,
) {
    const MAX_RUNS: usize = 64;
    if out.len() >= MAX_RUNS {
        return;
    }
    let Some((step, rest)) = steps.split_first() else {
        out.push(done);
        return;
    };
    let unbound = step.args.iter().enumerate().find_map(|(i, a)| {
        a.placeholders()
            .into_iter()
            .find(|p| !bindings.contains_key(p))
            .map(|p| (i, p))
    });
    if let Some((arg_index, name)) = unbound {
        env.set_state(state.clone());
        let targets_element = arg_index == 0 && step.primitive_kind().is_some_and(Primitive::targets_element);
        let candidates: Vec<String> = if targets_element {
            env.elements().iter().map(|e| e.id.to_string()).collect()
        } else {
            values.to_vec()
        };
        for c in candidates {
            let mut b = bindings.clone();
            b.insert(name.clone(), c);
            bind_and_run(env, state, steps, &b, values, done.clone(), out);
        }
        return;
    }
    let concrete = substitute(step, bindings);
    env.set_state(state.clone());
    if env.execute(&concrete).is_err() {
        return;
    }
    let next = env.state().clone();
    let mut done = done;
    done.push(concrete);
    bind_and_run(env, &next, rest, bindings, values, done, out);
}

fn substitute(action: &Action, bindings: &BTreeMap<String, String>) -> Action {
    let args = action
        .args
        .iter()
        .map(|a| {
            let text = placeholder_re().replace_all(a.as_str(), |c: &regex::Captures<'_>| {
                bindings.get(&c[1]).cloned().unwrap_or_else(|| c[0].to_string())
            });
            Arg::quoted(text.into_owned())
        })
        .collect();
    Action::new(action.name.clone(), args)
}

fn macro_moves(workflows: &[Workflow]) -> Vec<MacroMove> {
    let mut seen: HashSet<Vec<String>> = HashSet::new();
    let mut out = Vec::new();
    for w in workflows {
        let body: Vec<Action> = w
            .steps
            .iter()
            .map(|s| s.action.clone())
            .take_while(|a| !a.is_terminal() && a.primitive_kind().is_some())
            .collect();
        for len in (2..=body.len()).rev() {
            let steps = body[..len].to_vec();
            if seen.insert(steps.iter().map(Action::render).collect()) {
                out.push(MacroMove {
                    workflow_id: w.id.clone(),
                    steps,
                });
            }
        }
    }
    out
}

/// Double-quoted values of an instruction, in order, without repeats.
pub fn quoted_values(instruction: &str) -> Vec<String> {
    static RE: OnceLock<Regex> = OnceLock::new();
    let re = RE.get_or_init(|| Regex::new(r#""([^"]+)""#).expect("valid regex"));
    let mut out: Vec<String> = Vec::new();
    for c in re.captures_iter(instruction) {
        let v = c[1].to_string();
        if !out.contains(&v) {
            out.push(v);
        }
    }
    out
}
