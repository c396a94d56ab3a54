use std::collections::BTreeMap;

use crate::action::{placeholder_re, snake_case, Action, Arg, Primitive, Vocabulary};
use crate::memory::WorkflowStore;
use crate::simenv::{EnvError, WebEnvironment};
use crate::types::Workflow;

/// A workflow exposed to the agent as one callable action.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MacroAction {
    pub name: String,
    pub description: String,
    /// Distinct placeholders of the body in order of first appearance; call
    /// arguments bind to them by position.
    pub params: Vec<String>,
    /// Non-terminal steps of the workflow.
    pub body: Vec<Action>,
    pub workflow_id: String,
}

impl MacroAction {
    /// Keeps the non-terminal primitive steps; macro bodies never call
    /// other macros.
    pub fn from_workflow(name: impl Into<String>, w: &Workflow) -> MacroAction {
        let body: Vec<Action> = w
            .steps
            .iter()
            .map(|s| s.action.clone())
            .filter(|a| !a.is_terminal() && a.primitive_kind().is_some())
            .collect();
        let mut params: Vec<String> = Vec::new();
        for p in body.iter().flat_map(Action::placeholders) {
            if !params.contains(&p) {
                params.push(p);
            }
        }
        MacroAction {
            name: name.into(),
            description: w.description.clone(),
            params,
            body,
            workflow_id: w.id.clone(),
        }
    }

    pub fn doc_line(&self) -> String {
        format!("- {}({}): {}", self.name, self.params.join(", "), self.description)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MacroRegistry {
    macros: Vec<MacroAction>,
    vocab: Vocabulary,
}

impl MacroRegistry {
    pub fn is_empty(&self) -> bool {
        self.macros.is_empty()
    }

    pub fn len(&self) -> usize {
        self.macros.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = &MacroAction> {
        self.macros.iter()
    }

    pub fn get(&self, name: &str) -> Option<&MacroAction> {
        self.macros.iter().find(|m| m.name == name)
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    /// Adds `m`, renaming it with a numeric suffix when the name is taken by a
    /// primitive or an earlier macro. Returns the final name.
    pub fn insert(&mut self, mut m: MacroAction) -> String {
        let base = if m.name.is_empty() { "workflow".to_string() } else { m.name.clone() };
        let taken = |n: &str, reg: &MacroRegistry| Primitive::from_name(n).is_some() || reg.get(n).is_some();
        let mut name = base.clone();
        let mut k = 2;
        while taken(&name, self) {
            name = format!("{base}_{k}");
            k += 1;
        }
        m.name = name.clone();
        self.vocab.register(name.clone(), m.params.len());
        self.macros.push(m);
        name
    }

    pub fn docs(&self) -> String {
        let mut out = String::from("Workflow actions (run several steps at once):\n");
        for m in &self.macros {
            out.push_str(&m.doc_line());
            out.push('\n');
        }
        out
    }
}

/// Builds macros for every stored workflow of `website`, named after the
/// snake-cased workflow description.
pub fn register_macro_actions(store: &WorkflowStore, website: &str) -> MacroRegistry {
    let mut reg = MacroRegistry::default();
    for w in store.workflows(website) {
        let mut name = snake_case(&w.description);
        name.truncate(40);
        let name = name.trim_end_matches('_').to_string();
        let m = MacroAction::from_workflow(name, w);
        if !m.body.is_empty() {
            reg.insert(m);
        }
    }
    reg
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MacroError {
    #[error("macro `{name}` takes {expected} argument(s), got {got}")]
    Arity { name: String, expected: usize, got: usize },
    #[error("macro `{name}` step {step} uses unbound placeholder `{placeholder}`")]
    UnboundPlaceholder { name: String, step: usize, placeholder: String },
}

/// Result of expanding a macro: the primitive actions that ran, the first
/// failure (step index and error) if any, and the final observation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MacroRun {
    pub executed: Vec<Action>,
    pub error: Option<(usize, EnvError)>,
    pub observation: String,
}

/// Binds `args` to the macro's parameters and executes its body, stopping at
/// the first environment error.
pub fn expand_macro(m: &MacroAction, args: &[String], env: &mut dyn WebEnvironment) -> Result<MacroRun, MacroError> {
    if args.len() != m.params.len() {
        return Err(MacroError::Arity {
            name: m.name.clone(),
            expected: m.params.len(),
            got: args.len(),
        });
    }
    let bindings: BTreeMap<&str, &str> = m.params.iter().map(String::as_str).zip(args.iter().map(String::as_str)).collect();
    let mut concrete = Vec::with_capacity(m.body.len());
    for (i, step) in m.body.iter().enumerate() {
        let mut new_args = Vec::with_capacity(step.args.len());
        for a in &step.args {
            if let Some(p) = a.placeholders().into_iter().find(|p| !bindings.contains_key(p.as_str())) {
                return Err(MacroError::UnboundPlaceholder {
                    name: m.name.clone(),
                    step: i,
                    placeholder: p,
                });
            }
            let text = placeholder_re().replace_all(a.as_str(), |c: &regex::Captures<'_>| bindings[&c[1]].to_string());
            new_args.push(Arg::quoted(text.into_owned()));
        }
        concrete.push(Action::new(step.name.clone(), new_args));
    }
    let mut executed = Vec::new();
    let mut observation = env.observe();
    for (i, action) in concrete.into_iter().enumerate() {
        match env.execute(&action) {
            Ok(obs) => {
                observation = obs;
                executed.push(action);
            }
            Err(e) => {
                return Ok(MacroRun {
                    executed,
                    error: Some((i, e)),
                    observation: env.observe(),
                })
            }
        }
    }
    Ok(MacroRun {
        executed,
        error: None,
        observation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::parse_action;
    use crate::types::{WorkflowFormat, WorkflowSource, WorkflowStep};

    fn wf(description: &str, actions: &[&str]) -> Workflow {
        Workflow {
            id: "w".into(),
            website: "s".into(),
            description: description.into(),
            steps: actions
                .iter()
                .map(|a| WorkflowStep::new(parse_action(a).unwrap()))
                .collect(),
            source: WorkflowSource::Human,
            format: WorkflowFormat::Code,
            judged_by: None,
        }
    }

    #[test]
    fn names_avoid_collisions() {
        let mut reg = MacroRegistry::default();
        let w = wf("Click", &["click('{a_id}')", "fill('2', '{q}')", "send_msg_to_user('{answer}')"]);
        assert_eq!(reg.insert(MacroAction::from_workflow("click", &w)), "click_2");
        assert_eq!(reg.insert(MacroAction::from_workflow("search", &w)), "search");
        assert_eq!(reg.insert(MacroAction::from_workflow("search", &w)), "search_2");
        assert_eq!(reg.vocabulary().macro_arity("search_2"), Some(2));
        let m = reg.get("search").unwrap();
        assert_eq!(m.body.len(), 2);
        assert_eq!(m.doc_line(), "- search(a_id, q): Click");
    }
}
