use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;

use super::site::{
    bind_record, is_var_name, render_template, run_query, Condition, Effect, Page, Record, Role, Site,
    TransitionAction,
};
use super::task::TaskSpec;
use crate::action::{Action, Primitive};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EnvError {
    #[error("no element with id '{0}' on this page")]
    NoSuchElement(String),
    #[error("illegal action: {0}")]
    IllegalAction(String),
    #[error("task `{0}` does not belong to this site")]
    UnknownTask(String),
}

/// Anything an agent can observe and act on.
pub trait WebEnvironment {
    fn observe(&self) -> String;

    /// Pseudo-HTML of the current page, when the environment has one.
    fn html(&self) -> Option<String> {
        None
    }

    /// Executes one primitive action. On error the state is unchanged.
    fn execute(&mut self, action: &Action) -> Result<String, EnvError>;
}

/// Full simulator state; hashable so planners can keep visited sets.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize)]
pub struct State {
    pub page: String,
    pub vars: BTreeMap<String, String>,
    /// Typed values keyed by (page, element id).
    pub fields: BTreeMap<(String, u32), String>,
    pub lists: BTreeMap<String, Vec<String>>,
    /// Payloads of terminal actions.
    pub messages: Vec<String>,
    pub ended: bool,
}

impl State {
    fn at(page: &str) -> State {
        State {
            page: page.to_string(),
            ..State::default()
        }
    }

    pub fn final_message(&self) -> Option<&str> {
        self.messages.last().map(String::as_str)
    }
}

/// One element as currently displayed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Element {
    pub id: u32,
    pub role: Role,
    pub label: String,
    pub value: Option<String>,
    pub options: Vec<String>,
    source: Source,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Source {
    Static,
    Item { list: usize, record: usize },
}

#[derive(Debug, Clone)]
pub struct Environment {
    site: Arc<Site>,
    state: State,
}

impl Environment {
    pub fn new(site: Arc<Site>) -> Environment {
        let state = State::at(&site.start_page);
        Environment { site, state }
    }

    pub fn site(&self) -> &Site {
        &self.site
    }

    pub fn state(&self) -> &State {
        &self.state
    }

    /// Replaces the state; used by planners to branch from a snapshot.
    pub fn set_state(&mut self, state: State) {
        self.state = state;
    }

    pub fn reset(&mut self, task: &TaskSpec) -> Result<String, EnvError> {
        if task.website != self.site.name {
            return Err(EnvError::UnknownTask(task.id.clone()));
        }
        let page = task.initial_page.as_deref().unwrap_or(&self.site.start_page);
        if self.site.page(page).is_none() {
            return Err(EnvError::UnknownTask(task.id.clone()));
        }
        self.state = State::at(page);
        Ok(self.observe())
    }

    fn page(&self) -> &Page {
        self.site.page(&self.state.page).expect("current page exists (site validated)")
    }

    fn field(&self, id: u32) -> Option<&String> {
        self.state.fields.get(&(self.state.page.clone(), id))
    }

    fn holds(&self, cond: &Condition) -> bool {
        match cond {
            Condition::FieldSet(id) => self.field(*id).is_some_and(|v| !v.is_empty()),
            Condition::FieldUnset(id) => self.field(*id).is_none_or(|v| v.is_empty()),
            Condition::VarSet(v) => self.state.vars.get(v).is_some_and(|v| !v.is_empty()),
            Condition::VarUnset(v) => self.state.vars.get(v).is_none_or(|v| v.is_empty()),
            Condition::All(inner) => inner.iter().all(|c| self.holds(c)),
        }
    }

    fn render(&self, template: &str, value: Option<&str>, record: Option<&Record>) -> String {
        render_template(template, &|inner: &str| self.resolve(inner, value, record))
    }

    fn resolve(&self, inner: &str, value: Option<&str>, record: Option<&Record>) -> Option<String> {
        if let Some(field) = inner.strip_prefix('.') {
            return record.map(|r| r.get(field).cloned().unwrap_or_default());
        }
        if inner == "$value" {
            return value.map(str::to_string);
        }
        if let Some(spec) = inner.strip_prefix('#') {
            let (id, default) = match spec.split_once('|') {
                Some((id, d)) => (id, d),
                None => (spec, ""),
            };
            let id: u32 = id.parse().ok()?;
            return Some(self.field(id).cloned().unwrap_or_else(|| default.to_string()));
        }
        is_var_name(inner).then(|| self.state.vars.get(inner).cloned().unwrap_or_default())
    }

    fn list_records(&self, list_idx: usize) -> Vec<&Record> {
        let spec = &self.page().lists[list_idx];
        let render = |s: &str| self.render(s, None, None);
        let mut hits = run_query(self.site.records(&spec.entity), &spec.filters, spec.sort.as_deref(), &render);
        hits.truncate(spec.limit);
        hits
    }

    /// Elements currently visible, static ones first.
    pub fn elements(&self) -> Vec<Element> {
        let page = self.page();
        let mut out = Vec::new();
        for e in &page.elements {
            if e.when.as_ref().is_some_and(|c| !self.holds(c)) {
                continue;
            }
            out.push(Element {
                id: e.id,
                role: e.role,
                label: self.render(&e.label, None, None),
                value: self.field(e.id).cloned(),
                options: e.options.clone(),
                source: Source::Static,
            });
        }
        for (li, spec) in page.lists.iter().enumerate() {
            if spec.when.as_ref().is_some_and(|c| !self.holds(c)) {
                continue;
            }
            let records = self.site.records(&spec.entity);
            for (k, rec) in self.list_records(li).into_iter().enumerate() {
                let record = records.iter().position(|r| std::ptr::eq(r, rec)).expect("record from site");
                out.push(Element {
                    id: spec.first_id + k as u32,
                    role: spec.role,
                    label: self.render(&spec.label, None, Some(rec)),
                    value: None,
                    options: Vec::new(),
                    source: Source::Item { list: li, record },
                });
            }
        }
        out
    }

    pub fn html_page(&self) -> String {
        let mut out = format!("<html page=\"{}\">\n", self.state.page);
        for e in self.elements() {
            let line = match e.role {
                Role::Link => format!("<a id=\"{}\">{}</a>", e.id, e.label),
                Role::Button => format!("<button id=\"{}\">{}</button>", e.id, e.label),
                Role::Textbox => format!(
                    "<input id=\"{}\" aria-label=\"{}\" value=\"{}\"/>",
                    e.id,
                    e.label,
                    e.value.as_deref().unwrap_or("")
                ),
                Role::Option => {
                    let opts: String = e.options.iter().map(|o| format!("<option>{o}</option>")).collect();
                    format!("<select id=\"{}\" aria-label=\"{}\">{}</select>", e.id, e.label, opts)
                }
                Role::Text => format!("<p id=\"{}\">{}</p>", e.id, e.label),
            };
            out.push_str(&line);
            out.push('\n');
        }
        out.push_str("</html>");
        out
    }

    fn element_arg(&self, action: &Action) -> Result<Element, EnvError> {
        let raw = action.element().unwrap_or_default();
        let id: u32 = raw.trim().parse().map_err(|_| EnvError::NoSuchElement(raw.to_string()))?;
        self.elements()
            .into_iter()
            .find(|e| e.id == id)
            .ok_or_else(|| EnvError::NoSuchElement(raw.to_string()))
    }

    fn step(&mut self, action: &Action) -> Result<(), EnvError> {
        if self.state.ended {
            return Err(EnvError::IllegalAction("the episode has already ended".into()));
        }
        let Some(kind) = action.primitive_kind() else {
            return Err(EnvError::IllegalAction(format!("`{}` is not a primitive action", action.name)));
        };
        let value = |i: usize| action.args.get(i).map(|a| a.as_str().to_string()).unwrap_or_default();
        match kind.semantic() {
            Primitive::SendMsgToUser => {
                self.state.messages.push(value(0));
                self.state.ended = true;
            }
            Primitive::Stop => {
                if let Some(arg) = action.args.first() {
                    self.state.messages.push(arg.as_str().to_string());
                }
                self.state.ended = true;
            }
            Primitive::Click => {
                let e = self.element_arg(action)?;
                match e.source {
                    Source::Item { list, record } => {
                        let spec = self.page().lists[list].clone();
                        if let Some(click) = spec.on_click {
                            let rec = self.site.records(&spec.entity)[record].clone();
                            bind_record(&mut self.state.vars, &click.bind, Some(&rec));
                            self.state.page = click.goto;
                        }
                    }
                    Source::Static => self.fire(e.id, TransitionAction::Click, None, None),
                }
            }
            Primitive::Hover => {
                self.element_arg(action)?;
            }
            Primitive::Fill => {
                let e = self.element_arg(action)?;
                if e.role != Role::Textbox {
                    return Err(EnvError::IllegalAction(format!("element {} is not a textbox", e.id)));
                }
                let v = value(1);
                self.state.fields.insert((self.state.page.clone(), e.id), v.clone());
                self.fire(e.id, TransitionAction::Fill, None, Some(&v));
            }
            Primitive::Clear => {
                let e = self.element_arg(action)?;
                if e.role != Role::Textbox {
                    return Err(EnvError::IllegalAction(format!("element {} is not a textbox", e.id)));
                }
                self.state.fields.remove(&(self.state.page.clone(), e.id));
            }
            Primitive::Press => {
                let e = self.element_arg(action)?;
                let key = value(1);
                self.fire(e.id, TransitionAction::Press, Some(&key), None);
            }
            Primitive::SelectOption => {
                let e = self.element_arg(action)?;
                let wanted = value(1);
                let chosen = e
                    .options
                    .iter()
                    .find(|o| o.eq_ignore_ascii_case(&wanted))
                    .cloned()
                    .ok_or_else(|| EnvError::IllegalAction(format!("element {} has no option `{wanted}`", e.id)))?;
                self.state.fields.insert((self.state.page.clone(), e.id), chosen.clone());
                self.fire(e.id, TransitionAction::Select, None, Some(&chosen));
            }
            Primitive::Type => unreachable!("type maps to fill"),
        }
        Ok(())
    }

    fn fire(&mut self, element: u32, action: TransitionAction, key: Option<&str>, value: Option<&str>) {
        let page = self.page();
        let Some(t) = page
            .transitions
            .iter()
            .find(|t| {
                t.element == element
                    && t.action == action
                    && match (&t.key, key) {
                        (Some(want), Some(got)) => want.eq_ignore_ascii_case(got),
                        (Some(_), None) => false,
                        (None, _) => true,
                    }
            })
            .cloned()
        else {
            return;
        };
        let mut goto = t.goto.clone();
        for effect in &t.effects {
            match effect {
                Effect::Set { var, value: tpl } => {
                    let v = self.render(tpl, value, None);
                    self.state.vars.insert(var.clone(), v);
                }
                Effect::Push { list, value: tpl } => {
                    let v = self.render(tpl, value, None);
                    self.state.lists.entry(list.clone()).or_default().push(v);
                }
                Effect::Lookup { query, else_goto } => {
                    let render = |s: &str| self.render(s, value, None);
                    let hit = run_query(self.site.records(&query.entity), &query.filters, query.sort.as_deref(), &render)
                        .first()
                        .map(|r| (*r).clone());
                    if hit.is_none() {
                        if let Some(target) = else_goto {
                            goto = Some(target.clone());
                        }
                    }
                    bind_record(&mut self.state.vars, &query.bind, hit.as_ref());
                }
            }
        }
        if let Some(target) = goto {
            self.state.page = target;
        }
    }
}

impl WebEnvironment for Environment {
    /// `Page: <name>` followed by one `[id] role 'label'` line per element.
    fn observe(&self) -> String {
        let mut out = format!("Page: {}", self.state.page);
        for e in self.elements() {
            out.push_str(&format!("\n[{}] {} '{}'", e.id, e.role, e.label));
            if let Some(v) = &e.value {
                out.push_str(&format!(" value='{v}'"));
            }
            if !e.options.is_empty() {
                out.push_str(&format!(" options='{}'", e.options.join(", ")));
            }
        }
        out
    }

    fn html(&self) -> Option<String> {
        Some(self.html_page())
    }

    fn execute(&mut self, action: &Action) -> Result<String, EnvError> {
        let before = self.state.clone();
        match self.step(action) {
            Ok(()) => Ok(self.observe()),
            Err(e) => {
                self.state = before;
                Err(e)
            }
        }
    }
}
