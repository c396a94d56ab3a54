//! Declarative site definitions.
//!
//! A site is a set of pages over a small entity database. Pages hold static
//! elements, generated list elements (one per matching entity record) and
//! transitions keyed by element and action. Labels and values are templates:
//!
//! - `{var}`: a state variable (`place.name`, `query`, ...);
//! - `{#145}` / `{#145|default}`: the value typed into element 145 on the
//!   current page;
//! - `{$value}`: the value carried by the triggering action;
//! - `{.field}`: a field of the record behind a list element.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::task::TaskTemplate;

pub type Record = BTreeMap<String, String>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Site {
    pub name: String,
    pub start_page: String,
    #[serde(default)]
    pub entities: BTreeMap<String, Vec<Record>>,
    pub pages: Vec<Page>,
    #[serde(default)]
    pub templates: Vec<TaskTemplate>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Page {
    pub name: String,
    #[serde(default)]
    pub elements: Vec<ElementSpec>,
    #[serde(default)]
    pub lists: Vec<ListSpec>,
    #[serde(default)]
    pub transitions: Vec<Transition>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Link,
    Button,
    Textbox,
    Option,
    Text,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Link => "link",
            Role::Button => "button",
            Role::Textbox => "textbox",
            Role::Option => "option",
            Role::Text => "text",
        }
    }

    pub fn clickable(self) -> bool {
        matches!(self, Role::Link | Role::Button)
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElementSpec {
    pub id: u32,
    pub role: Role,
    pub label: String,
    /// Choices for `option` elements.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub options: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub when: Option<Condition>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    FieldSet(u32),
    FieldUnset(u32),
    VarSet(String),
    VarUnset(String),
    /// Every inner condition holds.
    All(Vec<Condition>),
}

/// Elements generated from an entity query, numbered from `first_id`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ListSpec {
    pub first_id: u32,
    pub role: Role,
    pub entity: String,
    /// Template over the record (`{.field}`) and state.
    pub label: String,
    #[serde(default)]
    pub filters: Vec<Filter>,
    /// Template yielding `field` (ascending), `-field` (descending) or nothing.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sort: Option<String>,
    #[serde(default = "default_limit")]
    pub limit: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub when: Option<Condition>,
    /// Clicking an item binds its record under `bind.` and moves to `goto`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub on_click: Option<ItemClick>,
}

fn default_limit() -> usize {
    10
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ItemClick {
    pub bind: String,
    pub goto: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterOp {
    Equals,
    NotEquals,
    Contains,
}

/// Matches when any of `fields` compares true against the rendered `value`
/// (case-insensitive).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Filter {
    pub fields: Vec<String>,
    pub op: FilterOp,
    pub value: String,
}

impl Filter {
    pub fn matches(&self, record: &Record, value: &str) -> bool {
        let value = value.to_lowercase();
        let any = |f: &dyn Fn(&str) -> bool| {
            self.fields
                .iter()
                .any(|field| record.get(field).is_some_and(|v| f(&v.to_lowercase())))
        };
        match self.op {
            FilterOp::Equals => any(&|v| v == value),
            FilterOp::Contains => any(&|v| v.contains(&value)),
            FilterOp::NotEquals => !any(&|v| v == value),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransitionAction {
    Click,
    Fill,
    Press,
    Select,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transition {
    pub element: u32,
    pub action: TransitionAction,
    /// For `press`: the key that triggers this transition.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub key: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub goto: Option<String>,
    #[serde(default)]
    pub effects: Vec<Effect>,
}

/// An entity query: the first record (after filtering and sorting) is bound
/// as `bind.field` variables.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Query {
    pub entity: String,
    pub bind: String,
    #[serde(default)]
    pub filters: Vec<Filter>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sort: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Effect {
    Set {
        var: String,
        value: String,
    },
    Push {
        list: String,
        value: String,
    },
    /// Runs a query; on no match the bound variables are cleared and the
    /// page moves to `else_goto` when given.
    Lookup {
        #[serde(flatten)]
        query: Query,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        else_goto: Option<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("site `{site}`: {msg}")]
pub struct SiteError {
    pub site: String,
    pub msg: String,
}

impl Site {
    pub fn from_json(text: &str) -> Result<Site, SiteError> {
        let site: Site = serde_json::from_str(text).map_err(|e| SiteError {
            site: "?".into(),
            msg: e.to_string(),
        })?;
        site.validate()?;
        Ok(site)
    }

    pub fn page(&self, name: &str) -> Option<&Page> {
        self.pages.iter().find(|p| p.name == name)
    }

    pub fn template(&self, id: &str) -> Option<&TaskTemplate> {
        self.templates.iter().find(|t| t.id == id)
    }

    pub fn records(&self, entity: &str) -> &[Record] {
        self.entities.get(entity).map(Vec::as_slice).unwrap_or_default()
    }

    pub fn validate(&self) -> Result<(), SiteError> {
        let err = |msg: String| SiteError {
            site: self.name.clone(),
            msg,
        };
        let names: BTreeSet<&str> = self.pages.iter().map(|p| p.name.as_str()).collect();
        if names.len() != self.pages.len() {
            return Err(err("duplicate page names".into()));
        }
        if !names.contains(self.start_page.as_str()) {
            return Err(err(format!("start page `{}` does not exist", self.start_page)));
        }
        let check_page = |target: &str| {
            if names.contains(target) {
                Ok(())
            } else {
                Err(err(format!("unknown page `{target}`")))
            }
        };
        let check_entity = |entity: &str| {
            if self.entities.contains_key(entity) {
                Ok(())
            } else {
                Err(err(format!("unknown entity `{entity}`")))
            }
        };
        for page in &self.pages {
            let mut ids = BTreeSet::new();
            for e in &page.elements {
                if !ids.insert(e.id) {
                    return Err(err(format!("page `{}`: duplicate element id {}", page.name, e.id)));
                }
            }
            for list in &page.lists {
                check_entity(&list.entity)?;
                for id in list.first_id..list.first_id + list.limit as u32 {
                    if !ids.insert(id) {
                        return Err(err(format!("page `{}`: list id {id} collides", page.name)));
                    }
                }
                if let Some(click) = &list.on_click {
                    check_page(&click.goto)?;
                }
            }
            for t in &page.transitions {
                if !page.elements.iter().any(|e| e.id == t.element) {
                    return Err(err(format!("page `{}`: transition on unknown element {}", page.name, t.element)));
                }
                if let Some(goto) = &t.goto {
                    check_page(goto)?;
                }
                for effect in &t.effects {
                    if let Effect::Lookup { query, else_goto } = effect {
                        check_entity(&query.entity)?;
                        if let Some(target) = else_goto {
                            check_page(target)?;
                        }
                    }
                }
            }
        }
        for t in &self.templates {
            if let Some(start) = &t.start_page {
                check_page(start)?;
            }
            for q in &t.lookups {
                check_entity(&q.entity)?;
            }
            t.validate().map_err(err)?;
        }
        Ok(())
    }
}

/// Expands `{...}` groups through `resolve`; unresolved groups stay literal.
pub fn render_template(template: &str, resolve: &dyn Fn(&str) -> Option<String>) -> String {
    let mut out = String::with_capacity(template.len());
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let after = &rest[open + 1..];
        match after.find('}') {
            Some(close) => {
                let inner = &after[..close];
                match resolve(inner) {
                    Some(v) => out.push_str(&v),
                    None => {
                        out.push('{');
                        out.push_str(inner);
                        out.push('}');
                    }
                }
                rest = &after[close + 1..];
            }
            None => {
                out.push_str(&rest[open..]);
                rest = "";
            }
        }
    }
    out.push_str(rest);
    out
}

pub(crate) fn is_var_name(s: &str) -> bool {
    let mut chars = s.chars();
    chars.next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.')
}

/// Resolves plain `{var}` groups against a variable map.
pub(crate) fn var_resolver(vars: &BTreeMap<String, String>) -> impl Fn(&str) -> Option<String> + '_ {
    move |inner: &str| is_var_name(inner).then(|| vars.get(inner).cloned().unwrap_or_default())
}

/// Filters and sorts records; `render` expands filter values and sort keys.
pub(crate) fn run_query<'a>(
    records: &'a [Record],
    filters: &[Filter],
    sort: Option<&str>,
    render: &dyn Fn(&str) -> String,
) -> Vec<&'a Record> {
    let values: Vec<String> = filters.iter().map(|f| render(&f.value)).collect();
    let mut hits: Vec<&Record> = records
        .iter()
        .filter(|r| filters.iter().zip(&values).all(|(f, v)| f.matches(r, v)))
        .collect();
    if let Some(sort) = sort.map(render).filter(|s| !s.is_empty()) {
        let (field, descending) = match sort.strip_prefix('-') {
            Some(f) => (f.to_string(), true),
            None => (sort.clone(), false),
        };
        hits.sort_by(|a, b| {
            let (x, y) = (a.get(&field), b.get(&field));
            let ord = match (x.and_then(|v| v.parse::<f64>().ok()), y.and_then(|v| v.parse::<f64>().ok())) {
                (Some(p), Some(q)) => p.total_cmp(&q),
                _ => x.cmp(&y),
            };
            if descending {
                ord.reverse()
            } else {
                ord
            }
        });
    }
    hits
}

pub(crate) fn bind_record(vars: &mut BTreeMap<String, String>, bind: &str, record: Option<&Record>) {
    let prefix = format!("{bind}.");
    vars.retain(|k, _| !k.starts_with(&prefix));
    if let Some(record) = record {
        for (field, value) in record {
            vars.insert(format!("{prefix}{field}"), value.clone());
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn template_groups() {
        let vars = BTreeMap::from([("place.name".to_string(), "CMU".to_string())]);
        let r = var_resolver(&vars);
        assert_eq!(render_template("At {place.name}{missing}!", &r), "At CMU!");
        assert_eq!(render_template("{not a var} {", &r), "{not a var} {");
    }

    #[test]
    fn query_filters_and_sorts() {
        let rec = |n: &str, p: &str| Record::from([("name".into(), n.into()), ("price".into(), p.into())]);
        let records = [rec("Mug", "12"), rec("Big mug", "9.5"), rec("Lamp", "30")];
        let f = [Filter {
            fields: vec!["name".into()],
            op: FilterOp::Contains,
            value: "MUG".into(),
        }];
        let hits = run_query(&records, &f, Some("price"), &|s| s.to_string());
        assert_eq!(hits.iter().map(|r| r["name"].as_str()).collect::<Vec<_>>(), ["Big mug", "Mug"]);
        let all = run_query(&records, &[], Some("-price"), &|s| s.to_string());
        assert_eq!(all[0]["name"], "Lamp");
    }
}
