use std::collections::BTreeMap;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::env::State;
use super::site::{bind_record, render_template, run_query, var_resolver, Query, Site};

/// Ground-truth success test for a task.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OracleCheck {
    /// The final message contains `text` (case-insensitive).
    MessageContains { text: String },
    /// The final message equals `text` (trimmed, case-insensitive).
    MessageEquals { text: String },
    /// A state variable has this exact value.
    VarEquals { var: String, value: String },
    /// A state list holds this exact value.
    ListContains { list: String, value: String },
}

impl OracleCheck {
    pub fn holds(&self, message: Option<&str>, state: &State) -> bool {
        match self {
            OracleCheck::MessageContains { text } => {
                message.is_some_and(|m| m.to_lowercase().contains(&text.to_lowercase()))
            }
            OracleCheck::MessageEquals { text } => message.is_some_and(|m| m.trim().eq_ignore_ascii_case(text.trim())),
            OracleCheck::VarEquals { var, value } => state.vars.get(var) == Some(value),
            OracleCheck::ListContains { list, value } => state.lists.get(list).is_some_and(|l| l.contains(value)),
        }
    }

    pub fn needs_message(&self) -> bool {
        matches!(self, OracleCheck::MessageContains { .. } | OracleCheck::MessageEquals { .. })
    }

    fn render(&self, vars: &BTreeMap<String, String>) -> OracleCheck {
        let r = var_resolver(vars);
        let t = |s: &str| render_template(s, &r);
        match self {
            OracleCheck::MessageContains { text } => OracleCheck::MessageContains { text: t(text) },
            OracleCheck::MessageEquals { text } => OracleCheck::MessageEquals { text: t(text) },
            OracleCheck::VarEquals { var, value } => OracleCheck::VarEquals {
                var: var.clone(),
                value: t(value),
            },
            OracleCheck::ListContains { list, value } => OracleCheck::ListContains {
                list: list.clone(),
                value: t(value),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub id: String,
    pub website: String,
    pub template_id: String,
    pub instruction: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_page: Option<String>,
    pub oracle: OracleCheck,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub slots: BTreeMap<String, String>,
}

/// Where a slot's candidate values come from: distinct values of an entity
/// field, or a fixed list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Slot {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entity: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub values: Vec<String>,
}

/// A parameterized task. Every slot combination whose lookups all find a
/// record becomes a candidate instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskTemplate {
    pub id: String,
    pub instruction: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start_page: Option<String>,
    pub slots: Vec<Slot>,
    #[serde(default)]
    pub lookups: Vec<Query>,
    pub oracle: OracleCheck,
}

impl TaskTemplate {
    pub(crate) fn validate(&self) -> Result<(), String> {
        for slot in &self.slots {
            let from_entity = slot.entity.is_some() && slot.field.is_some();
            if from_entity == !slot.values.is_empty() {
                return Err(format!(
                    "template `{}`: slot `{}` needs either entity+field or values",
                    self.id, slot.name
                ));
            }
            if !self.instruction.contains(&format!("{{{}}}", slot.name)) {
                return Err(format!("template `{}`: slot `{}` unused in instruction", self.id, slot.name));
            }
        }
        Ok(())
    }

    fn slot_values(&self, site: &Site, slot: &Slot) -> Vec<String> {
        match (&slot.entity, &slot.field) {
            (Some(entity), Some(field)) => {
                let mut out: Vec<String> = Vec::new();
                for r in site.records(entity) {
                    if let Some(v) = r.get(field) {
                        if !out.contains(v) {
                            out.push(v.clone());
                        }
                    }
                }
                out
            }
            _ => slot.values.clone(),
        }
    }

    /// All valid instances in enumeration order.
    pub fn instances(&self, site: &Site) -> Vec<TaskSpec> {
        let mut combos: Vec<BTreeMap<String, String>> = vec![BTreeMap::new()];
        for slot in &self.slots {
            let values = self.slot_values(site, slot);
            combos = combos
                .into_iter()
                .flat_map(|c| {
                    values.iter().map(move |v| {
                        let mut c = c.clone();
                        c.insert(slot.name.clone(), v.clone());
                        c
                    })
                })
                .collect();
        }
        let mut out = Vec::new();
        'combo: for slots in combos {
            let mut vars = slots.clone();
            for q in &self.lookups {
                let render = |s: &str| render_template(s, &var_resolver(&vars));
                let hit = run_query(site.records(&q.entity), &q.filters, q.sort.as_deref(), &render)
                    .first()
                    .map(|r| (*r).clone());
                match hit {
                    Some(rec) => bind_record(&mut vars, &q.bind, Some(&rec)),
                    None => continue 'combo,
                }
            }
            let instruction = render_template(&self.instruction, &var_resolver(&slots));
            out.push(TaskSpec {
                id: String::new(),
                website: site.name.clone(),
                template_id: self.id.clone(),
                instruction,
                initial_page: self.start_page.clone(),
                oracle: self.oracle.render(&vars),
                slots,
            });
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SuiteError {
    #[error("asked for {wanted} templates but only {available} exist")]
    TooManyTemplates { wanted: usize, available: usize },
    #[error("template `{template}` has only {available} valid instance(s), {wanted} requested")]
    NotEnoughInstances {
        template: String,
        available: usize,
        wanted: usize,
    },
}

/// Instantiates the first `k` templates of the catalogue (`sites` in order),
/// `n` tasks each.
///
/// Tasks are emitted round-robin: one task of every template per round, with
/// the template order shuffled by `seed`. Task ids are `<template>-<round>`.
pub fn generate_suite_from(sites: &[Site], seed: u64, k: usize, n: usize) -> Result<Vec<TaskSpec>, SuiteError> {
    let catalogue: Vec<(&Site, &TaskTemplate)> =
        sites.iter().flat_map(|s| s.templates.iter().map(move |t| (s, t))).collect();
    if k > catalogue.len() {
        return Err(SuiteError::TooManyTemplates {
            wanted: k,
            available: catalogue.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut per_template = Vec::with_capacity(k);
    for (site, template) in &catalogue[..k] {
        let mut instances = template.instances(site);
        if instances.len() < n {
            return Err(SuiteError::NotEnoughInstances {
                template: template.id.clone(),
                available: instances.len(),
                wanted: n,
            });
        }
        instances.shuffle(&mut rng);
        instances.truncate(n);
        per_template.push(instances);
    }
    let mut order: Vec<usize> = (0..k).collect();
    order.shuffle(&mut rng);

    let mut suite = Vec::with_capacity(k * n);
    for round in 0..n {
        for &t in &order {
            let mut task = per_template[t][round].clone();
            task.id = format!("{}-{round}", task.template_id);
            suite.push(task);
        }
    }
    Ok(suite)
}

/// One task per template, chosen under `seed`; templates keep their order of
/// first appearance.
pub fn cross_template_subset(tasks: &[TaskSpec], seed: u64) -> Vec<TaskSpec> {
    let mut groups: Vec<(&str, Vec<&TaskSpec>)> = Vec::new();
    for t in tasks {
        match groups.iter_mut().find(|(id, _)| *id == t.template_id) {
            Some((_, members)) => members.push(t),
            None => groups.push((&t.template_id, vec![t])),
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    groups
        .into_iter()
        .map(|(_, members)| (*members.choose(&mut rng).expect("groups are non-empty")).clone())
        .collect()
}

pub fn write_suite(tasks: &[TaskSpec]) -> String {
    tasks
        .iter()
        .map(|t| serde_json::to_string(t).expect("task serializes") + "\n")
        .collect()
}

pub fn read_suite(text: &str) -> Result<Vec<TaskSpec>, (usize, serde_json::Error)> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| (i + 1, e)))
        .collect()
}
