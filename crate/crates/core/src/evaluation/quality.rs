use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::action::{Action, Arg};
use crate::types::{Experience, Workflow};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct QualityReport {
    pub n_workflows: usize,
    /// Fraction of gold steps matched by at least one workflow step.
    pub coverage: f64,
    /// Bigrams of action names found in two or more workflows, over all
    /// distinct bigrams.
    pub function_overlap: f64,
    /// Fraction of predicted trajectories that use some workflow.
    pub utility_rate: f64,
    /// Workflow counts by the judge that approved their source experience:
    /// `lm`, `oracle` or `none`.
    pub by_judge: BTreeMap<String, usize>,
}

fn tokens(s: &str) -> Vec<String> {
    s.split_whitespace().map(str::to_lowercase).collect()
}

fn arg_matches(workflow_arg: &Arg, gold_arg: &Arg) -> bool {
    !workflow_arg.placeholders().is_empty() || tokens(workflow_arg.as_str()) == tokens(gold_arg.as_str())
}

/// Same action name, same argument count, and every workflow argument is a
/// placeholder or token-equal to the gold one.
pub fn step_covered(workflow_action: &Action, gold: &Action) -> bool {
    workflow_action.name.eq_ignore_ascii_case(&gold.name)
        && workflow_action.args.len() == gold.args.len()
        && workflow_action.args.iter().zip(&gold.args).all(|(w, g)| arg_matches(w, g))
}

/// Distinct adjacent pairs of action names.
pub fn action_bigrams(w: &Workflow) -> BTreeSet<(String, String)> {
    w.steps
        .windows(2)
        .map(|p| (p[0].action.name.to_lowercase(), p[1].action.name.to_lowercase()))
        .collect()
}

pub fn function_overlap(workflows: &[Workflow]) -> f64 {
    if workflows.len() < 2 {
        return 0.0;
    }
    let mut counts: BTreeMap<(String, String), usize> = BTreeMap::new();
    for w in workflows {
        for b in action_bigrams(w) {
            *counts.entry(b).or_insert(0) += 1;
        }
    }
    if counts.is_empty() {
        return 0.0;
    }
    let shared = counts.values().filter(|&&n| n >= 2).count();
    shared as f64 / counts.len() as f64
}

/// Whether a trajectory calls a non-primitive action or contains the full
/// action-name signature of a workflow as a contiguous run.
pub fn used_workflow(e: &Experience, workflows: &[Workflow]) -> bool {
    if e.steps.iter().any(|s| s.action.primitive_kind().is_none()) {
        return true;
    }
    let names: Vec<String> = e.steps.iter().map(|s| s.action.name.to_lowercase()).collect();
    workflows.iter().any(|w| {
        let sig: Vec<String> = w.signature().iter().map(|n| n.to_lowercase()).collect();
        !sig.is_empty() && names.windows(sig.len()).any(|win| win == sig.as_slice())
    })
}

pub fn quality_report(workflows: &[Workflow], gold: &[Experience], predicted: &[Experience]) -> QualityReport {
    if workflows.is_empty() {
        return QualityReport::default();
    }
    let gold_steps: Vec<&Action> = gold.iter().flat_map(|e| e.steps.iter().map(|s| &s.action)).collect();
    let covered = gold_steps
        .iter()
        .filter(|g| workflows.iter().flat_map(|w| &w.steps).any(|ws| step_covered(&ws.action, g)))
        .count();
    let used = predicted.iter().filter(|e| used_workflow(e, workflows)).count();
    let ratio = |n: usize, d: usize| if d == 0 { 0.0 } else { n as f64 / d as f64 };
    let mut by_judge = BTreeMap::new();
    for w in workflows {
        let key = w.judged_by.map_or("none", |j| j.as_str());
        *by_judge.entry(key.to_string()).or_insert(0) += 1;
    }
    QualityReport {
        n_workflows: workflows.len(),
        coverage: ratio(covered, gold_steps.len()),
        function_overlap: function_overlap(workflows),
        utility_rate: ratio(used, predicted.len()),
        by_judge,
    }
}
