//! Step and task metrics, cumulative success curves and workflow quality.

mod quality;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::action::Action;

pub use quality::{
    action_bigrams, function_overlap, quality_report, step_covered, used_workflow, QualityReport,
};

/// Gold element marker for terminal steps, which target no element.
pub const TERMINAL_ELEMENT: &str = "<terminal>";

/// A gold step: the acceptable element ids and the reference action.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldStep {
    pub elements: BTreeSet<String>,
    pub action: Action,
}

impl GoldStep {
    /// Gold set holding only the action's own element (or the terminal marker).
    pub fn from_action(action: &Action) -> GoldStep {
        let mut elements = BTreeSet::new();
        if action.is_terminal() {
            elements.insert(TERMINAL_ELEMENT.to_string());
        } else if let Some(e) = action.element() {
            elements.insert(e.to_string());
        }
        GoldStep {
            elements,
            action: action.clone(),
        }
    }
}

pub fn element_accuracy(pred: &Action, gold_elements: &BTreeSet<String>) -> bool {
    if pred.is_terminal() {
        return gold_elements.contains(TERMINAL_ELEMENT);
    }
    pred.element().is_some_and(|e| gold_elements.contains(e))
}

/// Lowercased action name followed by the whitespace tokens of the value
/// arguments; element ids are left out.
pub fn action_tokens(a: &Action) -> Vec<String> {
    let mut out = vec![a.name.to_lowercase()];
    for arg in a.value_args() {
        out.extend(arg.as_str().split_whitespace().map(str::to_lowercase));
    }
    out
}

fn multiset(tokens: &[String]) -> BTreeMap<&str, usize> {
    let mut m = BTreeMap::new();
    for t in tokens {
        *m.entry(t.as_str()).or_insert(0) += 1;
    }
    m
}

/// Token-level F1 over [`action_tokens`] multisets.
pub fn action_f1(pred: &Action, gold: &Action) -> f64 {
    let p = action_tokens(pred);
    let g = action_tokens(gold);
    let (pm, gm) = (multiset(&p), multiset(&g));
    let overlap: usize = pm.iter().map(|(t, n)| (*n).min(gm.get(t).copied().unwrap_or(0))).sum();
    if overlap == 0 {
        return 0.0;
    }
    let precision = overlap as f64 / p.len() as f64;
    let recall = overlap as f64 / g.len() as f64;
    2.0 * precision * recall / (precision + recall)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepScore {
    pub element_correct: bool,
    pub action_f1: f64,
    pub step_success: bool,
}

/// Right element and exactly the gold action tokens.
pub fn step_success(pred: &Action, gold: &GoldStep) -> bool {
    element_accuracy(pred, &gold.elements) && multiset(&action_tokens(pred)) == multiset(&action_tokens(&gold.action))
}

pub fn score_step(pred: &Action, gold: &GoldStep) -> StepScore {
    StepScore {
        element_correct: element_accuracy(pred, &gold.elements),
        action_f1: action_f1(pred, &gold.action),
        step_success: step_success(pred, gold),
    }
}

/// A task succeeds when it has steps and every one of them succeeds.
pub fn task_success(scores: &[StepScore]) -> bool {
    !scores.is_empty() && scores.iter().all(|s| s.step_success)
}

/// Running mean of binary outcomes.
pub fn cumulative_sr(outcomes: &[bool]) -> Vec<f64> {
    let mut hits = 0usize;
    outcomes
        .iter()
        .enumerate()
        .map(|(i, &ok)| {
            hits += usize::from(ok);
            hits as f64 / (i + 1) as f64
        })
        .collect()
}

pub fn cumulative_csv(series: &[f64]) -> String {
    let mut out = String::from("index,cum_sr\n");
    for (i, v) in series.iter().enumerate() {
        let _ = writeln!(out, "{i},{v:.6}");
    }
    out
}

/// Scores of one evaluated task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskScore {
    pub id: String,
    pub website: String,
    pub success: bool,
    pub n_steps: usize,
    /// Per-step scores; empty for live episodes, which are judged as a whole.
    #[serde(default)]
    pub steps: Vec<StepScore>,
}

impl TaskScore {
    pub fn stepwise(id: impl Into<String>, website: impl Into<String>, steps: Vec<StepScore>) -> TaskScore {
        TaskScore {
            id: id.into(),
            website: website.into(),
            success: task_success(&steps),
            n_steps: steps.len(),
            steps,
        }
    }

    pub fn episode(id: impl Into<String>, website: impl Into<String>, success: bool, n_steps: usize) -> TaskScore {
        TaskScore {
            id: id.into(),
            website: website.into(),
            success,
            n_steps,
            steps: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub n_tasks: usize,
    pub element_acc: f64,
    pub action_f1: f64,
    pub step_sr: f64,
    pub task_sr: f64,
    pub avg_steps: f64,
}

impl Metrics {
    /// Step metrics are averaged within each task first, then across tasks.
    pub fn from_scores<'a>(scores: impl IntoIterator<Item = &'a TaskScore>) -> Metrics {
        let scores: Vec<&TaskScore> = scores.into_iter().collect();
        let n = scores.len();
        if n == 0 {
            return Metrics::default();
        }
        let mean = |f: &dyn Fn(&TaskScore) -> f64| scores.iter().map(|s| f(s)).sum::<f64>() / n as f64;
        let step_mean = |s: &TaskScore, f: &dyn Fn(&StepScore) -> f64| {
            if s.steps.is_empty() {
                0.0
            } else {
                s.steps.iter().map(f).sum::<f64>() / s.steps.len() as f64
            }
        };
        Metrics {
            n_tasks: n,
            element_acc: mean(&|s| step_mean(s, &|x| f64::from(u8::from(x.element_correct)))),
            action_f1: mean(&|s| step_mean(s, &|x| x.action_f1)),
            step_sr: mean(&|s| step_mean(s, &|x| f64::from(u8::from(x.step_success)))),
            task_sr: mean(&|s| f64::from(u8::from(s.success))),
            avg_steps: mean(&|s| s.n_steps as f64),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub overall: Metrics,
    pub per_website: BTreeMap<String, Metrics>,
    /// Running success rate in evaluation order.
    pub cumulative_sr: Vec<f64>,
    pub tasks: Vec<TaskScore>,
    /// Per-website failures that did not stop the run.
    #[serde(default)]
    pub errors: Vec<String>,
}

impl EvalReport {
    pub fn from_scores(tasks: Vec<TaskScore>) -> EvalReport {
        let mut sites: BTreeMap<String, Vec<&TaskScore>> = BTreeMap::new();
        for t in &tasks {
            sites.entry(t.website.clone()).or_default().push(t);
        }
        let per_website = sites
            .into_iter()
            .map(|(site, ts)| (site, Metrics::from_scores(ts)))
            .collect();
        let outcomes: Vec<bool> = tasks.iter().map(|t| t.success).collect();
        EvalReport {
            overall: Metrics::from_scores(&tasks),
            per_website,
            cumulative_sr: cumulative_sr(&outcomes),
            tasks,
            errors: Vec::new(),
        }
    }

    pub fn summary(&self) -> String {
        let mut out = String::new();
        let line = |out: &mut String, name: &str, m: &Metrics| {
            let _ = writeln!(
                out,
                "{name:<16} n={:<4} SR={:.3} steps={:.2} elem={:.3} f1={:.3} stepSR={:.3}",
                m.n_tasks, m.task_sr, m.avg_steps, m.element_acc, m.action_f1, m.step_sr
            );
        };
        line(&mut out, "overall", &self.overall);
        for (site, m) in &self.per_website {
            line(&mut out, site, m);
        }
        for e in &self.errors {
            let _ = writeln!(out, "error: {e}");
        }
        out
    }

    /// One row per task.
    pub fn scores_csv(&self) -> String {
        let mut out = String::from("id,website,success,n_steps,element_acc,action_f1,step_sr\n");
        for t in &self.tasks {
            let m = Metrics::from_scores([t]);
            let _ = writeln!(
                out,
                "{},{},{},{},{:.6},{:.6},{:.6}",
                t.id,
                t.website,
                u8::from(t.success),
                t.n_steps,
                m.element_acc,
                m.action_f1,
                m.step_sr
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::parse_action;

    fn a(s: &str) -> Action {
        parse_action(s).unwrap()
    }

    #[test]
    fn f1_examples() {
        assert_eq!(action_f1(&a("type('5', 'cat food')"), &a("type('5', 'cat food')")), 1.0);
        assert_eq!(action_f1(&a("click('5')"), &a("type('5', 'cat food')")), 0.0);
        let f = action_f1(&a("type('5', 'cat food')"), &a("type('5', 'dry cat food')"));
        assert!((f - 6.0 / 7.0).abs() < 1e-12);
    }

    #[test]
    fn element_sets_and_terminals() {
        let gold: BTreeSet<String> = ["12", "47"].map(String::from).into();
        assert!(element_accuracy(&a("click('47')"), &gold));
        assert!(!element_accuracy(&a("click('13')"), &gold));
        assert!(!element_accuracy(&a("stop()"), &gold));
        assert!(step_success(&a("stop()"), &GoldStep::from_action(&a("stop()"))));
    }

    #[test]
    fn curve() {
        assert_eq!(cumulative_sr(&[]), Vec::<f64>::new());
        assert_eq!(cumulative_sr(&[false, false]), vec![0.0, 0.0]);
        assert_eq!(cumulative_csv(&[1.0, 0.5]), "index,cum_sr\n0,1.000000\n1,0.500000\n");
    }
}
