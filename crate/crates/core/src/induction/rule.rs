use std::collections::HashMap;
use std::hash::Hash;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{single_website, InductionConfig, InductionError};
use crate::action::Primitive;
use crate::types::{Experience, Workflow, WorkflowFormat, WorkflowSource, WorkflowStep};

/// Ordered action names of a trajectory.
pub fn action_signature(e: &Experience) -> Vec<String> {
    e.actions().map(|a| a.name.clone()).collect()
}

/// Keeps up to `n` experiences per action signature.
///
/// Groups are emitted in order of first appearance and members keep their
/// input order. Without a seed the `n` lowest ids are kept; with a seed the
/// members are sampled uniformly.
pub fn dedup_by_signature(experiences: &[Experience], n: usize, seed: Option<u64>) -> Vec<Experience> {
    select(experiences, |e| Some(action_signature(e)), n, seed)
}

/// Same selection as [`dedup_by_signature`], keyed on `template_id`.
/// Experiences without a template id pass through.
pub fn dedup_by_template(experiences: &[Experience], n: usize, seed: Option<u64>) -> Vec<Experience> {
    select(experiences, |e| e.template_id.clone(), n, seed)
}

fn select<K: Hash + Eq>(
    experiences: &[Experience],
    key: impl Fn(&Experience) -> Option<K>,
    n: usize,
    seed: Option<u64>,
) -> Vec<Experience> {
    let n = n.max(1);
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut index: HashMap<K, usize> = HashMap::new();
    for (i, e) in experiences.iter().enumerate() {
        match key(e) {
            Some(k) => match index.get(&k) {
                Some(&g) => groups[g].push(i),
                None => {
                    index.insert(k, groups.len());
                    groups.push(vec![i]);
                }
            },
            None => groups.push(vec![i]),
        }
    }

    let mut rng = seed.map(ChaCha8Rng::seed_from_u64);
    let mut out = Vec::with_capacity(experiences.len());
    for members in groups {
        let mut keep: Vec<usize> = if members.len() <= n {
            members
        } else if let Some(rng) = rng.as_mut() {
            sample(rng, members.len(), n).into_iter().map(|j| members[j]).collect()
        } else {
            let mut by_id = members;
            by_id.sort_by(|&a, &b| experiences[a].id.cmp(&experiences[b].id).then(a.cmp(&b)));
            by_id.truncate(n);
            by_id
        };
        keep.sort_unstable();
        out.extend(keep.into_iter().map(|i| experiences[i].clone()));
    }
    out
}

/// Drops click/type/fill steps whose first argument is not a quoted integer.
pub fn filter_invalid_steps(e: &Experience) -> Experience {
    let mut out = e.clone();
    out.steps.retain(|s| {
        let targets_id = matches!(
            s.action.primitive_kind().map(Primitive::semantic),
            Some(Primitive::Click | Primitive::Fill)
        );
        !targets_id || s.action.args.first().is_some_and(|a| a.is_quoted_integer())
    });
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DropReason {
    DuplicateTemplate,
    DuplicateSignature,
    TooFewSteps { remaining: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dropped {
    pub experience_id: String,
    pub reason: DropReason,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RuleInduction {
    pub workflows: Vec<Workflow>,
    pub dropped: Vec<Dropped>,
}

/// Template dedup, signature dedup, invalid-step filtering, then conversion of
/// every survivor with at least two steps into a workflow.
pub fn induce_rule(experiences: &[Experience], cfg: &InductionConfig) -> Result<RuleInduction, InductionError> {
    single_website(experiences)?;
    let mut report = RuleInduction::default();
    let mut record = |before: &[Experience], after: &[Experience], reason: DropReason| {
        for e in before {
            if !after.iter().any(|k| k.id == e.id) {
                report.dropped.push(Dropped {
                    experience_id: e.id.clone(),
                    reason: reason.clone(),
                });
            }
        }
    };

    let by_template = dedup_by_template(experiences, cfg.dedup_n, cfg.seed);
    record(experiences, &by_template, DropReason::DuplicateTemplate);
    let by_signature = dedup_by_signature(&by_template, cfg.dedup_n, cfg.seed);
    record(&by_template, &by_signature, DropReason::DuplicateSignature);

    for e in &by_signature {
        let filtered = filter_invalid_steps(e);
        if filtered.steps.len() < 2 {
            report.dropped.push(Dropped {
                experience_id: e.id.clone(),
                reason: DropReason::TooFewSteps {
                    remaining: filtered.steps.len(),
                },
            });
            continue;
        }
        report.workflows.push(experience_to_workflow(&filtered));
    }
    Ok(report)
}

fn experience_to_workflow(e: &Experience) -> Workflow {
    Workflow {
        id: format!("rule-{}", e.id),
        website: e.website.clone(),
        description: e.instruction.clone(),
        steps: e
            .steps
            .iter()
            .map(|s| WorkflowStep {
                state_desc: s.state_desc.clone(),
                reasoning: s.reasoning.clone(),
                action: s.action.clone(),
                verbalized: None,
            })
            .collect(),
        source: WorkflowSource::Rule,
        format: WorkflowFormat::Code,
        judged_by: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::parse_action;
    use crate::types::Step;

    fn exp(id: &str, actions: &[&str]) -> Experience {
        let mut e = Experience::new(id, "shopping", format!("task {id}"));
        e.steps = actions.iter().map(|a| Step::new("", parse_action(a).unwrap())).collect();
        e
    }

    #[test]
    fn signature_of_noisy_trajectory() {
        let e = exp("a", &["CLICK('12')", "CLICK('30')", "TYPE('44', \"cat\")"]);
        assert_eq!(action_signature(&e), ["click", "click", "type"]);
        assert!(action_signature(&exp("b", &[])).is_empty());
    }

    #[test]
    fn login_signature() {
        let e = exp(
            "login",
            &["click('3')", "type('3', 'alice')", "click('4')", "type('4', 'pw')", "click('5')"],
        );
        assert_eq!(action_signature(&e), ["click", "type", "click", "type", "click"]);
    }

    #[test]
    fn identical_signatures_keep_lowest_id() {
        let set = [exp("c", &["click('1')"]), exp("a", &["click('2')"]), exp("b", &["click('3')"])];
        let out = dedup_by_signature(&set, 1, None);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].id, "a");
    }

    #[test]
    fn distinct_signatures_unchanged() {
        let set = [exp("b", &["click('1')"]), exp("a", &["hover('2')"])];
        assert_eq!(dedup_by_signature(&set, 1, None), set.to_vec());
        assert_eq!(dedup_by_signature(&set, 1, Some(7)), set.to_vec());
    }

    #[test]
    fn template_groups_and_passthrough() {
        let mut set: Vec<Experience> = (0..4).map(|i| exp(&format!("e{i}"), &["click('1')"])).collect();
        for (i, e) in set.iter_mut().enumerate() {
            e.template_id = Some(format!("t{}", i % 2));
        }
        let out = dedup_by_template(&set, 1, None);
        assert_eq!(out.iter().map(|e| e.id.as_str()).collect::<Vec<_>>(), ["e0", "e1"]);
        let all = dedup_by_template(&set, 5, None);
        assert_eq!(all.iter().map(|e| e.id.as_str()).collect::<Vec<_>>(), ["e0", "e2", "e1", "e3"]);
        for e in set.iter_mut() {
            e.template_id = None;
        }
        assert_eq!(dedup_by_template(&set, 1, None), set);
    }

    #[test]
    fn filter_noisy_example() {
        let e = exp(
            "x",
            &["CLICK(12)", "CLICK('12')", "CLICK('30')", "TYPE(44, \"cat\")", "TYPE('44', \"cat\")"],
        );
        let kept: Vec<String> = filter_invalid_steps(&e).actions().map(|a| a.render()).collect();
        assert_eq!(kept, ["click('12')", "click('30')", "type('44', 'cat')"]);
    }

    #[test]
    fn filter_leaves_other_actions() {
        let e = exp("x", &["hover('menu')", "press('a', 'Enter')"]);
        assert_eq!(filter_invalid_steps(&e), e);
        let e = exp("y", &["click(1)", "click(2)"]);
        assert!(filter_invalid_steps(&e).steps.is_empty());
    }

    #[test]
    fn rule_pipeline_reports_drops() {
        let set = [
            exp("a", &["CLICK(12)", "CLICK('12')", "CLICK('30')", "TYPE(44, \"cat\")", "TYPE('44', \"cat\")"]),
            exp("b", &["CLICK(1)", "CLICK('1')", "CLICK('3')", "TYPE(4, \"dog\")", "TYPE('4', \"dog\")"]),
            exp("c", &["click(9)", "hover('9')"]),
        ];
        let out = induce_rule(&set, &InductionConfig::rule()).unwrap();
        assert_eq!(out.workflows.len(), 1);
        let w = &out.workflows[0];
        assert_eq!(w.id, "rule-a");
        assert_eq!(w.source, WorkflowSource::Rule);
        assert_eq!(w.signature(), ["click", "click", "type"]);
        assert_eq!(
            out.dropped,
            vec![
                Dropped {
                    experience_id: "b".into(),
                    reason: DropReason::DuplicateSignature
                },
                Dropped {
                    experience_id: "c".into(),
                    reason: DropReason::TooFewSteps { remaining: 1 }
                },
            ]
        );
        assert!(induce_rule(&[], &InductionConfig::rule()).unwrap().workflows.is_empty());
    }

    #[test]
    fn mixed_websites_rejected() {
        let mut b = exp("b", &["click('1')"]);
        b.website = "gitlab".into();
        assert!(matches!(
            induce_rule(&[exp("a", &["click('1')"]), b], &InductionConfig::rule()),
            Err(InductionError::MixedWebsites(_))
        ));
    }
}
