//! Seeded fixture generators shared by the integration tests.
#![allow(dead_code)]

use awm::action::{Action, Arg, Primitive};
use awm::types::{Experience, JudgeKind, Step, Workflow, WorkflowFormat, WorkflowSource, WorkflowStep};
use rand::seq::IndexedRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

const WORDS: &[&str] = &[
    "cat", "food", "search", "the", "forum", "click", "page", "it's", "zip", "code", "42", "open", "menu", "price",
    "box", "red", "new", "post", "héllo",
];
/// Extra tokens for argument values only: quoting and escaping edge cases.
const VALUE_WORDS: &[&str] = &["a\\b", "x,y", "(note)", "say \"hi\"", "it's"];
const NAMES: &[&str] = &["place", "product", "query", "forum", "title", "qty", "item_name", "user"];

pub fn sentence(r: &mut impl RngCore) -> String {
    let n = r.random_range(2..6);
    let words: Vec<&str> = (0..n).map(|_| *WORDS.choose(r).unwrap()).collect();
    format!("{}.", words.join(" "))
}

fn value(r: &mut impl RngCore, allow_placeholder: bool) -> String {
    if allow_placeholder && r.random_bool(0.4) {
        return format!("{{{}}}", NAMES.choose(r).unwrap());
    }
    let n = r.random_range(1..4);
    let words: Vec<&str> = (0..n)
        .map(|_| if r.random_bool(0.2) { *VALUE_WORDS.choose(r).unwrap() } else { *WORDS.choose(r).unwrap() })
        .collect();
    words.join(" ")
}

fn element(r: &mut impl RngCore, allow_placeholder: bool) -> String {
    if allow_placeholder && r.random_bool(0.3) {
        format!("{{{}_id}}", NAMES.choose(r).unwrap())
    } else {
        r.random_range(1..900u32).to_string()
    }
}

/// A random non-terminal primitive action with quoted arguments.
pub fn action(r: &mut impl RngCore, placeholders: bool) -> Action {
    let kinds = [
        Primitive::Click,
        Primitive::Fill,
        Primitive::Type,
        Primitive::Hover,
        Primitive::Press,
        Primitive::SelectOption,
        Primitive::Clear,
    ];
    let p = *kinds.choose(r).unwrap();
    let el = element(r, placeholders);
    let args = match p.arity().1 {
        1 => vec![el],
        _ => vec![el, value(r, placeholders)],
    };
    Action::new(p.as_str(), args.into_iter().map(Arg::quoted).collect())
}

pub fn terminal(r: &mut impl RngCore, placeholders: bool) -> Action {
    if r.random_bool(0.5) {
        Action::stop()
    } else {
        Action::new("send_msg_to_user", vec![Arg::quoted(value(r, placeholders))])
    }
}

pub fn workflow(r: &mut impl RngCore, k: usize) -> Workflow {
    let n = r.random_range(2..7);
    let mut steps = Vec::with_capacity(n);
    for i in 0..n {
        let a = if i + 1 == n && r.random_bool(0.5) { terminal(r, true) } else { action(r, true) };
        let mut step = WorkflowStep::new(a);
        match r.random_range(0..4) {
            0 => {}
            1 => step.reasoning = Some(sentence(r)),
            2 => step.state_desc = Some(sentence(r)),
            _ => {
                step.state_desc = Some(sentence(r));
                step.reasoning = Some(sentence(r));
            }
        }
        steps.push(step);
    }
    let format = if r.random_bool(0.25) { WorkflowFormat::Text } else { WorkflowFormat::Code };
    if format == WorkflowFormat::Text {
        for s in &mut steps {
            s.verbalized = Some(sentence(r));
        }
    }
    let sources = [
        WorkflowSource::Rule,
        WorkflowSource::Lm,
        WorkflowSource::Human,
        WorkflowSource::Offline,
        WorkflowSource::Online,
    ];
    Workflow {
        id: format!("wf-{k}"),
        website: ["map", "shop", "forum"].choose(r).unwrap().to_string(),
        description: sentence(r),
        steps,
        source: *sources.choose(r).unwrap(),
        format,
        judged_by: [None, Some(JudgeKind::Lm), Some(JudgeKind::Oracle)].choose(r).unwrap().clone(),
    }
}

pub fn experience(r: &mut impl RngCore, k: usize) -> Experience {
    let mut e = Experience::new(format!("e{k}"), *["map", "shop"].choose(r).unwrap(), sentence(r));
    if r.random_bool(0.5) {
        e.template_id = Some(format!("t{}", r.random_range(0..4)));
    }
    let n = r.random_range(0..8);
    for i in 0..n {
        let a = if i + 1 == n && r.random_bool(0.5) { terminal(r, false) } else { action(r, false) };
        let mut step = Step::new(format!("Page: p{i}\n[1] link 'x'"), a);
        if r.random_bool(0.5) {
            step.reasoning = Some(sentence(r));
        }
        if r.random_bool(0.3) {
            step.state_desc = Some(sentence(r));
        }
        if r.random_bool(0.2) {
            step.html = Some("<a id=\"1\">x</a>".into());
        }
        e.steps.push(step);
    }
    if r.random_bool(0.5) {
        e.success = Some(r.random_bool(0.5));
    }
    e
}

/// Experiences over a small alphabet of action shapes, so that signatures and
/// templates collide often. Ids are unique.
pub fn dedup_set(r: &mut impl RngCore, size: usize) -> Vec<Experience> {
    let shapes: [&[&str]; 4] = [
        &["click('1')", "click('2')"],
        &["click('1')", "fill('2', 'x')"],
        &["hover('3')"],
        &["click(4)", "click('5')", "type('6', 'y')"],
    ];
    let mut ids: Vec<usize> = (0..size).collect();
    ids.sort_by_key(|_| r.next_u32());
    ids.into_iter()
        .map(|id| {
            let mut e = Experience::new(format!("x{id:02}"), "site", "task");
            if r.random_bool(0.8) {
                e.template_id = Some(format!("t{}", r.random_range(0..3)));
            }
            for a in *shapes.choose(r).unwrap() {
                e.steps.push(Step::new("", awm::parse_action(a).unwrap()));
            }
            e
        })
        .collect()
}
