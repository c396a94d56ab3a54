use std::collections::{HashSet, VecDeque};

use awm::action::{parse_action, Action, Primitive};
use awm::simenv::{
    builtin_site, builtin_sites, cross_template_subset, generate_suite, read_suite, write_suite, EnvError, Environment,
    Role, State, SuiteError, TaskSpec, WebEnvironment,
};

fn act(s: &str) -> Action {
    parse_action(s).unwrap()
}

fn map_env() -> Environment {
    Environment::new(builtin_site("map").unwrap())
}

#[test]
fn observation_lists_elements() {
    let mut env = map_env();
    env.execute(&act("click('150')")).unwrap();
    let obs = env.observe();
    assert!(obs.starts_with("Page: directions\n"), "{obs}");
    assert!(obs.lines().any(|l| l == "[158] textbox 'From'"), "{obs}");
    assert!(env.html().unwrap().contains("<input id=\"158\" aria-label=\"From\" value=\"\"/>"));
}

#[test]
fn directions_page_accepts_input() {
    let mut env = map_env();
    env.execute(&act("click('150')")).unwrap();
    let obs = env.execute(&act("fill('158', 'Oakland')")).unwrap();
    assert!(obs.contains("[158] textbox 'From' value='Oakland'"), "{obs}");
    env.execute(&act("select_option('166', 'walking')")).unwrap();
    env.execute(&act("click('171')")).unwrap();
}

#[test]
fn missing_element_leaves_state_alone() {
    let mut env = map_env();
    env.execute(&act("fill('145', 'cafe')")).unwrap();
    let before = env.state().clone();
    assert_eq!(env.execute(&act("click('9999')")), Err(EnvError::NoSuchElement("9999".into())));
    assert_eq!(env.state(), &before);
    assert!(matches!(env.execute(&act("fill('147', 'x')")), Err(EnvError::IllegalAction(_))));
    assert_eq!(env.state(), &before);
}

#[test]
fn nothing_runs_after_stop() {
    let mut env = map_env();
    env.execute(&act("send_msg_to_user('done')")).unwrap();
    assert!(env.state().ended);
    assert_eq!(env.state().final_message(), Some("done"));
    assert!(matches!(env.execute(&act("click('147')")), Err(EnvError::IllegalAction(_))));
    assert!(matches!(env.execute(&act("stop()")), Err(EnvError::IllegalAction(_))));
}

#[test]
fn suites_are_deterministic_round_robin() {
    let a = generate_suite(3, 10, 5).unwrap();
    assert_eq!(a, generate_suite(3, 10, 5).unwrap());
    assert_ne!(a, generate_suite(4, 10, 5).unwrap());
    assert_eq!(a.len(), 50);
    let first_round: HashSet<&str> = a[..10].iter().map(|t| t.template_id.as_str()).collect();
    assert_eq!(first_round.len(), 10);
    let ids: HashSet<&str> = a.iter().map(|t| t.id.as_str()).collect();
    assert_eq!(ids.len(), 50);
    assert_eq!(read_suite(&write_suite(&a)).unwrap(), a);
    assert!(matches!(generate_suite(0, 99, 1), Err(SuiteError::TooManyTemplates { .. })));
}

#[test]
fn cross_template_subset_takes_one_per_template() {
    let suite = generate_suite(3, 10, 5).unwrap();
    let subset = cross_template_subset(&suite, 11);
    assert_eq!(subset.len(), 10);
    let templates: HashSet<&str> = subset.iter().map(|t| t.template_id.as_str()).collect();
    assert_eq!(templates.len(), 10);
    assert_eq!(subset, cross_template_subset(&suite, 11));
}

fn quoted(instruction: &str) -> Vec<String> {
    instruction.split('"').skip(1).step_by(2).map(str::to_string).collect()
}

/// Fewest non-terminal actions that reach an accepting terminal action, by
/// plain breadth-first search over primitive moves.
fn shortest_solution(task: &TaskSpec, limit: usize) -> Option<usize> {
    let mut env = Environment::new(builtin_site(&task.website).unwrap());
    env.reset(task).unwrap();
    let values = quoted(&task.instruction);
    let mut seen: HashSet<State> = HashSet::from([env.state().clone()]);
    let mut queue = VecDeque::from([(env.state().clone(), 0)]);
    while let Some((state, depth)) = queue.pop_front() {
        env.set_state(state.clone());
        let elements = env.elements();
        let mut finals = vec![act("stop()")];
        finals.extend(elements.iter().map(|e| Action::primitive(Primitive::SendMsgToUser, &[&e.label])));
        for f in finals {
            env.set_state(state.clone());
            if env.execute(&f).is_ok() && task.oracle.holds(env.state().final_message(), env.state()) {
                return Some(depth);
            }
        }
        if depth == limit {
            continue;
        }
        let mut moves = Vec::new();
        for e in &elements {
            let id = e.id.to_string();
            match e.role {
                Role::Link | Role::Button => moves.push(Action::primitive(Primitive::Click, &[&id])),
                Role::Textbox => {
                    moves.extend(values.iter().map(|v| Action::primitive(Primitive::Fill, &[&id, v])));
                    moves.push(Action::primitive(Primitive::Press, &[&id, "Enter"]));
                }
                Role::Option => moves.extend(e.options.iter().map(|o| Action::primitive(Primitive::SelectOption, &[&id, o]))),
                Role::Text => {}
            }
        }
        for m in moves {
            env.set_state(state.clone());
            if env.execute(&m).is_ok() && seen.insert(env.state().clone()) {
                queue.push_back((env.state().clone(), depth + 1));
            }
        }
    }
    None
}

#[test]
fn every_template_is_solvable() {
    let total: usize = builtin_sites().iter().map(|s| s.templates.len()).sum();
    let suite = generate_suite(1, total, 2).unwrap();
    let mut shallow = HashSet::new();
    for task in &suite {
        let depth = shortest_solution(task, 8).unwrap_or_else(|| panic!("{} has no solution", task.id));
        if depth <= 3 {
            shallow.insert(task.template_id.as_str());
        }
    }
    // Only the entry-level templates fit in a three-action lookahead.
    let expected: HashSet<&str> = ["map-find-place", "shop-open-product", "forum-open"].into();
    assert_eq!(shallow, expected);
}
