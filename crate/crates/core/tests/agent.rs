use awm::action::parse_action;
use awm::agent::{register_macro_actions, run_episode, AgentConfig, EpisodeTask};
use awm::lm::MockLm;
use awm::memory::{MemoryMode, WorkflowStore};
use awm::simenv::{builtin_site, generate_suite, Environment};
use awm::types::{Workflow, WorkflowSource, WorkflowStep};

fn find_place_task() -> (EpisodeTask, Environment) {
    let task = generate_suite(1, 1, 1).unwrap().remove(0);
    let mut env = Environment::new(builtin_site("map").unwrap());
    env.reset(&task).unwrap();
    (EpisodeTask::from(&task), env)
}

#[test]
fn immediate_stop_is_one_step() {
    let (task, mut env) = find_place_task();
    let lm = MockLm::scripted(["Nothing to do.\nAction: stop()"]);
    let store = WorkflowStore::new(MemoryMode::Online);
    let ep = run_episode(&task, &mut env, &store, &lm, &AgentConfig::default()).unwrap();
    assert_eq!(ep.experience.steps.len(), 1);
    assert_eq!(ep.experience.steps[0].reasoning.as_deref(), Some("Nothing to do."));
    assert!(ep.experience.steps[0].observation.starts_with("Page: home"));
    assert!(env.state().ended);
}

#[test]
fn step_budget_caps_the_episode() {
    let (task, mut env) = find_place_task();
    let lm = MockLm::responder(|_| Ok("Action: click('150')".into()));
    let cfg = AgentConfig { max_steps: 4, ..AgentConfig::default() };
    let ep = run_episode(&task, &mut env, &WorkflowStore::new(MemoryMode::Online), &lm, &cfg).unwrap();
    assert_eq!(ep.experience.steps.len(), 4);
    assert_eq!(lm.call_count(), 4);
    // The second click targets an element that is gone after the first.
    assert_eq!(ep.stats.env_errors, 3);
    assert!(ep.experience.steps[2].observation.starts_with("Error: no element with id '150'"));
}

#[test]
fn unparseable_replies_end_in_a_forced_stop() {
    let (task, mut env) = find_place_task();
    let lm = MockLm::responder(|_| Ok("I am not sure.".into()));
    let ep = run_episode(&task, &mut env, &WorkflowStore::new(MemoryMode::Online), &lm, &AgentConfig::default()).unwrap();
    assert_eq!(ep.experience.steps.len(), 1);
    assert_eq!(ep.stats.forced_stops, 1);
    assert_eq!(lm.call_count(), 2);
}

fn find_place_workflow() -> Workflow {
    Workflow {
        id: "w".into(),
        website: "map".into(),
        description: "Find a place by its name".into(),
        steps: ["fill('145', '{place_name}')", "press('145', 'Enter')", "stop()"]
            .iter()
            .map(|a| WorkflowStep::new(parse_action(a).unwrap()))
            .collect(),
        source: WorkflowSource::Human,
        format: Default::default(),
        judged_by: None,
    }
}

#[test]
fn workflows_become_named_macros() {
    let mut store = WorkflowStore::new(MemoryMode::Online);
    store.add_workflows("map", &[find_place_workflow()]).unwrap();
    let reg = register_macro_actions(&store, "map");
    let m = reg.get("find_a_place_by_its_name").unwrap();
    assert_eq!(m.params, ["place_name"]);
    assert_eq!(m.body.len(), 2);
    assert_eq!(m.doc_line(), "- find_a_place_by_its_name(place_name): Find a place by its name");
    assert!(register_macro_actions(&store, "shop").is_empty());
}

#[test]
fn agent_can_call_a_macro() {
    let (task, mut env) = find_place_task();
    let mut store = WorkflowStore::new(MemoryMode::Online);
    store.add_workflows("map", &[find_place_workflow()]).unwrap();
    let lm = MockLm::scripted(["Action: find_a_place_by_its_name('Panther Hollow Diner')", "Action: stop()"]);
    let cfg = AgentConfig { enable_macro_actions: true, ..AgentConfig::default() };
    let ep = run_episode(&task, &mut env, &store, &lm, &cfg).unwrap();
    assert_eq!(ep.stats.macro_calls, 1);
    assert_eq!(ep.stats.env_errors, 0);
    assert!(lm.requests()[0].prompt.contains("find_a_place_by_its_name(place_name)"));
    assert!(ep.experience.steps[1].observation.contains("Panther Hollow Diner"));
}
