//! Deterministic simulated websites with templated task suites.

mod builtin;
mod env;
mod planner;
mod scripted;
mod site;
mod task;

pub use builtin::{builtin_site, builtin_sites, generate_suite};
pub use env::{Element, EnvError, Environment, State, WebEnvironment};
pub use planner::{quoted_values, Plan, Planner};
pub use scripted::{ScriptedAgent, ScriptedInducer, INDUCER_ROUTE};
pub use site::{
    render_template, Condition, Effect, ElementSpec, Filter, FilterOp, ItemClick, ListSpec, Page, Query, Record, Role,
    Site, SiteError, Transition, TransitionAction,
};
pub use task::{
    cross_template_subset, generate_suite_from, read_suite, write_suite, OracleCheck, Slot, SuiteError, TaskSpec,
    TaskTemplate,
};
