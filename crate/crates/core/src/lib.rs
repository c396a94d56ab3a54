//! Agent workflow memory.
//!
//! Web agents solve tasks as trajectories of primitive browser actions. This
//! crate abstracts successful trajectories into reusable *workflows*, keeps
//! them in a per-website memory, and feeds that memory back into the agent's
//! prompt (or exposes workflows as callable macro actions).
//!
//! - [`action`]: the action grammar and placeholder canonicalization.
//! - [`types`] and [`workflow_text`]: experiences, workflows and their text format.
//! - [`induction`]: rule-based and model-based workflow induction.
//! - [`memory`]: the workflow store in offline, online or combined mode.
//! - [`lm`]: the completion-client trait, a scripted mock and an HTTP client.
//! - [`agent`]: the observe-act loop, teacher-forced prediction and macros.
//! - [`judge`]: model and oracle success judges.
//! - [`simenv`]: deterministic simulated websites with templated task suites.
//! - [`evaluation`]: step, task and workflow-quality metrics.
//! - [`pipeline`]: offline and online runs end to end.

pub mod action;
pub mod agent;
pub mod evaluation;
pub mod induction;
pub mod judge;
pub mod lm;
pub mod memory;
pub mod pipeline;
pub mod simenv;
pub mod types;
pub mod workflow_text;

pub use action::{parse_action, Action, ActionError, Arg, Primitive};
pub use memory::{MemoryMode, WorkflowStore};
pub use types::{Experience, Step, Workflow, WorkflowStep};

#[cfg(doctest)]
#[doc = include_str!("../../../README.md")]
mod readme {}

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/actions.md")]
    mod actions {}
    #[doc = include_str!("../../../book/src/induction.md")]
    mod induction {}
    #[doc = include_str!("../../../book/src/memory.md")]
    mod memory {}
    #[doc = include_str!("../../../book/src/agent.md")]
    mod agent {}
    #[doc = include_str!("../../../book/src/simenv.md")]
    mod simenv {}
    #[doc = include_str!("../../../book/src/evaluation.md")]
    mod evaluation {}
    #[doc = include_str!("../../../book/src/online.md")]
    mod online {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
