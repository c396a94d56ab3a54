//! Offline, online and combined runs, live or teacher-forced.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::agent::{
    memory_text, predict_step, register_macro_actions, run_episode, AgentConfig, EpisodeTask, MacroRegistry,
};
use crate::action::Action;
use crate::evaluation::{score_step, task_success, EvalReport, GoldStep, TaskScore};
use crate::induction::{induce, InductionConfig};
use crate::judge::{EpisodeOutcome, Judge, Judgment};
use crate::lm::LmClient;
use crate::memory::{MemoryError, MemoryMode, WorkflowStore};
use crate::simenv::{EnvError, Environment, ScriptedAgent, Site, State, TaskSpec};
use crate::types::{Experience, JudgeKind, Step, Workflow};

/// What online induction sees after a success.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OnlineInput {
    /// Only the experience that just succeeded.
    #[default]
    Newest,
    /// Every success so far on the same website.
    AllSuccesses,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub induction: InductionConfig,
    pub agent: AgentConfig,
    pub memory_mode: MemoryMode,
    pub judge: JudgeKind,
    pub online_input: OnlineInput,
    /// With memory disabled the agent always sees the bare action docs and
    /// nothing is induced.
    pub memory_enabled: bool,
}

impl Default for PipelineConfig {
    fn default() -> PipelineConfig {
        PipelineConfig {
            induction: InductionConfig::default(),
            agent: AgentConfig::default(),
            memory_mode: MemoryMode::Online,
            judge: JudgeKind::Oracle,
            online_input: OnlineInput::Newest,
            memory_enabled: true,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("no simulated site named `{0}`")]
    UnknownSite(String),
    #[error("task `{task}`: {source}")]
    Env {
        task: String,
        #[source]
        source: EnvError,
    },
    #[error(transparent)]
    Memory(#[from] MemoryError),
}

fn find_site<'a>(sites: &'a [Arc<Site>], name: &str) -> Result<&'a Arc<Site>, PipelineError> {
    sites
        .iter()
        .find(|s| s.name == name)
        .ok_or_else(|| PipelineError::UnknownSite(name.to_string()))
}

/// One live episode on a fresh environment, judged.
#[derive(Debug, Clone)]
pub struct EpisodeRecord {
    pub experience: Experience,
    pub judgment: Judgment,
    pub final_state: State,
    pub error: Option<String>,
}

fn attempt(
    task: &TaskSpec,
    site: &Arc<Site>,
    store: &WorkflowStore,
    cfg: &PipelineConfig,
    lm: &dyn LmClient,
    judge: &dyn Judge,
) -> Result<EpisodeRecord, PipelineError> {
    let mut env = Environment::new(site.clone());
    env.reset(task).map_err(|source| PipelineError::Env {
        task: task.id.clone(),
        source,
    })?;
    let (mut experience, error) = match run_episode(&EpisodeTask::from(task), &mut env, store, lm, &cfg.agent) {
        Ok(ep) => (ep.experience, None),
        Err(e) => {
            tracing::warn!(task = %task.id, error = %e, "episode aborted");
            let mut e0 = Experience::new(&task.id, &task.website, &task.instruction);
            e0.template_id = Some(task.template_id.clone());
            (e0, Some(e.to_string()))
        }
    };
    let judgment = if error.is_some() {
        Judgment {
            success: false,
            rationale: Some("episode error".into()),
            judge_kind: judge.kind(),
        }
    } else {
        judge.judge(&EpisodeOutcome {
            experience: &experience,
            task: Some(task),
            final_state: Some(env.state()),
        })
    };
    experience.success = Some(judgment.success);
    Ok(EpisodeRecord {
        experience,
        judgment,
        final_state: env.state().clone(),
        error,
    })
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub report: EvalReport,
    pub store: WorkflowStore,
    pub episodes: Vec<EpisodeRecord>,
    /// Number of induction calls made during the run.
    pub inductions: usize,
}

impl RunResult {
    pub fn experiences(&self) -> Vec<Experience> {
        self.episodes.iter().map(|e| e.experience.clone()).collect()
    }
}

fn group_by_website(experiences: &[Experience]) -> BTreeMap<String, Vec<Experience>> {
    let mut out: BTreeMap<String, Vec<Experience>> = BTreeMap::new();
    for e in experiences {
        out.entry(e.website.clone()).or_default().push(e.clone());
    }
    out
}

/// Workflows induced per website, and the websites whose induction failed.
#[derive(Debug, Clone, Default)]
pub struct PerWebsite {
    pub workflows: BTreeMap<String, Vec<Workflow>>,
    pub failures: BTreeMap<String, String>,
}

impl PerWebsite {
    fn error_lines(&self) -> Vec<String> {
        self.failures.iter().map(|(site, e)| format!("{site}: {e}")).collect()
    }

    fn seed(&self, store: &mut WorkflowStore) -> Result<usize, MemoryError> {
        store.seed_offline(self.workflows.iter().map(|(s, w)| (s.as_str(), w.as_slice())))
    }
}

/// Induces workflows separately for each website of `train`.
pub fn induce_per_website(train: &[Experience], cfg: &InductionConfig, lm: Option<&dyn LmClient>) -> PerWebsite {
    let mut out = PerWebsite::default();
    for (site, exps) in group_by_website(train) {
        match induce(&exps, cfg, lm) {
            Ok(ws) => {
                out.workflows.insert(site, ws);
            }
            Err(e) => {
                out.failures.insert(site, e.to_string());
            }
        }
    }
    out
}

/// Induces from `train` once, freezes memory, then runs every test task.
/// Tasks of websites whose induction failed are skipped and reported.
pub fn run_offline(
    train: &[Experience],
    tasks: &[TaskSpec],
    sites: &[Arc<Site>],
    cfg: &PipelineConfig,
    lm: &dyn LmClient,
    judge: &dyn Judge,
) -> Result<RunResult, PipelineError> {
    let induced = induce_per_website(train, &cfg.induction, Some(lm));
    let mut store = WorkflowStore::new(MemoryMode::Offline);
    induced.seed(&mut store)?;

    let mut episodes = Vec::new();
    for task in tasks.iter().filter(|t| !induced.failures.contains_key(&t.website)) {
        let site = find_site(sites, &task.website)?;
        episodes.push(attempt(task, site, &store, cfg, lm, judge)?);
    }
    let mut report = EvalReport::from_scores(episode_scores(&episodes));
    report.errors = induced.error_lines();
    Ok(RunResult {
        report,
        store,
        episodes,
        inductions: induced.workflows.len() + induced.failures.len(),
    })
}

fn episode_scores(episodes: &[EpisodeRecord]) -> Vec<TaskScore> {
    episodes
        .iter()
        .map(|r| TaskScore::episode(&r.experience.id, &r.experience.website, r.judgment.success, r.experience.steps.len()))
        .collect()
}

/// Streams `tasks` in order: attempt, judge, and on success induce and grow
/// memory before the next task. `store` may be empty or offline-seeded.
/// Only first attempts are scored.
pub fn run_online(
    tasks: &[TaskSpec],
    sites: &[Arc<Site>],
    store: WorkflowStore,
    cfg: &PipelineConfig,
    lm: &dyn LmClient,
    judge: &dyn Judge,
) -> Result<RunResult, PipelineError> {
    let mut store = store;
    let empty = WorkflowStore::new(store.mode());
    let mut successes: BTreeMap<String, Vec<Experience>> = BTreeMap::new();
    let mut episodes = Vec::with_capacity(tasks.len());
    let mut errors = Vec::new();
    let mut inductions = 0;

    for task in tasks {
        let site = find_site(sites, &task.website)?;
        let memory = if cfg.memory_enabled { &store } else { &empty };
        let record = attempt(task, site, memory, cfg, lm, judge)?;
        tracing::info!(task = %task.id, success = record.judgment.success, steps = record.experience.steps.len(), "episode");
        if record.judgment.success && cfg.memory_enabled {
            let seen = successes.entry(task.website.clone()).or_default();
            seen.push(record.experience.clone());
            let input: &[Experience] = match cfg.online_input {
                OnlineInput::Newest => std::slice::from_ref(&record.experience),
                OnlineInput::AllSuccesses => seen,
            };
            inductions += 1;
            match induce(input, &cfg.induction, Some(lm)) {
                Ok(mut ws) => {
                    for w in &mut ws {
                        w.judged_by = Some(record.judgment.judge_kind);
                    }
                    let added = store.add_workflows(&task.website, &ws)?;
                    tracing::info!(task = %task.id, added, "memory updated");
                }
                Err(e) => errors.push(format!("{}: induction after `{}` failed: {e}", task.website, task.id)),
            }
        }
        episodes.push(record);
    }
    let mut report = EvalReport::from_scores(episode_scores(&episodes));
    report.errors = errors;
    Ok(RunResult {
        report,
        store,
        episodes,
        inductions,
    })
}

/// Teacher-forced result for one dataset example.
#[derive(Debug, Clone)]
pub struct StepwiseRecord {
    pub score: TaskScore,
    /// The predicted actions over the gold observations.
    pub predicted: Experience,
}

fn predict_example(
    gold: &Experience,
    store: &WorkflowStore,
    cfg: &PipelineConfig,
    lm: &dyn LmClient,
) -> StepwiseRecord {
    let macros = if cfg.agent.enable_macro_actions {
        register_macro_actions(store, &gold.website)
    } else {
        MacroRegistry::default()
    };
    let memory = memory_text(store, &gold.website, &cfg.agent, &macros);
    let mut predicted = Experience::new(&gold.id, &gold.website, &gold.instruction);
    predicted.template_id = gold.template_id.clone();
    let mut scores = Vec::with_capacity(gold.steps.len());
    for (i, step) in gold.steps.iter().enumerate() {
        let (reasoning, action) = match predict_step(
            &gold.instruction,
            &gold.steps[..i],
            &step.observation,
            &memory,
            lm,
            macros.vocabulary(),
        ) {
            Ok(d) => (d.reasoning, d.action),
            Err(e) => (format!("model error: {e}"), Action::stop()),
        };
        scores.push(score_step(&action, &GoldStep::from_action(&step.action)));
        predicted.steps.push(Step::new(step.observation.clone(), action).with_reasoning(reasoning));
    }
    StepwiseRecord {
        score: TaskScore::stepwise(&gold.id, &gold.website, scores),
        predicted,
    }
}

#[derive(Debug, Clone)]
pub struct StepwiseResult {
    pub report: EvalReport,
    pub store: WorkflowStore,
    pub records: Vec<StepwiseRecord>,
    pub inductions: usize,
}

/// Teacher-forced evaluation of `test` with a fixed memory.
pub fn run_stepwise(test: &[Experience], store: &WorkflowStore, cfg: &PipelineConfig, lm: &dyn LmClient) -> StepwiseResult {
    let records: Vec<StepwiseRecord> = test.iter().map(|g| predict_example(g, store, cfg, lm)).collect();
    StepwiseResult {
        report: EvalReport::from_scores(records.iter().map(|r| r.score.clone()).collect()),
        store: store.clone(),
        records,
        inductions: 0,
    }
}

/// Offline teacher-forced run: induce from `train`, then evaluate `test`.
pub fn run_offline_stepwise(
    train: &[Experience],
    test: &[Experience],
    cfg: &PipelineConfig,
    lm: &dyn LmClient,
) -> Result<StepwiseResult, PipelineError> {
    let induced = induce_per_website(train, &cfg.induction, Some(lm));
    let mut store = WorkflowStore::new(MemoryMode::Offline);
    induced.seed(&mut store)?;
    let mut result = run_stepwise(test, &store, cfg, lm);
    result.report.errors = induced.error_lines();
    result.inductions = induced.workflows.len() + induced.failures.len();
    Ok(result)
}

/// Online teacher-forced run over a stream of examples. The oracle judge
/// counts an example as solved when every step matches the gold step; other
/// judges see the predicted trajectory.
pub fn run_online_stepwise(
    test: &[Experience],
    store: WorkflowStore,
    cfg: &PipelineConfig,
    lm: &dyn LmClient,
    judge: &dyn Judge,
) -> Result<StepwiseResult, PipelineError> {
    let mut store = store;
    let mut records = Vec::with_capacity(test.len());
    let mut errors = Vec::new();
    let mut inductions = 0;
    for gold in test {
        let mut record = predict_example(gold, &store, cfg, lm);
        let success = match judge.kind() {
            JudgeKind::Oracle => task_success(&record.score.steps),
            JudgeKind::Lm => {
                judge
                    .judge(&EpisodeOutcome {
                        experience: &record.predicted,
                        task: None,
                        final_state: None,
                    })
                    .success
            }
        };
        record.predicted.success = Some(success);
        if success && cfg.memory_enabled {
            inductions += 1;
            match induce(std::slice::from_ref(&record.predicted), &cfg.induction, Some(lm)) {
                Ok(mut ws) => {
                    for w in &mut ws {
                        w.judged_by = Some(judge.kind());
                    }
                    store.add_workflows(&gold.website, &ws)?;
                }
                Err(e) => errors.push(format!("{}: induction after `{}` failed: {e}", gold.website, gold.id)),
            }
        }
        records.push(record);
    }
    let mut report = EvalReport::from_scores(records.iter().map(|r| r.score.clone()).collect());
    report.errors = errors;
    Ok(StepwiseResult {
        report,
        store,
        records,
        inductions,
    })
}

/// Records successful demonstrations by running a deep-lookahead scripted
/// agent with empty memory; tasks it cannot solve within `depth` are skipped.
pub fn collect_demonstrations(
    tasks: &[TaskSpec],
    sites: &[Arc<Site>],
    depth: usize,
    judge: &dyn Judge,
) -> Result<Vec<Experience>, PipelineError> {
    let demonstrator = ScriptedAgent::new(sites, tasks.to_vec()).with_depth(depth);
    let cfg = PipelineConfig {
        memory_enabled: false,
        ..PipelineConfig::default()
    };
    let store = WorkflowStore::new(MemoryMode::Offline);
    let mut out = Vec::new();
    for task in tasks {
        let site = find_site(sites, &task.website)?;
        let record = attempt(task, site, &store, &cfg, &demonstrator, judge)?;
        if record.judgment.success {
            out.push(record.experience);
        }
    }
    Ok(out)
}
