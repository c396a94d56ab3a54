//! `awm`: induce workflows, run agents with workflow memory, and score them.

mod config;
mod run_dir;

use std::fs::File;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use anyhow::{bail, Context};
use awm::evaluation::{cumulative_csv, cumulative_sr, quality_report, QualityReport};
use awm::induction::{InductionConfig, InductionMode};
use awm::judge::{Judge, LmJudge, OracleJudge};
use awm::lm::{HttpLm, LmClient, MockLm};
use awm::memory::{MemoryMode, WorkflowStore};
use awm::pipeline::{
    collect_demonstrations, induce_per_website, run_offline, run_offline_stepwise, run_online, run_online_stepwise,
    run_stepwise, PipelineConfig,
};
use awm::simenv::{builtin_sites, generate_suite, read_suite, write_suite, ScriptedAgent, ScriptedInducer, TaskSpec, INDUCER_ROUTE};
use awm::types::{read_experiences, Experience, JudgeKind, Workflow};
use awm::workflow_text::{parse_workflow_file, render_workflow_file};
use clap::{Parser, Subcommand};
use tracing_subscriber::filter::{EnvFilter, Targets};
use tracing_subscriber::prelude::*;

use config::{Backend, Config};
use run_dir::RunDir;

#[derive(Parser)]
#[command(name = "awm", version, about = "Workflow memory for web agents")]
struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory that receives every output of the run.
    #[arg(long, global = true, default_value = "awm-run")]
    run_dir: PathBuf,
    /// Write every prompt and reply to `<run-dir>/trace.log`.
    #[arg(long, global = true)]
    trace: bool,
    /// Override the configured model backend.
    #[arg(long, global = true, value_enum)]
    backend: Option<Backend>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Induce workflows from recorded experiences.
    Induce {
        #[arg(long, value_enum)]
        mode: ModeArg,
        /// Experiences, one JSON object per line.
        #[arg(long)]
        input: PathBuf,
        /// Also rewrite steps as natural-language sentences.
        #[arg(long)]
        text_format: bool,
    },
    /// Induce once from training experiences, then run a frozen-memory agent.
    RunOffline {
        #[arg(long)]
        train: PathBuf,
        /// Task suite; generated from `[suite]` when omitted.
        #[arg(long)]
        tasks: Option<PathBuf>,
    },
    /// Stream tasks, growing memory from judged successes.
    RunOnline {
        #[arg(long)]
        tasks: Option<PathBuf>,
        /// Workflow file to seed memory with (offline+online).
        #[arg(long)]
        seed_memory: Option<PathBuf>,
        /// Run without memory: bare action docs, no induction.
        #[arg(long)]
        no_memory: bool,
    },
    /// Teacher-forced step-level evaluation over gold trajectories.
    EvalSteps {
        #[arg(long)]
        test: PathBuf,
        /// Training trajectories for offline memory.
        #[arg(long, conflicts_with = "online")]
        train: Option<PathBuf>,
        /// Grow memory along the test stream.
        #[arg(long)]
        online: bool,
        /// Task suite the scripted backend plans against.
        #[arg(long)]
        tasks: Option<PathBuf>,
    },
    /// Coverage, function overlap and utility of a workflow file.
    Quality {
        #[arg(long)]
        workflows: PathBuf,
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        predicted: PathBuf,
    },
    /// Generate a task suite, and optionally demonstrations for it.
    Simgen {
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        templates: Option<usize>,
        #[arg(long)]
        per_template: Option<usize>,
        /// Also record successful demonstrations into `demos.jsonl`.
        #[arg(long)]
        demos: bool,
    },
    /// Cumulative success-rate curve from judged experiences.
    Curve {
        #[arg(long)]
        experiences: PathBuf,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum ModeArg {
    Rule,
    Lm,
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    let (mut cfg, config_text) = Config::load(cli.config.as_deref())?;
    if let Some(b) = cli.backend {
        cfg.backend = b;
    }
    let run = RunDir::create(&cli.run_dir)?;
    init_tracing(&run, cli.trace)?;
    if let Some(text) = config_text {
        run.write("config.toml", &text)?;
    }

    match cli.command {
        Command::Induce { mode, input, text_format } => induce_cmd(&cfg, &run, mode, &input, text_format),
        Command::RunOffline { train, tasks } => run_offline_cmd(&cfg, &run, &train, tasks.as_deref()),
        Command::RunOnline {
            tasks,
            seed_memory,
            no_memory,
        } => run_online_cmd(&cfg, &run, tasks.as_deref(), seed_memory.as_deref(), no_memory),
        Command::EvalSteps {
            test,
            train,
            online,
            tasks,
        } => eval_steps_cmd(&cfg, &run, &test, train.as_deref(), online, tasks.as_deref()),
        Command::Quality {
            workflows,
            gold,
            predicted,
        } => quality_cmd(&run, &workflows, &gold, &predicted),
        Command::Simgen {
            seed,
            templates,
            per_template,
            demos,
        } => simgen_cmd(&cfg, &run, seed, templates, per_template, demos),
        Command::Curve { experiences } => curve_cmd(&run, &experiences),
    }
}

fn init_tracing(run: &RunDir, trace: bool) -> anyhow::Result<()> {
    let stderr = tracing_subscriber::fmt::layer()
        .with_writer(std::io::stderr)
        .with_filter(EnvFilter::try_from_env("AWM_LOG").unwrap_or_else(|_| EnvFilter::new("warn")));
    let trace_layer = if trace {
        let file = File::create(run.path("trace.log")).context("creating trace.log")?;
        Some(
            tracing_subscriber::fmt::layer()
                .with_ansi(false)
                .with_writer(Mutex::new(file))
                .with_filter(Targets::new().with_target("awm::trace", tracing::Level::TRACE)),
        )
    } else {
        None
    };
    tracing_subscriber::registry().with(stderr).with(trace_layer).init();
    Ok(())
}

fn read_file(path: &Path) -> anyhow::Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_experiences(path: &Path) -> anyhow::Result<Vec<Experience>> {
    read_experiences(&read_file(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn load_workflows(path: &Path) -> anyhow::Result<Vec<Workflow>> {
    parse_workflow_file(&read_file(path)?, "unknown")
        .map_err(|(block, e)| anyhow::anyhow!("{}: block {block}: {e}", path.display()))
}

fn load_tasks(cfg: &Config, path: Option<&Path>) -> anyhow::Result<Vec<TaskSpec>> {
    match path {
        Some(p) => read_suite(&read_file(p)?).map_err(|(line, e)| anyhow::anyhow!("{}:{line}: {e}", p.display())),
        None => Ok(generate_suite(cfg.suite.seed, cfg.suite.templates, cfg.suite.per_template)?),
    }
}

/// The model client for this run. The scripted backend plans against
/// `tasks`; with no tasks it can only stop.
fn backend(cfg: &Config, tasks: &[TaskSpec]) -> Box<dyn LmClient> {
    match cfg.backend {
        Backend::Http => Box::new(HttpLm::new(cfg.lm.clone().with_process_env())),
        Backend::Scripted => Box::new(
            MockLm::router()
                .route_client(INDUCER_ROUTE, Arc::new(ScriptedInducer))
                .route_client("# Task", Arc::new(ScriptedAgent::new(builtin_sites(), tasks.to_vec()))),
        ),
    }
}

fn judge<'a>(cfg: &Config, lm: &'a dyn LmClient) -> anyhow::Result<Box<dyn Judge + 'a>> {
    match (cfg.pipeline.judge, cfg.backend) {
        (JudgeKind::Oracle, _) => Ok(Box::new(OracleJudge)),
        (JudgeKind::Lm, Backend::Http) => Ok(Box::new(LmJudge { lm })),
        (JudgeKind::Lm, Backend::Scripted) => bail!("the scripted backend has no judge model; use judge = \"oracle\""),
    }
}

fn induce_cmd(cfg: &Config, run: &RunDir, mode: ModeArg, input: &Path, text_format: bool) -> anyhow::Result<()> {
    let experiences = load_experiences(input)?;
    let induction = InductionConfig {
        mode: match mode {
            ModeArg::Rule => InductionMode::Rule,
            ModeArg::Lm => InductionMode::Lm,
        },
        text_format: text_format || cfg.pipeline.induction.text_format,
        ..cfg.pipeline.induction.clone()
    };
    let lm = backend(cfg, &[]);
    let induced = induce_per_website(&experiences, &induction, Some(lm.as_ref()));
    let all: Vec<Workflow> = induced.workflows.values().flatten().cloned().collect();
    let path = run.write("workflows.md", &render_workflow_file(&all))?;
    for (site, ws) in &induced.workflows {
        println!("{site}: {} workflow(s)", ws.len());
    }
    for (site, err) in &induced.failures {
        println!("{site}: induction failed: {err}");
    }
    println!("wrote {}", path.display());
    if all.is_empty() && !induced.failures.is_empty() {
        bail!("induction failed for every website");
    }
    Ok(())
}

fn finish_episodes(run: &RunDir, result: &awm::pipeline::RunResult) -> anyhow::Result<()> {
    run.write_experiences("experiences.jsonl", &result.experiences())?;
    run.write_store(&result.store)?;
    run.write_report(&result.report)?;
    print!("{}", result.report.summary());
    println!("memory: {} workflow(s), {} induction call(s)", result.store.len(), result.inductions);
    Ok(())
}

fn run_offline_cmd(cfg: &Config, run: &RunDir, train: &Path, tasks: Option<&Path>) -> anyhow::Result<()> {
    let train = load_experiences(train)?;
    let tasks = load_tasks(cfg, tasks)?;
    let lm = backend(cfg, &tasks);
    let judge = judge(cfg, lm.as_ref())?;
    let result = run_offline(&train, &tasks, builtin_sites(), &cfg.pipeline, lm.as_ref(), judge.as_ref())?;
    finish_episodes(run, &result)
}

fn run_online_cmd(
    cfg: &Config,
    run: &RunDir,
    tasks: Option<&Path>,
    seed_memory: Option<&Path>,
    no_memory: bool,
) -> anyhow::Result<()> {
    let tasks = load_tasks(cfg, tasks)?;
    let lm = backend(cfg, &tasks);
    let judge = judge(cfg, lm.as_ref())?;
    let pipeline = PipelineConfig {
        memory_enabled: cfg.pipeline.memory_enabled && !no_memory,
        ..cfg.pipeline.clone()
    };
    let store = initial_store(&pipeline, seed_memory)?;
    let result = run_online(&tasks, builtin_sites(), store, &pipeline, lm.as_ref(), judge.as_ref())?;
    finish_episodes(run, &result)
}

fn initial_store(pipeline: &PipelineConfig, seed_memory: Option<&Path>) -> anyhow::Result<WorkflowStore> {
    let Some(path) = seed_memory else {
        return Ok(WorkflowStore::new(MemoryMode::Online));
    };
    if pipeline.memory_mode == MemoryMode::Online {
        bail!("--seed-memory needs memory_mode = \"offline+online\"");
    }
    let workflows = load_workflows(path)?;
    let mut store = WorkflowStore::new(MemoryMode::OfflinePlusOnline);
    let mut sites: Vec<&str> = workflows.iter().map(|w| w.website.as_str()).collect();
    sites.dedup();
    for site in sites {
        let group: Vec<Workflow> = workflows.iter().filter(|w| w.website == site).cloned().collect();
        store.seed_offline([(site, group.as_slice())])?;
    }
    Ok(store)
}

fn eval_steps_cmd(
    cfg: &Config,
    run: &RunDir,
    test: &Path,
    train: Option<&Path>,
    online: bool,
    tasks: Option<&Path>,
) -> anyhow::Result<()> {
    let test = load_experiences(test)?;
    let tasks = match tasks {
        Some(p) => load_tasks(cfg, Some(p))?,
        None => Vec::new(),
    };
    let lm = backend(cfg, &tasks);
    let result = match (train, online) {
        (Some(train), _) => run_offline_stepwise(&load_experiences(train)?, &test, &cfg.pipeline, lm.as_ref())?,
        (None, true) => {
            let judge = judge(cfg, lm.as_ref())?;
            let store = WorkflowStore::new(MemoryMode::Online);
            run_online_stepwise(&test, store, &cfg.pipeline, lm.as_ref(), judge.as_ref())?
        }
        (None, false) => run_stepwise(&test, &WorkflowStore::new(MemoryMode::Offline), &cfg.pipeline, lm.as_ref()),
    };
    let predicted: Vec<Experience> = result.records.iter().map(|r| r.predicted.clone()).collect();
    run.write_experiences("predictions.jsonl", &predicted)?;
    run.write_store(&result.store)?;
    run.write_report(&result.report)?;
    print!("{}", result.report.summary());
    Ok(())
}

fn quality_cmd(run: &RunDir, workflows: &Path, gold: &Path, predicted: &Path) -> anyhow::Result<()> {
    let workflows = load_workflows(workflows)?;
    let report: QualityReport = quality_report(&workflows, &load_experiences(gold)?, &load_experiences(predicted)?);
    run.write("quality.json", &serde_json::to_string_pretty(&report)?)?;
    println!("workflows: {}", report.n_workflows);
    println!("coverage: {:.4}", report.coverage);
    println!("function_overlap: {:.4}", report.function_overlap);
    println!("utility_rate: {:.4}", report.utility_rate);
    for (judge, n) in &report.by_judge {
        println!("judged_by {judge}: {n}");
    }
    Ok(())
}

fn simgen_cmd(
    cfg: &Config,
    run: &RunDir,
    seed: Option<u64>,
    templates: Option<usize>,
    per_template: Option<usize>,
    demos: bool,
) -> anyhow::Result<()> {
    let tasks = generate_suite(
        seed.unwrap_or(cfg.suite.seed),
        templates.unwrap_or(cfg.suite.templates),
        per_template.unwrap_or(cfg.suite.per_template),
    )?;
    let path = run.write("suite.jsonl", &write_suite(&tasks))?;
    println!("{} task(s) -> {}", tasks.len(), path.display());
    if demos {
        let recorded = collect_demonstrations(&tasks, builtin_sites(), cfg.suite.demo_depth, &OracleJudge)?;
        let path = run.write_experiences("demos.jsonl", &recorded)?;
        println!("{} demonstration(s) -> {}", recorded.len(), path.display());
    }
    Ok(())
}

fn curve_cmd(run: &RunDir, experiences: &Path) -> anyhow::Result<()> {
    let experiences = load_experiences(experiences)?;
    let outcomes: Vec<bool> = experiences.iter().map(|e| e.success.unwrap_or(false)).collect();
    let series = cumulative_sr(&outcomes);
    let path = run.write("curve.csv", &cumulative_csv(&series))?;
    if let Some(last) = series.last() {
        println!("final cumulative SR {last:.4} over {} task(s)", series.len());
    }
    println!("wrote {}", path.display());
    Ok(())
}
