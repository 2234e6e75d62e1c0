//! Command line driver: evolve, eval, report, trace.

mod config;
mod report;
mod runstore;
mod transport;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Instant, SystemTime};

use clap::{Parser, Subcommand};
use policyevo_core::evolve::{generation_seeds, run_evolution};
use policyevo_core::fitness::evaluate_policy;
use policyevo_core::gateway::{MockBackend, OperatorBackend, RecordingBackend};
use policyevo_core::lang::{DEFAULT_EVAL_BUDGET, evaluate, parse_text};
use policyevo_core::sim;

use crate::config::{BackendChoice, RunConfig};
use crate::transport::{LiveBackend, UreqExec};

#[derive(Parser)]
#[command(
    name = "policyevo",
    version,
    about = "Evolves interpretable lander control policies with LLM-backed operators"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run policy evolution and persist a self-describing run directory
    Evolve(EvolveArgs),
    /// Evaluate a policy file over a seeded episode batch
    Eval(EvalArgs),
    /// Aggregate finished runs into convergence and summary CSVs
    Report(ReportArgs),
    /// Write a step-by-step episode trace for a policy
    Trace(TraceArgs),
}

#[derive(clap::Args)]
struct EvolveArgs {
    /// Config file of `key = value` lines
    #[arg(long)]
    config: Option<PathBuf>,
    /// funsearch | eoh | evoengineer
    #[arg(long)]
    strategy: Option<String>,
    /// mock | live
    #[arg(long)]
    backend: Option<String>,
    /// Master seed (single run)
    #[arg(long)]
    seed: Option<u64>,
    /// Batch of master seeds, one independent run each (e.g. 1,2,3,4,5)
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    #[arg(long)]
    population: Option<usize>,
    #[arg(long)]
    generations: Option<u32>,
    /// Evaluation episodes per fitness report
    #[arg(long)]
    episodes: Option<usize>,
    /// Cap on total LLM calls (initialization included)
    #[arg(long = "llm-budget")]
    llm_budget: Option<u32>,
    #[arg(long)]
    tournament: Option<usize>,
    #[arg(long)]
    temperature: Option<f64>,
    #[arg(long)]
    model: Option<String>,
    /// Run directory (or parent directory for --seeds batches)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Keep a code-and-rationale transcript of every backend call
    #[arg(long)]
    transcript: bool,
    /// Overwrite an existing run directory
    #[arg(long)]
    force: bool,
    /// Extra `key=value` overrides (any config key, repeatable)
    #[arg(long = "set")]
    set: Vec<String>,
}

#[derive(clap::Args)]
struct EvalArgs {
    /// Policy source file
    policy: PathBuf,
    #[arg(long, default_value_t = 100)]
    episodes: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// `key=value` overrides for sim.* settings (repeatable)
    #[arg(long = "set")]
    set: Vec<String>,
}

#[derive(clap::Args)]
struct ReportArgs {
    /// Run directories written by `evolve`
    dirs: Vec<PathBuf>,
    /// Directory the CSV files are written to
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(clap::Args)]
struct TraceArgs {
    /// Policy source file
    policy: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file
    #[arg(long, default_value = "trace.txt")]
    out: PathBuf,
    /// `key=value` overrides for sim.* settings (repeatable)
    #[arg(long = "set")]
    set: Vec<String>,
}

/// Exit codes: 0 success, 1 usage/config problems, 2 runtime failures.
struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        CliError { code: 1, message: message.into() }
    }

    fn runtime(message: impl Into<String>) -> Self {
        CliError { code: 2, message: message.into() }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.exit_code() == 0 { 0 } else { 1 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Evolve(args) => cmd_evolve(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Report(args) => cmd_report(args),
        Command::Trace(args) => cmd_trace(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn apply_overrides(config: &mut RunConfig, sets: &[String]) -> Result<(), CliError> {
    for pair in sets {
        let (key, value) = pair
            .split_once('=')
            .ok_or_else(|| CliError::usage(format!("--set expects key=value, got `{pair}`")))?;
        config
            .set_key(key.trim(), value.trim())
            .map_err(|e| CliError::usage(format!("{e:#}")))?;
    }
    Ok(())
}

fn cmd_evolve(args: EvolveArgs) -> Result<(), CliError> {
    let mut config = match &args.config {
        Some(path) => RunConfig::load(path).map_err(|e| CliError::usage(format!("{e:#}")))?,
        None => RunConfig::default(),
    };
    apply_overrides(&mut config, &args.set)?;

    if let Some(s) = &args.strategy {
        config.set_key("evo.strategy", s).map_err(|e| CliError::usage(format!("{e:#}")))?;
    }
    if let Some(b) = &args.backend {
        config.backend = BackendChoice::from_label(b)
            .ok_or_else(|| CliError::usage(format!("unknown backend `{b}` (mock|live)")))?;
    }
    if let Some(seed) = args.seed {
        config.evolution.master_seed = seed;
    }
    if let Some(seeds) = &args.seeds {
        config.seeds = seeds.clone();
    }
    if let Some(n) = args.population {
        config.evolution.population_size = n;
    }
    if let Some(g) = args.generations {
        config.evolution.generations = g;
    }
    if let Some(k) = args.episodes {
        config.evolution.eval_episodes = k;
    }
    if let Some(b) = args.llm_budget {
        config.evolution.llm_budget = b;
    }
    if let Some(t) = args.tournament {
        config.evolution.tournament_size = t;
    }
    if let Some(t) = args.temperature {
        config.evolution.temperature = t;
    }
    if let Some(m) = &args.model {
        config.evolution.model_name = m.clone();
    }
    if let Some(out) = &args.out {
        config.out_dir = out.clone();
    }
    if args.transcript {
        config.transcript = true;
    }
    config.evolution.validate().map_err(CliError::usage)?;

    // Fail fast on a missing credential, before anything runs.
    let api_key = match config.backend {
        BackendChoice::Mock => None,
        BackendChoice::Live => {
            let var = &config.endpoint.api_key_env;
            match std::env::var(var) {
                Ok(key) if !key.is_empty() => Some(key),
                _ => {
                    return Err(CliError::usage(format!(
                        "AuthError: environment variable {var} is not set (required for --backend live)"
                    )));
                }
            }
        }
    };

    let batch = !config.seeds.is_empty();
    let master_seeds =
        if batch { config.seeds.clone() } else { vec![config.evolution.master_seed] };

    for master_seed in master_seeds {
        let mut effective = config.clone();
        effective.evolution.master_seed = master_seed;
        let dir = runstore::seed_run_dir(&config.out_dir, master_seed, batch);
        runstore::prepare_run_dir(&dir, &effective, args.force)
            .map_err(|e| CliError::usage(format!("{e:#}")))?;

        let started_at = SystemTime::now();
        let clock = Instant::now();

        let mut backend_box: Box<dyn OperatorBackend> = match config.backend {
            BackendChoice::Mock => Box::new(MockBackend),
            BackendChoice::Live => Box::new(LiveBackend::new(
                UreqExec,
                effective.endpoint.clone(),
                api_key.clone().expect("checked above"),
            )),
        };
        let mut backend: &mut dyn OperatorBackend = &mut *backend_box;

        let log = if effective.transcript {
            let mut recording = RecordingBackend::new(backend);
            let log = run_evolution(&effective.evolution, &effective.sim, &mut recording)
                .map_err(|e| CliError::runtime(format!("{e}")))?;
            runstore::write_transcript(&dir, &recording.calls)
                .map_err(|e| CliError::runtime(format!("{e:#}")))?;
            log
        } else {
            run_evolution(&effective.evolution, &effective.sim, &mut backend)
                .map_err(|e| CliError::runtime(format!("{e}")))?
        };

        runstore::write_run_outputs(&dir, &log, started_at, clock.elapsed())
            .map_err(|e| CliError::runtime(format!("{e:#}")))?;

        let best_report = log.best.report.as_ref();
        println!(
            "run {}: strategy={} generations={} llm_calls={} best_fitness={:.2} best_so_far={:.2} success_rate={:.2}",
            dir.display(),
            log.strategy.label(),
            log.records.len(),
            log.total_llm_calls,
            best_report.map_or(f64::NAN, |r| r.fitness),
            log.final_best_fitness(),
            best_report.map_or(0.0, |r| r.success_rate),
        );
        if log.budget_exhausted {
            println!(
                "note: LLM budget exhausted after {} calls; stopped at generation {} of {}",
                log.total_llm_calls,
                log.records.len(),
                log.generations_configured
            );
        }
    }
    Ok(())
}

fn load_policy(path: &PathBuf) -> Result<policyevo_core::lang::PolicyAst, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("reading {}: {e}", path.display())))?;
    parse_text(&text).map_err(|e| CliError::usage(format!("{}:{}", path.display(), e.diagnostic())))
}

fn sim_with_overrides(sets: &[String]) -> Result<sim::SimConfig, CliError> {
    let mut config = RunConfig::default();
    apply_overrides(&mut config, sets)?;
    Ok(config.sim)
}

fn cmd_eval(args: EvalArgs) -> Result<(), CliError> {
    if args.episodes == 0 {
        return Err(CliError::usage("--episodes must be at least 1"));
    }
    let ast = load_policy(&args.policy)?;
    let sim_config = sim_with_overrides(&args.set)?;
    let seeds = generation_seeds(args.seed, 0, args.episodes);
    let report = evaluate_policy(&sim_config, &ast, &seeds, sim_config.max_steps);

    println!("policy={}", args.policy.display());
    println!("episodes={}", report.episodes);
    println!("avg_reward={}", report.fitness);
    println!("success_rate={}", report.success_rate);
    if let Some(m) = report.metrics {
        println!("loc={}", m.lines_of_code);
        println!("cyclomatic_complexity={}", m.cyclomatic_complexity);
        println!("max_nesting_depth={}", m.max_nesting_depth);
    }
    let s = &report.failure_stats;
    println!(
        "landed={} crashed={} timeout={} out_of_bounds={}",
        s.landed_count, s.crash_count, s.timeout_count, s.out_of_bounds_count
    );
    if let Some(err) = &report.evaluation_error {
        println!("evaluation_error={}", err.describe());
    }
    Ok(())
}

fn cmd_report(args: ReportArgs) -> Result<(), CliError> {
    if args.dirs.is_empty() {
        return Err(CliError::usage("report needs at least one run directory"));
    }
    let mut named = Vec::new();
    for dir in &args.dirs {
        let log = runstore::load_run_log(dir).map_err(|e| CliError::usage(format!("{e:#}")))?;
        named.push((dir.display().to_string(), log));
    }
    let logs: Vec<_> = named.iter().map(|(_, l)| l.clone()).collect();
    let convergence =
        report::convergence_csv(&logs).map_err(|e| CliError::runtime(format!("{e:#}")))?;
    let summary = report::summary_csv(&named).map_err(|e| CliError::runtime(format!("{e:#}")))?;

    std::fs::create_dir_all(&args.out)
        .map_err(|e| CliError::runtime(format!("creating {}: {e}", args.out.display())))?;
    let convergence_path = args.out.join("convergence.csv");
    let summary_path = args.out.join("summary.csv");
    std::fs::write(&convergence_path, convergence)
        .map_err(|e| CliError::runtime(format!("{e}")))?;
    std::fs::write(&summary_path, summary).map_err(|e| CliError::runtime(format!("{e}")))?;
    println!("wrote {}", convergence_path.display());
    println!("wrote {}", summary_path.display());
    Ok(())
}

fn cmd_trace(args: TraceArgs) -> Result<(), CliError> {
    let ast = load_policy(&args.policy)?;
    let sim_config = sim_with_overrides(&args.set)?;
    let trace = sim::run_episode(
        &sim_config,
        |s| evaluate(&ast, s, DEFAULT_EVAL_BUDGET).map(|a| a.index() as i64),
        args.seed,
        sim_config.max_steps,
    )
    .map_err(|e| match e {
        sim::EpisodeFailure::Policy { step, cause } => {
            CliError::runtime(format!("policy failed at step {step}: {cause}"))
        }
        sim::EpisodeFailure::InvalidAction { step, value } => {
            CliError::runtime(format!("invalid action {value} at step {step}"))
        }
    })?;
    std::fs::write(&args.out, trace.to_line_records())
        .map_err(|e| CliError::runtime(format!("writing {}: {e}", args.out.display())))?;
    println!(
        "wrote {} ({} steps, termination={}, total_reward={}, success={})",
        args.out.display(),
        trace.steps,
        trace.termination_kind.label(),
        trace.total_reward,
        trace.success
    );
    Ok(())
}
