//! Command set over the library: fit a prior, calibrate the reward, run a
//! budgeted search, summarize its outputs, and validate single strings.
//!
//! Every stage takes `--config <file>` plus any number of
//! `--set section.key=value` overrides. Exit codes: 0 on success, 1 on any
//! failure (including an invalid string under `validate`), 2 on usage
//! errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use thiserror::Error;

use crate::chem;
use crate::config::{load_config, ConfigError, RunConfig};
use crate::engine::{
    self, calibrate, CalibrationOutcome, EngineError, RunResult, SearchInputs,
};
use crate::policy::{PolicyError, PolicyModel, Vocab};
use crate::reward::{ProfileError, ProfilePanel, RewardParams, SampleProfile};

#[derive(Debug, Error)]
enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("config is missing paths.{key}, required by {command}")]
    MissingPath {
        key: &'static str,
        command: &'static str,
    },
    #[error("{path}: {reason}")]
    BadFile { path: PathBuf, reason: String },
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

fn io_at<P: AsRef<Path>>(path: P) -> impl FnOnce(std::io::Error) -> CliError {
    let context = path.as_ref().display().to_string();
    move |source| CliError::Io { context, source }
}

#[derive(Parser)]
#[command(
    name = "molgen",
    version,
    about = "Goal-directed molecular string generation"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit the prior policy on a corpus of molecule strings.
    FitPrior(StageArgs),
    /// Calibrate the reward thresholds against the prior policy.
    Calibrate(StageArgs),
    /// Execute one budgeted search run and write its outputs.
    Run(StageArgs),
    /// Summarize the outputs of a finished run.
    Report(ReportArgs),
    /// Check a single molecule string; prints VALID or the positioned error.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct StageArgs {
    /// TOML configuration file.
    #[arg(long, short = 'c')]
    config: PathBuf,
    /// Dotted-path override, e.g. --set search.budget=500 (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Args)]
struct ReportArgs {
    #[command(flatten)]
    stage: StageArgs,
    /// Number of top records to list.
    #[arg(long, default_value_t = 10)]
    top: usize,
}

#[derive(Args)]
struct ValidateArgs {
    /// The molecule string to check.
    string: String,
}

/// Parses the process arguments and dispatches. The binary's whole `main`.
pub fn main_entry() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::FAILURE
        }
    }
}

fn dispatch(command: Command) -> Result<ExitCode, CliError> {
    match command {
        Command::FitPrior(args) => fit_prior(&load(&args)?),
        Command::Calibrate(args) => run_calibrate(&load(&args)?),
        Command::Run(args) => run_search(&load(&args)?),
        Command::Report(args) => report(&load(&args.stage)?, args.top),
        Command::Validate(args) => Ok(validate(&args.string)),
    }
}

fn load(args: &StageArgs) -> Result<RunConfig, CliError> {
    Ok(load_config(&args.config, &args.set)?)
}

fn require<'a>(
    path: &'a Option<PathBuf>,
    key: &'static str,
    command: &'static str,
) -> Result<&'a Path, CliError> {
    path.as_deref()
        .ok_or(CliError::MissingPath { key, command })
}

/// Reads a corpus file: one string per line, blank lines and `#` comments
/// skipped.
fn read_corpus(path: &Path) -> Result<Vec<String>, CliError> {
    let text = std::fs::read_to_string(path).map_err(io_at(path))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(String::from)
        .collect())
}

fn create_parent(path: &Path) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir).map_err(io_at(dir))?;
        }
    }
    Ok(())
}

fn fit_prior(cfg: &RunConfig) -> Result<ExitCode, CliError> {
    let corpus_path = require(&cfg.paths.corpus, "corpus", "fit-prior")?;
    let policy_path = require(&cfg.paths.policy, "policy", "fit-prior")?;
    let corpus = read_corpus(corpus_path)?;
    let model = PolicyModel::fit(Vocab::full(), cfg.prior.order, cfg.prior.smoothing, &corpus)?;
    create_parent(policy_path)?;
    model.save(policy_path)?;
    println!(
        "fitted prior: {} contexts from {} strings (order {})",
        model.context_count(),
        corpus.len(),
        model.order()
    );
    println!("wrote {}", policy_path.display());
    Ok(ExitCode::SUCCESS)
}

/// Reads reward parameters: either a full calibration outcome or a bare
/// parameter object.
fn load_reward_params(path: &Path) -> Result<(RewardParams, Option<f64>), CliError> {
    let text = std::fs::read_to_string(path).map_err(io_at(path))?;
    if let Ok(outcome) = serde_json::from_str::<CalibrationOutcome>(&text) {
        return Ok((outcome.params, Some(outcome.achieved_win_rate)));
    }
    let params: RewardParams =
        serde_json::from_str(&text).map_err(|e| CliError::BadFile {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
    Ok((params, None))
}

fn run_calibrate(cfg: &RunConfig) -> Result<ExitCode, CliError> {
    let policy = PolicyModel::load(require(&cfg.paths.policy, "policy", "calibrate")?)?;
    let target = SampleProfile::load(require(&cfg.paths.target, "target", "calibrate")?)?;
    let panel = ProfilePanel::load(require(&cfg.paths.panel, "panel", "calibrate")?)?;
    let reward_path = require(&cfg.paths.reward, "reward", "calibrate")?;
    let oracle = cfg.oracle();
    let outcome = calibrate(
        &policy,
        &oracle,
        &target,
        &panel,
        &cfg.calibration_config(),
        cfg.seed,
    )?;
    create_parent(reward_path)?;
    let text = serde_json::to_string_pretty(&outcome).expect("outcome serializes");
    crate::util::write_atomic(reward_path, &text).map_err(io_at(reward_path))?;
    println!(
        "calibrated theta_z = {} (win rate {} over {} valid samples)",
        outcome.params.theta_z, outcome.achieved_win_rate, outcome.samples
    );
    println!("wrote {}", reward_path.display());
    Ok(ExitCode::SUCCESS)
}

/// The summary file written next to the run results.
#[derive(Serialize)]
struct RunSummary<'a> {
    seed: u64,
    ablation: &'a str,
    budget: usize,
    budget_used: usize,
    iterations: usize,
    queue_size: usize,
    tree_nodes: usize,
    shortcut_nodes: usize,
    final_win_rate: f64,
    calibrated_win_rate: Option<f64>,
    theta_z: f64,
    mean_top10_reward: Option<f64>,
    mean_top10_y_z: Option<f64>,
    mean_top10_y_z_verify: Option<f64>,
}

fn run_search(cfg: &RunConfig) -> Result<ExitCode, CliError> {
    let policy = PolicyModel::load(require(&cfg.paths.policy, "policy", "run")?)?;
    let target = SampleProfile::load(require(&cfg.paths.target, "target", "run")?)?;
    let panel = ProfilePanel::load(require(&cfg.paths.panel, "panel", "run")?)?;
    let verify_panel = match &cfg.paths.verify_panel {
        Some(p) => Some(ProfilePanel::load(p)?),
        None => None,
    };
    let (params, calibrated_win_rate) = match &cfg.paths.reward {
        Some(p) => load_reward_params(p)?,
        None => (RewardParams::default(), None),
    };
    let out_dir = require(&cfg.paths.out_dir, "out_dir", "run")?;
    let oracle = cfg.oracle();

    let inputs = SearchInputs {
        p_gamma: &policy,
        oracle: &oracle,
        target: &target,
        panel: &panel,
        verify_panel: verify_panel.as_ref(),
        params: &params,
    };
    let engine_cfg = cfg.engine_config();
    let result = engine::run(&inputs, &engine_cfg);

    std::fs::create_dir_all(out_dir).map_err(io_at(out_dir))?;
    let results_path = out_dir.join("results.jsonl");
    let metrics_path = out_dir.join("metrics.csv");
    let summary_path = out_dir.join("summary.json");
    let chi_path = out_dir.join("policy_chi.json");
    engine::write_results_jsonl(&results_path, &result.records).map_err(io_at(&results_path))?;
    engine::write_metrics_csv(&metrics_path, &result.metrics).map_err(io_at(&metrics_path))?;
    result.p_chi.save(&chi_path)?;
    let summary = summarize(cfg, &engine_cfg.seed, &result, calibrated_win_rate);
    let text = serde_json::to_string_pretty(&summary).expect("summary serializes");
    crate::util::write_atomic(&summary_path, &text).map_err(io_at(&summary_path))?;

    println!(
        "run complete: {} valid samplings over {} iterations",
        result.budget_used,
        result.metrics.len()
    );
    if let Some(best) = result.records.first() {
        println!("best reward {} ({})", best.reward, best.canonical);
    }
    println!("wrote {}", out_dir.display());
    Ok(ExitCode::SUCCESS)
}

fn summarize<'a>(
    cfg: &'a RunConfig,
    seed: &u64,
    result: &RunResult,
    calibrated_win_rate: Option<f64>,
) -> RunSummary<'a> {
    RunSummary {
        seed: *seed,
        ablation: cfg.search.ablation.name(),
        budget: cfg.search.budget,
        budget_used: result.budget_used,
        iterations: result.metrics.len(),
        queue_size: result.records.len(),
        tree_nodes: result.tree_nodes,
        shortcut_nodes: result.shortcut_nodes,
        final_win_rate: result.metrics.last().map_or(0.0, |m| m.win_rate),
        calibrated_win_rate,
        theta_z: result.params.theta_z,
        mean_top10_reward: result.mean_top_reward(10),
        mean_top10_y_z: result.mean_top_z(10),
        mean_top10_y_z_verify: result.mean_top_z_verify(10),
    }
}

fn report(cfg: &RunConfig, top: usize) -> Result<ExitCode, CliError> {
    let out_dir = require(&cfg.paths.out_dir, "out_dir", "report")?;
    let summary_path = out_dir.join("summary.json");
    let results_path = out_dir.join("results.jsonl");
    let summary_text = std::fs::read_to_string(&summary_path).map_err(io_at(&summary_path))?;
    let summary: serde_json::Value =
        serde_json::from_str(&summary_text).map_err(|e| CliError::BadFile {
            path: summary_path.clone(),
            reason: e.to_string(),
        })?;
    let records = engine::read_results_jsonl(&results_path).map_err(io_at(&results_path))?;

    let field = |key: &str| match summary.get(key) {
        Some(serde_json::Value::String(s)) => s.clone(),
        Some(v) => v.to_string(),
        None => "null".to_string(),
    };
    println!(
        "seed {}  ablation {}  budget {} (used {})  iterations {}",
        field("seed"),
        field("ablation"),
        field("budget"),
        field("budget_used"),
        field("iterations")
    );
    println!(
        "queue {}  tree nodes {} ({} shortcut)",
        field("queue_size"),
        field("tree_nodes"),
        field("shortcut_nodes")
    );
    println!(
        "final win rate {}  calibrated {}  theta_z {}",
        field("final_win_rate"),
        field("calibrated_win_rate"),
        field("theta_z")
    );
    println!(
        "top-10 means: reward {}  y_z {}  y_z_verify {}",
        field("mean_top10_reward"),
        field("mean_top10_y_z"),
        field("mean_top10_y_z_verify")
    );
    let n = top.min(records.len());
    println!("top {} of {} records:", n, records.len());
    println!("{:>5}  {:>12}  {:>9}  {:>9}  molecule", "rank", "reward", "y_z", "y_z_vrfy");
    for r in &records[..n] {
        let verify = r
            .y_z_verify
            .map_or("-".to_string(), |v| format!("{v:.4}"));
        println!(
            "{:>5}  {:>12.6}  {:>9.4}  {:>9}  {}",
            r.rank, r.reward, r.y_z, verify, r.canonical
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn validate(s: &str) -> ExitCode {
    let report = chem::is_valid(s);
    if report.valid {
        println!("VALID");
        ExitCode::SUCCESS
    } else {
        let err = report.error.expect("invalid strings carry an error");
        println!("{err}");
        ExitCode::FAILURE
    }
}
