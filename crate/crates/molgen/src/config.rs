//! Run configuration: one TOML document with optional sections, dotted-path
//! command-line overrides, and config-relative path resolution.
//!
//! Every key has a default, so the empty document is a valid configuration;
//! unknown keys are rejected rather than silently ignored. Overrides take
//! the form `section.key=value`, where the value is parsed as a TOML value
//! and falls back to a string when it does not parse as one (so
//! `search.budget=500` is an integer and `search.ablation=no-ga` a string).
//! Relative paths in `[paths]` resolve against the directory containing
//! the config file, never the working directory.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{Ablation, CalibrationConfig, EngineConfig};
use crate::reward::SurrogateOracle;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config: {0}")]
    Io(#[from] std::io::Error),
    #[error("config is not valid TOML: {0}")]
    Parse(String),
    #[error("config is invalid: {0}")]
    Invalid(String),
    #[error("override {spec:?} is not of the form section.key=value")]
    BadOverride { spec: String },
    #[error("override {spec:?} descends into the non-table key {segment:?}")]
    OverridePath { spec: String, segment: String },
}

/// Named ablation of the search mechanisms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AblationMode {
    /// Genetic layer and self-training both active.
    Full,
    /// Genetic layer disabled.
    NoGa,
    /// Self-training disabled; rollouts keep using the prior.
    NoSelfTraining,
    /// Both disabled: plain guided tree search.
    TreeOnly,
}

impl AblationMode {
    pub const ALL: [AblationMode; 4] = [
        AblationMode::Full,
        AblationMode::NoGa,
        AblationMode::NoSelfTraining,
        AblationMode::TreeOnly,
    ];

    pub fn flags(self) -> Ablation {
        match self {
            AblationMode::Full => Ablation {
                use_ga: true,
                use_self_training: true,
            },
            AblationMode::NoGa => Ablation {
                use_ga: false,
                use_self_training: true,
            },
            AblationMode::NoSelfTraining => Ablation {
                use_ga: true,
                use_self_training: false,
            },
            AblationMode::TreeOnly => Ablation {
                use_ga: false,
                use_self_training: false,
            },
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            AblationMode::Full => "full",
            AblationMode::NoGa => "no-ga",
            AblationMode::NoSelfTraining => "no-self-training",
            AblationMode::TreeOnly => "tree-only",
        }
    }
}

impl FromStr for AblationMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AblationMode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                format!("unknown ablation {s:?} (expected full, no-ga, no-self-training, or tree-only)")
            })
    }
}

impl std::fmt::Display for AblationMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Prior policy hyperparameters (used by `fit-prior`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PriorSection {
    /// Context length plus one of the count model.
    pub order: usize,
    /// Additive smoothing constant.
    pub smoothing: f64,
}

impl Default for PriorSection {
    fn default() -> Self {
        PriorSection {
            order: 6,
            smoothing: 0.05,
        }
    }
}

/// Input and output locations. Relative paths resolve against the config
/// file's directory.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PathsSection {
    /// Corpus of molecule strings, one per line, for `fit-prior`.
    pub corpus: Option<PathBuf>,
    /// Fitted prior policy; written by `fit-prior`, read by later stages.
    pub policy: Option<PathBuf>,
    /// Target profile JSON.
    pub target: Option<PathBuf>,
    /// Scoring panel JSON used for the reward's z-scores.
    pub panel: Option<PathBuf>,
    /// Held-out panel for verification z-scores (optional).
    pub verify_panel: Option<PathBuf>,
    /// Calibrated reward parameters; written by `calibrate`. When absent,
    /// `run` falls back to the default parameters.
    pub reward: Option<PathBuf>,
    /// Directory receiving `results.jsonl`, `metrics.csv`, `summary.json`.
    pub out_dir: Option<PathBuf>,
}

/// Search loop knobs; mirrors [`EngineConfig`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SearchSection {
    pub budget: usize,
    pub max_iterations: usize,
    pub mcts_steps: usize,
    pub ga_children: usize,
    pub n_rollouts: usize,
    pub self_mix: f64,
    pub c_puct: f64,
    pub queue_capacity: usize,
    pub self_train_batch: usize,
    pub self_train_weight: f64,
    pub mutation_rate: f64,
    pub parent_attempts: usize,
    pub ablation: AblationMode,
}

impl Default for SearchSection {
    fn default() -> Self {
        let e = EngineConfig::default();
        SearchSection {
            budget: e.budget,
            max_iterations: e.max_iterations,
            mcts_steps: e.mcts_steps,
            ga_children: e.ga_children,
            n_rollouts: e.n_rollouts,
            self_mix: e.self_mix,
            c_puct: e.c_puct,
            queue_capacity: e.queue_capacity,
            self_train_batch: e.self_train_batch,
            self_train_weight: e.self_train_weight,
            mutation_rate: e.mutation_rate,
            parent_attempts: e.parent_attempts,
            ablation: AblationMode::Full,
        }
    }
}

/// Threshold calibration knobs; mirrors [`CalibrationConfig`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CalibrationSection {
    pub samples: usize,
    pub alpha: f64,
    pub beta: f64,
    pub theta_t: f64,
    pub win_rate_low: f64,
    pub win_rate_high: f64,
}

impl Default for CalibrationSection {
    fn default() -> Self {
        let c = CalibrationConfig::default();
        CalibrationSection {
            samples: c.samples,
            alpha: c.alpha,
            beta: c.beta,
            theta_t: c.theta_t,
            win_rate_low: c.win_rate_low,
            win_rate_high: c.win_rate_high,
        }
    }
}

/// Built-in oracle knobs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleSection {
    /// Bias of the clamped linear surrogate oracle.
    pub bias: f64,
}

impl Default for OracleSection {
    fn default() -> Self {
        OracleSection { bias: 0.0 }
    }
}

/// The whole configuration document.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Seed for the run generator; calibration derives its own stream.
    pub seed: u64,
    pub prior: PriorSection,
    pub paths: PathsSection,
    pub search: SearchSection,
    pub calibration: CalibrationSection,
    pub oracle: OracleSection,
}

impl RunConfig {
    /// The engine view of this configuration.
    pub fn engine_config(&self) -> EngineConfig {
        let s = &self.search;
        EngineConfig {
            seed: self.seed,
            budget: s.budget,
            max_iterations: s.max_iterations,
            mcts_steps: s.mcts_steps,
            ga_children: s.ga_children,
            n_rollouts: s.n_rollouts,
            self_mix: s.self_mix,
            c_puct: s.c_puct,
            queue_capacity: s.queue_capacity,
            self_train_batch: s.self_train_batch,
            self_train_weight: s.self_train_weight,
            mutation_rate: s.mutation_rate,
            parent_attempts: s.parent_attempts,
            ablation: s.ablation.flags(),
        }
    }

    /// The calibration view of this configuration.
    pub fn calibration_config(&self) -> CalibrationConfig {
        let c = &self.calibration;
        CalibrationConfig {
            samples: c.samples,
            alpha: c.alpha,
            beta: c.beta,
            theta_t: c.theta_t,
            win_rate_low: c.win_rate_low,
            win_rate_high: c.win_rate_high,
        }
    }

    pub fn oracle(&self) -> SurrogateOracle {
        SurrogateOracle {
            bias: self.oracle.bias,
        }
    }

    /// Resolves every relative path against `dir`.
    pub fn resolve_paths(&mut self, dir: &Path) {
        let resolve = |p: &mut Option<PathBuf>| {
            if let Some(path) = p {
                if path.is_relative() {
                    *path = dir.join(&path);
                }
            }
        };
        resolve(&mut self.paths.corpus);
        resolve(&mut self.paths.policy);
        resolve(&mut self.paths.target);
        resolve(&mut self.paths.panel);
        resolve(&mut self.paths.verify_panel);
        resolve(&mut self.paths.reward);
        resolve(&mut self.paths.out_dir);
    }

    /// Range checks beyond what deserialization enforces.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |msg: String| Err(ConfigError::Invalid(msg));
        if self.prior.order < 1 {
            return bad("prior.order must be at least 1".into());
        }
        if !(self.prior.smoothing > 0.0) {
            return bad("prior.smoothing must be positive".into());
        }
        let s = &self.search;
        for (key, v) in [
            ("search.budget", s.budget),
            ("search.max_iterations", s.max_iterations),
            ("search.mcts_steps", s.mcts_steps),
            ("search.ga_children", s.ga_children),
            ("search.n_rollouts", s.n_rollouts),
            ("search.queue_capacity", s.queue_capacity),
            ("search.self_train_batch", s.self_train_batch),
            ("search.parent_attempts", s.parent_attempts),
        ] {
            if v < 1 {
                return bad(format!("{key} must be at least 1"));
            }
        }
        if !(0.0..=1.0).contains(&s.self_mix) {
            return bad("search.self_mix must lie in [0, 1]".into());
        }
        if !(0.0..=1.0).contains(&s.mutation_rate) {
            return bad("search.mutation_rate must lie in [0, 1]".into());
        }
        if !(s.c_puct >= 0.0) {
            return bad("search.c_puct must be non-negative".into());
        }
        if !(s.self_train_weight > 0.0) {
            return bad("search.self_train_weight must be positive".into());
        }
        let c = &self.calibration;
        if c.samples < 1 {
            return bad("calibration.samples must be at least 1".into());
        }
        if !(c.alpha < 0.0) {
            return bad("calibration.alpha must be negative".into());
        }
        if !(c.beta >= 0.0) {
            return bad("calibration.beta must be non-negative".into());
        }
        if !(c.win_rate_low > 0.0 && c.win_rate_low <= c.win_rate_high && c.win_rate_high < 1.0) {
            return bad("calibration win band must satisfy 0 < low <= high < 1".into());
        }
        Ok(())
    }
}

/// Parses a leaf override value: TOML value syntax first (`500`, `0.8`,
/// `true`, `"quoted"`), bare-string fallback otherwise.
fn parse_override_value(raw: &str) -> toml::Value {
    format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|doc| doc.get("v").cloned())
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

fn apply_override(root: &mut toml::Value, spec: &str) -> Result<(), ConfigError> {
    let err = || ConfigError::BadOverride {
        spec: spec.to_string(),
    };
    let (path, raw) = spec.split_once('=').ok_or_else(err)?;
    let segments: Vec<&str> = path.split('.').collect();
    if path.is_empty() || segments.iter().any(|s| s.is_empty()) {
        return Err(err());
    }
    let leaf = parse_override_value(raw);
    let mut cur = root;
    for seg in &segments[..segments.len() - 1] {
        let table = cur.as_table_mut().ok_or_else(|| ConfigError::OverridePath {
            spec: spec.to_string(),
            segment: seg.to_string(),
        })?;
        cur = table
            .entry(seg.to_string())
            .or_insert(toml::Value::Table(toml::map::Map::new()));
    }
    let last = segments[segments.len() - 1];
    let table = cur.as_table_mut().ok_or_else(|| ConfigError::OverridePath {
        spec: spec.to_string(),
        segment: last.to_string(),
    })?;
    table.insert(last.to_string(), leaf);
    Ok(())
}

/// Parses a config document, applies overrides, and validates ranges.
/// Paths are left as written; use [`load_config`] to also resolve them.
pub fn parse_config(text: &str, overrides: &[String]) -> Result<RunConfig, ConfigError> {
    let table = text
        .parse::<toml::Table>()
        .map_err(|e| ConfigError::Parse(e.to_string()))?;
    let mut value = toml::Value::Table(table);
    for spec in overrides {
        apply_override(&mut value, spec)?;
    }
    let cfg: RunConfig = value
        .try_into()
        .map_err(|e| ConfigError::Invalid(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

/// Reads, parses, overrides, validates, and resolves paths against the
/// config file's directory.
pub fn load_config(path: &Path, overrides: &[String]) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path)?;
    let mut cfg = parse_config(&text, overrides)?;
    cfg.resolve_paths(path.parent().unwrap_or(Path::new(".")));
    Ok(cfg)
}
