//! The budgeted run loop that couples tree search, the genetic layer, and
//! policy self-training, plus threshold calibration and result persistence.
//!
//! # Run loop
//!
//! A run consumes a budget of *valid samplings*: every time a syntactically
//! and chemically valid molecule is scored against the oracle, one unit of
//! budget is spent (duplicates included; each scoring is an oracle call).
//! Invalid strings cost nothing.
//!
//! Iterations repeat until the budget is exhausted, checked at iteration
//! boundaries so every recorded iteration is complete. Each iteration runs
//! four phases in order:
//!
//! 1. **Tree search**: a fixed number of [`mcts::step`] calls. Valid
//!    rollout and terminal strings are scored, budgeted, and offered to the
//!    elite queue.
//! 2. **Genetic round** (unless ablated): parents are drawn alternately
//!    from the queue and the prior; fresh prior parents are scored and
//!    budgeted like any sampling. Offspring are scored, budgeted, offered
//!    to the queue, and grafted into the tree as shortcut paths carrying
//!    their observed reward.
//! 3. **Self-training** (unless ablated): the queue's current best strings
//!    are folded into the self-trained policy as weighted counts, so later
//!    rollouts lean toward regions that already scored well.
//! 4. **Metrics**: one row per iteration with the iteration's win rate and
//!    mean reward over its own valid samplings.
//!
//! A single seeded generator drives the whole run, so equal seeds and
//! inputs reproduce results exactly, byte for byte in the output files.
//!
//! # Calibration
//!
//! [`calibrate`] fixes the activity threshold and bisects the selectivity
//! threshold until molecules drawn from the prior win at a small target
//! rate (1 to 5 percent by default), which puts the run's reward signal in
//! a regime where wins are rare but reachable. Calibration uses its own
//! generator (derived from the seed and a fixed salt) so it never perturbs
//! the run stream of the same seed.

use std::path::Path;

use rand::SeedableRng as _;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chem::{self, canonical_form};
use crate::ga::{self, ParentOrigin};
use crate::mcts::{self, SearchTree, StepContext};
use crate::policy::PolicyModel;
use crate::queue::GenerationQueue;
use crate::reward::{
    is_winning, panel_values, reward, score, z_score, ProfilePanel, RewardParams, SampleProfile,
    ScoredMolecule, ValueOracle,
};

/// XORed into the seed for the calibration generator so calibration and
/// the run itself consume independent random streams.
pub const CALIBRATION_SEED_SALT: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("prior policy produced only {valid} valid molecules in {draws} draws")]
    DryPrior { valid: usize, draws: usize },
}

/// Which search mechanisms are active. Disabling both reduces the run to
/// plain guided tree search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ablation {
    pub use_ga: bool,
    pub use_self_training: bool,
}

impl Default for Ablation {
    fn default() -> Self {
        Ablation {
            use_ga: true,
            use_self_training: true,
        }
    }
}

/// Tunable knobs of a run. `Default` gives the standard configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    /// Seed for the run's generator.
    pub seed: u64,
    /// Valid samplings allowed before the run stops.
    pub budget: usize,
    /// Hard cap on iterations, guarding against a prior so weak that no
    /// iteration ever produces a valid sampling.
    pub max_iterations: usize,
    /// Tree-search steps per iteration.
    pub mcts_steps: usize,
    /// Offspring bred per genetic round (also the number of parents drawn).
    pub ga_children: usize,
    /// Rollouts per tree expansion.
    pub n_rollouts: usize,
    /// Fraction of rollouts drawn from the self-trained policy.
    pub self_mix: f64,
    /// Exploration constant of the tree policy.
    pub c_puct: f64,
    /// Elite queue capacity.
    pub queue_capacity: usize,
    /// Queue prefix folded into the self-trained policy each iteration.
    pub self_train_batch: usize,
    /// Count weight for each self-training string.
    pub self_train_weight: f64,
    /// Probability of mutating each offspring.
    pub mutation_rate: f64,
    /// Validity-checked prior draws allowed per needed parent.
    pub parent_attempts: usize,
    pub ablation: Ablation,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            seed: 0,
            budget: 10_000,
            max_iterations: 100_000,
            mcts_steps: 8,
            ga_children: 16,
            n_rollouts: 8,
            self_mix: 0.8,
            c_puct: 2.5,
            queue_capacity: 1_000,
            self_train_batch: 64,
            self_train_weight: 1.0,
            mutation_rate: 0.3,
            parent_attempts: 200,
            ablation: Ablation::default(),
        }
    }
}

/// Borrowed problem definition for [`run`].
pub struct SearchInputs<'a> {
    pub p_gamma: &'a PolicyModel,
    pub oracle: &'a dyn ValueOracle,
    pub target: &'a SampleProfile,
    /// Panel used for the z-scores that drive the reward.
    pub panel: &'a ProfilePanel,
    /// Held-out panel; when present, every final entry also gets a
    /// verification z-score computed against it.
    pub verify_panel: Option<&'a ProfilePanel>,
    pub params: &'a RewardParams,
}

/// Aggregates of one completed iteration, over its own valid samplings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationMetrics {
    pub iteration: u64,
    pub valid_samplings: usize,
    pub wins: usize,
    /// `wins / valid_samplings`, 0 when nothing valid was drawn.
    pub win_rate: f64,
    /// Mean reward over the iteration's valid samplings, 0 when none.
    pub mean_reward: f64,
    /// Valid samplings consumed by the whole run so far.
    pub cumulative_budget: usize,
    pub queue_size: usize,
    pub tree_nodes: usize,
}

/// One line of the final results, ordered best-first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    /// 1-based position under reward-descending order.
    pub rank: usize,
    pub canonical: String,
    pub y_t: f64,
    pub y_z: f64,
    pub reward: f64,
    pub winning: bool,
    /// Iteration that admitted the molecule.
    pub iteration: u64,
    /// z-score against the verification panel, when one was supplied.
    pub y_z_verify: Option<f64>,
}

/// Everything a finished run produced.
#[derive(Debug, Clone)]
pub struct RunResult {
    /// Final queue contents, reward-descending.
    pub records: Vec<ResultRecord>,
    pub metrics: Vec<IterationMetrics>,
    /// Valid samplings actually consumed (the final iteration completes,
    /// so this can exceed the budget by at most one iteration's worth).
    pub budget_used: usize,
    pub tree_nodes: usize,
    pub shortcut_nodes: usize,
    /// The self-trained policy as of the end of the run.
    pub p_chi: PolicyModel,
    /// Echo of the reward parameters the run used.
    pub params: RewardParams,
}

impl RunResult {
    fn mean_top(&self, n: usize, f: impl Fn(&ResultRecord) -> Option<f64>) -> Option<f64> {
        let take = n.min(self.records.len());
        if take == 0 {
            return None;
        }
        let mut sum = 0.0;
        for r in &self.records[..take] {
            sum += f(r)?;
        }
        Some(sum / take as f64)
    }

    /// Mean reward of the `n` best records.
    pub fn mean_top_reward(&self, n: usize) -> Option<f64> {
        self.mean_top(n, |r| Some(r.reward))
    }

    /// Mean training-panel z-score of the `n` best records.
    pub fn mean_top_z(&self, n: usize) -> Option<f64> {
        self.mean_top(n, |r| Some(r.y_z))
    }

    /// Mean verification-panel z-score of the `n` best records; `None`
    /// when no verification panel was supplied.
    pub fn mean_top_z_verify(&self, n: usize) -> Option<f64> {
        self.mean_top(n, |r| r.y_z_verify)
    }
}

/// Per-iteration accumulator shared by every scoring site.
#[derive(Default)]
struct IterStats {
    valid: usize,
    wins: usize,
    reward_sum: f64,
}

impl IterStats {
    fn record(&mut self, s: &ScoredMolecule) {
        self.valid += 1;
        self.reward_sum += s.reward;
        if s.winning {
            self.wins += 1;
        }
    }
}

/// Offers a scored molecule to the queue when its canonical form fits the
/// policy vocabulary (and therefore the tree's token space); returns the
/// encoding when it does.
fn try_admit(
    queue: &mut GenerationQueue,
    p_gamma: &PolicyModel,
    canonical: &str,
    scored: ScoredMolecule,
    iteration: u64,
) -> Option<Vec<u16>> {
    let ids = p_gamma.vocab().encode(canonical).ok()?;
    queue.admit(canonical, scored, iteration);
    Some(ids)
}

/// Executes one full budgeted search. Infallible by construction: a failed
/// genetic round (no parents anywhere) just skips that phase.
pub fn run(inputs: &SearchInputs<'_>, cfg: &EngineConfig) -> RunResult {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut tree = SearchTree::new(inputs.p_gamma.vocab().len());
    let mut queue = GenerationQueue::new(cfg.queue_capacity);
    let mut p_chi = inputs.p_gamma.clone();
    let mut metrics: Vec<IterationMetrics> = Vec::new();
    let mut budget_used = 0usize;

    for iteration in 0..cfg.max_iterations as u64 {
        if budget_used >= cfg.budget {
            break;
        }
        let mut stats = IterStats::default();

        // Phase 1: tree search.
        for _ in 0..cfg.mcts_steps {
            let mut ctx = StepContext {
                p_gamma: inputs.p_gamma,
                p_chi: &p_chi,
                oracle: inputs.oracle,
                target: inputs.target,
                panel: inputs.panel,
                params: inputs.params,
                c_puct: cfg.c_puct,
                n_rollouts: cfg.n_rollouts,
                self_mix: cfg.self_mix,
                rng: &mut rng,
            };
            let outcome = mcts::step(&mut tree, &mut ctx);
            for sample in &outcome.samples {
                if let Some(scored) = sample.score {
                    budget_used += 1;
                    stats.record(&scored);
                    let g = chem::parse_smiles(&sample.string)
                        .expect("scored samples parsed during the step");
                    try_admit(&mut queue, inputs.p_gamma, &canonical_form(&g), scored, iteration);
                }
            }
        }

        // Phase 2: genetic round.
        if cfg.ablation.use_ga {
            if let Ok(parents) = ga::select_parents(
                &queue,
                inputs.p_gamma,
                cfg.ga_children,
                cfg.parent_attempts,
                &mut rng,
            ) {
                for parent in &parents {
                    if parent.origin == ParentOrigin::Prior {
                        let scored = score(
                            inputs.oracle,
                            &parent.graph,
                            inputs.target,
                            inputs.panel,
                            inputs.params,
                        );
                        budget_used += 1;
                        stats.record(&scored);
                        try_admit(
                            &mut queue,
                            inputs.p_gamma,
                            &canonical_form(&parent.graph),
                            scored,
                            iteration,
                        );
                    }
                }
                let children = ga::breed(&parents, cfg.ga_children, cfg.mutation_rate, &mut rng);
                for child in &children {
                    let scored =
                        score(inputs.oracle, child, inputs.target, inputs.panel, inputs.params);
                    budget_used += 1;
                    stats.record(&scored);
                    if let Some(ids) = try_admit(
                        &mut queue,
                        inputs.p_gamma,
                        &canonical_form(child),
                        scored,
                        iteration,
                    ) {
                        tree.insert_shortcut(&ids, scored.reward, scored.winning);
                    }
                }
            }
        }

        // Phase 3: self-training.
        if cfg.ablation.use_self_training && !queue.is_empty() {
            let batch: Vec<String> = queue
                .top(cfg.self_train_batch)
                .iter()
                .map(|e| e.canonical.clone())
                .collect();
            p_chi
                .fine_tune(&batch, cfg.self_train_weight)
                .expect("queue entries encode under the policy vocabulary");
        }

        // Phase 4: metrics.
        let valid = stats.valid;
        metrics.push(IterationMetrics {
            iteration,
            valid_samplings: valid,
            wins: stats.wins,
            win_rate: if valid > 0 {
                stats.wins as f64 / valid as f64
            } else {
                0.0
            },
            mean_reward: if valid > 0 {
                stats.reward_sum / valid as f64
            } else {
                0.0
            },
            cumulative_budget: budget_used,
            queue_size: queue.len(),
            tree_nodes: tree.len(),
        });
    }

    let records = queue
        .top(queue.len())
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let y_z_verify = inputs.verify_panel.map(|vp| {
                let g = chem::parse_smiles(&e.canonical).expect("queue entries are valid");
                z_score(e.score.y_t, &panel_values(inputs.oracle, &g, vp))
            });
            ResultRecord {
                rank: i + 1,
                canonical: e.canonical.clone(),
                y_t: e.score.y_t,
                y_z: e.score.y_z,
                reward: e.score.reward,
                winning: e.score.winning,
                iteration: e.iteration,
                y_z_verify,
            }
        })
        .collect();

    RunResult {
        records,
        metrics,
        budget_used,
        tree_nodes: tree.len(),
        shortcut_nodes: tree.shortcut_nodes(),
        p_chi,
        params: *inputs.params,
    }
}

/// Knobs of [`calibrate`]. `Default` fixes the activity threshold at 1 and
/// targets a prior win rate between 1 and 5 percent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationConfig {
    /// Valid prior samples to collect.
    pub samples: usize,
    pub alpha: f64,
    pub beta: f64,
    /// Fixed activity threshold.
    pub theta_t: f64,
    /// Target band for the prior win rate.
    pub win_rate_low: f64,
    pub win_rate_high: f64,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        CalibrationConfig {
            samples: 2_000,
            alpha: -1.0,
            beta: 1.0,
            theta_t: 1.0,
            win_rate_low: 0.01,
            win_rate_high: 0.05,
        }
    }
}

/// Calibrated parameters plus how well the target band was met.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationOutcome {
    pub params: RewardParams,
    /// Prior win rate under the calibrated parameters.
    pub achieved_win_rate: f64,
    /// Valid prior samples the estimate rests on.
    pub samples: usize,
    /// Total prior draws, valid or not.
    pub draws: usize,
}

/// Picks the selectivity threshold by bisection over `[-4, 4]` so that
/// molecules sampled from the prior win at a rate inside the target band.
/// The win rate is monotone in the threshold, so bisection converges; when
/// even an endpoint cannot reach the band, the endpoint is returned and
/// `achieved_win_rate` reports the honest value.
pub fn calibrate(
    p_gamma: &PolicyModel,
    oracle: &dyn ValueOracle,
    target: &SampleProfile,
    panel: &ProfilePanel,
    cfg: &CalibrationConfig,
    seed: u64,
) -> Result<CalibrationOutcome, EngineError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ CALIBRATION_SEED_SALT);
    let max_draws = cfg.samples.saturating_mul(100).max(1_000);
    let mut pairs: Vec<(f64, f64)> = Vec::with_capacity(cfg.samples);
    let mut draws = 0usize;
    while pairs.len() < cfg.samples {
        if draws >= max_draws {
            return Err(EngineError::DryPrior {
                valid: pairs.len(),
                draws,
            });
        }
        draws += 1;
        let s = p_gamma.sample_string(&[], &mut rng);
        if let Ok(g) = chem::parse_smiles(&s) {
            let y_t = oracle.value(&g, target);
            let y_z = z_score(y_t, &panel_values(oracle, &g, panel));
            pairs.push((y_t, y_z));
        }
    }

    let win_rate = |theta_z: f64| -> f64 {
        let params = RewardParams {
            alpha: cfg.alpha,
            beta: cfg.beta,
            theta_t: cfg.theta_t,
            theta_z,
        };
        let wins = pairs
            .iter()
            .filter(|&&(y_t, y_z)| is_winning(reward(y_t, y_z, &params)))
            .count();
        wins as f64 / pairs.len() as f64
    };

    let (mut lo, mut hi) = (-4.0f64, 4.0f64);
    let theta_z = if win_rate(lo) > cfg.win_rate_high {
        lo
    } else if win_rate(hi) < cfg.win_rate_low {
        hi
    } else {
        let mut mid = 0.5 * (lo + hi);
        for _ in 0..60 {
            mid = 0.5 * (lo + hi);
            let w = win_rate(mid);
            if w > cfg.win_rate_high {
                hi = mid;
            } else if w < cfg.win_rate_low {
                lo = mid;
            } else {
                break;
            }
        }
        mid
    };

    Ok(CalibrationOutcome {
        params: RewardParams {
            alpha: cfg.alpha,
            beta: cfg.beta,
            theta_t: cfg.theta_t,
            theta_z,
        },
        achieved_win_rate: win_rate(theta_z),
        samples: pairs.len(),
        draws,
    })
}

/// Writes records as one JSON object per line, atomically. Numbers use the
/// shortest representation that round-trips, so equal results always
/// produce byte-identical files.
pub fn write_results_jsonl(path: &Path, records: &[ResultRecord]) -> std::io::Result<()> {
    let mut text = String::new();
    for r in records {
        text.push_str(&serde_json::to_string(r).expect("records serialize"));
        text.push('\n');
    }
    crate::util::write_atomic(path, &text)
}

/// Reads a results file written by [`write_results_jsonl`].
pub fn read_results_jsonl(path: &Path) -> std::io::Result<Vec<ResultRecord>> {
    let text = std::fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(line).map_err(|e| {
            std::io::Error::new(
                std::io::ErrorKind::InvalidData,
                format!("results line {}: {e}", i + 1),
            )
        })?;
        out.push(record);
    }
    Ok(out)
}

/// Writes the per-iteration metrics as CSV, atomically.
pub fn write_metrics_csv(path: &Path, rows: &[IterationMetrics]) -> std::io::Result<()> {
    let mut text = String::from(
        "iteration,valid_samplings,wins,win_rate,mean_reward,cumulative_budget,queue_size,tree_nodes\n",
    );
    for m in rows {
        text.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            m.iteration,
            m.valid_samplings,
            m.wins,
            m.win_rate,
            m.mean_reward,
            m.cumulative_budget,
            m.queue_size,
            m.tree_nodes
        ));
    }
    crate::util::write_atomic(path, &text)
}
