//! Drives the tree layer directly: select, expand, roll out, back up.
//!
//!     cargo run --example mcts_search -- [STEPS] [C_PUCT]
//!
//! Runs the bare tree search (no genetic layer, no self-training: the
//! rollout policy stays the fitted prior) on the bundled fixture task and
//! reports tree growth, the best molecule so far, and the share of winning
//! samples as the search sharpens.

use std::path::Path;

use molgen::engine::{calibrate, CalibrationConfig};
use molgen::mcts::{step, SearchTree, StepContext};
use molgen::policy::{PolicyModel, Vocab};
use molgen::reward::{ProfilePanel, SampleProfile, SurrogateOracle};
use rand::SeedableRng as _;
use rand_chacha::ChaCha8Rng;

fn main() {
    let mut args = std::env::args().skip(1);
    let steps: usize = args.next().map_or(2_000, |a| a.parse().expect("steps"));
    let c_puct: f64 = args.next().map_or(2.5, |a| a.parse().expect("c_puct"));

    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let corpus: Vec<String> = std::fs::read_to_string(fixtures.join("corpus.smi"))
        .expect("read corpus")
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(String::from)
        .collect();
    let target = SampleProfile::load(&fixtures.join("target.json")).expect("target");
    let panel = ProfilePanel::load(&fixtures.join("panel_training.json")).expect("panel");
    let oracle = SurrogateOracle::default();
    let p_gamma = PolicyModel::fit(Vocab::full(), 6, 0.05, &corpus).expect("fit prior");
    let calibration = calibrate(
        &p_gamma,
        &oracle,
        &target,
        &panel,
        &CalibrationConfig::default(),
        0,
    )
    .expect("calibrate");
    println!(
        "calibrated theta_z = {:.4} (prior win rate {:.4})",
        calibration.params.theta_z, calibration.achieved_win_rate
    );

    let mut tree = SearchTree::new(p_gamma.vocab().len());
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut best: Option<(f64, String)> = None;
    let mut valid = 0usize;
    let mut wins = 0usize;
    let report_every = (steps / 10).max(1);

    for n in 1..=steps {
        let mut ctx = StepContext {
            p_gamma: &p_gamma,
            p_chi: &p_gamma,
            oracle: &oracle,
            target: &target,
            panel: &panel,
            params: &calibration.params,
            c_puct,
            n_rollouts: 8,
            self_mix: 0.8,
            rng: &mut rng,
        };
        let outcome = step(&mut tree, &mut ctx);
        for sample in &outcome.samples {
            let Some(score) = &sample.score else { continue };
            valid += 1;
            wins += usize::from(score.winning);
            if best.as_ref().is_none_or(|(r, _)| score.reward > *r) {
                best = Some((score.reward, sample.string.clone()));
            }
        }
        if n % report_every == 0 {
            let (r, s) = best.as_ref().expect("rollouts produce valid molecules");
            println!(
                "step {n:>6}: tree {:>6} nodes, {valid:>6} valid, win rate {:.3}, best {r:.4} = {s}",
                tree.len(),
                wins as f64 / valid as f64,
            );
        }
    }

    let (r, s) = best.expect("rollouts produce valid molecules");
    println!("\nbest molecule after {steps} steps: {s} (reward {r:.4})");
}
