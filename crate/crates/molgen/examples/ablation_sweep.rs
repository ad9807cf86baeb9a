//! Compares the full search against its ablations over several seeds.
//!
//!     cargo run --example ablation_sweep -- [budget] [n_seeds]
//!
//! For each mechanism configuration (full, no-ga, no-self-training,
//! tree-only) the sweep executes one run per seed at the same budget and
//! reports the mean reward of each run's ten best molecules, the per-mode
//! median of that statistic, and the final-iteration win rate next to the
//! calibrated prior win rate.

use std::path::Path;

use molgen::config::AblationMode;
use molgen::engine::{calibrate, run, CalibrationConfig, EngineConfig, SearchInputs};
use molgen::policy::{PolicyModel, Vocab};
use molgen::reward::{ProfilePanel, SampleProfile, SurrogateOracle};

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    xs[xs.len() / 2]
}

fn main() {
    let mut args = std::env::args().skip(1);
    let budget: usize = args.next().map_or(10_000, |a| a.parse().expect("budget"));
    let n_seeds: u64 = args.next().map_or(5, |a| a.parse().expect("seed count"));

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
    let verify = ProfilePanel::load(&fixtures.join("panel_verification.json")).expect("verify");
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
        "calibrated theta_z = {:.4}, prior win rate {:.4}",
        calibration.params.theta_z, calibration.achieved_win_rate
    );
    println!("budget {budget}, seeds 0..{n_seeds}");
    println!();
    println!(
        "{:<18} {:>6}  {:>14}  {:>14}  {:>10}  {:>8}",
        "mode", "seed", "mean top-10 r", "mean top-10 z", "final WR", "WR ratio"
    );

    let mut medians = Vec::new();
    for mode in AblationMode::ALL {
        let mut tops = Vec::new();
        for seed in 0..n_seeds {
            let cfg = EngineConfig {
                seed,
                budget,
                ablation: mode.flags(),
                ..EngineConfig::default()
            };
            let inputs = SearchInputs {
                p_gamma: &p_gamma,
                oracle: &oracle,
                target: &target,
                panel: &panel,
                verify_panel: Some(&verify),
                params: &calibration.params,
            };
            let result = run(&inputs, &cfg);
            let top = result.mean_top_reward(10).unwrap_or(0.0);
            let top_z = result.mean_top_z(10).unwrap_or(0.0);
            let final_wr = result.metrics.last().map_or(0.0, |m| m.win_rate);
            println!(
                "{:<18} {:>6}  {:>14.6}  {:>14.6}  {:>10.4}  {:>8.2}",
                mode.name(),
                seed,
                top,
                top_z,
                final_wr,
                final_wr / calibration.achieved_win_rate
            );
            tops.push(top);
        }
        medians.push((mode, median(tops)));
    }

    println!();
    for (mode, m) in &medians {
        println!("median mean top-10 reward, {:<18} {m:.6}", mode.name());
    }
}
