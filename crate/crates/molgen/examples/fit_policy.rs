//! Fits the sequence prior and demonstrates sampling and self-training.
//!
//!     cargo run --example fit_policy -- [CORPUS] [ORDER] [N_SAMPLES]
//!
//! Defaults: the bundled fixture corpus, order 6, 500 samples. The corpus
//! is split 90/10; the model is fitted on the larger part, evaluated on
//! the held-out part, then fine-tuned on that same held-out part to show
//! the likelihood gain self-training delivers.

use std::path::{Path, PathBuf};

use molgen::chem::is_valid;
use molgen::policy::{PolicyModel, Vocab};
use rand::SeedableRng as _;
use rand_chacha::ChaCha8Rng;

fn mean_log_likelihood(model: &PolicyModel, strings: &[String]) -> f64 {
    let total: f64 = strings
        .iter()
        .map(|s| model.log_likelihood(s).expect("corpus strings encode"))
        .sum();
    total / strings.len() as f64
}

fn main() {
    let mut args = std::env::args().skip(1);
    let corpus_path: PathBuf = args.next().map_or_else(
        || Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/corpus.smi"),
        PathBuf::from,
    );
    let order: usize = args.next().map_or(6, |a| a.parse().expect("order"));
    let n_samples: usize = args.next().map_or(500, |a| a.parse().expect("sample count"));

    let corpus: Vec<String> = std::fs::read_to_string(&corpus_path)
        .expect("read corpus")
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(String::from)
        .collect();
    let split = corpus.len() * 9 / 10;
    let (train, held_out) = corpus.split_at(split);

    let mut model = PolicyModel::fit(Vocab::full(), order, 0.05, train).expect("fit prior");
    println!(
        "fitted order-{order} prior on {} strings: {} contexts over {} symbols",
        train.len(),
        model.context_count(),
        model.vocab().len(),
    );

    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut valid = 0usize;
    let mut shown = 0usize;
    for _ in 0..n_samples {
        let s = model.sample_string(&[], &mut rng);
        let ok = is_valid(&s).valid;
        valid += usize::from(ok);
        if ok && shown < 10 {
            println!("  sample: {s}");
            shown += 1;
        }
    }
    println!(
        "{valid}/{n_samples} samples valid ({:.1}%)",
        100.0 * valid as f64 / n_samples as f64
    );

    let before = mean_log_likelihood(&model, held_out);
    model.fine_tune(held_out, 1.0).expect("fine-tune");
    let after = mean_log_likelihood(&model, held_out);
    println!(
        "held-out mean log-likelihood: {before:.4} before fine-tuning, {after:.4} after \
         (gain {:+.4})",
        after - before
    );
}
