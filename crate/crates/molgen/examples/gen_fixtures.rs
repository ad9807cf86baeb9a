//! Regenerates the bundled fixture files: a molecule corpus, two target
//! profiles, and a training/verification panel pair.
//!
//!     cargo run --example gen_fixtures [out_dir]
//!
//! The default output directory is the crate's `fixtures/`. Generation is
//! seeded, so the files are reproducible byte for byte.

use std::path::PathBuf;

use molgen::fixtures::{random_corpus, random_target, whitened_panel};
use rand::SeedableRng as _;
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 0x0f1c;
const CORPUS_SIZE: usize = 2_000;
const MAX_HEAVY_ATOMS: usize = 24;
const MAX_TOKENS: usize = 60;
const PANEL_SIZE: usize = 64;

fn main() {
    let out_dir: PathBuf = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures"));
    std::fs::create_dir_all(&out_dir).expect("create output directory");

    let mut rng = ChaCha8Rng::seed_from_u64(SEED);

    let corpus = random_corpus(&mut rng, CORPUS_SIZE, MAX_HEAVY_ATOMS, MAX_TOKENS);
    let mut text = format!(
        "# synthetic molecule corpus: {CORPUS_SIZE} unique canonical strings\n\
         # generated by examples/gen_fixtures.rs with seed {SEED:#x}\n"
    );
    for s in &corpus {
        text.push_str(s);
        text.push('\n');
    }
    let corpus_path = out_dir.join("corpus.smi");
    std::fs::write(&corpus_path, text).expect("write corpus");
    println!("wrote {} ({} strings)", corpus_path.display(), corpus.len());

    let target = random_target("target-main", 1.0, &mut rng);
    let target_path = out_dir.join("target.json");
    target.save(&target_path).expect("write target");
    println!("wrote {}", target_path.display());

    let hard = random_target("target-hard", 0.45, &mut rng);
    let hard_path = out_dir.join("target_hard.json");
    hard.save(&hard_path).expect("write hard target");
    println!("wrote {}", hard_path.display());

    let train = whitened_panel("train", PANEL_SIZE, &mut rng);
    let train_path = out_dir.join("panel_training.json");
    train.save(&train_path).expect("write training panel");
    println!("wrote {} ({} profiles)", train_path.display(), train.len());

    let verify = whitened_panel("verify", PANEL_SIZE, &mut rng);
    let verify_path = out_dir.join("panel_verification.json");
    verify.save(&verify_path).expect("write verification panel");
    println!("wrote {} ({} profiles)", verify_path.display(), verify.len());
}
