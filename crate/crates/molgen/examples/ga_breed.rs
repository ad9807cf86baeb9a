//! Shows one genetic round in detail: crossover with provenance, mutation.
//!
//!     cargo run --example ga_breed -- [PARENT_A] [PARENT_B] [N_CHILDREN]
//!
//! Defaults: aspirin-like and nicotinamide-like parents, 8 children. Each
//! child is printed with a per-atom origin trace (which parent the atom
//! was inherited from), and every output is revalidated.

use molgen::chem::{canonical_form, is_valid, parse_smiles, write_smiles};
use molgen::ga::{crossover_traced, mutate, Provenance};
use rand::SeedableRng as _;
use rand_chacha::ChaCha8Rng;

fn main() {
    let mut args = std::env::args().skip(1);
    let a_str = args.next().unwrap_or_else(|| "CC(=O)OC1=CC=CC=C1".into());
    let b_str = args.next().unwrap_or_else(|| "O=C(N)C1=CN=CC=C1".into());
    let n_children: usize = args.next().map_or(8, |a| a.parse().expect("child count"));

    let a = parse_smiles(&a_str).expect("parent A parses");
    let b = parse_smiles(&b_str).expect("parent B parses");
    println!("parent A: {a_str} ({} atoms)", a.atom_count());
    println!("parent B: {b_str} ({} atoms)\n", b.atom_count());

    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut produced = 0usize;
    while produced < n_children {
        let Some((child, provenance)) = crossover_traced(&a, &b, &mut rng) else {
            println!("no cuttable bond in one of the parents; nothing to breed");
            return;
        };
        let trace: String = provenance
            .iter()
            .map(|p| match p {
                Provenance::A(_) => 'A',
                Provenance::B(_) => 'B',
            })
            .collect();
        let from_a = trace.bytes().filter(|&c| c == b'A').count();
        let s = canonical_form(&child);
        assert!(is_valid(&s).valid, "offspring must revalidate");
        produced += 1;
        println!(
            "child {produced}: {s:<28} atoms {:>2} ({from_a} from A, {} from B)  trace {trace}",
            child.atom_count(),
            provenance.len() - from_a,
        );
        if let Some(mutant) = mutate(&child, &mut rng) {
            let ms = write_smiles(&mutant);
            assert!(is_valid(&ms).valid, "mutants must revalidate");
            println!("         mutated -> {}", canonical_form(&mutant));
        }
    }
}
