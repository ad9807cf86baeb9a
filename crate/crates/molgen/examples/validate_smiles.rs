//! Validates molecule strings and shows their canonical form.
//!
//!     cargo run --example validate_smiles -- [STRING ...]
//!
//! With no arguments a built-in demo set is used, covering every rejection
//! category alongside a few accepted molecules. For each accepted string
//! the canonical form and a structural summary are printed; for each
//! rejected one, the error code and the offending token position.

use molgen::chem::{canonical_form, descriptors, is_valid, parse_smiles};

fn inspect(s: &str) {
    let report = is_valid(s);
    if !report.valid {
        let err = report.error.expect("invalid strings carry an error");
        println!("{s:<24} REJECTED  {err}");
        return;
    }
    let g = parse_smiles(s).expect("validated strings parse");
    let d = descriptors(&g);
    println!(
        "{s:<24} VALID     canonical {:<24} atoms {:>2}  bonds {:>2}  rings {}  aromatic {:.0}%",
        canonical_form(&g),
        g.atom_count(),
        g.bond_count(),
        g.cycle_rank(),
        d[4] * 100.0,
    );
}

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let demo = [
        "CCO",
        "c1ccccc1O",
        "CC(=O)OC1=CC=CC=C1",
        "O=C(N)C1=CN=CC=C1",
        "C1CC",        // ring digit never closed
        "C(=O)(=O)=O", // carbon over its valence cap
        "C==C",        // two bond symbols in a row
        "cc",          // aromatic atoms outside a ring
        "C[Si]",       // bracket atoms are outside the supported subset
    ];
    let inputs: Vec<&str> = if args.is_empty() {
        demo.to_vec()
    } else {
        args.iter().map(String::as_str).collect()
    };
    for s in inputs {
        inspect(s);
    }
}
