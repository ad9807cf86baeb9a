//! Deterministic synthetic data: molecules, corpora, targets, and panels.
//!
//! Everything here is pure function of the supplied generator, so fixture
//! files can be regenerated bit-for-bit from a seed. Molecule growth
//! tracks valence loads as it goes and only takes steps that keep the
//! graph buildable, so every generated molecule is valid by construction.
//!
//! Adversary panels are whitened: profile vectors are drawn as standard
//! normals, exactly centered per dimension, and transformed by the inverse
//! Cholesky factor of their own population covariance. A whitened panel
//! has zero mean and identity covariance to machine precision, which makes
//! z-scores computed against two independently drawn panels agree closely
//! instead of inheriting each panel's sampling noise.

use std::collections::HashSet;

use rand::Rng;

use crate::chem::{canonical_form, token_count, BondOrder, Element, GraphBuilder, MolecularGraph};
use crate::policy::Vocab;
use crate::reward::{ProfilePanel, SampleProfile, PROFILE_DIM};

/// One standard normal draw (Box-Muller).
pub fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    loop {
        let u1: f64 = rng.random();
        if u1 > 0.0 {
            let u2: f64 = rng.random();
            return (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos();
        }
    }
}

/// Grows a random valid molecule of at most `max_heavy` atoms. Growth
/// attaches single atoms, aromatic six-rings, and small aliphatic rings to
/// sites with spare valence, tracking loads so the final build cannot fail.
pub fn random_molecule<R: Rng>(rng: &mut R, max_heavy: usize) -> MolecularGraph {
    let max_heavy = max_heavy.max(4);
    let target = rng.random_range(4..=max_heavy);
    let mut builder = GraphBuilder::new();
    let mut load: Vec<u32> = Vec::new();
    let mut cap: Vec<u32> = Vec::new();

    let add = |builder: &mut GraphBuilder,
                   load: &mut Vec<u32>,
                   cap: &mut Vec<u32>,
                   element: Element,
                   aromatic: bool,
                   initial_load: u32| {
        let id = builder.add_atom(element, aromatic);
        load.push(initial_load);
        cap.push(element.max_cap());
        id
    };

    let attach_benzene = |builder: &mut GraphBuilder,
                          load: &mut Vec<u32>,
                          cap: &mut Vec<u32>,
                          site: Option<usize>| {
        let first = builder.atom_count();
        for _ in 0..6 {
            add(builder, load, cap, Element::C, true, 3);
        }
        for i in 0..6 {
            builder.add_bond(first + i, first + (i + 1) % 6, BondOrder::Aromatic);
        }
        if let Some(site) = site {
            builder.add_bond(site, first, BondOrder::Single);
            load[site] += 1;
            load[first] += 1;
        }
    };

    if rng.random::<f64>() < 0.3 && target >= 6 {
        attach_benzene(&mut builder, &mut load, &mut cap, None);
    } else {
        add(&mut builder, &mut load, &mut cap, Element::C, false, 0);
    }

    while builder.atom_count() < target {
        let sites: Vec<usize> = (0..builder.atom_count())
            .filter(|&i| load[i] < cap[i])
            .collect();
        let Some(&site) = sites.get(rng.random_range(0..sites.len().max(1))) else {
            break;
        };
        let room = target - builder.atom_count();
        let roll: f64 = rng.random();
        if roll < 0.10 && room >= 6 {
            attach_benzene(&mut builder, &mut load, &mut cap, Some(site));
        } else if roll < 0.22 && room >= 3 {
            // aliphatic carbon ring of 3 to min(6, room) atoms
            let n = rng.random_range(3..=room.min(6));
            let first = builder.atom_count();
            for _ in 0..n {
                add(&mut builder, &mut load, &mut cap, Element::C, false, 2);
            }
            for i in 0..n {
                builder.add_bond(first + i, first + (i + 1) % n, BondOrder::Single);
            }
            builder.add_bond(site, first, BondOrder::Single);
            load[site] += 1;
            load[first] += 1;
        } else {
            let e: f64 = rng.random();
            let element = if e < 0.55 {
                Element::C
            } else if e < 0.67 {
                Element::N
            } else if e < 0.79 {
                Element::O
            } else if e < 0.84 {
                Element::S
            } else if e < 0.88 {
                Element::F
            } else if e < 0.92 {
                Element::Cl
            } else if e < 0.95 {
                Element::Br
            } else if e < 0.97 {
                Element::P
            } else if e < 0.99 {
                Element::I
            } else {
                Element::B
            };
            let double = cap[site] - load[site] >= 2
                && element.max_cap() >= 2
                && rng.random::<f64>() < 0.15;
            let (order, units) = if double {
                (BondOrder::Double, 2)
            } else {
                (BondOrder::Single, 1)
            };
            let new = add(&mut builder, &mut load, &mut cap, element, false, units);
            builder.add_bond(site, new, order);
            load[site] += units;
        }
    }
    builder.build().expect("tracked growth stays valid")
}

/// Rebuilds `g` with its atoms in a uniformly random order. The result is
/// the same molecule with relabeled atoms.
pub fn permute_atoms<R: Rng>(g: &MolecularGraph, rng: &mut R) -> MolecularGraph {
    let n = g.atom_count();
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        order.swap(i, j);
    }
    let mut new_of = vec![0usize; n];
    for (new_i, &old) in order.iter().enumerate() {
        new_of[old] = new_i;
    }
    let mut builder = GraphBuilder::new();
    for &old in &order {
        let a = g.atom(old);
        builder.add_atom(a.element, a.aromatic);
    }
    for bond in g.bonds() {
        builder.add_bond(new_of[bond.a], new_of[bond.b], bond.order);
    }
    builder.build().expect("permutation preserves validity")
}

/// Generates `count` distinct canonical molecule strings, each within
/// `max_tokens` tokens and fully encodable by the policy vocabulary.
pub fn random_corpus<R: Rng>(
    rng: &mut R,
    count: usize,
    max_heavy: usize,
    max_tokens: usize,
) -> Vec<String> {
    let vocab = Vocab::full();
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let g = random_molecule(rng, max_heavy);
        let c = canonical_form(&g);
        if token_count(&c).is_some_and(|t| t <= max_tokens)
            && vocab.encode(&c).is_ok()
            && seen.insert(c.clone())
        {
            out.push(c);
        }
    }
    out
}

/// A target profile of independent normal values scaled by `scale`.
pub fn random_target<R: Rng>(id: &str, scale: f64, rng: &mut R) -> SampleProfile {
    let mut values = [0.0; PROFILE_DIM];
    for v in &mut values {
        *v = scale * standard_normal(rng);
    }
    SampleProfile {
        id: id.to_string(),
        values,
    }
}

/// Cholesky factor (lower triangular) of a symmetric positive definite
/// matrix. Panics if the matrix is not positive definite.
fn cholesky(m: &[[f64; PROFILE_DIM]; PROFILE_DIM]) -> [[f64; PROFILE_DIM]; PROFILE_DIM] {
    let mut l = [[0.0; PROFILE_DIM]; PROFILE_DIM];
    for i in 0..PROFILE_DIM {
        for j in 0..=i {
            let mut s = m[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            if i == j {
                assert!(s > 0.0, "panel covariance must be positive definite");
                l[i][j] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    l
}

/// Draws `count` profiles of standard normals, then centers and whitens
/// them: the returned panel has exactly zero mean and identity population
/// covariance (up to rounding). Ids are `{prefix}-{index:03}`.
pub fn whitened_panel<R: Rng>(prefix: &str, count: usize, rng: &mut R) -> ProfilePanel {
    assert!(
        count > PROFILE_DIM,
        "whitening needs more profiles than dimensions"
    );
    let mut x: Vec<[f64; PROFILE_DIM]> = (0..count)
        .map(|_| {
            let mut row = [0.0; PROFILE_DIM];
            for v in &mut row {
                *v = standard_normal(rng);
            }
            row
        })
        .collect();
    // exact centering
    for j in 0..PROFILE_DIM {
        let mean = x.iter().map(|r| r[j]).sum::<f64>() / count as f64;
        for row in &mut x {
            row[j] -= mean;
        }
    }
    // population covariance
    let mut cov = [[0.0; PROFILE_DIM]; PROFILE_DIM];
    for row in &x {
        for a in 0..PROFILE_DIM {
            for b in 0..PROFILE_DIM {
                cov[a][b] += row[a] * row[b];
            }
        }
    }
    for row in &mut cov {
        for v in row {
            *v /= count as f64;
        }
    }
    let l = cholesky(&cov);
    // forward substitution per row: solve L y = x
    let profiles = x
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut y = [0.0; PROFILE_DIM];
            for a in 0..PROFILE_DIM {
                let mut s = row[a];
                for k in 0..a {
                    s -= l[a][k] * y[k];
                }
                y[a] = s / l[a][a];
            }
            SampleProfile {
                id: format!("{prefix}-{i:03}"),
                values: y,
            }
        })
        .collect();
    ProfilePanel { profiles }
}
