//! Canonical string form via partition refinement with individuation.
//!
//! Atoms start in classes keyed by (element, aromaticity, degree, implicit
//! hydrogens, ring membership) and are refined by the sorted multiset of
//! (bond order, neighbor class) pairs until stable. While classes remain
//! tied, each member of the first tied class is individuated in turn, the
//! partition re-refined, and the recursion continues; the canonical form is
//! the lexicographically smallest string emitted over all discrete leaves.
//! Because the refinement keys are isomorphism invariants and every
//! tie-break is enumerated, isomorphic graphs always reach the same set of
//! leaf strings, so the minimum is permutation independent.
//!
//! Emission walks a spanning tree from the lowest-ranked atom, children in
//! ascending rank order. Ring-closure digits are assigned on demand (lowest
//! free digit, freed on close, `%nn` beyond 9) and an explicit order symbol
//! is written on the opening side when the closure's order differs from the
//! pair default. All but the last child of an atom are parenthesized.

use std::fmt::Write as _;

use super::{BondOrder, MolecularGraph};

fn count_distinct(ranks: &[usize]) -> usize {
    ranks.iter().max().map_or(0, |m| m + 1)
}

/// Dense ranks (0-based, ties share a value) of `keys` under `Ord`.
fn compress<T: Ord>(keys: &[T]) -> Vec<usize> {
    let mut uniq: Vec<&T> = keys.iter().collect();
    uniq.sort_unstable();
    uniq.dedup();
    keys.iter()
        .map(|k| uniq.binary_search(&k).unwrap())
        .collect()
}

fn refine(g: &MolecularGraph, seed: Vec<usize>) -> Vec<usize> {
    let mut ranks = seed;
    let mut distinct = count_distinct(&ranks);
    loop {
        let keys: Vec<(usize, Vec<(BondOrder, usize)>)> = (0..g.atom_count())
            .map(|i| {
                let mut nb: Vec<(BondOrder, usize)> = g
                    .neighbors(i)
                    .iter()
                    .map(|&(b, v)| (g.bond(b).order, ranks[v]))
                    .collect();
                nb.sort_unstable();
                (ranks[i], nb)
            })
            .collect();
        let next = compress(&keys);
        let next_distinct = count_distinct(&next);
        if next_distinct == distinct {
            return next;
        }
        ranks = next;
        distinct = next_distinct;
    }
}

pub(crate) fn refined_ranks(g: &MolecularGraph) -> Vec<usize> {
    let init: Vec<_> = (0..g.atom_count())
        .map(|i| {
            let a = g.atom(i);
            (a.element, a.aromatic, g.degree(i), a.implicit_h, a.in_ring)
        })
        .collect();
    refine(g, compress(&init))
}

/// Permutation-invariant canonical string. Parsing it back yields a graph
/// isomorphic to `g`, provided it stays within the token cap.
pub fn canonical_form(g: &MolecularGraph) -> String {
    let ranks = refined_ranks(g);
    let mut best: Option<String> = None;
    canonize(g, ranks, &mut best);
    best.unwrap()
}

fn canonize(g: &MolecularGraph, ranks: Vec<usize>, best: &mut Option<String>) {
    let n = g.atom_count();
    let distinct = count_distinct(&ranks);
    if distinct == n {
        let s = emit(g, &ranks);
        if best.as_ref().map_or(true, |b| s < *b) {
            *best = Some(s);
        }
        return;
    }
    let mut counts = vec![0usize; distinct];
    for &r in &ranks {
        counts[r] += 1;
    }
    let target = (0..distinct).find(|&r| counts[r] > 1).unwrap();
    for m in 0..n {
        if ranks[m] != target {
            continue;
        }
        let keys: Vec<(usize, u8)> = (0..n)
            .map(|i| (ranks[i], u8::from(i != m && ranks[i] == target)))
            .collect();
        let split = refine(g, compress(&keys));
        canonize(g, split, best);
    }
}

/// Writes `g` as a parseable string using atom indices as the ordering.
pub fn write_smiles(g: &MolecularGraph) -> String {
    let ranks: Vec<usize> = (0..g.atom_count()).collect();
    emit(g, &ranks)
}

fn pair_default(g: &MolecularGraph, a: usize, b: usize) -> BondOrder {
    if g.atom(a).aromatic && g.atom(b).aromatic {
        BondOrder::Aromatic
    } else {
        BondOrder::Single
    }
}

fn bond_symbol(order: BondOrder) -> &'static str {
    match order {
        BondOrder::Single => "-",
        BondOrder::Double => "=",
        BondOrder::Triple => "#",
        BondOrder::Aromatic => "",
    }
}

/// Deterministic emission under a discrete ranking.
fn emit(g: &MolecularGraph, ranks: &[usize]) -> String {
    let n = g.atom_count();
    let root = (0..n).min_by_key(|&i| ranks[i]).unwrap();

    let sorted_nb: Vec<Vec<(usize, usize)>> = (0..n)
        .map(|u| {
            let mut nb = g.neighbors(u).to_vec();
            nb.sort_unstable_by_key(|&(_, v)| ranks[v]);
            nb
        })
        .collect();

    // pass 1: spanning tree, preorder, and ring-closure endpoints
    let mut visited = vec![false; n];
    let mut preorder = vec![usize::MAX; n];
    let mut children: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    let mut opens: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut closes: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut edge_used = vec![false; g.bond_count()];
    visited[root] = true;
    preorder[root] = 0;
    let mut counter = 1usize;
    let mut frames: Vec<(usize, usize)> = vec![(root, 0)];
    while let Some(frame) = frames.last_mut() {
        let u = frame.0;
        if frame.1 < sorted_nb[u].len() {
            let (b, v) = sorted_nb[u][frame.1];
            frame.1 += 1;
            if edge_used[b] {
                continue;
            }
            edge_used[b] = true;
            if visited[v] {
                // back edge: opens at the earlier atom, closes here
                opens[v].push(b);
                closes[u].push(b);
            } else {
                visited[v] = true;
                preorder[v] = counter;
                counter += 1;
                children[u].push((b, v));
                frames.push((v, 0));
            }
        } else {
            frames.pop();
        }
    }
    for u in 0..n {
        let other = |&b: &usize| {
            let bond = g.bond(b);
            if bond.a == u {
                bond.b
            } else {
                bond.a
            }
        };
        opens[u].sort_unstable_by_key(|b| preorder[other(b)]);
        closes[u].sort_unstable_by_key(|b| preorder[other(b)]);
    }

    // pass 2: write; digits are allocated at opens and freed at closes
    let mut out = String::new();
    let mut digit_of = vec![0usize; g.bond_count()];
    let mut digit_busy = vec![false; 100];
    let write_digit = |out: &mut String, d: usize| {
        if d < 10 {
            let _ = write!(out, "{d}");
        } else {
            let _ = write!(out, "%{d:02}");
        }
    };
    // frames: (atom, incoming tree bond, next child slot)
    let mut frames: Vec<(usize, Option<usize>, usize)> = vec![(root, None, 0)];
    while let Some(frame) = frames.last_mut() {
        let (u, in_bond, slot) = (frame.0, frame.1, frame.2);
        if slot == 0 {
            if let Some(b) = in_bond {
                let bond = g.bond(b);
                if bond.order != pair_default(g, bond.a, bond.b) {
                    out.push_str(bond_symbol(bond.order));
                }
            }
            let atom = g.atom(u);
            if atom.aromatic {
                out.push_str(atom.element.aromatic_symbol().unwrap());
            } else {
                out.push_str(atom.element.symbol());
            }
            for &b in &opens[u] {
                let d = (1..digit_busy.len()).find(|&d| !digit_busy[d]).unwrap();
                digit_busy[d] = true;
                digit_of[b] = d;
                let bond = g.bond(b);
                if bond.order != pair_default(g, bond.a, bond.b) {
                    out.push_str(bond_symbol(bond.order));
                }
                write_digit(&mut out, d);
            }
            for &b in &closes[u] {
                let d = digit_of[b];
                digit_busy[d] = false;
                write_digit(&mut out, d);
            }
        }
        if slot < children[u].len() {
            frame.2 += 1;
            if slot > 0 {
                out.push(')');
            }
            if slot + 1 < children[u].len() {
                out.push('(');
            }
            let (b, v) = children[u][slot];
            frames.push((v, Some(b), 0));
        } else {
            frames.pop();
        }
    }
    out
}
