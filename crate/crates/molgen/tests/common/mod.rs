//! Test oracles, kept independent of the library implementation.
//!
//! Everything here recomputes expected behavior from first principles:
//! a character-level validity simulator for the restricted alphabet, a
//! backtracking graph-isomorphism checker, direct closed-form evaluators
//! for the reward and z-score, and a from-scratch selection-score argmax.
//! The library is never called to produce an expected value.

#![allow(dead_code)]

use molgen::chem::{BondOrder, MolecularGraph};

/// Validity oracle for strings over the alphabet {C, O, N, (, ), 1, =}.
///
/// Simulates the string character by character against an explicit
/// adjacency list and checks valence caps (C:4, N:3, O:2) directly.
/// Grammar rules are encoded as predecessor constraints rather than a
/// token state machine, so this shares no code path with the parser.
pub fn oracle_is_valid(s: &str) -> bool {
    let chars: Vec<char> = s.chars().collect();
    if chars.is_empty() || chars.len() > 100 {
        return false;
    }
    let cap = |c: char| -> u32 {
        match c {
            'C' => 4,
            'N' => 3,
            'O' => 2,
            _ => 0,
        }
    };
    let mut elem: Vec<char> = Vec::new();
    let mut bonds: Vec<(usize, usize, u32)> = Vec::new();
    let mut cur: Option<usize> = None;
    let mut stack: Vec<usize> = Vec::new();
    let mut pending: Option<u32> = None;
    // open ring 1: (anchor atom, bond order written at the opening digit)
    let mut ring1: Option<(usize, Option<u32>)> = None;
    let mut prev: Option<char> = None;

    for &ch in &chars {
        match ch {
            'C' | 'O' | 'N' => {
                let idx = elem.len();
                elem.push(ch);
                if let Some(p) = cur {
                    let order = pending.take().unwrap_or(1);
                    if bonds.iter().any(|&(a, b, _)| (a == p && b == idx) || (a == idx && b == p)) {
                        return false;
                    }
                    bonds.push((p, idx, order));
                } else if pending.is_some() {
                    return false;
                }
                cur = Some(idx);
            }
            '=' => {
                if cur.is_none() || pending.is_some() {
                    return false;
                }
                pending = Some(2);
            }
            '(' => {
                if pending.is_some() || prev == Some('(') {
                    return false;
                }
                match cur {
                    None => return false,
                    Some(p) => stack.push(p),
                }
            }
            ')' => {
                if pending.is_some() || prev == Some('(') {
                    return false;
                }
                match stack.pop() {
                    None => return false,
                    Some(p) => cur = Some(p),
                }
            }
            '1' => {
                let at = match cur {
                    None => return false,
                    Some(a) => a,
                };
                if matches!(prev, Some('(') | Some(')')) {
                    return false;
                }
                match ring1.take() {
                    None => ring1 = Some((at, pending.take())),
                    Some((open_at, open_spec)) => {
                        let close_spec = pending.take();
                        if open_at == at {
                            return false; // self loop
                        }
                        if let (Some(a), Some(b)) = (open_spec, close_spec) {
                            if a != b {
                                return false; // conflicting ring bond orders
                            }
                        }
                        if bonds
                            .iter()
                            .any(|&(a, b, _)| (a == open_at && b == at) || (a == at && b == open_at))
                        {
                            return false; // duplicate bond
                        }
                        bonds.push((open_at, at, close_spec.or(open_spec).unwrap_or(1)));
                    }
                }
            }
            _ => return false,
        }
        prev = Some(ch);
    }
    if pending.is_some() || !stack.is_empty() || ring1.is_some() {
        return false;
    }
    let mut load = vec![0u32; elem.len()];
    for &(a, b, o) in &bonds {
        load[a] += o;
        load[b] += o;
    }
    elem.iter().zip(&load).all(|(&e, &l)| l <= cap(e))
}

/// Enumerates every string of length 1..=max_len over the given alphabet.
pub fn enumerate_strings(alphabet: &[char], max_len: usize) -> Vec<String> {
    let mut out = Vec::new();
    let mut frontier: Vec<String> = vec![String::new()];
    for _ in 0..max_len {
        let mut next = Vec::with_capacity(frontier.len() * alphabet.len());
        for base in &frontier {
            for &c in alphabet {
                let mut s = base.clone();
                s.push(c);
                next.push(s);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

fn atom_key(g: &MolecularGraph, i: usize) -> (u8, bool, usize) {
    (g.atom(i).element as u8, g.atom(i).aromatic, g.degree(i))
}

fn bond_between(g: &MolecularGraph, a: usize, b: usize) -> Option<BondOrder> {
    g.neighbors(a)
        .iter()
        .find(|&&(_, v)| v == b)
        .map(|&(bi, _)| g.bond(bi).order)
}

fn extend_mapping(
    g1: &MolecularGraph,
    g2: &MolecularGraph,
    map: &mut Vec<Option<usize>>,
    used: &mut Vec<bool>,
    i: usize,
) -> bool {
    if i == g1.atom_count() {
        return true;
    }
    for j in 0..g2.atom_count() {
        if used[j] || atom_key(g1, i) != atom_key(g2, j) {
            continue;
        }
        // bonds from i to already-mapped atoms must match exactly
        let mut ok = true;
        for &(bi, v) in g1.neighbors(i) {
            if let Some(Some(w)) = map.get(v).copied() {
                if bond_between(g2, j, w) != Some(g1.bond(bi).order) {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        map[i] = Some(j);
        used[j] = true;
        if extend_mapping(g1, g2, map, used, i + 1) {
            return true;
        }
        map[i] = None;
        used[j] = false;
    }
    false
}

/// Backtracking isomorphism check with full atom mapping.
///
/// Matches atoms on (element, aromatic, degree) and requires every bond,
/// including its order, to map both ways. Exponential in the worst case;
/// intended for the small molecules used in tests.
pub fn oracle_isomorphic(g1: &MolecularGraph, g2: &MolecularGraph) -> bool {
    if g1.atom_count() != g2.atom_count() || g1.bond_count() != g2.bond_count() {
        return false;
    }
    let mut map = vec![None; g1.atom_count()];
    let mut used = vec![false; g2.atom_count()];
    extend_mapping(g1, g2, &mut map, &mut used, 0)
}

/// Direct evaluation of the shaped reward.
pub fn oracle_reward(y_t: f64, y_z: f64, alpha: f64, beta: f64, theta_t: f64, theta_z: f64) -> f64 {
    if y_t <= theta_t && y_z <= theta_z {
        (alpha * (-theta_z + y_z)).exp() + beta * (-y_t + theta_t + 1.0).ln()
    } else {
        1.0
    }
}

/// Direct standardization against a population of adversary scores.
pub fn oracle_z_score(y_t: f64, adversary: &[f64]) -> f64 {
    let n = adversary.len() as f64;
    let mean = adversary.iter().sum::<f64>() / n;
    let var = adversary.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / n;
    let sd = var.sqrt();
    if sd < 1e-12 {
        0.0
    } else {
        (y_t - mean) / sd
    }
}

/// From-scratch child selection: argmax of Q + c * P * sqrt(sum N) / (1 + N),
/// first index winning ties. Inputs are raw (q, p, n) triples.
pub fn oracle_select(children: &[(f64, f64, u64)], c: f64) -> usize {
    let total_n: u64 = children.iter().map(|&(_, _, n)| n).sum();
    let sqrt_total = (total_n as f64).sqrt();
    let mut best = 0usize;
    let mut best_score = f64::NEG_INFINITY;
    for (i, &(q, p, n)) in children.iter().enumerate() {
        let score = q + c * p * sqrt_total / (1.0 + n as f64);
        if score > best_score {
            best_score = score;
            best = i;
        }
    }
    best
}
