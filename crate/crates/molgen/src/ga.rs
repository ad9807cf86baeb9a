//! Genetic operators over molecular graphs.
//!
//! Crossover cuts one random acyclic single bond in each parent, keeps a
//! random side of each cut, and joins the two kept fragments with a single
//! bond between the freshly cut endpoints. Every step preserves validity by
//! construction: fragments stay connected, no ring is broken (cut bonds are
//! acyclic), and the join consumes exactly the valence unit each endpoint
//! just gave up. Parents whose bonds are all cyclic or non-single cannot be
//! cut, in which case crossover reports `None`.
//!
//! Mutation applies one of four local edits, each validity-preserving:
//! append a new atom to one with spare valence, delete a leaf atom, change
//! a non-aromatic atom's element to one that still fits its bonds, or
//! re-order an acyclic non-aromatic bond within both endpoints' caps. When
//! the drawn edit has no eligible site the mutation reports `None`.
//!
//! Breeding pairs parents in order, cycling as needed: each child comes
//! from one crossover attempt (falling back to cloning the first parent of
//! the pair) followed by a mutation roll. Parent selection alternates
//! between the elite queue and fresh samples from the prior policy, so
//! recombination always has both exploitation and exploration material;
//! either source falls back to the other when empty or dry.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::chem::{self, BondOrder, Element, GraphBuilder, MolecularGraph, MAX_TOKENS};
use crate::policy::PolicyModel;
use crate::queue::GenerationQueue;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GaError {
    #[error("no parents available: queue is empty and the prior produced no valid molecules")]
    NoParents,
}

/// Which parent an offspring atom came from, with the original atom index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    A(usize),
    B(usize),
}

/// Where a selected parent came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParentOrigin {
    /// Drawn from the elite queue; already scored and budgeted.
    Queue,
    /// Freshly sampled from the prior policy; the caller must score it.
    Prior,
}

#[derive(Debug, Clone)]
pub struct Parent {
    pub graph: MolecularGraph,
    pub origin: ParentOrigin,
}

/// Bonds eligible for cutting: single order and not on any cycle.
fn cuttable_bonds(g: &MolecularGraph) -> Vec<usize> {
    (0..g.bond_count())
        .filter(|&b| g.bond(b).order == BondOrder::Single && !g.bond_in_ring(b))
        .collect()
}

/// The connected fragment containing `keep` after deleting bond `cut`,
/// as (original atom indices in discovery order).
fn fragment(g: &MolecularGraph, cut: usize, keep: usize) -> Vec<usize> {
    let mut seen = vec![false; g.atom_count()];
    let mut order = Vec::new();
    let mut stack = vec![keep];
    seen[keep] = true;
    while let Some(u) = stack.pop() {
        order.push(u);
        for &(b, v) in g.neighbors(u) {
            if b != cut && !seen[v] {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    order
}

/// Copies `atoms` of `g` (and all bonds among them) into `builder`,
/// returning the new index of each copied atom keyed by old index.
fn copy_fragment(
    builder: &mut GraphBuilder,
    g: &MolecularGraph,
    atoms: &[usize],
) -> Vec<Option<usize>> {
    let mut map = vec![None; g.atom_count()];
    for &old in atoms {
        let a = g.atom(old);
        map[old] = Some(builder.add_atom(a.element, a.aromatic));
    }
    for bond in g.bonds() {
        if let (Some(na), Some(nb)) = (map[bond.a], map[bond.b]) {
            builder.add_bond(na, nb, bond.order);
        }
    }
    map
}

/// Crossover with per-atom provenance. `None` when either parent has no
/// cuttable bond.
pub fn crossover_traced(
    a: &MolecularGraph,
    b: &MolecularGraph,
    rng: &mut ChaCha8Rng,
) -> Option<(MolecularGraph, Vec<Provenance>)> {
    let cuts_a = cuttable_bonds(a);
    let cuts_b = cuttable_bonds(b);
    if cuts_a.is_empty() || cuts_b.is_empty() {
        return None;
    }
    let cut_a = cuts_a[rng.random_range(0..cuts_a.len())];
    let cut_b = cuts_b[rng.random_range(0..cuts_b.len())];
    let bond_a = *a.bond(cut_a);
    let bond_b = *b.bond(cut_b);
    let end_a = if rng.random_range(0..2) == 0 {
        bond_a.a
    } else {
        bond_a.b
    };
    let end_b = if rng.random_range(0..2) == 0 {
        bond_b.a
    } else {
        bond_b.b
    };
    let frag_a = fragment(a, cut_a, end_a);
    let frag_b = fragment(b, cut_b, end_b);

    let mut builder = GraphBuilder::new();
    let map_a = copy_fragment(&mut builder, a, &frag_a);
    let map_b = copy_fragment(&mut builder, b, &frag_b);
    builder.add_bond(
        map_a[end_a].unwrap(),
        map_b[end_b].unwrap(),
        BondOrder::Single,
    );

    let mut provenance = vec![Provenance::A(0); builder.atom_count()];
    for (old, new) in map_a.iter().enumerate() {
        if let Some(n) = new {
            provenance[*n] = Provenance::A(old);
        }
    }
    for (old, new) in map_b.iter().enumerate() {
        if let Some(n) = new {
            provenance[*n] = Provenance::B(old);
        }
    }
    let child = builder
        .build()
        .expect("fragment join preserves validity by construction");
    Some((child, provenance))
}

/// Crossover without the trace.
pub fn crossover(
    a: &MolecularGraph,
    b: &MolecularGraph,
    rng: &mut ChaCha8Rng,
) -> Option<MolecularGraph> {
    crossover_traced(a, b, rng).map(|(g, _)| g)
}

/// Elements a mutation may introduce or substitute.
const MUTATION_ELEMENTS: [Element; 10] = Element::ALL;

/// One validity-preserving local edit; `None` when the drawn edit has no
/// eligible site in `g`.
pub fn mutate(g: &MolecularGraph, rng: &mut ChaCha8Rng) -> Option<MolecularGraph> {
    match rng.random_range(0..4u32) {
        0 => append_atom(g, rng),
        1 => delete_leaf(g, rng),
        2 => change_element(g, rng),
        _ => change_bond_order(g, rng),
    }
}

fn rebuild(builder: GraphBuilder) -> MolecularGraph {
    builder
        .build()
        .expect("mutations preserve validity by construction")
}

fn append_atom(g: &MolecularGraph, rng: &mut ChaCha8Rng) -> Option<MolecularGraph> {
    let sites: Vec<usize> = (0..g.atom_count()).filter(|&i| g.free_valence(i) >= 1).collect();
    if sites.is_empty() {
        return None;
    }
    let site = sites[rng.random_range(0..sites.len())];
    let element = MUTATION_ELEMENTS[rng.random_range(0..MUTATION_ELEMENTS.len())];
    let mut builder = GraphBuilder::from_graph(g);
    let new = builder.add_atom(element, false);
    builder.add_bond(site, new, BondOrder::Single);
    Some(rebuild(builder))
}

fn delete_leaf(g: &MolecularGraph, rng: &mut ChaCha8Rng) -> Option<MolecularGraph> {
    if g.atom_count() <= 1 {
        return None;
    }
    let leaves: Vec<usize> = (0..g.atom_count()).filter(|&i| g.degree(i) == 1).collect();
    if leaves.is_empty() {
        return None;
    }
    let leaf = leaves[rng.random_range(0..leaves.len())];
    let mut builder = GraphBuilder::from_graph(g);
    builder.remove_atom(leaf);
    Some(rebuild(builder))
}

fn change_element(g: &MolecularGraph, rng: &mut ChaCha8Rng) -> Option<MolecularGraph> {
    // candidate sites: non-aromatic atoms with at least one legal swap
    let mut sites = Vec::new();
    for i in 0..g.atom_count() {
        if g.atom(i).aromatic {
            continue;
        }
        let load = g.valence_load(i);
        let swaps: Vec<Element> = MUTATION_ELEMENTS
            .iter()
            .copied()
            .filter(|&e| e != g.atom(i).element && e.max_cap() >= load)
            .collect();
        if !swaps.is_empty() {
            sites.push((i, swaps));
        }
    }
    if sites.is_empty() {
        return None;
    }
    let (site, swaps) = &sites[rng.random_range(0..sites.len())];
    let element = swaps[rng.random_range(0..swaps.len())];
    let mut builder = GraphBuilder::from_graph(g);
    builder.set_element(*site, element);
    Some(rebuild(builder))
}

fn change_bond_order(g: &MolecularGraph, rng: &mut ChaCha8Rng) -> Option<MolecularGraph> {
    const ORDERS: [BondOrder; 3] = [BondOrder::Single, BondOrder::Double, BondOrder::Triple];
    let mut sites = Vec::new();
    for bi in 0..g.bond_count() {
        let bond = g.bond(bi);
        if bond.order == BondOrder::Aromatic || g.bond_in_ring(bi) {
            continue;
        }
        let spare_a = g.free_valence(bond.a);
        let spare_b = g.free_valence(bond.b);
        let old_units = bond.order.half_units();
        let fits: Vec<BondOrder> = ORDERS
            .iter()
            .copied()
            .filter(|&o| {
                if o == bond.order {
                    return false;
                }
                let extra = (o.half_units().saturating_sub(old_units)) / 2;
                extra <= spare_a && extra <= spare_b
            })
            .collect();
        if !fits.is_empty() {
            sites.push((bi, fits));
        }
    }
    if sites.is_empty() {
        return None;
    }
    let (bond, fits) = &sites[rng.random_range(0..sites.len())];
    let order = fits[rng.random_range(0..fits.len())];
    let mut builder = GraphBuilder::from_graph(g);
    builder.set_bond_order(*bond, order);
    Some(rebuild(builder))
}

/// Alternately draws parents from the elite queue (uniformly) and from the
/// prior policy (validity-checked sampling, at most `max_attempts` draws
/// per needed parent). Either source falls back to the other; only an empty
/// queue combined with a dry prior is an error.
pub fn select_parents(
    queue: &GenerationQueue,
    p_gamma: &PolicyModel,
    count: usize,
    max_attempts: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Parent>, GaError> {
    let mut parents = Vec::with_capacity(count);
    for slot in 0..count {
        let want_queue = slot % 2 == 0;
        let from_queue = |rng: &mut ChaCha8Rng| -> Option<Parent> {
            queue.pick_uniform(rng).map(|e| Parent {
                graph: chem::parse_smiles(&e.canonical)
                    .expect("queue entries hold canonical strings"),
                origin: ParentOrigin::Queue,
            })
        };
        let from_prior = |rng: &mut ChaCha8Rng| -> Option<Parent> {
            for _ in 0..max_attempts {
                let s = p_gamma.sample_string(&[], rng);
                if let Ok(g) = chem::parse_smiles(&s) {
                    return Some(Parent {
                        graph: g,
                        origin: ParentOrigin::Prior,
                    });
                }
            }
            None
        };
        let parent = if want_queue {
            from_queue(rng).or_else(|| from_prior(rng))
        } else {
            from_prior(rng).or_else(|| from_queue(rng))
        };
        match parent {
            Some(p) => parents.push(p),
            None => return Err(GaError::NoParents),
        }
    }
    Ok(parents)
}

/// Breeds `n_children` offspring from consecutive parent pairs, cycling
/// through the pairs as needed. Oversized offspring (unable to fit the
/// token cap even in canonical form) are replaced by the untouched first
/// parent of the pair.
pub fn breed(
    parents: &[Parent],
    n_children: usize,
    mutation_rate: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<MolecularGraph> {
    assert!(!parents.is_empty(), "breeding requires parents");
    let n_pairs = (parents.len() / 2).max(1);
    let mut children = Vec::with_capacity(n_children);
    for c in 0..n_children {
        let pair = c % n_pairs;
        let a = &parents[(2 * pair) % parents.len()].graph;
        let b = &parents[(2 * pair + 1) % parents.len()].graph;
        let mut child = crossover(a, b, rng).unwrap_or_else(|| a.clone());
        if rng.random::<f64>() < mutation_rate {
            if let Some(m) = mutate(&child, rng) {
                child = m;
            }
        }
        if child.atom_count() > MAX_TOKENS {
            child = a.clone();
        }
        children.push(child);
    }
    children
}
