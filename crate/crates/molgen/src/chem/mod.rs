//! Molecular strings and graphs.
//!
//! This module covers the chemistry substrate: a lexer and parser for a
//! restricted SMILES subset, a validated molecular graph, an invariant-based
//! canonical form, a fixed-length descriptor vector, and a writer that turns
//! graphs back into parseable strings.
//!
//! Supported subset: organic-set atoms B C N O P S F Cl Br I, aromatic
//! c n o s, bonds `-` `=` `#`, branches, ring closures 1-9 and %nn. No
//! stereochemistry, bracket atoms, charges, or isotopes; those lex as
//! unsupported-feature errors. Inputs longer than 100 tokens are rejected.
//!
//! Entry points:
//! - [`tokenize`] / [`parse`] / [`parse_smiles`]: string to graph
//! - [`is_valid`]: total validity check returning a positioned report
//! - [`canonical_form`]: permutation-invariant canonical string
//! - [`descriptors`]: fixed-length feature vector
//! - [`write_smiles`]: graph to string, round-trips to an isomorphic graph

mod canon;
mod lex;
mod parse;

pub use canon::{canonical_form, write_smiles};
pub use lex::tokenize;
pub use parse::parse;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Maximum accepted input length, in tokens.
pub const MAX_TOKENS: usize = 100;

/// Lexical class of one SMILES token.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Atom,
    Bond,
    BranchOpen,
    BranchClose,
    RingDigit,
}

/// One token with its source text (e.g. `Cl`, `%12`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Token<'a> {
    pub kind: TokenKind,
    pub text: &'a str,
}

/// Error class, reported alongside a token position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorCode {
    Lex,
    Grammar,
    RingUnclosed,
    Valence,
    AromaticAcyclic,
    UnsupportedFeature,
}

impl std::fmt::Display for ErrorCode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ErrorCode::Lex => "lex",
            ErrorCode::Grammar => "grammar",
            ErrorCode::RingUnclosed => "ring-unclosed",
            ErrorCode::Valence => "valence",
            ErrorCode::AromaticAcyclic => "aromatic-acyclic",
            ErrorCode::UnsupportedFeature => "unsupported-feature",
        };
        f.write_str(s)
    }
}

/// Positioned rejection of an input string. `position` is a token index;
/// for errors detected at end of input it is the last token's index.
#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("{code} @{position}")]
pub struct ChemError {
    pub code: ErrorCode,
    pub position: usize,
}

impl ChemError {
    pub fn new(code: ErrorCode, position: usize) -> Self {
        ChemError { code, position }
    }
}

/// Outcome of [`is_valid`]; total over arbitrary input.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub valid: bool,
    pub error: Option<ChemError>,
}

/// Chemical element of the supported subset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Element {
    B,
    C,
    N,
    O,
    P,
    S,
    F,
    Cl,
    Br,
    I,
}

impl Element {
    /// Allowed total valences, ascending. Aromatic bonds count 1.5 and the
    /// per-atom sum is rounded up before comparing against these caps.
    pub fn caps(self) -> &'static [u32] {
        match self {
            Element::B => &[3],
            Element::C => &[4],
            Element::N => &[3],
            Element::O => &[2],
            Element::P => &[3, 5],
            Element::S => &[2, 6],
            Element::F | Element::Cl | Element::Br | Element::I => &[1],
        }
    }

    pub fn max_cap(self) -> u32 {
        *self.caps().last().unwrap()
    }

    /// Whether the aromatic (lowercase) form is part of the subset.
    pub fn supports_aromatic(self) -> bool {
        matches!(self, Element::C | Element::N | Element::O | Element::S)
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Element::B => "B",
            Element::C => "C",
            Element::N => "N",
            Element::O => "O",
            Element::P => "P",
            Element::S => "S",
            Element::F => "F",
            Element::Cl => "Cl",
            Element::Br => "Br",
            Element::I => "I",
        }
    }

    pub fn aromatic_symbol(self) -> Option<&'static str> {
        match self {
            Element::C => Some("c"),
            Element::N => Some("n"),
            Element::O => Some("o"),
            Element::S => Some("s"),
            _ => None,
        }
    }

    pub fn from_symbol(s: &str) -> Option<(Element, bool)> {
        Some(match s {
            "B" => (Element::B, false),
            "C" => (Element::C, false),
            "N" => (Element::N, false),
            "O" => (Element::O, false),
            "P" => (Element::P, false),
            "S" => (Element::S, false),
            "F" => (Element::F, false),
            "Cl" => (Element::Cl, false),
            "Br" => (Element::Br, false),
            "I" => (Element::I, false),
            "c" => (Element::C, true),
            "n" => (Element::N, true),
            "o" => (Element::O, true),
            "s" => (Element::S, true),
            _ => return None,
        })
    }

    pub const ALL: [Element; 10] = [
        Element::B,
        Element::C,
        Element::N,
        Element::O,
        Element::P,
        Element::S,
        Element::F,
        Element::Cl,
        Element::Br,
        Element::I,
    ];
}

/// Bond order. Aromatic counts 1.5 toward valence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BondOrder {
    Single,
    Double,
    Triple,
    Aromatic,
}

impl BondOrder {
    /// Valence contribution in half units (Single = 2, Aromatic = 3).
    pub fn half_units(self) -> u32 {
        match self {
            BondOrder::Single => 2,
            BondOrder::Double => 4,
            BondOrder::Triple => 6,
            BondOrder::Aromatic => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Atom {
    pub element: Element,
    pub aromatic: bool,
    /// Hydrogens implied by the smallest allowed valence cap that fits the
    /// rounded-up bond order sum.
    pub implicit_h: u8,
    /// True when the atom lies on at least one cycle.
    pub in_ring: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bond {
    pub a: usize,
    pub b: usize,
    pub order: BondOrder,
}

/// Structural rejection raised when assembling a graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("graph has no atoms")]
    Empty,
    #[error("bond {bond} references a missing atom")]
    BadBondIndex { bond: usize },
    #[error("bond {bond} is a self loop")]
    SelfLoop { bond: usize },
    #[error("bond {bond} duplicates an existing atom pair")]
    DuplicateBond { bond: usize },
    #[error("atom {atom} is disconnected from atom 0")]
    Disconnected { atom: usize },
    #[error("atom {atom} cannot be aromatic")]
    AromaticElement { atom: usize },
    #[error("bond {bond} is aromatic but joins a non-aromatic atom")]
    AromaticBondEndpoints { bond: usize },
    #[error("atom {atom} exceeds its valence cap")]
    Valence { atom: usize },
    #[error("aromatic atom {atom} is not in a ring")]
    AromaticAcyclic { atom: usize },
}

/// A validated molecular graph: connected, loop-free, at most one bond per
/// atom pair, every atom within its valence cap, every aromatic atom on a
/// cycle. Construction goes through [`GraphBuilder::build`], which asserts
/// all of these.
#[derive(Debug, Clone, PartialEq)]
pub struct MolecularGraph {
    atoms: Vec<Atom>,
    bonds: Vec<Bond>,
    /// adjacency[i] lists (bond index, neighbor atom index)
    adjacency: Vec<Vec<(usize, usize)>>,
    bond_in_ring: Vec<bool>,
}

impl MolecularGraph {
    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn bond_count(&self) -> usize {
        self.bonds.len()
    }

    pub fn atom(&self, i: usize) -> &Atom {
        &self.atoms[i]
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn bond(&self, i: usize) -> &Bond {
        &self.bonds[i]
    }

    pub fn bonds(&self) -> &[Bond] {
        &self.bonds
    }

    /// (bond index, neighbor atom) pairs incident to atom `i`.
    pub fn neighbors(&self, i: usize) -> &[(usize, usize)] {
        &self.adjacency[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    pub fn atom_in_ring(&self, i: usize) -> bool {
        self.atoms[i].in_ring
    }

    pub fn bond_in_ring(&self, i: usize) -> bool {
        self.bond_in_ring[i]
    }

    /// Rounded-up bond order sum, in whole valence units.
    pub fn valence_load(&self, i: usize) -> u32 {
        let half: u32 = self.adjacency[i]
            .iter()
            .map(|&(b, _)| self.bonds[b].order.half_units())
            .sum();
        half.div_ceil(2)
    }

    /// Capacity left before the element's largest allowed valence.
    pub fn free_valence(&self, i: usize) -> u32 {
        self.atoms[i].element.max_cap() - self.valence_load(i)
    }

    /// Independent cycle count (bonds - atoms + 1 for a connected graph).
    pub fn cycle_rank(&self) -> usize {
        self.bonds.len() + 1 - self.atoms.len()
    }
}

/// Mutable staging area for graphs. `build` performs every structural and
/// chemical check and is the only way to obtain a [`MolecularGraph`].
#[derive(Debug, Clone, Default)]
pub struct GraphBuilder {
    atoms: Vec<(Element, bool)>,
    bonds: Vec<(usize, usize, BondOrder)>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        GraphBuilder::default()
    }

    pub fn from_graph(g: &MolecularGraph) -> Self {
        GraphBuilder {
            atoms: g.atoms.iter().map(|a| (a.element, a.aromatic)).collect(),
            bonds: g.bonds.iter().map(|b| (b.a, b.b, b.order)).collect(),
        }
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn bond_count(&self) -> usize {
        self.bonds.len()
    }

    pub fn add_atom(&mut self, element: Element, aromatic: bool) -> usize {
        self.atoms.push((element, aromatic));
        self.atoms.len() - 1
    }

    pub fn add_bond(&mut self, a: usize, b: usize, order: BondOrder) -> usize {
        self.bonds.push((a, b, order));
        self.bonds.len() - 1
    }

    pub fn set_element(&mut self, atom: usize, element: Element) {
        self.atoms[atom].0 = element;
    }

    pub fn set_bond_order(&mut self, bond: usize, order: BondOrder) {
        self.bonds[bond].2 = order;
    }

    /// Removes an atom and its incident bonds, shifting higher indices down.
    pub fn remove_atom(&mut self, atom: usize) {
        self.atoms.remove(atom);
        self.bonds.retain(|&(a, b, _)| a != atom && b != atom);
        for bond in &mut self.bonds {
            if bond.0 > atom {
                bond.0 -= 1;
            }
            if bond.1 > atom {
                bond.1 -= 1;
            }
        }
    }

    pub fn build(self) -> Result<MolecularGraph, GraphError> {
        if self.atoms.is_empty() {
            return Err(GraphError::Empty);
        }
        let n = self.atoms.len();
        let mut seen_pairs = std::collections::HashSet::new();
        for (bi, &(a, b, _)) in self.bonds.iter().enumerate() {
            if a >= n || b >= n {
                return Err(GraphError::BadBondIndex { bond: bi });
            }
            if a == b {
                return Err(GraphError::SelfLoop { bond: bi });
            }
            if !seen_pairs.insert((a.min(b), a.max(b))) {
                return Err(GraphError::DuplicateBond { bond: bi });
            }
        }

        let mut adjacency = vec![Vec::new(); n];
        for (bi, &(a, b, _)) in self.bonds.iter().enumerate() {
            adjacency[a].push((bi, b));
            adjacency[b].push((bi, a));
        }

        // connectivity
        let mut reached = vec![false; n];
        let mut stack = vec![0usize];
        reached[0] = true;
        while let Some(u) = stack.pop() {
            for &(_, v) in &adjacency[u] {
                if !reached[v] {
                    reached[v] = true;
                    stack.push(v);
                }
            }
        }
        if let Some(atom) = reached.iter().position(|&r| !r) {
            return Err(GraphError::Disconnected { atom });
        }

        for (i, &(element, aromatic)) in self.atoms.iter().enumerate() {
            if aromatic && !element.supports_aromatic() {
                return Err(GraphError::AromaticElement { atom: i });
            }
        }
        for (bi, &(a, b, order)) in self.bonds.iter().enumerate() {
            if order == BondOrder::Aromatic && !(self.atoms[a].1 && self.atoms[b].1) {
                return Err(GraphError::AromaticBondEndpoints { bond: bi });
            }
        }

        // valence: smallest allowed cap that fits the rounded-up load
        let mut implicit = vec![0u8; n];
        for i in 0..n {
            let half: u32 = adjacency[i].iter().map(|&(b, _)| self.bonds[b].2.half_units()).sum();
            let load = half.div_ceil(2);
            let cap = self.atoms[i].0.caps().iter().copied().find(|&c| c >= load);
            match cap {
                Some(c) => implicit[i] = (c - load) as u8,
                None => return Err(GraphError::Valence { atom: i }),
            }
        }

        let bond_in_ring = find_ring_bonds(n, &self.bonds, &adjacency);
        let mut atom_in_ring = vec![false; n];
        for (bi, &(a, b, _)) in self.bonds.iter().enumerate() {
            if bond_in_ring[bi] {
                atom_in_ring[a] = true;
                atom_in_ring[b] = true;
            }
        }
        for (i, &(_, aromatic)) in self.atoms.iter().enumerate() {
            if aromatic && !atom_in_ring[i] {
                return Err(GraphError::AromaticAcyclic { atom: i });
            }
        }

        let atoms = self
            .atoms
            .iter()
            .zip(implicit.iter().zip(&atom_in_ring))
            .map(|(&(element, aromatic), (&implicit_h, &in_ring))| Atom {
                element,
                aromatic,
                implicit_h,
                in_ring,
            })
            .collect();
        let bonds = self.bonds.iter().map(|&(a, b, order)| Bond { a, b, order }).collect();
        Ok(MolecularGraph {
            atoms,
            bonds,
            adjacency,
            bond_in_ring,
        })
    }
}

/// Marks non-bridge bonds via an iterative lowlink DFS. A bond lies on a
/// cycle exactly when it is not a bridge.
fn find_ring_bonds(
    n: usize,
    bonds: &[(usize, usize, BondOrder)],
    adjacency: &[Vec<(usize, usize)>],
) -> Vec<bool> {
    let mut in_ring = vec![true; bonds.len()];
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![usize::MAX; n];
    let mut timer = 1usize;
    disc[0] = 0;
    low[0] = 0;
    // frames: (node, incoming bond, next adjacency slot)
    let mut frames: Vec<(usize, usize, usize)> = vec![(0, usize::MAX, 0)];
    while let Some(frame) = frames.last_mut() {
        let (u, in_bond) = (frame.0, frame.1);
        if frame.2 < adjacency[u].len() {
            let (b, v) = adjacency[u][frame.2];
            frame.2 += 1;
            if b == in_bond {
                continue;
            }
            if disc[v] == usize::MAX {
                disc[v] = timer;
                low[v] = timer;
                timer += 1;
                frames.push((v, b, 0));
            } else {
                low[u] = low[u].min(disc[v]);
            }
        } else {
            frames.pop();
            if let Some(parent) = frames.last() {
                let p = parent.0;
                low[p] = low[p].min(low[u]);
                if low[u] > disc[p] {
                    in_ring[in_bond] = false; // bridge
                }
            }
        }
    }
    in_ring
}

/// Total validity check: any string in, a report out.
pub fn is_valid(s: &str) -> ValidationReport {
    match parse_smiles(s) {
        Ok(_) => ValidationReport {
            valid: true,
            error: None,
        },
        Err(e) => ValidationReport {
            valid: false,
            error: Some(e),
        },
    }
}

/// Tokenize and parse in one step.
pub fn parse_smiles(s: &str) -> Result<MolecularGraph, ChemError> {
    let tokens = tokenize(s)?;
    parse(&tokens)
}

/// Fixed-length descriptor vector:
/// `[C, N, O, other-heavy, aromatic, cycle rank, branch points, heavy total]`,
/// the first seven normalized by heavy-atom count, the last by 50. Branch
/// points are counted as sum over atoms of max(0, degree - 2).
pub fn descriptors(g: &MolecularGraph) -> [f64; 8] {
    let heavy = g.atom_count() as f64;
    let mut c = 0.0;
    let mut n = 0.0;
    let mut o = 0.0;
    let mut other = 0.0;
    let mut aromatic = 0.0;
    for atom in g.atoms() {
        match atom.element {
            Element::C => c += 1.0,
            Element::N => n += 1.0,
            Element::O => o += 1.0,
            _ => other += 1.0,
        }
        if atom.aromatic {
            aromatic += 1.0;
        }
    }
    let branches: usize = (0..g.atom_count()).map(|i| g.degree(i).saturating_sub(2)).sum();
    [
        c / heavy,
        n / heavy,
        o / heavy,
        other / heavy,
        aromatic / heavy,
        g.cycle_rank() as f64 / heavy,
        branches as f64 / heavy,
        heavy / 50.0,
    ]
}

/// Number of tokens `s` lexes into, if it lexes at all.
pub fn token_count(s: &str) -> Option<usize> {
    tokenize(s).ok().map(|t| t.len())
}
