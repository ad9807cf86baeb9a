//! Token-level grammar checks and graph assembly.
//!
//! The grammar is enforced token by token with positioned errors:
//!
//! - the first token must be an atom (anything else fails its own
//!   current-atom or empty-stack requirement at index 0)
//! - a bond symbol needs a current atom and no bond already pending
//! - `(` needs a current atom, no pending bond, and may not follow `(`
//! - `)` needs a non-empty branch stack, no pending bond, and may not
//!   directly follow `(`
//! - a ring digit needs a current atom and may not follow `(` or `)`; it
//!   consumes a pending bond as that side's explicit order
//! - ring closures reject self loops, duplicate atom pairs, and explicit
//!   orders that disagree between the two sides
//!
//! Errors detected at end of input sit on the last token index, checked in
//! the order pending bond, open branches, open rings. Valence and
//! aromatic-ring violations surface at the offending atom's token index.
//! The default order of an unspecified bond is aromatic when both endpoints
//! are aromatic atoms and single otherwise.

use std::collections::{BTreeMap, HashSet};

use super::lex::ring_id;
use super::{
    BondOrder, ChemError, Element, ErrorCode, GraphBuilder, GraphError, MolecularGraph, Token,
    TokenKind,
};

fn default_order(a_aromatic: bool, b_aromatic: bool) -> BondOrder {
    if a_aromatic && b_aromatic {
        BondOrder::Aromatic
    } else {
        BondOrder::Single
    }
}

pub fn parse(tokens: &[Token<'_>]) -> Result<MolecularGraph, ChemError> {
    if tokens.is_empty() {
        return Err(ChemError::new(ErrorCode::Grammar, 0));
    }
    let mut builder = GraphBuilder::new();
    let mut aromatic = Vec::new();
    let mut atom_token = Vec::new();
    let mut cur: Option<usize> = None;
    let mut stack: Vec<usize> = Vec::new();
    let mut pending: Option<BondOrder> = None;
    // ring id -> (atom that opened it, explicit order on the open side)
    let mut rings: BTreeMap<usize, (usize, Option<BondOrder>)> = BTreeMap::new();
    let mut bonded: HashSet<(usize, usize)> = HashSet::new();

    for (i, tok) in tokens.iter().enumerate() {
        let prev = if i == 0 { None } else { Some(tokens[i - 1].kind) };
        let fail = |code| Err(ChemError::new(code, i));
        match tok.kind {
            TokenKind::Atom => {
                let (element, arom) = Element::from_symbol(tok.text)
                    .unwrap_or((Element::C, false));
                let a = builder.add_atom(element, arom);
                aromatic.push(arom);
                atom_token.push(i);
                if let Some(c) = cur {
                    let order = pending
                        .take()
                        .unwrap_or_else(|| default_order(aromatic[c], arom));
                    builder.add_bond(c, a, order);
                    bonded.insert((c.min(a), c.max(a)));
                }
                cur = Some(a);
            }
            TokenKind::Bond => {
                if cur.is_none() || pending.is_some() {
                    return fail(ErrorCode::Grammar);
                }
                pending = Some(match tok.text {
                    "-" => BondOrder::Single,
                    "=" => BondOrder::Double,
                    _ => BondOrder::Triple,
                });
            }
            TokenKind::BranchOpen => {
                if cur.is_none() || pending.is_some() || prev == Some(TokenKind::BranchOpen) {
                    return fail(ErrorCode::Grammar);
                }
                stack.push(cur.unwrap());
            }
            TokenKind::BranchClose => {
                if pending.is_some() || prev == Some(TokenKind::BranchOpen) || stack.is_empty() {
                    return fail(ErrorCode::Grammar);
                }
                cur = Some(stack.pop().unwrap());
            }
            TokenKind::RingDigit => {
                if cur.is_none()
                    || prev == Some(TokenKind::BranchOpen)
                    || prev == Some(TokenKind::BranchClose)
                {
                    return fail(ErrorCode::Grammar);
                }
                let here = cur.unwrap();
                let id = ring_id(tok.text);
                match rings.remove(&id) {
                    None => {
                        rings.insert(id, (here, pending.take()));
                    }
                    Some((other, open_spec)) => {
                        let close_spec = pending.take();
                        if other == here {
                            return fail(ErrorCode::Grammar);
                        }
                        if let (Some(a), Some(b)) = (open_spec, close_spec) {
                            if a != b {
                                return fail(ErrorCode::Grammar);
                            }
                        }
                        let pair = (other.min(here), other.max(here));
                        if !bonded.insert(pair) {
                            return fail(ErrorCode::Grammar);
                        }
                        let order = close_spec
                            .or(open_spec)
                            .unwrap_or_else(|| default_order(aromatic[other], aromatic[here]));
                        builder.add_bond(other, here, order);
                    }
                }
            }
        }
    }

    let last = tokens.len() - 1;
    if pending.is_some() || !stack.is_empty() {
        return Err(ChemError::new(ErrorCode::Grammar, last));
    }
    if !rings.is_empty() {
        return Err(ChemError::new(ErrorCode::RingUnclosed, last));
    }

    builder.build().map_err(|e| match e {
        GraphError::Valence { atom } => ChemError::new(ErrorCode::Valence, atom_token[atom]),
        GraphError::AromaticAcyclic { atom } => {
            ChemError::new(ErrorCode::AromaticAcyclic, atom_token[atom])
        }
        other => unreachable!("parser produced a structurally invalid graph: {other}"),
    })
}
