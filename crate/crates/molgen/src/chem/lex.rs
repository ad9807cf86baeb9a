//! Greedy longest-match tokenizer for the supported string subset.
//!
//! Two-letter symbols (`Cl`, `Br`) win over their one-letter prefixes. Ring
//! closures are a bare digit `1`-`9` or `%` followed by exactly two digits.
//! Characters that belong to the wider SMILES language but not to this
//! subset (brackets, stereo marks, charges, explicit hydrogens, the dot
//! disconnect, aromatic `b`/`p`) are reported as unsupported features;
//! everything else unrecognized is a plain lex error. Error positions are
//! token indices: the number of tokens already produced.

use super::{ChemError, ErrorCode, Token, TokenKind, MAX_TOKENS};

pub fn tokenize(s: &str) -> Result<Vec<Token<'_>>, ChemError> {
    let bytes = s.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        if tokens.len() == MAX_TOKENS {
            return Err(ChemError::new(ErrorCode::Grammar, MAX_TOKENS));
        }
        let pos = tokens.len();
        let (kind, len) = if s[i..].starts_with("Cl") || s[i..].starts_with("Br") {
            (TokenKind::Atom, 2)
        } else {
            match bytes[i] {
                b'B' | b'C' | b'N' | b'O' | b'P' | b'S' | b'F' | b'I' | b'c' | b'n' | b'o'
                | b's' => (TokenKind::Atom, 1),
                b'-' | b'=' | b'#' => (TokenKind::Bond, 1),
                b'(' => (TokenKind::BranchOpen, 1),
                b')' => (TokenKind::BranchClose, 1),
                b'1'..=b'9' => (TokenKind::RingDigit, 1),
                b'%' => {
                    if i + 2 < bytes.len()
                        && bytes[i + 1].is_ascii_digit()
                        && bytes[i + 2].is_ascii_digit()
                    {
                        (TokenKind::RingDigit, 3)
                    } else {
                        return Err(ChemError::new(ErrorCode::Lex, pos));
                    }
                }
                b'[' | b']' | b'@' | b'/' | b'\\' | b'.' | b':' | b'+' | b'*' | b'$' | b'0'
                | b'H' | b'b' | b'p' => {
                    return Err(ChemError::new(ErrorCode::UnsupportedFeature, pos));
                }
                _ => return Err(ChemError::new(ErrorCode::Lex, pos)),
            }
        };
        tokens.push(Token {
            kind,
            text: &s[i..i + len],
        });
        i += len;
    }
    Ok(tokens)
}

/// Numeric ring id of a ring-closure token (`"3"` or `"%12"`).
pub(crate) fn ring_id(text: &str) -> usize {
    match text.strip_prefix('%') {
        Some(two) => two.parse().unwrap(),
        None => text.parse().unwrap(),
    }
}
