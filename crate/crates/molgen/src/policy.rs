//! Sequence policies over molecular string tokens.
//!
//! A [`PolicyModel`] is an order-n count model with add-k smoothing: the
//! probability of the next symbol given the last `order - 1` tokens is
//! `(count(ctx, t) + k) / (count(ctx) + k * V)`, where `V` counts the
//! predictable symbols (every vocabulary token plus the end marker).
//! Sequences are counted with begin padding on the left and one end-marker
//! transition at the close, so every token of every training string
//! contributes exactly one transition.
//!
//! Two policies with this shape drive the search: a fixed prior fitted to
//! a reference corpus, and a self-trained copy that starts identical and is
//! re-weighted during a run by [`PolicyModel::fine_tune`], which adds the
//! batch's own transition counts scaled by a weight. Adding a batch's
//! counts can never lower the model's mean log-likelihood on that batch,
//! which is what makes online self-training safe to apply unconditionally.
//!
//! Models persist as versioned JSON with sparse counts and named tokens;
//! saving, loading, and saving again yields byte-identical files.

use std::collections::BTreeMap;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chem::{self, MAX_TOKENS};

/// Marker spelling used for the begin symbol in serialized contexts.
pub const BEGIN_MARKER: &str = "<begin>";
/// Marker spelling used for the end symbol in serialized counts.
pub const END_MARKER: &str = "<end>";

#[derive(Debug, Error)]
pub enum PolicyError {
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("model order must be at least 1")]
    OrderTooSmall,
    #[error("smoothing constant must be positive")]
    BadSmoothing,
    #[error("string does not tokenize: {0}")]
    Untokenizable(#[from] chem::ChemError),
    #[error("token {token:?} is outside the policy vocabulary")]
    UnsupportedToken { token: String },
    #[error("policy file is malformed: {reason}")]
    BadFile { reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Token inventory for sequence modeling. Ids are dense; the end marker id
/// is `len()` and the begin marker id is `len() + 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocab {
    tokens: Vec<String>,
    index: BTreeMap<String, u16>,
}

impl Vocab {
    /// The full supported token set: ten plain atoms, four aromatic atoms,
    /// three bond symbols, two branch symbols, nine ring digits.
    pub fn full() -> Self {
        const TOKENS: [&str; 28] = [
            "B", "C", "N", "O", "P", "S", "F", "Cl", "Br", "I", "c", "n", "o", "s", "-", "=",
            "#", "(", ")", "1", "2", "3", "4", "5", "6", "7", "8", "9",
        ];
        Vocab::from_tokens(&TOKENS)
    }

    pub fn from_tokens(tokens: &[&str]) -> Self {
        let tokens: Vec<String> = tokens.iter().map(|s| s.to_string()).collect();
        let index = tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u16))
            .collect();
        Vocab { tokens, index }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Number of predictable symbols: every token plus the end marker.
    pub fn predictable(&self) -> usize {
        self.tokens.len() + 1
    }

    pub fn end_id(&self) -> u16 {
        self.tokens.len() as u16
    }

    pub fn begin_id(&self) -> u16 {
        self.tokens.len() as u16 + 1
    }

    pub fn id_of(&self, token: &str) -> Option<u16> {
        self.index.get(token).copied()
    }

    pub fn token(&self, id: u16) -> &str {
        if id == self.end_id() {
            END_MARKER
        } else if id == self.begin_id() {
            BEGIN_MARKER
        } else {
            &self.tokens[id as usize]
        }
    }

    /// Tokenizes a string and maps each token into the vocabulary.
    pub fn encode(&self, s: &str) -> Result<Vec<u16>, PolicyError> {
        let tokens = chem::tokenize(s)?;
        tokens
            .iter()
            .map(|t| {
                self.id_of(t.text).ok_or_else(|| PolicyError::UnsupportedToken {
                    token: t.text.to_string(),
                })
            })
            .collect()
    }

    /// Concatenates token ids back into a string. Ids must be real tokens.
    pub fn decode(&self, ids: &[u16]) -> String {
        ids.iter().map(|&id| self.tokens[id as usize].as_str()).collect()
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PolicyFile {
    version: u32,
    order: usize,
    k: f64,
    vocab: Vec<String>,
    counts: Vec<ContextFile>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ContextFile {
    ctx: Vec<String>,
    next: BTreeMap<String, f64>,
}

/// Smoothed count model over token sequences. See the module docs for the
/// probability formula and counting conventions.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyModel {
    vocab: Vocab,
    order: usize,
    k: f64,
    counts: BTreeMap<Box<[u16]>, BTreeMap<u16, f64>>,
}

impl PolicyModel {
    /// Fits transition counts on a corpus. Every string must tokenize into
    /// the vocabulary.
    pub fn fit<S: AsRef<str>>(
        vocab: Vocab,
        order: usize,
        k: f64,
        corpus: &[S],
    ) -> Result<Self, PolicyError> {
        if order < 1 {
            return Err(PolicyError::OrderTooSmall);
        }
        if !(k > 0.0) {
            return Err(PolicyError::BadSmoothing);
        }
        if corpus.is_empty() {
            return Err(PolicyError::EmptyCorpus);
        }
        let mut model = PolicyModel {
            vocab,
            order,
            k,
            counts: BTreeMap::new(),
        };
        model.accumulate(corpus, 1.0)?;
        Ok(model)
    }

    pub fn vocab(&self) -> &Vocab {
        &self.vocab
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn smoothing(&self) -> f64 {
        self.k
    }

    pub fn context_count(&self) -> usize {
        self.counts.len()
    }

    /// Adds each batch string's transitions, scaled by `weight`. The mean
    /// log-likelihood of the batch under the model cannot decrease.
    pub fn fine_tune<S: AsRef<str>>(&mut self, batch: &[S], weight: f64) -> Result<(), PolicyError> {
        if batch.is_empty() {
            return Ok(());
        }
        if !(weight > 0.0) {
            return Err(PolicyError::BadSmoothing);
        }
        self.accumulate(batch, weight)
    }

    fn accumulate<S: AsRef<str>>(&mut self, corpus: &[S], weight: f64) -> Result<(), PolicyError> {
        let ctx_len = self.order - 1;
        for s in corpus {
            let ids = self.vocab.encode(s.as_ref())?;
            let mut padded = vec![self.vocab.begin_id(); ctx_len];
            padded.extend_from_slice(&ids);
            padded.push(self.vocab.end_id());
            for i in ctx_len..padded.len() {
                let ctx: Box<[u16]> = padded[i - ctx_len..i].into();
                *self.counts.entry(ctx).or_default().entry(padded[i]).or_insert(0.0) += weight;
            }
        }
        Ok(())
    }

    /// The context key for a raw (unpadded) prefix: the last `order - 1`
    /// ids after left-padding with the begin marker.
    fn context_key(&self, prefix: &[u16]) -> Box<[u16]> {
        let ctx_len = self.order - 1;
        let mut key = Vec::with_capacity(ctx_len);
        if prefix.len() < ctx_len {
            key.resize(ctx_len - prefix.len(), self.vocab.begin_id());
            key.extend_from_slice(prefix);
        } else {
            key.extend_from_slice(&prefix[prefix.len() - ctx_len..]);
        }
        key.into_boxed_slice()
    }

    /// Smoothed distribution over the next symbol given a raw prefix.
    /// Index `i < vocab.len()` is token `i`; the last index is the end
    /// marker. Entries sum to 1.
    pub fn distribution(&self, prefix: &[u16]) -> Vec<f64> {
        let key = self.context_key(prefix);
        let v = self.vocab.predictable() as f64;
        let empty = BTreeMap::new();
        let row = self.counts.get(&key).unwrap_or(&empty);
        let total: f64 = row.values().sum();
        let denom = total + self.k * v;
        (0..self.vocab.predictable() as u16)
            .map(|t| (row.get(&t).copied().unwrap_or(0.0) + self.k) / denom)
            .collect()
    }

    /// Smoothed probability of one next symbol given a raw prefix.
    pub fn prob(&self, prefix: &[u16], next: u16) -> f64 {
        self.distribution(prefix)[next as usize]
    }

    /// Sum of transition log-probabilities for a full string, including the
    /// closing end-marker transition.
    pub fn log_likelihood(&self, s: &str) -> Result<f64, PolicyError> {
        let ids = self.vocab.encode(s)?;
        let mut total = 0.0;
        for i in 0..=ids.len() {
            let next = if i == ids.len() { self.vocab.end_id() } else { ids[i] };
            total += self.prob(&ids[..i], next).ln();
        }
        Ok(total)
    }

    /// Samples a completion of `prefix`, one symbol at a time, until the
    /// end marker is drawn or the sequence reaches `max_len` tokens.
    /// Returns the full token sequence (prefix included, end marker not).
    pub fn sample<R: Rng>(&self, prefix: &[u16], max_len: usize, rng: &mut R) -> Vec<u16> {
        let mut seq = prefix.to_vec();
        while seq.len() < max_len {
            let dist = self.distribution(&seq);
            let x: f64 = rng.random();
            let mut acc = 0.0;
            let mut drawn = self.vocab.end_id();
            for (t, p) in dist.iter().enumerate() {
                acc += p;
                if x < acc {
                    drawn = t as u16;
                    break;
                }
            }
            if drawn == self.vocab.end_id() {
                break;
            }
            seq.push(drawn);
        }
        seq
    }

    /// Convenience: sample and decode to a string, capped at the global
    /// token limit.
    pub fn sample_string<R: Rng>(&self, prefix: &[u16], rng: &mut R) -> String {
        let seq = self.sample(prefix, MAX_TOKENS, rng);
        self.vocab.decode(&seq)
    }

    pub fn to_json(&self) -> String {
        let counts = self
            .counts
            .iter()
            .map(|(ctx, row)| ContextFile {
                ctx: ctx.iter().map(|&id| self.vocab.token(id).to_string()).collect(),
                next: row
                    .iter()
                    .map(|(&t, &c)| (self.vocab.token(t).to_string(), c))
                    .collect(),
            })
            .collect();
        let file = PolicyFile {
            version: 1,
            order: self.order,
            k: self.k,
            vocab: self.vocab.tokens.clone(),
            counts,
        };
        serde_json::to_string_pretty(&file).expect("policy serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self, PolicyError> {
        let file: PolicyFile = serde_json::from_str(text).map_err(|e| PolicyError::BadFile {
            reason: e.to_string(),
        })?;
        if file.version != 1 {
            return Err(PolicyError::BadFile {
                reason: format!("unsupported version {}", file.version),
            });
        }
        if file.order < 1 {
            return Err(PolicyError::OrderTooSmall);
        }
        if !(file.k > 0.0) {
            return Err(PolicyError::BadSmoothing);
        }
        let refs: Vec<&str> = file.vocab.iter().map(|s| s.as_str()).collect();
        let vocab = Vocab::from_tokens(&refs);
        let mut counts: BTreeMap<Box<[u16]>, BTreeMap<u16, f64>> = BTreeMap::new();
        let symbol_id = |name: &str| -> Result<u16, PolicyError> {
            if name == END_MARKER {
                Ok(vocab.end_id())
            } else if name == BEGIN_MARKER {
                Ok(vocab.begin_id())
            } else {
                vocab.id_of(name).ok_or_else(|| PolicyError::BadFile {
                    reason: format!("unknown token {name:?} in counts"),
                })
            }
        };
        for entry in &file.counts {
            if entry.ctx.len() != file.order - 1 {
                return Err(PolicyError::BadFile {
                    reason: format!(
                        "context of length {} in an order-{} model",
                        entry.ctx.len(),
                        file.order
                    ),
                });
            }
            let ctx = entry
                .ctx
                .iter()
                .map(|t| symbol_id(t))
                .collect::<Result<Vec<u16>, _>>()?
                .into_boxed_slice();
            let mut row = BTreeMap::new();
            for (name, &c) in &entry.next {
                if !(c > 0.0) {
                    return Err(PolicyError::BadFile {
                        reason: format!("non-positive count for {name:?}"),
                    });
                }
                row.insert(symbol_id(name)?, c);
            }
            if counts.insert(ctx, row).is_some() {
                return Err(PolicyError::BadFile {
                    reason: "duplicate context".into(),
                });
            }
        }
        Ok(PolicyModel {
            vocab,
            order: file.order,
            k: file.k,
            counts,
        })
    }

    /// Writes the model atomically (temp file then rename).
    pub fn save(&self, path: &Path) -> Result<(), PolicyError> {
        crate::util::write_atomic(path, &self.to_json()).map_err(PolicyError::Io)
    }

    pub fn load(path: &Path) -> Result<Self, PolicyError> {
        let text = std::fs::read_to_string(path)?;
        PolicyModel::from_json(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn toy() -> PolicyModel {
        let vocab = Vocab::from_tokens(&["C", "O"]);
        PolicyModel::fit(vocab, 2, 1.0, &["CC", "CO"]).unwrap()
    }

    #[test]
    fn toy_model_probabilities_match_hand_counts() {
        let m = toy();
        let c = m.vocab().id_of("C").unwrap();
        let o = m.vocab().id_of("O").unwrap();
        // context [C] was seen 3 times: C->C, C->O, C->end
        assert_eq!(m.prob(&[c], o), (1.0 + 1.0) / (3.0 + 3.0));
        assert_eq!(m.prob(&[c], c), 1.0 / 3.0);
        assert_eq!(m.prob(&[c], m.vocab().end_id()), 1.0 / 3.0);
        // empty prefix pads to [begin], seen twice, both times -> C
        assert_eq!(m.prob(&[], c), (2.0 + 1.0) / (2.0 + 3.0));
        assert_eq!(m.prob(&[], o), 1.0 / 5.0);
        assert_eq!(m.prob(&[], m.vocab().end_id()), 1.0 / 5.0);
    }

    #[test]
    fn distributions_sum_to_one() {
        let m = toy();
        let c = m.vocab().id_of("C").unwrap();
        for prefix in [vec![], vec![c], vec![c, c]] {
            let sum: f64 = m.distribution(&prefix).iter().sum();
            assert!((sum - 1.0).abs() < 1e-12, "sum {sum}");
        }
        let full = PolicyModel::fit(Vocab::full(), 3, 0.05, &["CCO", "c1ccccc1"]).unwrap();
        let sum: f64 = full.distribution(&[]).iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fine_tuning_shifts_counts_additively() {
        let mut m = toy();
        m.fine_tune(&["CO"], 1.0).unwrap();
        let c = m.vocab().id_of("C").unwrap();
        let o = m.vocab().id_of("O").unwrap();
        // C context now has count 4 (C->C 1, C->O 2, C->end 1)
        assert_eq!(m.prob(&[c], o), (2.0 + 1.0) / (4.0 + 3.0));
    }

    #[test]
    fn fine_tuning_never_lowers_batch_likelihood() {
        let corpus = ["CCO", "CC(C)O", "OCC", "CCCC", "c1ccccc1"];
        let mut m = PolicyModel::fit(Vocab::full(), 4, 0.05, &corpus).unwrap();
        let batch = ["CC(C)O", "CCCO", "OC(C)C"];
        for _ in 0..5 {
            let before: f64 = batch.iter().map(|s| m.log_likelihood(s).unwrap()).sum();
            m.fine_tune(&batch, 0.7).unwrap();
            let after: f64 = batch.iter().map(|s| m.log_likelihood(s).unwrap()).sum();
            assert!(after >= before - 1e-12, "{after} < {before}");
        }
    }

    #[test]
    fn unseen_context_is_uniform() {
        let m = toy();
        let o = m.vocab().id_of("O").unwrap();
        let dist = m.distribution(&[o]); // context [O]... seen once (O->end)
        assert_eq!(dist[0], 1.0 / 4.0); // (0+1)/(1+3)
        let m2 = PolicyModel::fit(Vocab::from_tokens(&["C", "O"]), 3, 1.0, &["C"]).unwrap();
        let oo = [o, o];
        let dist = m2.distribution(&oo); // context [O, O] never seen
        assert!(dist.iter().all(|&p| p == 1.0 / 3.0));
    }

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let corpus = ["CCO", "CCC", "CCN", "CC(C)C", "OCCO"];
        let m = PolicyModel::fit(Vocab::full(), 3, 0.05, &corpus).unwrap();
        let mut r1 = ChaCha8Rng::seed_from_u64(7);
        let mut r2 = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            assert_eq!(m.sample_string(&[], &mut r1), m.sample_string(&[], &mut r2));
        }
    }

    #[test]
    fn json_round_trip_is_lossless_and_stable() {
        let corpus = ["CCO", "CC(=O)O", "c1ccccc1", "CCN"];
        let mut m = PolicyModel::fit(Vocab::full(), 3, 0.05, &corpus).unwrap();
        m.fine_tune(&["CCO"], 0.3).unwrap();
        let json = m.to_json();
        let back = PolicyModel::from_json(&json).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.to_json(), json);
    }

    #[test]
    fn encode_rejects_out_of_vocabulary_tokens() {
        let m = toy();
        assert!(matches!(
            m.vocab().encode("CN").unwrap_err(),
            PolicyError::UnsupportedToken { .. }
        ));
        assert!(matches!(
            Vocab::full().encode("C%12CC%12").unwrap_err(),
            PolicyError::UnsupportedToken { .. }
        ));
        assert!(matches!(
            Vocab::full().encode("C[")
                .unwrap_err(),
            PolicyError::Untokenizable(_)
        ));
    }

    #[test]
    fn log_likelihood_matches_manual_product() {
        let m = toy();
        let c = m.vocab().id_of("C").unwrap();
        let o = m.vocab().id_of("O").unwrap();
        let manual = m.prob(&[], c).ln() + m.prob(&[c], o).ln() + m.prob(&[c, o], m.vocab().end_id()).ln();
        assert_eq!(m.log_likelihood("CO").unwrap(), manual);
    }
}
