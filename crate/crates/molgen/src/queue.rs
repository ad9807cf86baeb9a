//! Fixed-capacity elite queue of the best molecules seen so far.
//!
//! Entries are keyed by canonical string, so each molecule appears at most
//! once regardless of how many times the search rediscovers it. While the
//! queue has room every new molecule is admitted; at capacity a candidate
//! must strictly beat the current minimum reward, and the entry evicted is
//! the one ranking first under (lowest reward, then latest admission
//! iteration, then lexicographically largest canonical string), so older
//! survivors win ties. Storage is a plain vector in admission order plus a
//! string index; nothing ever iterates a hash map, which keeps runs
//! reproducible.

use std::collections::HashMap;

use crate::reward::ScoredMolecule;

/// One admitted molecule with its score and admission iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct QueueEntry {
    pub canonical: String,
    pub score: ScoredMolecule,
    pub iteration: u64,
}

/// What [`GenerationQueue::admit`] did with a candidate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AdmitOutcome {
    /// Entered the queue; carries the canonical string it displaced when
    /// the queue was full.
    Admitted { evicted: Option<String> },
    /// Already present under the same canonical string.
    Duplicate,
    /// Full queue and no strict improvement over the worst entry.
    Rejected,
}

#[derive(Debug, Clone)]
pub struct GenerationQueue {
    capacity: usize,
    entries: Vec<QueueEntry>,
    index: HashMap<String, usize>,
}

impl GenerationQueue {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "queue capacity must be positive");
        GenerationQueue {
            capacity,
            entries: Vec::new(),
            index: HashMap::new(),
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries in admission order.
    pub fn entries(&self) -> &[QueueEntry] {
        &self.entries
    }

    pub fn contains(&self, canonical: &str) -> bool {
        self.index.contains_key(canonical)
    }

    pub fn min_reward(&self) -> Option<f64> {
        self.entries
            .iter()
            .map(|e| e.score.reward)
            .fold(None, |m, r| Some(m.map_or(r, |m: f64| m.min(r))))
    }

    /// Index of the entry to evict: lowest reward, then latest iteration,
    /// then lexicographically largest canonical string.
    fn eviction_slot(&self) -> usize {
        let mut worst = 0usize;
        for i in 1..self.entries.len() {
            let (a, b) = (&self.entries[i], &self.entries[worst]);
            let key_a = (a.score.reward, std::cmp::Reverse(a.iteration));
            let key_b = (b.score.reward, std::cmp::Reverse(b.iteration));
            let swap = match key_a.partial_cmp(&key_b).expect("rewards are not NaN") {
                std::cmp::Ordering::Less => true,
                std::cmp::Ordering::Greater => false,
                std::cmp::Ordering::Equal => a.canonical > b.canonical,
            };
            if swap {
                worst = i;
            }
        }
        worst
    }

    /// Offers a scored molecule under its canonical string.
    pub fn admit(
        &mut self,
        canonical: &str,
        score: ScoredMolecule,
        iteration: u64,
    ) -> AdmitOutcome {
        if self.index.contains_key(canonical) {
            return AdmitOutcome::Duplicate;
        }
        let mut evicted = None;
        if self.entries.len() == self.capacity {
            let floor = self.min_reward().expect("full queue has a minimum");
            if !(score.reward > floor) {
                return AdmitOutcome::Rejected;
            }
            let slot = self.eviction_slot();
            let out = self.entries.swap_remove(slot);
            self.index.remove(&out.canonical);
            if slot < self.entries.len() {
                // swap_remove moved the former last entry into `slot`
                self.index.insert(self.entries[slot].canonical.clone(), slot);
            }
            evicted = Some(out.canonical);
        }
        self.entries.push(QueueEntry {
            canonical: canonical.to_string(),
            score,
            iteration,
        });
        self.index.insert(canonical.to_string(), self.entries.len() - 1);
        AdmitOutcome::Admitted { evicted }
    }

    /// The `n` best entries by reward, descending; ties favor the earlier
    /// iteration, then the lexicographically smaller canonical string.
    pub fn top(&self, n: usize) -> Vec<&QueueEntry> {
        let mut refs: Vec<&QueueEntry> = self.entries.iter().collect();
        refs.sort_by(|a, b| {
            b.score
                .reward
                .partial_cmp(&a.score.reward)
                .expect("rewards are not NaN")
                .then_with(|| a.iteration.cmp(&b.iteration))
                .then_with(|| a.canonical.cmp(&b.canonical))
        });
        refs.truncate(n);
        refs
    }

    /// A uniformly random entry (admission-order indexed), or `None` when
    /// empty.
    pub fn pick_uniform<R: rand::Rng>(&self, rng: &mut R) -> Option<&QueueEntry> {
        if self.entries.is_empty() {
            return None;
        }
        let i = rng.random_range(0..self.entries.len());
        Some(&self.entries[i])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn scored(reward: f64) -> ScoredMolecule {
        ScoredMolecule {
            y_t: 0.0,
            y_z: 0.0,
            reward,
            winning: reward > 1.0,
        }
    }

    #[test]
    fn admits_until_capacity_then_requires_strict_improvement() {
        let mut q = GenerationQueue::new(2);
        assert_eq!(
            q.admit("CC", scored(1.0), 0),
            AdmitOutcome::Admitted { evicted: None }
        );
        assert_eq!(
            q.admit("CCO", scored(2.0), 0),
            AdmitOutcome::Admitted { evicted: None }
        );
        // equal to the floor: rejected
        assert_eq!(q.admit("CCC", scored(1.0), 1), AdmitOutcome::Rejected);
        assert_eq!(q.admit("CCN", scored(0.5), 1), AdmitOutcome::Rejected);
        // strictly better: evicts the floor entry
        assert_eq!(
            q.admit("CCS", scored(1.5), 1),
            AdmitOutcome::Admitted {
                evicted: Some("CC".into())
            }
        );
        assert_eq!(q.len(), 2);
        assert!(!q.contains("CC"));
        assert!(q.contains("CCS"));
    }

    #[test]
    fn duplicates_are_reported_and_ignored() {
        let mut q = GenerationQueue::new(4);
        q.admit("CCO", scored(2.0), 0);
        assert_eq!(q.admit("CCO", scored(2.0), 3), AdmitOutcome::Duplicate);
        assert_eq!(q.len(), 1);
        assert_eq!(q.entries()[0].iteration, 0, "first admission wins");
    }

    #[test]
    fn eviction_prefers_newest_then_largest_string_on_ties() {
        let mut q = GenerationQueue::new(3);
        q.admit("AAA", scored(1.0), 0);
        q.admit("BBB", scored(1.0), 1);
        q.admit("CCC", scored(1.0), 1);
        // same reward floor everywhere: evict latest iteration, and among
        // iteration ties the lexicographically largest canonical
        let out = q.admit("DDD", scored(2.0), 2);
        assert_eq!(
            out,
            AdmitOutcome::Admitted {
                evicted: Some("CCC".into())
            }
        );
        let out = q.admit("EEE", scored(2.0), 2);
        assert_eq!(
            out,
            AdmitOutcome::Admitted {
                evicted: Some("BBB".into())
            }
        );
        assert!(q.contains("AAA"), "older survivors win ties");
    }

    #[test]
    fn top_sorts_by_reward_then_age_then_string() {
        let mut q = GenerationQueue::new(10);
        q.admit("CC", scored(1.0), 0);
        q.admit("CCO", scored(3.0), 1);
        q.admit("CCN", scored(2.0), 1);
        q.admit("CCS", scored(3.0), 0);
        let top: Vec<&str> = q.top(3).iter().map(|e| e.canonical.as_str()).collect();
        assert_eq!(top, ["CCS", "CCO", "CCN"]);
        let all: Vec<&str> = q.top(99).iter().map(|e| e.canonical.as_str()).collect();
        assert_eq!(all.len(), 4);
        assert_eq!(all[3], "CC");
    }

    #[test]
    fn pick_uniform_is_deterministic_per_seed() {
        let mut q = GenerationQueue::new(10);
        for (i, s) in ["A", "B", "C", "D", "E"].iter().enumerate() {
            q.admit(s, scored(i as f64), 0);
        }
        let mut r1 = ChaCha8Rng::seed_from_u64(5);
        let mut r2 = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            assert_eq!(
                q.pick_uniform(&mut r1).unwrap().canonical,
                q.pick_uniform(&mut r2).unwrap().canonical
            );
        }
    }

    #[test]
    fn min_reward_tracks_the_floor() {
        let mut q = GenerationQueue::new(3);
        assert_eq!(q.min_reward(), None);
        q.admit("A", scored(2.0), 0);
        q.admit("B", scored(0.5), 0);
        assert_eq!(q.min_reward(), Some(0.5));
    }
}
