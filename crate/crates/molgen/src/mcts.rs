//! Guided tree search over token prefixes.
//!
//! The tree's root is the empty string; every other node appends one
//! vocabulary symbol to its parent's prefix, with a dedicated end-marker
//! child completing a molecule. Nodes carry five statistics: the prior
//! probability `P` assigned by the fixed policy at expansion, the selection
//! count `N` (incremented only when the node is chosen during descent), the
//! accumulated reward `S`, and the valid and winning sample counts `N_v`
//! and `N_w`. A node's value is `Q = S / (1 + N_v)`, computed on demand and
//! never stored.
//!
//! One [`step`] descends from the root by repeatedly taking the child that
//! maximizes `Q + c * P * sqrt(sum of sibling N) / (1 + N)`, breaking ties
//! toward the earliest child. Reaching an unexpanded node triggers
//! expansion (one child per symbol, priors from the fixed policy) and a
//! rollout phase: `n` completions of the node's prefix are sampled, a
//! `self_mix` fraction (rounded up) from the self-trained policy and the
//! rest from the prior policy, each from its own pre-drawn seed so that
//! evaluation order cannot influence the run. Valid completions are scored
//! and their summed reward, valid count, and win count are added to every
//! node on the path, root included. If every completion is invalid the
//! path is penalized by one unit of reward instead. Selecting an
//! end-marker child scores that node's completed molecule directly.
//!
//! Offspring of the genetic layer enter the tree through
//! [`SearchTree::insert_shortcut`], which grafts the token path, creating
//! missing nodes, and backs the molecule's score up along it, making deep
//! regions immediately attractive to subsequent descents.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::chem::{self, MAX_TOKENS};
use crate::policy::PolicyModel;
use crate::reward::{score, ProfilePanel, RewardParams, SampleProfile, ScoredMolecule, ValueOracle};

/// One node of the search tree. Statistics are mutated only through
/// [`SearchTree`] operations.
#[derive(Debug, Clone)]
pub struct Node {
    token: Option<u16>,
    parent: Option<usize>,
    children: Vec<usize>,
    expanded: bool,
    prior: f64,
    visits: u64,
    total_reward: f64,
    valid: u64,
    wins: u64,
    depth: usize,
}

impl Node {
    pub fn token(&self) -> Option<u16> {
        self.token
    }

    pub fn parent(&self) -> Option<usize> {
        self.parent
    }

    pub fn children(&self) -> &[usize] {
        &self.children
    }

    pub fn expanded(&self) -> bool {
        self.expanded
    }

    pub fn prior(&self) -> f64 {
        self.prior
    }

    pub fn visits(&self) -> u64 {
        self.visits
    }

    pub fn total_reward(&self) -> f64 {
        self.total_reward
    }

    pub fn valid_count(&self) -> u64 {
        self.valid
    }

    pub fn win_count(&self) -> u64 {
        self.wins
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// `Q = S / (1 + N_v)`.
    pub fn q_value(&self) -> f64 {
        self.total_reward / (1.0 + self.valid as f64)
    }
}

/// Arena-backed prefix tree. Node 0 is the root (empty prefix).
#[derive(Debug, Clone)]
pub struct SearchTree {
    nodes: Vec<Node>,
    vocab_len: usize,
    shortcut_nodes: usize,
}

pub const ROOT: usize = 0;

/// Selection statistics of one candidate child.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChildArm {
    pub prior: f64,
    pub q: f64,
    pub visits: u64,
}

/// Index of the arm maximizing `q + c * prior * sqrt(total) / (1 + visits)`
/// where `total` sums the visits of all arms. Ties resolve to the earliest
/// arm. Returns `None` for an empty slice.
pub fn select_arm(arms: &[ChildArm], c_puct: f64) -> Option<usize> {
    let total: u64 = arms.iter().map(|a| a.visits).sum();
    let sqrt_total = (total as f64).sqrt();
    let mut best: Option<(usize, f64)> = None;
    for (i, arm) in arms.iter().enumerate() {
        let u = arm.q + c_puct * arm.prior * sqrt_total / (1.0 + arm.visits as f64);
        match best {
            Some((_, b)) if u <= b => {}
            _ => best = Some((i, u)),
        }
    }
    best.map(|(i, _)| i)
}

impl SearchTree {
    /// An empty tree over a vocabulary of `vocab_len` real tokens; the end
    /// marker id is `vocab_len`.
    pub fn new(vocab_len: usize) -> Self {
        SearchTree {
            nodes: vec![Node {
                token: None,
                parent: None,
                children: Vec::new(),
                expanded: false,
                prior: 1.0,
                visits: 0,
                total_reward: 0.0,
                valid: 0,
                wins: 0,
                depth: 0,
            }],
            vocab_len,
            shortcut_nodes: 0,
        }
    }

    pub fn end_id(&self) -> u16 {
        self.vocab_len as u16
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn node(&self, id: usize) -> &Node {
        &self.nodes[id]
    }

    /// Total nodes created by shortcut insertion.
    pub fn shortcut_nodes(&self) -> usize {
        self.shortcut_nodes
    }

    /// Token ids on the path from the root to `id`, in string order.
    pub fn prefix(&self, id: usize) -> Vec<u16> {
        let mut tokens = Vec::with_capacity(self.nodes[id].depth);
        let mut at = id;
        while let Some(token) = self.nodes[at].token {
            tokens.push(token);
            at = self.nodes[at].parent.expect("non-root nodes have parents");
        }
        tokens.reverse();
        tokens
    }

    pub fn find_child(&self, id: usize, token: u16) -> Option<usize> {
        self.nodes[id]
            .children
            .iter()
            .copied()
            .find(|&c| self.nodes[c].token == Some(token))
    }

    fn push_child(&mut self, parent: usize, token: u16, prior: f64) -> usize {
        let depth = self.nodes[parent].depth + 1;
        self.nodes.push(Node {
            token: Some(token),
            parent: Some(parent),
            children: Vec::new(),
            expanded: false,
            prior,
            visits: 0,
            total_reward: 0.0,
            valid: 0,
            wins: 0,
            depth,
        });
        let id = self.nodes.len() - 1;
        self.nodes[parent].children.push(id);
        id
    }

    /// Creates any missing children of `id` (one per symbol, end marker
    /// last) and assigns all of them priors from the fixed policy. Prefixes
    /// at the token cap receive only the end-marker child.
    pub fn expand(&mut self, id: usize, p_gamma: &PolicyModel) {
        assert!(!self.nodes[id].expanded, "node {id} is already expanded");
        assert_ne!(self.nodes[id].token, Some(self.end_id()), "end nodes never expand");
        let dist = p_gamma.distribution(&self.prefix(id));
        let at_cap = self.nodes[id].depth >= MAX_TOKENS;
        for token in 0..=self.vocab_len as u16 {
            if at_cap && token != self.end_id() {
                continue;
            }
            let prior = dist[token as usize];
            match self.find_child(id, token) {
                Some(child) => self.nodes[child].prior = prior,
                None => {
                    self.push_child(id, token, prior);
                }
            }
        }
        self.nodes[id].expanded = true;
    }

    /// PUCT choice among the children of `id`; `None` when childless.
    pub fn select_child(&self, id: usize, c_puct: f64) -> Option<usize> {
        let arms: Vec<ChildArm> = self.nodes[id]
            .children
            .iter()
            .map(|&c| ChildArm {
                prior: self.nodes[c].prior,
                q: self.nodes[c].q_value(),
                visits: self.nodes[c].visits,
            })
            .collect();
        select_arm(&arms, c_puct).map(|i| self.nodes[id].children[i])
    }

    /// Adds reward, valid, and win deltas to `id` and every ancestor.
    pub fn backup(&mut self, id: usize, reward_sum: f64, n_valid: u64, n_wins: u64) {
        let mut at = Some(id);
        while let Some(u) = at {
            let node = &mut self.nodes[u];
            node.total_reward += reward_sum;
            node.valid += n_valid;
            node.wins += n_wins;
            at = node.parent;
        }
    }

    /// Penalty backup for an all-invalid rollout batch: one unit of reward
    /// is subtracted along the path; counts stay untouched.
    pub fn penalize(&mut self, id: usize) {
        let mut at = Some(id);
        while let Some(u) = at {
            let node = &mut self.nodes[u];
            node.total_reward -= 1.0;
            at = node.parent;
        }
    }

    fn bump_visits(&mut self, id: usize) {
        self.nodes[id].visits += 1;
    }

    /// Grafts a complete token path (no end marker) into the tree, creating
    /// missing nodes with zero prior, and backs the molecule's score up
    /// from the leaf. Returns the number of nodes created. Later expansion
    /// of a parent fills in the real priors.
    pub fn insert_shortcut(&mut self, tokens: &[u16], reward: f64, winning: bool) -> usize {
        assert!(
            tokens.len() <= MAX_TOKENS,
            "shortcut paths must fit the token cap"
        );
        let mut created = 0;
        let mut at = ROOT;
        for &token in tokens {
            debug_assert!(token < self.end_id());
            at = match self.find_child(at, token) {
                Some(child) => child,
                None => {
                    created += 1;
                    self.push_child(at, token, 0.0)
                }
            };
        }
        self.backup(at, reward, 1, u64::from(winning));
        self.shortcut_nodes += created;
        created
    }
}

/// Where a sampled string came from within a step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SampleSource {
    SelfTrained,
    Prior,
    Terminal,
}

/// One completion drawn during a step, with its score when valid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub string: String,
    pub source: SampleSource,
    pub score: Option<ScoredMolecule>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepKind {
    Expanded,
    Terminal,
}

/// Everything observable about one step: the tokens selected during
/// descent, what happened at the stopping node, every string evaluated,
/// and whether the path was penalized. Replaying a log of these outcomes
/// against a fresh tree reproduces the final statistics exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepOutcome {
    pub path: Vec<u16>,
    pub kind: StepKind,
    pub samples: Vec<SampleRecord>,
    pub penalized: bool,
}

impl StepOutcome {
    /// Number of valid (budget-consuming) samplings in this step.
    pub fn valid_samplings(&self) -> usize {
        self.samples.iter().filter(|s| s.score.is_some()).count()
    }
}

/// Borrowed search dependencies for [`step`].
pub struct StepContext<'a> {
    pub p_gamma: &'a PolicyModel,
    pub p_chi: &'a PolicyModel,
    pub oracle: &'a dyn ValueOracle,
    pub target: &'a SampleProfile,
    pub panel: &'a ProfilePanel,
    pub params: &'a RewardParams,
    pub c_puct: f64,
    pub n_rollouts: usize,
    pub self_mix: f64,
    pub rng: &'a mut ChaCha8Rng,
}

fn evaluate(ctx: &StepContext<'_>, string: String, source: SampleSource) -> SampleRecord {
    let score = chem::parse_smiles(&string)
        .ok()
        .map(|g| score(ctx.oracle, &g, ctx.target, ctx.panel, ctx.params));
    SampleRecord {
        string,
        source,
        score,
    }
}

/// One search iteration; see the module docs for the full flow.
pub fn step(tree: &mut SearchTree, ctx: &mut StepContext<'_>) -> StepOutcome {
    let mut node = ROOT;
    let mut path = Vec::new();
    loop {
        if !tree.node(node).expanded {
            tree.expand(node, ctx.p_gamma);
            let prefix = tree.prefix(node);
            let n_self = (ctx.self_mix * ctx.n_rollouts as f64).ceil() as usize;
            let seeds: Vec<u64> = (0..ctx.n_rollouts).map(|_| ctx.rng.random()).collect();
            let samples: Vec<SampleRecord> = seeds
                .iter()
                .enumerate()
                .map(|(r, &seed)| {
                    let (policy, source) = if r < n_self {
                        (ctx.p_chi, SampleSource::SelfTrained)
                    } else {
                        (ctx.p_gamma, SampleSource::Prior)
                    };
                    let mut rollout_rng = ChaCha8Rng::seed_from_u64(seed);
                    let ids = policy.sample(&prefix, MAX_TOKENS, &mut rollout_rng);
                    evaluate(ctx, policy.vocab().decode(&ids), source)
                })
                .collect();
            let penalized = apply_backup(tree, node, &samples);
            return StepOutcome {
                path,
                kind: StepKind::Expanded,
                samples,
                penalized,
            };
        }
        let child = tree
            .select_child(node, ctx.c_puct)
            .expect("expanded nodes have children");
        tree.bump_visits(child);
        let token = tree.node(child).token.expect("children carry tokens");
        path.push(token);
        if token == tree.end_id() {
            let prefix = tree.prefix(node);
            let string = ctx.p_gamma.vocab().decode(&prefix);
            let record = evaluate(ctx, string, SampleSource::Terminal);
            let samples = vec![record];
            let penalized = apply_backup(tree, child, &samples);
            return StepOutcome {
                path,
                kind: StepKind::Terminal,
                samples,
                penalized,
            };
        }
        node = child;
    }
}

/// Backs up a batch of sample records from `base`; returns whether the
/// all-invalid penalty was applied.
fn apply_backup(tree: &mut SearchTree, base: usize, samples: &[SampleRecord]) -> bool {
    let mut reward_sum = 0.0;
    let mut n_valid = 0u64;
    let mut n_wins = 0u64;
    for s in samples {
        if let Some(sc) = &s.score {
            reward_sum += sc.reward;
            n_valid += 1;
            n_wins += u64::from(sc.winning);
        }
    }
    if n_valid == 0 {
        tree.penalize(base);
        true
    } else {
        tree.backup(base, reward_sum, n_valid, n_wins);
        false
    }
}
