//! Goal-directed molecular string generation.
//!
//! `molgen` searches the space of small-molecule strings (a restricted
//! SMILES subset) for candidates that score well against a target profile
//! under a pluggable value oracle. The search couples three mechanisms:
//!
//! - a guided tree search over string prefixes, balancing exploitation of
//!   observed rewards against prior-weighted exploration ([`mcts`])
//! - a genetic layer that recombines and perturbs the best molecules found
//!   so far, injecting its offspring back into the tree as shortcut paths
//!   ([`ga`])
//! - a self-trained sequence policy, initialized from a fixed prior and
//!   fine-tuned online on the search's own best results, which steers both
//!   rollouts and tree expansion ([`policy`])
//!
//! Everything downstream of a seed is deterministic: one seeded generator
//! drives the whole run, collections iterate in fixed orders, and results
//! round-trip losslessly through their file formats.
//!
//! The top-level [`engine`] module ties the pieces together behind a
//! budgeted run loop; [`config`] and [`cli`] expose it as a small command
//! set over TOML configs, and [`fixtures`] generates the synthetic corpora,
//! target profiles, and scoring panels used by the examples and tests.

pub mod chem;
pub mod cli;
pub mod config;
pub mod engine;
pub mod fixtures;
pub mod ga;
pub mod mcts;
pub mod policy;
pub mod queue;
pub mod reward;

pub(crate) mod util;
