//! Target profiles, value oracles, and the shaped reward.
//!
//! A [`SampleProfile`] is a fixed-length real vector identifying one
//! scoring context (the target, or one member of an adversary panel). A
//! [`ValueOracle`] maps a molecule and a profile to a scalar value; lower
//! values are better for the target. The built-in [`SurrogateOracle`] is a
//! clamped linear probe over the molecule's descriptor vector, cheap enough
//! to call hundreds of thousands of times in tests and examples while still
//! rewarding structure that matches the profile.
//!
//! Selectivity is measured as a z-score: the target value standardized
//! against the same molecule's values over a panel of other profiles, with
//! population (not sample) standard deviation, defined as 0 when the panel
//! values are effectively constant.
//!
//! The shaped reward is
//!
//! ```text
//! R = exp(alpha * (-theta_z + y_z)) + beta * ln(-y_t + theta_t + 1)   if y_t <= theta_t and y_z <= theta_z
//! R = 1                                                               otherwise
//! ```
//!
//! with `alpha < 0`, so the exponential term rises as `y_z` drops below
//! its threshold. A molecule counts as winning exactly when its reward is
//! strictly greater than 1.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chem::{descriptors, MolecularGraph};

/// Length of every profile vector and of the descriptor vector.
pub const PROFILE_DIM: usize = 8;

#[derive(Debug, Error)]
pub enum ProfileError {
    #[error("profile file is malformed: {reason}")]
    BadFile { reason: String },
    #[error("panel has no profiles")]
    EmptyPanel,
    #[error("duplicate profile id {id:?}")]
    DuplicateId { id: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One scoring context: an id and a fixed-length real vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleProfile {
    pub id: String,
    pub values: [f64; PROFILE_DIM],
}

impl SampleProfile {
    pub fn load(path: &Path) -> Result<Self, ProfileError> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| ProfileError::BadFile {
            reason: e.to_string(),
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), ProfileError> {
        write_atomic(path, &serde_json::to_string_pretty(self).unwrap())
    }
}

/// An ordered panel of profiles with unique ids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfilePanel {
    pub profiles: Vec<SampleProfile>,
}

impl ProfilePanel {
    pub fn validate(&self) -> Result<(), ProfileError> {
        if self.profiles.is_empty() {
            return Err(ProfileError::EmptyPanel);
        }
        let mut seen = std::collections::HashSet::new();
        for p in &self.profiles {
            if !seen.insert(p.id.as_str()) {
                return Err(ProfileError::DuplicateId { id: p.id.clone() });
            }
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, ProfileError> {
        let text = std::fs::read_to_string(path)?;
        let panel: ProfilePanel = serde_json::from_str(&text).map_err(|e| ProfileError::BadFile {
            reason: e.to_string(),
        })?;
        panel.validate()?;
        Ok(panel)
    }

    pub fn save(&self, path: &Path) -> Result<(), ProfileError> {
        write_atomic(path, &serde_json::to_string_pretty(self).unwrap())
    }

    pub fn len(&self) -> usize {
        self.profiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }
}

fn write_atomic(path: &Path, text: &str) -> Result<(), ProfileError> {
    crate::util::write_atomic(path, text).map_err(ProfileError::Io)
}

/// Maps a molecule and a profile to a scalar value. Implementations must be
/// deterministic: the same graph and profile always yield the same value.
pub trait ValueOracle: Send + Sync {
    fn value(&self, g: &MolecularGraph, profile: &SampleProfile) -> f64;
}

/// Clamped linear probe: `clamp(bias + profile . descriptors(g), -6, 6)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurrogateOracle {
    pub bias: f64,
}

impl Default for SurrogateOracle {
    fn default() -> Self {
        SurrogateOracle { bias: 0.0 }
    }
}

impl ValueOracle for SurrogateOracle {
    fn value(&self, g: &MolecularGraph, profile: &SampleProfile) -> f64 {
        let d = descriptors(g);
        let dot: f64 = profile.values.iter().zip(d.iter()).map(|(p, x)| p * x).sum();
        (self.bias + dot).clamp(-6.0, 6.0)
    }
}

/// Shaping constants and calibrated thresholds for the reward.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RewardParams {
    /// Exponential slope on the selectivity margin; must be negative.
    pub alpha: f64,
    /// Weight of the logarithmic activity term.
    pub beta: f64,
    /// Activity threshold: only values at or below it can win.
    pub theta_t: f64,
    /// Selectivity threshold: only z-scores at or below it can win.
    pub theta_z: f64,
}

impl Default for RewardParams {
    fn default() -> Self {
        RewardParams {
            alpha: -1.0,
            beta: 1.0,
            theta_t: 1.0,
            theta_z: -2.0,
        }
    }
}

/// The shaped reward; see the module docs for the formula.
pub fn reward(y_t: f64, y_z: f64, params: &RewardParams) -> f64 {
    if y_t <= params.theta_t && y_z <= params.theta_z {
        (params.alpha * (-params.theta_z + y_z)).exp()
            + params.beta * (-y_t + params.theta_t + 1.0).ln()
    } else {
        1.0
    }
}

/// Winning means strictly better than the neutral reward of 1.
pub fn is_winning(reward: f64) -> bool {
    reward > 1.0
}

/// Standardizes `value` against a panel of reference values using the
/// population standard deviation; 0 when the panel is effectively constant.
pub fn z_score(value: f64, panel_values: &[f64]) -> f64 {
    let n = panel_values.len() as f64;
    let mean = panel_values.iter().sum::<f64>() / n;
    let var = panel_values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let sd = var.sqrt();
    if sd < 1e-12 {
        0.0
    } else {
        (value - mean) / sd
    }
}

/// Full score of one molecule against a target and an adversary panel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoredMolecule {
    pub y_t: f64,
    pub y_z: f64,
    pub reward: f64,
    pub winning: bool,
}

/// Oracle values of one molecule over every profile of a panel, in order.
pub fn panel_values(oracle: &dyn ValueOracle, g: &MolecularGraph, panel: &ProfilePanel) -> Vec<f64> {
    panel.profiles.iter().map(|p| oracle.value(g, p)).collect()
}

/// Scores one molecule: target value, panel z-score, shaped reward.
pub fn score(
    oracle: &dyn ValueOracle,
    g: &MolecularGraph,
    target: &SampleProfile,
    panel: &ProfilePanel,
    params: &RewardParams,
) -> ScoredMolecule {
    let y_t = oracle.value(g, target);
    let y_z = z_score(y_t, &panel_values(oracle, g, panel));
    let r = reward(y_t, y_z, params);
    ScoredMolecule {
        y_t,
        y_z,
        reward: r,
        winning: is_winning(r),
    }
}
