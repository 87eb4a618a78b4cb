//! Fuzzy depth-to-pressure conversion.
//!
//! Cut points sit at 25/50/75% of the clip's depth range. Low and Medium share
//! a complementary linear ramp over `[a1, a2]`, Medium and High over `[a2, a3]`,
//! so memberships always sum to one and the crisp label flips at the ramp
//! midpoints (37.5% and 62.5% of the range).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::roi::DepthStats;
use crate::types::PressureLevel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PressureThresholds {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FuzzyMembership {
    pub low: f64,
    pub medium: f64,
    pub high: f64,
}

impl FuzzyMembership {
    pub fn as_array(&self) -> [f64; 3] {
        [self.low, self.medium, self.high]
    }

    /// Argmax; an exact tie goes to the higher pressure.
    pub fn argmax(&self) -> PressureLevel {
        let m = self.as_array();
        let mut best = 0;
        for i in 1..3 {
            if m[i] >= m[best] {
                best = i;
            }
        }
        PressureLevel::from_index(best).unwrap()
    }
}

impl PressureThresholds {
    pub fn from_stats(stats: &DepthStats) -> Self {
        let span = stats.max() - stats.min();
        PressureThresholds {
            a1: 0.25 * span + stats.min(),
            a2: 0.50 * span + stats.min(),
            a3: 0.75 * span + stats.min(),
        }
    }
}

pub fn thresholds(stats: &DepthStats) -> Result<PressureThresholds> {
    if stats.min() >= stats.max() {
        return Err(Error::DegenerateClip(format!(
            "min {} must be below max {}",
            stats.min(),
            stats.max()
        )));
    }
    Ok(PressureThresholds::from_stats(stats))
}

pub fn membership(d: f64, t: &PressureThresholds) -> FuzzyMembership {
    if d <= t.a1 {
        FuzzyMembership {
            low: 1.0,
            medium: 0.0,
            high: 0.0,
        }
    } else if d < t.a2 {
        let low = (t.a2 - d) / (t.a2 - t.a1);
        FuzzyMembership {
            low,
            medium: 1.0 - low,
            high: 0.0,
        }
    } else if d < t.a3 {
        let medium = (t.a3 - d) / (t.a3 - t.a2);
        FuzzyMembership {
            low: 0.0,
            medium,
            high: 1.0 - medium,
        }
    } else {
        FuzzyMembership {
            low: 0.0,
            medium: 0.0,
            high: 1.0,
        }
    }
}

pub fn crisp_label(d: f64, t: &PressureThresholds) -> PressureLevel {
    membership(d, t).argmax()
}

/// Depths where the crisp label changes: (Low|Medium, Medium|High).
pub fn crisp_boundaries(t: &PressureThresholds) -> (f64, f64) {
    ((t.a1 + t.a2) / 2.0, (t.a2 + t.a3) / 2.0)
}
