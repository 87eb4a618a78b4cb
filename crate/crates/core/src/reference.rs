//! Published per-cell dataset sizes and depth envelopes.

use crate::types::{CupSize, Quadrant};

/// Train/test frame counts for one (cup, quadrant) cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CellCounts {
    pub cup: CupSize,
    pub quadrant: Quadrant,
    pub train: usize,
    pub test: usize,
}

/// Depth envelope (MIN, MAX) in millimetres plus the published range
/// boundaries: end of LOW, start/end of MEDIUM, start of HIGH.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepthEnvelope {
    pub cup: CupSize,
    pub quadrant: Quadrant,
    pub min: f64,
    pub max: f64,
    pub low_end: f64,
    pub medium_start: f64,
    pub medium_end: f64,
    pub high_start: f64,
}

const fn counts(cup: CupSize, quadrant: Quadrant, train: usize, test: usize) -> CellCounts {
    CellCounts {
        cup,
        quadrant,
        train,
        test,
    }
}

#[allow(clippy::too_many_arguments)]
const fn envelope(
    cup: CupSize,
    quadrant: Quadrant,
    min: f64,
    low_end: f64,
    medium_start: f64,
    medium_end: f64,
    high_start: f64,
    max: f64,
) -> DepthEnvelope {
    DepthEnvelope {
        cup,
        quadrant,
        min,
        max,
        low_end,
        medium_start,
        medium_end,
        high_start,
    }
}

use CupSize::{A, B, C};
use Quadrant::{LeftQ2, LeftQ3, RightQ2, RightQ3};

pub const DATASET_COUNTS: [CellCounts; 12] = [
    counts(A, LeftQ2, 101, 18),
    counts(A, LeftQ3, 120, 21),
    counts(A, RightQ2, 105, 18),
    counts(A, RightQ3, 99, 18),
    counts(B, LeftQ2, 142, 25),
    counts(B, LeftQ3, 113, 19),
    counts(B, RightQ2, 120, 21),
    counts(B, RightQ3, 108, 19),
    counts(C, LeftQ2, 61, 11),
    counts(C, LeftQ3, 85, 15),
    counts(C, RightQ2, 75, 13),
    counts(C, RightQ3, 81, 14),
];

/// Published depth ranges, verbatim. Two entries disagree with the 37.5%/62.5%
/// crossover rule by more than rounding would explain:
/// Cup A Right_Q2 starts HIGH at 783.3 while MEDIUM ends at 783.2 (derived
/// 783.25, both within rounding), and Cup C Left_Q2 starts HIGH at 563.6,
/// below its own MIN; the derived value is 593.625 and 563.6 is treated as a
/// mistyped 593.6.
pub const DEPTH_ENVELOPES: [DepthEnvelope; 12] = [
    envelope(A, LeftQ2, 762.0, 774.0, 774.0, 782.0, 782.0, 794.0),
    envelope(A, LeftQ3, 744.0, 754.1, 754.1, 760.9, 760.9, 771.0),
    envelope(A, RightQ2, 772.0, 778.8, 778.8, 783.2, 783.3, 790.0),
    envelope(A, RightQ3, 771.0, 782.3, 782.3, 789.8, 789.8, 801.0),
    envelope(B, LeftQ2, 607.0, 633.6, 633.6, 651.4, 651.4, 678.0),
    envelope(B, LeftQ3, 603.0, 608.3, 608.3, 611.8, 611.8, 617.0),
    envelope(B, RightQ2, 619.0, 643.4, 643.4, 659.6, 659.6, 684.0),
    envelope(B, RightQ3, 614.0, 630.5, 630.5, 641.5, 641.5, 658.0),
    envelope(C, LeftQ2, 568.0, 583.4, 583.4, 593.6, 563.6, 609.0),
    envelope(C, LeftQ3, 563.0, 579.5, 579.5, 590.5, 590.5, 607.0),
    envelope(C, RightQ2, 591.0, 619.9, 619.9, 639.1, 639.1, 668.0),
    envelope(C, RightQ3, 597.0, 625.5, 625.5, 644.5, 644.5, 673.0),
];

pub fn envelope_for(cup: CupSize, quadrant: Quadrant) -> &'static DepthEnvelope {
    DEPTH_ENVELOPES
        .iter()
        .find(|e| e.cup == cup && e.quadrant == quadrant)
        .expect("every cell has an envelope")
}

pub fn counts_for(cup: CupSize, quadrant: Quadrant) -> &'static CellCounts {
    DATASET_COUNTS
        .iter()
        .find(|c| c.cup == cup && c.quadrant == quadrant)
        .expect("every cell has counts")
}

/// Frame-level success rate of the prior entropy-based method.
pub const BASELINE_SUCCESS_RATE: f64 = 0.3333;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn column_sums() {
        let train: usize = DATASET_COUNTS.iter().map(|c| c.train).sum();
        let test: usize = DATASET_COUNTS.iter().map(|c| c.test).sum();
        assert_eq!((train, test), (1210, 212));
    }

    #[test]
    fn lookups() {
        let b = counts_for(B, LeftQ2);
        assert_eq!((b.train, b.test), (142, 25));
        let a = counts_for(A, RightQ3);
        assert_eq!((a.train, a.test), (99, 18));
        assert_eq!(envelope_for(B, LeftQ3).max, 617.0);
    }
}
