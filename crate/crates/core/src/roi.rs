//! Palpation region of interest: mask intersection and the per-frame scalar depth.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{BinaryMask, DepthFrame, MaskPair};

/// One scalar depth reading for a frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoiDepth {
    pub value: f64,
    pub valid_pixel_count: usize,
}

/// MIN/MAX scalar depth over a clip (or a pooled group of clips).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DepthStats {
    min: f64,
    max: f64,
}

impl DepthStats {
    pub fn new(min: f64, max: f64) -> Result<Self> {
        if !(min.is_finite() && max.is_finite()) || min >= max {
            return Err(Error::DegenerateClip(format!("min {min} must be below max {max}")));
        }
        Ok(DepthStats { min, max })
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    pub fn range(&self) -> f64 {
        self.max - self.min
    }
}

/// How valid ROI depths collapse to one number.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DepthReducer {
    #[default]
    Median,
    Mean,
    Min,
}

impl std::str::FromStr for DepthReducer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "median" => Ok(DepthReducer::Median),
            "mean" => Ok(DepthReducer::Mean),
            "min" => Ok(DepthReducer::Min),
            _ => Err(Error::Config(format!(
                "unknown depth reducer {s:?} (expected median, mean or min)"
            ))),
        }
    }
}

pub fn intersect_masks(pair: &MaskPair) -> BinaryMask {
    let (w, h) = pair.dims();
    let data = pair
        .box_mask()
        .data()
        .iter()
        .zip(pair.finger().data())
        .map(|(&a, &b)| a && b)
        .collect();
    BinaryMask::new(w, h, data).expect("mask pair dimensions are validated on construction")
}

/// Median of the nonzero depths under `roi`. `Ok(None)` means the frame has no
/// usable reading and must be skipped.
pub fn extract_scalar_depth(depth: &DepthFrame, roi: &BinaryMask) -> Result<Option<RoiDepth>> {
    extract_scalar_depth_with(depth, roi, DepthReducer::Median)
}

pub fn extract_scalar_depth_with(
    depth: &DepthFrame,
    roi: &BinaryMask,
    reducer: DepthReducer,
) -> Result<Option<RoiDepth>> {
    depth.same_dims(roi)?;
    let mut values: Vec<u16> = depth
        .data()
        .iter()
        .zip(roi.data())
        .filter(|&(&d, &m)| m && d != 0)
        .map(|(&d, _)| d)
        .collect();
    if values.is_empty() {
        return Ok(None);
    }
    let n = values.len();
    let value = match reducer {
        DepthReducer::Median => {
            values.sort_unstable();
            if n % 2 == 1 {
                values[n / 2] as f64
            } else {
                (values[n / 2 - 1] as f64 + values[n / 2] as f64) / 2.0
            }
        }
        DepthReducer::Mean => values.iter().map(|&v| v as f64).sum::<f64>() / n as f64,
        DepthReducer::Min => *values.iter().min().unwrap() as f64,
    };
    Ok(Some(RoiDepth {
        value,
        valid_pixel_count: n,
    }))
}

pub fn clip_depth_stats<'a>(scalars: impl IntoIterator<Item = &'a RoiDepth>) -> Result<DepthStats> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut n = 0usize;
    for s in scalars {
        lo = lo.min(s.value);
        hi = hi.max(s.value);
        n += 1;
    }
    if n == 0 || lo >= hi {
        return Err(Error::DegenerateClip(format!(
            "{n} readings without two distinct values"
        )));
    }
    DepthStats::new(lo, hi)
}
