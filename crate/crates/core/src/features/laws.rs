//! Laws texture energy histograms.
//!
//! The ROI patch has its 15x15 local mean removed, is filtered with the 5x5
//! Laws masks, and symmetric mask pairs are folded into nine rotation
//! invariant energy maps. Each map is scaled so its 99th percentile lands at
//! 255 and histogrammed over the ROI.

use crate::error::{Error, Result};
use crate::types::{BinaryMask, GrayImage};

use super::normalize_counts;

const MEAN_WINDOW: usize = 15;
const KERNEL: usize = 5;

/// 1-D Laws vectors: level, edge, spot, wave, ripple.
pub const L5: [i32; 5] = [1, 4, 6, 4, 1];
pub const E5: [i32; 5] = [-1, -2, 0, 2, 1];
pub const S5: [i32; 5] = [-1, 0, 2, 0, -1];
pub const W5: [i32; 5] = [-1, 2, 0, -2, 1];
pub const R5: [i32; 5] = [1, -4, 6, -4, 1];

/// Vectors entering the nine classic energy maps (W5 unused by them).
const BASIS: [[i32; 5]; 4] = [L5, E5, S5, R5];

/// `(vertical, horizontal)` basis index pairs per map; a pair and its
/// transpose are averaged.
const MAP_PAIRS: [(usize, usize); 9] = [(0, 1), (0, 2), (0, 3), (1, 1), (1, 2), (1, 3), (2, 2), (2, 3), (3, 3)];

pub const LAWS_MAP_NAMES: [&str; 9] = [
    "L5E5/E5L5",
    "L5S5/S5L5",
    "L5R5/R5L5",
    "E5E5",
    "E5S5/S5E5",
    "E5R5/R5E5",
    "S5S5",
    "S5R5/R5S5",
    "R5R5",
];

/// Energy values over the ROI bounding box.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyMap {
    pub name: &'static str,
    pub width: usize,
    pub height: usize,
    pub values: Vec<f64>,
}

/// 5x5 mask as the outer product `column * row^T`.
pub fn laws_mask(vertical: &[i32; 5], horizontal: &[i32; 5]) -> [[i32; 5]; 5] {
    let mut m = [[0; 5]; 5];
    for (r, &v) in vertical.iter().enumerate() {
        for (c, &h) in horizontal.iter().enumerate() {
            m[r][c] = v * h;
        }
    }
    m
}

/// All 25 masks from {L5, E5, S5, W5, R5}.
pub fn all_laws_masks() -> Vec<[[i32; 5]; 5]> {
    let vs = [L5, E5, S5, W5, R5];
    vs.iter()
        .flat_map(|a| vs.iter().map(move |b| laws_mask(a, b)))
        .collect()
}

/// Reflect-101 index into `[0, n)`.
#[inline]
fn reflect(i: isize, n: usize) -> usize {
    let n = n as isize;
    if n == 1 {
        return 0;
    }
    let period = 2 * (n - 1);
    let mut i = i.rem_euclid(period);
    if i >= n {
        i = period - i;
    }
    i as usize
}

struct Patch {
    w: usize,
    h: usize,
    /// `pixel * 225 - window_sum`, exact in integers.
    residual: Vec<i64>,
    roi: Vec<bool>,
}

fn roi_patch(img: &GrayImage, roi: &BinaryMask) -> Result<Patch> {
    img.same_dims(roi)?;
    let (x0, y0, x1, y1) = roi.bounding_box().ok_or(Error::EmptyRoi)?;
    let (w, h) = (x1 - x0 + 1, y1 - y0 + 1);
    if w < MEAN_WINDOW || h < MEAN_WINDOW {
        return Err(Error::RoiTooSmall(format!(
            "bounding box {w}x{h} is below {MEAN_WINDOW}x{MEAN_WINDOW}"
        )));
    }
    let mask: Vec<bool> = (0..h)
        .flat_map(|y| (0..w).map(move |x| (x, y)))
        .map(|(x, y)| roi.at(x0 + x, y0 + y))
        .collect();
    // Non-ROI pixels inside the box take the integer ROI mean so nothing
    // outside the ROI reaches the filters.
    let (sum, n) = mask
        .iter()
        .enumerate()
        .filter(|(_, &m)| m)
        .fold((0u64, 0u64), |(s, n), (i, _)| {
            (s + img.at(x0 + i % w, y0 + i / w) as u64, n + 1)
        });
    let fill = (sum / n) as i64;
    let pixels: Vec<i64> = mask
        .iter()
        .enumerate()
        .map(|(i, &m)| if m { img.at(x0 + i % w, y0 + i / w) as i64 } else { fill })
        .collect();

    // separable box sum with reflected borders
    let r = (MEAN_WINDOW / 2) as isize;
    let mut rows = vec![0i64; w * h];
    for y in 0..h {
        for x in 0..w {
            rows[y * w + x] = (-r..=r).map(|d| pixels[y * w + reflect(x as isize + d, w)]).sum();
        }
    }
    let area = (MEAN_WINDOW * MEAN_WINDOW) as i64;
    let mut residual = vec![0i64; w * h];
    for y in 0..h {
        for x in 0..w {
            let window: i64 = (-r..=r).map(|d| rows[reflect(y as isize + d, h) * w + x]).sum();
            residual[y * w + x] = pixels[y * w + x] * area - window;
        }
    }
    Ok(Patch {
        w,
        h,
        residual,
        roi: mask,
    })
}

/// Separable filter response of `residual` with `vertical x horizontal`.
fn filter(p: &Patch, vertical: &[i32; 5], horizontal: &[i32; 5]) -> Vec<i64> {
    let r = (KERNEL / 2) as isize;
    let (w, h) = (p.w, p.h);
    let mut tmp = vec![0i64; w * h];
    for y in 0..h {
        for x in 0..w {
            tmp[y * w + x] = (0..KERNEL)
                .map(|k| horizontal[k] as i64 * p.residual[y * w + reflect(x as isize + k as isize - r, w)])
                .sum();
        }
    }
    let mut out = vec![0i64; w * h];
    for y in 0..h {
        for x in 0..w {
            out[y * w + x] = (0..KERNEL)
                .map(|k| vertical[k] as i64 * tmp[reflect(y as isize + k as isize - r, h) * w + x])
                .sum();
        }
    }
    out
}

fn energy_maps(p: &Patch) -> Vec<EnergyMap> {
    let scale = (MEAN_WINDOW * MEAN_WINDOW) as f64;
    MAP_PAIRS
        .iter()
        .zip(LAWS_MAP_NAMES)
        .map(|(&(a, b), name)| {
            let fwd = filter(p, &BASIS[a], &BASIS[b]);
            let values = if a == b {
                fwd.iter().map(|&v| v.abs() as f64 / scale).collect()
            } else {
                let rev = filter(p, &BASIS[b], &BASIS[a]);
                fwd.iter()
                    .zip(&rev)
                    .map(|(&u, &v)| (u.abs() + v.abs()) as f64 / (2.0 * scale))
                    .collect()
            };
            EnergyMap {
                name,
                width: p.w,
                height: p.h,
                values,
            }
        })
        .collect()
}

/// The nine energy maps over the ROI bounding box.
pub fn laws_energy_maps(img: &GrayImage, roi: &BinaryMask) -> Result<Vec<EnergyMap>> {
    Ok(energy_maps(&roi_patch(img, roi)?))
}

pub fn laws_histogram(img: &GrayImage, roi: &BinaryMask) -> Result<Vec<f64>> {
    laws_histogram_with(img, roi, 16)
}

pub fn laws_histogram_with(img: &GrayImage, roi: &BinaryMask, bins: usize) -> Result<Vec<f64>> {
    if bins == 0 {
        return Err(Error::Config("Laws histogram needs at least one bin".into()));
    }
    let patch = roi_patch(img, roi)?;
    let mut out = Vec::with_capacity(bins * MAP_PAIRS.len());
    for map in energy_maps(&patch) {
        let mut roi_values: Vec<f64> = map
            .values
            .iter()
            .zip(&patch.roi)
            .filter(|(_, &m)| m)
            .map(|(&v, _)| v)
            .collect();
        let mut sorted = roi_values.clone();
        sorted.sort_by(f64::total_cmp);
        let p99 = sorted[((sorted.len() - 1) as f64 * 0.99).floor() as usize];
        let mut counts = vec![0usize; bins];
        for v in roi_values.iter_mut() {
            let scaled = if p99 > 0.0 { (*v / p99 * 255.0).min(255.0) } else { 0.0 };
            let bin = ((scaled / 256.0 * bins as f64) as usize).min(bins - 1);
            counts[bin] += 1;
        }
        out.extend(normalize_counts(&counts));
    }
    Ok(out)
}
