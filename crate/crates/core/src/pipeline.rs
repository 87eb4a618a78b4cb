//! Clip-level orchestration: depth labelling and per-scheme datasets.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataio::{Clip, Split};
use crate::error::{Error, Result};
use crate::features::{extract_with, FeatureConfig, FeatureVector, Scheme, SchemeSet};
use crate::learn::{Dataset, LabeledSample, SampleMeta};
use crate::pressure::{crisp_boundaries, crisp_label, thresholds, PressureThresholds};
use crate::reference::envelope_for;
use crate::roi::{clip_depth_stats, extract_scalar_depth_with, intersect_masks, DepthReducer, DepthStats, RoiDepth};
use crate::types::{CupSize, PressureLevel, Quadrant};

/// Depth statistics and derived cut points for one (cup, quadrant) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellLabeling {
    pub cup: CupSize,
    pub quadrant: Quadrant,
    pub stats: DepthStats,
    pub thresholds: PressureThresholds,
    pub low_medium: f64,
    pub medium_high: f64,
    /// Clips whose readings defined `stats`.
    pub source_clips: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameLabel {
    pub clip: String,
    pub frame_index: usize,
    /// Scalar ROI depth; absent when the frame had no valid reading.
    pub depth: Option<f64>,
    pub valid_pixels: usize,
    pub label: Option<PressureLevel>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Labeling {
    pub reducer: DepthReducer,
    pub cells: Vec<CellLabeling>,
    pub frames: Vec<FrameLabel>,
}

impl Labeling {
    pub fn cell(&self, cup: CupSize, quadrant: Quadrant) -> Option<&CellLabeling> {
        self.cells.iter().find(|c| c.cup == cup && c.quadrant == quadrant)
    }

    pub fn labeled_count(&self) -> usize {
        self.frames.iter().filter(|f| f.label.is_some()).count()
    }

    /// Text table of each cell's MIN, MAX and the three depth ranges.
    pub fn render_ranges(&self) -> String {
        let mut out = format!(
            "{:<6} {:<9} {:>8} {:>8}  {:<19} {:<19} {}\n",
            "cup", "quadrant", "min", "max", "low", "medium", "high"
        );
        for c in &self.cells {
            let (lo, hi) = (c.stats.min(), c.stats.max());
            let range = |a: f64, b: f64| format!("{a:.3} - {b:.3}");
            let _ = writeln!(
                out,
                "{:<6} {:<9} {:>8.1} {:>8.1}  {:<19} {:<19} {}",
                c.cup.to_string(),
                c.quadrant.name(),
                lo,
                hi,
                range(lo, c.low_medium),
                range(c.low_medium, c.medium_high),
                range(c.medium_high, hi)
            );
        }
        out
    }
}

fn clip_depths(clip: &Clip, reducer: DepthReducer) -> Result<Vec<Option<RoiDepth>>> {
    clip.frames
        .par_iter()
        .map(|f| extract_scalar_depth_with(&f.depth, &intersect_masks(&f.masks), reducer))
        .collect()
}

/// Labels every frame from its cell's depth range.
///
/// The range of a (cup, quadrant) cell comes from its train clips, or from
/// all of its clips when none is marked train. Frames without a valid depth
/// reading stay unlabeled.
pub fn label_clips(clips: &[Clip], reducer: DepthReducer) -> Result<Labeling> {
    let depths: Vec<Vec<Option<RoiDepth>>> = clips.iter().map(|c| clip_depths(c, reducer)).collect::<Result<_>>()?;

    let mut by_cell: BTreeMap<(CupSize, Quadrant), Vec<usize>> = BTreeMap::new();
    for (i, c) in clips.iter().enumerate() {
        by_cell.entry((c.cup, c.quadrant)).or_default().push(i);
    }

    let mut cells = Vec::with_capacity(by_cell.len());
    let mut cell_thresholds = BTreeMap::new();
    for (&(cup, quadrant), members) in &by_cell {
        let train: Vec<usize> = members
            .iter()
            .copied()
            .filter(|&i| clips[i].split == Split::Train)
            .collect();
        let mut source = if train.is_empty() { members.clone() } else { train };
        source.sort_by(|&a, &b| clips[a].id.cmp(&clips[b].id));
        let names: Vec<String> = source.iter().map(|&i| clips[i].id.clone()).collect();
        let stats = clip_depth_stats(source.iter().flat_map(|&i| depths[i].iter().flatten()))
            .map_err(|e| Error::DegenerateClip(format!("{cup} {quadrant} (clips {}): {e}", names.join(", "))))?;
        let t = thresholds(&stats)?;
        let (low_medium, medium_high) = crisp_boundaries(&t);
        cell_thresholds.insert((cup, quadrant), t);
        cells.push(CellLabeling {
            cup,
            quadrant,
            stats,
            thresholds: t,
            low_medium,
            medium_high,
            source_clips: names,
        });
    }

    let mut frames = Vec::new();
    for (clip, ds) in clips.iter().zip(&depths) {
        let t = &cell_thresholds[&(clip.cup, clip.quadrant)];
        frames.extend(ds.iter().enumerate().map(|(i, d)| FrameLabel {
            clip: clip.id.clone(),
            frame_index: i,
            depth: d.map(|d| d.value),
            valid_pixels: d.map_or(0, |d| d.valid_pixel_count),
            label: d.map(|d| crisp_label(d.value, t)),
        }));
    }
    Ok(Labeling { reducer, cells, frames })
}

/// Labels a synthetic clip should carry: its true depths against the
/// reference envelope of its cell. `None` without generator ground truth.
pub fn intended_labels(clip: &Clip) -> Option<Vec<PressureLevel>> {
    let truth = clip.truth_depths.as_ref()?;
    let env = envelope_for(clip.cup, clip.quadrant);
    let stats = DepthStats::new(env.min, env.max).ok()?;
    let t = thresholds(&stats).ok()?;
    Some(truth.iter().map(|&d| crisp_label(d, &t)).collect())
}

/// Feature vectors for every labeled frame, one dataset per scheme set.
///
/// Texture is read from the grayscale frame under the quadrant box mask.
/// Each frame is processed once for the union of the requested schemes.
pub fn build_datasets(
    clips: &[Clip],
    labeling: &Labeling,
    sets: &[SchemeSet],
    config: &FeatureConfig,
) -> Result<Vec<Dataset>> {
    let rows = feature_rows(clips, labeling, sets, config)?;
    sets.iter()
        .map(|&set| {
            let mut train = Vec::new();
            let mut test = Vec::new();
            for row in &rows {
                let sample = LabeledSample {
                    features: FeatureVector {
                        values: row.select(set, config),
                        scheme: set,
                    },
                    label: row.label,
                    meta: row.meta.clone(),
                };
                match row.split {
                    Split::Train => train.push(sample),
                    Split::Test => test.push(sample),
                }
            }
            Dataset::new(train, test, set)
        })
        .collect()
}

/// Union-scheme features of one labeled frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRow {
    pub meta: SampleMeta,
    pub split: Split,
    pub label: PressureLevel,
    pub union: SchemeSet,
    pub values: Vec<f64>,
}

impl FeatureRow {
    /// Sub-vector for `set`, which must be contained in `self.union`.
    pub fn select(&self, set: SchemeSet, config: &FeatureConfig) -> Vec<f64> {
        let mut out = Vec::with_capacity(set.dim(config));
        let mut offset = 0;
        for s in self.union.schemes() {
            let d = s.dim(config);
            if set.contains(s) {
                out.extend_from_slice(&self.values[offset..offset + d]);
            }
            offset += d;
        }
        out
    }
}

fn union_of(sets: &[SchemeSet]) -> Result<SchemeSet> {
    let schemes: Vec<Scheme> = Scheme::ALL
        .into_iter()
        .filter(|&s| sets.iter().any(|set| set.contains(s)))
        .collect();
    SchemeSet::new(&schemes)
}

/// Extracts union-scheme features for all labeled frames, ordered by clip
/// id then frame index.
pub fn feature_rows(
    clips: &[Clip],
    labeling: &Labeling,
    sets: &[SchemeSet],
    config: &FeatureConfig,
) -> Result<Vec<FeatureRow>> {
    let union = union_of(sets)?;
    let by_id: BTreeMap<&str, &Clip> = clips.iter().map(|c| (c.id.as_str(), c)).collect();
    let mut jobs: Vec<(&Clip, usize, PressureLevel)> = Vec::new();
    for f in &labeling.frames {
        let Some(label) = f.label else { continue };
        let clip = by_id
            .get(f.clip.as_str())
            .ok_or_else(|| Error::Dataset(format!("labels refer to unknown clip {}", f.clip)))?;
        if f.frame_index >= clip.frames.len() {
            return Err(Error::Dataset(format!(
                "labels refer to frame {} of clip {} which has {} frames",
                f.frame_index,
                f.clip,
                clip.frames.len()
            )));
        }
        jobs.push((clip, f.frame_index, label));
    }
    jobs.sort_by(|a, b| (a.0.id.as_str(), a.1).cmp(&(b.0.id.as_str(), b.1)));
    jobs.par_iter()
        .map(|&(clip, i, label)| {
            let frame = &clip.frames[i];
            let fv = extract_with(&frame.gray, frame.masks.box_mask(), union, config)
                .map_err(|e| Error::Dataset(format!("clip {} frame {i}: {e}", clip.id)))?;
            Ok(FeatureRow {
                meta: SampleMeta {
                    cup: clip.cup,
                    quadrant: clip.quadrant,
                    clip: clip.id.clone(),
                    frame_index: i,
                },
                split: clip.split,
                label,
                union,
                values: fv.values,
            })
        })
        .collect()
}
