//! Deterministic synthetic palpation clips.
//!
//! A clip is a fixed camera view of one breast quadrant with a finger disc
//! pressing in and out. Finger depth follows a raised-cosine sweep over the
//! cell's depth envelope. The grayscale frame is a shaded dome whose shadow
//! ring around the finger widens and darkens with press depth, so texture
//! carries the pressure signal.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataio::{Clip, Split};
use crate::error::{Error, Result};
use crate::pressure::{crisp_label, thresholds};
use crate::reference::{envelope_for, CellCounts};
use crate::rng::Rng;
use crate::roi::DepthStats;
use crate::types::{BinaryMask, CupSize, DepthFrame, Frame, GrayImage, MaskPair, PressureLevel, Quadrant};

const BACKGROUND_OFFSET_MM: f64 = 60.0;
const BACKGROUND_LEVEL: f64 = 55.0;
const SKIN_ALBEDO: f64 = 205.0;
const FINGER_LEVEL: f64 = 168.0;
const HOLE_FRACTION: f64 = 0.01;
/// Corpus clips get one palpation cycle per this many frames.
const FRAMES_PER_CYCLE: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub cup: CupSize,
    pub quadrant: Quadrant,
    pub n_frames: usize,
    pub frame_size: usize,
    pub seed: u64,
    pub noise_sigma: f64,
    pub palpation_cycles: usize,
}

impl SynthConfig {
    pub fn new(cup: CupSize, quadrant: Quadrant, n_frames: usize, seed: u64) -> Self {
        SynthConfig {
            cup,
            quadrant,
            n_frames,
            frame_size: 128,
            seed,
            noise_sigma: 4.0,
            palpation_cycles: 6,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_frames < 2 {
            return Err(Error::Config(format!(
                "n_frames must be at least 2, got {}",
                self.n_frames
            )));
        }
        if self.frame_size < 64 {
            return Err(Error::Config(format!(
                "frame_size must be at least 64, got {}",
                self.frame_size
            )));
        }
        if self.palpation_cycles == 0 {
            return Err(Error::Config("palpation_cycles must be positive".into()));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::Config(format!(
                "noise_sigma must be non-negative, got {}",
                self.noise_sigma
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthClip {
    pub config: SynthConfig,
    pub frames: Vec<Frame>,
    pub truth_depths: Vec<f64>,
    /// The configured envelope, not a statistic of `truth_depths`.
    pub stats: DepthStats,
}

impl SynthClip {
    /// Labels the generator intends, from the true depths and the envelope.
    pub fn intended_labels(&self) -> Vec<PressureLevel> {
        let t = thresholds(&self.stats).expect("envelopes are non-degenerate");
        self.truth_depths.iter().map(|&d| crisp_label(d, &t)).collect()
    }
}

/// Apex protrusion towards the camera, in millimetres.
pub fn cup_protrusion(cup: CupSize) -> f64 {
    match cup {
        CupSize::A => 25.0,
        CupSize::B => 45.0,
        CupSize::C => 65.0,
    }
}

/// Quadrant rectangle `[x0, x1) x [y0, y1)` for a frame of `size` pixels.
/// Q2 is the upper half of the breast, Q3 the lower; the right breast is
/// the mirror image of the left.
pub fn quadrant_rect(quadrant: Quadrant, size: usize) -> (usize, usize, usize, usize) {
    let c = size / 2;
    let r = (size as f64 * 0.45) as usize;
    let (left_side, upper) = match quadrant {
        Quadrant::LeftQ2 => (false, true),
        Quadrant::LeftQ3 => (false, false),
        Quadrant::RightQ2 => (true, true),
        Quadrant::RightQ3 => (true, false),
    };
    let (x0, x1) = if left_side { (c - r, c) } else { (c, c + r) };
    let (y0, y1) = if upper { (c - r, c) } else { (c, c + r) };
    (x0, y0, x1, y1)
}

/// Smooth lattice noise with unit-ish amplitude.
struct ValueNoise {
    cell: f64,
    cols: usize,
    lattice: Vec<f64>,
}

impl ValueNoise {
    fn new(rng: &mut Rng, size: usize, cell: f64) -> Self {
        let cols = (size as f64 / cell).ceil() as usize + 2;
        ValueNoise {
            cell,
            cols,
            lattice: (0..cols * cols).map(|_| rng.normal()).collect(),
        }
    }

    fn at(&self, x: f64, y: f64) -> f64 {
        let (gx, gy) = (x / self.cell, y / self.cell);
        let (ix, iy) = (gx.floor() as usize, gy.floor() as usize);
        let smooth = |t: f64| t * t * (3.0 - 2.0 * t);
        let (tx, ty) = (smooth(gx - ix as f64), smooth(gy - iy as f64));
        let v = |i: usize, j: usize| self.lattice[j * self.cols + i];
        let top = v(ix, iy) * (1.0 - tx) + v(ix + 1, iy) * tx;
        let bottom = v(ix, iy + 1) * (1.0 - tx) + v(ix + 1, iy + 1) * tx;
        top * (1.0 - ty) + bottom * ty
    }
}

/// Raised-cosine press depth at frame `t`, before jitter.
pub fn press_waveform(min: f64, max: f64, cycles: usize, t: usize, n: usize) -> f64 {
    let phase = std::f64::consts::TAU * cycles as f64 * t as f64 / n as f64;
    min + (max - min) * (1.0 - phase.cos()) / 2.0
}

struct Scene {
    size: usize,
    centre: f64,
    radius: f64,
    background_mm: f64,
    protrusion: f64,
    rect: (usize, usize, usize, usize),
    finger_home: (f64, f64),
    finger_radius: f64,
    texture: ValueNoise,
    noise_sigma: f64,
}

impl Scene {
    fn new(config: &SynthConfig, stats: &DepthStats, rng: &mut Rng) -> Self {
        let size = config.frame_size;
        let rect = quadrant_rect(config.quadrant, size);
        let finger_radius = size as f64 * 0.055;
        // keep the finger and its widest shadow ring inside the box
        let margin = finger_radius + size as f64 * 0.06;
        let (x0, y0, x1, y1) = rect;
        let home = (
            rng.uniform(x0 as f64 + margin, x1 as f64 - margin),
            rng.uniform(y0 as f64 + margin, y1 as f64 - margin),
        );
        Scene {
            size,
            centre: size as f64 / 2.0,
            radius: size as f64 * 0.47,
            background_mm: stats.max() + BACKGROUND_OFFSET_MM,
            protrusion: cup_protrusion(config.cup),
            rect,
            finger_home: home,
            finger_radius,
            texture: ValueNoise::new(rng, size, 8.0),
            noise_sigma: config.noise_sigma,
        }
    }

    /// Dome height above the background plane (mm) at pixel `(x, y)`.
    fn dome(&self, x: f64, y: f64) -> f64 {
        let r2 = ((x - self.centre).powi(2) + (y - self.centre).powi(2)) / (self.radius * self.radius);
        if r2 >= 1.0 {
            0.0
        } else {
            self.protrusion * (1.0 - r2).sqrt()
        }
    }

    /// Lambert shading of the dome with light from the upper left.
    fn shade(&self, x: f64, y: f64) -> f64 {
        if self.dome(x, y) <= 0.0 {
            return BACKGROUND_LEVEL;
        }
        // exaggerate slopes (mm per pixel) so the curvature is visible
        let k = 1.5;
        let gx = k * (self.dome(x + 0.5, y) - self.dome(x - 0.5, y));
        let gy = k * (self.dome(x, y + 0.5) - self.dome(x, y - 0.5));
        let norm = (gx * gx + gy * gy + 1.0).sqrt();
        let light = [-0.35, -0.35, 0.87];
        let lambert = ((-gx * light[0] - gy * light[1] + light[2]) / norm).max(0.0);
        SKIN_ALBEDO * (0.35 + 0.65 * lambert)
    }

    fn render(&self, truth: f64, press: f64, rng: &mut Rng) -> Result<Frame> {
        let size = self.size;
        let (fx, fy) = (
            self.finger_home.0 + rng.uniform(-1.5, 1.5),
            self.finger_home.1 + rng.uniform(-1.5, 1.5),
        );
        let fr = self.finger_radius;
        // shadow ring: wider and darker with deeper presses
        let ring = 2.0 + press * size as f64 * 0.11;
        let darkness = 0.25 + 0.7 * press;
        let dimple_mm = 4.0 * press;
        let finger_depth = truth.round() as u16;

        let mut gray = Vec::with_capacity(size * size);
        let mut depth = Vec::with_capacity(size * size);
        let mut finger = Vec::with_capacity(size * size);
        for y in 0..size {
            for x in 0..size {
                let (px, py) = (x as f64 + 0.5, y as f64 + 0.5);
                let dist = ((px - fx).powi(2) + (py - fy).powi(2)).sqrt();
                let on_finger = dist <= fr;
                let dome = self.dome(px, py);
                let mut level = self.shade(px, py);
                let mut d = self.background_mm - dome;
                if on_finger {
                    level = FINGER_LEVEL * (1.0 - 0.15 * (dist / fr));
                    d = truth;
                } else if dist < fr + ring && dome > 0.0 {
                    let u = (dist - fr) / ring;
                    level *= 1.0 - darkness * (1.0 - u).powf(0.8);
                    d += dimple_mm * (1.0 - u);
                }
                if dome > 0.0 || on_finger {
                    level += self.noise_sigma * self.texture.at(px, py);
                }
                level += 0.5 * self.noise_sigma * rng.normal();
                gray.push(level.round().clamp(0.0, 255.0) as u8);
                depth.push(if on_finger {
                    finger_depth
                } else {
                    d.round().clamp(1.0, 65535.0) as u16
                });
                finger.push(on_finger);
            }
        }

        let (x0, y0, x1, y1) = self.rect;
        let box_mask = BinaryMask::rect(size, size, x0, y0, x1, y1)?;
        let finger = BinaryMask::new(size, size, finger)?;
        // knock out sensor holes inside the palpation ROI
        let roi: Vec<usize> = (0..size * size)
            .filter(|&i| finger.data()[i] && box_mask.data()[i])
            .collect();
        let holes = (roi.len() as f64 * HOLE_FRACTION).round() as usize;
        let mut picks = roi;
        rng.shuffle(&mut picks);
        for &i in picks.iter().take(holes) {
            depth[i] = 0;
        }
        Frame::new(
            GrayImage::new(size, size, gray)?,
            DepthFrame::new(size, size, depth)?,
            MaskPair::new(box_mask, finger)?,
        )
    }
}

pub fn generate_clip(config: &SynthConfig) -> Result<SynthClip> {
    config.validate()?;
    let env = envelope_for(config.cup, config.quadrant);
    let stats = DepthStats::new(env.min, env.max)?;
    let mut rng = Rng::new(config.seed);
    let scene = Scene::new(config, &stats, &mut rng);
    let jitter = 0.03 * stats.range();
    let n = config.n_frames;
    let truth_depths: Vec<f64> = (0..n)
        .map(|t| {
            let d = press_waveform(stats.min(), stats.max(), config.palpation_cycles, t, n);
            (d + rng.uniform(-jitter, jitter)).clamp(stats.min(), stats.max())
        })
        .collect();
    let frame_seeds: Vec<u64> = (0..n).map(|_| rng.next_seed()).collect();
    let frames = truth_depths
        .par_iter()
        .zip(&frame_seeds)
        .map(|(&truth, &seed)| {
            let press = (truth - stats.min()) / stats.range();
            scene.render(truth, press, &mut Rng::new(seed))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SynthClip {
        config: config.clone(),
        frames,
        truth_depths,
        stats,
    })
}

/// Palpation cycles used for a corpus clip of `n` frames.
pub fn corpus_cycles(n: usize) -> usize {
    ((n as f64 / FRAMES_PER_CYCLE as f64).round() as usize).max(1)
}

pub fn clip_id(cup: CupSize, quadrant: Quadrant, split: Split) -> String {
    let cup = match cup {
        CupSize::A => "A",
        CupSize::B => "B",
        CupSize::C => "C",
    };
    format!("cup{cup}_{}_{}", quadrant.name(), split.name())
}

/// Rendering knobs shared by every clip of a corpus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorpusOptions {
    pub frame_size: usize,
    pub noise_sigma: f64,
}

impl Default for CorpusOptions {
    fn default() -> Self {
        let c = SynthConfig::new(CupSize::A, Quadrant::LeftQ2, 2, 0);
        CorpusOptions {
            frame_size: c.frame_size,
            noise_sigma: c.noise_sigma,
        }
    }
}

/// One train clip and one test clip per planned cell, sized to the plan.
pub fn generate_corpus(plan: &[CellCounts], seed: u64) -> Result<Vec<Clip>> {
    generate_corpus_with(plan, seed, &CorpusOptions::default())
}

pub fn generate_corpus_with(plan: &[CellCounts], seed: u64, options: &CorpusOptions) -> Result<Vec<Clip>> {
    let jobs: Vec<(usize, &CellCounts, Split, usize)> = plan
        .iter()
        .enumerate()
        .flat_map(|(i, c)| [(i, c, Split::Train, c.train), (i, c, Split::Test, c.test)])
        .filter(|&(_, _, _, n)| n > 0)
        .collect();
    jobs.par_iter()
        .map(|&(i, cell, split, n)| {
            let key = 2 * i as u64 + u64::from(split == Split::Test);
            let mut config = SynthConfig::new(cell.cup, cell.quadrant, n, Rng::derive(seed, key).next_seed());
            config.palpation_cycles = corpus_cycles(n);
            config.frame_size = options.frame_size;
            config.noise_sigma = options.noise_sigma;
            let clip = generate_clip(&config)?;
            Ok(Clip {
                id: clip_id(cell.cup, cell.quadrant, split),
                cup: cell.cup,
                quadrant: cell.quadrant,
                split,
                frames: clip.frames,
                truth_depths: Some(clip.truth_depths),
                generator: Some(config),
            })
        })
        .collect()
}
