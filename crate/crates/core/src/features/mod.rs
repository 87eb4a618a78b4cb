//! Texture descriptors computed over the quadrant box of a grayscale frame.

pub mod laws;
pub mod lbp;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::types::{BinaryMask, GrayImage};

pub use laws::{laws_energy_maps, laws_histogram, laws_histogram_with, EnergyMap, LAWS_MAP_NAMES};
pub use lbp::{lbp_code, lbp_histogram, LBP_BINS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Scheme {
    Entropy,
    Shadow,
    Law,
    Lbp,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::Entropy, Scheme::Shadow, Scheme::Law, Scheme::Lbp];

    pub fn short_name(self) -> &'static str {
        match self {
            Scheme::Entropy => "Ent",
            Scheme::Shadow => "Sha",
            Scheme::Law => "Law",
            Scheme::Lbp => "LBP",
        }
    }

    fn bit(self) -> u8 {
        1 << (self as u8)
    }

    pub fn dim(self, config: &FeatureConfig) -> usize {
        match self {
            Scheme::Entropy | Scheme::Shadow => 1,
            Scheme::Law => LAWS_MAP_NAMES.len() * config.laws_bins,
            Scheme::Lbp => LBP_BINS,
        }
    }
}

/// Non-empty subset of schemes, iterated in canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SchemeSet(u8);

impl SchemeSet {
    pub fn new(schemes: &[Scheme]) -> Result<Self> {
        let mut bits = 0u8;
        for &s in schemes {
            if bits & s.bit() != 0 {
                return Err(Error::Scheme(format!("duplicate scheme {}", s.short_name())));
            }
            bits |= s.bit();
        }
        if bits == 0 {
            return Err(Error::Scheme("empty scheme set".into()));
        }
        Ok(SchemeSet(bits))
    }

    pub fn single(s: Scheme) -> Self {
        SchemeSet(s.bit())
    }

    pub fn schemes(self) -> impl Iterator<Item = Scheme> {
        Scheme::ALL.into_iter().filter(move |s| self.0 & s.bit() != 0)
    }

    pub fn contains(self, s: Scheme) -> bool {
        self.0 & s.bit() != 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    /// Always false; construction rejects empty sets.
    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn dim(self, config: &FeatureConfig) -> usize {
        self.schemes().map(|s| s.dim(config)).sum()
    }

    /// The four single schemes followed by the six pairs.
    pub fn benchmark_sets() -> Vec<SchemeSet> {
        let mut sets: Vec<SchemeSet> = Scheme::ALL.into_iter().map(SchemeSet::single).collect();
        for (i, &a) in Scheme::ALL.iter().enumerate() {
            for &b in &Scheme::ALL[i + 1..] {
                sets.push(SchemeSet(a.bit() | b.bit()));
            }
        }
        sets
    }

    pub fn name(self) -> String {
        self.schemes().map(Scheme::short_name).collect()
    }
}

impl fmt::Display for SchemeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for SchemeSet {
    type Err = Error;

    /// Parses concatenated short names in any case, e.g. `lawlbp` or `ShaLaw`.
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        let mut rest = lower.as_str();
        let mut schemes = Vec::new();
        'outer: while !rest.is_empty() {
            for scheme in Scheme::ALL {
                let name = scheme.short_name().to_ascii_lowercase();
                if let Some(tail) = rest.strip_prefix(name.as_str()) {
                    schemes.push(scheme);
                    rest = tail;
                    continue 'outer;
                }
            }
            return Err(Error::Scheme(format!("cannot parse scheme set {s:?}")));
        }
        let mut sorted = schemes.clone();
        sorted.sort();
        if sorted != schemes {
            return Err(Error::Scheme(format!(
                "{s:?} is not in canonical order Ent, Sha, Law, LBP"
            )));
        }
        SchemeSet::new(&schemes)
    }
}

impl Serialize for SchemeSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.name())
    }
}

impl<'de> Deserialize<'de> for SchemeSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeatureConfig {
    /// Intensities strictly below this count as shadow.
    pub shadow_threshold: u8,
    pub laws_bins: usize,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            shadow_threshold: 50,
            laws_bins: 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub scheme: SchemeSet,
}

impl FeatureVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn roi_pixels<'a>(img: &'a GrayImage, roi: &'a BinaryMask) -> Result<impl Iterator<Item = u8> + 'a> {
    img.same_dims(roi)?;
    if roi.is_empty() {
        return Err(Error::EmptyRoi);
    }
    Ok(img.data().iter().zip(roi.data()).filter(|(_, &m)| m).map(|(&p, _)| p))
}

/// Shannon entropy in bits of the ROI intensity histogram.
pub fn entropy_feature(img: &GrayImage, roi: &BinaryMask) -> Result<f64> {
    let mut hist = [0usize; 256];
    let mut n = 0usize;
    for p in roi_pixels(img, roi)? {
        hist[p as usize] += 1;
        n += 1;
    }
    let n = n as f64;
    Ok(hist
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum::<f64>()
        .max(0.0))
}

/// Fraction of ROI pixels darker than `threshold`.
pub fn shadow_feature(img: &GrayImage, roi: &BinaryMask, threshold: u8) -> Result<f64> {
    let (mut dark, mut n) = (0usize, 0usize);
    for p in roi_pixels(img, roi)? {
        if p < threshold {
            dark += 1;
        }
        n += 1;
    }
    Ok(dark as f64 / n as f64)
}

pub fn extract(img: &GrayImage, roi: &BinaryMask, scheme: SchemeSet) -> Result<FeatureVector> {
    extract_with(img, roi, scheme, &FeatureConfig::default())
}

pub fn extract_with(
    img: &GrayImage,
    roi: &BinaryMask,
    scheme: SchemeSet,
    config: &FeatureConfig,
) -> Result<FeatureVector> {
    let mut values = Vec::with_capacity(scheme.dim(config));
    for s in scheme.schemes() {
        match s {
            Scheme::Entropy => values.push(entropy_feature(img, roi)?),
            Scheme::Shadow => values.push(shadow_feature(img, roi, config.shadow_threshold)?),
            Scheme::Law => values.extend(laws_histogram_with(img, roi, config.laws_bins)?),
            Scheme::Lbp => values.extend(lbp_histogram(img, roi)?),
        }
    }
    debug_assert!(values.iter().all(|v| v.is_finite()));
    Ok(FeatureVector { values, scheme })
}

/// Normalizes counts to a probability histogram.
pub(crate) fn normalize_counts(counts: &[usize]) -> Vec<f64> {
    let total: usize = counts.iter().sum();
    counts.iter().map(|&c| c as f64 / total as f64).collect()
}
