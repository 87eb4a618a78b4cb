//! Rasters and the small enumerations shared across the pipeline.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row-major raster of `width * height` samples.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Raster<T> {
    width: usize,
    height: usize,
    data: Vec<T>,
}

/// 8-bit grayscale intensities.
pub type GrayImage = Raster<u8>;

/// Depth in millimetres; `0` marks a missing sensor reading.
pub type DepthFrame = Raster<u16>;

pub type BinaryMask = Raster<bool>;

impl<T> Raster<T> {
    pub fn new(width: usize, height: usize, data: Vec<T>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyRaster { width, height });
        }
        if data.len() != width * height {
            return Err(Error::RasterLength {
                width,
                height,
                got: data.len(),
            });
        }
        Ok(Raster { width, height, data })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> T) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> &T {
        &self.data[y * self.width + x]
    }

    pub fn same_dims<U>(&self, other: &Raster<U>) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::DimensionMismatch {
                left: self.dims(),
                right: other.dims(),
            });
        }
        Ok(())
    }

    pub fn map<U>(&self, f: impl Fn(&T) -> U) -> Raster<U> {
        Raster {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(f).collect(),
        }
    }
}

impl<T: Clone> Raster<T> {
    pub fn filled(width: usize, height: usize, value: T) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }
}

impl<T: Copy> Raster<T> {
    #[inline]
    pub fn at(&self, x: usize, y: usize) -> T {
        self.data[y * self.width + x]
    }
}

impl BinaryMask {
    /// Mask that is true inside the half-open rectangle `[x0, x1) x [y0, y1)`.
    pub fn rect(width: usize, height: usize, x0: usize, y0: usize, x1: usize, y1: usize) -> Result<Self> {
        Self::from_fn(width, height, |x, y| x >= x0 && x < x1 && y >= y0 && y < y1)
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.data.iter().any(|&b| b)
    }

    /// Inclusive bounding box `(x0, y0, x1, y1)` of the set pixels.
    pub fn bounding_box(&self) -> Option<(usize, usize, usize, usize)> {
        let mut bbox: Option<(usize, usize, usize, usize)> = None;
        for y in 0..self.height {
            for x in 0..self.width {
                if self.at(x, y) {
                    bbox = Some(match bbox {
                        None => (x, y, x, y),
                        Some((x0, y0, x1, y1)) => (x0.min(x), y0.min(y), x1.max(x), y1.max(y)),
                    });
                }
            }
        }
        bbox
    }
}

/// Quadrant box mask and palpating-finger silhouette for one frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaskPair {
    box_mask: BinaryMask,
    finger: BinaryMask,
}

impl MaskPair {
    pub fn new(box_mask: BinaryMask, finger: BinaryMask) -> Result<Self> {
        box_mask.same_dims(&finger)?;
        Ok(MaskPair { box_mask, finger })
    }

    pub fn box_mask(&self) -> &BinaryMask {
        &self.box_mask
    }

    pub fn finger(&self) -> &BinaryMask {
        &self.finger
    }

    pub fn dims(&self) -> (usize, usize) {
        self.box_mask.dims()
    }
}

/// One RGB-D frame: grayscale intensity, depth and its masks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub gray: GrayImage,
    pub depth: DepthFrame,
    pub masks: MaskPair,
}

impl Frame {
    pub fn new(gray: GrayImage, depth: DepthFrame, masks: MaskPair) -> Result<Self> {
        gray.same_dims(&depth)?;
        if masks.dims() != gray.dims() {
            return Err(Error::DimensionMismatch {
                left: gray.dims(),
                right: masks.dims(),
            });
        }
        Ok(Frame { gray, depth, masks })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PressureLevel {
    Low,
    Medium,
    High,
}

impl PressureLevel {
    pub const ALL: [PressureLevel; 3] = [PressureLevel::Low, PressureLevel::Medium, PressureLevel::High];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }
}

impl fmt::Display for PressureLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PressureLevel::Low => "Low",
            PressureLevel::Medium => "Medium",
            PressureLevel::High => "High",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CupSize {
    A,
    B,
    C,
}

impl CupSize {
    pub const ALL: [CupSize; 3] = [CupSize::A, CupSize::B, CupSize::C];
}

impl fmt::Display for CupSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CupSize::A => "A",
            CupSize::B => "B",
            CupSize::C => "C",
        };
        write!(f, "Cup {s}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Quadrant {
    #[serde(rename = "Left_Q2")]
    LeftQ2,
    #[serde(rename = "Left_Q3")]
    LeftQ3,
    #[serde(rename = "Right_Q2")]
    RightQ2,
    #[serde(rename = "Right_Q3")]
    RightQ3,
}

impl Quadrant {
    pub const ALL: [Quadrant; 4] = [Quadrant::LeftQ2, Quadrant::LeftQ3, Quadrant::RightQ2, Quadrant::RightQ3];

    pub fn name(self) -> &'static str {
        match self {
            Quadrant::LeftQ2 => "Left_Q2",
            Quadrant::LeftQ3 => "Left_Q3",
            Quadrant::RightQ2 => "Right_Q2",
            Quadrant::RightQ3 => "Right_Q3",
        }
    }
}

impl fmt::Display for Quadrant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Quadrant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Quadrant::ALL
            .into_iter()
            .find(|q| q.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown quadrant {s:?}")))
    }
}
