//! Depth-pressure estimation for palpation video.
//!
//! Scalar palpation depth comes from the finger-in-quadrant region of a depth
//! frame and is turned into a Low/Medium/High label with a fuzzy quartile
//! scheme. Texture descriptors of the grayscale frame (entropy, shadow area,
//! Laws energy histograms, LBP histograms) then feed classifiers that learn
//! to predict the same label without depth.

pub mod dataio;
pub mod error;
pub mod features;
pub mod learn;
pub mod pipeline;
pub mod pressure;
pub mod reference;
pub mod rng;
pub mod roi;
pub mod synth;
pub mod types;

pub use error::{Error, Result};
pub use types::{BinaryMask, CupSize, DepthFrame, Frame, GrayImage, MaskPair, PressureLevel, Quadrant, Raster};
