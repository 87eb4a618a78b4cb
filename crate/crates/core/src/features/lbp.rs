//! Basic 3x3 local binary patterns with a global 256-bin histogram.

use crate::error::{Error, Result};
use crate::types::{BinaryMask, GrayImage};

use super::normalize_counts;

pub const LBP_BINS: usize = 256;

/// Neighbour offsets starting top-left and going clockwise. The first
/// neighbour is the most significant bit.
const NEIGHBOURS: [(isize, isize); 8] = [(-1, -1), (0, -1), (1, -1), (1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0)];

/// Code at `(x, y)`, or `None` when the 3x3 neighbourhood leaves the image.
/// A neighbour sets its bit when it is `>=` the centre.
pub fn lbp_code(img: &GrayImage, x: usize, y: usize) -> Option<u8> {
    let (w, h) = img.dims();
    if x == 0 || y == 0 || x + 1 >= w || y + 1 >= h {
        return None;
    }
    let center = img.at(x, y);
    let mut code = 0u8;
    for (dx, dy) in NEIGHBOURS {
        let v = img.at((x as isize + dx) as usize, (y as isize + dy) as usize);
        code = (code << 1) | u8::from(v >= center);
    }
    Some(code)
}

fn interior(roi: &BinaryMask, x: usize, y: usize) -> bool {
    let (w, h) = roi.dims();
    if x == 0 || y == 0 || x + 1 >= w || y + 1 >= h {
        return false;
    }
    (y - 1..=y + 1).all(|yy| (x - 1..=x + 1).all(|xx| roi.at(xx, yy)))
}

/// Normalized code histogram over ROI pixels whose whole 3x3 neighbourhood
/// lies inside the ROI.
pub fn lbp_histogram(img: &GrayImage, roi: &BinaryMask) -> Result<Vec<f64>> {
    img.same_dims(roi)?;
    let mut counts = [0usize; LBP_BINS];
    let mut n = 0usize;
    for y in 0..img.height() {
        for x in 0..img.width() {
            if interior(roi, x, y) {
                let code = lbp_code(img, x, y).expect("interior pixels have a full neighbourhood");
                counts[code as usize] += 1;
                n += 1;
            }
        }
    }
    if n == 0 {
        return Err(Error::RoiTooSmall("no ROI pixel has a full 3x3 neighbourhood".into()));
    }
    Ok(normalize_counts(&counts))
}
