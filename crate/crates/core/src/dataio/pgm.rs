//! Binary PGM (P5) rasters: 8-bit intensities and masks, 16-bit big-endian depth.

use std::path::Path;

use crate::error::{Error, Result};
use crate::types::{BinaryMask, DepthFrame, GrayImage};

fn header(width: usize, height: usize, maxval: u16) -> Vec<u8> {
    format!("P5\n{width} {height}\n{maxval}\n").into_bytes()
}

pub fn encode_gray(img: &GrayImage) -> Vec<u8> {
    let mut out = header(img.width(), img.height(), 255);
    out.extend_from_slice(img.data());
    out
}

pub fn encode_depth(depth: &DepthFrame) -> Vec<u8> {
    let mut out = header(depth.width(), depth.height(), 65535);
    out.reserve(depth.data().len() * 2);
    for &v in depth.data() {
        out.extend_from_slice(&v.to_be_bytes());
    }
    out
}

pub fn encode_mask(mask: &BinaryMask) -> Vec<u8> {
    let mut out = header(mask.width(), mask.height(), 255);
    out.extend(mask.data().iter().map(|&b| if b { 255u8 } else { 0 }));
    out
}

/// Parsed P5 header and the offset of the first sample byte.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PgmHeader {
    pub width: usize,
    pub height: usize,
    pub maxval: u32,
    pub data_offset: usize,
}

pub fn parse_header(bytes: &[u8]) -> std::result::Result<PgmHeader, String> {
    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        return Err("missing P5 magic".into());
    }
    let mut pos = 2;
    let mut fields = [0u32; 3];
    for field in fields.iter_mut() {
        // whitespace and comments before each field
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                Some(_) => break,
                None => return Err("truncated header".into()),
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        if start == pos {
            return Err(format!("expected a number at byte {start}"));
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .unwrap()
            .parse()
            .map_err(|e| format!("bad header number: {e}"))?;
    }
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        _ => return Err("header must end with a single whitespace byte".into()),
    }
    let [width, height, maxval] = fields;
    if width == 0 || height == 0 {
        return Err(format!("empty raster {width}x{height}"));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(format!("maxval {maxval} out of range"));
    }
    Ok(PgmHeader {
        width: width as usize,
        height: height as usize,
        maxval,
        data_offset: pos,
    })
}

fn samples(bytes: &[u8], path: &Path, expected_maxval: u32) -> Result<(usize, usize, Vec<u16>)> {
    let err = |reason: String| Error::Pgm {
        path: path.to_path_buf(),
        reason,
    };
    let h = parse_header(bytes).map_err(err)?;
    if h.maxval != expected_maxval {
        return Err(err(format!("maxval {} (expected {expected_maxval})", h.maxval)));
    }
    let wide = h.maxval > 255;
    let n = h.width * h.height;
    let need = n * if wide { 2 } else { 1 };
    let payload = &bytes[h.data_offset..];
    if payload.len() != need {
        return Err(err(format!("payload has {} bytes, expected {need}", payload.len())));
    }
    let values = if wide {
        payload
            .chunks_exact(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]))
            .collect()
    } else {
        payload.iter().map(|&b| b as u16).collect()
    };
    Ok((h.width, h.height, values))
}

pub fn decode_gray(bytes: &[u8], path: &Path) -> Result<GrayImage> {
    let (w, h, v) = samples(bytes, path, 255)?;
    GrayImage::new(w, h, v.into_iter().map(|x| x as u8).collect())
}

pub fn decode_depth(bytes: &[u8], path: &Path) -> Result<DepthFrame> {
    let (w, h, v) = samples(bytes, path, 65535)?;
    DepthFrame::new(w, h, v)
}

/// Masks must contain only 0 and 255.
pub fn decode_mask(bytes: &[u8], path: &Path) -> Result<BinaryMask> {
    let (w, h, v) = samples(bytes, path, 255)?;
    let data = v
        .into_iter()
        .map(|x| match x {
            0 => Ok(false),
            255 => Ok(true),
            other => Err(Error::Pgm {
                path: path.to_path_buf(),
                reason: format!("mask sample {other} is neither 0 nor 255"),
            }),
        })
        .collect::<Result<Vec<_>>>()?;
    BinaryMask::new(w, h, data)
}
