//! `MPF1` float maps: magic, little-endian `u32` width/height/channels, then
//! row-major little-endian `f32` samples with NaN marking invalid pixels.

use std::path::Path;

use crate::raster::ImageGrid;
use crate::{Error, Result};

pub const MPF_MAGIC: &[u8; 4] = b"MPF1";
const HEADER_LEN: usize = 16;

pub fn encode_mpf(grid: &ImageGrid) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + grid.data().len() * 4);
    out.extend_from_slice(MPF_MAGIC);
    for d in [grid.width(), grid.height(), grid.channels()] {
        out.extend_from_slice(&(d as u32).to_le_bytes());
    }
    let c = grid.channels();
    for (i, x) in grid.data().iter().enumerate() {
        let x = if grid.valid_mask()[i / c] { *x } else { f32::NAN };
        out.extend_from_slice(&x.to_le_bytes());
    }
    out
}

/// A pixel is valid when none of its channels is NaN.
pub fn decode_mpf(bytes: &[u8]) -> Result<ImageGrid> {
    if bytes.len() < HEADER_LEN || &bytes[..4] != MPF_MAGIC {
        return Err(Error::Format("missing MPF1 header".into()));
    }
    let word = |k: usize| u32::from_le_bytes(bytes[4 + 4 * k..8 + 4 * k].try_into().expect("4 bytes")) as usize;
    let (w, h, c) = (word(0), word(1), word(2));
    if c != 1 && c != 3 {
        return Err(Error::Format(format!("channel count {c} is not 1 or 3")));
    }
    let expected = w
        .checked_mul(h)
        .and_then(|n| n.checked_mul(c))
        .and_then(|n| n.checked_mul(4))
        .ok_or_else(|| Error::Format("header dimensions overflow".into()))?;
    if bytes.len() - HEADER_LEN != expected {
        return Err(Error::Format(format!(
            "payload has {} bytes, header implies {expected}",
            bytes.len() - HEADER_LEN
        )));
    }
    let data: Vec<f32> = bytes[HEADER_LEN..]
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes(b.try_into().expect("4 bytes")))
        .collect();
    let valid: Vec<bool> = data.chunks_exact(c).map(|px| px.iter().all(|x| !x.is_nan())).collect();
    ImageGrid::from_parts(w, h, c, data, valid)
}

pub fn save_mpf(path: impl AsRef<Path>, grid: &ImageGrid) -> Result<()> {
    std::fs::write(path, encode_mpf(grid))?;
    Ok(())
}

pub fn load_mpf(path: impl AsRef<Path>) -> Result<ImageGrid> {
    decode_mpf(&std::fs::read(path)?)
}
