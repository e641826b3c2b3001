use std::fmt;

use super::{Frame, PlaneBuffer};
use crate::{Error, Result};

/// Per-plane PSNR. A zero-error plane is reported as [`Psnr::Lossless`],
/// never as a large finite number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Psnr {
    Lossless,
    Db(f64),
}

impl Psnr {
    pub fn is_lossless(self) -> bool {
        matches!(self, Psnr::Lossless)
    }

    pub fn db(self) -> Option<f64> {
        match self {
            Psnr::Lossless => None,
            Psnr::Db(v) => Some(v),
        }
    }
}

impl fmt::Display for Psnr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Psnr::Lossless => f.write_str("lossless"),
            Psnr::Db(v) => write!(f, "{v:.4}"),
        }
    }
}

pub fn plane_sse(a: &PlaneBuffer, b: &PlaneBuffer) -> u64 {
    a.samples()
        .iter()
        .zip(b.samples())
        .map(|(&x, &y)| {
            let d = i64::from(x) - i64::from(y);
            (d * d) as u64
        })
        .sum()
}

pub fn psnr_from_mse(mse: f64, bit_depth: u8) -> Psnr {
    if mse == 0.0 {
        return Psnr::Lossless;
    }
    let max = f64::from((1u32 << bit_depth) - 1);
    Psnr::Db(10.0 * (max * max / mse).log10())
}

pub fn psnr(reference: &Frame, reconstructed: &Frame) -> Result<Vec<Psnr>> {
    if !reference.same_geometry(reconstructed)
        || reference.planes.len() != reconstructed.planes.len()
    {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} {:?} vs {}x{} {:?}",
            reference.width(),
            reference.height(),
            reference.chroma_format,
            reconstructed.width(),
            reconstructed.height(),
            reconstructed.chroma_format
        )));
    }
    Ok(reference
        .planes
        .iter()
        .zip(&reconstructed.planes)
        .map(|(a, b)| {
            let n = (a.width() * a.height()) as f64;
            psnr_from_mse(plane_sse(a, b) as f64 / n, a.bit_depth())
        })
        .collect())
}
