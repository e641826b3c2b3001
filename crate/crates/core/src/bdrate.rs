//! Bjontegaard delta rate between two rate-PSNR curves.
//!
//! Each curve is fitted with a cubic polynomial `log10(rate) = p(psnr)`; the
//! difference of the two fits is averaged over the PSNR interval covered by
//! both curves and turned back into a rate ratio.

use crate::{Error, Result};

pub const POINTS_PER_CURVE: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RdPoint {
    /// Bits, or any unit proportional to them.
    pub rate: f64,
    pub psnr: f64,
}

impl RdPoint {
    pub fn new(rate: f64, psnr: f64) -> Self {
        Self { rate, psnr }
    }
}

/// Coefficients `c[0] + c[1] x + c[2] x^2 + c[3] x^3` through four points.
fn fit_cubic(xs: &[f64; 4], ys: &[f64; 4]) -> [f64; 4] {
    let mut m = [[0.0; 5]; 4];
    for i in 0..4 {
        let mut p = 1.0;
        for j in 0..4 {
            m[i][j] = p;
            p *= xs[i];
        }
        m[i][4] = ys[i];
    }
    for col in 0..4 {
        let piv = (col..4)
            .max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))
            .unwrap();
        m.swap(col, piv);
        for r in 0..4 {
            if r != col {
                let f = m[r][col] / m[col][col];
                for c in col..5 {
                    m[r][c] -= f * m[col][c];
                }
            }
        }
    }
    std::array::from_fn(|i| m[i][4] / m[i][i])
}

fn integral(c: &[f64; 4], lo: f64, hi: f64) -> f64 {
    let prim =
        |x: f64| c[0] * x + c[1] * x * x / 2.0 + c[2] * x.powi(3) / 3.0 + c[3] * x.powi(4) / 4.0;
    prim(hi) - prim(lo)
}

fn check_curve(name: &str, pts: &[RdPoint]) -> Result<()> {
    if pts.len() != POINTS_PER_CURVE {
        return Err(Error::Config(format!(
            "{name} curve has {} points, need {POINTS_PER_CURVE}",
            pts.len()
        )));
    }
    if let Some(p) = pts
        .iter()
        .find(|p| !(p.rate > 0.0 && p.rate.is_finite() && p.psnr.is_finite()))
    {
        return Err(Error::Config(format!(
            "{name} curve has an unusable point {p:?}"
        )));
    }
    let mut q: Vec<f64> = pts.iter().map(|p| p.psnr).collect();
    q.sort_by(f64::total_cmp);
    if q.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Config(format!(
            "{name} curve has duplicate PSNR values"
        )));
    }
    Ok(())
}

/// Average rate change of `test` against `anchor` at equal quality, in
/// percent; negative means `test` needs fewer bits.
pub fn bd_rate(anchor: &[RdPoint], test: &[RdPoint]) -> Result<f64> {
    check_curve("anchor", anchor)?;
    check_curve("test", test)?;
    let fit = |pts: &[RdPoint]| {
        let xs = std::array::from_fn(|i| pts[i].psnr);
        let ys = std::array::from_fn(|i| pts[i].rate.log10());
        fit_cubic(&xs, &ys)
    };
    let range = |pts: &[RdPoint]| {
        pts.iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                (lo.min(p.psnr), hi.max(p.psnr))
            })
    };
    let ((alo, ahi), (tlo, thi)) = (range(anchor), range(test));
    let (lo, hi) = (alo.max(tlo), ahi.min(thi));
    if lo >= hi {
        return Err(Error::Config(format!(
            "PSNR ranges do not overlap ({alo:.3}-{ahi:.3} vs {tlo:.3}-{thi:.3})"
        )));
    }
    let (ca, ct) = (fit(anchor), fit(test));
    let avg = (integral(&ct, lo, hi) - integral(&ca, lo, hi)) / (hi - lo);
    Ok((10f64.powf(avg) - 1.0) * 100.0)
}
