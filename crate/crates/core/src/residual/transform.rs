//! Separable integer DCT-II for square blocks of 4..32.
//!
//! Basis matrices hold `round(2^12 * c_k * cos(pi * (2n + 1) * k / 2N))`
//! (`c_0 = 1`, `c_k = sqrt 2`), i.e. the orthonormal basis scaled by
//! `2^12 * sqrt(N)`. Both passes accumulate in `i64` and a single rounding
//! shift per direction brings coefficients to orthonormal scale with
//! [`COEFF_FRAC_BITS`] fractional bits.

use std::sync::OnceLock;

use super::COEFF_FRAC_BITS;

pub const TRANSFORM_SIZES: [usize; 4] = [4, 8, 16, 32];

const BASIS_BITS: u32 = 12;
const MAX_COEFF: i64 = 1 << 22;
const MAX_RESIDUAL: i64 = 1 << 15;

struct Basis {
    n: usize,
    m: Vec<i64>,
    /// Transpose of `m`.
    mt: Vec<i64>,
}

fn basis(n: usize) -> &'static Basis {
    static CACHE: [OnceLock<Basis>; 4] = [
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
    ];
    let idx = match n {
        4 => 0,
        8 => 1,
        16 => 2,
        32 => 3,
        _ => panic!("unsupported transform size {n}"),
    };
    CACHE[idx].get_or_init(|| {
        let scale = f64::from(1u32 << BASIS_BITS);
        let mut m = vec![0i64; n * n];
        for k in 0..n {
            let ck = if k == 0 {
                1.0
            } else {
                std::f64::consts::SQRT_2
            };
            for i in 0..n {
                let a = std::f64::consts::PI * ((2 * i + 1) * k) as f64 / (2 * n) as f64;
                m[k * n + i] = (scale * ck * a.cos()).round() as i64;
            }
        }
        let mt = (0..n * n).map(|j| m[(j % n) * n + j / n]).collect();
        Basis { n, m, mt }
    })
}

#[inline]
fn round_shift(v: i64, s: u32) -> i64 {
    (v + (1i64 << (s - 1))) >> s
}

/// `out = A · X · Bᵀ` style separable pass: applies `basis` (or its
/// transpose) along columns then rows.
fn separable(input: &[i64], b: &Basis, inverse: bool) -> Vec<i64> {
    let n = b.n;
    let a = if inverse { &b.mt } else { &b.m };
    let mut tmp = vec![0i64; n * n];
    // vertical: tmp[k][c] = sum_r a[k][r] * in[r][c]
    for r in 0..n {
        let src = &input[r * n..(r + 1) * n];
        if src.iter().all(|&v| v == 0) {
            continue;
        }
        for k in 0..n {
            let w = a[k * n + r];
            for (d, &s) in tmp[k * n..(k + 1) * n].iter_mut().zip(src) {
                *d += w * s;
            }
        }
    }
    // horizontal: out[k][l] = sum_c tmp[k][c] * a[l][c]
    let mut out = vec![0i64; n * n];
    for k in 0..n {
        let src = &tmp[k * n..(k + 1) * n];
        if src.iter().all(|&v| v == 0) {
            continue;
        }
        for l in 0..n {
            out[k * n + l] = src
                .iter()
                .zip(&a[l * n..(l + 1) * n])
                .map(|(&s, &w)| s * w)
                .sum();
        }
    }
    out
}

/// Forward DCT-II of an `n` x `n` residual block (row-major). Output
/// coefficients are orthonormal-scaled times `2^COEFF_FRAC_BITS`.
pub fn transform_forward(residual: &[i32], n: usize) -> Vec<i32> {
    assert_eq!(residual.len(), n * n);
    let b = basis(n);
    let input: Vec<i64> = residual
        .iter()
        .map(|&v| i64::from(v).clamp(-MAX_RESIDUAL, MAX_RESIDUAL))
        .collect();
    let shift = 2 * BASIS_BITS + n.trailing_zeros() - COEFF_FRAC_BITS;
    separable(&input, b, false)
        .into_iter()
        .map(|v| round_shift(v, shift).clamp(-MAX_COEFF, MAX_COEFF) as i32)
        .collect()
}

/// Inverse of [`transform_forward`].
pub fn transform_inverse(coeffs: &[i32], n: usize) -> Vec<i32> {
    assert_eq!(coeffs.len(), n * n);
    let b = basis(n);
    let input: Vec<i64> = coeffs
        .iter()
        .map(|&v| i64::from(v).clamp(-MAX_COEFF, MAX_COEFF))
        .collect();
    let shift = 2 * BASIS_BITS + n.trailing_zeros() + COEFF_FRAC_BITS;
    separable(&input, b, true)
        .into_iter()
        .map(|v| round_shift(v, shift).clamp(-MAX_RESIDUAL, MAX_RESIDUAL) as i32)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Floating-point orthonormal 2D DCT-II, written directly from the
    /// definition (no separability, no integer basis).
    fn float_dct(x: &[i32], n: usize) -> Vec<f64> {
        let nf = n as f64;
        let c = |k: usize| {
            if k == 0 {
                (1.0 / nf).sqrt()
            } else {
                (2.0 / nf).sqrt()
            }
        };
        let mut out = vec![0.0; n * n];
        for u in 0..n {
            for v in 0..n {
                let mut s = 0.0;
                for r in 0..n {
                    for col in 0..n {
                        s += f64::from(x[r * n + col])
                            * (std::f64::consts::PI * ((2 * r + 1) * u) as f64 / (2.0 * nf)).cos()
                            * (std::f64::consts::PI * ((2 * col + 1) * v) as f64 / (2.0 * nf))
                                .cos();
                    }
                }
                out[u * n + v] = c(u) * c(v) * s;
            }
        }
        out
    }

    fn random_block(rng: &mut ChaCha8Rng, n: usize, amp: i32) -> Vec<i32> {
        (0..n * n).map(|_| rng.gen_range(-amp..=amp)).collect()
    }

    #[test]
    fn dc_block_has_single_coefficient() {
        for &n in &TRANSFORM_SIZES {
            let x = vec![37; n * n];
            let c = transform_forward(&x, n);
            assert!(c[0] > 0);
            assert!(c[1..].iter().all(|&v| v == 0), "n={n}");
            // orthonormal DC = 37 * n, times 2^3
            assert!((c[0] - 37 * n as i32 * 8).abs() <= 1);
        }
    }

    #[test]
    fn matches_float_oracle_8x8() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let x = random_block(&mut rng, 8, 255);
            let c = transform_forward(&x, 8);
            let f = float_dct(&x, 8);
            for (a, b) in c.iter().zip(&f) {
                assert!((f64::from(*a) / 8.0 - b).abs() < 0.5, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn round_trip_within_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for &n in &TRANSFORM_SIZES {
            for _ in 0..50 {
                let x = random_block(&mut rng, n, 255);
                let y = transform_inverse(&transform_forward(&x, n), n);
                for (a, b) in x.iter().zip(&y) {
                    assert!((a - b).abs() <= 1, "n={n}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn parseval_within_a_tenth_of_a_percent() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for &n in &TRANSFORM_SIZES {
            for _ in 0..20 {
                let x = random_block(&mut rng, n, 200);
                let c = transform_forward(&x, n);
                let es: f64 = x.iter().map(|&v| f64::from(v).powi(2)).sum();
                let ec: f64 = c.iter().map(|&v| (f64::from(v) / 8.0).powi(2)).sum();
                assert!((ec - es).abs() / es < 1e-3, "n={n}: {ec} vs {es}");
            }
        }
    }
}
