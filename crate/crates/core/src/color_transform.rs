//! RGB <-> YCoCg colour transforms.
//!
//! `>>` on negative values is an arithmetic (floor) shift throughout; the
//! lifting steps are only exactly invertible with that convention.

/// A colour triple wide enough for residuals pushed through the lifting steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct ColorTriple {
    pub c0: i32,
    pub c1: i32,
    pub c2: i32,
}

impl ColorTriple {
    pub const fn new(c0: i32, c1: i32, c2: i32) -> Self {
        Self { c0, c1, c2 }
    }
}

impl From<(i32, i32, i32)> for ColorTriple {
    fn from((c0, c1, c2): (i32, i32, i32)) -> Self {
        Self { c0, c1, c2 }
    }
}

/// Reversible lifting: `Co = R - B; t = B + (Co >> 1); Cg = G - t; Y = t + (Cg >> 1)`.
/// Defined on all integers, not only `[0, 255]`, so it also applies to
/// prediction residuals.
#[inline]
pub fn act_lossless_forward(r: i32, g: i32, b: i32) -> ColorTriple {
    let co = r - b;
    let t = b + (co >> 1);
    let cg = g - t;
    let y = t + (cg >> 1);
    ColorTriple::new(y, co, cg)
}

#[inline]
pub fn act_lossless_inverse(y: i32, co: i32, cg: i32) -> ColorTriple {
    let t = y - (cg >> 1);
    let g = cg + t;
    let b = t - (co >> 1);
    let r = b + co;
    ColorTriple::new(r, g, b)
}

/// Matrix form: Y = (R + 2G + B)/4, Co = (R - B)/2, Cg = (-R + 2G - B)/4.
#[inline]
pub fn act_lossy_forward(r: i32, g: i32, b: i32) -> ColorTriple {
    let y = (r + 2 * g + b + 2) >> 2;
    let co = (r - b) >> 1;
    let cg = (-r + 2 * g - b + 2) >> 2;
    ColorTriple::new(y, co, cg)
}

/// Unclipped inverse; pictures clip the result, residual paths do not.
#[inline]
pub fn act_lossy_inverse(y: i32, co: i32, cg: i32) -> ColorTriple {
    ColorTriple::new(y + co - cg, y + cg, y - co - cg)
}

/// [`act_lossy_inverse`] clipped to `[0, max]`.
pub fn act_lossy_inverse_clipped(y: i32, co: i32, cg: i32, max: i32) -> ColorTriple {
    let t = act_lossy_inverse(y, co, cg);
    ColorTriple::new(t.c0.clamp(0, max), t.c1.clamp(0, max), t.c2.clamp(0, max))
}
