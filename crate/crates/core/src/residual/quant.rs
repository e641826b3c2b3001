/// Fractional bits carried by transform coefficients.
pub const COEFF_FRAC_BITS: u32 = 3;

/// round(2^16 * 2^(r/6)) for r = 0..5.
const STEP_TABLE: [u64; 6] = [65536, 73562, 82570, 92682, 104032, 116772];

/// Uniform scalar quantizer with step `2^((qp - 4) / 6)`, held in 16.16 fixed
/// point so encoder and decoder agree bit-exactly on every platform.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuantParams {
    pub qp: u8,
    pub lossless: bool,
}

impl QuantParams {
    pub fn new(qp: u8, lossless: bool) -> Self {
        assert!(qp <= 51, "qp {qp} out of range");
        Self { qp, lossless }
    }

    /// Step size in 1/65536 units.
    pub fn step_fp(&self) -> u64 {
        let e = i32::from(self.qp) - 4;
        let base = STEP_TABLE[e.rem_euclid(6) as usize];
        let shift = e.div_euclid(6);
        if shift >= 0 {
            base << shift
        } else {
            base >> (-shift)
        }
    }

    pub fn step(&self) -> f64 {
        self.step_fp() as f64 / 65536.0
    }

    /// `sign(x) * floor(|x| / step + 1/2)`; identity in lossless mode.
    #[inline]
    pub fn quantize(&self, x: i32) -> i32 {
        if self.lossless {
            return x;
        }
        quantize_fp(x, self.step_fp())
    }

    #[inline]
    pub fn dequantize(&self, level: i32) -> i32 {
        if self.lossless {
            return level;
        }
        dequantize_fp(level, self.step_fp())
    }

    /// Quantizes a transform coefficient carrying [`COEFF_FRAC_BITS`].
    #[inline]
    pub fn quantize_coeff(&self, c: i32) -> i32 {
        quantize_fp(c, self.step_fp() << COEFF_FRAC_BITS)
    }

    #[inline]
    pub fn dequantize_coeff(&self, level: i32) -> i32 {
        dequantize_fp(level, self.step_fp() << COEFF_FRAC_BITS)
    }
}

#[inline]
fn quantize_fp(x: i32, step: u64) -> i32 {
    let mag = ((u64::from(x.unsigned_abs()) << 16) + step / 2) / step;
    let mag = mag.min(super::MAX_ABS_LEVEL as u64) as i32;
    if x < 0 {
        -mag
    } else {
        mag
    }
}

#[inline]
fn dequantize_fp(level: i32, step: u64) -> i32 {
    let mag = ((u64::from(level.unsigned_abs()) * step + (1 << 15)) >> 16).min(1 << 24) as i32;
    if level < 0 {
        -mag
    } else {
        mag
    }
}
