//! Residual pipeline: quantizer, integer DCT-II, BDPCM, transform-skip
//! residual syntax and parity-inferred transform skip.

mod bdpcm;
mod parity;
mod quant;
mod transform;
mod tsr;

pub use bdpcm::{bdpcm_forward, bdpcm_inverse, BdpcmDir};
pub use parity::{avs3_parity_adjust, avs3_tsm_infer, last_significant};
pub use quant::{QuantParams, COEFF_FRAC_BITS};
pub use transform::{transform_forward, transform_inverse, TRANSFORM_SIZES};
pub use tsr::{
    ladder_decode, ladder_encode, scan_order, tsr_decode, tsr_encode, LadderFlags, MAX_ABS_LEVEL,
};

/// How a residual block's levels relate to sample residuals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ResidualMode {
    Transform,
    Tsm,
    TsmBdpcm(BdpcmDir),
}

impl ResidualMode {
    pub fn is_tsm(self) -> bool {
        !matches!(self, ResidualMode::Transform)
    }

    pub fn bdpcm_dir(self) -> Option<BdpcmDir> {
        match self {
            ResidualMode::TsmBdpcm(d) => Some(d),
            _ => None,
        }
    }
}

/// Quantized levels of one residual block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResidualBlock {
    pub width: usize,
    pub height: usize,
    pub levels: Vec<i32>,
    pub mode: ResidualMode,
}

impl ResidualBlock {
    pub fn zeros(width: usize, height: usize, mode: ResidualMode) -> Self {
        Self {
            width,
            height,
            levels: vec![0; width * height],
            mode,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.levels.iter().all(|&l| l == 0)
    }
}
