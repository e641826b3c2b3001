//! Block DPCM over quantized residual levels.
//!
//! Index convention: `i` is the column and `j` the row. Horizontal mode
//! differences each level against its left neighbour (`i - 1`), vertical
//! mode against the level above (`j - 1`). The first column / row is kept.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BdpcmDir {
    Horizontal,
    Vertical,
}

/// In-place residue prediction of a row-major `width` x `height` block.
pub fn bdpcm_forward(levels: &mut [i32], width: usize, height: usize, dir: BdpcmDir) {
    assert_eq!(levels.len(), width * height);
    match dir {
        BdpcmDir::Horizontal => {
            for row in levels.chunks_exact_mut(width) {
                for i in (1..width).rev() {
                    row[i] -= row[i - 1];
                }
            }
        }
        BdpcmDir::Vertical => {
            for j in (1..height).rev() {
                for i in 0..width {
                    levels[j * width + i] -= levels[(j - 1) * width + i];
                }
            }
        }
    }
}

/// Prefix-sum inverse of [`bdpcm_forward`]. Sums saturate at `i32` limits;
/// levels that respect the residual bound never get near them.
pub fn bdpcm_inverse(predicted: &mut [i32], width: usize, height: usize, dir: BdpcmDir) {
    assert_eq!(predicted.len(), width * height);
    match dir {
        BdpcmDir::Horizontal => {
            for row in predicted.chunks_exact_mut(width) {
                for i in 1..width {
                    row[i] = row[i].saturating_add(row[i - 1]);
                }
            }
        }
        BdpcmDir::Vertical => {
            for j in 1..height {
                for i in 0..width {
                    predicted[j * width + i] =
                        predicted[j * width + i].saturating_add(predicted[(j - 1) * width + i]);
                }
            }
        }
    }
}
