//! Intra block copy.
//!
//! References are confined to the current CTU and the CTU to its left, and
//! all of them are served from one CTU-sized [`ReferenceSampleMemory`] whose
//! four 64x64 regions are recycled as the current CTU is coded.

mod hash;
mod history;
mod rsm;

pub use hash::{block_hash, BlockHashTable};
pub use history::{
    cbvp_classify, HistoryEntry, HistoryVectorTable, CBVP_CLASSES, HISTORY_CAPACITY,
};
pub use rsm::{ReferenceSampleMemory, RegionState, RsmAreaSnapshot, CTU_SIZE, REGION_SIZE, UNIT};

use crate::media_io::ChromaFormat;
use crate::{Error, Result};

/// Largest IBC (and string copy) block edge.
pub const MAX_IBC_SIZE: usize = 64;

/// Integer displacement in luma samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct BlockVector {
    pub x: i32,
    pub y: i32,
}

impl BlockVector {
    pub const fn new(x: i32, y: i32) -> Self {
        Self { x, y }
    }

    /// Chroma displacement: halved with truncation toward zero when the
    /// plane is subsampled.
    #[inline]
    pub fn for_plane(self, plane: usize, chroma_format: ChromaFormat) -> (i32, i32) {
        let (sx, sy) = if plane == 0 {
            (0, 0)
        } else {
            chroma_format.chroma_shift()
        };
        (
            if sx == 1 { self.x / 2 } else { self.x },
            if sy == 1 { self.y / 2 } else { self.y },
        )
    }
}

/// Luma rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Block {
    pub x: usize,
    pub y: usize,
    pub w: usize,
    pub h: usize,
}

impl Block {
    pub const fn new(x: usize, y: usize, w: usize, h: usize) -> Self {
        Self { x, y, w, h }
    }
}

fn rect_valid(rsm: &ReferenceSampleMemory, x: i64, y: i64, w: usize, h: usize) -> bool {
    let (pw, ph) = rsm.picture_dims();
    if x < 0 || y < 0 || x as usize + w > pw || y as usize + h > ph {
        return false;
    }
    let (x, y) = (x as usize, y as usize);
    let mut uy = y / UNIT * UNIT;
    while uy < y + h {
        let mut ux = x / UNIT * UNIT;
        while ux < x + w {
            if !rsm.is_valid(ux, uy) {
                return false;
            }
            ux += UNIT;
        }
        uy += UNIT;
    }
    true
}

/// True iff every sample the vector would fetch, in every plane, is inside
/// the picture and held by a valid RSM region in an already reconstructed
/// area. The current block itself is never reconstructed at prediction
/// time, so self-overlap is rejected too.
pub fn bv_valid(bv: BlockVector, block: Block, rsm: &ReferenceSampleMemory) -> bool {
    if !rect_valid(
        rsm,
        block.x as i64 + i64::from(bv.x),
        block.y as i64 + i64::from(bv.y),
        block.w,
        block.h,
    ) {
        return false;
    }
    let cf = rsm.chroma_format();
    if cf == ChromaFormat::Yuv420 {
        // chroma fetches land on the luma grid at twice the truncated vector
        let (cx, cy) = bv.for_plane(1, cf);
        return rect_valid(
            rsm,
            block.x as i64 + 2 * i64::from(cx),
            block.y as i64 + 2 * i64::from(cy),
            block.w,
            block.h,
        );
    }
    true
}

/// Copies the reference block for every plane out of the RSM.
pub fn ibc_predict(
    bv: BlockVector,
    block: Block,
    rsm: &ReferenceSampleMemory,
) -> Result<Vec<Vec<u16>>> {
    if !bv_valid(bv, block, rsm) {
        return Err(Error::bitstream(
            format!("IBC block at ({}, {})", block.x, block.y),
            format!("invalid block vector ({}, {})", bv.x, bv.y),
        ));
    }
    let cf = rsm.chroma_format();
    let mut out = Vec::with_capacity(cf.num_planes());
    for plane in 0..cf.num_planes() {
        let (sx, sy) = if plane == 0 {
            (0, 0)
        } else {
            cf.chroma_shift()
        };
        let (bx, by) = bv.for_plane(plane, cf);
        let (x0, y0, w, h) = (block.x >> sx, block.y >> sy, block.w >> sx, block.h >> sy);
        let mut samples = Vec::with_capacity(w * h);
        for y in 0..h {
            for x in 0..w {
                let rx = (x0 + x) as i64 + i64::from(bx);
                let ry = (y0 + y) as i64 + i64::from(by);
                samples.push(rsm.read(plane, rx as usize, ry as usize)?);
            }
        }
        out.push(samples);
    }
    Ok(out)
}
