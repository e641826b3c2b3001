//! Transform-skip residual syntax.
//!
//! A block is split into 4x4 sub-blocks visited in raster order. Each
//! sub-block carries `coded_sub_block_flag`; inside a coded sub-block every
//! position (raster order) carries `sig_coeff_flag`, and significant
//! positions carry a sign flag followed by the level ladder:
//!
//! ```text
//! gt1 [par gt3 [gt5 [gt7 [gt9 [ue(remainder)]]]]]
//! ```
//!
//! With `k` the number of satisfied `gtX` flags, a level below 10 is
//! `2k + par` (1 when `gt1 == 0`) and a level of 10 or more is
//! `10 + par + 2 * remainder`.

use crate::bitio::{BitReader, BitSink};
use crate::{Error, Result};

/// Largest magnitude a level may take (`|level| < 2^15`).
pub const MAX_ABS_LEVEL: i32 = (1 << 15) - 1;

const RUNGS: [u32; 5] = [1, 3, 5, 7, 9];

/// Flag values for one absolute level. Flags after the first unsatisfied
/// rung are absent (`false` and not written).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LadderFlags {
    /// `gt[i]` is `abs_level > RUNGS[i]`.
    pub gt: [bool; 5],
    /// Present iff `gt1`.
    pub par: Option<bool>,
    /// Present iff `gt9`.
    pub remainder: Option<u32>,
}

pub fn ladder_encode(abs: u32) -> LadderFlags {
    assert!(abs >= 1, "ladder codes significant levels only");
    let mut gt = [false; 5];
    for (g, &r) in gt.iter_mut().zip(&RUNGS) {
        *g = abs > r;
        if !*g {
            break;
        }
    }
    let par = gt[0].then(|| (abs - 2) & 1 == 1);
    let remainder = gt[4].then(|| (abs - 10) >> 1);
    LadderFlags { gt, par, remainder }
}

/// Returns `None` for flag combinations the grammar cannot produce.
pub fn ladder_decode(f: &LadderFlags) -> Option<u32> {
    let k = f.gt.iter().take_while(|&&g| g).count();
    if f.gt[k..].iter().any(|&g| g) {
        return None;
    }
    if f.par.is_some() != f.gt[0] || f.remainder.is_some() != f.gt[4] {
        return None;
    }
    let par = u32::from(f.par.unwrap_or(false));
    Some(match (k, f.remainder) {
        (0, _) => 1,
        (5, Some(rem)) => 10 + par + 2 * rem,
        (k, _) => 2 * k as u32 + par,
    })
}

fn write_ladder<S: BitSink>(sink: &mut S, abs: u32) {
    let f = ladder_encode(abs);
    sink.put_flag(f.gt[0]);
    if !f.gt[0] {
        return;
    }
    sink.put_flag(f.par.unwrap());
    for &g in &f.gt[1..] {
        sink.put_flag(g);
        if !g {
            return;
        }
    }
    sink.put_ue(f.remainder.unwrap());
}

fn read_ladder(r: &mut BitReader<'_>) -> Result<u32> {
    let mut f = LadderFlags {
        gt: [false; 5],
        par: None,
        remainder: None,
    };
    f.gt[0] = r.read_flag()?;
    if f.gt[0] {
        f.par = Some(r.read_flag()?);
        for i in 1..5 {
            f.gt[i] = r.read_flag()?;
            if !f.gt[i] {
                break;
            }
        }
        if f.gt[4] {
            f.remainder = Some(r.read_ue()?);
        }
    }
    // remainder may be huge in a corrupt stream
    let abs = match f.remainder {
        Some(rem) if rem > (MAX_ABS_LEVEL as u32) => u32::MAX,
        _ => ladder_decode(&f).expect("reader only produces well-formed ladders"),
    };
    if abs > MAX_ABS_LEVEL as u32 {
        return Err(Error::bitstream(
            format!("bit {}", r.position()),
            "residual level exceeds 2^15 - 1",
        ));
    }
    Ok(abs)
}

/// Coding order: sub-blocks in raster order, positions raster within each.
/// Entry `k` is the row-major index of the `k`-th coded position.
pub fn scan_order(width: usize, height: usize) -> Vec<usize> {
    assert!(
        width % 4 == 0 && height % 4 == 0,
        "TSR blocks are multiples of 4"
    );
    let mut order = Vec::with_capacity(width * height);
    for sby in (0..height).step_by(4) {
        for sbx in (0..width).step_by(4) {
            for y in sby..sby + 4 {
                for x in sbx..sbx + 4 {
                    order.push(y * width + x);
                }
            }
        }
    }
    order
}

pub fn tsr_encode<S: BitSink>(sink: &mut S, levels: &[i32], width: usize, height: usize) {
    assert_eq!(levels.len(), width * height);
    for sub in scan_order(width, height).chunks_exact(16) {
        let coded = sub.iter().any(|&i| levels[i] != 0);
        sink.put_flag(coded);
        if !coded {
            continue;
        }
        for &i in sub {
            let v = levels[i];
            sink.put_flag(v != 0);
            if v == 0 {
                continue;
            }
            debug_assert!(v.abs() <= MAX_ABS_LEVEL);
            sink.put_flag(v < 0);
            write_ladder(sink, v.unsigned_abs());
        }
    }
}

pub fn tsr_decode(r: &mut BitReader<'_>, width: usize, height: usize) -> Result<Vec<i32>> {
    let mut levels = vec![0i32; width * height];
    for sub in scan_order(width, height).chunks_exact(16) {
        if !r.read_flag()? {
            continue;
        }
        for &i in sub {
            if !r.read_flag()? {
                continue;
            }
            let neg = r.read_flag()?;
            let abs = read_ladder(r)? as i32;
            levels[i] = if neg { -abs } else { abs };
        }
    }
    Ok(levels)
}
