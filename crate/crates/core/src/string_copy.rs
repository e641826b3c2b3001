//! Intra string copy.
//!
//! A CU is split into horizontal raster-scan strings whose lengths are
//! multiples of four; each string copies from the RSM through its own string
//! vector, which is either a history-table index or explicit. The strings
//! share the history table with IBC. References may never land inside the
//! current CU.

use crate::bitio::{BitReader, BitSink};
use crate::ibc::{Block, BlockVector, HistoryVectorTable, ReferenceSampleMemory};
use crate::media_io::ChromaFormat;
use crate::{Error, Result};

/// Strings advance in steps of this many samples.
pub const STRING_UNIT: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StringRun {
    /// Raster offset of the first sample inside the CU.
    pub start: usize,
    pub length: usize,
    pub sv: BlockVector,
    pub predicted: bool,
    pub pred_index: Option<usize>,
}

/// Samples of one CU, one raster vector per plane (chroma at plane size).
pub type CuSamples = [Vec<u16>];

fn inside(block: Block, x: i64, y: i64) -> bool {
    x >= block.x as i64
        && y >= block.y as i64
        && x < (block.x + block.w) as i64
        && y < (block.y + block.h) as i64
}

/// Luma-grid position a plane sample maps to for validity checks, or None
/// if the reference lies off the picture.
fn ref_of(
    block: Block,
    off: usize,
    sv: BlockVector,
    plane: usize,
    cf: ChromaFormat,
) -> Option<(usize, usize, i64, i64)> {
    let (sx, sy) = if plane == 0 {
        (0, 0)
    } else {
        cf.chroma_shift()
    };
    let (lx, ly) = (block.x + off % block.w, block.y + off / block.w);
    let (vx, vy) = sv.for_plane(plane, cf);
    let rx = (lx >> sx) as i64 + i64::from(vx);
    let ry = (ly >> sy) as i64 + i64::from(vy);
    if rx < 0 || ry < 0 {
        return None;
    }
    Some((rx as usize, ry as usize, rx << sx, ry << sy))
}

/// Planes touched by the luma sample at `off`: chroma is only attached to
/// the even-even luma positions of a subsampled picture.
fn planes_at(block: Block, off: usize, cf: ChromaFormat) -> usize {
    let (lx, ly) = (block.x + off % block.w, block.y + off / block.w);
    match cf {
        ChromaFormat::Yuv400 => 1,
        ChromaFormat::Yuv444 => 3,
        ChromaFormat::Yuv420 if lx % 2 == 0 && ly % 2 == 0 => 3,
        ChromaFormat::Yuv420 => 1,
    }
}

/// Whether every plane sample attached to luma offset `off` may be fetched
/// with `sv`; returns the fetched values.
fn fetch(
    block: Block,
    off: usize,
    sv: BlockVector,
    rsm: &ReferenceSampleMemory,
) -> Option<[u16; 3]> {
    let cf = rsm.chroma_format();
    let mut out = [0u16; 3];
    for (plane, v) in out.iter_mut().enumerate().take(planes_at(block, off, cf)) {
        let (rx, ry, gx, gy) = ref_of(block, off, sv, plane, cf)?;
        if inside(block, gx, gy) || !rsm.is_valid(gx as usize, gy as usize) {
            return None;
        }
        *v = rsm.read_unchecked(plane, rx, ry);
    }
    Some(out)
}

fn target_at(target: &CuSamples, block: Block, off: usize, cf: ChromaFormat) -> [u16; 3] {
    let mut out = [target[0][off], 0, 0];
    if planes_at(block, off, cf) == 3 {
        let (sx, sy) = cf.chroma_shift();
        let (x, y) = ((off % block.w) >> sx, (off / block.w) >> sy);
        let cw = block.w >> sx;
        out[1] = target[1][y * cw + x];
        out[2] = target[2][y * cw + x];
    }
    out
}

/// Greedy longest-match segmentation. Candidate vectors are the history
/// table followed by `extra`; each string takes the candidate with the
/// longest run of samples within `tolerance` of the target, rounded down to
/// a multiple of four. Returns None when some position has no match.
pub fn segment_strings(
    target: &CuSamples,
    block: Block,
    rsm: &ReferenceSampleMemory,
    history: &HistoryVectorTable,
    extra: &[BlockVector],
    tolerance: u16,
) -> Option<Vec<StringRun>> {
    let n = block.w * block.h;
    let cf = rsm.chroma_format();
    let mut cands: Vec<BlockVector> = history.entries().iter().map(|e| e.vector).collect();
    for &v in extra {
        if !cands.contains(&v) && v != BlockVector::default() {
            cands.push(v);
        }
    }
    let wanted: Vec<[u16; 3]> = (0..n).map(|o| target_at(target, block, o, cf)).collect();
    // match_len[c][o]: samples matching from o onwards with candidate c
    let mut match_len: Vec<Vec<u32>> = Vec::with_capacity(cands.len());
    for &sv in &cands {
        let mut ml = vec![0u32; n + 1];
        for o in (0..n).rev() {
            let ok = fetch(block, o, sv, rsm).is_some_and(|got| {
                got.iter()
                    .zip(&wanted[o])
                    .all(|(&a, &b)| a.abs_diff(b) <= tolerance)
            });
            ml[o] = if ok { ml[o + 1] + 1 } else { 0 };
        }
        match_len.push(ml);
    }
    let mut hist = history.clone();
    let mut runs = Vec::new();
    let mut pos = 0;
    while pos < n {
        let mut best: Option<(usize, BlockVector)> = None;
        for (c, &sv) in cands.iter().enumerate() {
            let len = match_len[c][pos] as usize / STRING_UNIT * STRING_UNIT;
            if len >= STRING_UNIT && best.is_none_or(|(b, _)| len > b) {
                best = Some((len, sv));
            }
        }
        let (length, sv) = best?;
        let pred_index = hist.position_of(sv);
        let run = StringRun {
            start: pos,
            length,
            sv,
            predicted: pred_index.is_some(),
            pred_index,
        };
        hist.update(sv, block.x + pos % block.w, block.y + pos / block.w, length);
        runs.push(run);
        pos += length;
    }
    Some(runs)
}

/// Writes one string: length, then its vector through the history table.
pub fn sv_code<S: BitSink>(run: &StringRun, sink: &mut S) {
    sink.put_ue((run.length / STRING_UNIT - 1) as u32);
    sink.put_flag(run.predicted);
    match run.pred_index {
        Some(i) if run.predicted => sink.put_ue(i as u32),
        _ => {
            sink.put_se(run.sv.x);
            sink.put_se(run.sv.y);
        }
    }
}

/// Reads one string vector (after its length) against the history table.
pub fn sv_decode(
    r: &mut BitReader<'_>,
    history: &HistoryVectorTable,
) -> Result<(BlockVector, Option<usize>)> {
    if r.read_flag()? {
        let i = r.read_ue()? as usize;
        let e = history.get(i).ok_or_else(|| {
            Error::bitstream(
                "string vector",
                format!("history index {i} of {}", history.len()),
            )
        })?;
        Ok((e.vector, Some(i)))
    } else {
        let x = r.read_se()?;
        let y = r.read_se()?;
        Ok((BlockVector::new(x, y), None))
    }
}

/// Writes all strings of a CU, updating `history` as the decoder will.
pub fn write_strings<S: BitSink>(
    runs: &[StringRun],
    block: Block,
    history: &mut HistoryVectorTable,
    sink: &mut S,
) {
    for run in runs {
        debug_assert_eq!(history.position_of(run.sv), run.pred_index);
        sv_code(run, sink);
        history.update(
            run.sv,
            block.x + run.start % block.w,
            block.y + run.start / block.w,
            run.length,
        );
    }
}

/// Parses the strings of a CU, checking the length, count and reference
/// constraints, and updates `history`.
pub fn read_strings(
    r: &mut BitReader<'_>,
    block: Block,
    rsm: &ReferenceSampleMemory,
    history: &mut HistoryVectorTable,
) -> Result<Vec<StringRun>> {
    let n = block.w * block.h;
    let mut runs = Vec::new();
    let mut pos = 0;
    while pos < n {
        let length = (r.read_ue()? as usize + 1) * STRING_UNIT;
        if length > n - pos {
            return Err(Error::bitstream(
                "string copy",
                format!("string of {length} overruns CU at {pos}"),
            ));
        }
        let (sv, pred_index) = sv_decode(r, history)?;
        if let Some(o) = (pos..pos + length).find(|&o| fetch(block, o, sv, rsm).is_none()) {
            return Err(Error::bitstream(
                format!(
                    "string at ({}, {})",
                    block.x + o % block.w,
                    block.y + o / block.w
                ),
                format!("invalid string vector ({}, {})", sv.x, sv.y),
            ));
        }
        history.update(sv, block.x + pos % block.w, block.y + pos / block.w, length);
        runs.push(StringRun {
            start: pos,
            length,
            sv,
            predicted: pred_index.is_some(),
            pred_index,
        });
        pos += length;
    }
    debug_assert!(runs.len() <= n / STRING_UNIT);
    Ok(runs)
}

/// Copies every string out of the RSM; one raster vector per plane.
pub fn isc_reconstruct(
    runs: &[StringRun],
    block: Block,
    rsm: &ReferenceSampleMemory,
) -> Result<Vec<Vec<u16>>> {
    let cf = rsm.chroma_format();
    let (sx, sy) = cf.chroma_shift();
    let mut out: Vec<Vec<u16>> = (0..cf.num_planes())
        .map(|p| {
            if p == 0 {
                vec![0; block.w * block.h]
            } else {
                vec![0; (block.w >> sx) * (block.h >> sy)]
            }
        })
        .collect();
    for run in runs {
        for o in run.start..run.start + run.length {
            let got = fetch(block, o, run.sv, rsm).ok_or_else(|| {
                Error::bitstream(
                    "string copy",
                    format!("invalid string vector ({}, {})", run.sv.x, run.sv.y),
                )
            })?;
            out[0][o] = got[0];
            if planes_at(block, o, cf) == 3 {
                let (x, y) = ((o % block.w) >> sx, (o / block.w) >> sy);
                let cw = block.w >> sx;
                out[1][y * cw + x] = got[1];
                out[2][y * cw + x] = got[2];
            }
        }
    }
    Ok(out)
}
