//! Reconstruction shared by encoder and decoder: prediction, residual
//! reconstruction and the per-picture state a committed CU updates.

use super::mode::PredMode;
use super::syntax::{CodingUnit, CuPayload, CuResidual, ParseState, SyntaxCtx};
use crate::color_transform::{act_lossless_inverse, act_lossy_inverse};
use crate::ibc::{ibc_predict, HistoryVectorTable, ReferenceSampleMemory, RsmAreaSnapshot};
use crate::media_io::{Frame, PlaneBuffer};
use crate::palette::{predictor_update, PaletteColor};
use crate::residual::{bdpcm_inverse, transform_inverse, ResidualMode};
use crate::string_copy::isc_reconstruct;
use crate::Result;

/// Decoder-visible state right after a CU was reconstructed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CuTrace {
    pub x: usize,
    pub y: usize,
    pub size: usize,
    pub mode: PredMode,
    pub history: HistoryVectorTable,
    /// Palette predictor, recorded after palette CUs only.
    pub predictor: Option<Vec<PaletteColor>>,
}

pub struct FrameState {
    pub ctx: SyntaxCtx,
    pub recon: Frame,
    pub rsm: ReferenceSampleMemory,
    pub history: HistoryVectorTable,
    pub predictor: Vec<PaletteColor>,
    pub trace: Vec<CuTrace>,
}

/// Everything a CU commit may touch inside one square area.
pub struct AreaSnapshot {
    x: usize,
    y: usize,
    size: usize,
    planes: Vec<Vec<u16>>,
    rsm: RsmAreaSnapshot,
    history: HistoryVectorTable,
    predictor: Vec<PaletteColor>,
    trace_len: usize,
    trace_tail: Vec<CuTrace>,
}

impl FrameState {
    pub fn new(ctx: SyntaxCtx) -> Self {
        let recon = Frame::new(ctx.width, ctx.height, ctx.chroma_format, ctx.color_space);
        let rsm = ReferenceSampleMemory::new(ctx.width, ctx.height, ctx.chroma_format);
        Self {
            ctx,
            recon,
            rsm,
            history: HistoryVectorTable::new(),
            predictor: Vec::new(),
            trace: Vec::new(),
        }
    }

    pub fn parse_state(&self) -> ParseState<'_> {
        ParseState {
            history: &self.history,
            predictor: &self.predictor,
            rsm: &self.rsm,
        }
    }

    /// Start of a CTU row: vector history and palette predictor restart.
    pub fn reset_row(&mut self) {
        self.history.clear();
        self.predictor.clear();
    }

    fn plane_rect(&self, plane: usize, x: usize, y: usize, size: usize) -> (usize, usize, usize) {
        let (sx, sy) = self.ctx.plane_shift(plane);
        debug_assert_eq!(sx, sy);
        (x >> sx, y >> sy, size >> sx)
    }

    /// CU-sized intra prediction of one plane.
    pub fn intra_predict(
        &self,
        mode: PredMode,
        plane: usize,
        x: usize,
        y: usize,
        size: usize,
    ) -> Vec<u16> {
        let (px, py, n) = self.plane_rect(plane, x, y, size);
        intra_pred(&self.recon.planes[plane], mode, px, py, n)
    }

    /// Prediction (or final samples, for palette and string copy) per plane.
    pub fn predict(&self, cu: &CodingUnit) -> Result<Vec<Vec<u16>>> {
        let np = self.ctx.num_planes();
        match &cu.payload {
            CuPayload::Intra { .. } => Ok((0..np)
                .map(|p| self.intra_predict(cu.mode, p, cu.x, cu.y, cu.size))
                .collect()),
            CuPayload::Ibc { bv, .. } => ibc_predict(*bv, cu.block(), &self.rsm),
            CuPayload::Palette { syntax, .. } => {
                let colors = syntax.reconstruct(&self.predictor);
                let comps = self.ctx.palette_params(cu.size).components;
                let mut out: Vec<Vec<u16>> = (0..comps)
                    .map(|c| colors.iter().map(|col| col[c]).collect())
                    .collect();
                for p in comps..np {
                    out.push(self.intra_predict(PredMode::Dc, p, cu.x, cu.y, cu.size));
                }
                Ok(out)
            }
            CuPayload::Isc { runs } => isc_reconstruct(runs, cu.block(), &self.rsm),
        }
    }

    pub fn reconstruct(&self, cu: &CodingUnit) -> Result<Vec<Vec<u16>>> {
        let mut pred = self.predict(cu)?;
        if let Some(res) = cu.residual() {
            self.add_residual(&mut pred, res, cu.size);
        }
        Ok(pred)
    }

    pub fn add_residual(&self, pred: &mut [Vec<u16>], res: &CuResidual, size: usize) {
        let max = (1i32 << self.ctx.bit_depth) - 1;
        let r = residual_samples(&self.ctx, res, size);
        for (plane, rp) in pred.iter_mut().zip(&r) {
            if rp.is_empty() {
                continue;
            }
            for (s, &d) in plane.iter_mut().zip(rp) {
                *s = (i32::from(*s) + d).clamp(0, max) as u16;
            }
        }
    }

    /// Stores a reconstructed CU and applies its side effects on the
    /// vector history and palette predictor.
    pub fn commit(&mut self, cu: &CodingUnit, recon: &[Vec<u16>]) -> Result<()> {
        for (p, samples) in recon.iter().enumerate() {
            let (px, py, n) = self.plane_rect(p, cu.x, cu.y, cu.size);
            let plane = &mut self.recon.planes[p];
            for r in 0..n {
                for c in 0..n {
                    plane.set(px + c, py + r, samples[r * n + c]);
                }
            }
            self.rsm.write_block(p, px, py, n, n, samples)?;
        }
        self.rsm.mark_coded(cu.x, cu.y, cu.size, cu.size);
        let mut predictor = None;
        match &cu.payload {
            CuPayload::Ibc { bv, .. } => self.history.update(*bv, cu.x, cu.y, cu.size * cu.size),
            CuPayload::Isc { runs } => {
                for run in runs {
                    self.history.update(
                        run.sv,
                        cu.x + run.start % cu.size,
                        cu.y + run.start / cu.size,
                        run.length,
                    );
                }
            }
            CuPayload::Palette { syntax, .. } => {
                let palette = syntax.palette(&self.predictor);
                self.predictor = predictor_update(&palette, &self.predictor, &syntax.reuse_flags);
                predictor = Some(self.predictor.clone());
            }
            CuPayload::Intra { .. } => {}
        }
        self.trace.push(CuTrace {
            x: cu.x,
            y: cu.y,
            size: cu.size,
            mode: cu.mode,
            history: self.history.clone(),
            predictor,
        });
        Ok(())
    }

    pub fn snapshot(&self, x: usize, y: usize, size: usize, trace_from: usize) -> AreaSnapshot {
        let planes = (0..self.ctx.num_planes())
            .map(|p| {
                let (px, py, n) = self.plane_rect(p, x, y, size);
                let pl = &self.recon.planes[p];
                (py..py + n)
                    .flat_map(|r| pl.row(r)[px..px + n].iter().copied())
                    .collect()
            })
            .collect();
        AreaSnapshot {
            x,
            y,
            size,
            planes,
            rsm: self.rsm.snapshot_area(x, y, size),
            history: self.history.clone(),
            predictor: self.predictor.clone(),
            trace_len: trace_from,
            trace_tail: self.trace[trace_from..].to_vec(),
        }
    }

    pub fn restore(&mut self, s: &AreaSnapshot) {
        for (p, samples) in s.planes.iter().enumerate() {
            let (px, py, n) = self.plane_rect(p, s.x, s.y, s.size);
            let pl = &mut self.recon.planes[p];
            for r in 0..n {
                for c in 0..n {
                    pl.set(px + c, py + r, samples[r * n + c]);
                }
            }
        }
        self.rsm.restore_area(&s.rsm);
        self.history.clone_from(&s.history);
        self.predictor.clone_from(&s.predictor);
        self.trace.truncate(s.trace_len);
        self.trace.extend_from_slice(&s.trace_tail);
    }
}

/// Intra prediction from the reconstructed row above and column to the left.
/// Missing neighbours are substituted from the other side, or mid-grey.
pub fn intra_pred(pl: &PlaneBuffer, mode: PredMode, x: usize, y: usize, n: usize) -> Vec<u16> {
    let mid = 1u16 << (pl.bit_depth() - 1);
    let top: Option<Vec<u16>> = (y > 0).then(|| pl.row(y - 1)[x..x + n].to_vec());
    let left: Option<Vec<u16>> = (x > 0).then(|| (0..n).map(|j| pl.get(x - 1, y + j)).collect());
    let (top, left) = match (top, left) {
        (Some(t), Some(l)) => (t, l),
        (Some(t), None) => (t.clone(), vec![t[0]; n]),
        (None, Some(l)) => (vec![l[0]; n], l),
        (None, None) => (vec![mid; n], vec![mid; n]),
    };
    let mut out = vec![0u16; n * n];
    match mode {
        PredMode::Horizontal => {
            for j in 0..n {
                out[j * n..(j + 1) * n].fill(left[j]);
            }
        }
        PredMode::Vertical => {
            for j in 0..n {
                out[j * n..(j + 1) * n].copy_from_slice(&top);
            }
        }
        PredMode::Planar => {
            let shift = n.trailing_zeros() + 1;
            let (tr, bl) = (u32::from(top[n - 1]), u32::from(left[n - 1]));
            for j in 0..n {
                for i in 0..n {
                    let v = (n - 1 - i) as u32 * u32::from(left[j])
                        + (i + 1) as u32 * tr
                        + (n - 1 - j) as u32 * u32::from(top[i])
                        + (j + 1) as u32 * bl
                        + n as u32;
                    out[j * n + i] = (v >> shift) as u16;
                }
            }
        }
        _ => {
            let sum: u32 = top.iter().chain(&left).map(|&v| u32::from(v)).sum();
            out.fill(((sum + n as u32) / (2 * n as u32)) as u16);
        }
    }
    out
}

/// Sample-domain residual per plane (empty for planes without residual).
pub fn residual_samples(ctx: &SyntaxCtx, res: &CuResidual, size: usize) -> Vec<Vec<i32>> {
    let mut out: Vec<Vec<i32>> = Vec::with_capacity(res.tus.len());
    for (p, tus) in res.tus.iter().enumerate() {
        if tus.is_empty() {
            out.push(Vec::new());
            continue;
        }
        let (tu, per_side) = ctx.tu_layout(p, size);
        let ps = tu * per_side;
        let mut plane = vec![0i32; ps * ps];
        for (t, levels) in tus.iter().enumerate() {
            let Some(levels) = levels else { continue };
            let r = tu_residual(ctx, res.mode, levels, tu);
            let (ox, oy) = ((t % per_side) * tu, (t / per_side) * tu);
            for j in 0..tu {
                plane[(oy + j) * ps + ox..(oy + j) * ps + ox + tu]
                    .copy_from_slice(&r[j * tu..(j + 1) * tu]);
            }
        }
        out.push(plane);
    }
    if res.act {
        let (a, rest) = out.split_at_mut(1);
        let (b, c) = rest.split_at_mut(1);
        for ((y, co), cg) in a[0].iter_mut().zip(b[0].iter_mut()).zip(c[0].iter_mut()) {
            let t = if ctx.lossless() {
                act_lossless_inverse(*y, *co, *cg)
            } else {
                act_lossy_inverse(*y, *co, *cg)
            };
            (*y, *co, *cg) = (t.c0, t.c1, t.c2);
        }
    }
    out
}

pub fn tu_residual(ctx: &SyntaxCtx, mode: ResidualMode, levels: &[i32], tu: usize) -> Vec<i32> {
    match mode {
        ResidualMode::Transform => {
            let c: Vec<i32> = levels
                .iter()
                .map(|&l| ctx.quant.dequantize_coeff(l))
                .collect();
            transform_inverse(&c, tu)
        }
        _ => {
            let mut l = levels.to_vec();
            if let Some(d) = mode.bdpcm_dir() {
                bdpcm_inverse(&mut l, tu, tu, d);
            }
            l.iter().map(|&v| ctx.quant.dequantize(v)).collect()
        }
    }
}
