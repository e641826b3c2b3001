//! Rate-distortion optimised picture encoder.

use super::mode::PredMode;
use super::recon::FrameState;
use super::syntax::{parity_mode, write_cu, CodingUnit, CuPayload, CuResidual, SyntaxCtx};
use crate::bitio::{BitCounter, BitSink, BitWriter, ToolFlags};
use crate::color_transform::{act_lossless_forward, act_lossy_forward};
use crate::ibc::{
    block_hash, bv_valid, cbvp_classify, ibc_predict, Block, BlockHashTable, BlockVector, CTU_SIZE,
    REGION_SIZE,
};
use crate::media_io::{Frame, PlaneBuffer};
use crate::palette::{PaletteColor, PaletteSyntax};
use crate::residual::{
    avs3_parity_adjust, avs3_tsm_infer, bdpcm_forward, transform_forward, BdpcmDir, ResidualMode,
};
use crate::string_copy::{isc_reconstruct, segment_strings};
use crate::Result;

/// Baseline intra modes that go through full RD after SAD preselection.
const INTRA_RD_MODES: usize = 2;
/// Block vectors that go through full RD after SAD preselection.
const IBC_RD_VECTORS: usize = 2;
/// Hash bucket entries scanned per lookup, and verified matches kept.
const HASH_SCAN: usize = 256;
const HASH_MATCHES: usize = 8;
/// A CU at least this cheap (in bits at zero distortion) is not split further.
const STOP_SPLIT_BITS: f64 = 24.0;

pub(crate) enum TreeItem {
    Split(bool),
    Cu(CodingUnit),
}

struct Candidate {
    cu: CodingUnit,
    recon: Vec<Vec<u16>>,
    dist: u64,
    bits: u64,
    cost: f64,
}

impl Candidate {
    fn beats(&self, other: &Candidate) -> bool {
        if self.cost != other.cost {
            return self.cost < other.cost;
        }
        (self.bits, self.cu.mode) < (other.bits, other.cu.mode)
    }
}

/// HM-style Lagrangian multiplier; lossless coding only counts bits.
pub fn lambda(qp: u8, lossless: bool) -> f64 {
    if lossless {
        1.0
    } else {
        0.57 * 2f64.powf((f64::from(qp) - 12.0) / 3.0)
    }
}

pub(crate) struct PictureEncoder<'a> {
    pub st: FrameState,
    src: &'a Frame,
    lambda: f64,
    band_y: usize,
    band: Option<PlaneBuffer>,
    hashes: Vec<BlockHashTable>,
}

pub(crate) struct EncodedPicture {
    pub payload: Vec<u8>,
    pub state: FrameState,
    pub cus: Vec<CodingUnit>,
}

fn sse(a: &[Vec<u16>], b: &[Vec<u16>]) -> u64 {
    a.iter()
        .zip(b)
        .flat_map(|(x, y)| x.iter().zip(y))
        .map(|(&p, &q)| {
            let d = i64::from(p) - i64::from(q);
            (d * d) as u64
        })
        .sum()
}

fn sad(a: &[Vec<u16>], b: &[Vec<u16>]) -> u64 {
    a.iter()
        .zip(b)
        .flat_map(|(x, y)| x.iter().zip(y))
        .map(|(&p, &q)| u64::from(p.abs_diff(q)))
        .sum()
}

impl<'a> PictureEncoder<'a> {
    pub fn new(src: &'a Frame, ctx: SyntaxCtx) -> Self {
        let lambda = lambda(ctx.quant.qp, ctx.lossless());
        Self {
            st: FrameState::new(ctx),
            src,
            lambda,
            band_y: 0,
            band: None,
            hashes: Vec::new(),
        }
    }

    pub fn encode(mut self) -> Result<EncodedPicture> {
        let (pw, ph) = (self.st.ctx.width, self.st.ctx.height);
        let mut w = BitWriter::new();
        let mut cus = Vec::new();
        for cy in (0..ph).step_by(CTU_SIZE) {
            self.build_hashes(cy);
            for cx in (0..pw).step_by(CTU_SIZE) {
                if cx == 0 {
                    self.st.reset_row();
                }
                self.st.rsm.begin_ctu(cx, cy);
                for r in 0..4 {
                    let (nx, ny) = (cx + (r % 2) * REGION_SIZE, cy + (r / 2) * REGION_SIZE);
                    if nx >= pw || ny >= ph {
                        continue;
                    }
                    self.st.rsm.enter_region(r);
                    let (_, items) = self.encode_node(nx, ny, REGION_SIZE, f64::INFINITY)?;
                    for item in items {
                        match item {
                            TreeItem::Split(b) => w.put_flag(b),
                            TreeItem::Cu(cu) => {
                                write_cu(&mut w, &self.st.ctx, &cu);
                                cus.push(cu);
                            }
                        }
                    }
                }
            }
        }
        Ok(EncodedPicture {
            payload: w.finish(),
            state: self.st,
            cus,
        })
    }

    /// Hash tables over the source luma of one CTU row.
    fn build_hashes(&mut self, cy: usize) {
        self.hashes.clear();
        self.band = None;
        if !self.st.ctx.tools.contains(ToolFlags::IBC) {
            return;
        }
        let luma = &self.src.planes[0];
        let h = CTU_SIZE.min(luma.height() - cy);
        let samples: Vec<u16> = (cy..cy + h)
            .flat_map(|y| luma.row(y).iter().copied())
            .collect();
        let band = PlaneBuffer::from_samples(luma.width(), h, luma.bit_depth(), samples)
            .expect("band geometry");
        for size in [8, 16] {
            self.hashes
                .push(BlockHashTable::build(&band, size, |_, _| true));
        }
        self.band_y = cy;
        self.band = Some(band);
    }

    fn encode_children(
        &mut self,
        x: usize,
        y: usize,
        size: usize,
        budget: f64,
    ) -> Result<(f64, Vec<TreeItem>)> {
        let half = size / 2;
        let mut cost = 0.0;
        let mut items = Vec::new();
        for (dx, dy) in [(0, 0), (half, 0), (0, half), (half, half)] {
            let (c, it) = self.encode_node(x + dx, y + dy, half, budget - cost)?;
            cost += c;
            items.extend(it);
            if cost > budget {
                break;
            }
        }
        Ok((cost, items))
    }

    fn encode_node(
        &mut self,
        x: usize,
        y: usize,
        size: usize,
        budget: f64,
    ) -> Result<(f64, Vec<TreeItem>)> {
        let (pw, ph) = (self.st.ctx.width, self.st.ctx.height);
        if x >= pw || y >= ph {
            return Ok((0.0, Vec::new()));
        }
        if x + size > pw || y + size > ph {
            return self.encode_children(x, y, size, budget);
        }
        let can_split = size > self.st.ctx.min_cu();
        let trace0 = self.st.trace.len();
        let before = can_split.then(|| self.st.snapshot(x, y, size, trace0));
        let cand = self.best_cu(x, y, size)?;
        let ns_cost = cand.cost + if can_split { self.lambda } else { 0.0 };
        let stop = !can_split || cand.dist == 0 && cand.bits as f64 <= STOP_SPLIT_BITS;
        self.st.commit(&cand.cu, &cand.recon)?;
        let mut ns_items = Vec::with_capacity(2);
        if can_split {
            ns_items.push(TreeItem::Split(false));
        }
        ns_items.push(TreeItem::Cu(cand.cu));
        if stop {
            return Ok((ns_cost, ns_items));
        }
        let after = self.st.snapshot(x, y, size, trace0);
        self.st
            .restore(before.as_ref().expect("snapshot taken when splittable"));
        let (s_cost, s_items) =
            self.encode_children(x, y, size, ns_cost.min(budget) - self.lambda)?;
        let s_cost = s_cost + self.lambda;
        if s_cost < ns_cost {
            let mut items = vec![TreeItem::Split(true)];
            items.extend(s_items);
            Ok((s_cost, items))
        } else {
            self.st.restore(&after);
            Ok((ns_cost, ns_items))
        }
    }

    fn source_block(&self, x: usize, y: usize, size: usize) -> Vec<Vec<u16>> {
        (0..self.st.ctx.num_planes())
            .map(|p| {
                let (sx, _) = self.st.ctx.plane_shift(p);
                let (px, py, n) = (x >> sx, y >> sx, size >> sx);
                let pl = &self.src.planes[p];
                (py..py + n)
                    .flat_map(|r| pl.row(r)[px..px + n].iter().copied())
                    .collect()
            })
            .collect()
    }

    fn consider(
        &self,
        best: &mut Option<Candidate>,
        cu: CodingUnit,
        recon: Vec<Vec<u16>>,
        src: &[Vec<u16>],
    ) {
        let dist = sse(src, &recon);
        let mut counter = BitCounter::new();
        write_cu(&mut counter, &self.st.ctx, &cu);
        let bits = counter.bits_written();
        let cost = dist as f64 + self.lambda * bits as f64;
        let cand = Candidate {
            cu,
            recon,
            dist,
            bits,
            cost,
        };
        if best.as_ref().is_none_or(|b| cand.beats(b)) {
            *best = Some(cand);
        }
    }

    fn best_cu(&mut self, x: usize, y: usize, size: usize) -> Result<Candidate> {
        let src = self.source_block(x, y, size);
        let np = self.st.ctx.num_planes();
        let tools = self.st.ctx.tools;
        let block = Block::new(x, y, size, size);
        let mut best = None;

        let mut intra: Vec<(u64, PredMode, Vec<Vec<u16>>)> = [
            PredMode::Dc,
            PredMode::Planar,
            PredMode::Horizontal,
            PredMode::Vertical,
        ]
        .into_iter()
        .map(|m| {
            let pred: Vec<Vec<u16>> = (0..np)
                .map(|p| self.st.intra_predict(m, p, x, y, size))
                .collect();
            (sad(&src, &pred), m, pred)
        })
        .collect();
        intra.sort_by_key(|(s, m, _)| (*s, *m));
        for (_, m, pred) in intra.into_iter().take(INTRA_RD_MODES) {
            self.try_residuals(&mut best, block, m, None, &pred, &src);
        }

        let mut vectors = Vec::new();
        if tools.contains(ToolFlags::IBC) {
            vectors = self.ibc_candidates(x, y, size);
            let mut scored = Vec::new();
            for &bv in &vectors {
                if bv_valid(bv, block, &self.st.rsm) {
                    let pred = ibc_predict(bv, block, &self.st.rsm)?;
                    scored.push((sad(&src, &pred), bv, pred));
                }
            }
            scored.sort_by_key(|(s, bv, _)| (*s, *bv));
            for (_, bv, pred) in scored.into_iter().take(IBC_RD_VECTORS) {
                self.try_residuals(&mut best, block, PredMode::Ibc, Some(bv), &pred, &src);
            }
        }
        if tools.contains(ToolFlags::PLT) {
            self.try_palette(&mut best, block, &src);
        }
        if tools.contains(ToolFlags::ISC)
            && best
                .as_ref()
                .is_some_and(|b: &Candidate| b.dist > 0 || b.bits > 8)
        {
            self.try_isc(&mut best, block, &src, &vectors)?;
        }
        Ok(best.expect("intra candidates always exist"))
    }

    fn try_residuals(
        &self,
        best: &mut Option<Candidate>,
        block: Block,
        mode: PredMode,
        bv: Option<BlockVector>,
        pred: &[Vec<u16>],
        src: &[Vec<u16>],
    ) {
        let ctx = &self.st.ctx;
        let base: Vec<Vec<i32>> = src
            .iter()
            .zip(pred)
            .map(|(s, p)| {
                s.iter()
                    .zip(p)
                    .map(|(&a, &b)| i32::from(a) - i32::from(b))
                    .collect()
            })
            .collect();
        let exact = base.iter().flatten().all(|&v| v == 0);
        let mut modes = ctx.residual_modes();
        if exact {
            modes.truncate(1);
        }
        let act = ctx.act_allowed() && !exact && {
            let converted = act_forward(&base, ctx.lossless());
            activity(&converted) < activity(&base)
        };
        let r = if act {
            act_forward(&base, ctx.lossless())
        } else {
            base
        };
        // keep the BDPCM direction whose differences are smaller
        if modes.len() > 2 {
            let (h, v) = gradient_energy(&r);
            let drop = if h <= v {
                BdpcmDir::Vertical
            } else {
                BdpcmDir::Horizontal
            };
            modes.retain(|m| m.bdpcm_dir() != Some(drop));
        }
        let class = bv.and_then(|v| {
            cbvp_classify(&self.st.history, block)
                .iter()
                .position(|c| *c == Some(v))
                .map(|c| c as u8)
        });
        for &rm in &modes {
            let Some(residual) = self.quantize_residual(&r, rm, act, block.w) else {
                continue;
            };
            let mut recon = pred.to_vec();
            self.st.add_residual(&mut recon, &residual, block.w);
            let payload = match bv {
                Some(bv) => CuPayload::Ibc {
                    bv,
                    class,
                    residual,
                },
                None => CuPayload::Intra { residual },
            };
            let cu = CodingUnit {
                x: block.x,
                y: block.y,
                size: block.w,
                mode,
                payload,
            };
            self.consider(best, cu, recon, src);
        }
    }

    /// Quantized TUs of every plane with a non-empty residual.
    fn quantize_tus(
        &self,
        r: &[Vec<i32>],
        rm: ResidualMode,
        size: usize,
    ) -> Vec<Vec<Option<Vec<i32>>>> {
        let ctx = &self.st.ctx;
        r.iter()
            .enumerate()
            .map(|(p, plane)| {
                if plane.is_empty() {
                    return Vec::new();
                }
                let (tu, per_side) = ctx.tu_layout(p, size);
                let ps = tu * per_side;
                let mut tus = Vec::with_capacity(per_side * per_side);
                for t in 0..per_side * per_side {
                    let (ox, oy) = ((t % per_side) * tu, (t / per_side) * tu);
                    let blk: Vec<i32> = (0..tu)
                        .flat_map(|j| {
                            plane[(oy + j) * ps + ox..(oy + j) * ps + ox + tu]
                                .iter()
                                .copied()
                        })
                        .collect();
                    let levels: Vec<i32> = match rm {
                        ResidualMode::Transform => transform_forward(&blk, tu)
                            .into_iter()
                            .map(|c| ctx.quant.quantize_coeff(c))
                            .collect(),
                        _ => {
                            let mut l: Vec<i32> =
                                blk.iter().map(|&v| ctx.quant.quantize(v)).collect();
                            if let Some(d) = rm.bdpcm_dir() {
                                bdpcm_forward(&mut l, tu, tu, d);
                            }
                            l
                        }
                    };
                    tus.push(levels.iter().any(|&l| l != 0).then_some(levels));
                }
                tus
            })
            .collect()
    }

    fn quantize_residual(
        &self,
        r: &[Vec<i32>],
        rm: ResidualMode,
        act: bool,
        size: usize,
    ) -> Option<CuResidual> {
        let mut tus = self.quantize_tus(r, rm, size);
        let mut mode = rm;
        if self.st.ctx.parity() {
            let want = rm.is_tsm();
            let inferred = parity_mode(&tus);
            match tus[0].iter_mut().rev().flatten().next() {
                None if want => {
                    // nothing to carry the parity; only an all-zero CU survives
                    if tus.iter().flatten().any(Option::is_some) {
                        return None;
                    }
                    mode = ResidualMode::Transform;
                }
                None => {}
                Some(last) => {
                    if inferred != want {
                        let flip = !avs3_tsm_infer(last);
                        let tu = (last.len() as f64).sqrt() as usize;
                        avs3_parity_adjust(last, tu, tu, flip).expect("TU has a significant level");
                    }
                }
            }
            debug_assert_eq!(parity_mode(&tus), mode.is_tsm());
        }
        Some(CuResidual { act, mode, tus })
    }

    fn try_palette(&self, best: &mut Option<Candidate>, block: Block, src: &[Vec<u16>]) {
        let ctx = &self.st.ctx;
        let n = block.w * block.h;
        let params = ctx.palette_params(block.w);
        let pixels: Vec<PaletteColor> = (0..n)
            .map(|i| {
                let mut c = [src[0][i], 0, 0];
                for k in 1..params.components {
                    c[k] = src[k][i];
                }
                c
            })
            .collect();
        let syntax = PaletteSyntax::from_pixels(&pixels, &self.st.predictor, &params);
        if syntax.escape_levels.len() * 2 > n {
            return;
        }
        let chroma = ctx.palette_chroma_residual().then(|| {
            let mut r = vec![Vec::new()];
            for p in 1..ctx.num_planes() {
                let pred = self
                    .st
                    .intra_predict(PredMode::Dc, p, block.x, block.y, block.w);
                r.push(
                    src[p]
                        .iter()
                        .zip(&pred)
                        .map(|(&a, &b)| i32::from(a) - i32::from(b))
                        .collect(),
                );
            }
            CuResidual {
                act: false,
                mode: ResidualMode::Tsm,
                tus: self.quantize_tus(&r, ResidualMode::Tsm, block.w),
            }
        });
        let cu = CodingUnit {
            x: block.x,
            y: block.y,
            size: block.w,
            mode: PredMode::Palette,
            payload: CuPayload::Palette {
                syntax: Box::new(syntax),
                chroma,
            },
        };
        let recon = self
            .st
            .reconstruct(&cu)
            .expect("palette reconstruction cannot fail");
        self.consider(best, cu, recon, src);
    }

    fn try_isc(
        &self,
        best: &mut Option<Candidate>,
        block: Block,
        src: &[Vec<u16>],
        vectors: &[BlockVector],
    ) -> Result<()> {
        let tol = if self.st.ctx.lossless() {
            0
        } else {
            (self.st.ctx.quant.step() / 2.0) as u16
        };
        let Some(runs) = segment_strings(src, block, &self.st.rsm, &self.st.history, vectors, tol)
        else {
            return Ok(());
        };
        let recon = isc_reconstruct(&runs, block, &self.st.rsm)?;
        let cu = CodingUnit {
            x: block.x,
            y: block.y,
            size: block.w,
            mode: PredMode::Isc,
            payload: CuPayload::Isc { runs },
        };
        self.consider(best, cu, recon, src);
        Ok(())
    }

    /// History vectors, a few fixed neighbours and exact hash matches.
    fn ibc_candidates(&self, x: usize, y: usize, size: usize) -> Vec<BlockVector> {
        let mut out: Vec<BlockVector> =
            self.st.history.entries().iter().map(|e| e.vector).collect();
        let s = size as i32;
        for (dx, dy) in [
            (-s, 0),
            (0, -s),
            (-2 * s, 0),
            (0, -2 * s),
            (-s, -s),
            (s, -s),
            (-(REGION_SIZE as i32), 0),
        ] {
            out.push(BlockVector::new(dx, dy));
        }
        if let (Some(band), true) = (&self.band, size >= 8) {
            let hs = if size >= 16 { 16 } else { 8 };
            let table = &self.hashes[usize::from(hs == 16)];
            let by = y - self.band_y;
            let flat =
                (by..by + hs).all(|r| band.row(r)[x..x + hs].iter().all(|&v| v == band.get(x, by)));
            if !flat {
                let key = block_hash(band, x, by, hs);
                let ctu_x = x / CTU_SIZE * CTU_SIZE;
                let mut found = 0;
                for (rx, ry) in table.positions(key).take(HASH_SCAN) {
                    if rx + CTU_SIZE < ctu_x || rx >= ctu_x + CTU_SIZE || (ry, rx) == (by, x) {
                        continue;
                    }
                    let same = (0..hs)
                        .all(|r| band.row(by + r)[x..x + hs] == band.row(ry + r)[rx..rx + hs]);
                    if !same {
                        continue;
                    }
                    let bv = BlockVector::new(rx as i32 - x as i32, ry as i32 - by as i32);
                    if bv_valid(bv, Block::new(x, y, size, size), &self.st.rsm) {
                        out.push(bv);
                        found += 1;
                        if found == HASH_MATCHES {
                            break;
                        }
                    }
                }
            }
        }
        let mut seen = std::collections::HashSet::new();
        out.retain(|v| seen.insert(*v));
        out
    }
}

fn activity(r: &[Vec<i32>]) -> u64 {
    r.iter()
        .flatten()
        .map(|v| u64::from(v.unsigned_abs()))
        .sum()
}

/// Sums of absolute horizontal and vertical neighbour differences.
fn gradient_energy(r: &[Vec<i32>]) -> (u64, u64) {
    let (mut h, mut v) = (0, 0);
    for plane in r.iter().filter(|p| !p.is_empty()) {
        let n = (plane.len() as f64).sqrt() as usize;
        for i in 0..plane.len() {
            if i % n > 0 {
                h += u64::from((plane[i] - plane[i - 1]).unsigned_abs());
            }
            if i >= n {
                v += u64::from((plane[i] - plane[i - n]).unsigned_abs());
            }
        }
    }
    (h, v)
}

fn act_forward(base: &[Vec<i32>], lossless: bool) -> Vec<Vec<i32>> {
    let mut out: Vec<Vec<i32>> = (0..3).map(|_| Vec::with_capacity(base[0].len())).collect();
    for ((&r, &g), &b) in base[0].iter().zip(&base[1]).zip(&base[2]) {
        let t = if lossless {
            act_lossless_forward(r, g, b)
        } else {
            act_lossy_forward(r, g, b)
        };
        out[0].push(t.c0);
        out[1].push(t.c1);
        out[2].push(t.c2);
    }
    out
}
