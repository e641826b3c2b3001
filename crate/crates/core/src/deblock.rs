//! In-loop deblocking on the 8x8 grid with screen-content boundary strength
//! rules: sharp edges and busy neighbourhoods are filtered less or not at all.

use crate::codec::PredMode;
use crate::media_io::Frame;

/// Edge grid spacing in luma samples.
pub const EDGE_GRID: usize = 8;
/// Largest sample change the filter may apply.
pub const FILTER_CLIP: i32 = 2;

/// Thresholds for 8-bit video; scaled by bit depth.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DeblockParams {
    pub t_edge: i32,
    pub t_flat: i32,
}

impl Default for DeblockParams {
    fn default() -> Self {
        Self {
            t_edge: 64,
            t_flat: 32,
        }
    }
}

impl DeblockParams {
    fn scaled(self, bit_depth: u8) -> Self {
        let s = u32::from(bit_depth.saturating_sub(8));
        Self {
            t_edge: self.t_edge << s,
            t_flat: self.t_flat << s,
        }
    }
}

/// One line of samples across an edge: `p[0]` and `q[0]` touch the edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeContext {
    pub p: [i32; 4],
    pub q: [i32; 4],
    pub p_mode: PredMode,
    pub q_mode: PredMode,
}

pub fn bs_decide(ctx: &EdgeContext, params: &DeblockParams) -> u8 {
    let (p, q) = (&ctx.p, &ctx.q);
    if (p[0] - q[0]).abs() > params.t_edge {
        return 0;
    }
    let mut bs: u8 = if ctx.p_mode.is_intra_class() || ctx.q_mode.is_intra_class() {
        2
    } else {
        1
    };
    let busy = |s: &[i32; 4]| (s[0] - s[1]).abs().max((s[1] - s[2]).abs()) > params.t_flat;
    if busy(p) || busy(q) {
        bs = bs.saturating_sub(1);
    }
    bs
}

/// Filtered `(p, q)` for the given strength.
pub fn filter_edge(ctx: &EdgeContext, bs: u8) -> ([i32; 4], [i32; 4]) {
    let (mut p, mut q) = (ctx.p, ctx.q);
    if bs == 0 {
        return (p, q);
    }
    let clip = |new: i32, old: i32| new.clamp(old - FILTER_CLIP, old + FILTER_CLIP);
    let (op, oq) = (ctx.p, ctx.q);
    p[0] = clip((op[1] + 2 * op[0] + oq[0] + 2) >> 2, op[0]);
    q[0] = clip((oq[1] + 2 * oq[0] + op[0] + 2) >> 2, oq[0]);
    if bs == 2 {
        p[1] = clip((op[2] + 2 * op[1] + op[0] + 2) >> 2, op[1]);
        q[1] = clip((oq[2] + 2 * oq[1] + oq[0] + 2) >> 2, oq[1]);
    }
    (p, q)
}

/// CU layout of a picture at 4x4 luma granularity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CuGrid {
    cols: usize,
    rows: usize,
    ids: Vec<u32>,
    modes: Vec<PredMode>,
}

impl CuGrid {
    pub const UNIT: usize = 4;

    pub fn new(width: usize, height: usize) -> Self {
        let (cols, rows) = (width.div_ceil(Self::UNIT), height.div_ceil(Self::UNIT));
        Self {
            cols,
            rows,
            ids: vec![0; cols * rows],
            modes: vec![PredMode::Dc; cols * rows],
        }
    }

    pub fn set(&mut self, x: usize, y: usize, size: usize, id: u32, mode: PredMode) {
        let u = Self::UNIT;
        for uy in y / u..((y + size) / u).min(self.rows) {
            for ux in x / u..((x + size) / u).min(self.cols) {
                self.ids[uy * self.cols + ux] = id;
                self.modes[uy * self.cols + ux] = mode;
            }
        }
    }

    /// CU id and mode at a luma position.
    pub fn at(&self, x: usize, y: usize) -> (u32, PredMode) {
        let i = (y / Self::UNIT) * self.cols + x / Self::UNIT;
        (self.ids[i], self.modes[i])
    }

    /// Mode at a luma position.
    pub fn mode(&self, x: usize, y: usize) -> PredMode {
        self.at(x, y).1
    }

    /// Number of 4x4 units per mode, indexed like [`PredMode::ALL`].
    pub fn mode_area(&self) -> [usize; 7] {
        let mut out = [0; 7];
        for m in &self.modes {
            out[PredMode::ALL.iter().position(|a| a == m).unwrap()] += 1;
        }
        out
    }
}

/// Deblocks every plane in place: all vertical edges first, then all
/// horizontal edges. Edges lie on the 8x8 grid of each plane and are
/// filtered only where the two sides belong to different CUs.
pub fn deblock_frame(frame: &mut Frame, grid: &CuGrid, params: &DeblockParams) {
    let params = params.scaled(frame.bit_depth());
    let cf = frame.chroma_format;
    for vertical in [true, false] {
        for (pi, plane) in frame.planes.iter_mut().enumerate() {
            let (sx, sy) = if pi == 0 { (0, 0) } else { cf.chroma_shift() };
            let (w, h) = (plane.width(), plane.height());
            let max = (1i32 << plane.bit_depth()) - 1;
            // (edge position, line) pairs in plane coordinates
            let (n_edges, line_len) = if vertical { (w, h) } else { (h, w) };
            for e in (EDGE_GRID..n_edges).step_by(EDGE_GRID) {
                if e < 4 || e + 4 > n_edges {
                    continue;
                }
                for l in 0..line_len {
                    let (xq, yq) = if vertical { (e, l) } else { (l, e) };
                    let (xp, yp) = if vertical { (e - 1, l) } else { (l, e - 1) };
                    let (p_id, p_mode) = grid.at(xp << sx, yp << sy);
                    let (q_id, q_mode) = grid.at(xq << sx, yq << sy);
                    if p_id == q_id {
                        continue;
                    }
                    let at = |k: isize| -> (usize, usize) {
                        if vertical {
                            ((e as isize + k) as usize, l)
                        } else {
                            (l, (e as isize + k) as usize)
                        }
                    };
                    let mut ctx = EdgeContext {
                        p: [0; 4],
                        q: [0; 4],
                        p_mode,
                        q_mode,
                    };
                    for k in 0..4 {
                        let (x, y) = at(-1 - k as isize);
                        ctx.p[k] = i32::from(plane.get(x, y));
                        let (x, y) = at(k as isize);
                        ctx.q[k] = i32::from(plane.get(x, y));
                    }
                    let bs = bs_decide(&ctx, &params);
                    if bs == 0 {
                        continue;
                    }
                    let (p, q) = filter_edge(&ctx, bs);
                    for k in 0..2 {
                        let (x, y) = at(-1 - k as isize);
                        plane.set(x, y, p[k].clamp(0, max) as u16);
                        let (x, y) = at(k as isize);
                        plane.set(x, y, q[k].clamp(0, max) as u16);
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::media_io::{ChromaFormat, ColorSpace, PlaneBuffer};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ctx(p: [i32; 4], q: [i32; 4]) -> EdgeContext {
        EdgeContext {
            p,
            q,
            p_mode: PredMode::Dc,
            q_mode: PredMode::Ibc,
        }
    }

    #[test]
    fn sharp_edge_is_never_filtered() {
        let d = DeblockParams::default();
        for &a in &PredMode::ALL {
            for &b in &PredMode::ALL {
                let c = EdgeContext {
                    p: [20; 4],
                    q: [220; 4],
                    p_mode: a,
                    q_mode: b,
                };
                assert_eq!(bs_decide(&c, &d), 0);
            }
        }
    }

    #[test]
    fn smooth_edge_is_strong() {
        assert_eq!(
            bs_decide(
                &ctx([100, 101, 102, 103], [104, 105, 106, 107]),
                &DeblockParams::default()
            ),
            2
        );
    }

    #[test]
    fn busy_side_lowers_strength() {
        assert_eq!(
            bs_decide(
                &ctx([100, 200, 200, 200], [110, 110, 110, 110]),
                &DeblockParams::default()
            ),
            1
        );
    }

    #[test]
    fn flat_signal_is_unchanged() {
        let c = ctx([77; 4], [77; 4]);
        assert_eq!(filter_edge(&c, 2), (c.p, c.q));
    }

    #[test]
    fn ramp_moves_at_most_two() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..10_000 {
            let p: [i32; 4] = std::array::from_fn(|_| rng.gen_range(0..256));
            let q: [i32; 4] = std::array::from_fn(|_| rng.gen_range(0..256));
            let c = ctx(p, q);
            for bs in 1..=2 {
                let (np, nq) = filter_edge(&c, bs);
                for k in 0..4 {
                    assert!(
                        (np[k] - p[k]).abs() <= FILTER_CLIP && (nq[k] - q[k]).abs() <= FILTER_CLIP
                    );
                }
            }
        }
    }

    #[test]
    fn frame_edges_between_cus_only() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let samples: Vec<u16> = (0..32 * 32)
            .map(|i| (i % 32) as u16 * 3 + rng.gen_range(0..2))
            .collect();
        let plane = PlaneBuffer::from_samples(32, 32, 8, samples).unwrap();
        let frame =
            Frame::from_planes(vec![plane], ChromaFormat::Yuv400, ColorSpace::YCbCr).unwrap();
        let mut one_cu = CuGrid::new(32, 32);
        one_cu.set(0, 0, 32, 1, PredMode::Dc);
        let mut f = frame.clone();
        deblock_frame(&mut f, &one_cu, &DeblockParams::default());
        assert_eq!(f, frame);
        let mut split = CuGrid::new(32, 32);
        for (i, (x, y)) in [(0, 0), (16, 0), (0, 16), (16, 16)].into_iter().enumerate() {
            split.set(x, y, 16, i as u32, PredMode::Dc);
        }
        let mut f = frame.clone();
        deblock_frame(&mut f, &split, &DeblockParams::default());
        assert_ne!(f, frame);
        for y in 0..32 {
            for x in 0..32 {
                let moved = f.planes[0].get(x, y) != frame.planes[0].get(x, y);
                if moved {
                    assert!(
                        (14..18).contains(&x) || (14..18).contains(&y),
                        "({x}, {y}) is off the CU edge"
                    );
                }
            }
        }
    }
}
