//! Reference sample memory: one CTU worth of samples, split into four 64x64
//! regions. At the start of a CTU every region still mirrors the previous
//! CTU; entering a region of the current CTU empties the collocated region
//! and starts filling it with current-CTU reconstruction.

use crate::media_io::ChromaFormat;
use crate::{Error, Result};

pub const CTU_SIZE: usize = 128;
pub const REGION_SIZE: usize = 64;
/// Granularity of the "already reconstructed" bookkeeping, in luma samples.
pub const UNIT: usize = 4;

const UNITS_PER_ROW: usize = CTU_SIZE / UNIT;

/// What a 64x64 region currently holds. Origins are the top-left luma
/// coordinates of the CTU the region mirrors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionState {
    Empty,
    LeftCtu { ctu_x: usize, ctu_y: usize },
    Current { ctu_x: usize, ctu_y: usize },
}

#[derive(Debug, Clone)]
pub struct ReferenceSampleMemory {
    pic_width: usize,
    pic_height: usize,
    chroma_format: ChromaFormat,
    regions: [RegionState; 4],
    current_ctu: Option<(usize, usize)>,
    /// Per plane, `CTU_SIZE >> shift` square storage.
    planes: Vec<Vec<u16>>,
    coded: Vec<bool>,
}

/// Saved RSM content of one square area inside a single region.
#[derive(Debug, Clone)]
pub struct RsmAreaSnapshot {
    x: usize,
    y: usize,
    size: usize,
    planes: Vec<Vec<u16>>,
    coded: Vec<bool>,
}

impl ReferenceSampleMemory {
    pub fn new(pic_width: usize, pic_height: usize, chroma_format: ChromaFormat) -> Self {
        let planes = (0..chroma_format.num_planes())
            .map(|p| {
                let (w, h) = chroma_format.plane_dims(p, CTU_SIZE, CTU_SIZE);
                vec![0u16; w * h]
            })
            .collect();
        Self {
            pic_width,
            pic_height,
            chroma_format,
            regions: [RegionState::Empty; 4],
            current_ctu: None,
            planes,
            coded: vec![false; UNITS_PER_ROW * UNITS_PER_ROW],
        }
    }

    pub fn picture_dims(&self) -> (usize, usize) {
        (self.pic_width, self.pic_height)
    }

    pub fn chroma_format(&self) -> ChromaFormat {
        self.chroma_format
    }

    pub fn regions(&self) -> [RegionState; 4] {
        self.regions
    }

    pub fn current_ctu(&self) -> Option<(usize, usize)> {
        self.current_ctu
    }

    /// Luma samples held by non-empty regions; never above one CTU.
    pub fn occupancy(&self) -> usize {
        self.regions
            .iter()
            .filter(|r| **r != RegionState::Empty)
            .count()
            * REGION_SIZE
            * REGION_SIZE
    }

    /// Region index (0 top-left, 1 top-right, 2 bottom-left, 3 bottom-right)
    /// of a luma position.
    #[inline]
    pub fn region_of(x: usize, y: usize) -> usize {
        ((y % CTU_SIZE) / REGION_SIZE) * 2 + (x % CTU_SIZE) / REGION_SIZE
    }

    /// Starts a CTU: regions that held the previous CTU become its
    /// left-CTU mirror.
    pub fn begin_ctu(&mut self, ctu_x: usize, ctu_y: usize) {
        for r in &mut self.regions {
            if let RegionState::Current { ctu_x, ctu_y } = *r {
                *r = RegionState::LeftCtu { ctu_x, ctu_y };
            }
        }
        self.current_ctu = Some((ctu_x, ctu_y));
    }

    /// Empties `region` and hands it to the current CTU.
    pub fn enter_region(&mut self, region: usize) {
        let (ctu_x, ctu_y) = self.current_ctu.expect("enter_region before begin_ctu");
        self.regions[region] = RegionState::Current { ctu_x, ctu_y };
        let (rx, ry) = ((region % 2) * REGION_SIZE, (region / 2) * REGION_SIZE);
        for uy in ry / UNIT..(ry + REGION_SIZE) / UNIT {
            for ux in rx / UNIT..(rx + REGION_SIZE) / UNIT {
                self.coded[uy * UNITS_PER_ROW + ux] = false;
            }
        }
        for p in 0..self.planes.len() {
            let (sx, sy) = self.shift(p);
            let stride = CTU_SIZE >> sx;
            for y in (ry >> sy)..((ry + REGION_SIZE) >> sy) {
                self.planes[p][y * stride + (rx >> sx)..y * stride + ((rx + REGION_SIZE) >> sx)]
                    .fill(0);
            }
        }
    }

    #[inline]
    fn shift(&self, plane: usize) -> (u32, u32) {
        if plane == 0 {
            (0, 0)
        } else {
            self.chroma_format.chroma_shift()
        }
    }

    #[inline]
    fn ctu_origin(x: usize, y: usize) -> (usize, usize) {
        (x / CTU_SIZE * CTU_SIZE, y / CTU_SIZE * CTU_SIZE)
    }

    /// Whether the luma sample at picture position (x, y) may be referenced.
    pub fn is_valid(&self, x: usize, y: usize) -> bool {
        if x >= self.pic_width || y >= self.pic_height {
            return false;
        }
        let Some((cx, cy)) = self.current_ctu else {
            return false;
        };
        let origin = Self::ctu_origin(x, y);
        match self.regions[Self::region_of(x, y)] {
            RegionState::Current { ctu_x, ctu_y } => {
                (ctu_x, ctu_y) == origin
                    && origin == (cx, cy)
                    && self.coded[((y % CTU_SIZE) / UNIT) * UNITS_PER_ROW + (x % CTU_SIZE) / UNIT]
            }
            RegionState::LeftCtu { ctu_x, ctu_y } => {
                (ctu_x, ctu_y) == origin && cx >= CTU_SIZE && origin == (cx - CTU_SIZE, cy)
            }
            RegionState::Empty => false,
        }
    }

    /// Reads a sample at plane coordinates, checking validity first.
    pub fn read(&self, plane: usize, x: usize, y: usize) -> Result<u16> {
        let (sx, sy) = self.shift(plane);
        if !self.is_valid(x << sx, y << sy) {
            return Err(Error::bitstream(
                format!("plane {plane} ({x}, {y})"),
                "reference sample outside the valid RSM area",
            ));
        }
        Ok(self.read_unchecked(plane, x, y))
    }

    #[inline]
    pub(crate) fn read_unchecked(&self, plane: usize, x: usize, y: usize) -> u16 {
        let (sx, sy) = self.shift(plane);
        let (mx, my) = (x % (CTU_SIZE >> sx), y % (CTU_SIZE >> sy));
        self.planes[plane][my * (CTU_SIZE >> sx) + mx]
    }

    /// Stores reconstructed samples (plane coordinates) of the current CTU.
    /// Every sample must fall in a region that is `Current`.
    pub fn write_block(
        &mut self,
        plane: usize,
        x: usize,
        y: usize,
        w: usize,
        h: usize,
        samples: &[u16],
    ) -> Result<()> {
        debug_assert_eq!(samples.len(), w * h);
        let (sx, sy) = self.shift(plane);
        let cur = self.current_ctu;
        for &(px, py) in &[(x, y), (x + w - 1, y + h - 1)] {
            let (lx, ly) = (px << sx, py << sy);
            let ok = matches!(self.regions[Self::region_of(lx, ly)],
                RegionState::Current { ctu_x, ctu_y } if Some((ctu_x, ctu_y)) == cur && Self::ctu_origin(lx, ly) == (ctu_x, ctu_y));
            if !ok {
                return Err(Error::bitstream(
                    format!("plane {plane} ({px}, {py})"),
                    "RSM write outside the current region",
                ));
            }
        }
        if Self::region_of(x << sx, y << sy)
            != Self::region_of((x + w - 1) << sx, (y + h - 1) << sy)
        {
            return Err(Error::bitstream(
                format!("plane {plane} ({x}, {y})"),
                "RSM write spans regions",
            ));
        }
        let stride = CTU_SIZE >> sx;
        for row in 0..h {
            let my = (y + row) % (CTU_SIZE >> sy);
            let mx = x % stride;
            self.planes[plane][my * stride + mx..my * stride + mx + w]
                .copy_from_slice(&samples[row * w..(row + 1) * w]);
        }
        Ok(())
    }

    /// Marks a luma rectangle of the current CTU as reconstructed.
    pub fn mark_coded(&mut self, x: usize, y: usize, w: usize, h: usize) {
        for uy in (y % CTU_SIZE) / UNIT..((y % CTU_SIZE) + h).div_ceil(UNIT) {
            for ux in (x % CTU_SIZE) / UNIT..((x % CTU_SIZE) + w).div_ceil(UNIT) {
                self.coded[uy * UNITS_PER_ROW + ux] = true;
            }
        }
    }

    pub fn snapshot_area(&self, x: usize, y: usize, size: usize) -> RsmAreaSnapshot {
        let planes = (0..self.planes.len())
            .map(|p| {
                let (sx, sy) = self.shift(p);
                let stride = CTU_SIZE >> sx;
                let (mx, my, w, h) = (
                    (x % CTU_SIZE) >> sx,
                    (y % CTU_SIZE) >> sy,
                    size >> sx,
                    size >> sy,
                );
                (my..my + h)
                    .flat_map(|r| {
                        self.planes[p][r * stride + mx..r * stride + mx + w]
                            .iter()
                            .copied()
                    })
                    .collect()
            })
            .collect();
        let (ux, uy, n) = (
            (x % CTU_SIZE) / UNIT,
            (y % CTU_SIZE) / UNIT,
            size.div_ceil(UNIT),
        );
        let coded = (uy..uy + n)
            .flat_map(|r| {
                self.coded[r * UNITS_PER_ROW + ux..r * UNITS_PER_ROW + ux + n]
                    .iter()
                    .copied()
            })
            .collect();
        RsmAreaSnapshot {
            x,
            y,
            size,
            planes,
            coded,
        }
    }

    pub fn restore_area(&mut self, snap: &RsmAreaSnapshot) {
        let (x, y, size) = (snap.x, snap.y, snap.size);
        for p in 0..self.planes.len() {
            let (sx, sy) = self.shift(p);
            let stride = CTU_SIZE >> sx;
            let (mx, my, w, h) = (
                (x % CTU_SIZE) >> sx,
                (y % CTU_SIZE) >> sy,
                size >> sx,
                size >> sy,
            );
            for r in 0..h {
                self.planes[p][(my + r) * stride + mx..(my + r) * stride + mx + w]
                    .copy_from_slice(&snap.planes[p][r * w..(r + 1) * w]);
            }
        }
        let (ux, uy, n) = (
            (x % CTU_SIZE) / UNIT,
            (y % CTU_SIZE) / UNIT,
            size.div_ceil(UNIT),
        );
        for r in 0..n {
            self.coded[(uy + r) * UNITS_PER_ROW + ux..(uy + r) * UNITS_PER_ROW + ux + n]
                .copy_from_slice(&snap.coded[r * n..(r + 1) * n]);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn states(rsm: &ReferenceSampleMemory) -> (usize, usize, usize) {
        let r = rsm.regions();
        (
            r.iter()
                .filter(|s| matches!(s, RegionState::LeftCtu { .. }))
                .count(),
            r.iter()
                .filter(|s| matches!(s, RegionState::Current { .. }))
                .count(),
            r.iter().filter(|s| matches!(s, RegionState::Empty)).count(),
        )
    }

    fn fill_ctu(rsm: &mut ReferenceSampleMemory, cx: usize, cy: usize) {
        rsm.begin_ctu(cx, cy);
        for r in 0..4 {
            rsm.enter_region(r);
            let (x, y) = (cx + (r % 2) * 64, cy + (r / 2) * 64);
            rsm.write_block(0, x, y, 64, 64, &vec![r as u16; 4096])
                .unwrap();
            rsm.mark_coded(x, y, 64, 64);
        }
    }

    #[test]
    fn region_lifecycle_over_one_ctu() {
        let mut rsm = ReferenceSampleMemory::new(512, 128, ChromaFormat::Yuv400);
        fill_ctu(&mut rsm, 0, 0);
        rsm.begin_ctu(128, 0);
        assert_eq!(
            states(&rsm),
            (4, 0, 0),
            "state (0): all regions mirror the previous CTU"
        );
        rsm.enter_region(0);
        assert_eq!(states(&rsm), (3, 1, 0));
        for r in 1..4 {
            rsm.enter_region(r);
        }
        assert_eq!(
            states(&rsm),
            (0, 4, 0),
            "state (4): all regions hold the current CTU"
        );
        assert!(rsm.occupancy() <= CTU_SIZE * CTU_SIZE);
    }

    #[test]
    fn region_is_never_both_left_and_current() {
        let mut rsm = ReferenceSampleMemory::new(512, 256, ChromaFormat::Yuv420);
        for cy in (0..256).step_by(128) {
            for cx in (0..512).step_by(128) {
                fill_ctu(&mut rsm, cx, cy);
                assert_eq!(states(&rsm), (0, 4, 0));
                assert!(rsm.occupancy() <= CTU_SIZE * CTU_SIZE);
            }
        }
    }

    #[test]
    fn write_outside_current_region_fails() {
        let mut rsm = ReferenceSampleMemory::new(256, 128, ChromaFormat::Yuv420);
        rsm.begin_ctu(0, 0);
        rsm.enter_region(0);
        assert!(rsm.write_block(0, 0, 0, 8, 8, &[0; 64]).is_ok());
        assert!(rsm.write_block(0, 64, 0, 8, 8, &[0; 64]).is_err());
        assert!(rsm.write_block(1, 0, 0, 4, 4, &[0; 16]).is_ok());
        assert!(rsm.write_block(1, 32, 0, 4, 4, &[0; 16]).is_err());
    }

    #[test]
    fn snapshot_restores_samples_and_flags() {
        let mut rsm = ReferenceSampleMemory::new(256, 128, ChromaFormat::Yuv420);
        rsm.begin_ctu(0, 0);
        rsm.enter_region(0);
        let snap = rsm.snapshot_area(16, 16, 16);
        rsm.write_block(0, 16, 16, 16, 16, &[9; 256]).unwrap();
        rsm.write_block(2, 8, 8, 8, 8, &[9; 64]).unwrap();
        rsm.mark_coded(16, 16, 16, 16);
        assert!(rsm.is_valid(20, 20));
        rsm.restore_area(&snap);
        assert!(!rsm.is_valid(20, 20));
        assert_eq!(rsm.read_unchecked(0, 20, 20), 0);
        assert_eq!(rsm.read_unchecked(2, 10, 10), 0);
    }
}
