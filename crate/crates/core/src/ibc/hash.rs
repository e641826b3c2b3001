//! Content hashes of square blocks with chained buckets.
//!
//! Key: an 8-bit CRC of every block row, then a CRC-16/CCITT over those
//! row checksums. Positions sharing a key are chained through a `next`
//! array (newest first), so a lookup only touches same-key positions.

use crate::media_io::PlaneBuffer;

const NONE: u32 = u32::MAX;

const fn crc8_table() -> [u8; 256] {
    let mut t = [0u8; 256];
    let mut i = 0;
    while i < 256 {
        let mut c = i as u8;
        let mut k = 0;
        while k < 8 {
            c = if c & 0x80 != 0 {
                (c << 1) ^ 0x07
            } else {
                c << 1
            };
            k += 1;
        }
        t[i] = c;
        i += 1;
    }
    t
}

const fn crc16_table() -> [u16; 256] {
    let mut t = [0u16; 256];
    let mut i = 0;
    while i < 256 {
        let mut c = (i as u16) << 8;
        let mut k = 0;
        while k < 8 {
            c = if c & 0x8000 != 0 {
                (c << 1) ^ 0x1021
            } else {
                c << 1
            };
            k += 1;
        }
        t[i] = c;
        i += 1;
    }
    t
}

static CRC8: [u8; 256] = crc8_table();
static CRC16: [u16; 256] = crc16_table();

#[inline]
fn row_crc(row: &[u16]) -> u8 {
    row.iter().fold(0u8, |c, &s| CRC8[usize::from(c ^ s as u8)])
}

#[inline]
fn combine(rows: impl Iterator<Item = u8>) -> u16 {
    rows.fold(0xffffu16, |c, b| {
        (c << 8) ^ CRC16[usize::from((c >> 8) as u8 ^ b)]
    })
}

/// Hash of the `size` x `size` block at (x, y).
pub fn block_hash(plane: &PlaneBuffer, x: usize, y: usize, size: usize) -> u16 {
    combine((y..y + size).map(|r| row_crc(&plane.row(r)[x..x + size])))
}

#[derive(Debug, Clone)]
pub struct BlockHashTable {
    block_size: usize,
    width: usize,
    heads: Vec<u32>,
    next: Vec<u32>,
}

impl BlockHashTable {
    /// Hashes every block position `(x, y)` for which `in_area` holds.
    pub fn build(
        plane: &PlaneBuffer,
        block_size: usize,
        mut in_area: impl FnMut(usize, usize) -> bool,
    ) -> Self {
        let (w, h) = (plane.width(), plane.height());
        let mut table = Self {
            block_size,
            width: w,
            heads: vec![NONE; 1 << 16],
            next: vec![NONE; w * h],
        };
        if w < block_size || h < block_size {
            return table;
        }
        let cols = w - block_size + 1;
        // row checksums for every horizontal window
        let mut rows = vec![0u8; cols * h];
        for y in 0..h {
            let r = plane.row(y);
            for x in 0..cols {
                rows[y * cols + x] = row_crc(&r[x..x + block_size]);
            }
        }
        for y in 0..=h - block_size {
            for x in 0..cols {
                if !in_area(x, y) {
                    continue;
                }
                let key = combine((y..y + block_size).map(|r| rows[r * cols + x]));
                let pos = (y * w + x) as u32;
                table.next[pos as usize] = table.heads[usize::from(key)];
                table.heads[usize::from(key)] = pos;
            }
        }
        table
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    /// Positions stored under `key`, newest first.
    pub fn positions(&self, key: u16) -> impl Iterator<Item = (usize, usize)> + '_ {
        let mut cur = self.heads[usize::from(key)];
        std::iter::from_fn(move || {
            if cur == NONE {
                return None;
            }
            let p = cur as usize;
            cur = self.next[p];
            Some((p % self.width, p / self.width))
        })
    }

    /// Candidates for the block at (x, y) of `plane`, exactly verified
    /// against the stored content of `reference`.
    pub fn search(
        &self,
        plane: &PlaneBuffer,
        x: usize,
        y: usize,
        reference: &PlaneBuffer,
    ) -> Vec<(usize, usize)> {
        let n = self.block_size;
        self.positions(block_hash(plane, x, y, n))
            .filter(|&(rx, ry)| {
                (0..n).all(|r| plane.row(y + r)[x..x + n] == reference.row(ry + r)[rx..rx + n])
            })
            .collect()
    }
}
