//! History-based vector table shared by IBC and string copy, and the
//! class-based predictor built from it.

use super::{Block, BlockVector};

pub const HISTORY_CAPACITY: usize = 8;
pub const CBVP_CLASSES: usize = 7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HistoryEntry {
    pub vector: BlockVector,
    /// Top-left luma position of the block, or first pixel of the string.
    pub x: usize,
    pub y: usize,
    /// Luma samples covered (block area or string length).
    pub size: usize,
    pub occurrence: u32,
}

/// Most-recent-first list of distinct vectors.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct HistoryVectorTable {
    entries: Vec<HistoryEntry>,
}

impl HistoryVectorTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn entries(&self) -> &[HistoryEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn clear(&mut self) {
        self.entries.clear();
    }

    pub fn get(&self, index: usize) -> Option<&HistoryEntry> {
        self.entries.get(index)
    }

    pub fn position_of(&self, vector: BlockVector) -> Option<usize> {
        self.entries.iter().position(|e| e.vector == vector)
    }

    /// Records a coded vector. A repeated vector moves to the front with its
    /// occurrence count bumped and its position/size refreshed; a new one is
    /// pushed to the front, evicting the oldest past capacity.
    pub fn update(&mut self, vector: BlockVector, x: usize, y: usize, size: usize) {
        let occurrence = match self.position_of(vector) {
            Some(i) => self.entries.remove(i).occurrence + 1,
            None => 1,
        };
        self.entries.insert(
            0,
            HistoryEntry {
                vector,
                x,
                y,
                size,
                occurrence,
            },
        );
        self.entries.truncate(HISTORY_CAPACITY);
    }
}

/// Class candidates for `block`:
///
/// | class | entries qualifying |
/// |-------|--------------------|
/// | 0 | size > 32 luma samples |
/// | 1 | occurrence > 1 |
/// | 2 | left: `x < block.x`, `y` within the block rows |
/// | 3 | above: `y < block.y`, `x` within the block columns |
/// | 4 | above-left |
/// | 5 | above-right: `x >= block.x + w`, `y < block.y` |
/// | 6 | below-left: `x < block.x`, `y >= block.y + h` |
///
/// Each class yields its most recent qualifying entry.
pub fn cbvp_classify(
    history: &HistoryVectorTable,
    block: Block,
) -> [Option<BlockVector>; CBVP_CLASSES] {
    let mut out = [None; CBVP_CLASSES];
    for e in history.entries() {
        let left = e.x < block.x;
        let above = e.y < block.y;
        let in_rows = e.y >= block.y && e.y < block.y + block.h;
        let in_cols = e.x >= block.x && e.x < block.x + block.w;
        let quals = [
            e.size > 32,
            e.occurrence > 1,
            left && in_rows,
            above && in_cols,
            left && above,
            above && e.x >= block.x + block.w,
            left && e.y >= block.y + block.h,
        ];
        for (slot, q) in out.iter_mut().zip(quals) {
            if q && slot.is_none() {
                *slot = Some(e.vector);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bv(x: i32, y: i32) -> BlockVector {
        BlockVector::new(x, y)
    }

    #[test]
    fn insert_dedup_and_evict() {
        let mut h = HistoryVectorTable::new();
        h.update(bv(-8, 0), 8, 0, 64);
        assert_eq!(h.len(), 1);
        assert_eq!(h.entries()[0].occurrence, 1);
        h.update(bv(-8, 0), 16, 0, 64);
        assert_eq!(h.len(), 1);
        assert_eq!(h.entries()[0].occurrence, 2);
        assert_eq!(h.entries()[0].x, 16);

        let mut h = HistoryVectorTable::new();
        for i in 0..9 {
            h.update(bv(-i - 1, 0), 0, 0, 16);
        }
        assert_eq!(h.len(), HISTORY_CAPACITY);
        assert_eq!(h.entries()[0].vector, bv(-9, 0));
        assert!(h.position_of(bv(-1, 0)).is_none(), "oldest evicted");
    }

    #[test]
    fn repeated_vector_moves_to_front() {
        let mut h = HistoryVectorTable::new();
        h.update(bv(-1, 0), 0, 0, 16);
        h.update(bv(-2, 0), 0, 0, 16);
        h.update(bv(-1, 0), 0, 0, 16);
        assert_eq!(
            h.entries().iter().map(|e| e.vector).collect::<Vec<_>>(),
            vec![bv(-1, 0), bv(-2, 0)]
        );
    }

    #[test]
    fn size_and_occurrence_classes() {
        let mut h = HistoryVectorTable::new();
        h.update(bv(-64, 0), 200, 200, 64);
        let c = cbvp_classify(&h, Block::new(0, 0, 8, 8));
        assert_eq!(c[0], Some(bv(-64, 0)));
        assert_eq!(c[1], None);
        h.update(bv(-4, 0), 200, 200, 16);
        h.update(bv(-4, 0), 200, 200, 16);
        let c = cbvp_classify(&h, Block::new(0, 0, 8, 8));
        assert_eq!(c[1], Some(bv(-4, 0)));
        assert_eq!(c[0], Some(bv(-64, 0)), "most recent entry with size > 32");
    }

    #[test]
    fn spatial_classes() {
        let blk = Block::new(64, 64, 16, 16);
        let cases = [
            ((40, 70), 2),
            ((70, 40), 3),
            ((40, 40), 4),
            ((90, 40), 5),
            ((40, 90), 6),
        ];
        for ((x, y), class) in cases {
            let mut h = HistoryVectorTable::new();
            h.update(bv(-1, -1), x, y, 16);
            let c = cbvp_classify(&h, blk);
            for (k, slot) in c.iter().enumerate().skip(2) {
                assert_eq!(slot.is_some(), k == class, "entry at ({x},{y}) class {k}");
            }
        }
    }

    #[test]
    fn empty_history_has_no_candidates() {
        assert!(
            cbvp_classify(&HistoryVectorTable::new(), Block::new(0, 0, 8, 8))
                .iter()
                .all(Option::is_none)
        );
    }
}
