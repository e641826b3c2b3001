use crate::bitio::{BitReader, BitSink};
use crate::error::{Error, Result};

/// Palette indices of one CU in raster layout; `escape_index` (the palette
/// size) marks escape samples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexMap {
    pub width: usize,
    pub height: usize,
    pub indices: Vec<u8>,
}

impl IndexMap {
    pub fn new(width: usize, height: usize, indices: Vec<u8>) -> Self {
        assert_eq!(indices.len(), width * height);
        Self {
            width,
            height,
            indices,
        }
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.indices[y * self.width + x]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunKind {
    CopyIndex(u8),
    CopyAbove,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndexRun {
    pub kind: RunKind,
    pub length: usize,
}

/// Horizontal traverse scan: even rows left to right, odd rows right to left.
pub fn traverse_scan(w: usize, h: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h {
        if y % 2 == 0 {
            out.extend((0..w).map(|x| (x, y)));
        } else {
            out.extend((0..w).rev().map(|x| (x, y)));
        }
    }
    out
}

fn index_bits(num_symbols: usize) -> u32 {
    usize::BITS - (num_symbols.max(1) - 1).leading_zeros()
}

/// Greedy run segmentation; copy-above wins ties since it carries no index.
pub fn index_runs(map: &IndexMap) -> Vec<IndexRun> {
    let scan = traverse_scan(map.width, map.height);
    let above = |i: usize| {
        let (x, y) = scan[i];
        y > 0 && map.get(x, y) == map.get(x, y - 1)
    };
    let mut runs = Vec::new();
    let mut pos = 0;
    let mut prev_ca = false;
    while pos < scan.len() {
        let (x, y) = scan[pos];
        let idx = map.get(x, y);
        let ci_len = scan[pos..]
            .iter()
            .take_while(|&&(x, y)| map.get(x, y) == idx)
            .count();
        let ca_ok = y > 0 && !prev_ca;
        let ca_len = if ca_ok {
            (pos..scan.len()).take_while(|&i| above(i)).count()
        } else {
            0
        };
        let run = if ca_ok && ca_len >= ci_len {
            IndexRun {
                kind: RunKind::CopyAbove,
                length: ca_len,
            }
        } else {
            IndexRun {
                kind: RunKind::CopyIndex(idx),
                length: ci_len,
            }
        };
        prev_ca = run.kind == RunKind::CopyAbove;
        pos += run.length;
        runs.push(run);
    }
    runs
}

/// Writes the index map as CI/CA runs. `num_symbols` is the palette size
/// plus one when escapes are present.
pub fn index_map_encode<S: BitSink>(sink: &mut S, map: &IndexMap, num_symbols: usize) {
    let bits = index_bits(num_symbols);
    let scan = traverse_scan(map.width, map.height);
    let mut pos = 0;
    let mut prev_ca = false;
    for run in index_runs(map) {
        let ca_ok = scan[pos].1 > 0 && !prev_ca;
        if ca_ok {
            sink.put_flag(run.kind == RunKind::CopyAbove);
        }
        if let RunKind::CopyIndex(i) = run.kind {
            debug_assert!((i as usize) < num_symbols);
            sink.put_bits(i as u64, bits);
        }
        sink.put_ue(run.length as u32 - 1);
        prev_ca = run.kind == RunKind::CopyAbove;
        pos += run.length;
    }
}

pub fn index_map_decode(
    reader: &mut BitReader,
    width: usize,
    height: usize,
    num_symbols: usize,
) -> Result<IndexMap> {
    if num_symbols == 0 {
        return Err(Error::bitstream("palette", "empty palette without escapes"));
    }
    let bits = index_bits(num_symbols);
    let scan = traverse_scan(width, height);
    let mut indices = vec![0u8; width * height];
    let mut pos = 0;
    let mut prev_ca = false;
    while pos < scan.len() {
        let ca_ok = scan[pos].1 > 0 && !prev_ca;
        let is_ca = ca_ok && reader.read_flag()?;
        let value = if is_ca {
            None
        } else {
            let i = reader.read_bits(bits)? as usize;
            if i >= num_symbols {
                return Err(Error::bitstream(
                    "palette",
                    format!("index {i} out of range {num_symbols}"),
                ));
            }
            Some(i as u8)
        };
        let len = reader.read_ue()? as usize + 1;
        if len > scan.len() - pos {
            return Err(Error::bitstream(
                "palette",
                format!("run of {len} overruns the block at {pos}"),
            ));
        }
        for &(x, y) in &scan[pos..pos + len] {
            indices[y * width + x] = match value {
                Some(v) => v,
                None => indices[(y - 1) * width + x],
            };
        }
        prev_ca = is_ca;
        pos += len;
    }
    Ok(IndexMap {
        width,
        height,
        indices,
    })
}
