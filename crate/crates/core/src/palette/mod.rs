//! Palette mode.
//!
//! A palette CU is described by a small colour table plus an index map.
//! The table is assembled from entries re-used from a rolling predictor and
//! entries sent explicitly; samples that are not in the table are escapes
//! and carry their (quantized) value at the end of the CU.

mod index_map;
mod syntax;

pub use index_map::{
    index_map_decode, index_map_encode, traverse_scan, IndexMap, IndexRun, RunKind,
};
pub use syntax::{PaletteSyntax, PaletteSyntaxParams};

use std::collections::HashMap;

pub const MAX_PALETTE_SIZE: usize = 31;
pub const MAX_PREDICTOR_SIZE: usize = 63;

/// One palette entry; unused components are zero.
pub type PaletteColor = [u16; 3];

/// Palette of the current CU and the predictor it was built from.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PaletteState {
    pub current: Vec<PaletteColor>,
    pub predictor: Vec<PaletteColor>,
    pub reuse_flags: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PaletteDerivation {
    /// Re-used predictor entries (predictor order) followed by new entries.
    pub palette: Vec<PaletteColor>,
    pub reuse_flags: Vec<bool>,
    pub new_entries: Vec<PaletteColor>,
    /// Index per input pixel; `palette.len()` marks an escape.
    pub indices: Vec<u8>,
}

impl PaletteDerivation {
    pub fn escape_count(&self) -> usize {
        let esc = self.palette.len() as u8;
        self.indices.iter().filter(|&&i| i == esc).count()
    }
}

/// Exact-colour palette derivation: the most frequent colours (ties broken
/// by colour value) up to [`MAX_PALETTE_SIZE`]; a colour equal to a
/// predictor entry re-uses it. Remaining pixels become escapes.
pub fn derive_palette(pixels: &[PaletteColor], predictor: &[PaletteColor]) -> PaletteDerivation {
    let mut hist: HashMap<PaletteColor, usize> = HashMap::new();
    for &p in pixels {
        *hist.entry(p).or_default() += 1;
    }
    let mut colors: Vec<(PaletteColor, usize)> = hist.into_iter().collect();
    colors.sort_unstable_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    colors.truncate(MAX_PALETTE_SIZE);

    let mut reuse_flags = vec![false; predictor.len()];
    let mut new_entries = Vec::new();
    for &(c, _) in &colors {
        match predictor.iter().position(|&p| p == c) {
            Some(i) => reuse_flags[i] = true,
            None => new_entries.push(c),
        }
    }
    let palette: Vec<PaletteColor> = predictor
        .iter()
        .zip(&reuse_flags)
        .filter(|(_, &r)| r)
        .map(|(&c, _)| c)
        .chain(new_entries.iter().copied())
        .collect();
    let lookup: HashMap<PaletteColor, u8> = palette
        .iter()
        .enumerate()
        .map(|(i, &c)| (c, i as u8))
        .collect();
    let escape = palette.len() as u8;
    let indices = pixels
        .iter()
        .map(|p| lookup.get(p).copied().unwrap_or(escape))
        .collect();
    PaletteDerivation {
        palette,
        reuse_flags,
        new_entries,
        indices,
    }
}

/// Rebuilds the CU palette from the predictor, reuse flags and new entries.
pub fn assemble_palette(
    predictor: &[PaletteColor],
    reuse_flags: &[bool],
    new_entries: &[PaletteColor],
) -> Vec<PaletteColor> {
    predictor
        .iter()
        .zip(reuse_flags)
        .filter(|(_, &r)| r)
        .map(|(&c, _)| c)
        .chain(new_entries.iter().copied())
        .collect()
}

/// Current palette first, then predictor entries that were not re-used in
/// their original order; duplicates dropped, capped at
/// [`MAX_PREDICTOR_SIZE`].
pub fn predictor_update(
    current: &[PaletteColor],
    old: &[PaletteColor],
    reuse_flags: &[bool],
) -> Vec<PaletteColor> {
    let mut out: Vec<PaletteColor> = Vec::with_capacity(MAX_PREDICTOR_SIZE);
    let unused = old
        .iter()
        .enumerate()
        .filter(|(i, _)| !reuse_flags.get(*i).copied().unwrap_or(false))
        .map(|(_, c)| c);
    for &c in current.iter().chain(unused) {
        if out.len() == MAX_PREDICTOR_SIZE {
            break;
        }
        if !out.contains(&c) {
            out.push(c);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(v: u16) -> PaletteColor {
        [v, 0, 0]
    }

    #[test]
    fn two_colours_empty_predictor() {
        let px: Vec<_> = (0..16)
            .map(|i| c(if i % 3 == 0 { 10 } else { 200 }))
            .collect();
        let d = derive_palette(&px, &[]);
        assert_eq!(d.palette, vec![c(200), c(10)]);
        assert_eq!(d.new_entries.len(), 2);
        assert!(d.reuse_flags.is_empty());
        assert_eq!(d.escape_count(), 0);
    }

    #[test]
    fn block_from_one_predictor_entry() {
        let pred = vec![c(1), c(2), c(3), c(4)];
        let d = derive_palette(&[c(4); 64], &pred);
        assert_eq!(d.reuse_flags, vec![false, false, false, true]);
        assert!(d.new_entries.is_empty());
        assert_eq!(d.palette, vec![c(4)]);
    }

    #[test]
    fn forty_colours_overflow_into_escapes() {
        // colour k appears 100 - k times so the ranking is unambiguous
        let mut px = Vec::new();
        for k in 0..40u16 {
            px.extend(std::iter::repeat_n(c(k), 100 - k as usize));
        }
        let d = derive_palette(&px, &[]);
        assert_eq!(d.palette.len(), 31);
        assert_eq!(d.palette, (0..31).map(c).collect::<Vec<_>>());
        let expected_esc: usize = (31..40).map(|k| 100 - k).sum();
        assert_eq!(d.escape_count(), expected_esc);
    }

    #[test]
    fn predictor_update_example() {
        let (a, b, cc, d) = (c(1), c(2), c(3), c(4));
        let new = predictor_update(&[a, b], &[a, cc, d], &[true, false, false]);
        assert_eq!(new, vec![a, b, cc, d]);
    }

    #[test]
    fn empty_current_keeps_predictor() {
        let old: Vec<_> = (0..10).map(c).collect();
        assert_eq!(predictor_update(&[], &old, &[false; 10]), old);
    }

    #[test]
    fn predictor_update_truncates_at_63() {
        let cur: Vec<_> = (0..31).map(c).collect();
        let old: Vec<_> = (100..163).map(c).collect();
        let new = predictor_update(&cur, &old, &[false; 63]);
        assert_eq!(new.len(), 63);
        assert_eq!(&new[..31], &cur[..]);
        assert_eq!(&new[31..], &old[..32]);
    }

    /// Direct simulation of the two-step rule, written independently.
    fn simulate(
        current: &[PaletteColor],
        old: &[PaletteColor],
        reuse: &[bool],
    ) -> Vec<PaletteColor> {
        let mut list = current.to_vec();
        for (i, e) in old.iter().enumerate() {
            if list.len() >= MAX_PREDICTOR_SIZE {
                break;
            }
            if !reuse[i] && !list.contains(e) {
                list.push(*e);
            }
        }
        let mut dedup = Vec::new();
        for e in list {
            if !dedup.contains(&e) {
                dedup.push(e);
            }
        }
        dedup.truncate(MAX_PREDICTOR_SIZE);
        dedup
    }

    #[test]
    fn predictor_update_matches_simulation_on_random_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let mut old: Vec<PaletteColor> = Vec::new();
            for _ in 0..rng.gen_range(0..=63) {
                let col = [rng.gen_range(0..40), rng.gen_range(0..2), 0];
                if !old.contains(&col) {
                    old.push(col);
                }
            }
            let reuse: Vec<bool> = old.iter().map(|_| rng.gen_bool(0.3)).collect();
            let reused = old.iter().zip(&reuse).filter(|(_, &r)| r).map(|(&x, _)| x);
            let mut current: Vec<PaletteColor> = reused.take(MAX_PALETTE_SIZE).collect();
            while current.len() < MAX_PALETTE_SIZE && rng.gen_bool(0.7) {
                let col = [rng.gen_range(0..60), rng.gen_range(0..2), 1];
                if !current.contains(&col) {
                    current.push(col);
                }
            }
            let got = predictor_update(&current, &old, &reuse);
            assert_eq!(got, simulate(&current, &old, &reuse));
            let mut uniq = got.clone();
            uniq.sort_unstable();
            uniq.dedup();
            assert_eq!(uniq.len(), got.len());
        }
    }
}
