//! Transform-skip signalled through coefficient parity instead of a flag.
//!
//! Convention: the block is transform-skip iff the number of significant
//! levels with an even magnitude is odd.

use super::tsr::scan_order;
use crate::{Error, Result};

fn even_count(levels: &[i32]) -> usize {
    levels.iter().filter(|&&l| l != 0 && l % 2 == 0).count()
}

/// Infers transform skip from the levels of a block with at least one
/// significant level.
pub fn avs3_tsm_infer(levels: &[i32]) -> bool {
    even_count(levels) % 2 == 1
}

/// Row-major index of the last significant level in coding order.
pub fn last_significant(levels: &[i32], width: usize, height: usize) -> Option<usize> {
    scan_order(width, height)
        .into_iter()
        .rev()
        .find(|&i| levels[i] != 0)
}

/// Forces [`avs3_tsm_infer`] to `want_tsm` by changing at most one level by
/// one: the last significant level (coding order) moves toward zero, or away
/// from zero when it is +-1. Returns whether a level was changed.
pub fn avs3_parity_adjust(
    levels: &mut [i32],
    width: usize,
    height: usize,
    want_tsm: bool,
) -> Result<bool> {
    let last = last_significant(levels, width, height)
        .ok_or_else(|| Error::NotApplicable("parity adjust on an all-zero block".into()))?;
    if avs3_tsm_infer(levels) == want_tsm {
        return Ok(false);
    }
    let v = levels[last];
    levels[last] = if v.abs() == 1 { 2 * v } else { v - v.signum() };
    Ok(true)
}
