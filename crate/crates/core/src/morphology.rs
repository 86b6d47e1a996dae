//! Flat binary erosion and dilation with square structuring elements.
//!
//! Border rule: erosion treats out-of-bounds cells as water, dilation treats
//! them as land. Both therefore reduce to the in-bounds (clipped) window,
//! which keeps the pair dual under complementation.

use std::fmt;

use crate::error::{Error, Result};
use crate::mask::BinaryMask;

/// Flat all-ones square window with its origin at the center.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StructuringElement(u8);

impl StructuringElement {
    pub const SQUARE_3: Self = Self(3);
    pub const SQUARE_5: Self = Self(5);
    pub const SQUARE_7: Self = Self(7);
    pub const ALL: [Self; 3] = [Self::SQUARE_3, Self::SQUARE_5, Self::SQUARE_7];

    pub fn new(size: usize) -> Result<Self> {
        match size {
            3 | 5 | 7 => Ok(Self(size as u8)),
            _ => Err(Error::Invalid(format!(
                "structuring element size must be 3, 5 or 7, got {size}"
            ))),
        }
    }

    pub fn size(self) -> usize {
        self.0 as usize
    }

    pub fn radius(self) -> usize {
        (self.size() - 1) / 2
    }
}

impl fmt::Display for StructuringElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{0}x{0}", self.0)
    }
}

/// One of the two corruption primitives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MorphOp {
    Erode,
    Dilate,
}

impl MorphOp {
    pub fn apply(self, mask: &BinaryMask, se: StructuringElement) -> BinaryMask {
        match self {
            MorphOp::Erode => erode(mask, se),
            MorphOp::Dilate => dilate(mask, se),
        }
    }
}

/// Erosion: a cell stays water iff its whole clipped window is water.
pub fn erode(mask: &BinaryMask, se: StructuringElement) -> BinaryMask {
    if mask.uniform_value().is_some() {
        return mask.clone();
    }
    let hit = window_contains(mask, se.radius(), false);
    BinaryMask::new(mask.width(), mask.height(), hit.into_iter().map(|h| !h).collect())
        .expect("shape preserved")
}

/// Dilation: a cell becomes water iff any cell of its clipped window is water.
pub fn dilate(mask: &BinaryMask, se: StructuringElement) -> BinaryMask {
    if mask.uniform_value().is_some() {
        return mask.clone();
    }
    let hit = window_contains(mask, se.radius(), true);
    BinaryMask::new(mask.width(), mask.height(), hit).expect("shape preserved")
}

/// For every cell, whether the clipped (2r+1)² window around it holds a cell
/// equal to `target`. The square window is separable into a row pass and a
/// column pass, each a sliding count.
fn window_contains(mask: &BinaryMask, r: usize, target: bool) -> Vec<bool> {
    let (w, h) = (mask.width(), mask.height());
    let src = mask.cells();

    let mut rows = vec![false; w * h];
    for y in 0..h {
        let line = &src[y * w..(y + 1) * w];
        let out = &mut rows[y * w..(y + 1) * w];
        sliding_any(w, r, |i| line[i] == target, |i, v| out[i] = v);
    }

    let mut cols = vec![false; w * h];
    for x in 0..w {
        sliding_any(h, r, |i| rows[i * w + x], |i, v| cols[i * w + x] = v);
    }
    cols
}

fn sliding_any(
    n: usize,
    r: usize,
    hit: impl Fn(usize) -> bool,
    mut emit: impl FnMut(usize, bool),
) {
    // count of hits in [i - r, i + r] ∩ [0, n)
    let mut count = 0usize;
    for j in 0..r.min(n) {
        count += hit(j) as usize;
    }
    for i in 0..n {
        if i + r < n {
            count += hit(i + r) as usize;
        }
        if i > r {
            count -= hit(i - r - 1) as usize;
        }
        emit(i, count > 0);
    }
}
