//! Water masks from green and near-infrared reflectance by thresholding the
//! normalized difference water index `(G - NIR) / (G + NIR)`.

use crate::error::{Error, Result};
use crate::mask::{BandGrid, BinaryMask};
use crate::scalar::Real;

pub const DEFAULT_THRESHOLD: f64 = 0.0;

#[derive(Debug, Clone, PartialEq)]
pub struct NdwiGrid<T> {
    width: usize,
    height: usize,
    cells: Vec<T>,
}

impl<T: Real> NdwiGrid<T> {
    pub fn new(width: usize, height: usize, cells: Vec<T>) -> Result<Self> {
        if width == 0 || height == 0 || cells.len() != width * height {
            return Err(Error::Dimensions { width, height });
        }
        if let Some(v) = cells.iter().find(|v| !(**v >= -T::one() && **v <= T::one())) {
            return Err(Error::Invalid(format!("NDWI value {v:?} outside [-1,1]")));
        }
        Ok(Self {
            width,
            height,
            cells,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn cells(&self) -> &[T] {
        &self.cells
    }
}

/// Per-cell NDWI. A zero denominator yields 0.
///
/// Numerator and denominator are formed exactly in integers, so swapping the
/// bands negates every cell exactly.
pub fn compute_ndwi<T: Real>(green: &BandGrid, nir: &BandGrid) -> Result<NdwiGrid<T>> {
    if green.width() != nir.width() || green.height() != nir.height() {
        return Err(Error::ShapeMismatch {
            left_w: green.width(),
            left_h: green.height(),
            right_w: nir.width(),
            right_h: nir.height(),
        });
    }
    let cells = green
        .cells()
        .iter()
        .zip(nir.cells())
        .map(|(&g, &n)| {
            let den = g as u32 + n as u32;
            if den == 0 {
                T::zero()
            } else {
                let num = g as i64 - n as i64;
                T::from_i64(num).expect("band difference fits scalar")
                    / T::from_count(den as u64)
            }
        })
        .collect();
    Ok(NdwiGrid {
        width: green.width(),
        height: green.height(),
        cells,
    })
}

/// Water where NDWI is strictly above `threshold`.
pub fn threshold_mask<T: Real>(grid: &NdwiGrid<T>, threshold: T) -> BinaryMask {
    BinaryMask::new(
        grid.width,
        grid.height,
        grid.cells.iter().map(|&v| v > threshold).collect(),
    )
    .expect("grid shape is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn band(vals: &[u16]) -> BandGrid {
        BandGrid::new(vals.len(), 1, vals.to_vec()).unwrap()
    }

    #[test]
    fn formula_examples() {
        let g: NdwiGrid<f64> =
            compute_ndwi(&band(&[1000, 2000, 0, 0, 5]), &band(&[1000, 1000, 0, 7, 0])).unwrap();
        assert_eq!(g.cells()[0], 0.0);
        assert!((g.cells()[1] - 0.333333).abs() < 1e-6);
        assert_eq!(g.cells()[2], 0.0);
        assert_eq!(g.cells()[3], -1.0);
        assert_eq!(g.cells()[4], 1.0);
    }

    #[test]
    fn shape_mismatch() {
        assert!(compute_ndwi::<f64>(&band(&[1, 2]), &band(&[1])).is_err());
    }

    #[test]
    fn thresholding_is_strict() {
        let grid = NdwiGrid::new(3, 1, vec![-0.2, 0.0, 0.3]).unwrap();
        assert_eq!(
            threshold_mask(&grid, 0.0),
            BinaryMask::from_bits(3, 1, &[0, 0, 1]).unwrap()
        );
        let pos = NdwiGrid::new(2, 2, vec![0.5f32; 4]).unwrap();
        assert_eq!(threshold_mask(&pos, 0.0).white_count(), 4);
        let neg = NdwiGrid::new(2, 2, vec![-0.5f32; 4]).unwrap();
        assert_eq!(threshold_mask(&neg, 0.0).white_count(), 0);
    }

    #[test]
    fn grid_validation() {
        assert!(NdwiGrid::new(1, 1, vec![1.5f64]).is_err());
        assert!(NdwiGrid::new(1, 1, vec![f64::NAN]).is_err());
        assert!(NdwiGrid::new(2, 1, vec![0.0f64]).is_err());
    }

    fn arb_bands() -> impl Strategy<Value = (BandGrid, BandGrid)> {
        (1usize..12, 1usize..12).prop_flat_map(|(w, h)| {
            let b = move || {
                proptest::collection::vec(any::<u16>(), w * h)
                    .prop_map(move |c| BandGrid::new(w, h, c).unwrap())
            };
            (b(), b())
        })
    }

    proptest! {
        #[test]
        fn bounded_and_antisymmetric((g, n) in arb_bands()) {
            let a: NdwiGrid<f64> = compute_ndwi(&g, &n).unwrap();
            let b: NdwiGrid<f64> = compute_ndwi(&n, &g).unwrap();
            for (x, y) in a.cells().iter().zip(b.cells()) {
                prop_assert!((-1.0..=1.0).contains(x));
                prop_assert_eq!(*x, -*y);
            }
            let f: NdwiGrid<f32> = compute_ndwi(&g, &n).unwrap();
            prop_assert!(f.cells().iter().all(|v| (-1.0..=1.0).contains(v)));
        }

        #[test]
        fn threshold_monotone((g, n) in arb_bands(), t1 in -1.0f64..1.0, t2 in -1.0f64..1.0) {
            let grid: NdwiGrid<f64> = compute_ndwi(&g, &n).unwrap();
            let (lo, hi) = if t1 < t2 { (t1, t2) } else { (t2, t1) };
            prop_assert!(threshold_mask(&grid, hi).is_subset_of(&threshold_mask(&grid, lo)));
        }
    }
}
