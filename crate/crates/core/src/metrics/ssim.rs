//! Mean SSIM over a uniform 7×7 sliding window.
//!
//! Window moments are accumulated as exact integers from summed-area tables,
//! so the result depends only on the final conversion into `T`. Identical
//! inputs give exactly 1.

use crate::error::{Error, Result};
use crate::mask::BinaryMask;
use crate::scalar::Real;

pub const WINDOW: usize = 7;
const DYNAMIC_RANGE: f64 = 255.0;
const K1: f64 = 0.01;
const K2: f64 = 0.03;

/// `(K1·L)²`
pub fn c1() -> f64 {
    (K1 * DYNAMIC_RANGE).powi(2)
}

/// `(K2·L)²`
pub fn c2() -> f64 {
    (K2 * DYNAMIC_RANGE).powi(2)
}

/// SSIM between the 0/255 renderings of two masks.
pub fn ssim<T: Real>(a: &BinaryMask, b: &BinaryMask) -> Result<T> {
    a.ensure_same_shape(b)?;
    ssim_gray(a.width(), a.height(), &a.to_gray(), &b.to_gray())
}

/// SSIM between two 8-bit grayscale images of the given shape.
pub fn ssim_gray<T: Real>(width: usize, height: usize, a: &[u8], b: &[u8]) -> Result<T> {
    if a.len() != width * height || b.len() != width * height {
        return Err(Error::Dimensions { width, height });
    }
    if width < WINDOW || height < WINDOW {
        return Err(Error::TooSmall {
            width,
            height,
            window: WINDOW,
        });
    }

    let tables = Moments::new(width, height, a, b);
    let n = (WINDOW * WINDOW) as i64;
    let n2 = T::from_count((n * n) as u64);
    let c1n2 = T::lit(c1()) * n2;
    let c2n2 = T::lit(c2()) * n2;
    let int = |v: i64| T::from_i64(v).expect("window moment fits scalar");

    let mut total = T::zero();
    for y in 0..=height - WINDOW {
        for x in 0..=width - WINDOW {
            let [sa, sb, saa, sbb, sab] = tables.window(x, y);
            // Every moment scaled by N²; the scale cancels in the ratio.
            let lum_num = int(2 * sa * sb) + c1n2;
            let lum_den = int(sa * sa + sb * sb) + c1n2;
            let cs_num = int(2 * (n * sab - sa * sb)) + c2n2;
            let cs_den = int(n * saa - sa * sa + n * sbb - sb * sb) + c2n2;
            total = total + (lum_num * cs_num) / (lum_den * cs_den);
        }
    }
    let positions = ((width - WINDOW + 1) * (height - WINDOW + 1)) as u64;
    Ok(total / T::from_count(positions))
}

/// Summed-area tables of a, b, a², b² and ab.
struct Moments {
    stride: usize,
    tables: [Vec<i64>; 5],
}

impl Moments {
    fn new(width: usize, height: usize, a: &[u8], b: &[u8]) -> Self {
        let stride = width + 1;
        let mut tables: [Vec<i64>; 5] = std::array::from_fn(|_| vec![0; stride * (height + 1)]);
        for y in 0..height {
            let mut row = [0i64; 5];
            for x in 0..width {
                let (p, q) = (a[y * width + x] as i64, b[y * width + x] as i64);
                let vals = [p, q, p * p, q * q, p * q];
                for (k, t) in tables.iter_mut().enumerate() {
                    row[k] += vals[k];
                    t[(y + 1) * stride + x + 1] = t[y * stride + x + 1] + row[k];
                }
            }
        }
        Self { stride, tables }
    }

    fn window(&self, x: usize, y: usize) -> [i64; 5] {
        let s = self.stride;
        let (x1, y1) = (x + WINDOW, y + WINDOW);
        std::array::from_fn(|k| {
            let t = &self.tables[k];
            t[y1 * s + x1] - t[y * s + x1] - t[y1 * s + x] + t[y * s + x]
        })
    }
}
