//! Scalar abstractions.
//!
//! Confusion-derived scores only need field arithmetic, so they run on
//! anything implementing [`Field`]: `f32`, `f64` or an exact rational.
//! Windowed statistics (SSIM, NDWI, quantiles) need [`Real`].

use std::fmt::Debug;

use num_traits::{Float, FromPrimitive, Num};

pub trait Field: Num + Copy + PartialOrd + FromPrimitive + Debug + Send + Sync {
    fn from_count(n: u64) -> Self {
        Self::from_u64(n).expect("count representable in scalar type")
    }
}

impl<T> Field for T where T: Num + Copy + PartialOrd + FromPrimitive + Debug + Send + Sync {}

pub trait Real: Field + Float {
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal representable in scalar type")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl<T> Real for T where T: Field + Float {}
