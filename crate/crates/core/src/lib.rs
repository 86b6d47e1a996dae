//! Morphological label noise for binary land/water segmentation masks.
//!
//! The crate covers the whole corruption-analysis pipeline:
//!
//! * [`mask`]: mask and band rasters, PNG/PGM I/O, pixel statistics.
//! * [`morphology`]: flat square erosion and dilation.
//! * [`poison`]: stochastic kernel selection, budget-capped iterative
//!   corruption, dataset splits and the JSON dataset manifest.
//! * [`metrics`]: confusion counts, overlap scores and SSIM.
//! * [`ndwi`]: water masks from green/NIR band grids.
//! * [`report`]: box-plot summaries and the CSV report series.
//!
//! Floating-point code is generic over [`Real`] (and the exact-ratio friendly
//! [`Field`] for the confusion-derived scores); the aliases below pin the
//! common instantiations.

pub mod error;
pub mod mask;
pub mod metrics;
pub mod morphology;
pub mod ndwi;
pub mod poison;
pub mod report;
pub mod scalar;

pub use error::{Error, Result};
pub use mask::{BandGrid, BinaryMask};
pub use metrics::{ConfusionCounts, DatasetSummary, ImageEvaluation, MetricsRecord};
pub use morphology::{dilate, erode, MorphOp, StructuringElement};
pub use ndwi::NdwiGrid;
pub use poison::{
    DatasetManifest, ImageRecord, KernelDistribution, KernelPolicy, Operation, Partition,
    PoisonConfig, PoisonResult, SplitAssignment,
};
pub use report::BoxplotSummary;
pub use scalar::{Field, Real};

/// Exact rational scalar used for oracle-grade metric evaluation.
pub type Exact = num_rational::Rational64;

pub type Metrics = MetricsRecord<f64>;
pub type MetricsF32 = MetricsRecord<f32>;
pub type ExactMetrics = MetricsRecord<Exact>;
pub type Summary = DatasetSummary<f64>;
pub type Ndwi = NdwiGrid<f64>;
pub type NdwiF32 = NdwiGrid<f32>;
pub type Boxplot = BoxplotSummary<f64>;
