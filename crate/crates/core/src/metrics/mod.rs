//! Segmentation scores for binary masks (water is the positive class).
//!
//! Ratios whose numerator and denominator are both zero evaluate to 1: two
//! masks that agree on an absent class are in perfect agreement.

mod ssim;

pub use ssim::{c1, c2, ssim, ssim_gray, WINDOW as SSIM_WINDOW};

use std::fmt::Write as _;

use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::mask::BinaryMask;
use crate::scalar::{Field, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    pub fn merge(self, other: Self) -> Self {
        Self {
            tp: self.tp + other.tp,
            fp: self.fp + other.fp,
            fn_: self.fn_ + other.fn_,
            tn: self.tn + other.tn,
        }
    }
}

/// Pixel confusion counts of `pred` against `gt`.
pub fn confusion(pred: &BinaryMask, gt: &BinaryMask) -> Result<ConfusionCounts> {
    pred.ensure_same_shape(gt)?;
    let mut c = ConfusionCounts::default();
    for (&p, &g) in pred.cells().iter().zip(gt.cells()) {
        match (p, g) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, true) => c.fn_ += 1,
            (false, false) => c.tn += 1,
        }
    }
    Ok(c)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsRecord<T> {
    pub dice: T,
    pub iou: T,
    pub precision: T,
    pub recall: T,
    pub f1: T,
    pub specificity: T,
    pub accuracy: T,
    pub ssim: Option<T>,
}

fn ratio<T: Field>(num: u64, den: u64) -> T {
    if den == 0 {
        T::one()
    } else {
        T::from_count(num) / T::from_count(den)
    }
}

/// Derives every overlap score from confusion counts. `ssim` is left unset.
///
/// F1 is the harmonic mean of precision and recall, and 0 when both are 0.
pub fn compute_metrics<T: Field>(c: &ConfusionCounts) -> MetricsRecord<T> {
    let precision: T = ratio(c.tp, c.tp + c.fp);
    let recall: T = ratio(c.tp, c.tp + c.fn_);
    let two = T::one() + T::one();
    let f1 = if precision + recall == T::zero() {
        T::zero()
    } else {
        two * precision * recall / (precision + recall)
    };
    MetricsRecord {
        dice: ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn_),
        iou: ratio(c.tp, c.tp + c.fp + c.fn_),
        precision,
        recall,
        f1,
        specificity: ratio(c.tn, c.tn + c.fp),
        accuracy: ratio(c.tp + c.tn, c.total()),
        ssim: None,
    }
}

/// Scores of one predicted mask.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageEvaluation<T> {
    pub id: String,
    pub counts: ConfusionCounts,
    pub metrics: MetricsRecord<T>,
}

/// Confusion-derived scores plus SSIM for one image pair.
pub fn evaluate<T: Real>(
    id: impl Into<String>,
    pred: &BinaryMask,
    gt: &BinaryMask,
) -> Result<ImageEvaluation<T>> {
    let counts = confusion(pred, gt)?;
    let mut metrics = compute_metrics::<T>(&counts);
    metrics.ssim = Some(ssim(pred, gt)?);
    Ok(ImageEvaluation {
        id: id.into(),
        counts,
        metrics,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSummary<T> {
    pub n: usize,
    pub pooled: ConfusionCounts,
    pub metrics: MetricsRecord<T>,
}

/// Dataset-level scores: unweighted per-image means for every column except
/// F1, which comes from the pooled confusion counts. Means are summed in the
/// order given.
pub fn aggregate<T: Field>(evals: &[ImageEvaluation<T>]) -> Result<DatasetSummary<T>> {
    if evals.is_empty() {
        return Err(Error::Empty("metrics aggregation"));
    }
    let n = T::from_count(evals.len() as u64);
    let mean = |f: fn(&MetricsRecord<T>) -> T| {
        evals.iter().fold(T::zero(), |acc, e| acc + f(&e.metrics)) / n
    };
    let pooled = evals
        .iter()
        .fold(ConfusionCounts::default(), |acc, e| acc.merge(e.counts));

    let ssims: Vec<T> = evals.iter().filter_map(|e| e.metrics.ssim).collect();
    let ssim = (!ssims.is_empty()).then(|| {
        ssims.iter().fold(T::zero(), |acc, &s| acc + s) / T::from_count(ssims.len() as u64)
    });

    Ok(DatasetSummary {
        n: evals.len(),
        pooled,
        metrics: MetricsRecord {
            dice: mean(|m| m.dice),
            iou: mean(|m| m.iou),
            precision: mean(|m| m.precision),
            recall: mean(|m| m.recall),
            f1: compute_metrics::<T>(&pooled).f1,
            specificity: mean(|m| m.specificity),
            accuracy: mean(|m| m.accuracy),
            ssim,
        },
    })
}

pub const CSV_HEADER: &str = "id,dice,iou,precision,recall,f1,specificity,accuracy,ssim";
pub const DATASET_ROW_ID: &str = "__dataset__";

fn csv_row<T: ToPrimitive + Copy>(out: &mut String, id: &str, m: &MetricsRecord<T>) {
    let fmt = |v: T| format!("{:.6}", v.to_f64().unwrap_or(f64::NAN));
    let _ = writeln!(
        out,
        "{id},{},{},{},{},{},{},{},{}",
        fmt(m.dice),
        fmt(m.iou),
        fmt(m.precision),
        fmt(m.recall),
        fmt(m.f1),
        fmt(m.specificity),
        fmt(m.accuracy),
        m.ssim.map(fmt).unwrap_or_default(),
    );
}

/// Per-image rows followed by the `__dataset__` summary row.
pub fn metrics_csv<T: Field + ToPrimitive>(
    evals: &[ImageEvaluation<T>],
    summary: &DatasetSummary<T>,
) -> String {
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    for e in evals {
        csv_row(&mut out, &e.id, &e.metrics);
    }
    csv_row(&mut out, DATASET_ROW_ID, &summary.metrics);
    out
}
