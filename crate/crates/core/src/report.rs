//! Box-plot summaries and the CSV series behind the corruption and training
//! curves.

use std::cmp::Ordering;
use std::fmt::Write as _;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::poison::{DatasetManifest, Operation};
use crate::scalar::Real;

/// Five-number summary with type-7 (linear interpolation) quartiles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxplotSummary<T> {
    pub min: T,
    pub q1: T,
    pub median: T,
    pub q3: T,
    pub max: T,
    pub n: usize,
}

/// Linearly interpolated quantile of already sorted data.
pub fn quantile_sorted<T: Real>(sorted: &[T], p: T) -> T {
    let h = T::from_count(sorted.len() as u64 - 1) * p;
    let lo = h.floor();
    let i = lo.to_usize().expect("index in range");
    if i + 1 >= sorted.len() {
        return sorted[sorted.len() - 1];
    }
    sorted[i] + (h - lo) * (sorted[i + 1] - sorted[i])
}

pub fn five_number_summary<T: Real>(values: &[T]) -> Result<BoxplotSummary<T>> {
    if values.is_empty() {
        return Err(Error::Empty("five-number summary"));
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::Invalid("five-number summary of NaN".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    Ok(BoxplotSummary {
        min: sorted[0],
        q1: quantile_sorted(&sorted, T::lit(0.25)),
        median: quantile_sorted(&sorted, T::lit(0.5)),
        q3: quantile_sorted(&sorted, T::lit(0.75)),
        max: sorted[sorted.len() - 1],
        n: sorted.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesMetric {
    CorruptedPixels,
    Ssim,
}

impl SeriesMetric {
    pub fn as_str(self) -> &'static str {
        match self {
            SeriesMetric::CorruptedPixels => "corrupted_pixels",
            SeriesMetric::Ssim => "ssim",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesRow {
    pub metric: SeriesMetric,
    pub level: f64,
    pub operation: Operation,
    pub summary: BoxplotSummary<f64>,
}

pub const CORRUPTION_HEADER: &str = "metric,level,operation,min,q1,median,q3,max,n";

/// Per (metric, level, operation) summaries of the poisoned images.
///
/// Manifests sharing a level are pooled. Rows are ordered by metric
/// (corrupted pixels first), ascending level, then erode before dilate; empty
/// groups are omitted.
pub fn corruption_series(manifests: &[DatasetManifest]) -> Result<Vec<SeriesRow>> {
    if manifests.is_empty() {
        return Err(Error::Empty("corruption report"));
    }
    for m in manifests {
        if !(m.level > 0.0 && m.level <= 1.0) {
            return Err(Error::Schema(format!(
                "manifest level {} must be in (0,1]",
                m.level
            )));
        }
        m.validate()?;
    }
    let mut levels: Vec<f64> = manifests.iter().map(|m| m.level).collect();
    levels.sort_by(f64::total_cmp);
    levels.dedup();

    let mut rows = Vec::new();
    for metric in [SeriesMetric::CorruptedPixels, SeriesMetric::Ssim] {
        for &level in &levels {
            for op in [Operation::Erode, Operation::Dilate] {
                let values: Vec<f64> = manifests
                    .iter()
                    .filter(|m| m.level == level)
                    .flat_map(|m| &m.images)
                    .filter(|r| r.operation == op)
                    .filter_map(|r| match metric {
                        SeriesMetric::CorruptedPixels => Some(r.corrupted_pixels as f64),
                        SeriesMetric::Ssim => r.ssim,
                    })
                    .collect();
                if values.is_empty() {
                    continue;
                }
                rows.push(SeriesRow {
                    metric,
                    level,
                    operation: op,
                    summary: five_number_summary(&values)?,
                });
            }
        }
    }
    Ok(rows)
}

pub fn corruption_report(manifests: &[DatasetManifest]) -> Result<String> {
    let mut out = String::from(CORRUPTION_HEADER);
    out.push('\n');
    for row in corruption_series(manifests)? {
        let s = &row.summary;
        let _ = writeln!(
            out,
            "{},{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{}",
            row.metric.as_str(),
            row.level,
            row.operation.as_str(),
            s.min,
            s.q1,
            s.median,
            s.q3,
            s.max,
            s.n
        );
    }
    Ok(out)
}

/// Training log written by the model harness for one corruption level.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct EpochLog {
    pub level: f64,
    pub epochs: Vec<EpochEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
pub struct EpochEntry {
    pub epoch: u32,
    pub train_acc: f64,
    pub val_acc: f64,
}

impl EpochLog {
    /// Parses and validates a log; `source` names it in error messages.
    pub fn parse(text: &str, source: &str) -> Result<Self> {
        let log: Self =
            serde_json::from_str(text).map_err(|e| Error::Schema(format!("{source}: {e}")))?;
        if !(0.0..=1.0).contains(&log.level) {
            return Err(Error::Schema(format!(
                "{source}: level {} outside [0,1]",
                log.level
            )));
        }
        for e in &log.epochs {
            for (name, v) in [("train_acc", e.train_acc), ("val_acc", e.val_acc)] {
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::Schema(format!(
                        "{source}: epoch {} {name} {v} outside [0,1]",
                        e.epoch
                    )));
                }
            }
        }
        Ok(log)
    }
}

pub const EPOCH_HEADER: &str = "level,epoch,split,accuracy";

/// Long-format accuracy table, sorted by (level, epoch, split).
pub fn epoch_report(logs: &[EpochLog]) -> Result<String> {
    if logs.is_empty() {
        return Err(Error::Empty("epoch report"));
    }
    let mut rows: Vec<(f64, u32, &'static str, f64)> = logs
        .iter()
        .flat_map(|log| {
            log.epochs.iter().flat_map(move |e| {
                [
                    (log.level, e.epoch, "train", e.train_acc),
                    (log.level, e.epoch, "val", e.val_acc),
                ]
            })
        })
        .collect();
    rows.sort_by(|a, b| {
        a.0.total_cmp(&b.0)
            .then(a.1.cmp(&b.1))
            .then(a.2.cmp(b.2))
    });

    let mut out = String::from(EPOCH_HEADER);
    out.push('\n');
    for (level, epoch, split, acc) in rows {
        let _ = writeln!(out, "{level},{epoch},{split},{acc:.6}");
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poison::{ImageRecord, Partition};
    use proptest::prelude::*;

    #[test]
    fn singleton_summary() {
        let s = five_number_summary(&[5.0]).unwrap();
        assert_eq!((s.min, s.q1, s.median, s.q3, s.max, s.n), (5.0, 5.0, 5.0, 5.0, 5.0, 1));
    }

    #[test]
    fn type7_quartiles() {
        let s = five_number_summary(&[4.0, 2.0, 1.0, 3.0]).unwrap();
        assert_eq!((s.min, s.q1, s.median, s.q3, s.max), (1.0, 1.75, 2.5, 3.25, 4.0));
        let f = five_number_summary(&[1.0f32, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(f.q1, 1.75);
    }

    #[test]
    fn summary_errors() {
        assert!(matches!(five_number_summary::<f64>(&[]), Err(Error::Empty(_))));
        assert!(five_number_summary(&[1.0, f64::NAN]).is_err());
    }

    fn record(id: &str, op: Operation, pixels: u64, ssim: f64) -> ImageRecord {
        ImageRecord {
            operation: op,
            corrupted_pixels: pixels,
            ssim: Some(ssim),
            ..ImageRecord::new(id, Partition::Train, format!("{id}.png"))
        }
    }

    fn manifest(level: f64, images: Vec<ImageRecord>) -> DatasetManifest {
        DatasetManifest {
            level,
            ..DatasetManifest::new(images)
        }
    }

    #[test]
    fn single_image_report() {
        let m = manifest(0.2, vec![record("a", Operation::Erode, 120, 0.75)]);
        let csv = corruption_report(&[m]).unwrap();
        assert_eq!(
            csv,
            "metric,level,operation,min,q1,median,q3,max,n\n\
             corrupted_pixels,0.2,erode,120.000000,120.000000,120.000000,120.000000,120.000000,1\n\
             ssim,0.2,erode,0.750000,0.750000,0.750000,0.750000,0.750000,1\n"
        );
    }

    #[test]
    fn report_ordering_and_pooling() {
        let a = manifest(
            0.3,
            vec![
                record("a", Operation::Dilate, 10, 0.5),
                record("b", Operation::Clean, 0, 1.0),
            ],
        );
        let b = manifest(0.02, vec![record("c", Operation::Erode, 1, 0.9)]);
        let c = manifest(0.3, vec![record("d", Operation::Dilate, 30, 0.7)]);
        let rows = corruption_series(&[a, b, c]).unwrap();
        let keys: Vec<_> = rows
            .iter()
            .map(|r| (r.metric.as_str(), r.level, r.operation.as_str(), r.summary.n))
            .collect();
        assert_eq!(
            keys,
            vec![
                ("corrupted_pixels", 0.02, "erode", 1),
                ("corrupted_pixels", 0.3, "dilate", 2),
                ("ssim", 0.02, "erode", 1),
                ("ssim", 0.3, "dilate", 2),
            ]
        );
        assert_eq!(rows[1].summary.median, 20.0);
    }

    #[test]
    fn report_rejects_bad_manifests() {
        assert!(corruption_report(&[]).is_err());
        let m = manifest(0.0, vec![record("a", Operation::Erode, 1, 1.0)]);
        assert!(matches!(corruption_report(&[m]), Err(Error::Schema(_))));
    }

    fn log(level: f64, n: u32) -> EpochLog {
        EpochLog {
            level,
            epochs: (1..=n)
                .map(|epoch| EpochEntry {
                    epoch,
                    train_acc: 0.5 + epoch as f64 / 100.0,
                    val_acc: 0.4 + epoch as f64 / 100.0,
                })
                .collect(),
        }
    }

    #[test]
    fn twenty_epochs_forty_rows() {
        let csv = epoch_report(&[log(0.0, 20)]).unwrap();
        assert_eq!(csv.lines().count(), 41);
        assert_eq!(csv.lines().nth(1).unwrap(), "0,1,train,0.510000");
        assert_eq!(csv.lines().nth(2).unwrap(), "0,1,val,0.410000");
    }

    #[test]
    fn merged_levels_sorted() {
        let csv = epoch_report(&[log(0.3, 2), log(0.02, 1)]).unwrap();
        let keys: Vec<_> = csv
            .lines()
            .skip(1)
            .map(|l| l.split(',').take(3).collect::<Vec<_>>().join(","))
            .collect();
        assert_eq!(
            keys,
            ["0.02,1,train", "0.02,1,val", "0.3,1,train", "0.3,1,val", "0.3,2,train", "0.3,2,val"]
        );
    }

    #[test]
    fn missing_field_is_named() {
        let text = r#"{"level":0.2,"epochs":[{"epoch":1,"train_acc":0.9}]}"#;
        let err = EpochLog::parse(text, "log.json").unwrap_err();
        assert!(matches!(err, Error::Schema(_)));
        assert!(err.to_string().contains("val_acc"), "{err}");
        let bad = r#"{"level":0.2,"epochs":[{"epoch":1,"train_acc":1.5,"val_acc":0.1}]}"#;
        assert!(EpochLog::parse(bad, "x").is_err());
    }

    proptest! {
        #[test]
        fn summary_ordered_and_permutation_invariant(
            mut v in proptest::collection::vec(-1e6f64..1e6, 1..50),
            seed in any::<u64>(),
        ) {
            let s = five_number_summary(&v).unwrap();
            prop_assert!(s.min <= s.q1 && s.q1 <= s.median && s.median <= s.q3 && s.q3 <= s.max);
            use rand::{seq::SliceRandom, SeedableRng};
            v.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            prop_assert_eq!(five_number_summary(&v).unwrap(), s);
        }
    }
}
