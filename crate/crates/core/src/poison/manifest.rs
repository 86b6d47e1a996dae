use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{assign_splits, corrupt_mask, image_rng, PoisonConfig};
use crate::error::{Error, Result};
use crate::mask::{load_mask, save_mask};
use crate::metrics::ssim;
use crate::morphology::MorphOp;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Partition {
    Train,
    Val,
    Test,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Operation {
    Erode,
    Dilate,
    #[default]
    Clean,
}

impl Operation {
    pub fn morph(self) -> Option<MorphOp> {
        match self {
            Operation::Erode => Some(MorphOp::Erode),
            Operation::Dilate => Some(MorphOp::Dilate),
            Operation::Clean => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Operation::Erode => "erode",
            Operation::Dilate => "dilate",
            Operation::Clean => "clean",
        }
    }
}

/// One image of a dataset manifest.
///
/// Only `id`, `partition` and `mask_path` are required on input; the rest is
/// filled in by [`poison_dataset`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImageRecord {
    pub id: String,
    pub partition: Partition,
    #[serde(default)]
    pub operation: Operation,
    pub mask_path: String,
    #[serde(default)]
    pub poisoned_path: Option<String>,
    #[serde(default)]
    pub iterations: u32,
    #[serde(default)]
    pub corrupted_pixels: u64,
    #[serde(default)]
    pub budget: u64,
    #[serde(default)]
    pub ssim: Option<f64>,
    /// Kernel sizes drawn, in order. When it is longer than `iterations`, the
    /// last draw overshot the budget and was discarded.
    #[serde(default)]
    pub kernel_trace: Vec<u8>,
}

impl ImageRecord {
    pub fn new(id: impl Into<String>, partition: Partition, mask_path: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            partition,
            operation: Operation::Clean,
            mask_path: mask_path.into(),
            poisoned_path: None,
            iterations: 0,
            corrupted_pixels: 0,
            budget: 0,
            ssim: None,
            kernel_trace: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub level: f64,
    #[serde(default)]
    pub max_iters: u32,
    pub images: Vec<ImageRecord>,
}

impl DatasetManifest {
    pub fn new(images: Vec<ImageRecord>) -> Self {
        Self {
            seed: 0,
            level: 0.0,
            max_iters: 0,
            images,
        }
    }

    /// Builds a manifest from every `.png`/`.pgm` file in `dir`, ids taken from
    /// file stems, ordered by id.
    pub fn from_mask_dir(dir: impl AsRef<Path>, partition: Partition) -> Result<Self> {
        let dir = dir.as_ref();
        let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
        let mut images = Vec::new();
        for entry in entries {
            let path = entry.map_err(|e| Error::io(dir, e))?.path();
            let is_mask = path
                .extension()
                .and_then(|e| e.to_str())
                .is_some_and(|e| e.eq_ignore_ascii_case("png") || e.eq_ignore_ascii_case("pgm"));
            if !is_mask || !path.is_file() {
                continue;
            }
            let id = path
                .file_stem()
                .and_then(|s| s.to_str())
                .ok_or_else(|| Error::Invalid(format!("{}: non-UTF-8 file name", path.display())))?
                .to_owned();
            images.push(ImageRecord::new(id, partition, path.to_string_lossy().into_owned()));
        }
        if images.is_empty() {
            return Err(Error::Invalid(format!("{}: no .png or .pgm masks found", dir.display())));
        }
        images.sort_by(|a, b| a.id.cmp(&b.id));
        let manifest = Self::new(images);
        manifest.validate()?;
        Ok(manifest)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let manifest: Self = serde_json::from_str(&text)
            .map_err(|e| Error::Schema(format!("{}: {e}", path.display())))?;
        manifest.validate()?;
        Ok(manifest)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Internal(format!("manifest serialization: {e}")))?;
        s.push('\n');
        Ok(s)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn validate(&self) -> Result<()> {
        if self.images.is_empty() {
            return Err(Error::Schema("manifest lists no images".into()));
        }
        let mut seen = HashSet::new();
        for rec in &self.images {
            if rec.id.is_empty() {
                return Err(Error::Schema("image id must be non-empty".into()));
            }
            if !seen.insert(rec.id.as_str()) {
                return Err(Error::Schema(format!("duplicate image id {:?}", rec.id)));
            }
            if rec.kernel_trace.iter().any(|k| !matches!(k, 3 | 5 | 7)) {
                return Err(Error::Schema(format!(
                    "image {:?}: kernel_trace entries must be 3, 5 or 7",
                    rec.id
                )));
            }
        }
        Ok(())
    }
}

/// Poisons the train and validation partitions of `input`, writing one output
/// mask per image into `out_dir`.
///
/// Train and validation ids are dealt into erode/dilate/clean thirds with
/// [`assign_splits`]; test images are always clean. Clean images are copied
/// byte for byte. Every image draws from its own stream keyed by
/// `(cfg.seed, id)`, so the result does not depend on the rayon pool size.
/// Paths are used as given (relative paths resolve against the working
/// directory).
pub fn poison_dataset(
    input: &DatasetManifest,
    cfg: &PoisonConfig,
    out_dir: impl AsRef<Path>,
) -> Result<DatasetManifest> {
    cfg.validate()?;
    input.validate()?;
    let out_dir = out_dir.as_ref();
    if !out_dir.is_dir() {
        return Err(Error::Invalid(format!(
            "{}: output directory does not exist",
            out_dir.display()
        )));
    }

    let poisonable: Vec<&str> = input
        .images
        .iter()
        .filter(|r| r.partition != Partition::Test)
        .map(|r| r.id.as_str())
        .collect();
    let split = if poisonable.is_empty() {
        None
    } else {
        Some(assign_splits(&poisonable, cfg.seed)?)
    };

    let images = input
        .images
        .par_iter()
        .map(|rec| {
            let op = match (&split, rec.partition) {
                (Some(s), Partition::Train | Partition::Val) => {
                    s.operation_of(&rec.id).unwrap_or_default()
                }
                _ => Operation::Clean,
            };
            poison_one(rec, op, cfg, out_dir)
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(DatasetManifest {
        seed: cfg.seed,
        level: cfg.level,
        max_iters: cfg.max_iters,
        images,
    })
}

fn poison_one(
    rec: &ImageRecord,
    op: Operation,
    cfg: &PoisonConfig,
    out_dir: &Path,
) -> Result<ImageRecord> {
    let src = Path::new(&rec.mask_path);
    let original = load_mask(src)?;
    let budget = cfg.budget(original.width(), original.height());

    let mut out = ImageRecord {
        operation: op,
        budget,
        ..ImageRecord::new(rec.id.clone(), rec.partition, rec.mask_path.clone())
    };

    match op.morph() {
        None => {
            let ext = src.extension().and_then(|e| e.to_str()).unwrap_or("png");
            let dst = out_dir.join(format!("{}.{ext}", rec.id));
            fs::copy(src, &dst).map_err(|e| Error::io(&dst, e))?;
            out.poisoned_path = Some(path_string(dst));
            out.ssim = ssim::<f64>(&original, &original).ok();
        }
        Some(morph) => {
            let mut rng = image_rng(cfg.seed, &rec.id);
            let result = corrupt_mask(&original, morph, cfg, &mut rng);
            let dst = out_dir.join(format!("{}.png", rec.id));
            save_mask(&result.mask, &dst)?;
            out.poisoned_path = Some(path_string(dst));
            out.iterations = result.iterations_applied;
            out.corrupted_pixels = result.corrupted_pixels;
            out.ssim = ssim::<f64>(&original, &result.mask).ok();
            out.kernel_trace = result.kernel_trace.iter().map(|k| k.size() as u8).collect();
        }
    }
    Ok(out)
}

fn path_string(p: PathBuf) -> String {
    p.to_string_lossy().into_owned()
}
