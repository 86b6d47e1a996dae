//! Controlled morphological label noise.
//!
//! A mask is corrupted by repeatedly eroding (or dilating) it with a randomly
//! drawn square kernel. The kernel distribution depends on the current share
//! of water pixels: sparse masks under erosion favour the 7×7 kernel, dense
//! masks under dilation favour 3×3, and everything else draws uniformly.
//! Iteration stops after `max_iters` steps or as soon as a step would push the
//! number of changed pixels past the budget, in which case that step is
//! discarded.

mod manifest;
mod split;

pub use manifest::{poison_dataset, DatasetManifest, ImageRecord, Operation, Partition};
pub use split::{assign_splits, SplitAssignment};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::mask::{hamming, BinaryMask};
use crate::morphology::{MorphOp, StructuringElement};

/// The corruption levels evaluated by default, as fractions of the image.
pub const DEFAULT_LEVELS: [f64; 7] = [0.02, 0.12, 0.15, 0.17, 0.20, 0.25, 0.30];
pub const DEFAULT_MAX_ITERS: u32 = 100;
pub const DEFAULT_LOW_WHITE: f64 = 0.2;
pub const DEFAULT_HIGH_WHITE: f64 = 0.8;

const FAVOURED: f64 = 0.7;
const DISFAVOURED: f64 = 0.15;
const THIRD: f64 = 1.0 / 3.0;

/// Probabilities over the 3×3, 5×5 and 7×7 kernels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelDistribution {
    probabilities: [f64; 3],
}

impl KernelDistribution {
    pub fn new(p3: f64, p5: f64, p7: f64) -> Result<Self> {
        let probabilities = [p3, p5, p7];
        let sum: f64 = probabilities.iter().sum();
        if probabilities.iter().any(|p| !(0.0..=1.0).contains(p)) || (sum - 1.0).abs() > 1e-12 {
            return Err(Error::Invalid(format!(
                "kernel probabilities {probabilities:?} must lie in [0,1] and sum to 1"
            )));
        }
        Ok(Self { probabilities })
    }

    pub fn favour_large() -> Self {
        Self {
            probabilities: [DISFAVOURED, DISFAVOURED, FAVOURED],
        }
    }

    pub fn favour_small() -> Self {
        Self {
            probabilities: [FAVOURED, DISFAVOURED, DISFAVOURED],
        }
    }

    pub fn uniform() -> Self {
        Self {
            probabilities: [THIRD; 3],
        }
    }

    pub fn probability(&self, se: StructuringElement) -> f64 {
        self.probabilities[(se.size() - 3) / 2]
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> StructuringElement {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (se, p) in StructuringElement::ALL.iter().zip(self.probabilities) {
            acc += p;
            if u < acc {
                return *se;
            }
        }
        // u landed in the rounding gap just below 1
        StructuringElement::SQUARE_7
    }
}

/// Thresholds on the water fraction that switch on the biased distributions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelPolicy {
    pub low_white: f64,
    pub high_white: f64,
}

impl Default for KernelPolicy {
    fn default() -> Self {
        Self {
            low_white: DEFAULT_LOW_WHITE,
            high_white: DEFAULT_HIGH_WHITE,
        }
    }
}

impl KernelPolicy {
    pub fn distribution(&self, white_frac: f64, op: MorphOp) -> KernelDistribution {
        match op {
            MorphOp::Erode if white_frac < self.low_white => KernelDistribution::favour_large(),
            MorphOp::Dilate if white_frac > self.high_white => KernelDistribution::favour_small(),
            _ => KernelDistribution::uniform(),
        }
    }

    pub fn select<R: Rng + ?Sized>(
        &self,
        white_frac: f64,
        op: MorphOp,
        rng: &mut R,
    ) -> StructuringElement {
        self.distribution(white_frac, op).sample(rng)
    }
}

/// Draws a kernel size with the default thresholds.
pub fn select_kernel<R: Rng + ?Sized>(
    white_frac: f64,
    op: MorphOp,
    rng: &mut R,
) -> StructuringElement {
    KernelPolicy::default().select(white_frac, op, rng)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoisonConfig {
    /// Maximum share of pixels allowed to differ from the original, in (0, 1].
    pub level: f64,
    pub max_iters: u32,
    pub seed: u64,
    pub low_white: f64,
    pub high_white: f64,
}

impl PoisonConfig {
    pub fn new(level: f64, seed: u64) -> Result<Self> {
        let cfg = Self {
            level,
            max_iters: DEFAULT_MAX_ITERS,
            seed,
            low_white: DEFAULT_LOW_WHITE,
            high_white: DEFAULT_HIGH_WHITE,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.level > 0.0 && self.level <= 1.0) {
            return Err(Error::Invalid("level must be in (0,1]".into()));
        }
        if self.max_iters < 1 {
            return Err(Error::Invalid("max_iters must be at least 1".into()));
        }
        if !(0.0 <= self.low_white && self.low_white <= self.high_white && self.high_white <= 1.0)
        {
            return Err(Error::Invalid(
                "white thresholds must satisfy 0 <= low_white <= high_white <= 1".into(),
            ));
        }
        Ok(())
    }

    pub fn policy(&self) -> KernelPolicy {
        KernelPolicy {
            low_white: self.low_white,
            high_white: self.high_white,
        }
    }

    /// Pixel budget `floor(level * width * height)`.
    pub fn budget(&self, width: usize, height: usize) -> u64 {
        (self.level * (width * height) as f64).floor() as u64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoisonResult {
    pub mask: BinaryMask,
    pub operation: MorphOp,
    /// Steps kept in the returned mask.
    pub iterations_applied: u32,
    pub corrupted_pixels: u64,
    pub budget: u64,
    /// Every kernel drawn, including a final discarded one.
    pub kernel_trace: Vec<StructuringElement>,
    /// Whether the last entry of `kernel_trace` overshot the budget and was
    /// discarded.
    pub rolled_back: bool,
}

/// Iteratively corrupts `original` until the step budget is spent or the next
/// step would exceed the pixel budget.
pub fn corrupt_mask<R: Rng + ?Sized>(
    original: &BinaryMask,
    op: MorphOp,
    cfg: &PoisonConfig,
    rng: &mut R,
) -> PoisonResult {
    let budget = cfg.budget(original.width(), original.height());
    let policy = cfg.policy();
    let mut current = original.clone();
    let mut corrupted = 0;
    let mut applied = 0;
    let mut trace = Vec::new();
    let mut rolled_back = false;

    for _ in 0..cfg.max_iters {
        let se = policy.select(current.white_fraction(), op, rng);
        trace.push(se);
        let next = op.apply(&current, se);
        let changed = hamming(original, &next).expect("morphology preserves shape");
        if changed > budget {
            rolled_back = true;
            break;
        }
        current = next;
        corrupted = changed;
        applied += 1;
    }

    PoisonResult {
        mask: current,
        operation: op,
        iterations_applied: applied,
        corrupted_pixels: corrupted,
        budget,
        kernel_trace: trace,
        rolled_back,
    }
}

/// Independent random stream for one image, keyed by the master seed and the
/// image's stable id.
pub fn image_rng(seed: u64, id: &str) -> ChaCha8Rng {
    let mut hasher = Sha256::new();
    hasher.update(b"morphopoison/image-stream/v1\0");
    hasher.update(seed.to_le_bytes());
    hasher.update(id.as_bytes());
    let digest = hasher.finalize();
    let mut key = [0u8; 32];
    key.copy_from_slice(&digest);
    ChaCha8Rng::from_seed(key)
}
