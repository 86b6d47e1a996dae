//! `morphopoison` command line.
//!
//! Exit codes: 0 success, 1 invalid input or arguments, 2 internal failure.
//! `MORPHOPOISON_THREADS` caps the worker pool (unset or 0 means one thread
//! per core).

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use morphopoison::mask::{load_band, load_mask, save_mask};
use morphopoison::metrics::{aggregate, evaluate, metrics_csv};
use morphopoison::ndwi::{compute_ndwi, threshold_mask};
use morphopoison::poison::{
    assign_splits, poison_dataset, DatasetManifest, Partition, PoisonConfig, DEFAULT_HIGH_WHITE,
    DEFAULT_LOW_WHITE, DEFAULT_MAX_ITERS,
};
use morphopoison::report::{corruption_report, epoch_report, EpochLog};
use morphopoison::{Error, ImageEvaluation};
use rayon::prelude::*;

pub const THREADS_ENV: &str = "MORPHOPOISON_THREADS";

#[derive(Debug, Parser)]
#[command(name = "morphopoison", version, about = "Morphological label noise for water masks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Corrupt train/val masks by iterated erosion or dilation.
    Poison(PoisonArgs),
    /// Deal image ids into erode/dilate/clean thirds.
    Split(SplitArgs),
    /// Score predicted masks against ground truth.
    Metrics(MetricsArgs),
    /// Threshold NDWI computed from green and NIR bands into a water mask.
    Ndwi(NdwiArgs),
    /// Summarise manifests or training logs as CSV series.
    #[command(subcommand)]
    Report(ReportCommand),
}

#[derive(Debug, Args)]
struct PoisonArgs {
    /// Directory of .png/.pgm masks, all treated as training images.
    #[arg(long, required_unless_present = "manifest", conflicts_with = "manifest")]
    masks_dir: Option<PathBuf>,
    /// Dataset manifest with train/val/test partitions.
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long)]
    out_dir: PathBuf,
    /// Corruption budget as a fraction of the image, in (0,1].
    #[arg(long, value_parser = parse_level)]
    level: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_MAX_ITERS)]
    max_iters: u32,
    #[arg(long, default_value_t = DEFAULT_LOW_WHITE)]
    low_white: f64,
    #[arg(long, default_value_t = DEFAULT_HIGH_WHITE)]
    high_white: f64,
    /// Where to write the output manifest (default: <out-dir>/manifest.json).
    #[arg(long)]
    manifest_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SplitArgs {
    #[arg(long, required_unless_present = "ids_file", conflicts_with = "ids_file")]
    masks_dir: Option<PathBuf>,
    /// Text file with one id per line.
    #[arg(long)]
    ids_file: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct MetricsArgs {
    /// Predicted masks; ids are file stems.
    #[arg(long)]
    pred_dir: PathBuf,
    /// Reference masks with matching file stems.
    #[arg(long)]
    gt_dir: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct NdwiArgs {
    #[arg(long)]
    green: PathBuf,
    #[arg(long)]
    nir: PathBuf,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true, value_parser = parse_threshold)]
    threshold: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Subcommand)]
enum ReportCommand {
    /// Box-plot series of corrupted pixels and SSIM per level and operation.
    Corruption {
        #[arg(long = "manifest", required = true)]
        manifests: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Long-format train/val accuracy per epoch.
    Epochs {
        #[arg(long = "log", required = true)]
        logs: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_level(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("not a number: {s}"))?;
    if v > 0.0 && v <= 1.0 {
        Ok(v)
    } else {
        Err("level must be in (0,1]".into())
    }
}

fn parse_threshold(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("not a number: {s}"))?;
    if (-1.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err("threshold must be in [-1,1]".into())
    }
}

#[derive(Debug)]
enum CliError {
    Input(String),
    Internal(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        if e.is_input_error() {
            CliError::Input(e.to_string())
        } else {
            CliError::Internal(e.to_string())
        }
    }
}

type CliResult<T = ()> = Result<T, CliError>;

/// Parses `argv` (including the program name), runs the subcommand and
/// returns the process exit code.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match with_pool(|| dispatch(cli.command)) {
        Ok(()) => 0,
        Err(CliError::Input(msg)) => {
            eprintln!("error: {msg}");
            1
        }
        Err(CliError::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            2
        }
    }
}

fn with_pool(f: impl FnOnce() -> CliResult + Send) -> CliResult {
    let threads = match std::env::var(THREADS_ENV) {
        Ok(v) if !v.trim().is_empty() => v.trim().parse::<usize>().map_err(|_| {
            CliError::Input(format!("{THREADS_ENV} must be a non-negative integer, got {v:?}"))
        })?,
        _ => 0,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Internal(format!("thread pool: {e}")))?;
    pool.install(f)
}

fn dispatch(cmd: Command) -> CliResult {
    match cmd {
        Command::Poison(args) => poison(args),
        Command::Split(args) => split(args),
        Command::Metrics(args) => metrics(args),
        Command::Ndwi(args) => ndwi(args),
        Command::Report(ReportCommand::Corruption { manifests, out }) => {
            let manifests = manifests
                .iter()
                .map(DatasetManifest::load)
                .collect::<Result<Vec<_>, _>>()?;
            emit(out.as_deref(), &corruption_report(&manifests)?)
        }
        Command::Report(ReportCommand::Epochs { logs, out }) => {
            let logs = logs
                .iter()
                .map(|p| {
                    let text = fs::read_to_string(p)
                        .map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?;
                    Ok(EpochLog::parse(&text, &p.display().to_string())?)
                })
                .collect::<CliResult<Vec<_>>>()?;
            emit(out.as_deref(), &epoch_report(&logs)?)
        }
    }
}

fn poison(args: PoisonArgs) -> CliResult {
    let cfg = PoisonConfig {
        level: args.level,
        max_iters: args.max_iters,
        seed: args.seed,
        low_white: args.low_white,
        high_white: args.high_white,
    };
    cfg.validate()?;
    let input = match (&args.masks_dir, &args.manifest) {
        (Some(dir), _) => DatasetManifest::from_mask_dir(dir, Partition::Train)?,
        (None, Some(path)) => DatasetManifest::load(path)?,
        (None, None) => unreachable!("clap enforces one input"),
    };
    if !args.out_dir.is_dir() {
        fs::create_dir_all(&args.out_dir)
            .map_err(|e| CliError::Input(format!("{}: {e}", args.out_dir.display())))?;
    }
    let output = poison_dataset(&input, &cfg, &args.out_dir)?;
    let dest = args
        .manifest_out
        .unwrap_or_else(|| args.out_dir.join("manifest.json"));
    output.save(&dest)?;
    Ok(())
}

fn split(args: SplitArgs) -> CliResult {
    let ids: Vec<String> = match (&args.masks_dir, &args.ids_file) {
        (Some(dir), _) => DatasetManifest::from_mask_dir(dir, Partition::Train)?
            .images
            .into_iter()
            .map(|r| r.id)
            .collect(),
        (None, Some(path)) => fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(str::to_owned)
            .collect(),
        (None, None) => unreachable!("clap enforces one input"),
    };
    let assignment = assign_splits(&ids, args.seed)?;
    emit(args.out.as_deref(), &assignment.to_json()?)
}

fn metrics(args: MetricsArgs) -> CliResult {
    let preds = DatasetManifest::from_mask_dir(&args.pred_dir, Partition::Test)?;
    let gts = DatasetManifest::from_mask_dir(&args.gt_dir, Partition::Test)?;
    let evals = preds
        .images
        .par_iter()
        .map(|p| {
            let gt = gts
                .images
                .iter()
                .find(|g| g.id == p.id)
                .ok_or_else(|| {
                    CliError::Input(format!(
                        "no reference mask for {:?} in {}",
                        p.id,
                        args.gt_dir.display()
                    ))
                })?;
            let pred = load_mask(&p.mask_path)?;
            let reference = load_mask(&gt.mask_path)?;
            Ok(evaluate::<f64>(p.id.clone(), &pred, &reference)?)
        })
        .collect::<CliResult<Vec<ImageEvaluation<f64>>>>()?;
    let summary = aggregate(&evals)?;
    emit(args.out.as_deref(), &metrics_csv(&evals, &summary))
}

fn ndwi(args: NdwiArgs) -> CliResult {
    let green = load_band(&args.green)?;
    let nir = load_band(&args.nir)?;
    let grid = compute_ndwi::<f64>(&green, &nir)?;
    save_mask(&threshold_mask(&grid, args.threshold), &args.out)?;
    Ok(())
}

fn emit(out: Option<&Path>, text: &str) -> CliResult {
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Internal(format!("stdout: {e}"))),
    }
}
