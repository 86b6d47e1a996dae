#![allow(dead_code)]

use morphopoison::{BinaryMask, Exact, StructuringElement};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A meandering river band (with an occasional tributary) covering at most
/// `max_white` of a `size`×`size` tile.
pub fn river_mask(size: usize, seed: u64, max_white: f64) -> BinaryMask {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = size as f64;
    let mut half_width: f64 = rng.random_range(0.006 * s..0.03 * s);
    let y0 = rng.random_range(0.25 * s..0.75 * s);
    let amp = rng.random_range(0.05 * s..0.2 * s);
    let freq = rng.random_range(1.0..4.0) * std::f64::consts::TAU / s;
    let phase = rng.random_range(0.0..std::f64::consts::TAU);
    let tributary = rng.random_bool(0.5);
    let tx = rng.random_range(0.2 * s..0.8 * s);

    let mut drift = vec![0.0; size];
    let mut d = 0.0;
    for v in drift.iter_mut() {
        d += rng.random_range(-1.0..1.0);
        *v = d;
    }

    loop {
        let mask = BinaryMask::from_fn(size, size, |x, y| {
            let (xf, yf) = (x as f64, y as f64);
            let centre = y0 + amp * (xf * freq + phase).sin() + drift[x];
            let main = (yf - centre).abs() <= half_width;
            // tributary joins the main channel at x = tx and runs towards the top
            let branch = tributary && yf < centre && {
                let bx = tx + (centre - yf) * 0.6;
                (xf - bx).abs() <= half_width * 0.5
            };
            main || branch
        })
        .unwrap();
        if mask.white_fraction() <= max_white && mask.white_count() > 0 {
            return mask;
        }
        half_width *= 0.8;
    }
}

/// Masks of mixed character: noise, blobs and rivers.
pub fn random_mask(width: usize, height: usize, seed: u64) -> BinaryMask {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match seed % 3 {
        0 => {
            let p = rng.random_range(0.02..0.98);
            let cells = (0..width * height).map(|_| rng.random_bool(p)).collect();
            BinaryMask::new(width, height, cells).unwrap()
        }
        1 => {
            let blobs: Vec<(f64, f64, f64)> = (0..rng.random_range(1..8))
                .map(|_| {
                    (
                        rng.random_range(0.0..width as f64),
                        rng.random_range(0.0..height as f64),
                        rng.random_range(1.0..(width.min(height) as f64 / 3.0)),
                    )
                })
                .collect();
            let invert = rng.random_bool(0.3);
            BinaryMask::from_fn(width, height, |x, y| {
                let inside = blobs.iter().any(|&(cx, cy, r)| {
                    let (dx, dy) = (x as f64 - cx, y as f64 - cy);
                    dx * dx + dy * dy <= r * r
                });
                inside != invert
            })
            .unwrap()
        }
        _ => {
            let m = river_mask(width.max(height), seed, 0.5);
            BinaryMask::from_fn(width, height, |x, y| m.get(x, y)).unwrap()
        }
    }
}

/// Window minimum (erosion) over an explicitly padded copy; out-of-bounds
/// cells are water.
pub fn brute_erode(m: &BinaryMask, se: StructuringElement) -> BinaryMask {
    brute_window(m, se.size(), true, |window| window.iter().all(|&v| v))
}

/// Window maximum (dilation) over an explicitly padded copy; out-of-bounds
/// cells are land.
pub fn brute_dilate(m: &BinaryMask, se: StructuringElement) -> BinaryMask {
    brute_window(m, se.size(), false, |window| window.iter().any(|&v| v))
}

fn brute_window(
    m: &BinaryMask,
    size: usize,
    pad: bool,
    reduce: impl Fn(&[bool]) -> bool,
) -> BinaryMask {
    let r = size / 2;
    let (w, h) = (m.width(), m.height());
    let pw = w + 2 * r;
    let mut padded = vec![pad; pw * (h + 2 * r)];
    for y in 0..h {
        for x in 0..w {
            padded[(y + r) * pw + x + r] = m.get(x, y);
        }
    }
    let mut window = Vec::with_capacity(size * size);
    BinaryMask::from_fn(w, h, |x, y| {
        window.clear();
        for dy in 0..size {
            for dx in 0..size {
                window.push(padded[(y + dy) * pw + x + dx]);
            }
        }
        reduce(&window)
    })
    .unwrap()
}

/// Exact scores from brute-force cell counting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleScores {
    pub dice: Exact,
    pub iou: Exact,
    pub precision: Exact,
    pub recall: Exact,
    pub f1: Exact,
    pub specificity: Exact,
    pub accuracy: Exact,
}

/// Scores for two masks given as cell lists, with 0/0 read as 1.
pub fn oracle_scores(pred: &[bool], gt: &[bool]) -> OracleScores {
    let (mut tp, mut fp, mut fn_, mut tn) = (0i64, 0i64, 0i64, 0i64);
    for i in 0..pred.len() {
        if pred[i] && gt[i] {
            tp += 1;
        }
        if pred[i] && !gt[i] {
            fp += 1;
        }
        if !pred[i] && gt[i] {
            fn_ += 1;
        }
        if !pred[i] && !gt[i] {
            tn += 1;
        }
    }
    let q = |n: i64, d: i64| {
        if d == 0 {
            Exact::from_integer(1)
        } else {
            Exact::new(n, d)
        }
    };
    // harmonic mean of precision and recall, simplified to counts
    let f1 = if tp == 0 && fp == 0 && fn_ == 0 {
        Exact::from_integer(1)
    } else {
        Exact::new(2 * tp, 2 * tp + fp + fn_)
    };
    OracleScores {
        dice: q(2 * tp, 2 * tp + fp + fn_),
        iou: q(tp, tp + fp + fn_),
        precision: q(tp, tp + fp),
        recall: q(tp, tp + fn_),
        f1,
        specificity: q(tn, tn + fp),
        accuracy: q(tp + tn, tp + fp + fn_ + tn),
    }
}

pub fn median(values: &[f64]) -> f64 {
    morphopoison::report::five_number_summary(values)
        .unwrap()
        .median
}
