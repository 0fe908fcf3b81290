//! Seeded synthetic corpus.
//!
//! Normal images are flat tissue with sparse impulse speckle, which the
//! median filter removes completely. Benign images add one smooth,
//! low-contrast disk. Malignant images add one irregular blob filled with a
//! coarse, high-contrast random texture.

use crate::manifest::{Manifest, ManifestEntry, Split};
use imgmine_core::label::ClassLabel;
use imgmine_core::raster::GrayImage;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthParams {
    pub size: usize,
    pub per_class: usize,
    pub train_fraction: f64,
    pub seed: u64,
}

impl Default for SynthParams {
    fn default() -> Self {
        Self {
            size: 64,
            per_class: 20,
            train_fraction: 0.7,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SynthImage {
    pub name: String,
    pub image: GrayImage,
    pub label: ClassLabel,
    pub split: Split,
}

/// Speckle cell size; a 3x3 window never meets more than four cells, so at
/// most four impulses, which a 3x3 median always rejects.
const CELL: usize = 4;

fn background(rng: &mut ChaCha8Rng, size: usize) -> (Vec<f64>, f64) {
    let level = rng.gen_range(90..=110) as f64;
    let mut px = vec![level; size * size];
    for cy in (0..size).step_by(CELL) {
        for cx in (0..size).step_by(CELL) {
            if rng.gen_bool(0.2) {
                // keep off the outermost ring so border replication cannot
                // duplicate an impulse inside one window
                let x = (cx + rng.gen_range(0..CELL)).clamp(1, size - 2);
                let y = (cy + rng.gen_range(0..CELL)).clamp(1, size - 2);
                let delta = rng.gen_range(40.0..80.0);
                px[y * size + x] = if rng.gen_bool(0.5) {
                    level + delta
                } else {
                    level - delta
                };
            }
        }
    }
    (px, level)
}

fn center(rng: &mut ChaCha8Rng, size: usize, radius: f64) -> (f64, f64) {
    let margin = radius + 4.0;
    let span = size as f64 - 2.0 * margin;
    (
        margin + rng.gen::<f64>() * span,
        margin + rng.gen::<f64>() * span,
    )
}

fn benign(rng: &mut ChaCha8Rng, px: &mut [f64], size: usize, level: f64) {
    let r = rng.gen_range(9.0..13.0);
    let (cx, cy) = center(rng, size, r);
    let lift = rng.gen_range(25.0..40.0);
    for y in 0..size {
        for x in 0..size {
            let d = ((x as f64 - cx).powi(2) + (y as f64 - cy).powi(2)).sqrt();
            // one-pixel soft rim
            let w = (r + 0.5 - d).clamp(0.0, 1.0);
            if w > 0.0 {
                px[y * size + x] = level + w * lift;
            }
        }
    }
}

fn malignant(rng: &mut ChaCha8Rng, px: &mut [f64], size: usize, level: f64) {
    let r0 = rng.gen_range(9.0..13.0);
    let (cx, cy) = center(rng, size, r0 * 1.3);
    let lobes = rng.gen_range(3..=5) as f64;
    let amp = rng.gen_range(0.18..0.3);
    let phase = rng.gen_range(0.0..TAU);
    // coarse 3x3 blocks, each well below or well above the tissue level, so
    // the texture survives both the median filter and equalization
    let blocks = size.div_ceil(3);
    let texture: Vec<f64> = (0..blocks * blocks)
        .map(|_| {
            let m = rng.gen_range(55.0..85.0);
            if rng.gen_bool(0.5) {
                m
            } else {
                -m
            }
        })
        .collect();
    for y in 0..size {
        for x in 0..size {
            let (dx, dy) = (x as f64 - cx, y as f64 - cy);
            let radius = r0 * (1.0 + amp * (lobes * dy.atan2(dx) + phase).sin());
            if dx.hypot(dy) <= radius {
                px[y * size + x] = level + texture[(y / 3) * blocks + x / 3];
            }
        }
    }
}

fn render(px: &[f64], size: usize) -> GrayImage {
    GrayImage::new(
        size,
        size,
        px.iter()
            .map(|v| v.round().clamp(0.0, 255.0) as u8)
            .collect(),
    )
    .expect("size is non-zero")
}

pub fn generate(params: &SynthParams) -> Vec<SynthImage> {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let n = params.per_class;
    let n_train = ((n as f64) * params.train_fraction).round() as usize;
    let mut out = Vec::with_capacity(3 * n);
    for label in ClassLabel::ALL {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        let mut is_train = vec![false; n];
        for &i in order.iter().take(n_train) {
            is_train[i] = true;
        }
        for (i, train) in is_train.into_iter().enumerate() {
            let (mut px, level) = background(&mut rng, params.size);
            match label {
                ClassLabel::Normal => {}
                ClassLabel::Benign => benign(&mut rng, &mut px, params.size, level),
                ClassLabel::Malignant => malignant(&mut rng, &mut px, params.size, level),
            }
            out.push(SynthImage {
                name: format!("{label}_{i:03}.pgm"),
                image: render(&px, params.size),
                label,
                split: if train { Split::Train } else { Split::Test },
            });
        }
    }
    out
}

pub fn manifest_for(images: &[SynthImage]) -> Manifest {
    Manifest {
        entries: images
            .iter()
            .map(|s| ManifestEntry {
                path: s.name.clone(),
                label: Some(s.label),
                split: s.split,
            })
            .collect(),
        base: Default::default(),
    }
}
