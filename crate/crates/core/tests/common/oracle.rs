//! Brute-force reference implementations used to check the optimized code.
//! Everything here enumerates directly from definitions and shares no code
//! with the library beyond plain data types.

#![allow(dead_code)]

use std::collections::BTreeMap;

pub type Items = Vec<u32>;

pub fn support(db: &[Items], set: &[u32]) -> u64 {
    db.iter()
        .filter(|t| set.iter().all(|i| t.contains(i)))
        .count() as u64
}

/// Every non-empty itemset with support at least `min_count`, found by
/// enumerating all subsets of the item universe.
pub fn all_frequent(db: &[Items], min_count: u64) -> BTreeMap<Items, u64> {
    let mut universe: Items = db.iter().flatten().copied().collect();
    universe.sort_unstable();
    universe.dedup();
    // subsets of infrequent items are never frequent, so restricting the
    // universe keeps enumeration exact
    universe.retain(|&i| support(db, &[i]) >= min_count);
    let n = universe.len();
    assert!(n <= 20, "oracle universe too large: {n}");
    let mut out = BTreeMap::new();
    for mask in 1u32..(1 << n) {
        let set: Items = (0..n)
            .filter(|b| mask >> b & 1 == 1)
            .map(|b| universe[b])
            .collect();
        let s = support(db, &set);
        if s >= min_count {
            out.insert(set, s);
        }
    }
    out
}

fn is_strict_subset(a: &[u32], b: &[u32]) -> bool {
    a.len() < b.len() && a.iter().all(|i| b.contains(i))
}

pub fn maximal(frequent: &BTreeMap<Items, u64>) -> BTreeMap<Items, u64> {
    frequent
        .iter()
        .filter(|(s, _)| !frequent.keys().any(|t| is_strict_subset(s, t)))
        .map(|(s, &c)| (s.clone(), c))
        .collect()
}

/// `(antecedent, class item, support count, antecedent count)` for every
/// class rule passing `min_count` and confidence `conf_num / conf_den`.
pub fn class_rules(
    db: &[Items],
    class_items: &[u32],
    min_count: u64,
    conf_num: u64,
    conf_den: u64,
) -> Vec<(Items, u32, u64, u64)> {
    let mut out = Vec::new();
    for (set, &s) in &all_frequent(db, min_count) {
        let classes: Vec<u32> = set
            .iter()
            .copied()
            .filter(|i| class_items.contains(i))
            .collect();
        if classes.len() != 1 || set.len() < 2 {
            continue;
        }
        let antecedent: Items = set.iter().copied().filter(|&i| i != classes[0]).collect();
        let a = support(db, &antecedent);
        if s * conf_den >= conf_num * a {
            out.push((antecedent, classes[0], s, a));
        }
    }
    out.sort();
    out
}

/// Normalized sampled Gaussian and its derivative over `[-ceil(3 sigma), ceil(3 sigma)]`.
pub fn dog_kernels(sigma: f64) -> (Vec<f64>, Vec<f64>) {
    let half = (3.0 * sigma).ceil() as i64;
    let ts: Vec<i64> = (-half..=half).collect();
    let raw: Vec<f64> = ts
        .iter()
        .map(|&t| (-(t * t) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let z: f64 = raw.iter().sum();
    let g: Vec<f64> = raw.iter().map(|v| v / z).collect();
    let d = ts
        .iter()
        .zip(&g)
        .map(|(&t, v)| -(t as f64) / (sigma * sigma) * v)
        .collect();
    (g, d)
}

/// Direct 2D convolution with the derivative-of-Gaussian kernels
/// `Kx(u, v) = d(u) g(v)` and `Ky(u, v) = g(u) d(v)`, clamped borders.
pub fn dog_2d(pixels: &[u8], w: usize, h: usize, sigma: f64) -> (Vec<f64>, Vec<f64>) {
    let (g, d) = dog_kernels(sigma);
    let half = (g.len() / 2) as i64;
    let mut gx = vec![0.0; w * h];
    let mut gy = vec![0.0; w * h];
    for y in 0..h as i64 {
        for x in 0..w as i64 {
            let (mut sx, mut sy) = (0.0, 0.0);
            for v in -half..=half {
                for u in -half..=half {
                    let px = (x - u).clamp(0, w as i64 - 1) as usize;
                    let py = (y - v).clamp(0, h as i64 - 1) as usize;
                    let p = pixels[py * w + px] as f64;
                    let (iu, iv) = ((u + half) as usize, (v + half) as usize);
                    sx += p * d[iu] * g[iv];
                    sy += p * g[iu] * d[iv];
                }
            }
            gx[(y * w as i64 + x) as usize] = sx;
            gy[(y * w as i64 + x) as usize] = sy;
        }
    }
    (gx, gy)
}

/// L1 distance from each pixel to the nearest set pixel.
pub fn manhattan_distance(mask: &[bool], w: usize, h: usize) -> Vec<u32> {
    let set: Vec<(i64, i64)> = (0..w * h)
        .filter(|&i| mask[i])
        .map(|i| ((i % w) as i64, (i / w) as i64))
        .collect();
    (0..w * h)
        .map(|i| {
            let (x, y) = ((i % w) as i64, (i / w) as i64);
            set.iter()
                .map(|&(a, b)| ((a - x).abs() + (b - y).abs()) as u32)
                .min()
                .expect("mask has a set pixel")
        })
        .collect()
}

pub fn entropy_bits(counts: &[u64]) -> f64 {
    let n: u64 = counts.iter().sum();
    let mut h = 0.0;
    for &c in counts {
        if c > 0 {
            let p = c as f64 / n as f64;
            h -= p * p.log2();
        }
    }
    h
}
