//! Canny edge detection and the Manhattan (city-block) chamfer distance
//! transform.
//!
//! Gradients come from a separable derivative-of-Gaussian filter with edge
//! replication at the image border. Directions are folded into `[0, 180)`
//! degrees and quantized to four bins for non-maximum suppression, followed
//! by 8-connected hysteresis tracking.

use crate::raster::{BinaryImage, GrayImage};
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EdgeError {
    #[error("sigma must be positive and finite (got {0})")]
    BadSigma(f64),
    #[error("hysteresis thresholds must satisfy 0 <= low <= high (got low={low}, high={high})")]
    BadThresholds { low: f64, high: f64 },
    #[error("distance transform needs at least one edge pixel")]
    NoEdgePixels,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum MagnitudeMode {
    /// `sqrt(gx^2 + gy^2)`
    #[default]
    Exact,
    /// `|gx| + |gy|`
    ManhattanApprox,
}

pub fn magnitude(gx: f64, gy: f64, mode: MagnitudeMode) -> f64 {
    match mode {
        MagnitudeMode::Exact => gx.hypot(gy),
        MagnitudeMode::ManhattanApprox => gx.abs() + gy.abs(),
    }
}

/// How hysteresis thresholds are interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum Thresholds {
    /// Raw gradient magnitudes.
    Absolute { low: f64, high: f64 },
    /// Fractions of the image's maximum gradient magnitude.
    Relative { low: f64, high: f64 },
}

impl Thresholds {
    fn pair(&self) -> (f64, f64) {
        match *self {
            Thresholds::Absolute { low, high } | Thresholds::Relative { low, high } => (low, high),
        }
    }

    /// Absolute `(low, high)` for a field whose largest magnitude is `max_mag`.
    pub fn resolve(&self, max_mag: f64) -> (f64, f64) {
        match *self {
            Thresholds::Absolute { low, high } => (low, high),
            Thresholds::Relative { low, high } => (low * max_mag, high * max_mag),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CannyParams {
    pub sigma: f64,
    pub thresholds: Thresholds,
    pub magnitude_mode: MagnitudeMode,
}

impl Default for CannyParams {
    fn default() -> Self {
        Self {
            sigma: 1.4,
            thresholds: Thresholds::Relative {
                low: 0.1,
                high: 0.25,
            },
            magnitude_mode: MagnitudeMode::Exact,
        }
    }
}

impl CannyParams {
    pub fn validate(&self) -> Result<(), EdgeError> {
        check_sigma(self.sigma)?;
        let (low, high) = self.thresholds.pair();
        if !(low >= 0.0 && low <= high && high.is_finite()) {
            return Err(EdgeError::BadThresholds { low, high });
        }
        Ok(())
    }
}

fn check_sigma(sigma: f64) -> Result<(), EdgeError> {
    if sigma > 0.0 && sigma.is_finite() {
        Ok(())
    } else {
        Err(EdgeError::BadSigma(sigma))
    }
}

/// Sampled Gaussian of half-width `ceil(3 sigma)`, normalized to sum 1.
pub fn gaussian_kernel_1d(sigma: f64) -> Result<Vec<f64>, EdgeError> {
    Ok(gaussian_pair(sigma)?.0)
}

/// Derivative of the sampled Gaussian, `-t / sigma^2 * g(t)`, sharing the
/// smoothing kernel's normalization. Index `i` holds offset `i - half`.
pub fn gaussian_derivative_kernel_1d(sigma: f64) -> Result<Vec<f64>, EdgeError> {
    Ok(gaussian_pair(sigma)?.1)
}

fn gaussian_pair(sigma: f64) -> Result<(Vec<f64>, Vec<f64>), EdgeError> {
    check_sigma(sigma)?;
    let half = (3.0 * sigma).ceil() as isize;
    let raw: Vec<f64> = (-half..=half)
        .map(|t| (-((t * t) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let norm: f64 = raw.iter().sum();
    let smooth: Vec<f64> = raw.iter().map(|v| v / norm).collect();
    let deriv = (-half..=half)
        .zip(&smooth)
        .map(|(t, g)| -(t as f64) / (sigma * sigma) * g)
        .collect();
    Ok((smooth, deriv))
}

/// Per-pixel gradient components, magnitude and direction.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientField {
    pub width: usize,
    pub height: usize,
    pub gx: Vec<f64>,
    pub gy: Vec<f64>,
    pub mag: Vec<f64>,
    /// Direction in degrees, folded into `[0, 180)`.
    pub theta_deg: Vec<f64>,
}

impl GradientField {
    pub fn max_magnitude(&self) -> f64 {
        self.mag.iter().copied().fold(0.0, f64::max)
    }
}

/// 1D convolution along rows (`horizontal`) or columns with clamped indices:
/// `out(p) = sum_t src(p - t) k(t)`. Taps `t` and `-t` are summed as a pair,
/// so an antisymmetric kernel gives exactly zero on flat input.
fn convolve_axis(
    src: &[f64],
    width: usize,
    height: usize,
    kernel: &[f64],
    horizontal: bool,
) -> Vec<f64> {
    let half = (kernel.len() / 2) as isize;
    let mut out = vec![0.0; src.len()];
    for y in 0..height as isize {
        for x in 0..width as isize {
            let at = |t: isize| {
                let (sx, sy) = if horizontal {
                    ((x - t).clamp(0, width as isize - 1), y)
                } else {
                    (x, (y - t).clamp(0, height as isize - 1))
                };
                src[sy as usize * width + sx as usize]
            };
            let mut acc = at(0) * kernel[half as usize];
            for t in 1..=half {
                acc += at(t) * kernel[(half + t) as usize] + at(-t) * kernel[(half - t) as usize];
            }
            out[y as usize * width + x as usize] = acc;
        }
    }
    out
}

/// Folds an angle in degrees into `[0, 180)`.
fn fold_half_turn(deg: f64) -> f64 {
    let mut t = deg.rem_euclid(180.0);
    if t >= 180.0 {
        t -= 180.0;
    }
    t
}

/// Separable derivative-of-Gaussian gradients.
pub fn gradients(
    img: &GrayImage,
    sigma: f64,
    mode: MagnitudeMode,
) -> Result<GradientField, EdgeError> {
    let (smooth, deriv) = gaussian_pair(sigma)?;
    let (w, h) = (img.width(), img.height());
    let src: Vec<f64> = img.pixels().iter().map(|&p| f64::from(p)).collect();

    let dx_rows = convolve_axis(&src, w, h, &deriv, true);
    let gx = convolve_axis(&dx_rows, w, h, &smooth, false);
    let smooth_rows = convolve_axis(&src, w, h, &smooth, true);
    let gy = convolve_axis(&smooth_rows, w, h, &deriv, false);

    Ok(field_from_components(w, h, gx, gy, mode))
}

pub(crate) fn field_from_components(
    width: usize,
    height: usize,
    gx: Vec<f64>,
    gy: Vec<f64>,
    mode: MagnitudeMode,
) -> GradientField {
    let mag = gx
        .iter()
        .zip(&gy)
        .map(|(&a, &b)| magnitude(a, b, mode))
        .collect();
    let theta_deg = gx
        .iter()
        .zip(&gy)
        .map(|(&a, &b)| fold_half_turn(b.atan2(a).to_degrees()))
        .collect();
    GradientField {
        width,
        height,
        gx,
        gy,
        mag,
        theta_deg,
    }
}

/// Quantized gradient direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DirectionBin {
    Deg0,
    Deg45,
    Deg90,
    Deg135,
}

impl DirectionBin {
    pub fn degrees(self) -> u32 {
        match self {
            DirectionBin::Deg0 => 0,
            DirectionBin::Deg45 => 45,
            DirectionBin::Deg90 => 90,
            DirectionBin::Deg135 => 135,
        }
    }

    /// The two neighbor offsets `(dx, dy)` along the gradient, `y` pointing down.
    pub fn neighbors(self) -> [(isize, isize); 2] {
        match self {
            DirectionBin::Deg0 => [(-1, 0), (1, 0)],
            DirectionBin::Deg45 => [(-1, -1), (1, 1)],
            DirectionBin::Deg90 => [(0, -1), (0, 1)],
            DirectionBin::Deg135 => [(-1, 1), (1, -1)],
        }
    }
}

/// Bins any angle: negatives are shifted up by 180 degrees, then
/// `<= 22.5 or > 157.5 -> 0`, `(22.5, 67.5] -> 45`, `(67.5, 112.5] -> 90`,
/// `(112.5, 157.5] -> 135`.
pub fn direction_bin(theta_deg: f64) -> DirectionBin {
    if theta_deg.is_nan() {
        return DirectionBin::Deg0;
    }
    let t = fold_half_turn(theta_deg);
    if t <= 22.5 || t > 157.5 {
        DirectionBin::Deg0
    } else if t <= 67.5 {
        DirectionBin::Deg45
    } else if t <= 112.5 {
        DirectionBin::Deg90
    } else {
        DirectionBin::Deg135
    }
}

/// Real-valued raster, used for suppressed magnitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct RealImage {
    pub width: usize,
    pub height: usize,
    pub values: Vec<f64>,
}

impl RealImage {
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }

    fn get_or_zero(&self, x: isize, y: isize) -> f64 {
        if x < 0 || y < 0 || x >= self.width as isize || y >= self.height as isize {
            0.0
        } else {
            self.values[y as usize * self.width + x as usize]
        }
    }

    /// Linear rescale of `[0, max]` onto `0..=255`, for inspection dumps only.
    pub fn to_gray_rescaled(&self) -> GrayImage {
        let max = self.values.iter().copied().fold(0.0, f64::max);
        let scale = if max > 0.0 { 255.0 / max } else { 0.0 };
        GrayImage::new(
            self.width,
            self.height,
            self.values
                .iter()
                .map(|&v| (v.max(0.0) * scale).round().min(255.0) as u8)
                .collect(),
        )
        .expect("non-empty raster")
    }
}

/// Zeroes every pixel that has a strictly larger neighbor along its gradient
/// direction. Off-image neighbors read as zero.
pub fn non_max_suppress(g: &GradientField) -> RealImage {
    let mags = RealImage {
        width: g.width,
        height: g.height,
        values: g.mag.clone(),
    };
    let mut out = vec![0.0; g.mag.len()];
    for y in 0..g.height {
        for x in 0..g.width {
            let i = y * g.width + x;
            let m = g.mag[i];
            let [a, b] = direction_bin(g.theta_deg[i]).neighbors();
            let na = mags.get_or_zero(x as isize + a.0, y as isize + a.1);
            let nb = mags.get_or_zero(x as isize + b.0, y as isize + b.1);
            if !(na > m || nb > m) {
                out[i] = m;
            }
        }
    }
    RealImage {
        width: g.width,
        height: g.height,
        values: out,
    }
}

/// Final edge mask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeMap {
    pub edges: BinaryImage,
}

impl EdgeMap {
    pub fn width(&self) -> usize {
        self.edges.width()
    }

    pub fn height(&self) -> usize {
        self.edges.height()
    }

    pub fn count(&self) -> usize {
        self.edges.count_foreground()
    }
}

pub(crate) const NEIGHBORS_8: [(isize, isize); 8] = [
    (-1, -1),
    (0, -1),
    (1, -1),
    (-1, 0),
    (1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
];

/// Dual-threshold tracking: values `>= high` seed edges, values in
/// `[low, high)` join when 8-connected to a seed through other such values.
/// Zero-valued pixels are never edges.
pub fn hysteresis(nms: &RealImage, low: f64, high: f64) -> Result<EdgeMap, EdgeError> {
    if !(low >= 0.0 && low <= high) {
        return Err(EdgeError::BadThresholds { low, high });
    }
    let (w, h) = (nms.width, nms.height);
    let mut kept = vec![false; w * h];
    let mut queue = VecDeque::new();
    for (i, &v) in nms.values.iter().enumerate() {
        if v > 0.0 && v >= high {
            kept[i] = true;
            queue.push_back(i);
        }
    }
    while let Some(i) = queue.pop_front() {
        let (x, y) = ((i % w) as isize, (i / w) as isize);
        for (dx, dy) in NEIGHBORS_8 {
            let (nx, ny) = (x + dx, y + dy);
            if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                continue;
            }
            let j = ny as usize * w + nx as usize;
            let v = nms.values[j];
            if !kept[j] && v > 0.0 && v >= low {
                kept[j] = true;
                queue.push_back(j);
            }
        }
    }
    Ok(EdgeMap {
        edges: BinaryImage::new(w, h, kept).expect("non-empty raster"),
    })
}

/// Intermediate products of a Canny run.
#[derive(Debug, Clone)]
pub struct CannyStages {
    pub gradients: GradientField,
    pub suppressed: RealImage,
    pub low: f64,
    pub high: f64,
    pub edges: EdgeMap,
}

pub fn canny(img: &GrayImage, p: &CannyParams) -> Result<EdgeMap, EdgeError> {
    Ok(canny_stages(img, p)?.edges)
}

pub fn canny_stages(img: &GrayImage, p: &CannyParams) -> Result<CannyStages, EdgeError> {
    p.validate()?;
    let field = gradients(img, p.sigma, p.magnitude_mode)?;
    let suppressed = non_max_suppress(&field);
    let (low, high) = p.thresholds.resolve(field.max_magnitude());
    let edges = hysteresis(&suppressed, low, high)?;
    Ok(CannyStages {
        gradients: field,
        suppressed,
        low,
        high,
        edges,
    })
}

/// Per-pixel L1 distance to the nearest edge pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceMap {
    pub width: usize,
    pub height: usize,
    pub dist: Vec<u32>,
}

impl DistanceMap {
    pub fn get(&self, x: usize, y: usize) -> u32 {
        self.dist[y * self.width + x]
    }
}

/// Two-pass sequential city-block distance transform with unit costs.
pub fn chamfer_manhattan(edges: &EdgeMap) -> Result<DistanceMap, EdgeError> {
    let mask = &edges.edges;
    if mask.count_foreground() == 0 {
        return Err(EdgeError::NoEdgePixels);
    }
    let (w, h) = (mask.width(), mask.height());
    let far = (w + h) as u32;
    let mut d: Vec<u32> = mask
        .bits()
        .iter()
        .map(|&b| if b { 0 } else { far })
        .collect();
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            if x > 0 {
                d[i] = d[i].min(d[i - 1] + 1);
            }
            if y > 0 {
                d[i] = d[i].min(d[i - w] + 1);
            }
        }
    }
    for y in (0..h).rev() {
        for x in (0..w).rev() {
            let i = y * w + x;
            if x + 1 < w {
                d[i] = d[i].min(d[i + 1] + 1);
            }
            if y + 1 < h {
                d[i] = d[i].min(d[i + w] + 1);
            }
        }
    }
    Ok(DistanceMap {
        width: w,
        height: h,
        dist: d,
    })
}
