//! Intensity preprocessing: histograms, peak alignment, equalization,
//! 3x3 median filtering and binary morphology.

use crate::raster::{BinaryImage, GrayImage};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PrepError {
    #[error("cannot average an empty list of histograms")]
    EmptyImageList,
    #[error("histogram has no counts")]
    EmptyHistogram,
    #[error("structuring element must have odd dimensions (got {width}x{height})")]
    EvenElement { width: usize, height: usize },
    #[error("structuring element origin must be a member")]
    OriginNotMember,
    #[error("histogram CSV line {line}: {message}")]
    HistogramCsv { line: usize, message: String },
}

/// Per-level pixel counts for an 8-bit image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Histogram {
    bins: [u64; 256],
}

impl Default for Histogram {
    fn default() -> Self {
        Self { bins: [0; 256] }
    }
}

impl Histogram {
    pub fn from_bins(bins: [u64; 256]) -> Self {
        Self { bins }
    }

    pub fn bins(&self) -> &[u64; 256] {
        &self.bins
    }

    pub fn total(&self) -> u64 {
        self.bins.iter().sum()
    }

    /// Smallest intensity attaining the maximum count, or `None` when empty.
    pub fn peak(&self) -> Option<u8> {
        if self.total() == 0 {
            return None;
        }
        let mut best = 0usize;
        for (v, &c) in self.bins.iter().enumerate() {
            if c > self.bins[best] {
                best = v;
            }
        }
        Some(best as u8)
    }

    /// `level,count` rows after a header line, one row per level 0..=255.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("level,count\n");
        for (v, c) in self.bins.iter().enumerate() {
            out.push_str(&format!("{v},{c}\n"));
        }
        out
    }

    /// Parses the format written by [`Histogram::to_csv`]. Levels may come in
    /// any order; missing levels count as zero.
    pub fn from_csv(text: &str) -> Result<Self, PrepError> {
        let mut bins = [0u64; 256];
        let mut seen = [false; 256];
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, "level,count")) => {}
            _ => {
                return Err(PrepError::HistogramCsv {
                    line: 1,
                    message: "missing header \"level,count\"".into(),
                })
            }
        }
        for (i, line) in lines {
            let line_no = i + 1;
            if line.is_empty() {
                continue;
            }
            let err = |message: &str| PrepError::HistogramCsv {
                line: line_no,
                message: message.to_string(),
            };
            let (level, count) = line
                .split_once(',')
                .ok_or_else(|| err("expected two fields"))?;
            let level: u8 = level
                .trim()
                .parse()
                .map_err(|_| err("level must be 0..=255"))?;
            let count: u64 = count
                .trim()
                .parse()
                .map_err(|_| err("count must be a non-negative integer"))?;
            if seen[level as usize] {
                return Err(err("duplicate level"));
            }
            seen[level as usize] = true;
            bins[level as usize] = count;
        }
        Ok(Self { bins })
    }
}

pub fn histogram(img: &GrayImage) -> Histogram {
    let mut bins = [0u64; 256];
    for &p in img.pixels() {
        bins[p as usize] += 1;
    }
    Histogram { bins }
}

/// Per-level mean of the images' histograms, rounded half up.
pub fn average_histogram(imgs: &[GrayImage]) -> Result<Histogram, PrepError> {
    if imgs.is_empty() {
        return Err(PrepError::EmptyImageList);
    }
    let hists: Vec<Histogram> = imgs.iter().map(histogram).collect();
    Ok(average_of(&hists))
}

pub(crate) fn average_of(hists: &[Histogram]) -> Histogram {
    let n = hists.len() as u64;
    let mut bins = [0u64; 256];
    for (v, bin) in bins.iter_mut().enumerate() {
        let sum: u64 = hists.iter().map(|h| h.bins[v]).sum();
        *bin = (2 * sum + n) / (2 * n);
    }
    Histogram { bins }
}

/// Shifts every pixel so the image's histogram peak lands on the peak of `avg`.
pub fn align_peak(img: &GrayImage, avg: &Histogram) -> Result<GrayImage, PrepError> {
    let target = avg.peak().ok_or(PrepError::EmptyHistogram)?;
    // a valid image always has a peak
    let own = histogram(img).peak().unwrap_or(target);
    let delta = i16::from(target) - i16::from(own);
    if delta == 0 {
        return Ok(img.clone());
    }
    Ok(img.map(|p| (i16::from(p) + delta).clamp(0, 255) as u8))
}

/// Global histogram equalization: `out(v) = round(255 * CDF(v))`, half up.
pub fn equalize(img: &GrayImage) -> GrayImage {
    let hist = histogram(img);
    let total = hist.total();
    let mut lut = [0u8; 256];
    let mut cum = 0u64;
    for (v, &c) in hist.bins.iter().enumerate() {
        cum += c;
        lut[v] = ((2 * 255 * cum + total) / (2 * total)) as u8;
    }
    img.map(|p| lut[p as usize])
}

/// 3x3 median with edge replication at the borders.
pub fn median3x3(img: &GrayImage) -> GrayImage {
    let (w, h) = (img.width(), img.height());
    let mut out = Vec::with_capacity(w * h);
    let mut window = [0u8; 9];
    for y in 0..h as isize {
        for x in 0..w as isize {
            let mut k = 0;
            for dy in -1..=1 {
                for dx in -1..=1 {
                    window[k] = img.get_clamped(x + dx, y + dy);
                    k += 1;
                }
            }
            window.sort_unstable();
            out.push(window[4]);
        }
    }
    GrayImage::new(w, h, out).expect("same dimensions as input")
}

/// Otsu's threshold: the level maximizing between-class variance of the
/// split `p < t` / `p >= t`. Returns a value usable with `raster::threshold`.
pub fn otsu_threshold(img: &GrayImage) -> u8 {
    let hist = histogram(img);
    let total = hist.total() as f64;
    let sum_all: f64 = hist
        .bins
        .iter()
        .enumerate()
        .map(|(v, &c)| v as f64 * c as f64)
        .sum();
    let (mut w_b, mut sum_b) = (0.0f64, 0.0f64);
    let (mut best_t, mut best_var) = (0usize, -1.0f64);
    for t in 0..256 {
        w_b += hist.bins[t] as f64;
        if w_b == 0.0 {
            continue;
        }
        let w_f = total - w_b;
        if w_f == 0.0 {
            break;
        }
        sum_b += t as f64 * hist.bins[t] as f64;
        let m_b = sum_b / w_b;
        let m_f = (sum_all - sum_b) / w_f;
        let var = w_b * w_f * (m_b - m_f) * (m_b - m_f);
        if var > best_var {
            best_var = var;
            best_t = t;
        }
    }
    // pixels at or below best_t form the background class
    (best_t + 1).min(255) as u8
}

/// Binary structuring element with its origin at the center cell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructuringElement {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl StructuringElement {
    pub fn new(width: usize, height: usize, bits: Vec<bool>) -> Result<Self, PrepError> {
        if width.is_multiple_of(2) || height.is_multiple_of(2) || bits.len() != width * height {
            return Err(PrepError::EvenElement { width, height });
        }
        if !bits[(height / 2) * width + width / 2] {
            return Err(PrepError::OriginNotMember);
        }
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    /// Solid `size` x `size` square; `size` must be odd.
    pub fn square(size: usize) -> Result<Self, PrepError> {
        Self::new(size, size, vec![true; size * size])
    }

    /// Member offsets `(dx, dy)` relative to the origin.
    pub fn offsets(&self) -> Vec<(isize, isize)> {
        let (cx, cy) = ((self.width / 2) as isize, (self.height / 2) as isize);
        let mut out = Vec::new();
        for y in 0..self.height {
            for x in 0..self.width {
                if self.bits[y * self.width + x] {
                    out.push((x as isize - cx, y as isize - cy));
                }
            }
        }
        out
    }
}

/// Off-image pixels count as background.
pub fn erode(a: &BinaryImage, b: &StructuringElement) -> BinaryImage {
    let offsets = b.offsets();
    BinaryImage::from_fn(a.width(), a.height(), |x, y| {
        offsets
            .iter()
            .all(|&(dx, dy)| a.get_or_background(x as isize + dx, y as isize + dy))
    })
    .expect("same dimensions as input")
}

pub fn dilate(a: &BinaryImage, b: &StructuringElement) -> BinaryImage {
    let offsets = b.offsets();
    BinaryImage::from_fn(a.width(), a.height(), |x, y| {
        offsets
            .iter()
            .any(|&(dx, dy)| a.get_or_background(x as isize - dx, y as isize - dy))
    })
    .expect("same dimensions as input")
}

/// Erosion followed by dilation with the same element.
pub fn open(a: &BinaryImage, b: &StructuringElement) -> BinaryImage {
    dilate(&erode(a, b), b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::threshold;
    use proptest::prelude::*;

    fn img(w: usize, h: usize, px: &[u8]) -> GrayImage {
        GrayImage::new(w, h, px.to_vec()).unwrap()
    }

    fn square_mask(w: usize, h: usize, x0: usize, y0: usize, side: usize) -> BinaryImage {
        BinaryImage::from_fn(w, h, |x, y| {
            (x0..x0 + side).contains(&x) && (y0..y0 + side).contains(&y)
        })
        .unwrap()
    }

    #[test]
    fn histogram_counts() {
        let h = histogram(&GrayImage::filled(3, 3, 7).unwrap());
        assert_eq!(h.bins()[7], 9);
        assert_eq!(h.total(), 9);
        let h = histogram(&img(3, 1, &[0, 0, 255]));
        assert_eq!((h.bins()[0], h.bins()[255]), (2, 1));
    }

    #[test]
    fn average_histogram_cases() {
        assert_eq!(average_histogram(&[]), Err(PrepError::EmptyImageList));
        let a = img(4, 1, &[0, 0, 9, 9]);
        assert_eq!(
            average_histogram(std::slice::from_ref(&a)).unwrap(),
            histogram(&a)
        );
        assert_eq!(
            average_histogram(&[a.clone(), a.clone()]).unwrap(),
            histogram(&a)
        );
        let b = img(4, 1, &[0, 0, 0, 0]);
        assert_eq!(average_histogram(&[a, b]).unwrap().bins()[0], 3);
    }

    #[test]
    fn peak_breaks_ties_low() {
        let h = histogram(&img(4, 1, &[3, 3, 9, 9]));
        assert_eq!(h.peak(), Some(3));
        assert_eq!(Histogram::default().peak(), None);
    }

    #[test]
    fn align_peak_shifts_to_target() {
        // peak at 100, other pixels nearby
        let src = img(6, 1, &[100, 100, 100, 90, 110, 5]);
        let mut bins = [0u64; 256];
        bins[120] = 10;
        let out = align_peak(&src, &Histogram::from_bins(bins)).unwrap();
        assert_eq!(out.pixels(), &[120, 120, 120, 110, 130, 25]);
        assert_eq!(histogram(&out).peak(), Some(120));
    }

    #[test]
    fn align_peak_identity_and_clamp() {
        let src = img(3, 1, &[4, 4, 200]);
        assert_eq!(align_peak(&src, &histogram(&src)).unwrap(), src);

        let c = GrayImage::filled(2, 2, 200).unwrap();
        let mut bins = [0u64; 256];
        bins[255] = 1;
        let out = align_peak(&c, &Histogram::from_bins(bins)).unwrap();
        assert!(out.pixels().iter().all(|&p| p == 255));

        assert_eq!(
            align_peak(&c, &Histogram::default()),
            Err(PrepError::EmptyHistogram)
        );
    }

    #[test]
    fn equalize_constant_and_two_level() {
        let c = GrayImage::filled(3, 3, 40).unwrap();
        assert!(equalize(&c).pixels().iter().all(|&p| p == 255));
        // CDF(0) = 0.5 -> 127.5 rounds half up to 128
        let two = img(4, 1, &[0, 255, 0, 255]);
        assert_eq!(equalize(&two).pixels(), &[128, 255, 128, 255]);
    }

    #[test]
    fn median_cases() {
        let c = GrayImage::filled(4, 4, 7).unwrap();
        assert_eq!(median3x3(&c), c);
        let impulse = img(3, 3, &[0, 0, 0, 0, 255, 0, 0, 0, 0]);
        assert_eq!(median3x3(&impulse).get(1, 1), 0);
        let ramp = img(3, 3, &[1, 2, 3, 4, 5, 6, 7, 8, 9]);
        assert_eq!(median3x3(&ramp).get(1, 1), 5);
    }

    #[test]
    fn erosion_dilation_examples() {
        let se = StructuringElement::square(3).unwrap();
        let sq = square_mask(9, 9, 2, 2, 5);
        assert_eq!(erode(&sq, &se), square_mask(9, 9, 3, 3, 3));

        let dot = square_mask(7, 7, 3, 3, 1);
        assert_eq!(erode(&dot, &se).count_foreground(), 0);
        assert_eq!(dilate(&dot, &se), square_mask(7, 7, 2, 2, 3));

        let empty = BinaryImage::empty(5, 5).unwrap();
        assert_eq!(dilate(&empty, &se), empty);
    }

    #[test]
    fn opening_examples() {
        let se = StructuringElement::square(3).unwrap();
        let sq = square_mask(9, 9, 2, 2, 5);
        assert_eq!(open(&sq, &se), sq);
        let dot = square_mask(7, 7, 3, 3, 1);
        assert_eq!(open(&dot, &se).count_foreground(), 0);
    }

    #[test]
    fn asymmetric_element_reflects_on_dilation() {
        // members: origin and the cell to its right
        let se = StructuringElement::new(3, 1, vec![false, true, true]).unwrap();
        let dot = square_mask(5, 1, 2, 0, 1);
        assert_eq!(dilate(&dot, &se).bits(), &[false, false, true, true, false]);
        let pair = BinaryImage::new(5, 1, vec![false, false, true, true, false]).unwrap();
        assert_eq!(
            erode(&pair, &se).bits(),
            &[false, false, true, false, false]
        );
    }

    #[test]
    fn element_validation() {
        assert!(StructuringElement::square(2).is_err());
        assert_eq!(
            StructuringElement::new(3, 1, vec![true, false, true]),
            Err(PrepError::OriginNotMember)
        );
    }

    #[test]
    fn otsu_splits_bimodal() {
        let bimodal = img(6, 1, &[10, 12, 11, 200, 201, 199]);
        let t = otsu_threshold(&bimodal);
        let mask = threshold(&bimodal, t);
        assert_eq!(mask.bits(), &[false, false, false, true, true, true]);
    }

    #[test]
    fn histogram_csv_round_trip_and_errors() {
        let h = histogram(&img(4, 1, &[1, 1, 2, 250]));
        assert_eq!(Histogram::from_csv(&h.to_csv()).unwrap(), h);
        assert!(Histogram::from_csv("level,count\n300,1\n").is_err());
        assert!(Histogram::from_csv("1,1\n").is_err());
        assert!(matches!(
            Histogram::from_csv("level,count\n3,1\n3,2\n"),
            Err(PrepError::HistogramCsv { line: 3, .. })
        ));
    }

    fn arb_gray() -> impl Strategy<Value = GrayImage> {
        (1usize..10, 1usize..10).prop_flat_map(|(w, h)| {
            proptest::collection::vec(any::<u8>(), w * h)
                .prop_map(move |px| GrayImage::new(w, h, px).unwrap())
        })
    }

    proptest! {
        #[test]
        fn histogram_sums_to_pixel_count(im in arb_gray()) {
            prop_assert_eq!(histogram(&im).total(), (im.width() * im.height()) as u64);
        }

        #[test]
        fn equalize_preserves_order(im in arb_gray()) {
            let eq = equalize(&im);
            let (a, b) = (im.pixels(), eq.pixels());
            for i in 0..a.len() {
                for j in 0..a.len() {
                    if a[i] <= a[j] {
                        prop_assert!(b[i] <= b[j]);
                    }
                }
            }
        }

        #[test]
        fn median_only_uses_neighborhood_values(im in arb_gray()) {
            let out = median3x3(&im);
            for y in 0..im.height() {
                for x in 0..im.width() {
                    let v = out.get(x, y);
                    let mut found = false;
                    for dy in -1..=1isize {
                        for dx in -1..=1isize {
                            found |= im.get_clamped(x as isize + dx, y as isize + dy) == v;
                        }
                    }
                    prop_assert!(found);
                }
            }
        }

        #[test]
        fn align_to_own_histogram_is_identity(im in arb_gray()) {
            prop_assert_eq!(align_peak(&im, &histogram(&im)).unwrap(), im);
        }

        #[test]
        fn erosion_shrinks_dilation_grows(
            bits in proptest::collection::vec(any::<bool>(), 64)
        ) {
            let a = BinaryImage::new(8, 8, bits).unwrap();
            let se = StructuringElement::square(3).unwrap();
            prop_assert!(erode(&a, &se).is_subset_of(&a));
            prop_assert!(a.is_subset_of(&dilate(&a, &se)));
        }
    }
}
