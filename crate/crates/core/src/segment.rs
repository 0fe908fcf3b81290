//! Object extraction from edge maps, per-object texture features and their
//! encoding into hierarchical item codes, one transaction per image.
//!
//! Item codes are three decimal digits `F C B`: `F` is the feature index
//! (1..=6), `C` the coarse level (1 = lower half of the learned range,
//! 2 = upper half) and `B` the fine bin within that half (1..=2). The coarse
//! view of a code replaces `B` with 0, so `F C 0` never collides with a fine
//! code.

use crate::edge::{EdgeMap, NEIGHBORS_8};
use crate::label::ClassLabel;
use crate::prep::{dilate, StructuringElement};
use crate::raster::{BinaryImage, GrayImage};
use serde::{Deserialize, Serialize};
use std::collections::{HashSet, VecDeque};
use std::fmt::Write as _;
use thiserror::Error;

/// Reserved item for images without any extracted object.
pub const NO_OBJECT_ITEM: u32 = 999;

pub const FEATURE_COUNT: usize = 6;

pub const FEATURE_NAMES: [&str; FEATURE_COUNT] = [
    "area",
    "mean_intensity",
    "glcm_contrast",
    "glcm_energy",
    "glcm_homogeneity",
    "glcm_entropy",
];

/// Gray levels used for co-occurrence statistics.
const GLCM_LEVELS: usize = 8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SegmentError {
    #[error("edge map is {edges:?} but image is {image:?}")]
    DimensionMismatch {
        edges: (usize, usize),
        image: (usize, usize),
    },
    #[error("region has no horizontally adjacent pixel pair; co-occurrence matrix undefined")]
    GlcmUndefined,
    #[error("quantization model has {0} feature ranges, expected {FEATURE_COUNT}")]
    MissingFeatureRange(usize),
    #[error("invalid transaction id {0:?}")]
    BadTid(String),
    #[error("duplicate transaction id {0:?}")]
    DuplicateTid(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("TDB CSV line {line}: {kind}")]
pub struct TdbParseError {
    pub line: usize,
    pub kind: TdbErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TdbErrorKind {
    #[error("expected 3 comma-separated fields, found {0}")]
    FieldCount(usize),
    #[error("empty or malformed transaction id")]
    BadTid,
    #[error("duplicate transaction id {0:?}")]
    DuplicateTid(String),
    #[error("{0}")]
    BadLabel(String),
    #[error("item {0:?} is not a positive integer")]
    BadItem(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BoundingBox {
    pub min_x: usize,
    pub min_y: usize,
    pub max_x: usize,
    pub max_y: usize,
}

/// An 8-connected set of pixels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Region {
    /// `(x, y)` coordinates in row-major order.
    pub pixels: Vec<(usize, usize)>,
    pub bbox: BoundingBox,
}

impl Region {
    pub fn area(&self) -> usize {
        self.pixels.len()
    }
}

/// Fills background components that do not touch the image border.
/// Background connectivity is 4, the dual of 8-connected foreground.
pub fn fill_holes(mask: &BinaryImage) -> BinaryImage {
    let (w, h) = (mask.width(), mask.height());
    let mut outside = vec![false; w * h];
    let mut queue = VecDeque::new();
    let seed = |x: usize, y: usize, queue: &mut VecDeque<usize>, outside: &mut Vec<bool>| {
        let i = y * w + x;
        if !mask.get(x, y) && !outside[i] {
            outside[i] = true;
            queue.push_back(i);
        }
    };
    for x in 0..w {
        seed(x, 0, &mut queue, &mut outside);
        seed(x, h - 1, &mut queue, &mut outside);
    }
    for y in 0..h {
        seed(0, y, &mut queue, &mut outside);
        seed(w - 1, y, &mut queue, &mut outside);
    }
    while let Some(i) = queue.pop_front() {
        let (x, y) = (i % w, i / w);
        let mut visit = |nx: usize, ny: usize| {
            let j = ny * w + nx;
            if !mask.get(nx, ny) && !outside[j] {
                outside[j] = true;
                queue.push_back(j);
            }
        };
        if x > 0 {
            visit(x - 1, y);
        }
        if x + 1 < w {
            visit(x + 1, y);
        }
        if y > 0 {
            visit(x, y - 1);
        }
        if y + 1 < h {
            visit(x, y + 1);
        }
    }
    BinaryImage::new(w, h, outside.into_iter().map(|o| !o).collect()).expect("same dimensions")
}

/// 8-connected foreground components, each sorted row-major, in scan order
/// of their first pixel.
pub fn connected_components(mask: &BinaryImage) -> Vec<Region> {
    let (w, h) = (mask.width(), mask.height());
    let mut seen = vec![false; w * h];
    let mut regions = Vec::new();
    for start in 0..w * h {
        if seen[start] || !mask.bits()[start] {
            continue;
        }
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        let mut pixels = Vec::new();
        while let Some(i) = queue.pop_front() {
            let (x, y) = (i % w, i / w);
            pixels.push((x, y));
            for (dx, dy) in NEIGHBORS_8 {
                let (nx, ny) = (x as isize + dx, y as isize + dy);
                if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                    continue;
                }
                let j = ny as usize * w + nx as usize;
                if !seen[j] && mask.bits()[j] {
                    seen[j] = true;
                    queue.push_back(j);
                }
            }
        }
        pixels.sort_unstable_by_key(|&(x, y)| (y, x));
        let bbox = BoundingBox {
            min_x: pixels.iter().map(|p| p.0).min().unwrap_or(0),
            min_y: pixels[0].1,
            max_x: pixels.iter().map(|p| p.0).max().unwrap_or(0),
            max_y: pixels[pixels.len() - 1].1,
        };
        regions.push(Region { pixels, bbox });
    }
    regions
}

/// Closes one-pixel edge gaps with a 3x3 dilation, fills enclosed holes and
/// returns the 8-connected objects of at least `min_area` pixels, ordered by
/// top-left bounding corner `(y, x)` and then area.
pub fn extract_regions(
    edges: &EdgeMap,
    img: &GrayImage,
    min_area: usize,
) -> Result<Vec<Region>, SegmentError> {
    check_dims(edges, img)?;
    let se = StructuringElement::square(3).expect("3 is odd");
    let closed = dilate(&edges.edges, &se);
    let filled = fill_holes(&closed);
    let mut regions: Vec<Region> = connected_components(&filled)
        .into_iter()
        .filter(|r| r.area() >= min_area)
        .collect();
    regions.sort_by_key(|r| (r.bbox.min_y, r.bbox.min_x, r.area()));
    Ok(regions)
}

fn check_dims(edges: &EdgeMap, img: &GrayImage) -> Result<(), SegmentError> {
    if edges.width() != img.width() || edges.height() != img.height() {
        return Err(SegmentError::DimensionMismatch {
            edges: (edges.width(), edges.height()),
            image: (img.width(), img.height()),
        });
    }
    Ok(())
}

/// Area, mean intensity and four co-occurrence statistics of one object.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub area: f64,
    pub mean_intensity: f64,
    pub glcm_contrast: f64,
    pub glcm_energy: f64,
    pub glcm_homogeneity: f64,
    pub glcm_entropy: f64,
}

impl FeatureVector {
    /// Values in item-code feature order (index 0 is feature 1).
    pub fn values(&self) -> [f64; FEATURE_COUNT] {
        [
            self.area,
            self.mean_intensity,
            self.glcm_contrast,
            self.glcm_energy,
            self.glcm_homogeneity,
            self.glcm_entropy,
        ]
    }
}

/// Symmetric co-occurrence statistics at offset `(1, 0)` over pixel pairs
/// inside the region, on intensities quantized to 8 levels.
pub fn glcm_features(img: &GrayImage, r: &Region) -> Result<FeatureVector, SegmentError> {
    let members: HashSet<(usize, usize)> = r.pixels.iter().copied().collect();
    let mut counts = [[0u64; GLCM_LEVELS]; GLCM_LEVELS];
    let mut pairs = 0u64;
    let mut sum = 0u64;
    for &(x, y) in &r.pixels {
        let v = img.get(x, y);
        sum += u64::from(v);
        if members.contains(&(x + 1, y)) {
            let a = usize::from(v >> 5);
            let b = usize::from(img.get(x + 1, y) >> 5);
            counts[a][b] += 1;
            counts[b][a] += 1;
            pairs += 2;
        }
    }
    if pairs == 0 {
        return Err(SegmentError::GlcmUndefined);
    }
    let (mut contrast, mut energy, mut homogeneity, mut entropy) = (0.0, 0.0, 0.0, 0.0);
    for (i, row) in counts.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let p = c as f64 / pairs as f64;
            let d = i.abs_diff(j) as f64;
            contrast += d * d * p;
            energy += p * p;
            homogeneity += p / (1.0 + d);
            entropy -= p * p.log2();
        }
    }
    Ok(FeatureVector {
        area: r.area() as f64,
        mean_intensity: sum as f64 / r.area() as f64,
        glcm_contrast: contrast,
        glcm_energy: energy,
        glcm_homogeneity: homogeneity,
        glcm_entropy: entropy.max(0.0),
    })
}

/// Hierarchical item code: feature, coarse half and fine bin within the half.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ItemCode {
    feature: u8,
    coarse: u8,
    fine: u8,
}

impl ItemCode {
    /// `feature` in 1..=6, `bin` in 1..=4.
    pub fn from_bin(feature: u8, bin: u8) -> Option<Self> {
        if !(1..=FEATURE_COUNT as u8).contains(&feature) || !(1..=4).contains(&bin) {
            return None;
        }
        Some(Self {
            feature,
            coarse: if bin <= 2 { 1 } else { 2 },
            fine: (bin - 1) % 2 + 1,
        })
    }

    pub fn code(self) -> u32 {
        100 * u32::from(self.feature) + 10 * u32::from(self.coarse) + u32::from(self.fine)
    }

    pub fn decode(code: u32) -> Option<Self> {
        let (feature, coarse, fine) = (
            (code / 100) as u8,
            ((code / 10) % 10) as u8,
            (code % 10) as u8,
        );
        let valid = (100..1000).contains(&code)
            && (1..=FEATURE_COUNT as u8).contains(&feature)
            && (1..=2).contains(&coarse)
            && (1..=2).contains(&fine);
        valid.then_some(Self {
            feature,
            coarse,
            fine,
        })
    }

    pub fn feature(self) -> u8 {
        self.feature
    }

    pub fn coarse(self) -> u8 {
        self.coarse
    }

    pub fn fine(self) -> u8 {
        self.fine
    }

    /// Fine bin over the whole range, 1..=4.
    pub fn bin(self) -> u8 {
        (self.coarse - 1) * 2 + self.fine
    }

    /// Code of the coarse (upper) hierarchy level: `F C 0`.
    pub fn coarse_code(self) -> u32 {
        100 * u32::from(self.feature) + 10 * u32::from(self.coarse)
    }
}

/// Maps an item onto the coarse hierarchy level; items that are not fine
/// feature codes (class items, the no-object sentinel) map to themselves.
pub fn coarse_item(item: u32) -> u32 {
    ItemCode::decode(item).map_or(item, ItemCode::coarse_code)
}

/// Items plus their coarse-level codes, sorted and deduplicated.
pub fn with_coarse_items(items: &[u32]) -> Vec<u32> {
    let mut out: Vec<u32> = items.iter().flat_map(|&i| [i, coarse_item(i)]).collect();
    out.sort_unstable();
    out.dedup();
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureRange {
    pub min: f64,
    pub max: f64,
}

impl FeatureRange {
    /// Equal-width bin 1..=4 of `[min, max]`; out-of-range values clamp and
    /// the top bin is right-closed.
    pub fn bin(&self, value: f64) -> u8 {
        if self.max.partial_cmp(&self.min) != Some(std::cmp::Ordering::Greater) {
            return if value <= self.min { 1 } else { 4 };
        }
        let t = ((value - self.min) / (self.max - self.min)).clamp(0.0, 1.0);
        ((t * 4.0).floor() as u8 + 1).min(4)
    }
}

/// Per-feature ranges learned from training objects.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantizationModel {
    pub ranges: Vec<FeatureRange>,
}

impl QuantizationModel {
    /// Min/max of every feature over `features`; degenerate `[0, 0]` ranges
    /// when there are none.
    pub fn fit(features: &[FeatureVector]) -> Self {
        let ranges = (0..FEATURE_COUNT)
            .map(|f| {
                let mut it = features.iter().map(|fv| fv.values()[f]);
                match it.next() {
                    None => FeatureRange { min: 0.0, max: 0.0 },
                    Some(first) => it.fold(
                        FeatureRange {
                            min: first,
                            max: first,
                        },
                        |r, v| FeatureRange {
                            min: r.min.min(v),
                            max: r.max.max(v),
                        },
                    ),
                }
            })
            .collect();
        Self { ranges }
    }
}

/// One item code per feature, ascending.
pub fn quantize(fv: &FeatureVector, qm: &QuantizationModel) -> Result<Vec<u32>, SegmentError> {
    if qm.ranges.len() != FEATURE_COUNT {
        return Err(SegmentError::MissingFeatureRange(qm.ranges.len()));
    }
    Ok(fv
        .values()
        .iter()
        .zip(&qm.ranges)
        .enumerate()
        .map(|(i, (&v, range))| {
            ItemCode::from_bin(i as u8 + 1, range.bin(v))
                .expect("feature index and bin in range")
                .code()
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transaction {
    pub tid: String,
    /// Strictly ascending.
    pub items: Vec<u32>,
    pub label: Option<ClassLabel>,
}

impl Transaction {
    /// Sorts and deduplicates `items`.
    pub fn new(tid: impl Into<String>, mut items: Vec<u32>, label: Option<ClassLabel>) -> Self {
        items.sort_unstable();
        items.dedup();
        Self {
            tid: tid.into(),
            items,
            label,
        }
    }
}

/// Features of every object with a defined co-occurrence matrix.
pub fn image_features(
    img: &GrayImage,
    edges: &EdgeMap,
    min_area: usize,
) -> Result<Vec<FeatureVector>, SegmentError> {
    let regions = extract_regions(edges, img, min_area)?;
    let mut out = Vec::with_capacity(regions.len());
    for r in &regions {
        match glcm_features(img, r) {
            Ok(fv) => out.push(fv),
            Err(SegmentError::GlcmUndefined) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// Union of the quantized codes of all objects; `{999}` when there are none.
pub fn features_to_transaction(
    features: &[FeatureVector],
    qm: &QuantizationModel,
    tid: impl Into<String>,
    label: Option<ClassLabel>,
) -> Result<Transaction, SegmentError> {
    let mut items = Vec::new();
    for fv in features {
        items.extend(quantize(fv, qm)?);
    }
    if items.is_empty() {
        items.push(NO_OBJECT_ITEM);
    }
    Ok(Transaction::new(tid, items, label))
}

pub fn image_to_transaction(
    img: &GrayImage,
    edges: &EdgeMap,
    qm: &QuantizationModel,
    min_area: usize,
    tid: impl Into<String>,
    label: Option<ClassLabel>,
) -> Result<Transaction, SegmentError> {
    let features = image_features(img, edges, min_area)?;
    features_to_transaction(&features, qm, tid, label)
}

fn valid_tid(tid: &str) -> bool {
    !tid.is_empty()
        && !tid.starts_with('#')
        && tid.trim() == tid
        && !tid.contains([',', '\n', '\r'])
}

/// Transactions with unique ids, in insertion order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TransactionDB {
    transactions: Vec<Transaction>,
}

impl TransactionDB {
    pub fn new(transactions: Vec<Transaction>) -> Result<Self, SegmentError> {
        let mut db = Self::default();
        for t in transactions {
            db.push(t)?;
        }
        Ok(db)
    }

    pub fn push(&mut self, t: Transaction) -> Result<(), SegmentError> {
        if !valid_tid(&t.tid) {
            return Err(SegmentError::BadTid(t.tid));
        }
        if self.transactions.iter().any(|o| o.tid == t.tid) {
            return Err(SegmentError::DuplicateTid(t.tid));
        }
        self.transactions.push(t);
        Ok(())
    }

    pub fn transactions(&self) -> &[Transaction] {
        &self.transactions
    }

    pub fn len(&self) -> usize {
        self.transactions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transactions.is_empty()
    }

    /// Sorted item universe.
    pub fn items(&self) -> Vec<u32> {
        let mut all: Vec<u32> = self
            .transactions
            .iter()
            .flat_map(|t| t.items.iter().copied())
            .collect();
        all.sort_unstable();
        all.dedup();
        all
    }

    pub fn item_lists(&self) -> Vec<Vec<u32>> {
        self.transactions.iter().map(|t| t.items.clone()).collect()
    }

    pub fn is_labeled(&self) -> bool {
        self.transactions.iter().any(|t| t.label.is_some())
    }
}

pub const TDB_HEADER: &str = "tid,label,items";

/// `tid,label,item;item;...` per line after a header row. Blank lines and
/// lines starting with `#` are skipped; the header is optional on read.
pub fn read_tdb_csv(bytes: &[u8]) -> Result<TransactionDB, TdbParseError> {
    let text = String::from_utf8_lossy(bytes);
    let mut transactions = Vec::new();
    let mut tids = HashSet::new();
    let mut first = true;
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if std::mem::take(&mut first) && line == TDB_HEADER {
            continue;
        }
        let err = |kind| TdbParseError {
            line: line_no,
            kind,
        };
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(err(TdbErrorKind::FieldCount(fields.len())));
        }
        let tid = fields[0];
        if !valid_tid(tid) {
            return Err(err(TdbErrorKind::BadTid));
        }
        if !tids.insert(tid.to_string()) {
            return Err(err(TdbErrorKind::DuplicateTid(tid.to_string())));
        }
        let label = match fields[1] {
            "" => None,
            s => Some(
                s.parse::<ClassLabel>()
                    .map_err(|e| err(TdbErrorKind::BadLabel(e.to_string())))?,
            ),
        };
        let mut items = Vec::new();
        if !fields[2].is_empty() {
            for raw in fields[2].split(';') {
                match raw.parse::<u32>() {
                    Ok(v) if v > 0 && raw.bytes().all(|b| b.is_ascii_digit()) => items.push(v),
                    _ => return Err(err(TdbErrorKind::BadItem(raw.to_string()))),
                }
            }
        }
        transactions.push(Transaction::new(tid, items, label));
    }
    Ok(TransactionDB { transactions })
}

pub fn write_tdb_csv(db: &TransactionDB) -> Vec<u8> {
    let mut out = String::from(TDB_HEADER);
    out.push('\n');
    for t in &db.transactions {
        let label = t.label.map_or("", ClassLabel::as_str);
        let _ = write!(out, "{},{},", t.tid, label);
        for (k, item) in t.items.iter().enumerate() {
            if k > 0 {
                out.push(';');
            }
            let _ = write!(out, "{item}");
        }
        out.push('\n');
    }
    out.into_bytes()
}
