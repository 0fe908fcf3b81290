//! Per-image stages shared by the subcommands.

use crate::config::PipelineConfig;
use crate::error::{read_file, CliError};
use crate::manifest::{Manifest, ManifestEntry, Split};
use imgmine_core::edge;
use imgmine_core::prep::{self, Histogram, StructuringElement};
use imgmine_core::raster::{read_pgm, threshold, GrayImage};
use imgmine_core::segment::{self, FeatureVector, QuantizationModel, Transaction, TransactionDB};
use rayon::prelude::*;
use std::path::Path;

/// Intermediate images of [`preprocess`], in order.
#[derive(Debug, Clone)]
pub struct PreprocessStages {
    pub equalized: GrayImage,
    pub aligned: GrayImage,
    pub filtered: GrayImage,
    /// Otsu foreground after a 3x3 opening, rendered 0/255.
    pub mask: GrayImage,
}

impl PreprocessStages {
    pub fn output(&self) -> &GrayImage {
        &self.filtered
    }

    pub fn numbered(&self) -> [(&'static str, &GrayImage); 4] {
        [
            ("stage1_equalized.pgm", &self.equalized),
            ("stage2_aligned.pgm", &self.aligned),
            ("stage3_median.pgm", &self.filtered),
            ("stage4_opened_mask.pgm", &self.mask),
        ]
    }
}

pub fn preprocess(img: &GrayImage, avg: Option<&Histogram>) -> Result<PreprocessStages, CliError> {
    let equalized = prep::equalize(img);
    let aligned = match avg {
        Some(h) => prep::align_peak(&equalized, h).map_err(CliError::input)?,
        None => equalized.clone(),
    };
    let filtered = prep::median3x3(&aligned);
    let se = StructuringElement::square(3).expect("odd size");
    let mask = prep::open(&threshold(&filtered, prep::otsu_threshold(&filtered)), &se).to_gray();
    Ok(PreprocessStages {
        equalized,
        aligned,
        filtered,
        mask,
    })
}

pub fn load_pgm(path: &Path) -> Result<GrayImage, CliError> {
    let bytes = read_file(path)?;
    read_pgm(&bytes).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn load_histogram(path: &Path) -> Result<Histogram, CliError> {
    let text = crate::error::read_text(path)?;
    Histogram::from_csv(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// Object features of one image after preprocessing and edge detection.
pub fn image_features(
    img: &GrayImage,
    cfg: &PipelineConfig,
    avg: Option<&Histogram>,
) -> Result<Vec<FeatureVector>, CliError> {
    let stages = preprocess(img, avg)?;
    let edges = edge::canny(stages.output(), &cfg.canny_params()).map_err(CliError::input)?;
    segment::image_features(stages.output(), &edges, cfg.min_area).map_err(CliError::input)
}

/// Runs `f` over `items` on `workers` threads (all cores when `None`),
/// returning results in input order.
pub fn fan_out<T: Sync, R: Send>(
    items: &[T],
    workers: Option<usize>,
    f: impl Fn(&T) -> R + Sync + Send,
) -> Result<Vec<R>, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        builder = builder.num_threads(n.max(1));
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Input(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(|| items.par_iter().map(&f).collect()))
}

/// Features of every manifest entry, or the error that stopped it.
pub type EntryFeatures<'a> = (&'a ManifestEntry, Result<Vec<FeatureVector>, CliError>);

pub fn manifest_features<'a>(
    manifest: &'a Manifest,
    entries: &[&'a ManifestEntry],
    cfg: &PipelineConfig,
    avg: Option<&Histogram>,
    workers: Option<usize>,
) -> Result<Vec<EntryFeatures<'a>>, CliError> {
    fan_out(entries, workers, |e| {
        let r = load_pgm(&manifest.resolve(e)).and_then(|img| image_features(&img, cfg, avg));
        (*e, r)
    })
}

/// Result of turning a manifest into a transaction database.
pub struct FeatureRun {
    pub db: TransactionDB,
    pub quantization: QuantizationModel,
    pub failures: Vec<(String, CliError)>,
    pub total: usize,
}

/// Quantization ranges come from training objects only; training rows keep
/// their labels and test rows are written unlabeled.
pub fn build_tdb(
    manifest: &Manifest,
    cfg: &PipelineConfig,
    avg: Option<&Histogram>,
    workers: Option<usize>,
) -> Result<FeatureRun, CliError> {
    let entries: Vec<&ManifestEntry> = manifest.entries.iter().collect();
    let results = manifest_features(manifest, &entries, cfg, avg, workers)?;
    let train_features: Vec<FeatureVector> = results
        .iter()
        .filter(|(e, _)| e.split == Split::Train)
        .filter_map(|(_, r)| r.as_ref().ok())
        .flatten()
        .cloned()
        .collect();
    let quantization = QuantizationModel::fit(&train_features);

    let mut db = TransactionDB::default();
    let mut failures = Vec::new();
    for (e, r) in results {
        match r {
            Ok(features) => {
                let label = if e.split == Split::Train {
                    e.label
                } else {
                    None
                };
                let t = segment::features_to_transaction(
                    &features,
                    &quantization,
                    e.path.clone(),
                    label,
                )
                .map_err(CliError::input)?;
                db.push(t).map_err(CliError::input)?;
            }
            Err(err) => failures.push((e.path.clone(), err)),
        }
    }
    Ok(FeatureRun {
        db,
        quantization,
        failures,
        total: manifest.entries.len(),
    })
}

pub fn report_failures(failures: &[(String, CliError)]) {
    for (path, err) in failures {
        eprintln!("warning: skipped {path}: {err}");
    }
}

/// Transaction of a single image under an existing quantization.
pub fn image_transaction(
    img: &GrayImage,
    cfg: &PipelineConfig,
    avg: Option<&Histogram>,
    qm: &QuantizationModel,
    tid: &str,
) -> Result<Transaction, CliError> {
    let features = image_features(img, cfg, avg)?;
    segment::features_to_transaction(&features, qm, tid, None).map_err(CliError::input)
}
