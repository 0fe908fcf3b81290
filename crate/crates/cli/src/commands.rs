use crate::config::PipelineConfig;
use crate::error::{read_file, read_text, write_file, CliError};
use crate::manifest::{Manifest, Split};
use crate::pipeline::{self, FeatureRun};
use crate::synth::{self, SynthParams};
use clap::{Args, Parser, Subcommand};
use imgmine_core::fpm::{self, Item};
use imgmine_core::harc::{self, HarcError, HarcModel};
use imgmine_core::label::ClassLabel;
use imgmine_core::metrics::{MultiClassMatrix, Report};
use imgmine_core::prep::Histogram;
use imgmine_core::raster::write_pgm;
use imgmine_core::segment::{
    coarse_item, read_tdb_csv, write_tdb_csv, QuantizationModel, Transaction, TransactionDB,
};
use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

#[derive(Debug, Parser)]
#[command(
    name = "imgmine",
    version,
    about = "Mine and classify grayscale scan images"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Equalize, align, median-filter and mask one PGM image
    Preprocess(PreprocessArgs),
    /// Build a transaction database from a manifest of images
    Features(FeaturesArgs),
    /// Mine maximal frequent itemsets (and optionally class rules)
    Mine(MineArgs),
    /// Train a classifier model
    Train(TrainArgs),
    /// Classify images or transactions with a trained model
    Classify(ClassifyArgs),
    /// Score predictions against manifest labels
    Evaluate(EvaluateArgs),
    /// Generate a seeded synthetic corpus
    Synth(SynthArgs),
}

/// Configuration file plus per-key overrides.
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// JSON configuration file
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Low hysteresis threshold
    #[arg(long)]
    pub low: Option<f64>,
    /// High hysteresis threshold
    #[arg(long)]
    pub high: Option<f64>,
    #[arg(long)]
    pub min_area: Option<usize>,
    /// Minimum support as a fraction of transactions
    #[arg(long)]
    pub minsup: Option<f64>,
    /// Minimum rule confidence
    #[arg(long)]
    pub minconf: Option<f64>,
    #[arg(long)]
    pub max_attributes: Option<usize>,
}

impl ConfigArgs {
    pub fn resolve(&self) -> Result<PipelineConfig, CliError> {
        let mut c = match &self.config {
            Some(p) => PipelineConfig::load(p)?,
            None => PipelineConfig::default(),
        };
        macro_rules! apply {
            ($($flag:ident => $field:ident),*) => {
                $(if let Some(v) = self.$flag { c.$field = v; })*
            };
        }
        apply!(seed => seed, sigma => sigma, low => low_threshold, high => high_threshold,
               min_area => min_area, minsup => minsup, minconf => minconf,
               max_attributes => max_attributes);
        c.validate()?;
        Ok(c)
    }
}

#[derive(Debug, Args)]
pub struct PreprocessArgs {
    pub input: PathBuf,
    pub output: PathBuf,
    /// Reference histogram (`level,count` CSV) for peak alignment
    #[arg(long)]
    pub avg_hist: Option<PathBuf>,
    /// Write the four intermediate stages here
    #[arg(long)]
    pub dump_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FeaturesArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Transaction database CSV to write
    #[arg(long)]
    pub output: PathBuf,
    /// Also write the learned quantization ranges as JSON
    #[arg(long)]
    pub ranges_out: Option<PathBuf>,
    #[arg(long)]
    pub avg_hist: Option<PathBuf>,
    #[arg(long)]
    pub workers: Option<usize>,
    #[command(flatten)]
    pub config: ConfigArgs,
}

#[derive(Debug, Args)]
pub struct MineArgs {
    #[arg(long)]
    pub tdb: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Absolute minimum support; overrides the fractional minsup
    #[arg(long)]
    pub minsup_count: Option<u64>,
    /// Also write class association rules (needs labels)
    #[arg(long)]
    pub rules: bool,
    #[command(flatten)]
    pub config: ConfigArgs,
}

#[derive(Debug, Args)]
#[group(id = "train_source", required = true, multiple = false, args = ["tdb", "manifest"])]
pub struct TrainArgs {
    #[arg(long)]
    pub tdb: Option<PathBuf>,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Quantization ranges to embed when training from a TDB
    #[arg(long, requires = "tdb")]
    pub ranges: Option<PathBuf>,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long)]
    pub avg_hist: Option<PathBuf>,
    #[arg(long)]
    pub workers: Option<usize>,
    #[command(flatten)]
    pub config: ConfigArgs,
}

#[derive(Debug, Args)]
#[group(id = "classify_source", required = true, multiple = false, args = ["manifest", "tdb", "image"])]
pub struct ClassifyArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long)]
    pub tdb: Option<PathBuf>,
    #[arg(long)]
    pub image: Option<PathBuf>,
    /// Only classify manifest rows of this split
    #[arg(long, value_enum)]
    pub split: Option<Split>,
    /// Predictions CSV; standard output when absent
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub avg_hist: Option<PathBuf>,
    #[arg(long)]
    pub workers: Option<usize>,
    #[command(flatten)]
    pub config: ConfigArgs,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub predictions: PathBuf,
    #[arg(long)]
    pub manifest: PathBuf,
    /// Metrics CSV to write
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Confusion matrix CSV to write
    #[arg(long)]
    pub matrix_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 20)]
    pub per_class: usize,
    #[arg(long, default_value_t = 64)]
    pub size: usize,
    #[arg(long, default_value_t = 0.7)]
    pub train_fraction: f64,
    #[command(flatten)]
    pub config: ConfigArgs,
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Preprocess(a) => preprocess(a),
        Command::Features(a) => features(a),
        Command::Mine(a) => mine(a),
        Command::Train(a) => train(a),
        Command::Classify(a) => classify(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Synth(a) => synth(a),
    }
}

fn optional_histogram(path: &Option<PathBuf>) -> Result<Option<Histogram>, CliError> {
    path.as_deref().map(pipeline::load_histogram).transpose()
}

fn finish_partial(failures: usize, total: usize) -> Result<(), CliError> {
    if failures == 0 {
        Ok(())
    } else {
        Err(CliError::Partial {
            failed: failures,
            total,
        })
    }
}

fn preprocess(a: PreprocessArgs) -> Result<(), CliError> {
    let img = pipeline::load_pgm(&a.input)?;
    let avg = optional_histogram(&a.avg_hist)?;
    let stages = pipeline::preprocess(&img, avg.as_ref())?;
    write_file(&a.output, write_pgm(stages.output()))?;
    if let Some(dir) = &a.dump_dir {
        for (name, img) in stages.numbered() {
            write_file(&dir.join(name), write_pgm(img))?;
        }
    }
    Ok(())
}

fn feature_run(
    manifest: &Path,
    config: &PipelineConfig,
    avg_hist: &Option<PathBuf>,
    workers: Option<usize>,
) -> Result<FeatureRun, CliError> {
    let manifest = Manifest::load(manifest)?;
    let avg = optional_histogram(avg_hist)?;
    let run = pipeline::build_tdb(&manifest, config, avg.as_ref(), workers)?;
    pipeline::report_failures(&run.failures);
    Ok(run)
}

fn features(a: FeaturesArgs) -> Result<(), CliError> {
    let cfg = a.config.resolve()?;
    let run = feature_run(&a.manifest, &cfg, &a.avg_hist, a.workers)?;
    write_file(&a.output, write_tdb_csv(&run.db))?;
    if let Some(p) = &a.ranges_out {
        let mut json = serde_json::to_string_pretty(&run.quantization).expect("ranges serialize");
        json.push('\n');
        write_file(p, json)?;
    }
    finish_partial(run.failures.len(), run.total)
}

fn load_tdb(path: &Path) -> Result<TransactionDB, CliError> {
    read_tdb_csv(&read_file(path)?).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn coarse_level(lists: &[Vec<Item>]) -> Vec<Vec<Item>> {
    lists
        .iter()
        .map(|t| {
            let mut v: Vec<Item> = t.iter().map(|&i| coarse_item(i)).collect();
            v.sort_unstable();
            v.dedup();
            v
        })
        .collect()
}

fn mine(a: MineArgs) -> Result<(), CliError> {
    let cfg = a.config.resolve()?;
    let db = load_tdb(&a.tdb)?;
    let fine = db.item_lists();
    let n = fine.len();
    let count = a
        .minsup_count
        .unwrap_or_else(|| fpm::minsup_count(cfg.minsup, n));
    if count == 0 {
        return Err(CliError::Input("minsup-count must be at least 1".into()));
    }
    for (level, lists) in [(1, fine.clone()), (2, coarse_level(&fine))] {
        let out = fpm::mine_maximal(&lists, count);
        write_file(
            &a.out_dir.join(format!("mfi_level{level}.csv")),
            fpm::itemsets_to_csv(&out.mfi),
        )?;
    }
    if a.rules {
        let labeled: Vec<(&Transaction, ClassLabel)> = db
            .transactions()
            .iter()
            .filter_map(|t| t.label.map(|c| (t, c)))
            .collect();
        if labeled.is_empty() && !db.is_empty() {
            return Err(CliError::Input(
                "rule mining needs class labels, but the TDB has none".into(),
            ));
        }
        let mut params = cfg.train_params();
        if let Some(c) = a.minsup_count {
            params.minsup = (c as f64 / labeled.len().max(1) as f64).min(1.0);
        }
        let rules = if labeled.is_empty() {
            Vec::new()
        } else {
            harc::mine_hierarchical_rules(&labeled, &params).map_err(CliError::input)?
        };
        write_file(&a.out_dir.join("rules.csv"), fpm::rules_to_csv(&rules))?;
    }
    Ok(())
}

fn train_error(e: HarcError) -> CliError {
    CliError::Input(e.to_string())
}

fn train(a: TrainArgs) -> Result<(), CliError> {
    let cfg = a.config.resolve()?;
    let (db, quantization, failures, total) = match (&a.tdb, &a.manifest) {
        (Some(tdb), _) => {
            let q = match &a.ranges {
                Some(p) => Some(
                    serde_json::from_str::<QuantizationModel>(&read_text(p)?)
                        .map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?,
                ),
                None => None,
            };
            (load_tdb(tdb)?, q, 0, 0)
        }
        (None, Some(manifest)) => {
            let run = feature_run(manifest, &cfg, &a.avg_hist, a.workers)?;
            (
                run.db,
                Some(run.quantization),
                run.failures.len(),
                run.total,
            )
        }
        (None, None) => unreachable!("clap requires one source"),
    };
    let mut model = harc::train(&db, &cfg.train_params()).map_err(train_error)?;
    if model.rules.is_empty() {
        eprintln!(
            "warning: no rules passed the thresholds; the model always predicts {}",
            model.default_class
        );
    }
    model.quantization = quantization;
    write_file(&a.output, model.to_json())?;
    finish_partial(failures, total)
}

fn load_model(path: &Path) -> Result<HarcModel, CliError> {
    let text = read_text(path)?;
    HarcModel::from_json(&text).map_err(|e| match e {
        HarcError::VersionMismatch { .. } => CliError::Model(format!("{}: {e}", path.display())),
        other => CliError::Input(format!("{}: {other}", path.display())),
    })
}

fn require_quantization(model: &HarcModel) -> Result<&QuantizationModel, CliError> {
    model.quantization.as_ref().ok_or_else(|| {
        CliError::Model(
            "model carries no quantization ranges, so it can only classify a TDB".into(),
        )
    })
}

const PREDICTIONS_HEADER: &str = "path,predicted,fired_rule_count";

fn classify(a: ClassifyArgs) -> Result<(), CliError> {
    let cfg = a.config.resolve()?;
    let model = load_model(&a.model)?;
    let avg = optional_histogram(&a.avg_hist)?;
    let mut rows: Vec<(String, harc::Classification)> = Vec::new();
    let mut failures = Vec::new();
    let mut total = 0;

    if let Some(tdb) = &a.tdb {
        for t in load_tdb(tdb)?.transactions() {
            rows.push((t.tid.clone(), harc::classify(&model, t)));
        }
    } else if let Some(image) = &a.image {
        let qm = require_quantization(&model)?;
        let img = pipeline::load_pgm(image)?;
        let tid = image.display().to_string();
        let t = pipeline::image_transaction(&img, &cfg, avg.as_ref(), qm, &tid)?;
        rows.push((tid, harc::classify(&model, &t)));
    } else if let Some(path) = &a.manifest {
        let qm = require_quantization(&model)?;
        let manifest = Manifest::load(path)?;
        let entries: Vec<_> = manifest.split(a.split).collect();
        total = entries.len();
        for (e, r) in
            pipeline::manifest_features(&manifest, &entries, &cfg, avg.as_ref(), a.workers)?
        {
            let t = r.and_then(|f| {
                imgmine_core::segment::features_to_transaction(&f, qm, e.path.clone(), None)
                    .map_err(CliError::input)
            });
            match t {
                Ok(t) => rows.push((e.path.clone(), harc::classify(&model, &t))),
                Err(err) => failures.push((e.path.clone(), err)),
            }
        }
        pipeline::report_failures(&failures);
    }

    let mut out = String::from(PREDICTIONS_HEADER);
    out.push('\n');
    for (path, c) in &rows {
        writeln!(out, "{path},{},{}", c.class, c.fired.len()).expect("writing to a String");
    }
    match &a.output {
        Some(p) => write_file(p, out)?,
        None => print!("{out}"),
    }
    finish_partial(failures.len(), total)
}

fn evaluate(a: EvaluateArgs) -> Result<(), CliError> {
    let manifest = Manifest::load(&a.manifest)?;
    let labels: HashMap<&str, Option<ClassLabel>> = manifest
        .entries
        .iter()
        .map(|e| (e.path.as_str(), e.label))
        .collect();
    let bytes = read_file(&a.predictions)?;
    let mut reader = csv::ReaderBuilder::new().from_reader(bytes.as_slice());
    let headers = reader.headers().map_err(CliError::input)?;
    if headers.iter().collect::<Vec<_>>() != PREDICTIONS_HEADER.split(',').collect::<Vec<_>>() {
        return Err(CliError::Input(format!(
            "{}: expected header {PREDICTIONS_HEADER}",
            a.predictions.display()
        )));
    }
    let (mut truth, mut predicted) = (Vec::new(), Vec::new());
    for (i, row) in reader.records().enumerate() {
        let row = row.map_err(|e| CliError::Input(format!("{}: {e}", a.predictions.display())))?;
        let (path, class) = (&row[0], &row[1]);
        let class: ClassLabel = class.parse().map_err(|e| {
            CliError::Input(format!("{} row {}: {e}", a.predictions.display(), i + 2))
        })?;
        match labels.get(path) {
            Some(Some(label)) => {
                truth.push(*label);
                predicted.push(class);
            }
            Some(None) => eprintln!("warning: {path} has no label in the manifest; skipped"),
            None => eprintln!("warning: {path} is not in the manifest; skipped"),
        }
    }
    if truth.is_empty() {
        return Err(CliError::Input("no labeled predictions to evaluate".into()));
    }
    let report =
        Report::new(MultiClassMatrix::from_pairs(&truth, &predicted).map_err(CliError::input)?);
    print!("{}", report.to_text());
    if let Some(p) = &a.output {
        write_file(p, report.to_csv())?;
    }
    if let Some(p) = &a.matrix_out {
        write_file(p, report.matrix_csv())?;
    }
    Ok(())
}

fn synth(a: SynthArgs) -> Result<(), CliError> {
    let cfg = a.config.resolve()?;
    if a.size < 32 || a.per_class == 0 || !(0.0..=1.0).contains(&a.train_fraction) {
        return Err(CliError::Input(
            "synth needs size >= 32, per-class >= 1 and train-fraction in [0, 1]".into(),
        ));
    }
    let params = SynthParams {
        size: a.size,
        per_class: a.per_class,
        train_fraction: a.train_fraction,
        seed: cfg.seed,
    };
    let images = synth::generate(&params);
    for s in &images {
        write_file(&a.out_dir.join(&s.name), write_pgm(&s.image))?;
    }
    write_file(
        &a.out_dir.join("manifest.csv"),
        synth::manifest_for(&images).to_csv(),
    )
}
