//! Pipeline configuration: a flat JSON document whose keys can be overridden
//! from the command line.

use crate::error::{read_text, CliError};
use imgmine_core::edge::{CannyParams, MagnitudeMode, Thresholds};
use imgmine_core::harc::TrainParams;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ThresholdMode {
    Relative,
    Absolute,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub sigma: f64,
    pub threshold_mode: ThresholdMode,
    pub low_threshold: f64,
    pub high_threshold: f64,
    pub magnitude_mode: MagnitudeMode,
    pub min_area: usize,
    pub minsup: f64,
    pub minconf: f64,
    pub hierarchy_levels: u32,
    pub max_attributes: usize,
    pub support_gap_floor: Option<f64>,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            sigma: 1.4,
            threshold_mode: ThresholdMode::Relative,
            low_threshold: 0.1,
            high_threshold: 0.25,
            magnitude_mode: MagnitudeMode::Exact,
            min_area: 25,
            minsup: 0.10,
            minconf: 0.97,
            hierarchy_levels: 2,
            max_attributes: imgmine_core::harc::DEFAULT_MAX_ATTRIBUTES,
            support_gap_floor: None,
            seed: 42,
        }
    }
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = read_text(path)?;
        serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
    }

    pub fn canny_params(&self) -> CannyParams {
        let (low, high) = (self.low_threshold, self.high_threshold);
        CannyParams {
            sigma: self.sigma,
            thresholds: match self.threshold_mode {
                ThresholdMode::Relative => Thresholds::Relative { low, high },
                ThresholdMode::Absolute => Thresholds::Absolute { low, high },
            },
            magnitude_mode: self.magnitude_mode,
        }
    }

    pub fn train_params(&self) -> TrainParams {
        TrainParams {
            minsup: self.minsup,
            minconf: self.minconf,
            max_attributes: self.max_attributes,
            support_gap_floor: self.support_gap_floor,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Input(format!("invalid configuration: {msg}")));
        self.canny_params()
            .validate()
            .map_err(|e| CliError::Input(format!("invalid configuration: {e}")))?;
        if self.threshold_mode == ThresholdMode::Relative && self.high_threshold > 1.0 {
            return bad(format!(
                "relative high_threshold {} exceeds 1",
                self.high_threshold
            ));
        }
        if !(self.minsup > 0.0 && self.minsup <= 1.0) {
            return bad(format!("minsup must lie in (0, 1], got {}", self.minsup));
        }
        if !(self.minconf > 0.0 && self.minconf <= 1.0) {
            return bad(format!("minconf must lie in (0, 1], got {}", self.minconf));
        }
        if self.hierarchy_levels != 2 {
            return bad(format!(
                "hierarchy_levels is fixed at 2, got {}",
                self.hierarchy_levels
            ));
        }
        if self.max_attributes == 0 {
            return bad("max_attributes must be at least 1".into());
        }
        if self.min_area == 0 {
            return bad("min_area must be at least 1".into());
        }
        if let Some(f) = self.support_gap_floor {
            if !(0.0..=1.0).contains(&f) {
                return bad(format!("support_gap_floor must lie in [0, 1], got {f}"));
            }
        }
        Ok(())
    }
}
