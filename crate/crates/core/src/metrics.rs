//! Classification metrics.
//!
//! Abnormal (benign or malignant) is the positive class for the binary
//! rates. Rates are kept as exact fractions and only turned into floats when
//! reported.

use crate::label::ClassLabel;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("{0} is undefined: its denominator is zero")]
    Undefined(&'static str),
    #[error("prediction count {predicted} does not match truth count {truth}")]
    LengthMismatch { truth: usize, predicted: usize },
    #[error("metrics CSV line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Exact ratio `num / den`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rate {
    pub num: u64,
    pub den: u64,
}

impl Rate {
    pub fn value(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn percent(self) -> f64 {
        100.0 * self.value()
    }
}

fn rate(name: &'static str, num: u64, den: u64) -> Result<Rate, MetricsError> {
    if den == 0 {
        Err(MetricsError::Undefined(name))
    } else {
        Ok(Rate { num, den })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    pub fn_: u64,
}

impl ConfusionCounts {
    pub fn from_pairs(truth: &[bool], predicted: &[bool]) -> Result<Self, MetricsError> {
        if truth.len() != predicted.len() {
            return Err(MetricsError::LengthMismatch {
                truth: truth.len(),
                predicted: predicted.len(),
            });
        }
        let mut c = Self::default();
        for (&t, &p) in truth.iter().zip(predicted) {
            match (t, p) {
                (true, true) => c.tp += 1,
                (false, false) => c.tn += 1,
                (false, true) => c.fp += 1,
                (true, false) => c.fn_ += 1,
            }
        }
        Ok(c)
    }

    pub fn total(&self) -> u64 {
        self.tp + self.tn + self.fp + self.fn_
    }

    pub fn accuracy(&self) -> Result<Rate, MetricsError> {
        rate("accuracy", self.tp + self.tn, self.total())
    }

    pub fn sensitivity(&self) -> Result<Rate, MetricsError> {
        rate("sensitivity", self.tp, self.tp + self.fn_)
    }

    pub fn specificity(&self) -> Result<Rate, MetricsError> {
        rate("specificity", self.tn, self.tn + self.fp)
    }

    pub fn precision(&self) -> Result<Rate, MetricsError> {
        rate("precision", self.tp, self.tp + self.fp)
    }

    pub fn recall(&self) -> Result<Rate, MetricsError> {
        self.sensitivity()
            .map_err(|_| MetricsError::Undefined("recall"))
    }
}

/// Three-class confusion matrix, rows are true classes and columns predicted.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MultiClassMatrix {
    pub counts: [[u64; 3]; 3],
}

impl MultiClassMatrix {
    pub fn from_pairs(
        truth: &[ClassLabel],
        predicted: &[ClassLabel],
    ) -> Result<Self, MetricsError> {
        if truth.len() != predicted.len() {
            return Err(MetricsError::LengthMismatch {
                truth: truth.len(),
                predicted: predicted.len(),
            });
        }
        let mut m = Self::default();
        for (&t, &p) in truth.iter().zip(predicted) {
            m.counts[t.index()][p.index()] += 1;
        }
        Ok(m)
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn accuracy(&self) -> Result<Rate, MetricsError> {
        rate(
            "accuracy",
            (0..3).map(|i| self.counts[i][i]).sum(),
            self.total(),
        )
    }

    /// Normal versus abnormal.
    pub fn binarize(&self) -> ConfusionCounts {
        let mut c = ConfusionCounts::default();
        for t in ClassLabel::ALL {
            for p in ClassLabel::ALL {
                let n = self.counts[t.index()][p.index()];
                match (t.is_abnormal(), p.is_abnormal()) {
                    (true, true) => c.tp += n,
                    (false, false) => c.tn += n,
                    (false, true) => c.fp += n,
                    (true, false) => c.fn_ += n,
                }
            }
        }
        c
    }
}

/// Everything `evaluate` reports; undefined rates stay `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub matrix: MultiClassMatrix,
    pub binary: ConfusionCounts,
    pub accuracy: Option<Rate>,
    pub three_class_accuracy: Option<Rate>,
    pub sensitivity: Option<Rate>,
    pub specificity: Option<Rate>,
    pub precision: Option<Rate>,
    pub recall: Option<Rate>,
}

impl Report {
    pub fn new(matrix: MultiClassMatrix) -> Self {
        let binary = matrix.binarize();
        Self {
            matrix,
            binary,
            accuracy: binary.accuracy().ok(),
            three_class_accuracy: matrix.accuracy().ok(),
            sensitivity: binary.sensitivity().ok(),
            specificity: binary.specificity().ok(),
            precision: binary.precision().ok(),
            recall: binary.recall().ok(),
        }
    }

    fn named(&self) -> [(&'static str, Option<Rate>); 6] {
        [
            ("accuracy", self.accuracy),
            ("sensitivity", self.sensitivity),
            ("specificity", self.specificity),
            ("precision", self.precision),
            ("recall", self.recall),
            ("three_class_accuracy", self.three_class_accuracy),
        ]
    }

    /// `metric,value` with percentages to one decimal; undefined is `NA`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("metric,value\n");
        for (name, r) in self.named() {
            match r {
                Some(r) => writeln!(s, "{name},{:.1}", r.percent()),
                None => writeln!(s, "{name},NA"),
            }
            .expect("writing to a String");
        }
        s
    }

    pub fn matrix_csv(&self) -> String {
        let mut s = String::from("true\\predicted,normal,benign,malignant\n");
        for t in ClassLabel::ALL {
            let row = self.matrix.counts[t.index()];
            writeln!(s, "{t},{},{},{}", row[0], row[1], row[2]).expect("writing to a String");
        }
        s
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (name, r) in self.named() {
            match r {
                Some(r) => writeln!(s, "{name:<22}{:>6.1}%  ({}/{})", r.percent(), r.num, r.den),
                None => writeln!(s, "{name:<22}   n/a  (no samples)"),
            }
            .expect("writing to a String");
        }
        s.push_str("\nconfusion matrix (rows true, columns predicted)\n");
        s.push_str("             normal   benign  malignant\n");
        for t in ClassLabel::ALL {
            let row = self.matrix.counts[t.index()];
            writeln!(
                s,
                "{:<10}{:>9}{:>9}{:>11}",
                t.as_str(),
                row[0],
                row[1],
                row[2]
            )
            .expect("writing to a String");
        }
        s
    }
}

/// Reads a `metric,value` CSV back into `(name, percent)` pairs, `None` for `NA`.
pub fn parse_metrics_csv(text: &str) -> Result<Vec<(String, Option<f64>)>, MetricsError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if i == 0 {
            if line.trim() != "metric,value" {
                return Err(MetricsError::Parse {
                    line: line_no,
                    message: "expected header metric,value".into(),
                });
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let (name, value) = line.split_once(',').ok_or_else(|| MetricsError::Parse {
            line: line_no,
            message: "expected two fields".into(),
        })?;
        let value = match value.trim() {
            "NA" => None,
            v => Some(v.parse::<f64>().map_err(|e| MetricsError::Parse {
                line: line_no,
                message: e.to_string(),
            })?),
        };
        out.push((name.trim().to_string(), value));
    }
    Ok(out)
}
