use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Diagnostic class of an image.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassLabel {
    Normal,
    Benign,
    Malignant,
}

impl ClassLabel {
    pub const ALL: [ClassLabel; 3] = [
        ClassLabel::Normal,
        ClassLabel::Benign,
        ClassLabel::Malignant,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ClassLabel::Normal => "normal",
            ClassLabel::Benign => "benign",
            ClassLabel::Malignant => "malignant",
        }
    }

    /// Reserved item appended to labeled transactions before rule mining.
    pub fn class_item(self) -> u32 {
        901 + self as u32
    }

    pub fn from_class_item(item: u32) -> Option<Self> {
        item.checked_sub(901)
            .and_then(|i| Self::from_index(i as usize))
    }

    pub fn is_abnormal(self) -> bool {
        self != ClassLabel::Normal
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown class label {0:?} (expected normal, benign or malignant)")]
pub struct UnknownLabel(pub String);

impl FromStr for ClassLabel {
    type Err = UnknownLabel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "normal" => Ok(ClassLabel::Normal),
            "benign" => Ok(ClassLabel::Benign),
            "malignant" => Ok(ClassLabel::Malignant),
            other => Err(UnknownLabel(other.to_string())),
        }
    }
}
