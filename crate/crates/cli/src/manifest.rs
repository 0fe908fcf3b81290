//! Dataset manifests: `path,label,split` CSV files.

use crate::error::{read_file, CliError};
use imgmine_core::label::ClassLabel;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    /// As written in the manifest, relative to its directory.
    pub path: String,
    pub label: Option<ClassLabel>,
    pub split: Split,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Manifest {
    pub entries: Vec<ManifestEntry>,
    /// Directory relative paths resolve against.
    pub base: PathBuf,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let bytes = read_file(path)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&bytes, base).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
    }

    pub fn parse(bytes: &[u8], base: PathBuf) -> Result<Self, String> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(bytes);
        let headers = reader.headers().map_err(|e| e.to_string())?.clone();
        if headers.iter().collect::<Vec<_>>() != ["path", "label", "split"] {
            return Err("expected header path,label,split".into());
        }
        let mut entries = Vec::new();
        let mut seen = HashSet::new();
        for (i, row) in reader.deserialize::<ManifestEntry>().enumerate() {
            let entry = row.map_err(|e| format!("row {}: {e}", i + 2))?;
            if entry.path.is_empty() || entry.path.contains(['\n', '\r']) {
                return Err(format!("row {}: empty or multi-line path", i + 2));
            }
            if !seen.insert(entry.path.clone()) {
                return Err(format!("row {}: duplicate path {}", i + 2, entry.path));
            }
            entries.push(entry);
        }
        Ok(Self { entries, base })
    }

    pub fn to_csv(&self) -> String {
        let mut writer = csv::WriterBuilder::new().from_writer(Vec::new());
        writer
            .write_record(["path", "label", "split"])
            .expect("in-memory write");
        for e in &self.entries {
            let split = match e.split {
                Split::Train => "train",
                Split::Test => "test",
            };
            writer
                .write_record([
                    e.path.as_str(),
                    e.label.map_or("", ClassLabel::as_str),
                    split,
                ])
                .expect("in-memory write");
        }
        String::from_utf8(writer.into_inner().expect("in-memory write")).expect("UTF-8 fields")
    }

    pub fn resolve(&self, entry: &ManifestEntry) -> PathBuf {
        self.base.join(&entry.path)
    }

    pub fn split(&self, split: Option<Split>) -> impl Iterator<Item = &ManifestEntry> {
        self.entries
            .iter()
            .filter(move |e| split.is_none_or(|s| e.split == s))
    }
}
