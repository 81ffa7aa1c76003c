//! PHQ-4 scoring, labeling, and dataset ingestion.
//!
//! The PHQ-4 is a four-item screening questionnaire; each item is scored
//! 0-3 and the total (0-12) is thresholded at 6 to derive the binary
//! screening label. Stored labels in input files are advisory only: the
//! loader recomputes every label from the item scores and fails loudly on
//! mismatch.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::DataError;

/// Number of PHQ-4 items.
pub const PHQ4_ITEM_COUNT: usize = 4;
/// Maximum score per item.
pub const PHQ4_ITEM_MAX: u8 = 3;
/// Total score at or above which a sample is labeled positive.
pub const PHQ4_CUTOFF: u8 = 6;
/// Maximum possible total score.
pub const PHQ4_TOTAL_MAX: u8 = 12;

/// Scores for the four PHQ-4 items plus the derived total.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Phq4Response {
    items: [u8; PHQ4_ITEM_COUNT],
}

impl Phq4Response {
    pub fn new(items: [u8; PHQ4_ITEM_COUNT]) -> Result<Self, DataError> {
        for (index, &value) in items.iter().enumerate() {
            if value > PHQ4_ITEM_MAX {
                return Err(DataError::ItemOutOfRange { index, value });
            }
        }
        Ok(Self { items })
    }

    pub fn items(&self) -> [u8; PHQ4_ITEM_COUNT] {
        self.items
    }

    pub fn total(&self) -> u8 {
        self.items.iter().sum()
    }

    pub fn label(&self) -> Label {
        // Total is guaranteed in range by construction.
        label_from_score(self.total()).expect("valid total")
    }
}

/// Sum the four item scores into the PHQ-4 total.
pub fn score_phq4(items: [u8; PHQ4_ITEM_COUNT]) -> Result<u8, DataError> {
    Ok(Phq4Response::new(items)?.total())
}

/// Binary screening label: positive means possible depression-anxiety.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Negative,
    Positive,
}

impl Label {
    pub fn is_positive(&self) -> bool {
        matches!(self, Label::Positive)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Negative => write!(f, "negative"),
            Label::Positive => write!(f, "positive"),
        }
    }
}

/// Label from a PHQ-4 total: positive iff total >= 6.
pub fn label_from_score(total: u8) -> Result<Label, DataError> {
    if total > PHQ4_TOTAL_MAX {
        return Err(DataError::TotalOutOfRange { total });
    }
    Ok(if total >= PHQ4_CUTOFF {
        Label::Positive
    } else {
        Label::Negative
    })
}

/// One selfie record: identifiers, the description text and/or image
/// reference, PHQ-4 response, and the derived label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sample {
    pub sample_id: String,
    pub subject_id: String,
    pub description: Option<String>,
    pub image_path: Option<String>,
    pub phq4: Phq4Response,
    pub label: Label,
}

impl Sample {
    pub fn new(
        sample_id: String,
        subject_id: String,
        description: Option<String>,
        image_path: Option<String>,
        phq4: Phq4Response,
    ) -> Result<Self, DataError> {
        if subject_id.is_empty() {
            return Err(DataError::EmptySubjectId {
                sample_id: sample_id.clone(),
            });
        }
        if description.is_none() && image_path.is_none() {
            return Err(DataError::MissingContent { sample_id });
        }
        let label = phq4.label();
        Ok(Self {
            sample_id,
            subject_id,
            description,
            image_path,
            phq4,
            label,
        })
    }
}

/// A validated, immutable collection of samples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    samples: Vec<Sample>,
    pub source_vlm: Option<String>,
}

impl Dataset {
    pub fn new(samples: Vec<Sample>, source_vlm: Option<String>) -> Result<Self, DataError> {
        let mut seen = HashSet::new();
        for sample in &samples {
            if !seen.insert(sample.sample_id.clone()) {
                return Err(DataError::DuplicateSampleId {
                    sample_id: sample.sample_id.clone(),
                });
            }
        }
        Ok(Self {
            samples,
            source_vlm,
        })
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn get(&self, sample_id: &str) -> Option<&Sample> {
        self.samples.iter().find(|s| s.sample_id == sample_id)
    }
}

/// On-disk formats accepted by [`load_dataset`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DatasetFormat {
    Jsonl,
    Csv,
}

const KNOWN_FIELDS: &[&str] = &[
    "sample_id",
    "subject_id",
    "description",
    "image_path",
    "phq4_items",
    "label",
];

/// Load a dataset from the canonical line-delimited format or the CSV
/// convenience import. Labels are recomputed from the PHQ-4 items; a
/// stored label that disagrees is an error.
pub fn load_dataset(path: &Path, format: DatasetFormat) -> Result<Dataset, DataError> {
    match format {
        DatasetFormat::Jsonl => load_jsonl(path),
        DatasetFormat::Csv => load_csv(path),
    }
}

fn parse_items(value: &serde_json::Value, line: usize) -> Result<[u8; PHQ4_ITEM_COUNT], DataError> {
    let arr = value.as_array().ok_or(DataError::MissingField {
        line,
        field: "phq4_items",
    })?;
    if arr.len() != PHQ4_ITEM_COUNT {
        return Err(DataError::Parse {
            line,
            message: format!("phq4_items must have {} entries", PHQ4_ITEM_COUNT),
        });
    }
    let mut items = [0u8; PHQ4_ITEM_COUNT];
    for (i, v) in arr.iter().enumerate() {
        let n = v.as_u64().ok_or_else(|| DataError::Parse {
            line,
            message: format!("phq4_items[{i}] is not a non-negative integer"),
        })?;
        if n > PHQ4_ITEM_MAX as u64 {
            return Err(DataError::ItemOutOfRange {
                index: i,
                value: n.min(u8::MAX as u64) as u8,
            });
        }
        items[i] = n as u8;
    }
    Ok(items)
}

fn record_from_json(value: serde_json::Value, line: usize) -> Result<Sample, DataError> {
    let obj = value.as_object().ok_or_else(|| DataError::Parse {
        line,
        message: "record is not a JSON object".to_string(),
    })?;
    for key in obj.keys() {
        if !KNOWN_FIELDS.contains(&key.as_str()) {
            log::warn!("line {line}: ignoring unknown field {key:?}");
        }
    }
    let get_str = |field: &'static str| -> Result<String, DataError> {
        obj.get(field)
            .and_then(|v| v.as_str())
            .map(str::to_string)
            .ok_or(DataError::MissingField { line, field })
    };
    let sample_id = get_str("sample_id")?;
    let subject_id = get_str("subject_id")?;
    let description = match obj.get("description") {
        Some(serde_json::Value::String(s)) => Some(s.clone()),
        Some(serde_json::Value::Null) | None => None,
        Some(_) => {
            return Err(DataError::Parse {
                line,
                message: "description must be a string or null".to_string(),
            })
        }
    };
    let image_path = match obj.get("image_path") {
        Some(serde_json::Value::String(s)) => Some(s.clone()),
        Some(serde_json::Value::Null) | None => None,
        Some(_) => {
            return Err(DataError::Parse {
                line,
                message: "image_path must be a string or null".to_string(),
            })
        }
    };
    let items = parse_items(
        obj.get("phq4_items").ok_or(DataError::MissingField {
            line,
            field: "phq4_items",
        })?,
        line,
    )?;
    let phq4 = Phq4Response::new(items)?;
    let sample = Sample::new(sample_id, subject_id, description, image_path, phq4)?;
    // Stored labels are advisory; recomputation wins, mismatch is fatal.
    if let Some(stored) = obj.get("label").and_then(|v| v.as_str()) {
        let stored_label = match stored {
            "negative" => Label::Negative,
            "positive" => Label::Positive,
            other => {
                return Err(DataError::Parse {
                    line,
                    message: format!("unknown label {other:?}"),
                })
            }
        };
        if stored_label != sample.label {
            return Err(DataError::LabelMismatch {
                sample_id: sample.sample_id,
                stored: stored_label,
                computed: sample.label,
            });
        }
    }
    Ok(sample)
}

fn load_jsonl(path: &Path) -> Result<Dataset, DataError> {
    let file = File::open(path).map_err(|source| DataError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let reader = BufReader::new(file);
    let mut samples = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|source| DataError::Io {
            path: path.display().to_string(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value =
            serde_json::from_str(&line).map_err(|e| DataError::Parse {
                line: line_no,
                message: e.to_string(),
            })?;
        samples.push(record_from_json(value, line_no)?);
    }
    Dataset::new(samples, None)
}

const CSV_HEADER: [&str; 7] = [
    "sample_id",
    "subject_id",
    "description",
    "phq4_1",
    "phq4_2",
    "phq4_3",
    "phq4_4",
];

fn load_csv(path: &Path) -> Result<Dataset, DataError> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| DataError::Parse {
        line: 0,
        message: e.to_string(),
    })?;
    let headers = reader
        .headers()
        .map_err(|e| DataError::Parse {
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    if headers.iter().collect::<Vec<_>>() != CSV_HEADER {
        return Err(DataError::Parse {
            line: 1,
            message: format!("expected header {:?}", CSV_HEADER.join(",")),
        });
    }
    let mut samples = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let line = idx + 2;
        let record = record.map_err(|e| DataError::Parse {
            line,
            message: e.to_string(),
        })?;
        if record.len() != CSV_HEADER.len() {
            return Err(DataError::Parse {
                line,
                message: format!("expected {} fields, got {}", CSV_HEADER.len(), record.len()),
            });
        }
        let mut items = [0u8; PHQ4_ITEM_COUNT];
        for i in 0..PHQ4_ITEM_COUNT {
            let raw = &record[3 + i];
            let value: u8 = raw.trim().parse().map_err(|_| DataError::Parse {
                line,
                message: format!("phq4_{} is not an integer: {raw:?}", i + 1),
            })?;
            items[i] = value;
        }
        let phq4 = Phq4Response::new(items)?;
        let description = if record[2].is_empty() {
            None
        } else {
            Some(record[2].to_string())
        };
        samples.push(Sample::new(
            record[0].to_string(),
            record[1].to_string(),
            description,
            None,
            phq4,
        )?);
    }
    Dataset::new(samples, None)
}

/// Write a dataset in the canonical line-delimited format.
pub fn save_dataset(dataset: &Dataset, path: &Path) -> Result<(), DataError> {
    let mut file = File::create(path).map_err(|source| DataError::Io {
        path: path.display().to_string(),
        source,
    })?;
    for sample in dataset.samples() {
        let record = serde_json::json!({
            "sample_id": sample.sample_id,
            "subject_id": sample.subject_id,
            "description": sample.description,
            "image_path": sample.image_path,
            "phq4_items": sample.phq4.items(),
        });
        writeln!(file, "{record}").map_err(|source| DataError::Io {
            path: path.display().to_string(),
            source,
        })?;
    }
    Ok(())
}

/// Class balance and per-subject contribution counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DatasetStats {
    pub n_samples: usize,
    pub n_subjects: usize,
    pub n_negative: usize,
    pub n_positive: usize,
    /// samples-per-subject -> number of subjects with that count
    pub samples_per_subject: BTreeMap<usize, usize>,
    pub max_samples_per_subject: usize,
}

pub fn dataset_stats(dataset: &Dataset) -> Result<DatasetStats, DataError> {
    if dataset.is_empty() {
        return Err(DataError::EmptyDataset);
    }
    let mut per_subject: BTreeMap<&str, usize> = BTreeMap::new();
    let mut n_positive = 0;
    for sample in dataset.samples() {
        *per_subject.entry(sample.subject_id.as_str()).or_default() += 1;
        if sample.label.is_positive() {
            n_positive += 1;
        }
    }
    let mut histogram: BTreeMap<usize, usize> = BTreeMap::new();
    let mut max_count = 0;
    for &count in per_subject.values() {
        *histogram.entry(count).or_default() += 1;
        max_count = max_count.max(count);
    }
    Ok(DatasetStats {
        n_samples: dataset.len(),
        n_subjects: per_subject.len(),
        n_negative: dataset.len() - n_positive,
        n_positive,
        samples_per_subject: histogram,
        max_samples_per_subject: max_count,
    })
}
