//! Rendering evaluation results as CSV or JSON report files.
//!
//! Metric values are rendered as percentages with one decimal so reports
//! line up visually with the published tables.

use std::fs::File;
use std::io::{BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::EvalError;
use crate::metrics::{percent, MetricsReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

/// One rendered result row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub model: String,
    pub provider: String,
    pub variant: String,
    pub h: Option<usize>,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub auc: f64,
    pub accuracy: f64,
    pub n_folds_skipped: usize,
}

impl ReportRow {
    pub fn new(
        model: &str,
        provider: &str,
        variant: &str,
        h: Option<usize>,
        metrics: &MetricsReport,
        n_folds_skipped: usize,
    ) -> Self {
        Self {
            model: model.to_string(),
            provider: provider.to_string(),
            variant: variant.to_string(),
            h,
            precision: percent(metrics.precision),
            recall: percent(metrics.recall),
            f1: percent(metrics.f1),
            auc: percent(metrics.auc),
            accuracy: percent(metrics.accuracy),
            n_folds_skipped,
        }
    }
}

const CSV_HEADER: &str = "model,provider,variant,h,precision,recall,f1,auc,accuracy,n_folds_skipped";

pub fn write_report(rows: &[ReportRow], path: &Path, format: ReportFormat) -> Result<(), EvalError> {
    if rows.is_empty() {
        return Err(EvalError::EmptyReport);
    }
    let io_err = |source: std::io::Error| EvalError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut file = File::create(path).map_err(io_err)?;
    match format {
        ReportFormat::Csv => {
            writeln!(file, "{CSV_HEADER}").map_err(io_err)?;
            for row in rows {
                let h = row.h.map_or(String::new(), |h| h.to_string());
                writeln!(
                    file,
                    "{},{},{},{},{:.1},{:.1},{:.1},{:.1},{:.1},{}",
                    row.model,
                    row.provider,
                    row.variant,
                    h,
                    row.precision,
                    row.recall,
                    row.f1,
                    row.auc,
                    row.accuracy,
                    row.n_folds_skipped
                )
                .map_err(io_err)?;
            }
        }
        ReportFormat::Json => {
            let json = serde_json::to_string_pretty(rows).expect("serialize rows");
            file.write_all(json.as_bytes()).map_err(io_err)?;
            file.write_all(b"\n").map_err(io_err)?;
        }
    }
    Ok(())
}

pub fn read_report_json(path: &Path) -> Result<Vec<ReportRow>, EvalError> {
    let file = File::open(path).map_err(|source| EvalError::Io {
        path: path.display().to_string(),
        source,
    })?;
    serde_json::from_reader(BufReader::new(file)).map_err(|e| EvalError::Io {
        path: path.display().to_string(),
        source: std::io::Error::new(std::io::ErrorKind::InvalidData, e),
    })
}
