//! Batched description generation with resume support.
//!
//! Completed descriptions are appended to the output file as they arrive;
//! on rerun, samples already present there are not re-requested. The file
//! doubles as the resume ledger.

use std::collections::BTreeSet;
use std::fs::OpenOptions;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Mutex;

use selfscreen_core::data::Dataset;

use crate::error::GatewayError;
use crate::provider::{request_description, Description, VlmProvider};

#[derive(Debug)]
pub struct BatchOutcome {
    /// One entry per successfully described sample, in dataset order.
    pub descriptions: Vec<Description>,
    /// (sample_id, error) for per-sample failures.
    pub failures: Vec<(String, String)>,
    /// Samples found in the ledger and not re-requested.
    pub resumed: usize,
}

pub fn load_descriptions(path: &Path) -> Result<Vec<Description>, GatewayError> {
    let file = std::fs::File::open(path).map_err(|source| GatewayError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut descriptions = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|source| GatewayError::Io {
            path: path.display().to_string(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        descriptions.push(
            serde_json::from_str(&line).map_err(|e| GatewayError::Parse {
                line: idx + 1,
                message: e.to_string(),
            })?,
        );
    }
    Ok(descriptions)
}

/// Describe every sample's image, at most `concurrency` requests in flight.
///
/// Per-sample failures are collected; only an authentication failure aborts
/// the whole batch.
pub fn batch_describe(
    dataset: &Dataset,
    provider: &dyn VlmProvider,
    concurrency: usize,
    out_path: &Path,
) -> Result<BatchOutcome, GatewayError> {
    if concurrency == 0 {
        return Err(GatewayError::Protocol("concurrency must be >= 1".into()));
    }
    for sample in dataset.samples() {
        if sample.image_path.is_none() {
            return Err(GatewayError::Image {
                path: sample.sample_id.clone(),
                message: "sample has no image_path".into(),
            });
        }
    }
    let existing: Vec<Description> = if out_path.exists() {
        load_descriptions(out_path)?
    } else {
        Vec::new()
    };
    let done: BTreeSet<&str> = existing.iter().map(|d| d.sample_id.as_str()).collect();
    let pending: Vec<usize> = dataset
        .samples()
        .iter()
        .enumerate()
        .filter(|(_, s)| !done.contains(s.sample_id.as_str()))
        .map(|(i, _)| i)
        .collect();
    let resumed = dataset.len() - pending.len();

    let ledger = OpenOptions::new()
        .create(true)
        .append(true)
        .open(out_path)
        .map_err(|source| GatewayError::Io {
            path: out_path.display().to_string(),
            source,
        })?;
    let ledger = Mutex::new(ledger);

    let queue = Mutex::new(pending.into_iter().collect::<Vec<usize>>());
    let results: Mutex<Vec<(usize, Result<Description, String>)>> = Mutex::new(Vec::new());
    let auth_failed = AtomicBool::new(false);
    let auth_error: Mutex<Option<GatewayError>> = Mutex::new(None);

    std::thread::scope(|scope| {
        for _ in 0..concurrency {
            scope.spawn(|| loop {
                if auth_failed.load(Ordering::SeqCst) {
                    return;
                }
                let index = match queue.lock().unwrap().pop() {
                    Some(i) => i,
                    None => return,
                };
                let sample = &dataset.samples()[index];
                let outcome = std::fs::read(sample.image_path.as_deref().unwrap())
                    .map_err(|e| GatewayError::Image {
                        path: sample.image_path.clone().unwrap(),
                        message: e.to_string(),
                    })
                    .and_then(|image| request_description(provider, &sample.sample_id, &image));
                match outcome {
                    Ok(description) => {
                        let line = serde_json::to_string(&description).expect("serialize");
                        {
                            let mut file = ledger.lock().unwrap();
                            // Best effort: a failed append surfaces as a
                            // missing entry on the next resume.
                            let _ = writeln!(file, "{line}");
                            let _ = file.flush();
                        }
                        results.lock().unwrap().push((index, Ok(description)));
                    }
                    Err(e) if e.is_auth() => {
                        auth_failed.store(true, Ordering::SeqCst);
                        *auth_error.lock().unwrap() = Some(e);
                        return;
                    }
                    Err(e) => {
                        log::warn!("describe {} failed: {e}", sample.sample_id);
                        results
                            .lock()
                            .unwrap()
                            .push((index, Err(e.to_string())));
                    }
                }
            });
        }
    });

    if let Some(e) = auth_error.into_inner().unwrap() {
        return Err(e);
    }

    let mut fresh = results.into_inner().unwrap();
    fresh.sort_by_key(|(i, _)| *i);
    let mut failures = Vec::new();
    let mut by_id: std::collections::BTreeMap<String, Description> = existing
        .into_iter()
        .map(|d| (d.sample_id.clone(), d))
        .collect();
    for (index, result) in fresh {
        let sample_id = dataset.samples()[index].sample_id.clone();
        match result {
            Ok(description) => {
                by_id.insert(sample_id, description);
            }
            Err(message) => failures.push((sample_id, message)),
        }
    }
    // Order-align with the input dataset.
    let descriptions = dataset
        .samples()
        .iter()
        .filter_map(|s| by_id.get(&s.sample_id).cloned())
        .collect();
    Ok(BatchOutcome {
        descriptions,
        failures,
        resumed,
    })
}
