//! Batch description generation: partial failure, resume, auth abort.

use std::collections::HashMap;
use std::path::PathBuf;

use selfscreen_core::data::{Dataset, Phq4Response, Sample};
use selfscreen_gateway::{
    batch_describe, image_digest, load_descriptions, GatewayError, MockVlmProvider,
    PromptTemplate, VlmProvider,
};

fn sample(id: &str, subject: &str, image_path: &std::path::Path) -> Sample {
    Sample::new(
        id.to_string(),
        subject.to_string(),
        None,
        Some(image_path.display().to_string()),
        Phq4Response::new([1, 1, 1, 1]).unwrap(),
    )
    .unwrap()
}

/// Writes one fake JPEG per id and returns (dataset, digest fixtures).
fn make_corpus(
    dir: &std::path::Path,
    ids: &[&str],
) -> (Dataset, HashMap<String, String>) {
    let mut samples = Vec::new();
    let mut fixtures = HashMap::new();
    for id in ids {
        let bytes = format!("\u{00ff}fake-{id}").into_bytes();
        let mut image = b"\xff\xd8\xff".to_vec();
        image.extend_from_slice(&bytes);
        let path: PathBuf = dir.join(format!("{id}.jpg"));
        std::fs::write(&path, &image).unwrap();
        fixtures.insert(image_digest(&image), format!("Description for {id}."));
        samples.push(sample(id, &format!("subj_{id}"), &path));
    }
    (Dataset::new(samples, None).unwrap(), fixtures)
}

#[test]
fn describes_every_sample_in_dataset_order() {
    let dir = tempfile::tempdir().unwrap();
    let (dataset, fixtures) = make_corpus(dir.path(), &["a", "b", "c", "d"]);
    let provider = MockVlmProvider::new(fixtures, "mock-model");
    let out = dir.path().join("descriptions.jsonl");
    let outcome = batch_describe(&dataset, &provider, 2, &out).unwrap();
    assert_eq!(outcome.resumed, 0);
    assert!(outcome.failures.is_empty());
    let ids: Vec<&str> = outcome
        .descriptions
        .iter()
        .map(|d| d.sample_id.as_str())
        .collect();
    assert_eq!(ids, ["a", "b", "c", "d"]);
    // Ledger holds the same records.
    let mut ledger = load_descriptions(&out).unwrap();
    ledger.sort_by(|x, y| x.sample_id.cmp(&y.sample_id));
    assert_eq!(ledger.len(), 4);
    assert_eq!(ledger[0].text, "Description for a.");
}

#[test]
fn per_sample_failures_do_not_abort_the_batch() {
    let dir = tempfile::tempdir().unwrap();
    let (dataset, mut fixtures) = make_corpus(dir.path(), &["a", "b", "c"]);
    // Drop b's fixture so its request fails.
    let b_image = std::fs::read(dir.path().join("b.jpg")).unwrap();
    fixtures.remove(&image_digest(&b_image));
    let provider = MockVlmProvider::new(fixtures, "mock-model");
    let out = dir.path().join("descriptions.jsonl");
    let outcome = batch_describe(&dataset, &provider, 1, &out).unwrap();
    assert_eq!(outcome.descriptions.len(), 2);
    assert_eq!(outcome.failures.len(), 1);
    assert_eq!(outcome.failures[0].0, "b");
}

#[test]
fn rerun_resumes_from_the_ledger() {
    let dir = tempfile::tempdir().unwrap();
    let (dataset, mut fixtures) = make_corpus(dir.path(), &["a", "b", "c"]);
    let b_image = std::fs::read(dir.path().join("b.jpg")).unwrap();
    let b_digest = image_digest(&b_image);
    let b_text = fixtures.remove(&b_digest).unwrap();

    let out = dir.path().join("descriptions.jsonl");
    let first = batch_describe(
        &dataset,
        &MockVlmProvider::new(fixtures.clone(), "mock-model"),
        2,
        &out,
    )
    .unwrap();
    assert_eq!(first.descriptions.len(), 2);

    // Second run with the fixture restored: only b is requested.
    fixtures.insert(b_digest, b_text);
    let second = batch_describe(
        &dataset,
        &MockVlmProvider::new(fixtures, "mock-model"),
        2,
        &out,
    )
    .unwrap();
    assert_eq!(second.resumed, 2);
    assert!(second.failures.is_empty());
    assert_eq!(second.descriptions.len(), 3);
    assert_eq!(second.descriptions[1].sample_id, "b");
    assert_eq!(second.descriptions[1].text, "Description for b.");
}

struct AuthFailingProvider;

impl VlmProvider for AuthFailingProvider {
    fn complete(&self, _image: &[u8], _prompt: &PromptTemplate) -> Result<String, GatewayError> {
        Err(GatewayError::Auth {
            status: 401,
            body: "bad key".into(),
        })
    }
    fn name(&self) -> String {
        "auth-failing".into()
    }
    fn model_name(&self) -> String {
        "none".into()
    }
}

#[test]
fn auth_failure_aborts_the_whole_batch() {
    let dir = tempfile::tempdir().unwrap();
    let (dataset, _) = make_corpus(dir.path(), &["a", "b", "c"]);
    let out = dir.path().join("descriptions.jsonl");
    let err = batch_describe(&dataset, &AuthFailingProvider, 1, &out).unwrap_err();
    assert!(err.is_auth());
}

#[test]
fn missing_image_path_is_rejected_up_front() {
    let samples = vec![Sample::new(
        "a".into(),
        "s".into(),
        Some("already described".into()),
        None,
        Phq4Response::new([0, 0, 0, 0]).unwrap(),
    )
    .unwrap()];
    let dataset = Dataset::new(samples, None).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("descriptions.jsonl");
    let provider = MockVlmProvider::new(HashMap::new(), "mock-model");
    assert!(batch_describe(&dataset, &provider, 1, &out).is_err());
}

#[test]
fn zero_concurrency_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let (dataset, fixtures) = make_corpus(dir.path(), &["a"]);
    let provider = MockVlmProvider::new(fixtures, "mock-model");
    let out = dir.path().join("descriptions.jsonl");
    assert!(batch_describe(&dataset, &provider, 0, &out).is_err());
}
