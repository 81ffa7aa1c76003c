//! LOSO throughput: parallel fold scheduling vs the sequential fallback.

use std::collections::BTreeMap;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use selfscreen_core::data::{Dataset, Phq4Response, Sample};
use selfscreen_core::embed::hash_embed;
use selfscreen_core::eval::{run_loso_mode, ExecMode};
use selfscreen_core::ffnn::{TrainConfig, Variant};

fn synthetic(n_subjects: usize) -> (Dataset, BTreeMap<String, Vec<f64>>) {
    let mut samples = Vec::new();
    let mut embeddings = BTreeMap::new();
    let mut counter = 0;
    for subject in 0..n_subjects {
        let n = 1 + subject % 3;
        for k in 0..n {
            counter += 1;
            let positive = counter % 3 == 0;
            let items = if positive { [3, 2, 1, 1] } else { [1, 0, 1, 0] };
            let mood = if positive { "weary downcast tense" } else { "calm bright rested" };
            let text = format!("subject {subject} shot {k} looks {mood}");
            let id = format!("s{counter:04}");
            embeddings.insert(id.clone(), hash_embed(&text).unwrap());
            samples.push(
                Sample::new(
                    id,
                    format!("subj{subject:03}"),
                    Some(text),
                    None,
                    Phq4Response::new(items).unwrap(),
                )
                .unwrap(),
            );
        }
    }
    (Dataset::new(samples, None).unwrap(), embeddings)
}

fn bench_loso(c: &mut Criterion) {
    let (dataset, embeddings) = synthetic(24);
    let cfg = TrainConfig {
        seed: 7,
        epochs: 5,
        ..TrainConfig::default()
    };
    let mut group = c.benchmark_group("loso");
    group.sample_size(10);
    group.bench_function(BenchmarkId::new("sequential", dataset.len()), |b| {
        b.iter(|| {
            run_loso_mode(&dataset, &embeddings, &cfg, Variant::Default, ExecMode::Sequential)
                .unwrap()
        })
    });
    #[cfg(feature = "parallel")]
    group.bench_function(BenchmarkId::new("parallel", dataset.len()), |b| {
        b.iter(|| {
            run_loso_mode(&dataset, &embeddings, &cfg, Variant::Default, ExecMode::Parallel)
                .unwrap()
        })
    });
    group.finish();
}

criterion_group!(benches, bench_loso);
criterion_main!(benches);
