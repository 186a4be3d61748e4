//! Compares the data-parallel batch analysis against the sequential path
//! on a synthetic corpus built by tiling the bundled contracts.
//!
//! Run with `cargo bench -p solsift`.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use solsift::analyze::{analyze_sources, analyze_sources_seq, AnalysisOptions};
use std::path::Path;

fn corpus_sources(copies: usize) -> Vec<(String, String)> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus");
    let bases: Vec<(String, String)> = [
        "Escrow.sol",
        "EasyInvest10.sol",
        "CollectMoney.sol",
        "Decore.sol",
        "FifteenPlus.sol",
    ]
    .iter()
    .map(|n| {
        (
            n.to_string(),
            std::fs::read_to_string(dir.join(n)).expect("corpus file"),
        )
    })
    .collect();

    (0..copies)
        .flat_map(|i| {
            bases
                .iter()
                .map(move |(name, text)| (format!("{i:03}_{name}"), text.clone()))
        })
        .collect()
}

fn bench_batch(c: &mut Criterion) {
    let opts = AnalysisOptions::default();
    let mut group = c.benchmark_group("analyze_batch");
    for copies in [4usize, 16] {
        let sources = corpus_sources(copies);
        group.throughput(Throughput::Elements(sources.len() as u64));
        group.bench_with_input(
            BenchmarkId::new("parallel", sources.len()),
            &sources,
            |b, s| b.iter(|| analyze_sources(s, &opts)),
        );
        group.bench_with_input(
            BenchmarkId::new("sequential", sources.len()),
            &sources,
            |b, s| b.iter(|| analyze_sources_seq(s, &opts)),
        );
    }
    group.finish();
}

fn bench_single_file(c: &mut Criterion) {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus");
    let text = std::fs::read_to_string(dir.join("Decore.sol")).unwrap();
    let opts = AnalysisOptions::default();
    c.bench_function("analyze_single_decore", |b| {
        b.iter(|| solsift::analyze::analyze_source("Decore.sol", &text, &opts))
    });
}

criterion_group!(benches, bench_batch, bench_single_file);
criterion_main!(benches);
