// SPDX-License-Identifier: Apache-2.0

use std::hint::black_box;
use std::path::PathBuf;

use criterion::{criterion_group, criterion_main, Criterion};
use varcov_bench::{synthetic_facts, synthetic_model};
use varcov_core::{
    analyze, coverage_ratio, describe_lines, knowledge_extend, pearson, AnalysisOptions, Input, LineSet,
};

fn metrics(c: &mut Criterion) {
    let (s, d, b) = synthetic_facts(10_000);
    c.bench_function("coverage_ratio/10k", |bench| bench.iter(|| coverage_ratio(black_box(&b), &s, &d)));
    c.bench_function("knowledge_extend/10k", |bench| bench.iter(|| knowledge_extend(black_box(&b), &s)));

    let xs: Vec<f64> = (0..10_000).map(|i| (i as f64 * 0.37).sin()).collect();
    let ys: Vec<f64> = (0..10_000).map(|i| (i as f64 * 0.11).cos()).collect();
    c.bench_function("pearson/10k", |bench| bench.iter(|| pearson(black_box(&xs), &ys)));
}

fn projection(c: &mut Criterion) {
    let model = synthetic_model(200, 50);
    c.bench_function("describe_lines/200x50", |bench| {
        bench.iter(|| {
            for f in model.functions() {
                let insts: Vec<_> = f.variables.iter().collect();
                let baseline: LineSet = model.project_to_lines(&f.ranges);
                black_box(describe_lines(&model, f, &insts, &baseline));
            }
        })
    });
}

fn pipeline(c: &mut Criterion) {
    let fixtures = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures");
    let opts = AnalysisOptions::new(Input::Fixture(fixtures.join("annotated.dbgfx")), &fixtures);
    c.bench_function("analyze/annotated", |bench| bench.iter(|| analyze(black_box(&opts)).unwrap()));
}

criterion_group!(benches, metrics, projection, pipeline);
criterion_main!(benches);
