use criterion::{criterion_group, criterion_main, Criterion};

use centrank::bter::{generate_bter, BterConfig, DegreeDistributionSpec, DegreeFamily};
use centrank::centrality::betweenness_closeness;
use centrank::graph::largest_connected_component;
use centrank::nn::{jacobian_accumulate, Activation, Architecture, TrainingSet, DEFAULT_LAYER_SIZES};
use centrank::par;
use centrank::sample::{approx_betweenness_closeness, SampleConfig};

fn worker_counts() -> [(&'static str, usize); 2] {
    [("sequential", 1), ("parallel", par::default_workers())]
}

fn bench(c: &mut Criterion) {
    let g = largest_connected_component(
        &generate_bter(&BterConfig {
            n: 2000,
            dist: DegreeDistributionSpec::new(DegreeFamily::training_set()[0]),
            clustering_target: 0.5,
            seed: 1,
        })
        .unwrap()
        .graph,
    );

    let mut group = c.benchmark_group("brandes");
    group.sample_size(10);
    for (name, w) in worker_counts() {
        group.bench_function(name, |b| b.iter(|| betweenness_closeness(&g, w).unwrap()));
    }
    group.finish();

    let cfg = SampleConfig::new(0.05, 7);
    let mut group = c.benchmark_group("sampling_5pct");
    for (name, w) in worker_counts() {
        group.bench_function(name, |b| b.iter(|| approx_betweenness_closeness(&g, &cfg, w).unwrap()));
    }
    group.finish();

    let arch = Architecture::new(&DEFAULT_LAYER_SIZES, Activation::Tanh).unwrap();
    let params = arch.init_params(3);
    let rows = 8192;
    let inputs: Vec<f64> = (0..2 * rows).map(|i| ((i * 31 % 97) as f64) / 48.0 - 1.0).collect();
    let targets: Vec<f64> = (0..rows).map(|i| ((i * 17 % 89) as f64) / 44.0 - 1.0).collect();
    let data = TrainingSet::new(inputs, targets, 2);
    let mut group = c.benchmark_group("jacobian_accumulate");
    group.sample_size(10);
    for (name, w) in worker_counts() {
        group.bench_function(name, |b| {
            b.iter(|| par::with_workers(w, || jacobian_accumulate(&arch, &params, &data)))
        });
    }
    group.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
