use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hyperdga::commands::{sweep_rows, SweepConfig};
use hyperdga::scores::{delaunay_graph, distance_matrix, wasserstein};
use hyperdga::{Execution, LabeledPointSet, PruneOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn points(seed: u64, n: usize, dim: usize) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| loop {
            let p: Vec<f64> = (0..dim).map(|_| rng.random_range(-0.95..0.95)).collect();
            if p.iter().map(|x| x * x).sum::<f64>() < 0.9 {
                break p;
            }
        })
        .collect()
}

fn bench_delaunay(c: &mut Criterion) {
    let mut g = c.benchmark_group("delaunay_graph");
    for (dim, n) in [(2, 500), (3, 200)] {
        let pts = points(1, n, dim);
        let set = LabeledPointSet::from_klein(pts[..n / 2].to_vec(), pts[n / 2..].to_vec()).unwrap();
        for (name, exec) in MODES {
            let opts = PruneOptions {
                execution: exec,
                ..PruneOptions::default()
            };
            g.bench_with_input(BenchmarkId::new(name, format!("{dim}d_{n}")), &set, |b, set| {
                b.iter(|| delaunay_graph(black_box(set), &opts).unwrap())
            });
        }
    }
    g.finish();
}

fn bench_baselines(c: &mut Criterion) {
    let mut g = c.benchmark_group("baselines");
    let a = points(2, 200, 2);
    let b = points(3, 200, 2);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::new("distance_matrix", name), |bench| {
            bench.iter(|| distance_matrix(black_box(&a), black_box(&b), exec).unwrap())
        });
        g.bench_function(BenchmarkId::new("wasserstein", name), |bench| {
            bench.iter(|| wasserstein(black_box(&a), black_box(&b), exec).unwrap())
        });
    }
    g.finish();
}

fn bench_sweep(c: &mut Criterion) {
    let mut g = c.benchmark_group("sweep");
    g.sample_size(10);
    for (name, exec) in MODES {
        let mut cfg = SweepConfig::new(6, vec![0.1, 0.3, 0.5, 0.7, 0.9], vec![0, 1]);
        cfg.options.prune.execution = exec;
        g.bench_function(BenchmarkId::new("depth6", name), |b| b.iter(|| sweep_rows(black_box(&cfg)).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, bench_delaunay, bench_baselines, bench_sweep);
criterion_main!(benches);
