use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use liebsdp::model::to_sdpa_string;
use liebsdp::{realify, solve_complex, SolverOptions};
use liebsdp_bench::{exponent, geomean_model, lieb_model, pair, EXPONENTS};
use std::hint::black_box;

fn construction(c: &mut Criterion) {
    let mut group = c.benchmark_group("geomean_build");
    for (p, q) in EXPONENTS {
        let t = exponent(p, q);
        let (a, b) = pair(3, 7);
        group.bench_with_input(BenchmarkId::from_parameter(format!("{p}_{q}")), &t, |bench, &t| {
            bench.iter(|| {
                liebsdp::geomean::build(&liebsdp::geomean::GeoMeanTask::optimize(t, a.clone(), b.clone())).unwrap()
            })
        });
    }
    group.finish();

    let mut group = c.benchmark_group("geomean_witness");
    for (p, q) in EXPONENTS {
        let m = geomean_model(exponent(p, q), 3, 7);
        group.bench_function(BenchmarkId::from_parameter(format!("{p}_{q}")), |bench| {
            bench.iter(|| black_box(m.data_witness().unwrap()))
        });
    }
    group.finish();
}

fn export(c: &mut Criterion) {
    let m = lieb_model(exponent(1, 3), 2, 3);
    let real = realify(&m.model);
    c.bench_function("lieb_realify", |bench| bench.iter(|| black_box(realify(&m.model))));
    c.bench_function("lieb_sdpa_export", |bench| bench.iter(|| black_box(to_sdpa_string(&real).unwrap())));
}

fn solve(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve");
    group.sample_size(20);
    for n in [2, 3, 4] {
        let m = geomean_model(exponent(5, 8), n, 11);
        group.bench_with_input(BenchmarkId::new("geomean_5_8", n), &m, |bench, m| {
            bench.iter(|| solve_complex(&m.model, &SolverOptions::default()).unwrap())
        });
    }
    let m = lieb_model(exponent(1, 3), 2, 11);
    group.bench_function("lieb_1_3_n2", |bench| {
        bench.iter(|| solve_complex(&m.model, &SolverOptions::default()).unwrap())
    });
    group.finish();
}

criterion_group!(benches, construction, export, solve);
criterion_main!(benches);
