use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fracwill::curvature::{nmc_curve, nmc_region_oracle, RegionKind, RegionSpec};
use fracwill::curve::{ellipse, support_to_curve};
use fracwill::energy::{willmore_energy, FracParams};
use fracwill::fracops::{gagliardo_seminorm, spectral_fractional_laplacian, Domain, GridFunction};
use fracwill::minimize::{fd_gradient, random_support};
use std::hint::black_box;

fn curvature(c: &mut Criterion) {
    let mut g = c.benchmark_group("nmc_curve");
    for n in [256, 512, 1024] {
        let curve = ellipse(1.0, 0.6, n).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(n), &curve, |b, curve| {
            b.iter(|| nmc_curve(black_box(curve), 0.5).unwrap())
        });
    }
    g.finish();

    let disk = RegionSpec::new(RegionKind::Disk { center: [0.0, 0.0], radius: 1.0 });
    let h = 1.0 / 400.0;
    c.bench_function("region_oracle_disk", |b| {
        b.iter(|| nmc_region_oracle(&disk, [1.0, 0.0], 0.5, &[16.0 * h, 8.0 * h, 4.0 * h], h).unwrap())
    });
}

fn energy(c: &mut Criterion) {
    let curve = ellipse(1.0, 0.6, 512).unwrap();
    let params = FracParams::critical(0.5).unwrap();
    c.bench_function("willmore_energy_512", |b| {
        b.iter(|| willmore_energy(black_box(&curve), params, None, None, false).unwrap())
    });
    let sc = random_support(8, 0.15, 1);
    c.bench_function("support_to_curve_512", |b| b.iter(|| support_to_curve(black_box(&sc), 512, 1e-3).unwrap()));
    let mut g = c.benchmark_group("fd_gradient");
    g.sample_size(10);
    g.bench_function("k8_n256", |b| b.iter(|| fd_gradient(black_box(&sc), 0.5, 256, 1e-4).unwrap()));
    g.finish();
}

fn operators(c: &mut Criterion) {
    let f = GridFunction::from_fn(|x| x.sin().exp(), 512, Domain::Circle).unwrap();
    c.bench_function("spectral_laplacian_512", |b| b.iter(|| spectral_fractional_laplacian(black_box(&f), 0.5).unwrap()));
    c.bench_function("seminorm_512", |b| b.iter(|| gagliardo_seminorm(black_box(&f), 0.5, 2.0).unwrap()));
}

criterion_group!(benches, curvature, energy, operators);
criterion_main!(benches);
