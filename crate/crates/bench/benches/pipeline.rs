use std::hint::black_box;

use blowup_core::shooting::{newton_root, residual, root_profile, Normalization, ShootingConfig};
use blowup_core::special::{fundamental_pair, kummer_u, KummerArgs};
use blowup_core::stability::{assemble, eigenvalues, LinearizationGrid};
use blowup_core::{Complex64, ProfileParams};
use criterion::{criterion_group, criterion_main, Criterion};

fn first_root() -> ProfileParams {
    ProfileParams::nls(1, 2.3, 0.85311)
}

fn special(c: &mut Criterion) {
    let args = KummerArgs::new(Complex64::new(0.2174, -0.586), Complex64::new(0.5, 0.0), Complex64::new(0.0, -383.9));
    c.bench_function("kummer_u far argument", |b| b.iter(|| kummer_u(black_box(args), 1e-14)));
    let near = KummerArgs::new(Complex64::new(0.2174, -0.586), Complex64::new(0.5, 0.0), Complex64::new(0.0, -4.0));
    c.bench_function("kummer_u quadrature range", |b| b.iter(|| kummer_u(black_box(near), 1e-14)));
    let p = first_root();
    c.bench_function("fundamental pair at xi1", |b| b.iter(|| fundamental_pair(black_box(&p), 30.0)));
}

fn shooting(c: &mut Criterion) {
    let p = first_root();
    c.bench_function("residual at the first root", |b| b.iter(|| residual(black_box(&p), 1.23204, 30.0, 2, 1e-11)));
    let cfg = ShootingConfig::default();
    let fixed = ProfileParams::nls(1, 2.3, 1.0);
    let mut g = c.benchmark_group("newton");
    g.sample_size(20);
    g.bench_function("first root from a 2e-2 guess", |b| {
        b.iter(|| newton_root(black_box((1.21, 0.84)), Normalization::FixOmega, &fixed, &cfg, 1e-10))
    });
    g.finish();
}

fn stability(c: &mut Criterion) {
    let cfg = ShootingConfig::default();
    let root = newton_root((1.232, 0.853), Normalization::FixOmega, &ProfileParams::nls(1, 2.3, 1.0), &cfg, 1e-10).unwrap();
    let traj = root_profile(&root, &cfg).unwrap();
    let grid = LinearizationGrid::new(200, root.xi1).unwrap();
    let m = assemble(&traj, &root.params, &grid).unwrap();
    let mut g = c.benchmark_group("stability");
    g.sample_size(10);
    g.bench_function("assemble n=200", |b| b.iter(|| assemble(black_box(&traj), &root.params, &grid)));
    g.bench_function("eigenvalues 400x400", |b| b.iter(|| eigenvalues(black_box(&m))));
    g.finish();
}

criterion_group!(benches, special, shooting, stability);
criterion_main!(benches);
