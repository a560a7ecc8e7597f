use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use dtn_core::dtn::{assemble_forcing, solve_dtn, DtnTolerances, ManufacturedSolution};
use dtn_core::kernel::{assemble_kernel_matrix, KernelContext};
use dtn_core::specfun::{faddeeva, fresnel_tail};
use dtn_core::{BoundaryCurve, TimeGrid};
use num_complex::Complex64;

fn parabola() -> BoundaryCurve {
    BoundaryCurve::polynomial(vec![0.0, 0.0, 0.5], 1.0).unwrap()
}

fn special_functions(c: &mut Criterion) {
    let zs: Vec<Complex64> = (0..64)
        .map(|i| Complex64::new(-8.0 + 0.25 * i as f64, 0.1 * (i % 7) as f64))
        .collect();
    c.bench_function("faddeeva x64", |b| {
        b.iter(|| zs.iter().map(|&z| faddeeva(black_box(z))).sum::<Complex64>())
    });
    c.bench_function("fresnel_tail x64", |b| {
        b.iter(|| {
            zs.iter()
                .map(|z| fresnel_tail(black_box(z.re)))
                .sum::<Complex64>()
        })
    });
}

fn kernel_assembly(c: &mut Criterion) {
    let ctx = KernelContext::new(parabola());
    let mut group = c.benchmark_group("kernel assembly");
    for n in [128, 256, 512] {
        let grid = TimeGrid::uniform(1.0, n).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &grid, |b, g| {
            b.iter(|| assemble_kernel_matrix(g, &ctx))
        });
    }
    group.finish();
}

fn dtn_solve(c: &mut Criterion) {
    let curve = parabola();
    let sol = ManufacturedSolution::new(1.0, -1.0, 0.5).unwrap();
    let problem = sol.problem(&curve, DtnTolerances::default()).unwrap();
    let mut group = c.benchmark_group("dtn");
    group.sample_size(10);
    for n in [128, 512] {
        let grid = TimeGrid::uniform(1.0, n).unwrap();
        group.bench_with_input(BenchmarkId::new("forcing", n), &grid, |b, g| {
            b.iter(|| assemble_forcing(&problem, g).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("solve", n), &grid, |b, g| {
            b.iter(|| solve_dtn(&problem, g).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, special_functions, kernel_assembly, dtn_solve);
criterion_main!(benches);
