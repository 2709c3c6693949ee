use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use lamella_core::lifshitz::lifshitz_pressure;
use lamella_core::materials::matsubara_frequency;
use lamella_core::modal::{grating_modes, BlochPoint, GratingGeometry, GratingSolver};
use lamella_core::scattering::plane_grating_pressure;
use lamella_core::{Environment, MaterialModel, NumericsConfig};

fn modes(c: &mut Criterion) {
    let g = GratingGeometry::sample_one();
    let env = Environment::room();
    let xi = matsubara_frequency(1, &env);
    let eps = MaterialModel::gold().permittivity(xi).unwrap();
    let pt = BlochPoint::new(0.3 * g.zone_edge(), 0.002, xi, &g).unwrap();
    let mut group = c.benchmark_group("grating_modes");
    for n in [5usize, 10, 20] {
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| grating_modes(&g, eps, black_box(&pt), n).unwrap())
        });
    }
    group.finish();
}

fn reflection(c: &mut Criterion) {
    let g = GratingGeometry::sample_one();
    let xi = matsubara_frequency(1, &Environment::room());
    let eps = MaterialModel::gold().permittivity(xi).unwrap();
    let solver = GratingSolver::new(&g, eps, xi, 0.3 * g.zone_edge(), 10).unwrap();
    c.bench_function("grating_reflection/N=10", |b| b.iter(|| solver.grating(black_box(0.002)).unwrap()));
}

fn pressures(c: &mut Criterion) {
    let m = MaterialModel::gold();
    let env = Environment::room();
    let num = NumericsConfig::default();
    c.bench_function("lifshitz_pressure/500nm", |b| {
        b.iter(|| lifshitz_pressure(black_box(500.0), &m, &env, &num).unwrap())
    });

    let g = GratingGeometry::sample_one();
    let cheap = NumericsConfig { truncation_n: 3, bz_nodes: 4, ky_nodes: 10, ..Default::default() };
    let mut group = c.benchmark_group("plane_grating_pressure");
    group.sample_size(10);
    group.bench_function("1000nm/N=3", |b| {
        b.iter(|| plane_grating_pressure(black_box(1000.0), &g, &m, &env, &cheap).unwrap())
    });
    group.finish();
}

criterion_group!(benches, modes, reflection, pressures);
criterion_main!(benches);
