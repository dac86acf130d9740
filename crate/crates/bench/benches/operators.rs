use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use portgen::operators::OperatorSet;
use portgen::{
    BoundaryMode, Dynamics, FieldProfiles, GeneratorPath, Material, Mesh, Profile, Scheme, State,
};

fn setup(n: usize) -> (Mesh, State, Material) {
    let mesh = Mesh::new(0.0, 1.0, n, true).unwrap();
    let z = FieldProfiles::new(
        Profile::sine(1.0, 0.2, 1.0),
        Profile::sine(0.0, 0.1, 1.0),
        Profile::cosine(1.0, 0.1, 1.0),
    )
    .interpolate(&mesh);
    let m = Material::default().with_transport(0.01, 0.005, 0.002);
    (mesh, z, m)
}

fn assembly(c: &mut Criterion) {
    let mut g = c.benchmark_group("assemble");
    for n in [32, 128] {
        let (mesh, z, m) = setup(n);
        g.bench_with_input(BenchmarkId::new("J", n), &n, |b, _| {
            b.iter(|| OperatorSet::new(&mesh, black_box(&z), &m).unwrap().assemble_j())
        });
        g.bench_with_input(BenchmarkId::new("R", n), &n, |b, _| {
            b.iter(|| OperatorSet::new(&mesh, black_box(&z), &m).unwrap().assemble_r())
        });
    }
    g.finish();
}

fn dynamics(c: &mut Criterion) {
    let mut g = c.benchmark_group("dynamics");
    for n in [32, 128, 256] {
        let (mesh, z, m) = setup(n);
        let dynamics =
            Dynamics::new(&mesh, &m, BoundaryMode::IsolatedPeriodic, GeneratorPath::TwoGenerator)
                .unwrap();
        g.bench_with_input(BenchmarkId::new("rhs", n), &n, |b, _| {
            b.iter(|| dynamics.rate(black_box(&z), 0.0).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("midpoint_step", n), &n, |b, _| {
            b.iter(|| dynamics.step(black_box(&z), 0.0, 1e-3, Scheme::ImplicitMidpoint).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("rk4_step", n), &n, |b, _| {
            b.iter(|| dynamics.step(black_box(&z), 0.0, 1e-3, Scheme::Rk4).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, assembly, dynamics);
criterion_main!(benches);
