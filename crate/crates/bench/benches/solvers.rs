use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use extravisc_core::{generate_instance, Algorithm, GeneratorSpec, PreparedQp, Solver, SolverConfig, Vector};

fn default_solver() -> Solver {
    let inst = generate_instance(&GeneratorSpec::standard(1));
    Solver::new(&inst, &SolverConfig::standard(5, 20)).unwrap()
}

fn generation(c: &mut Criterion) {
    c.bench_function("generate_instance/default", |b| {
        b.iter(|| generate_instance(black_box(&GeneratorSpec::standard(1))))
    });
}

fn projection(c: &mut Criterion) {
    let inst = generate_instance(&GeneratorSpec::standard(1));
    let qp = PreparedQp::projector(inst.feasible_set.clone()).unwrap();
    let outside = -Vector::from_element(10, 3.0);
    c.bench_function("project/default_polyhedron", |b| {
        b.iter(|| qp.solve(black_box(&outside), None, 1e-10).unwrap())
    });
}

fn iterations(c: &mut Criterion) {
    let solver = default_solver();
    let x0 = solver.initial_point().unwrap();
    // Warm up past the transient so the timed step is representative.
    let mut group = c.benchmark_group("iteration");
    for alg in Algorithm::ALL {
        let mut state = solver.initial_state().unwrap();
        for _ in 0..20 {
            state = solver.iterate(alg, &state, &x0).unwrap();
        }
        group.bench_with_input(BenchmarkId::from_parameter(alg), &state, |b, s| {
            b.iter(|| solver.iterate(alg, black_box(s), &x0).unwrap())
        });
    }
    group.finish();
}

fn full_runs(c: &mut Criterion) {
    let inst = generate_instance(&GeneratorSpec::standard(1));
    let mut cfg = SolverConfig::standard(5, 20);
    cfg.max_iters = 100;
    let solver = Solver::new(&inst, &cfg).unwrap();
    let mut group = c.benchmark_group("run_100");
    group.sample_size(10);
    for workers in [1, 4] {
        group.bench_with_input(BenchmarkId::new("alg1", workers), &workers, |b, &w| {
            b.iter(|| solver.run_with_workers(Algorithm::Alg1, w).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, generation, projection, iterations, full_runs);
criterion_main!(benches);
