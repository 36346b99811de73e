use extravisc_core::fixed_point::contraction_factor;
use extravisc_core::{
    generate_instance, validate_config, validate_instance, Algorithm, GeneratorSpec, Operator, ProblemInstance,
    Solver, SolverConfig, SolverError, Vector,
};

fn small(seed: u64, n: usize, m_maps: usize) -> ProblemInstance {
    generate_instance(&GeneratorSpec {
        m: 5,
        k: 8,
        n_bifunctions: n,
        m_maps,
        seed,
    })
}

fn config(inst: &ProblemInstance, iters: usize) -> SolverConfig {
    let mut cfg = SolverConfig::standard(inst.num_bifunctions(), inst.num_maps());
    cfg.max_iters = iters;
    cfg
}

#[test]
fn generated_instances_pass_validation() {
    for seed in 0..10 {
        let inst = generate_instance(&GeneratorSpec::standard(seed));
        assert!(validate_instance(&inst).is_valid());
        assert!(validate_config(&config(&inst, 1000), &inst).is_valid());
    }
}

#[test]
fn solution_is_a_fixed_point() {
    // With F(x) = x the origin solves the selection problem, so an iterate
    // sitting there never moves.
    let mut inst = small(4, 3, 4);
    inst.operator = Operator::shift(Vector::zeros(5));
    let solver = Solver::new(&inst, &config(&inst, 10)).unwrap();
    let x0 = Vector::zeros(5);
    for alg in [Algorithm::Alg1, Algorithm::Alg2] {
        let mut state = extravisc_core::SolverState::new(0, x0.clone());
        for _ in 0..10 {
            state = solver.iterate(alg, &state, &x0).unwrap();
            assert_eq!(state.x, x0, "{alg} moved off the solution");
        }
    }
}

#[test]
fn single_problem_single_map_methods_coincide() {
    for seed in 0..3 {
        let inst = small(seed, 1, 1);
        let solver = Solver::new(&inst, &config(&inst, 100)).unwrap();
        let a = solver.run(Algorithm::Alg1).unwrap();
        let b = solver.run(Algorithm::Alg2).unwrap();
        for (ra, rb) in a.records.iter().zip(&b.records) {
            assert!((&ra.x - &rb.x).amax() <= 1e-12, "seed {seed}, n {}", ra.n);
        }
    }
}

#[test]
fn worker_count_does_not_change_traces() {
    let inst = small(2, 4, 6);
    let solver = Solver::new(&inst, &config(&inst, 60)).unwrap();
    for alg in Algorithm::ALL {
        let one = solver.run_with_workers(alg, 1).unwrap();
        let many = solver.run_with_workers(alg, 4).unwrap();
        let bytes = |t: &extravisc_core::IterationTrace| {
            let mut buf = Vec::new();
            t.write_csv(&mut buf).unwrap();
            buf
        };
        assert_eq!(bytes(&one), bytes(&many), "{alg}");
        for (r1, r2) in one.records.iter().zip(&many.records) {
            assert_eq!(r1.x, r2.x);
        }
    }
}

#[test]
fn zero_budget_returns_initial_point() {
    let inst = small(1, 2, 2);
    let solver = Solver::new(&inst, &config(&inst, 0)).unwrap();
    for alg in Algorithm::ALL {
        let trace = solver.run(alg).unwrap();
        assert_eq!(trace.iterations(), 0);
        assert_eq!(trace.records.len(), 1);
        assert!(inst.feasible_set.contains(&trace.records[0].x, 1e-9));
    }
}

#[test]
fn step_residual_stopping() {
    let inst = small(6, 2, 3);
    let mut cfg = config(&inst, 5000);
    cfg.stop_tol = 1e-4;
    let trace = Solver::new(&inst, &cfg).unwrap().run(Algorithm::Alg1).unwrap();
    assert!(trace.iterations() < 5000);
    assert!(trace.records.last().unwrap().step_residual.unwrap() < 1e-4);
}

#[test]
fn baseline_iterates_stay_feasible() {
    for seed in 0..3 {
        let inst = generate_instance(&GeneratorSpec::standard(seed));
        let trace = Solver::new(&inst, &config(&inst, 200)).unwrap().run(Algorithm::Phem).unwrap();
        for r in &trace.records {
            assert!(inst.feasible_set.violation(&r.x) <= 1e-6, "seed {seed}, n {}", r.n);
        }
    }
}

/// `x_{n+1}` mixes `t_n = z̄ − α_n F(z̄)` (with `z̄ ∈ C`) and a point of `C`,
/// so its infeasibility is at most `(1 − β) α_n ‖F(z̄)‖ max_i ‖a_i‖`. The
/// iterates themselves need not lie in `C`.
#[test]
fn infeasibility_is_controlled_by_the_viscosity_step() {
    for seed in 0..3 {
        let inst = generate_instance(&GeneratorSpec::standard(seed));
        let cfg = config(&inst, 300);
        let solver = Solver::new(&inst, &cfg).unwrap();
        let row_norm = (0..inst.feasible_set.num_constraints())
            .map(|i| inst.feasible_set.a.row(i).norm())
            .fold(0.0, f64::max);
        let x0 = solver.initial_point().unwrap();
        for alg in [Algorithm::Alg1, Algorithm::Alg2] {
            let mut state = solver.initial_state().unwrap();
            for _ in 0..cfg.max_iters {
                state = solver.iterate(alg, &state, &x0).unwrap();
                let step = state.step.as_ref().unwrap();
                assert!(inst.feasible_set.contains(&step.combined_z, 1e-8));
                let f_norm = (&step.t - &step.combined_z).norm();
                let bound = 0.75 * f_norm * row_norm;
                assert!(inst.feasible_set.violation(&state.x) <= bound + 1e-8);
            }
            assert!(inst.feasible_set.violation(&state.x) < 0.05);
        }
    }
}

#[test]
fn viscosity_points_stay_bounded() {
    // ‖t_n − x*‖ ≤ max{‖t_0 − x*‖, (μ/τ)‖F(x*)‖} for μ ∈ (sup α_n, 2η/L²).
    let inst = generate_instance(&GeneratorSpec::standard(3));
    let mu = 1.5;
    let tau = 1.0 - contraction_factor(&inst.operator, mu);
    let x_star = inst.known_solution.clone().unwrap();
    let f_star = (&x_star - Vector::from_element(10, 1.0)).norm();
    let cfg = config(&inst, 300);
    let solver = Solver::new(&inst, &cfg).unwrap();
    let x0 = solver.initial_point().unwrap();
    for alg in [Algorithm::Alg1, Algorithm::Alg2] {
        let mut state = solver.initial_state().unwrap();
        let mut t0 = None;
        for _ in 0..cfg.max_iters {
            state = solver.iterate(alg, &state, &x0).unwrap();
            let dist = (&state.step.as_ref().unwrap().t - &x_star).norm();
            let bound = *t0.get_or_insert(dist);
            assert!(dist <= bound.max(mu / tau * f_star) + 1e-6);
        }
    }
}

#[test]
fn descent_inequality_needs_known_solution() {
    let mut inst = small(0, 2, 2);
    let solver = Solver::new(&inst, &config(&inst, 1)).unwrap();
    let prev = solver.initial_state().unwrap();
    let x0 = prev.x.clone();
    let next = solver.iterate(Algorithm::Alg1, &prev, &x0).unwrap();
    assert!(solver.check_descent_inequality(Algorithm::Alg1, &prev, &next).is_ok());
    inst.known_solution = None;
    let solver = Solver::new(&inst, &config(&inst, 1)).unwrap();
    assert!(matches!(
        solver.check_descent_inequality(Algorithm::Alg1, &prev, &next),
        Err(SolverError::MissingKnownSolution)
    ));
}

#[test]
fn descent_slack_vanishes_at_solution() {
    let mut inst = small(0, 2, 2);
    inst.operator = Operator::shift(Vector::zeros(5));
    let solver = Solver::new(&inst, &config(&inst, 1)).unwrap();
    let prev = extravisc_core::SolverState::new(0, Vector::zeros(5));
    let next = solver.iterate(Algorithm::Alg1, &prev, &prev.x).unwrap();
    let record = solver.check_descent_inequality(Algorithm::Alg1, &prev, &next).unwrap();
    assert_eq!(record.slack, 0.0);
}

#[test]
fn rejects_rho_above_bound() {
    let inst = small(0, 2, 2);
    let mut cfg = config(&inst, 1);
    cfg.rho = extravisc_core::RhoRule::InverseConstant(1.5);
    assert!(matches!(Solver::new(&inst, &cfg), Err(SolverError::InvalidConfig(_))));
}
