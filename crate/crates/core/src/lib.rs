//! Parallel extragradient–viscosity solvers for a common solution of several
//! equilibrium problems and the fixed-point sets of several demicontractive
//! maps, with a hybrid-projection baseline and a Nash–Cournot-type generator.
//!
//! ```
//! use extravisc_core::{generate_instance, run, Algorithm, GeneratorSpec, SolverConfig};
//!
//! let spec = GeneratorSpec { m: 3, k: 4, n_bifunctions: 2, m_maps: 2, seed: 7 };
//! let instance = generate_instance(&spec);
//! let mut config = SolverConfig::standard(2, 2);
//! config.max_iters = 20;
//! let trace = run(&instance, &config, Algorithm::Alg2).unwrap();
//! assert_eq!(trace.iterations(), 20);
//! ```

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiment;
pub mod extragradient;
pub mod fixed_point;
pub mod generator;
pub mod linalg;
pub mod model;
pub mod qp;
pub mod schema;
pub mod solver;
pub mod trace;

pub use error::{ExperimentError, FixedPointError, ModelError, QpError, SolverError, Stage};
pub use experiment::{run_bench, run_experiment, run_on_instance, BenchOptions, ExperimentReport};
pub use extragradient::{lipschitz_constants, proximal_step, LipschitzConstants, ProximalOperator};
pub use fixed_point::{apply_map, mann_step, CompositeProjectionMap};
pub use generator::{generate_instance, GeneratorSpec};
pub use linalg::{Matrix, Vector};
pub use model::{
    validate_config, validate_instance, AlphaSchedule, HalfSpace, InitialPoint, LinearBifunction, MannSchedule,
    Operator, PolyhedralSet, ProblemInstance, RhoRule, SolverConfig, ValidationReport,
};
pub use qp::{brute_force_qp, solve_qp, PreparedQp, QpSolution, QuadraticSubproblem};
pub use schema::{config_from_json, config_to_json, instance_from_json, instance_to_json};
pub use solver::{run, select_furthest, Algorithm, Solver, SolverState};
pub use trace::{IterationRecord, IterationTrace};
