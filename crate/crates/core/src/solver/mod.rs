//! Outer iterations: the furthest-point method (`alg1`), the convex-combination
//! method (`alg2`) and a skeletal hybrid-projection baseline (`phem`).
//!
//! Each outer step fans out one task per bifunction for the predictor step,
//! waits, fans out one task per bifunction for the corrector step, waits,
//! reduces on the coordinator, then fans out one task per map. Results are
//! collected in index order and every reduction runs sequentially in
//! ascending index order, so traces are bit-identical for any worker count.

mod diagnostics;
mod steps;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use diagnostics::DiagnosticRecord;

use crate::error::{SolverError, Stage};
use crate::extragradient::{family_constants, LipschitzConstants, ProximalOperator};
use crate::fixed_point::CompositeProjectionMap;
use crate::linalg::Vector;
use crate::model::{validate_config_with, validate_instance, ProblemInstance, SolverConfig};
use crate::qp::PreparedQp;
use crate::trace::{IterationRecord, IterationTrace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    /// Furthest-point selection after the extragradient and Mann steps.
    Alg1,
    /// Convex combinations with weights `w` and `γ`.
    Alg2,
    /// Skeletal hybrid baseline: project `x_0` onto `C ∩ C_n ∩ Q_n`.
    Phem,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Alg1, Algorithm::Alg2, Algorithm::Phem];

    pub fn name(self) -> &'static str {
        match self {
            Self::Alg1 => "alg1",
            Self::Alg2 => "alg2",
            Self::Phem => "phem",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "alg1" => Ok(Self::Alg1),
            "alg2" => Ok(Self::Alg2),
            "phem" => Ok(Self::Phem),
            other => Err(format!("unknown algorithm `{other}` (expected alg1, alg2 or phem)")),
        }
    }
}

/// Intermediates of the step that produced a state.
#[derive(Debug, Clone, PartialEq)]
pub struct StepDetail {
    pub alpha: f64,
    /// `y_n^i`.
    pub y: Vec<Vector>,
    /// `z_n^i`.
    pub z: Vec<Vector>,
    /// `z̄_n` (alg1, phem) or `z_n = Σ w^i z_n^i` (alg2).
    pub combined_z: Vector,
    pub selected_i: Option<usize>,
    /// `t_n`; for the baseline, the point the Mann step was applied to.
    pub t: Vector,
    /// `u_n^j`.
    pub u: Vec<Vector>,
    pub selected_j: Option<usize>,
}

/// Multipliers from previous solves, reused as warm starts.
#[derive(Debug, Clone, Default, PartialEq)]
pub(crate) struct WarmStarts {
    pub(crate) predictor: Vec<Option<Vector>>,
    pub(crate) maps: Vec<Option<Vector>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub n: usize,
    pub x: Vector,
    /// How `x` was obtained; `None` for the initial point.
    pub step: Option<StepDetail>,
    pub(crate) warm: WarmStarts,
}

impl SolverState {
    pub fn new(n: usize, x: Vector) -> Self {
        Self {
            n,
            x,
            step: None,
            warm: WarmStarts::default(),
        }
    }
}

/// Index and value of the candidate furthest from `reference`; ties go to
/// the lowest index.
pub fn select_furthest<'a>(candidates: &'a [Vector], reference: &Vector) -> Result<(usize, &'a Vector), SolverError> {
    let mut best: Option<(usize, f64)> = None;
    for (i, c) in candidates.iter().enumerate() {
        let d = (c - reference).norm_squared();
        if best.is_none_or(|(_, b)| d > b) {
            best = Some((i, d));
        }
    }
    best.map(|(i, _)| (i, &candidates[i])).ok_or(SolverError::EmptyCandidateList)
}

/// A validated instance/config pair with every subproblem prepared.
#[derive(Debug, Clone)]
pub struct Solver {
    instance: ProblemInstance,
    config: SolverConfig,
    rho: f64,
    constants: LipschitzConstants,
    proximal: Vec<ProximalOperator>,
    maps: Vec<CompositeProjectionMap>,
    projector: Arc<PreparedQp>,
    /// Viscosity steps are clamped to this value, inside `(0, 2η/L²)`.
    alpha_cap: f64,
}

impl Solver {
    pub fn new(instance: &ProblemInstance, config: &SolverConfig) -> Result<Self, SolverError> {
        let report = validate_instance(instance);
        if !report.is_valid() {
            return Err(SolverError::InvalidInstance(report));
        }
        let constants = family_constants(&instance.bifunctions);
        let report = validate_config_with(config, instance, &constants);
        if !report.is_valid() {
            return Err(SolverError::InvalidConfig(report));
        }
        let rho = config.rho.resolve(&constants);
        let init_err = |index| {
            move |source| SolverError::Subproblem {
                iteration: 0,
                stage: Stage::Initialization,
                index,
                source,
            }
        };
        let proximal = instance
            .bifunctions
            .iter()
            .enumerate()
            .map(|(i, f)| ProximalOperator::new(f, rho, &instance.feasible_set).map_err(init_err(i)))
            .collect::<Result<Vec<_>, _>>()?;
        let projector = Arc::new(PreparedQp::projector(instance.feasible_set.clone()).map_err(init_err(0))?);
        let maps = instance
            .halfspaces
            .iter()
            .map(|hs| {
                let mut map = CompositeProjectionMap::new(hs.clone(), Arc::clone(&projector));
                map.modulus = instance.map_modulus;
                map
            })
            .collect();
        Ok(Self {
            alpha_cap: 0.99 * instance.operator.step_bound(),
            instance: instance.clone(),
            config: config.clone(),
            rho,
            constants,
            proximal,
            maps,
            projector,
        })
    }

    pub fn instance(&self) -> &ProblemInstance {
        &self.instance
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn constants(&self) -> LipschitzConstants {
        self.constants
    }

    /// `α_n` after clamping into `(0, 2η/L²)`.
    pub fn alpha(&self, n: usize) -> f64 {
        self.config.alpha.value(n).min(self.alpha_cap)
    }

    pub fn alpha_cap(&self) -> f64 {
        self.alpha_cap
    }

    /// The configured starting point, projected onto `C` when infeasible.
    pub fn initial_point(&self) -> Result<Vector, SolverError> {
        let x0 = self.config.initial_point.resolve(self.instance.dim());
        if self.instance.feasible_set.contains(&x0, 0.0) {
            return Ok(x0);
        }
        self.projector
            .solve(&-x0, None, self.config.inner_tol)
            .map(|sol| sol.y)
            .map_err(|source| SolverError::Subproblem {
                iteration: 0,
                stage: Stage::Initialization,
                index: 0,
                source,
            })
    }

    pub fn initial_state(&self) -> Result<SolverState, SolverError> {
        Ok(SolverState::new(0, self.initial_point()?))
    }

    pub fn iterate(&self, algorithm: Algorithm, state: &SolverState, x0: &Vector) -> Result<SolverState, SolverError> {
        match algorithm {
            Algorithm::Alg1 => self.iterate_alg1(state),
            Algorithm::Alg2 => self.iterate_alg2(state),
            Algorithm::Phem => self.iterate_phem(state, x0),
        }
    }

    /// Runs `algorithm` on the current rayon pool.
    pub fn run(&self, algorithm: Algorithm) -> Result<IterationTrace, SolverError> {
        let x0 = self.initial_point()?;
        let known = self.instance.known_solution.clone();
        let distance = |x: &Vector| known.as_ref().map(|s| (x - s).norm());
        let mut trace = IterationTrace {
            algorithm,
            rho: self.rho,
            constants: self.constants,
            records: Vec::with_capacity(self.config.max_iters + 1),
        };
        trace.records.push(IterationRecord {
            n: 0,
            x: x0.clone(),
            distance: distance(&x0),
            selected_i: None,
            selected_j: None,
            step_residual: None,
            descent_slack: None,
            elapsed_ms: 0.0,
        });

        let mut state = SolverState::new(0, x0.clone());
        for _ in 0..self.config.max_iters {
            let started = Instant::now();
            let next = match self.iterate(algorithm, &state, &x0) {
                Ok(next) => next,
                Err(cause) => {
                    return Err(SolverError::Aborted {
                        partial: Box::new(trace),
                        cause: Box::new(cause),
                    })
                }
            };
            let elapsed_ms = started.elapsed().as_secs_f64() * 1e3;

            let residual = (&next.x - &state.x).norm();
            let descent_slack = match (algorithm, &known) {
                (Algorithm::Phem, _) | (_, None) => None,
                _ => Some(self.check_descent_inequality(algorithm, &state, &next)?.slack),
            };
            let step = next.step.as_ref();
            let d = distance(&next.x);
            trace.records.push(IterationRecord {
                n: next.n,
                x: next.x.clone(),
                distance: d,
                selected_i: step.and_then(|s| s.selected_i),
                selected_j: step.and_then(|s| s.selected_j),
                step_residual: Some(residual),
                descent_slack,
                elapsed_ms,
            });

            let converged = self.config.stop_tol > 0.0
                && residual < self.config.stop_tol
                && match (d, self.config.target_distance) {
                    (Some(d), Some(target)) => d < target,
                    _ => true,
                };
            state = next;
            if converged {
                break;
            }
        }
        Ok(trace)
    }

    /// Runs `algorithm` on a dedicated pool of `workers` threads.
    pub fn run_with_workers(&self, algorithm: Algorithm, workers: usize) -> Result<IterationTrace, SolverError> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers.max(1))
            .build()
            .map_err(|e| SolverError::ThreadPool(e.to_string()))?
            .install(|| self.run(algorithm))
    }
}

/// Validates, prepares and runs in one call.
pub fn run(instance: &ProblemInstance, config: &SolverConfig, algorithm: Algorithm) -> Result<IterationTrace, SolverError> {
    Solver::new(instance, config)?.run(algorithm)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_column_slice(xs)
    }

    #[test]
    fn furthest_selection() {
        let origin = v(&[0.0, 0.0]);
        let one = [v(&[1.0, 1.0])];
        assert_eq!(select_furthest(&one, &origin).unwrap().0, 0);
        let three = [v(&[1.0, 0.0]), v(&[0.0, 3.0]), v(&[-2.0, 0.0])];
        assert_eq!(select_furthest(&three, &origin).unwrap().0, 1);
        let tie = [v(&[2.0, 0.0]), v(&[0.0, -2.0])];
        let (i, c) = select_furthest(&tie, &origin).unwrap();
        assert_eq!((i, c), (0, &tie[0]));
        assert!(matches!(
            select_furthest(&[], &origin),
            Err(SolverError::EmptyCandidateList)
        ));
    }

    #[test]
    fn algorithm_names_parse() {
        for alg in Algorithm::ALL {
            assert_eq!(alg.name().parse::<Algorithm>().unwrap(), alg);
        }
        assert!("alg3".parse::<Algorithm>().is_err());
    }
}
