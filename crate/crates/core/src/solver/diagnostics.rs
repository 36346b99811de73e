//! Empirical checks of the per-iteration descent inequalities against a known
//! solution `x*`.

use serde::{Deserialize, Serialize};

use super::{Algorithm, Solver, SolverState};
use crate::error::SolverError;
use crate::fixed_point::evaluate_operator;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticRecord {
    /// `rhs − ‖x_{n+1} − x*‖²` of the descent inequality; `≥ 0` when it holds.
    pub slack: f64,
    /// Smallest slack over `i` of
    /// `‖z_n^i − x*‖² ≤ ‖x_n − x*‖² − (1−2ρc₁)‖y_n^i − x_n‖² − (1−2ρc₂)‖y_n^i − z_n^i‖²`.
    pub extragradient_slack: f64,
    /// `‖t_n − x*‖`.
    pub viscosity_distance: f64,
}

impl Solver {
    /// Evaluates the descent inequality for the step `prev → next`.
    ///
    /// For alg1:
    /// `‖x_{n+1}−x*‖² ≤ ‖x_n−x*‖² − (1−2ρc₁)‖ȳ_n−x_n‖² − (1−2ρc₂)‖ȳ_n−z̄_n‖²
    ///  − ‖x_{n+1}−z̄_n‖² − 2α_n⟨x_{n+1}−x*, F(z̄_n)⟩`.
    /// For alg2 the first two penalty terms become `w`-weighted sums over `i`
    /// and `z̄_n` becomes `z_n`.
    pub fn check_descent_inequality(
        &self,
        algorithm: Algorithm,
        prev: &SolverState,
        next: &SolverState,
    ) -> Result<DiagnosticRecord, SolverError> {
        let x_star = self
            .instance
            .known_solution
            .as_ref()
            .ok_or(SolverError::MissingKnownSolution)?;
        let step = next.step.as_ref().ok_or(SolverError::EmptyCandidateList)?;
        let x_n = &prev.x;
        let x_next = &next.x;
        let k1 = 1.0 - 2.0 * self.rho * self.constants.c1;
        let k2 = 1.0 - 2.0 * self.rho * self.constants.c2;

        let dist_prev = (x_n - x_star).norm_squared();
        let penalty = match algorithm {
            Algorithm::Alg1 | Algorithm::Phem => {
                let i = step.selected_i.ok_or(SolverError::EmptyCandidateList)?;
                let y_bar = &step.y[i];
                k1 * (y_bar - x_n).norm_squared() + k2 * (y_bar - &step.combined_z).norm_squared()
            }
            Algorithm::Alg2 => {
                let w = &self.config.weights_w;
                let mut acc = 0.0;
                for (i, (y, z)) in step.y.iter().zip(&step.z).enumerate() {
                    acc += w[i] * (k1 * (y - x_n).norm_squared() + k2 * (y - z).norm_squared());
                }
                acc
            }
        };
        let f_z = evaluate_operator(&self.instance.operator, &step.combined_z);
        let rhs = dist_prev
            - penalty
            - (x_next - &step.combined_z).norm_squared()
            - 2.0 * step.alpha * (x_next - x_star).dot(&f_z);
        let slack = rhs - (x_next - x_star).norm_squared();

        let extragradient_slack = step
            .y
            .iter()
            .zip(&step.z)
            .map(|(y, z)| {
                dist_prev - k1 * (y - x_n).norm_squared() - k2 * (y - z).norm_squared() - (z - x_star).norm_squared()
            })
            .fold(f64::INFINITY, f64::min);

        Ok(DiagnosticRecord {
            slack,
            extragradient_slack,
            viscosity_distance: (&step.t - x_star).norm(),
        })
    }
}
