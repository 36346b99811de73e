//! The maps `S_j = P_C ∘ P_{T_j}`, Mann relaxation, the operator `F` and the
//! steepest-descent map `G^μ = I − μF`.
//!
//! `S_j` is applied on all of `ℝ^m`: the viscosity point `t_n` can leave `C`,
//! and the outer `P_C` puts `S_j t_n` back inside. Composites of projections
//! are nonexpansive, so they are demicontractive with modulus 0 and the
//! relaxation `(1 − w)I + wS` is quasi-nonexpansive for `w ∈ [0, 1 − β]`.

use std::sync::Arc;

use crate::error::FixedPointError;
use crate::linalg::Vector;
use crate::model::{HalfSpace, Operator, OperatorKind};
use crate::qp::{project_halfspace, PreparedQp, QpSolution};

/// `S = P_C ∘ P_T` for one half-space `T`.
#[derive(Debug, Clone)]
pub struct CompositeProjectionMap {
    pub halfspace: HalfSpace,
    /// Projector onto the shared feasible set `C`.
    pub projector: Arc<PreparedQp>,
    /// Demicontractive modulus `β`.
    pub modulus: f64,
}

impl CompositeProjectionMap {
    pub fn new(halfspace: HalfSpace, projector: Arc<PreparedQp>) -> Self {
        Self {
            halfspace,
            projector,
            modulus: 0.0,
        }
    }

    /// `P_C(P_T x)` with the underlying QP solution (multipliers for warm starts).
    pub fn apply_with(&self, x: &Vector, warm_start: Option<&Vector>, tol: f64) -> Result<QpSolution, crate::error::QpError> {
        let inner = project_halfspace(&self.halfspace, x);
        self.projector.solve(&-inner, warm_start, tol)
    }

    /// Largest admissible Mann coefficient (exclusive): `(1 − β) / 2`.
    pub fn mann_upper_bound(&self) -> f64 {
        (1.0 - self.modulus) / 2.0
    }
}

pub fn apply_map(map: &CompositeProjectionMap, x: &Vector, tol: f64) -> Result<Vector, FixedPointError> {
    Ok(map.apply_with(x, None, tol)?.y)
}

/// `(1 − β_n) t + β_n s` for `s = S t`.
pub fn mann_combination(t: &Vector, s: &Vector, beta_n: f64) -> Vector {
    t * (1.0 - beta_n) + s * beta_n
}

/// `(1 − β_n) t + β_n S(t)`, with `β_n` checked against `(0, (1 − β)/2)`.
pub fn mann_step(map: &CompositeProjectionMap, t: &Vector, beta_n: f64, tol: f64) -> Result<Vector, FixedPointError> {
    let upper = map.mann_upper_bound();
    if !(beta_n > 0.0 && beta_n < upper) {
        return Err(FixedPointError::ParameterOutOfRange { value: beta_n, upper });
    }
    let s = apply_map(map, t, tol)?;
    Ok(mann_combination(t, &s, beta_n))
}

pub fn evaluate_operator(op: &Operator, x: &Vector) -> Vector {
    match &op.kind {
        OperatorKind::Shift { anchor } => x - anchor,
    }
}

/// `t = z − α F(z)`, i.e. `G^α(z)`.
pub fn viscosity_point(op: &Operator, z: &Vector, alpha: f64) -> Vector {
    z - evaluate_operator(op, z) * alpha
}

/// Contraction factor of `G^μ`: `√(1 − μ(2η − μL²))`.
pub fn contraction_factor(op: &Operator, mu: f64) -> f64 {
    let l2 = op.lipschitz * op.lipschitz;
    (1.0 - mu * (2.0 * op.eta - mu * l2)).max(0.0).sqrt()
}
