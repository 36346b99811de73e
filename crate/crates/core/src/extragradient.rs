//! Bifunction evaluation, Lipschitz-type constants and the proximal
//! (extragradient) subproblems.
//!
//! For `f(x, y) = ⟨Px + Qy + q, y − x⟩` the subproblem
//! `argmin { ρ f(w, y) + ½‖a − y‖² : y ∈ C }` is the QP with
//! `H = 2ρQ + I` and `c = ρ(Pw − Qw + q) − a`. Step 1 uses `w = a = x_n`,
//! step 2 uses `w = y_n^i`, `a = x_n`; both share `H`.

use serde::{Deserialize, Serialize};

use crate::error::QpError;
use crate::linalg::{self, Matrix, Vector};
use crate::model::{LinearBifunction, PolyhedralSet};
use crate::qp::{PreparedQp, QpSolution};

/// Relative tolerance of the spectral-norm power iteration.
pub const SPECTRAL_REL_TOL: f64 = 1e-10;

/// Constants `c₁, c₂` of the Lipschitz-type inequality
/// `f(x,y) + f(y,z) ≥ f(x,z) − c₁‖x−y‖² − c₂‖y−z‖²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LipschitzConstants {
    pub c1: f64,
    pub c2: f64,
}

impl LipschitzConstants {
    /// Largest admissible proximal parameter (exclusive).
    pub fn rho_bound(&self) -> f64 {
        let c = self.c1.max(self.c2);
        if c == 0.0 {
            f64::INFINITY
        } else {
            1.0 / (2.0 * c)
        }
    }
}

pub fn evaluate_bifunction(f: &LinearBifunction, x: &Vector, y: &Vector) -> f64 {
    f.evaluate(x, y)
}

/// `c₁ = c₂ = ‖P − Q‖₂ / 2`.
pub fn lipschitz_constants(f: &LinearBifunction) -> LipschitzConstants {
    let diff = &f.p - &f.q;
    // P − Q need not be symmetric, so iterate on (P − Q)ᵀ(P − Q).
    let c = 0.5 * linalg::spectral_norm(&diff, SPECTRAL_REL_TOL, 100 * f.dim().max(1));
    LipschitzConstants { c1: c, c2: c }
}

/// Family constants: the maximum over all bifunctions.
pub fn family_constants(fs: &[LinearBifunction]) -> LipschitzConstants {
    fs.iter().map(lipschitz_constants).fold(
        LipschitzConstants { c1: 0.0, c2: 0.0 },
        |acc, c| LipschitzConstants {
            c1: acc.c1.max(c.c1),
            c2: acc.c2.max(c.c2),
        },
    )
}

/// The proximal subproblem of one bifunction for a fixed `ρ`, with `H`
/// factorized once.
#[derive(Debug, Clone)]
pub struct ProximalOperator {
    bifunction: LinearBifunction,
    /// `P − Q`, used for every linear term.
    p_minus_q: Matrix,
    rho: f64,
    qp: PreparedQp,
}

impl ProximalOperator {
    pub fn new(bifunction: &LinearBifunction, rho: f64, set: &PolyhedralSet) -> Result<Self, QpError> {
        let m = bifunction.dim();
        let h = &bifunction.q * (2.0 * rho) + Matrix::identity(m, m);
        Ok(Self {
            p_minus_q: &bifunction.p - &bifunction.q,
            bifunction: bifunction.clone(),
            rho,
            qp: PreparedQp::new(h, set.clone())?,
        })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn bifunction(&self) -> &LinearBifunction {
        &self.bifunction
    }

    /// Linear term `ρ(P w − Q w + q) − a`.
    pub fn linear_term(&self, anchor: &Vector, point: &Vector) -> Vector {
        (&self.p_minus_q * point + &self.bifunction.offset) * self.rho - anchor
    }

    /// `argmin { ρ f(point, y) + ½‖anchor − y‖² : y ∈ C }`.
    pub fn step(
        &self,
        anchor: &Vector,
        point: &Vector,
        warm_start: Option<&Vector>,
        tol: f64,
    ) -> Result<QpSolution, QpError> {
        self.qp.solve(&self.linear_term(anchor, point), warm_start, tol)
    }

    /// The subproblem objective, for checking minimality.
    pub fn objective(&self, anchor: &Vector, point: &Vector, y: &Vector) -> f64 {
        self.rho * self.bifunction.evaluate(point, y) + 0.5 * (anchor - y).norm_squared()
    }
}

/// One-shot form of [`ProximalOperator::step`].
pub fn proximal_step(
    f: &LinearBifunction,
    anchor: &Vector,
    point: &Vector,
    rho: f64,
    set: &PolyhedralSet,
    tol: f64,
) -> Result<Vector, QpError> {
    Ok(ProximalOperator::new(f, rho, set)?.step(anchor, point, None, tol)?.y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qp::{brute_force_qp, project_polyhedron, QuadraticSubproblem};

    fn v(xs: &[f64]) -> Vector {
        Vector::from_column_slice(xs)
    }

    fn diag(xs: &[f64]) -> Matrix {
        Matrix::from_diagonal(&v(xs))
    }

    fn unit_box() -> PolyhedralSet {
        PolyhedralSet::new(
            Matrix::from_row_slice(4, 2, &[1.0, 0.0, 0.0, 1.0, -1.0, 0.0, 0.0, -1.0]),
            v(&[1.0, 1.0, 0.0, 0.0]),
        )
        .unwrap()
    }

    #[test]
    fn bifunction_examples() {
        let id = LinearBifunction::new(diag(&[1.0, 1.0]), diag(&[1.0, 1.0]), v(&[0.0, 0.0])).unwrap();
        assert_eq!(evaluate_bifunction(&id, &v(&[1.0, 0.0]), &v(&[0.0, 1.0])), 0.0);
        let f = LinearBifunction::new(diag(&[2.0, 2.0]), diag(&[1.0, 1.0]), v(&[0.0, 0.0])).unwrap();
        assert_eq!(evaluate_bifunction(&f, &v(&[1.0, 0.0]), &v(&[0.0, 0.0])), -2.0);
        let x = v(&[0.3, -7.0]);
        assert_eq!(evaluate_bifunction(&f, &x, &x), 0.0);
    }

    #[test]
    fn constants_examples() {
        let same = LinearBifunction::new(diag(&[3.0, 1.0]), diag(&[3.0, 1.0]), v(&[0.0, 0.0])).unwrap();
        assert_eq!(lipschitz_constants(&same).c1, 0.0);
        let f = LinearBifunction::new(diag(&[5.0, 3.0]), diag(&[1.0, 1.0]), v(&[0.0, 0.0])).unwrap();
        let c = lipschitz_constants(&f);
        assert!((c.c1 - 2.0).abs() < 1e-9 && c.c1 == c.c2);
        let fam = family_constants(&[same, f]);
        assert!((fam.c1 - 2.0).abs() < 1e-9);
    }

    #[test]
    fn zero_bifunction_reduces_to_projection() {
        let zero = LinearBifunction::new(Matrix::zeros(2, 2), Matrix::zeros(2, 2), v(&[0.0, 0.0])).unwrap();
        let inside = v(&[0.5, 0.25]);
        let y = proximal_step(&zero, &inside, &inside, 0.3, &unit_box(), 1e-12).unwrap();
        assert!((&y - &inside).amax() < 1e-14);
        let outside = v(&[1.7, -0.4]);
        let y = proximal_step(&zero, &outside, &outside, 0.3, &unit_box(), 1e-12).unwrap();
        let p = project_polyhedron(&unit_box(), &outside, 1e-12).unwrap();
        assert!((&y - &p).amax() < 1e-12);
    }

    #[test]
    fn step_matches_oracle_qp() {
        let f = LinearBifunction::new(diag(&[2.0, 2.0]), diag(&[1.0, 1.0]), v(&[0.0, 0.0])).unwrap();
        let x = v(&[1.0, 1.0]);
        let y = proximal_step(&f, &x, &x, 0.1, &unit_box(), 1e-12).unwrap();
        // H = 1.2 I, c = 0.1·(1,1) − (1,1).
        let qp = QuadraticSubproblem::new(diag(&[1.2, 1.2]), v(&[-0.9, -0.9]), unit_box()).unwrap();
        let oracle = brute_force_qp(&qp).unwrap();
        assert!((&y - &oracle).amax() < 1e-10);
        assert!((&y - v(&[0.75, 0.75])).amax() < 1e-12);
    }
}
