//! Strictly convex QPs over polyhedra, and the projections built on them.
//!
//! Every subproblem has the form
//!
//! ```text
//!     minimize    ½ yᵀ H y + cᵀ y
//!     subject to  A y ≤ b
//! ```
//!
//! with `H` symmetric positive definite. With `y(λ) = −H⁻¹(c + Aᵀλ)` the dual
//! is a nonnegativity-constrained concave quadratic in `λ ∈ ℝ^k`:
//!
//! ```text
//!     maximize    −½ λᵀ (A H⁻¹ Aᵀ) λ + λᵀ (A y₀ − b),    λ ≥ 0,
//! ```
//!
//! where `y₀ = −H⁻¹c`. [`PreparedQp`] runs accelerated projected gradient
//! ascent on that dual (projection onto the orthant is a clamp) with
//! gradient-based restarts. Every few sweeps it guesses the active set from
//! the positive multipliers and solves the equality-constrained KKT system for
//! that set directly; when the guess is right this gives the optimum to
//! round-off instead of to the slow tail of the first-order method.
//!
//! [`brute_force_qp`] is an independent oracle for tests: it enumerates every
//! active set and solves the full KKT system with LU.

use nalgebra::Cholesky;
use nalgebra::Dyn;

use crate::error::QpError;
use crate::linalg::{Matrix, Vector};
use crate::model::{HalfSpace, PolyhedralSet};

/// Largest constraint count accepted by [`brute_force_qp`].
pub const BRUTE_FORCE_MAX_CONSTRAINTS: usize = 12;

/// `½ yᵀ H y + cᵀ y` over a polyhedron.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticSubproblem {
    pub h: Matrix,
    pub c: Vector,
    pub set: PolyhedralSet,
}

impl QuadraticSubproblem {
    pub fn new(h: Matrix, c: Vector, set: PolyhedralSet) -> Result<Self, QpError> {
        let m = set.dim();
        if h.shape() != (m, m) || c.len() != m {
            return Err(QpError::DimensionMismatch(format!(
                "H is {:?}, c has length {}, set lives in dimension {m}",
                h.shape(),
                c.len()
            )));
        }
        Ok(Self { h, c, set })
    }

    pub fn objective(&self, y: &Vector) -> f64 {
        0.5 * y.dot(&(&self.h * y)) + self.c.dot(y)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QpSolution {
    pub y: Vector,
    /// Multipliers `λ ≥ 0`, one per constraint row.
    pub multipliers: Vector,
    /// Max of primal infeasibility, stationarity `‖Hy + c + Aᵀλ‖_∞` and
    /// complementarity `max |λ_i (Ay − b)_i|`.
    pub kkt_residual: f64,
    pub active_set: Vec<usize>,
    pub iterations: usize,
}

/// A QP with fixed `H` and constraint set, ready to be solved for many
/// linear terms `c`.
#[derive(Debug, Clone)]
pub struct PreparedQp {
    h: Matrix,
    chol: Cholesky<f64, Dyn>,
    set: PolyhedralSet,
    /// `1/‖a_i‖` per row (1 for zero rows). The dual iteration works on the
    /// row-normalized system `DA y ≤ Db`, which keeps nearly parallel rows of
    /// very different length from stalling it.
    row_scale: Vector,
    /// `Db`.
    b_scaled: Vector,
    /// `H⁻¹ (DA)ᵀ`, `m × k`.
    h_inv_at: Matrix,
    /// `DA H⁻¹ (DA)ᵀ`, `k × k`.
    gram: Matrix,
    /// Largest eigenvalue of `gram`: the dual gradient's Lipschitz constant.
    lipschitz: f64,
    iteration_cap: usize,
}

impl PreparedQp {
    pub fn new(h: Matrix, set: PolyhedralSet) -> Result<Self, QpError> {
        let m = set.dim();
        if h.shape() != (m, m) {
            return Err(QpError::DimensionMismatch(format!(
                "H is {:?} for dimension {m}",
                h.shape()
            )));
        }
        let chol = Cholesky::new(crate::linalg::symmetric_part(&h)).ok_or(QpError::NotPositiveDefinite)?;
        let row_scale = Vector::from_fn(set.num_constraints(), |i, _| {
            let norm = set.a.row(i).norm();
            if norm > 0.0 {
                1.0 / norm
            } else {
                1.0
            }
        });
        let a_scaled = Matrix::from_diagonal(&row_scale) * &set.a;
        let b_scaled = set.b.component_mul(&row_scale);
        let h_inv_at = chol.solve(&a_scaled.transpose());
        let gram = crate::linalg::symmetric_part(&(&a_scaled * &h_inv_at));
        let lipschitz = if gram.nrows() == 0 {
            0.0
        } else {
            crate::linalg::eigen_extremes(&gram).1.max(0.0)
        };
        let k = set.num_constraints();
        Ok(Self {
            h,
            chol,
            iteration_cap: (50 * k * m).max(100),
            set,
            row_scale,
            b_scaled,
            h_inv_at,
            gram,
            lipschitz,
        })
    }

    /// Euclidean projection onto `set` (`H = I`).
    pub fn projector(set: PolyhedralSet) -> Result<Self, QpError> {
        let m = set.dim();
        Self::new(Matrix::identity(m, m), set)
    }

    pub fn set(&self) -> &PolyhedralSet {
        &self.set
    }

    pub fn hessian(&self) -> &Matrix {
        &self.h
    }

    pub fn iteration_cap(&self) -> usize {
        self.iteration_cap
    }

    /// Solves for linear term `c`. `warm_start` is a previous multiplier vector.
    pub fn solve(&self, c: &Vector, warm_start: Option<&Vector>, tol: f64) -> Result<QpSolution, QpError> {
        let m = self.set.dim();
        let k = self.set.num_constraints();
        if c.len() != m {
            return Err(QpError::DimensionMismatch(format!("c has length {} for dimension {m}", c.len())));
        }
        let y0 = -self.chol.solve(c);
        if k == 0 {
            return Ok(self.finish(c, &y0, Vector::zeros(0), 0));
        }
        // Slack of the unconstrained minimizer; the dual gradient is s0 − gram·λ.
        let s0 = (&self.set.a * &y0).component_mul(&self.row_scale) - &self.b_scaled;

        // Cheap exits: the unconstrained optimum, then the warm active set.
        let empty = Vector::zeros(k);
        if let Some(sol) = self.accept(c, &y0, &s0, empty.clone(), tol, 0) {
            return Ok(sol);
        }
        let mut lam = match warm_start {
            Some(w) if w.len() == k => w.component_div(&self.row_scale).map(|v| v.max(0.0)),
            _ => empty,
        };
        if lam.iter().any(|&v| v > 0.0) {
            if let Some(sol) = self.polish(c, &y0, &s0, &positive_support(&lam), tol, 0) {
                return Ok(sol);
            }
        }

        if self.lipschitz == 0.0 {
            // Every row of A is zero and some b_i < 0.
            return Err(QpError::InfeasibleSet);
        }
        let step = 1.0 / self.lipschitz;
        let mut v = lam.clone();
        let mut momentum = 1.0f64;
        let mut best: Option<(f64, Vector)> = None;

        for it in 1..=self.iteration_cap {
            let grad_v = &s0 - &self.gram * &v;
            let next = (&v + &grad_v * step).map(|x| x.max(0.0));
            let t_next = 0.5 * (1.0 + (1.0 + 4.0 * momentum * momentum).sqrt());
            // Restart when the gradient-mapping step points against the move.
            if (&next - &v).dot(&(&next - &lam)) < 0.0 {
                momentum = 1.0;
                v = next.clone();
            } else {
                v = &next + (&next - &lam) * ((momentum - 1.0) / t_next);
                momentum = t_next;
            }
            lam = next;

            let grad = &s0 - &self.gram * &lam;
            let res = dual_residual(&lam, &grad);
            if best.as_ref().is_none_or(|(r, _)| res < *r) {
                best = Some((res, lam.clone()));
            }
            if res <= tol {
                if let Some(sol) = self.accept(c, &y0, &s0, lam.clone(), tol, it) {
                    return Ok(sol);
                }
            }
            if it % 5 == 0 || it < 5 {
                let support = positive_support(&lam);
                if let Some(sol) = self.polish(c, &y0, &s0, &support, tol, it) {
                    return Ok(sol);
                }
                let near: Vec<usize> = (0..k).filter(|&i| lam[i] > 0.0 || grad[i] > -tol.sqrt()).collect();
                if near != support {
                    if let Some(sol) = self.polish(c, &y0, &s0, &near, tol, it) {
                        return Ok(sol);
                    }
                }
            }
            if it % 32 == 0 && lam.amax() > 1e3 && self.farkas_certificate(&lam) {
                return Err(QpError::InfeasibleSet);
            }
        }

        if self.farkas_certificate(&lam) {
            return Err(QpError::InfeasibleSet);
        }
        let (_, lam_best) = best.expect("at least one sweep ran");
        let sol = self.finish(c, &y0, lam_best, self.iteration_cap);
        Err(QpError::IterationLimitExceeded {
            limit: self.iteration_cap,
            best: Box::new(sol),
        })
    }

    /// Dual active-set refinement from `support`: solve the equality-
    /// constrained KKT system, drop the most negative multiplier or add the
    /// most violated row, and repeat until optimal to `tol`.
    fn polish(
        &self,
        c: &Vector,
        y0: &Vector,
        s0: &Vector,
        support: &[usize],
        tol: f64,
        iterations: usize,
    ) -> Option<QpSolution> {
        let k = self.set.num_constraints();
        let mut working = support.to_vec();
        for _ in 0..2 * k + 4 {
            let mut lam = Vector::zeros(k);
            if !working.is_empty() {
                let w = working.len();
                let sub = Matrix::from_fn(w, w, |r, s| self.gram[(working[r], working[s])]);
                let rhs = Vector::from_fn(w, |r, _| s0[working[r]]);
                let sol = match Cholesky::new(sub.clone()) {
                    Some(ch) => ch.solve(&rhs),
                    None => sub.lu().solve(&rhs)?,
                };
                if sol.iter().any(|v| !v.is_finite()) {
                    return None;
                }
                let (r, most_negative) = sol.argmin();
                if most_negative < -1e-12 * sol.amax().max(1.0) {
                    working.remove(r);
                    continue;
                }
                for (r, &i) in working.iter().enumerate() {
                    lam[i] = sol[r].max(0.0);
                }
            }
            let grad = s0 - &self.gram * &lam;
            let violated = (0..k)
                .filter(|i| !working.contains(i))
                .map(|i| (i, grad[i]))
                .fold(None, |acc: Option<(usize, f64)>, (i, g)| match acc {
                    Some((_, best)) if best >= g => acc,
                    _ => Some((i, g)),
                });
            match violated {
                Some((i, g)) if g > tol => {
                    working.push(i);
                    working.sort_unstable();
                }
                _ => return self.accept(c, y0, s0, lam, tol, iterations),
            }
        }
        None
    }

    fn accept(
        &self,
        c: &Vector,
        y0: &Vector,
        s0: &Vector,
        lam: Vector,
        tol: f64,
        iterations: usize,
    ) -> Option<QpSolution> {
        let grad = s0 - &self.gram * &lam;
        if dual_residual(&lam, &grad) > tol {
            return None;
        }
        let sol = self.finish(c, y0, lam, iterations);
        (sol.kkt_residual <= tol).then_some(sol)
    }

    /// Builds the solution from scaled multipliers `lam`.
    fn finish(&self, c: &Vector, y0: &Vector, lam: Vector, iterations: usize) -> QpSolution {
        let y = if lam.is_empty() { y0.clone() } else { y0 - &self.h_inv_at * &lam };
        let lam = lam.component_mul(&self.row_scale);
        let kkt_residual = kkt_residual(&self.h, c, &self.set, &y, &lam);
        let active_set = (0..self.set.num_constraints())
            .filter(|&i| {
                let slack = self.set.b[i] - self.set.a.row(i).dot(&y.transpose());
                lam[i] > 0.0 || slack.abs() <= 1e-9 * (1.0 + self.set.b[i].abs())
            })
            .collect();
        QpSolution {
            y,
            multipliers: lam,
            kkt_residual,
            active_set,
            iterations,
        }
    }

    /// `λ ≥ 0` with `Aᵀλ ≈ 0` and `bᵀλ < 0` proves `{Ay ≤ b}` empty.
    fn farkas_certificate(&self, lam: &Vector) -> bool {
        let d = lam.component_mul(&self.row_scale);
        let scale = d.amax();
        if scale == 0.0 {
            return false;
        }
        let d = d / scale;
        let gap = -self.set.b.dot(&d);
        if !(gap > 0.0) {
            return false;
        }
        let combo = self.set.a.transpose() * &d;
        combo.norm() <= 1e-7 * gap
    }
}

fn positive_support(lam: &Vector) -> Vec<usize> {
    (0..lam.len()).filter(|&i| lam[i] > 0.0).collect()
}

/// Residual in dual coordinates: `grad = Ay − b` for `y = y(λ)`.
fn dual_residual(lam: &Vector, grad: &Vector) -> f64 {
    lam.iter()
        .zip(grad.iter())
        .fold(0.0f64, |acc, (&l, &g)| acc.max(g.max(0.0)).max((l * g).abs()))
}

/// KKT residual of `(y, λ)` evaluated from the original data.
pub fn kkt_residual(h: &Matrix, c: &Vector, set: &PolyhedralSet, y: &Vector, lam: &Vector) -> f64 {
    let mut stationarity = h * y + c;
    if set.num_constraints() > 0 {
        stationarity += set.a.transpose() * lam;
    }
    let mut res = stationarity.amax();
    if set.num_constraints() > 0 {
        let slack = &set.a * y - &set.b;
        for i in 0..slack.len() {
            res = res.max(slack[i].max(0.0)).max((lam[i] * slack[i]).abs()).max((-lam[i]).max(0.0));
        }
    }
    res
}

/// Minimizes `½ yᵀHy + cᵀy` over `qp.set` to KKT residual `tol`.
pub fn solve_qp(
    qp: &QuadraticSubproblem,
    warm_start: Option<&Vector>,
    tol: f64,
) -> Result<QpSolution, QpError> {
    PreparedQp::new(qp.h.clone(), qp.set.clone())?.solve(&qp.c, warm_start, tol)
}

/// Exhaustive active-set oracle, for tests on small problems.
pub fn brute_force_qp(qp: &QuadraticSubproblem) -> Result<Vector, QpError> {
    let k = qp.set.num_constraints();
    let m = qp.set.dim();
    if k > BRUTE_FORCE_MAX_CONSTRAINTS {
        return Err(QpError::DimensionTooLarge {
            got: k,
            max: BRUTE_FORCE_MAX_CONSTRAINTS,
        });
    }
    let feas_tol = 1e-9 * (1.0 + qp.set.b.amax());
    let mut best: Option<(f64, Vector)> = None;
    for mask in 0u32..(1u32 << k) {
        let rows: Vec<usize> = (0..k).filter(|i| mask & (1 << i) != 0).collect();
        let w = rows.len();
        if w > m {
            continue;
        }
        let a_w = Matrix::from_fn(w, m, |r, s| qp.set.a[(rows[r], s)]);
        if w > 0 {
            let sv = a_w.clone().svd(false, false).singular_values;
            let (lo, hi) = (sv.min(), sv.max());
            if hi == 0.0 || lo <= 1e-10 * hi {
                continue;
            }
        }
        let mut kkt = Matrix::zeros(m + w, m + w);
        kkt.view_mut((0, 0), (m, m)).copy_from(&qp.h);
        kkt.view_mut((0, m), (m, w)).copy_from(&a_w.transpose());
        kkt.view_mut((m, 0), (w, m)).copy_from(&a_w);
        let mut rhs = Vector::zeros(m + w);
        rhs.rows_mut(0, m).copy_from(&(-&qp.c));
        for (r, &i) in rows.iter().enumerate() {
            rhs[m + r] = qp.set.b[i];
        }
        let Some(sol) = kkt.lu().solve(&rhs) else {
            continue;
        };
        let y = sol.rows(0, m).into_owned();
        let lam = sol.rows(m, w);
        if lam.iter().any(|&l| l < -1e-9) || qp.set.violation(&y) > feas_tol {
            continue;
        }
        let value = qp.objective(&y);
        if best.as_ref().is_none_or(|(v, _)| value < *v) {
            best = Some((value, y));
        }
    }
    best.map(|(_, y)| y).ok_or(QpError::InfeasibleSet)
}

/// `x − max(0, (⟨h, x⟩ − l)/‖h‖²) h`.
pub fn project_halfspace(hs: &HalfSpace, x: &Vector) -> Vector {
    let excess = hs.normal.dot(x) - hs.offset;
    if excess <= 0.0 {
        return x.clone();
    }
    x - &hs.normal * (excess / hs.normal.norm_squared())
}

/// Euclidean projection onto a polyhedron.
pub fn project_polyhedron(set: &PolyhedralSet, x: &Vector, tol: f64) -> Result<Vector, QpError> {
    Ok(PreparedQp::projector(set.clone())?.solve(&(-x), None, tol)?.y)
}

/// The minimum-norm point of `set`, or [`QpError::InfeasibleSet`].
pub fn find_feasible_point(set: &PolyhedralSet, tol: f64) -> Result<Vector, QpError> {
    let m = set.dim();
    match PreparedQp::projector(set.clone())?.solve(&Vector::zeros(m), None, tol) {
        Ok(sol) => Ok(sol.y),
        Err(QpError::IterationLimitExceeded { best, .. }) if set.violation(&best.y) <= 1e-8 => Ok(best.y),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_box() -> PolyhedralSet {
        PolyhedralSet::new(
            Matrix::from_row_slice(4, 2, &[1.0, 0.0, 0.0, 1.0, -1.0, 0.0, 0.0, -1.0]),
            Vector::from_vec(vec![1.0, 1.0, 0.0, 0.0]),
        )
        .unwrap()
    }

    fn v(xs: &[f64]) -> Vector {
        Vector::from_column_slice(xs)
    }

    #[test]
    fn halfspace_projection_examples() {
        let hs = HalfSpace::new(v(&[1.0, 0.0]), 1.0).unwrap();
        assert_eq!(project_halfspace(&hs, &v(&[0.5, 3.0])), v(&[0.5, 3.0]));
        assert_eq!(project_halfspace(&hs, &v(&[2.0, 0.0])), v(&[1.0, 0.0]));
        let diag = HalfSpace::new(v(&[1.0, 1.0]), 0.0).unwrap();
        assert_eq!(project_halfspace(&diag, &v(&[1.0, 1.0])), v(&[0.0, 0.0]));
    }

    #[test]
    fn unconstrained_minimum_is_exact() {
        let xbar = v(&[0.3, -2.0, 5.0]);
        let qp = QuadraticSubproblem::new(Matrix::identity(3, 3), -&xbar, PolyhedralSet::unconstrained(3)).unwrap();
        let sol = solve_qp(&qp, None, 1e-10).unwrap();
        assert_eq!(sol.y, xbar);
        assert_eq!(brute_force_qp(&qp).unwrap(), xbar);
    }

    #[test]
    fn clipped_optimum() {
        let set = PolyhedralSet::new(
            Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]),
            v(&[1.0, 1.0]),
        )
        .unwrap();
        let qp = QuadraticSubproblem::new(Matrix::identity(2, 2), v(&[-2.0, 0.0]), set).unwrap();
        let sol = solve_qp(&qp, None, 1e-10).unwrap();
        let oracle = brute_force_qp(&qp).unwrap();
        assert!((&sol.y - v(&[1.0, 0.0])).amax() < 1e-12);
        assert!((&sol.y - &oracle).amax() < 1e-8);
        assert_eq!(sol.active_set, vec![0]);
        assert!(sol.kkt_residual <= 1e-10);
    }

    #[test]
    fn lower_bound_with_anisotropic_hessian() {
        let set = PolyhedralSet::new(Matrix::from_row_slice(1, 2, &[-1.0, 0.0]), v(&[-1.0])).unwrap();
        let h = Matrix::from_diagonal(&v(&[1.0, 2.0]));
        let qp = QuadraticSubproblem::new(h, v(&[0.0, 0.0]), set).unwrap();
        let sol = solve_qp(&qp, None, 1e-10).unwrap();
        assert!((&sol.y - v(&[1.0, 0.0])).amax() < 1e-12);
        assert!((&brute_force_qp(&qp).unwrap() - v(&[1.0, 0.0])).amax() < 1e-12);
        assert!((sol.multipliers[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn box_projection_clips() {
        let y = project_polyhedron(&unit_box(), &v(&[2.0, -1.0]), 1e-10).unwrap();
        assert!((&y - v(&[1.0, 0.0])).amax() < 1e-12);
        let inside = v(&[0.25, 0.75]);
        assert_eq!(project_polyhedron(&unit_box(), &inside, 1e-10).unwrap(), inside);
    }

    #[test]
    fn single_row_polyhedron_matches_halfspace() {
        let hs = HalfSpace::new(v(&[1.0, 2.0, -1.0]), 0.5).unwrap();
        let x = v(&[3.0, 1.0, -2.0]);
        let a = project_halfspace(&hs, &x);
        let b = project_polyhedron(&PolyhedralSet::from(&hs), &x, 1e-12).unwrap();
        assert!((a - b).amax() < 1e-12);
    }

    #[test]
    fn detects_empty_set() {
        let set = PolyhedralSet::new(
            Matrix::from_row_slice(2, 2, &[1.0, 0.0, -1.0, 0.0]),
            v(&[-1.0, -1.0]),
        )
        .unwrap();
        assert!(matches!(find_feasible_point(&set, 1e-10), Err(QpError::InfeasibleSet)));
        let qp = QuadraticSubproblem::new(Matrix::identity(2, 2), v(&[0.0, 0.0]), set).unwrap();
        assert!(matches!(brute_force_qp(&qp), Err(QpError::InfeasibleSet)));
    }

    #[test]
    fn oracle_rejects_large_problems() {
        let set = PolyhedralSet::new(Matrix::zeros(13, 2), Vector::from_element(13, 1.0)).unwrap();
        let qp = QuadraticSubproblem::new(Matrix::identity(2, 2), v(&[0.0, 0.0]), set).unwrap();
        assert!(matches!(
            brute_force_qp(&qp),
            Err(QpError::DimensionTooLarge { got: 13, max: 12 })
        ));
    }

    #[test]
    fn warm_start_reaches_same_point() {
        let prepared = PreparedQp::projector(unit_box()).unwrap();
        let cold = prepared.solve(&v(&[-3.0, 2.0]), None, 1e-10).unwrap();
        let warm = prepared.solve(&v(&[-3.0, 2.0]), Some(&cold.multipliers), 1e-10).unwrap();
        assert!((&cold.y - &warm.y).amax() < 1e-12);
        let again = prepared.solve(&v(&[-3.0, 2.0]), None, 1e-10).unwrap();
        assert_eq!(cold, again);
    }

    #[test]
    fn rejects_indefinite_hessian() {
        let h = Matrix::from_diagonal(&v(&[1.0, -1.0]));
        assert!(matches!(
            PreparedQp::new(h, unit_box()),
            Err(QpError::NotPositiveDefinite)
        ));
    }
}
