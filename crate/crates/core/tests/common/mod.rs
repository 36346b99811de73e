#![allow(dead_code)]

use extravisc_core::{Matrix, PolyhedralSet, QuadraticSubproblem, Vector};
use rand::Rng;
use rand_distr::StandardNormal;

pub fn gaussian<R: Rng>(rng: &mut R, n: usize) -> Vector {
    Vector::from_fn(n, |_, _| rng.sample(StandardNormal))
}

pub fn gaussian_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// Random polyhedron around a random interior point `center`; about a third
/// of the rows pass through `center` to produce degenerate vertices.
pub fn random_polyhedron<R: Rng>(rng: &mut R, m: usize, k: usize) -> (PolyhedralSet, Vector) {
    let center = gaussian(rng, m);
    let a = gaussian_matrix(rng, k, m);
    let slack = Vector::from_fn(k, |_, _| {
        if rng.random_bool(0.3) {
            0.0
        } else {
            rng.random_range(0.0..2.0)
        }
    });
    let b = &a * &center + slack;
    (PolyhedralSet::new(a, b).unwrap(), center)
}

/// Strictly convex QP over a nonempty random polyhedron.
pub fn random_qp<R: Rng>(rng: &mut R, m: usize, k: usize) -> QuadraticSubproblem {
    let (set, _) = random_polyhedron(rng, m, k);
    let f = gaussian_matrix(rng, m, m);
    let h = f.transpose() * f + Matrix::identity(m, m) * 0.1;
    let c = gaussian(rng, m) * 3.0;
    QuadraticSubproblem::new(h, c, set).unwrap()
}

/// Feasible points of `set`: `center` and projections of random points.
pub fn feasible_samples<R: Rng>(rng: &mut R, set: &PolyhedralSet, center: &Vector, count: usize) -> Vec<Vector> {
    let mut out = vec![center.clone()];
    while out.len() < count {
        let w = center + gaussian(rng, set.dim()) * 3.0;
        out.push(extravisc_core::qp::project_polyhedron(set, &w, 1e-12).unwrap());
    }
    out
}
