//! Random Nash–Cournot-type instances.
//!
//! For each bifunction, eigenvalues `λ₁ ∈ [−m, 0]` and `λ₂ ∈ [0, m]` are drawn
//! and conjugated by independent random orthogonal matrices, giving an NSD
//! `T_i` and a PSD `Q_i`; then `P_i = Q_i − T_i` and `q_i = 0`. Entries of `A`
//! and of every `h_j` are uniform on `[−m, m]`, entries of `b` and every `l_j`
//! on `[1, m]`. Because `b > 0` and `l_j > 0`, the origin lies in `C` and in
//! every `T_j`, and it solves every equilibrium problem; with `F(x) = x − a`
//! it is the recorded solution.
//!
//! Randomness comes from ChaCha8 seeded with the spec's seed, one stream per
//! block so that changing one block's size leaves the others untouched:
//!
//! | stream      | contents                               |
//! |-------------|----------------------------------------|
//! | 0           | `A` (row-major), then `b`              |
//! | 1           | `h_1, l_1, h_2, l_2, …`                |
//! | 2 + 3i      | `λ₁` then `λ₂` for bifunction `i`      |
//! | 3 + 3i      | orthogonal factor of `Q_i`             |
//! | 4 + 3i      | orthogonal factor of `T_i`             |

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::linalg::{symmetric_part, Matrix, Vector};
use crate::model::{HalfSpace, LinearBifunction, Operator, PolyhedralSet, ProblemInstance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    /// Space dimension.
    pub m: usize,
    /// Rows of `A`.
    pub k: usize,
    pub n_bifunctions: usize,
    pub m_maps: usize,
    pub seed: u64,
}

impl GeneratorSpec {
    /// `m = 10`, `k = 20`, `N = 5`, `M = 20`.
    pub fn standard(seed: u64) -> Self {
        Self {
            m: 10,
            k: 20,
            n_bifunctions: 5,
            m_maps: 20,
            seed,
        }
    }

    pub fn is_valid(&self) -> bool {
        self.m >= 1 && self.k >= 1 && self.n_bifunctions >= 1 && self.m_maps >= 1
    }
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Haar-distributed orthogonal matrix: QR of a Gaussian matrix with the signs
/// fixed so that `R` has a positive diagonal.
pub fn random_orthogonal<R: Rng>(dim: usize, rng: &mut R) -> Matrix {
    let gaussian = Matrix::from_fn(dim, dim, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = gaussian.qr();
    let r = qr.r();
    let mut q = qr.q();
    for (j, mut col) in q.column_iter_mut().enumerate() {
        if r[(j, j)] < 0.0 {
            col.neg_mut();
        }
    }
    q
}

fn conjugate(u: &Matrix, eigenvalues: &Vector) -> Matrix {
    symmetric_part(&(u * Matrix::from_diagonal(eigenvalues) * u.transpose()))
}

/// Builds the instance described by `spec`. Panics if any size is zero.
pub fn generate_instance(spec: &GeneratorSpec) -> ProblemInstance {
    assert!(spec.is_valid(), "generator sizes must all be at least 1: {spec:?}");
    let m = spec.m;
    let mf = m as f64;

    let mut rng = stream(spec.seed, 0);
    let mut a = Matrix::zeros(spec.k, m);
    for i in 0..spec.k {
        for j in 0..m {
            a[(i, j)] = rng.random_range(-mf..=mf);
        }
    }
    let b = Vector::from_fn(spec.k, |_, _| rng.random_range(1.0..=mf));
    let feasible_set = PolyhedralSet { a, b };

    let mut rng = stream(spec.seed, 1);
    let halfspaces = (0..spec.m_maps)
        .map(|_| {
            let normal = Vector::from_fn(m, |_, _| rng.random_range(-mf..=mf));
            let offset = rng.random_range(1.0..=mf);
            HalfSpace { normal, offset }
        })
        .collect();

    let bifunctions = (0..spec.n_bifunctions)
        .map(|i| {
            let base = 2 + 3 * i as u64;
            let mut rng = stream(spec.seed, base);
            let nsd_eigs = Vector::from_fn(m, |_, _| rng.random_range(-mf..=0.0));
            let psd_eigs = Vector::from_fn(m, |_, _| rng.random_range(0.0..=mf));
            let q = conjugate(&random_orthogonal(m, &mut stream(spec.seed, base + 1)), &psd_eigs);
            let t = conjugate(&random_orthogonal(m, &mut stream(spec.seed, base + 2)), &nsd_eigs);
            LinearBifunction {
                p: &q - &t,
                q,
                offset: Vector::zeros(m),
            }
        })
        .collect();

    ProblemInstance {
        feasible_set,
        bifunctions,
        halfspaces,
        map_modulus: 0.0,
        operator: Operator::shift(Vector::from_element(m, 1.0)),
        known_solution: Some(Vector::zeros(m)),
    }
}
