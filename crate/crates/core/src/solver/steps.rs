use rayon::prelude::*;

use super::{select_furthest, Solver, SolverState, StepDetail, WarmStarts};
use crate::error::{QpError, SolverError, Stage};
use crate::fixed_point::{mann_combination, viscosity_point};
use crate::linalg::Vector;
use crate::qp::{PreparedQp, QpSolution};

/// Outputs of steps 1 and 2 for every bifunction.
struct Extragradient {
    y: Vec<Vector>,
    z: Vec<Vector>,
    predictor_duals: Vec<Option<Vector>>,
}

/// `S_j t` for every map.
struct MapImages {
    images: Vec<Vector>,
    duals: Vec<Option<Vector>>,
}

fn subproblem(iteration: usize, stage: Stage, index: usize) -> impl Fn(QpError) -> SolverError {
    move |source| SolverError::Subproblem {
        iteration,
        stage,
        index,
        source,
    }
}

fn split(results: Vec<QpSolution>) -> (Vec<Vector>, Vec<Option<Vector>>) {
    results.into_iter().map(|s| (s.y, Some(s.multipliers))).unzip()
}

impl Solver {
    fn extragradient_steps(&self, state: &SolverState) -> Result<Extragradient, SolverError> {
        let x = &state.x;
        let tol = self.config.inner_tol;
        let n = state.n;
        let warm = &state.warm.predictor;

        let predictor: Vec<QpSolution> = self
            .proximal
            .par_iter()
            .enumerate()
            .map(|(i, op)| {
                op.step(x, x, warm.get(i).and_then(Option::as_ref), tol)
                    .map_err(subproblem(n, Stage::Predictor, i))
            })
            .collect::<Result<_, _>>()?;

        // The corrector shares H with the predictor, so its multipliers are a
        // good starting guess.
        let corrector: Vec<QpSolution> = self
            .proximal
            .par_iter()
            .zip(predictor.par_iter())
            .enumerate()
            .map(|(i, (op, pred))| {
                op.step(x, &pred.y, Some(&pred.multipliers), tol)
                    .map_err(subproblem(n, Stage::Corrector, i))
            })
            .collect::<Result<_, _>>()?;

        let (y, predictor_duals) = split(predictor);
        let (z, _) = split(corrector);
        Ok(Extragradient { y, z, predictor_duals })
    }

    fn map_images(&self, state: &SolverState, t: &Vector) -> Result<MapImages, SolverError> {
        let tol = self.config.inner_tol;
        let n = state.n;
        let warm = &state.warm.maps;
        let results: Vec<QpSolution> = self
            .maps
            .par_iter()
            .enumerate()
            .map(|(j, map)| {
                map.apply_with(t, warm.get(j).and_then(Option::as_ref), tol)
                    .map_err(subproblem(n, Stage::FixedPointMap, j))
            })
            .collect::<Result<_, _>>()?;
        let (images, duals) = split(results);
        Ok(MapImages { images, duals })
    }

    fn mann_points(&self, t: &Vector, images: &[Vector]) -> Vec<Vector> {
        images
            .iter()
            .enumerate()
            .map(|(j, s)| mann_combination(t, s, self.config.beta.value(j)))
            .collect()
    }

    /// One step of the furthest-point method.
    pub fn iterate_alg1(&self, state: &SolverState) -> Result<SolverState, SolverError> {
        let alpha = self.alpha(state.n);
        let eg = self.extragradient_steps(state)?;
        let (i_n, z_bar) = select_furthest(&eg.z, &state.x)?;
        let t = viscosity_point(&self.instance.operator, z_bar, alpha);
        let maps = self.map_images(state, &t)?;
        let u = self.mann_points(&t, &maps.images);
        let (j_n, next) = select_furthest(&u, &t)?;
        let next = next.clone();
        let combined_z = z_bar.clone();
        Ok(SolverState {
            n: state.n + 1,
            x: next,
            step: Some(StepDetail {
                alpha,
                y: eg.y,
                combined_z,
                z: eg.z,
                selected_i: Some(i_n),
                t,
                u,
                selected_j: Some(j_n),
            }),
            warm: WarmStarts {
                predictor: eg.predictor_duals,
                maps: maps.duals,
            },
        })
    }

    /// One step of the convex-combination method.
    pub fn iterate_alg2(&self, state: &SolverState) -> Result<SolverState, SolverError> {
        let alpha = self.alpha(state.n);
        let eg = self.extragradient_steps(state)?;
        let z_n = weighted_sum(&eg.z, &self.config.weights_w, state.x.len());
        let t = viscosity_point(&self.instance.operator, &z_n, alpha);
        let maps = self.map_images(state, &t)?;
        let u = self.mann_points(&t, &maps.images);
        let next = weighted_sum(&u, &self.config.weights_gamma, state.x.len());
        Ok(SolverState {
            n: state.n + 1,
            x: next,
            step: Some(StepDetail {
                alpha,
                y: eg.y,
                z: eg.z,
                combined_z: z_n,
                selected_i: None,
                t,
                u,
                selected_j: None,
            }),
            warm: WarmStarts {
                predictor: eg.predictor_duals,
                maps: maps.duals,
            },
        })
    }

    /// One step of the hybrid baseline: extragradient and Mann steps as in
    /// alg1, then `x_{n+1} = P_{C ∩ C_n ∩ Q_n}(x_0)` with
    /// `C_n = {z : ‖v_n − z‖ ≤ ‖x_n − z‖}` and
    /// `Q_n = {z : ⟨x_0 − x_n, z − x_n⟩ ≤ 0}`.
    pub fn iterate_phem(&self, state: &SolverState, x0: &Vector) -> Result<SolverState, SolverError> {
        let x = &state.x;
        let eg = self.extragradient_steps(state)?;
        let (i_n, z_bar) = select_furthest(&eg.z, x)?;
        let z_bar = z_bar.clone();
        let maps = self.map_images(state, &z_bar)?;
        let u = self.mann_points(&z_bar, &maps.images);
        let (j_n, v_n) = select_furthest(&u, x)?;

        let mut rows = Vec::with_capacity(2);
        // ‖v − z‖² ≤ ‖x − z‖²  ⇔  2⟨x − v, z⟩ ≤ ‖x‖² − ‖v‖².
        let c_normal = (x - v_n) * 2.0;
        if c_normal.amax() > 0.0 {
            rows.push((c_normal, x.norm_squared() - v_n.norm_squared()));
        }
        let q_normal = x0 - x;
        if q_normal.amax() > 0.0 {
            let offset = q_normal.dot(x);
            rows.push((q_normal, offset));
        }
        let set = self.instance.feasible_set.with_rows(&rows);
        let to_step_error = subproblem(state.n, Stage::HybridProjection, 0);
        let projector = PreparedQp::projector(set).map_err(&to_step_error)?;
        let next = match projector.solve(&-x0, None, self.config.inner_tol) {
            Ok(sol) => sol.y,
            Err(QpError::InfeasibleSet) => return Err(SolverError::EmptyIntersection { iteration: state.n }),
            Err(e) => return Err(to_step_error(e)),
        };
        Ok(SolverState {
            n: state.n + 1,
            x: next,
            step: Some(StepDetail {
                alpha: 0.0,
                y: eg.y,
                z: eg.z,
                combined_z: z_bar.clone(),
                selected_i: Some(i_n),
                t: z_bar,
                u,
                selected_j: Some(j_n),
            }),
            warm: WarmStarts {
                predictor: eg.predictor_duals,
                maps: maps.duals,
            },
        })
    }
}

/// `Σ_i w_i v_i`, accumulated in ascending index order.
pub(crate) fn weighted_sum(vectors: &[Vector], weights: &[f64], dim: usize) -> Vector {
    let mut acc = Vector::zeros(dim);
    for (v, &w) in vectors.iter().zip(weights) {
        acc.axpy(w, v, 1.0);
    }
    acc
}
