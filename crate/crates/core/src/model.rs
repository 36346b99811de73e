//! Problem data, solver configuration and their validation.
//!
//! Everything here is immutable once built and is shared read-only by the
//! parallel workers. Validation is report-style: it collects every violated
//! invariant instead of stopping at the first one.
//!
//! Upper semicontinuity of the bifunctions in their first argument is not
//! checked. It cannot be decided numerically for general bifunctions and holds
//! automatically for the affine family shipped here.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::extragradient::{family_constants, LipschitzConstants};
use crate::linalg::{self, Matrix, Vector};
use crate::qp;

/// Tolerance for the PSD / NSD eigenvalue checks.
pub const EPS_PSD: f64 = 1e-8;
/// Simplex weights must sum to one within this tolerance.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;
/// Default KKT tolerance for every inner QP.
pub const DEFAULT_INNER_TOL: f64 = 1e-10;

/// `{x : ⟨h, x⟩ ≤ l}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalfSpace {
    #[serde(with = "linalg::serde_vector")]
    pub normal: Vector,
    pub offset: f64,
}

impl HalfSpace {
    pub fn new(normal: Vector, offset: f64) -> Result<Self, ModelError> {
        if normal.iter().all(|&v| v == 0.0) {
            return Err(ModelError::ZeroNormal);
        }
        Ok(Self { normal, offset })
    }

    pub fn dim(&self) -> usize {
        self.normal.len()
    }

    pub fn contains(&self, x: &Vector, tol: f64) -> bool {
        self.normal.dot(x) <= self.offset + tol
    }
}

/// `{x : A x ≤ b}` with `A` stored as `k × m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyhedralSet {
    #[serde(with = "linalg::serde_matrix")]
    pub a: Matrix,
    #[serde(with = "linalg::serde_vector")]
    pub b: Vector,
}

impl PolyhedralSet {
    /// Checks shapes only. Nonemptiness is part of instance validation.
    pub fn new(a: Matrix, b: Vector) -> Result<Self, ModelError> {
        if a.nrows() != b.len() {
            return Err(ModelError::DimensionMismatch(format!(
                "A has {} rows but b has length {}",
                a.nrows(),
                b.len()
            )));
        }
        Ok(Self { a, b })
    }

    /// The whole of `ℝ^m`.
    pub fn unconstrained(dim: usize) -> Self {
        Self {
            a: Matrix::zeros(0, dim),
            b: Vector::zeros(0),
        }
    }

    pub fn dim(&self) -> usize {
        self.a.ncols()
    }

    pub fn num_constraints(&self) -> usize {
        self.a.nrows()
    }

    /// Largest constraint violation `max(0, max_i (A x - b)_i)`.
    pub fn violation(&self, x: &Vector) -> f64 {
        if self.num_constraints() == 0 {
            return 0.0;
        }
        (&self.a * x - &self.b).max().max(0.0)
    }

    pub fn contains(&self, x: &Vector, tol: f64) -> bool {
        self.violation(x) <= tol
    }

    /// A copy with extra rows appended.
    pub fn with_rows(&self, rows: &[(Vector, f64)]) -> Self {
        let k = self.num_constraints();
        let m = self.dim();
        let mut a = Matrix::zeros(k + rows.len(), m);
        let mut b = Vector::zeros(k + rows.len());
        a.rows_mut(0, k).copy_from(&self.a);
        b.rows_mut(0, k).copy_from(&self.b);
        for (r, (normal, offset)) in rows.iter().enumerate() {
            a.row_mut(k + r).copy_from(&normal.transpose());
            b[k + r] = *offset;
        }
        Self { a, b }
    }
}

impl From<&HalfSpace> for PolyhedralSet {
    fn from(hs: &HalfSpace) -> Self {
        Self {
            a: Matrix::from_row_slice(1, hs.dim(), hs.normal.as_slice()),
            b: Vector::from_element(1, hs.offset),
        }
    }
}

/// `f(x, y) = ⟨P x + Q y + q, y − x⟩`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearBifunction {
    #[serde(with = "linalg::serde_matrix")]
    pub p: Matrix,
    #[serde(with = "linalg::serde_matrix")]
    pub q: Matrix,
    #[serde(with = "linalg::serde_vector")]
    pub offset: Vector,
}

impl LinearBifunction {
    pub fn new(p: Matrix, q: Matrix, offset: Vector) -> Result<Self, ModelError> {
        let m = offset.len();
        if p.shape() != (m, m) || q.shape() != (m, m) {
            return Err(ModelError::DimensionMismatch(format!(
                "P is {:?}, Q is {:?}, q has length {m}",
                p.shape(),
                q.shape()
            )));
        }
        Ok(Self { p, q, offset })
    }

    pub fn dim(&self) -> usize {
        self.offset.len()
    }

    pub fn evaluate(&self, x: &Vector, y: &Vector) -> f64 {
        (&self.p * x + &self.q * y + &self.offset).dot(&(y - x))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OperatorKind {
    /// `F(x) = x − a`.
    Shift {
        #[serde(with = "linalg::serde_vector")]
        anchor: Vector,
    },
}

/// A strongly monotone, Lipschitz operator `F` selecting the solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Operator {
    #[serde(flatten)]
    pub kind: OperatorKind,
    /// Strong monotonicity modulus `η`.
    pub eta: f64,
    /// Lipschitz constant `L`.
    pub lipschitz: f64,
}

impl Operator {
    /// `F(x) = x − a`, for which `η = L = 1`.
    pub fn shift(anchor: Vector) -> Self {
        Self {
            kind: OperatorKind::Shift { anchor },
            eta: 1.0,
            lipschitz: 1.0,
        }
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            OperatorKind::Shift { anchor } => anchor.len(),
        }
    }

    /// Upper end of the admissible step interval `(0, 2η/L²)`.
    pub fn step_bound(&self) -> f64 {
        2.0 * self.eta / (self.lipschitz * self.lipschitz)
    }
}

/// The bundle solved by every algorithm: `N` bifunctions over `C`, `M` maps
/// `S_j = P_C ∘ P_{T_j}`, and the selection operator `F`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemInstance {
    pub feasible_set: PolyhedralSet,
    pub bifunctions: Vec<LinearBifunction>,
    pub halfspaces: Vec<HalfSpace>,
    /// Demicontractive modulus `β` shared by all maps; 0 for projection composites.
    #[serde(default)]
    pub map_modulus: f64,
    pub operator: Operator,
    #[serde(default, with = "linalg::serde_opt_vector")]
    pub known_solution: Option<Vector>,
}

impl ProblemInstance {
    /// Builds and validates an instance.
    pub fn new(
        feasible_set: PolyhedralSet,
        bifunctions: Vec<LinearBifunction>,
        halfspaces: Vec<HalfSpace>,
        operator: Operator,
        known_solution: Option<Vector>,
    ) -> Result<Self, ModelError> {
        let instance = Self {
            feasible_set,
            bifunctions,
            halfspaces,
            map_modulus: 0.0,
            operator,
            known_solution,
        };
        let report = validate_instance(&instance);
        if report.is_valid() {
            Ok(instance)
        } else {
            Err(ModelError::InvalidInstance(report))
        }
    }

    pub fn dim(&self) -> usize {
        self.feasible_set.dim()
    }

    pub fn num_bifunctions(&self) -> usize {
        self.bifunctions.len()
    }

    pub fn num_maps(&self) -> usize {
        self.halfspaces.len()
    }
}

/// A list of violated invariants. Empty means valid.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub problems: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.problems.is_empty()
    }

    pub fn mentions(&self, needle: &str) -> bool {
        self.problems.iter().any(|p| p.contains(needle))
    }

    fn push(&mut self, problem: impl Into<String>) {
        self.problems.push(problem.into());
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.problems.is_empty() {
            return f.write_str("valid");
        }
        f.write_str(&self.problems.join("; "))
    }
}

/// Checks shapes, the PSD/NSD structure of every bifunction and that `C` is
/// nonempty.
pub fn validate_instance(instance: &ProblemInstance) -> ValidationReport {
    validate_instance_with(instance, EPS_PSD)
}

pub fn validate_instance_with(instance: &ProblemInstance, eps_psd: f64) -> ValidationReport {
    let mut report = ValidationReport::default();
    let set = &instance.feasible_set;
    let m = set.dim();

    if m == 0 {
        report.push("space dimension is zero");
    }
    if set.a.nrows() != set.b.len() {
        report.push(format!(
            "A has {} rows but b has length {}",
            set.a.nrows(),
            set.b.len()
        ));
    }
    if instance.bifunctions.is_empty() {
        report.push("no bifunctions (N must be at least 1)");
    }
    if instance.halfspaces.is_empty() {
        report.push("no fixed-point maps (M must be at least 1)");
    }

    for (i, f) in instance.bifunctions.iter().enumerate() {
        if f.p.shape() != (m, m) || f.q.shape() != (m, m) || f.offset.len() != m {
            report.push(format!("bifunction {i}: dimensions do not match m = {m}"));
            continue;
        }
        let scale = f.q.amax().max(1.0);
        if linalg::asymmetry(&f.q) > 1e-10 * scale {
            report.push(format!("bifunction {i}: Q not symmetric"));
        }
        let (q_min, _) = linalg::eigen_extremes(&f.q);
        if q_min < -eps_psd {
            report.push(format!(
                "bifunction {i}: Q not positive semidefinite (min eigenvalue {q_min:.3e})"
            ));
        }
        let (_, d_max) = linalg::eigen_extremes(&(&f.q - &f.p));
        if d_max > eps_psd {
            report.push(format!(
                "bifunction {i}: Q - P not negative semidefinite (max eigenvalue {d_max:.3e})"
            ));
        }
    }

    for (j, hs) in instance.halfspaces.iter().enumerate() {
        if hs.dim() != m {
            report.push(format!("half-space {j}: direction has length {}", hs.dim()));
        } else if hs.normal.iter().all(|&v| v == 0.0) {
            report.push(format!("half-space {j}: zero direction"));
        }
    }

    let op = &instance.operator;
    if op.dim() != m {
        report.push(format!("operator: anchor has length {}", op.dim()));
    }
    if !(op.eta > 0.0) || !(op.lipschitz >= op.eta) {
        report.push(format!(
            "operator: need eta > 0 and L >= eta (eta = {}, L = {})",
            op.eta, op.lipschitz
        ));
    }
    match &op.kind {
        OperatorKind::Shift { .. } if op.eta != 1.0 || op.lipschitz != 1.0 => {
            report.push("operator: shift operator must have eta = L = 1");
        }
        _ => {}
    }

    if !(0.0..1.0).contains(&instance.map_modulus) {
        report.push(format!(
            "demicontractive modulus {} outside [0, 1)",
            instance.map_modulus
        ));
    }
    if let Some(x) = &instance.known_solution {
        if x.len() != m {
            report.push(format!("known solution has length {}", x.len()));
        }
    }

    if set.a.nrows() == set.b.len() && m > 0 {
        match qp::find_feasible_point(set, DEFAULT_INNER_TOL) {
            Ok(_) => {}
            Err(crate::error::QpError::InfeasibleSet) => report.push("feasible set empty"),
            Err(e) => report.push(format!("feasible set could not be certified nonempty: {e}")),
        }
    }
    report
}

/// Step-size schedule `α_n` for the viscosity step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaSchedule {
    /// `α_n = 1 / (n + 1)`.
    InvN,
    /// `α_n = 1 / (n + 1)^0.5`.
    InvSqrtN,
    /// Explicit values, indexed from `n = 0`.
    Custom(Vec<f64>),
}

impl AlphaSchedule {
    pub fn value(&self, n: usize) -> f64 {
        match self {
            Self::InvN => 1.0 / (n as f64 + 1.0),
            Self::InvSqrtN => 1.0 / (n as f64 + 1.0).sqrt(),
            Self::Custom(values) => values[n],
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::InvN => "inv_n",
            Self::InvSqrtN => "inv_sqrt_n",
            Self::Custom(_) => "custom",
        }
    }
}

/// Mann coefficients `β_n^j`, constant in `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MannSchedule {
    Constant(f64),
    PerMap(Vec<f64>),
}

impl MannSchedule {
    pub fn value(&self, j: usize) -> f64 {
        match self {
            Self::Constant(b) => *b,
            Self::PerMap(values) => values[j],
        }
    }
}

/// How the proximal parameter `ρ` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RhoRule {
    Fixed(f64),
    /// `ρ = 1 / (factor · c₁)` with `c₁` the family Lipschitz-type constant.
    InverseConstant(f64),
}

impl RhoRule {
    pub fn resolve(&self, constants: &LipschitzConstants) -> f64 {
        match *self {
            Self::Fixed(rho) => rho,
            // With c = 0 every ρ > 0 is admissible.
            Self::InverseConstant(_) if constants.c1 == 0.0 => 1.0,
            Self::InverseConstant(factor) => 1.0 / (factor * constants.c1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialPoint {
    /// `(1, …, 1)`.
    Ones,
    Explicit(Vec<f64>),
}

impl InitialPoint {
    pub fn resolve(&self, dim: usize) -> Vector {
        match self {
            Self::Ones => Vector::from_element(dim, 1.0),
            Self::Explicit(v) => Vector::from_column_slice(v),
        }
    }
}

pub const CONFIG_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub schema_version: u32,
    pub rho: RhoRule,
    pub alpha: AlphaSchedule,
    pub beta: MannSchedule,
    /// alg2 weights over bifunctions.
    pub weights_w: Vec<f64>,
    /// alg2 weights over maps.
    pub weights_gamma: Vec<f64>,
    pub inner_tol: f64,
    pub max_iters: usize,
    /// Stop once `‖x_{n+1} − x_n‖ < stop_tol`; 0 runs the full budget.
    pub stop_tol: f64,
    /// When set and the solution is known, early stopping additionally needs `D_n` below this.
    pub target_distance: Option<f64>,
    pub initial_point: InitialPoint,
    pub seed: u64,
}

impl SolverConfig {
    /// The experiment defaults: `ρ = 1/(4c₁)`, `α_n = 1/(n+1)`, `β = 1/4`,
    /// uniform weights, 1000 iterations from `(1, …, 1)`.
    pub fn standard(num_bifunctions: usize, num_maps: usize) -> Self {
        Self {
            schema_version: CONFIG_SCHEMA_VERSION,
            rho: RhoRule::InverseConstant(4.0),
            alpha: AlphaSchedule::InvN,
            beta: MannSchedule::Constant(0.25),
            weights_w: uniform_weights(num_bifunctions),
            weights_gamma: uniform_weights(num_maps),
            inner_tol: DEFAULT_INNER_TOL,
            max_iters: 1000,
            stop_tol: 0.0,
            target_distance: None,
            initial_point: InitialPoint::Ones,
            seed: 0,
        }
    }

    /// Replaces both weight vectors, rejecting anything off the simplex.
    pub fn with_weights(mut self, w: Vec<f64>, gamma: Vec<f64>) -> Result<Self, ValidationReport> {
        let mut report = ValidationReport::default();
        check_simplex("weights_w", &w, None, &mut report);
        check_simplex("weights_gamma", &gamma, None, &mut report);
        if !report.is_valid() {
            return Err(report);
        }
        self.weights_w = w;
        self.weights_gamma = gamma;
        Ok(self)
    }
}

pub fn uniform_weights(n: usize) -> Vec<f64> {
    vec![1.0 / n as f64; n]
}

fn check_simplex(name: &str, w: &[f64], expected_len: Option<usize>, report: &mut ValidationReport) {
    if let Some(len) = expected_len {
        if w.len() != len {
            report.push(format!("{name} has length {} (expected {len})", w.len()));
            return;
        }
    }
    if w.is_empty() {
        report.push(format!("{name} is empty"));
        return;
    }
    if w.iter().any(|&v| !(v > 0.0)) {
        report.push(format!("{name} must be strictly positive"));
    }
    let sum: f64 = w.iter().sum();
    if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
        report.push(format!("{name} sums to {sum} (must be 1)"));
    }
}

/// Checks the parameter conditions against the instance: the bound on `ρ`,
/// the Mann coefficient window, simplex weights and the α-schedule.
pub fn validate_config(config: &SolverConfig, instance: &ProblemInstance) -> ValidationReport {
    validate_config_with(config, instance, &family_constants(&instance.bifunctions))
}

pub fn validate_config_with(
    config: &SolverConfig,
    instance: &ProblemInstance,
    constants: &LipschitzConstants,
) -> ValidationReport {
    let mut report = ValidationReport::default();
    if config.schema_version != CONFIG_SCHEMA_VERSION {
        report.push(format!(
            "config schema version {} (expected {CONFIG_SCHEMA_VERSION})",
            config.schema_version
        ));
    }

    let rho = config.rho.resolve(constants);
    if !(rho > 0.0) || !rho.is_finite() {
        report.push(format!("ρ = {rho} must be positive and finite"));
    }
    for (name, c) in [("c₁", constants.c1), ("c₂", constants.c2)] {
        if c > 0.0 {
            let bound = 1.0 / (2.0 * c);
            if rho >= bound {
                report.push(format!("ρ = {rho} ≥ 1/(2{name})={bound}"));
            }
        }
    }

    let m_maps = instance.num_maps();
    let upper = (1.0 - instance.map_modulus) / 2.0;
    match &config.beta {
        MannSchedule::PerMap(values) if values.len() != m_maps => report.push(format!(
            "beta has {} entries for {m_maps} maps",
            values.len()
        )),
        _ => {
            for j in 0..m_maps {
                let b = config.beta.value(j);
                if !(b > 0.0 && b < upper) {
                    report.push(format!("β_n^{j} = {b} outside (0, (1-β)/2) = (0, {upper})"));
                    break;
                }
            }
        }
    }

    check_simplex(
        "weights_w",
        &config.weights_w,
        Some(instance.num_bifunctions()),
        &mut report,
    );
    check_simplex(
        "weights_gamma",
        &config.weights_gamma,
        Some(m_maps),
        &mut report,
    );

    if !(config.inner_tol > 0.0) {
        report.push(format!("inner_tol = {} must be positive", config.inner_tol));
    }
    if config.stop_tol < 0.0 {
        report.push("stop_tol must be nonnegative");
    }
    if let AlphaSchedule::Custom(values) = &config.alpha {
        if values.len() < config.max_iters {
            report.push(format!(
                "custom alpha schedule has {} values for {} iterations",
                values.len(),
                config.max_iters
            ));
        }
        if values.iter().any(|&a| !(a > 0.0) || !a.is_finite()) {
            report.push("custom alpha values must be positive and finite");
        }
    }
    if let InitialPoint::Explicit(v) = &config.initial_point {
        if v.len() != instance.dim() {
            report.push(format!(
                "initial point has length {} (expected {})",
                v.len(),
                instance.dim()
            ));
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(values: &[f64]) -> Matrix {
        Matrix::from_diagonal(&Vector::from_column_slice(values))
    }

    fn box_set() -> PolyhedralSet {
        PolyhedralSet::new(
            Matrix::from_row_slice(4, 2, &[1.0, 0.0, 0.0, 1.0, -1.0, 0.0, 0.0, -1.0]),
            Vector::from_vec(vec![1.0, 1.0, 1.0, 1.0]),
        )
        .unwrap()
    }

    fn instance_with(f: LinearBifunction, set: PolyhedralSet) -> ProblemInstance {
        ProblemInstance {
            feasible_set: set,
            bifunctions: vec![f],
            halfspaces: vec![HalfSpace::new(Vector::from_vec(vec![1.0, 0.0]), 1.0).unwrap()],
            map_modulus: 0.0,
            operator: Operator::shift(Vector::zeros(2)),
            known_solution: Some(Vector::zeros(2)),
        }
    }

    #[test]
    fn accepts_identity_pair() {
        let f = LinearBifunction::new(diag(&[2.0, 2.0]), diag(&[1.0, 1.0]), Vector::zeros(2)).unwrap();
        let report = validate_instance(&instance_with(f, box_set()));
        assert!(report.is_valid(), "{report}");
    }

    #[test]
    fn rejects_negative_q() {
        let f = LinearBifunction::new(diag(&[2.0, 2.0]), diag(&[-1.0, -1.0]), Vector::zeros(2)).unwrap();
        let report = validate_instance(&instance_with(f, box_set()));
        assert!(report.mentions("Q not positive semidefinite"), "{report}");
    }

    #[test]
    fn rejects_q_minus_p_not_nsd() {
        let f = LinearBifunction::new(diag(&[0.0, 0.0]), diag(&[1.0, 1.0]), Vector::zeros(2)).unwrap();
        let report = validate_instance(&instance_with(f, box_set()));
        assert!(report.mentions("not negative semidefinite"), "{report}");
    }

    #[test]
    fn rejects_empty_feasible_set() {
        let f = LinearBifunction::new(diag(&[2.0, 2.0]), diag(&[1.0, 1.0]), Vector::zeros(2)).unwrap();
        let set = PolyhedralSet::new(
            Matrix::from_row_slice(2, 2, &[1.0, 0.0, -1.0, 0.0]),
            Vector::from_vec(vec![-1.0, -1.0]),
        )
        .unwrap();
        let report = validate_instance(&instance_with(f, set));
        assert!(report.mentions("feasible set empty"), "{report}");
    }

    #[test]
    fn reports_every_problem() {
        let f = LinearBifunction::new(diag(&[0.0, 0.0]), diag(&[-1.0, -1.0]), Vector::zeros(2)).unwrap();
        let mut inst = instance_with(f, box_set());
        inst.halfspaces.clear();
        let report = validate_instance(&inst);
        assert!(report.mentions("Q not positive semidefinite"));
        assert!(report.mentions("M must be at least 1"));
    }

    #[test]
    fn zero_normal_rejected() {
        assert!(matches!(
            HalfSpace::new(Vector::zeros(3), 1.0),
            Err(ModelError::ZeroNormal)
        ));
    }

    fn constants(c: f64) -> LipschitzConstants {
        LipschitzConstants { c1: c, c2: c }
    }

    fn config_instance() -> ProblemInstance {
        let f = LinearBifunction::new(diag(&[2.0, 2.0]), diag(&[1.0, 1.0]), Vector::zeros(2)).unwrap();
        instance_with(f, box_set())
    }

    #[test]
    fn rho_below_bound_accepted() {
        let inst = config_instance();
        let mut cfg = SolverConfig::standard(1, 1);
        cfg.rho = RhoRule::Fixed(0.125);
        assert!(validate_config_with(&cfg, &inst, &constants(2.0)).is_valid());
        // The rule 1/(4c₁) resolves to the same value.
        cfg.rho = RhoRule::InverseConstant(4.0);
        assert_eq!(cfg.rho.resolve(&constants(2.0)), 0.125);
    }

    #[test]
    fn rho_above_bound_rejected() {
        let inst = config_instance();
        let mut cfg = SolverConfig::standard(1, 1);
        cfg.rho = RhoRule::Fixed(0.3);
        let report = validate_config_with(&cfg, &inst, &constants(2.0));
        assert!(report.mentions("ρ = 0.3 ≥ 1/(2c₁)=0.25"), "{report}");
    }

    #[test]
    fn mann_window() {
        let inst = config_instance();
        let mut cfg = SolverConfig::standard(1, 1);
        assert!(validate_config(&cfg, &inst).is_valid());
        cfg.beta = MannSchedule::Constant(0.5);
        assert!(validate_config(&cfg, &inst).mentions("outside (0, (1-β)/2)"));
        cfg.beta = MannSchedule::Constant(0.0);
        assert!(!validate_config(&cfg, &inst).is_valid());
    }

    #[test]
    fn weights_must_be_simplex() {
        let inst = config_instance();
        let mut cfg = SolverConfig::standard(1, 1);
        cfg.weights_w = vec![0.5];
        assert!(validate_config(&cfg, &inst).mentions("weights_w sums to"));
        cfg.weights_w = vec![0.5, 0.5];
        assert!(validate_config(&cfg, &inst).mentions("expected 1"));
        assert!(SolverConfig::standard(2, 2)
            .with_weights(vec![1.0, 0.0], vec![0.5, 0.5])
            .is_err());
    }

    #[test]
    fn custom_alpha_must_cover_budget() {
        let inst = config_instance();
        let mut cfg = SolverConfig::standard(1, 1);
        cfg.max_iters = 3;
        cfg.alpha = AlphaSchedule::Custom(vec![0.5, 0.25]);
        assert!(validate_config(&cfg, &inst).mentions("custom alpha schedule"));
    }

    #[test]
    fn builtin_schedules_decrease() {
        for s in [AlphaSchedule::InvN, AlphaSchedule::InvSqrtN] {
            assert!((1..2000).all(|n| s.value(n) < s.value(n - 1)));
            assert!(s.value(1000) < s.value(1));
        }
        assert!((AlphaSchedule::InvSqrtN.value(1) - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn config_json_round_trip() {
        let cfg = SolverConfig::standard(5, 20);
        let json = serde_json::to_string(&cfg).unwrap();
        assert!(json.contains("\"schema_version\":1"));
        let back: SolverConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back, cfg);
    }
}
