//! Python bindings for `projlab-core`.
//!
//! The extension module `_projlab` mirrors the Rust API one-to-one: subspace
//! geometry and relaxed projections, Friedrichs angles and the family
//! regularity constant κ*, the derived displacement constants, trajectory
//! execution under arbitrary control, and the empirical bound checks.
//!
//! Conventions carried over from the Rust crate:
//!
//! * vectors are plain Python sequences of floats (anything iterable works,
//!   including NumPy arrays); results come back as lists;
//! * member indices in the programmatic API are 0-based; the 1-based labels
//!   appear only inside certificates and reports, matching the emitted
//!   artifacts;
//! * errors map onto `ValueError` (bad data or parameters), `IndexError`
//!   (out-of-range member or sequence indices), and `RuntimeError`
//!   (combinatorial capacity guards).

use nalgebra::{DMatrix, DVector};
use pyo3::exceptions::{PyIndexError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use projlab_core::analysis::{
    self, BoundReport as CoreBoundReport, DisplacementProfile as CoreProfile,
    EnsembleReport as CoreEnsembleReport, MomentCheck as CoreMomentCheck,
    RearrangementCheck as CoreRearrangementCheck, STauCheck as CoreSTauCheck,
    SegmentInductionReport as CoreSegmentReport, TrajectorySummary as CoreSummary,
    WindowCheck as CoreWindowCheck, WorstCase as CoreWorstCase,
};
use projlab_core::bounds::{self, TheoreticalConstants as CoreConstants};
use projlab_core::dynamics::{
    self, ControlPolicy as CorePolicy, DichotomyOutcome, GrowthViolation as CoreGrowthViolation,
    RelaxationSchedule as CoreSchedule, ScheduleKind, StoppingRule as CoreStopping,
    TrajectoryRecord as CoreRecord,
};
use projlab_core::regularity::{
    self, AngleReport as CoreAngleReport, PairAngles as CorePairAngles,
    RegularityCertificate as CoreCertificate,
};
use projlab_core::subspace::{Subspace as CoreSubspace, SubspaceSystem as CoreSystem};
use projlab_core::Error as CoreError;

// ---------------------------------------------------------------------------
// Conversions
// ---------------------------------------------------------------------------

fn pyerr(e: CoreError) -> PyErr {
    match e {
        CoreError::IndexOutOfRange(_) => PyIndexError::new_err(e.to_string()),
        CoreError::Capacity(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn to_dvector(x: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(x)
}

fn from_dvector(v: &DVector<f64>) -> Vec<f64> {
    v.iter().copied().collect()
}

fn columns_of(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.column_iter()
        .map(|c| c.iter().copied().collect())
        .collect()
}

fn rows_of(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| m.row(i).iter().copied().collect())
        .collect()
}

// ---------------------------------------------------------------------------
// Geometry
// ---------------------------------------------------------------------------

/// A linear subspace of ℝᵈ stored through an orthonormal basis.
///
/// Construct from a spanning set (rows = vectors); the set may be empty,
/// dependent, or contain zero vectors — near-dependent directions are
/// dropped during orthonormalization.
#[pyclass(name = "Subspace", module = "_projlab", frozen, from_py_object)]
#[derive(Clone)]
struct PySubspace {
    inner: CoreSubspace,
}

impl From<CoreSubspace> for PySubspace {
    fn from(inner: CoreSubspace) -> Self {
        Self { inner }
    }
}

#[pymethods]
impl PySubspace {
    /// Subspace(spanning, ambient_dim=None): span of the given vectors inside
    /// ℝ^ambient_dim (inferred from the first vector when omitted).
    #[new]
    #[pyo3(signature = (spanning, ambient_dim=None))]
    fn new(spanning: Vec<Vec<f64>>, ambient_dim: Option<usize>) -> PyResult<Self> {
        let dim = match ambient_dim {
            Some(d) => d,
            None => spanning.first().map(Vec::len).ok_or_else(|| {
                PyValueError::new_err(
                    "an empty spanning set needs an explicit ambient_dim",
                )
            })?,
        };
        let vectors: Vec<DVector<f64>> = spanning.iter().map(|v| to_dvector(v)).collect();
        CoreSubspace::from_span(&vectors, dim)
            .map(Self::from)
            .map_err(pyerr)
    }

    /// The trivial subspace {0} ⊂ ℝᵈ.
    #[staticmethod]
    fn zero(ambient_dim: usize) -> PyResult<Self> {
        if ambient_dim == 0 {
            return Err(PyValueError::new_err("ambient dimension must be positive"));
        }
        Ok(CoreSubspace::zero(ambient_dim).into())
    }

    /// The full space ℝᵈ.
    #[staticmethod]
    fn full(ambient_dim: usize) -> PyResult<Self> {
        if ambient_dim == 0 {
            return Err(PyValueError::new_err("ambient dimension must be positive"));
        }
        Ok(CoreSubspace::full(ambient_dim).into())
    }

    #[getter]
    fn ambient_dim(&self) -> usize {
        self.inner.ambient_dim()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    /// The stored orthonormal basis, as a list of basis vectors.
    fn basis(&self) -> Vec<Vec<f64>> {
        columns_of(self.inner.basis())
    }

    /// ‖QᵀQ − I‖_max of the stored basis — the orthonormality defect.
    fn gram_defect(&self) -> f64 {
        self.inner.gram_defect()
    }

    /// Orthogonal projection Px.
    fn project(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        self.inner
            .project(&to_dvector(&x))
            .map(|v| from_dvector(&v))
            .map_err(pyerr)
    }

    /// Relaxed projection (1−λ)x + λPx for λ ∈ (0, 2].
    fn relaxed_project(&self, lam: f64, x: Vec<f64>) -> PyResult<Vec<f64>> {
        self.inner
            .relaxed_project(lam, &to_dvector(&x))
            .map(|v| from_dvector(&v))
            .map_err(pyerr)
    }

    /// Distance ‖x − Px‖ from x to the subspace.
    fn distance(&self, x: Vec<f64>) -> PyResult<f64> {
        self.inner.distance(&to_dvector(&x)).map_err(pyerr)
    }

    /// Fractional distance θ(x) = ‖x − Px‖ / ‖x‖ ∈ [0, 1] (0 at x = 0).
    fn relative_distance(&self, x: Vec<f64>) -> PyResult<f64> {
        self.inner.relative_distance(&to_dvector(&x)).map_err(pyerr)
    }

    /// The d×d projector matrix QQᵀ, as a list of rows.
    fn projector(&self) -> Vec<Vec<f64>> {
        rows_of(&self.inner.projector())
    }

    /// The intersection V ∩ W.
    fn intersect(&self, other: &Self) -> PyResult<Self> {
        self.inner
            .intersect(&other.inner)
            .map(Self::from)
            .map_err(pyerr)
    }

    /// The orthogonal complement V^⊥.
    fn complement(&self) -> Self {
        self.inner.complement().into()
    }

    /// Whether x lies in the subspace up to ‖x − Px‖ ≤ tol·‖x‖.
    #[pyo3(signature = (x, tol=1e-8))]
    fn contains(&self, x: Vec<f64>, tol: f64) -> bool {
        self.inner.contains(&to_dvector(&x), tol)
    }

    /// Whether every basis vector of `other` lies in this subspace.
    #[pyo3(signature = (other, tol=1e-8))]
    fn contains_subspace(&self, other: &Self, tol: f64) -> bool {
        self.inner.contains_subspace(&other.inner, tol)
    }

    /// Mutual containment at the given tolerance.
    #[pyo3(signature = (other, tol=1e-8))]
    fn same_span(&self, other: &Self, tol: f64) -> bool {
        self.inner.same_span(&other.inner, tol)
    }

    fn __repr__(&self) -> String {
        format!(
            "Subspace(dim={}, ambient_dim={})",
            self.inner.dim(),
            self.inner.ambient_dim()
        )
    }
}

/// An ordered family 𝒱 = (V₁, …, V_N) of subspaces of one ambient space,
/// with a cache of subset intersections V_I.
#[pyclass(name = "SubspaceSystem", module = "_projlab", frozen)]
struct PySubspaceSystem {
    inner: CoreSystem,
}

#[pymethods]
impl PySubspaceSystem {
    #[new]
    fn new(members: Vec<PySubspace>) -> PyResult<Self> {
        let members = members.into_iter().map(|m| m.inner).collect();
        CoreSystem::new(members)
            .map(|inner| Self { inner })
            .map_err(pyerr)
    }

    #[getter]
    fn ambient_dim(&self) -> usize {
        self.inner.ambient_dim()
    }

    #[getter]
    fn n_members(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn member_dims(&self) -> Vec<usize> {
        self.inner.members().iter().map(|m| m.dim()).collect()
    }

    /// Member V_i (0-based).
    fn member(&self, i: usize) -> PyResult<PySubspace> {
        self.inner.member(i).map(|s| s.clone().into()).map_err(pyerr)
    }

    /// Intersection V_I over the (0-based) index list; the empty list gives
    /// the full ambient space.
    fn intersection(&self, indices: Vec<usize>) -> PyResult<PySubspace> {
        self.inner
            .intersection(&indices)
            .map(|s| (*s).clone().into())
            .map_err(pyerr)
    }

    /// The regularity certificate (κ* with the full subset-pair table).
    #[pyo3(signature = (max_members=None))]
    fn certificate(&self, max_members: Option<usize>) -> PyResult<PyRegularityCertificate> {
        let cap = max_members.unwrap_or(regularity::DEFAULT_MAX_MEMBERS);
        regularity::kappa_star_with_limit(&self.inner, cap)
            .map(PyRegularityCertificate::from)
            .map_err(pyerr)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "SubspaceSystem(n_members={}, ambient_dim={})",
            self.inner.len(),
            self.inner.ambient_dim()
        )
    }
}

// ---------------------------------------------------------------------------
// Angles and regularity
// ---------------------------------------------------------------------------

/// Friedrichs angle of one subspace pair with derived data.
#[pyclass(name = "AngleReport", module = "_projlab", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyAngleReport {
    inner: CoreAngleReport,
}

#[pymethods]
impl PyAngleReport {
    /// Friedrichs angle φ ∈ [0, π/2] in radians (π/2 for nested pairs).
    #[getter]
    fn phi(&self) -> f64 {
        self.inner.phi
    }

    #[getter]
    fn cos_phi(&self) -> f64 {
        self.inner.cos_phi
    }

    #[getter]
    fn sin_phi(&self) -> f64 {
        self.inner.sin_phi
    }

    /// Dimension of V ∩ W deflated before measuring the angle.
    #[getter]
    fn intersection_dim(&self) -> usize {
        self.inner.intersection_dim
    }

    /// κ(V, W) = 2/sin φ ≥ 2.
    #[getter]
    fn kappa_pair(&self) -> f64 {
        self.inner.kappa_pair
    }

    fn __repr__(&self) -> String {
        format!(
            "AngleReport(phi={}, kappa_pair={}, intersection_dim={})",
            self.inner.phi, self.inner.kappa_pair, self.inner.intersection_dim
        )
    }
}

impl From<CoreAngleReport> for PyAngleReport {
    fn from(inner: CoreAngleReport) -> Self {
        Self { inner }
    }
}

/// Angle data of one subset pair inside a certificate; the member labels in
/// `set_i` / `set_j` are 1-based, matching the emitted artifacts.
#[pyclass(name = "PairAngles", module = "_projlab", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyPairAngles {
    inner: CorePairAngles,
}

#[pymethods]
impl PyPairAngles {
    #[getter]
    fn set_i(&self) -> Vec<usize> {
        self.inner.set_i.clone()
    }

    #[getter]
    fn set_j(&self) -> Vec<usize> {
        self.inner.set_j.clone()
    }

    #[getter]
    fn phi(&self) -> f64 {
        self.inner.phi
    }

    #[getter]
    fn kappa_pair(&self) -> f64 {
        self.inner.kappa_pair
    }

    #[getter]
    fn cos_phi(&self) -> f64 {
        self.inner.cos_phi
    }

    #[getter]
    fn sin_phi(&self) -> f64 {
        self.inner.sin_phi
    }

    #[getter]
    fn intersection_dim(&self) -> usize {
        self.inner.intersection_dim
    }

    fn __repr__(&self) -> String {
        format!(
            "PairAngles(set_i={:?}, set_j={:?}, phi={})",
            self.inner.set_i, self.inner.set_j, self.inner.phi
        )
    }
}

/// The exhaustive regularity certificate of a family: κ* with the full table
/// of subset-pair Friedrichs angles behind it.
#[pyclass(name = "RegularityCertificate", module = "_projlab", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyRegularityCertificate {
    inner: CoreCertificate,
}

impl From<CoreCertificate> for PyRegularityCertificate {
    fn from(inner: CoreCertificate) -> Self {
        Self { inner }
    }
}

#[pymethods]
impl PyRegularityCertificate {
    #[getter]
    fn n_members(&self) -> usize {
        self.inner.n_members
    }

    #[getter]
    fn ambient_dim(&self) -> usize {
        self.inner.ambient_dim
    }

    /// κ* = max κ(V_I, V_J) ≥ 2 over all subset pairs, including ∅.
    #[getter]
    fn kappa_star(&self) -> f64 {
        self.inner.kappa_star
    }

    /// First subset pair attaining κ*, as two 1-based member label lists.
    #[getter]
    fn worst_pair(&self) -> (Vec<usize>, Vec<usize>) {
        self.inner.worst_pair.clone()
    }

    /// Smallest Friedrichs angle found over all pairs.
    #[getter]
    fn min_phi(&self) -> f64 {
        self.inner.min_phi
    }

    /// All pairs have φ > 0 (always true in finite dimensions).
    #[getter]
    fn innately_regular(&self) -> bool {
        self.inner.innately_regular
    }

    /// Every unordered subset pair with its angle data.
    fn table(&self) -> Vec<PyPairAngles> {
        self.inner
            .per_pair_angles
            .iter()
            .map(|p| PyPairAngles { inner: p.clone() })
            .collect()
    }

    /// The displacement constants for this family at band parameter η and
    /// moment exponent γ.
    fn constants(&self, eta: f64, gamma: f64) -> PyResult<PyTheoreticalConstants> {
        bounds::constants_for(&self.inner, self.inner.n_members, eta, gamma)
            .map(PyTheoreticalConstants::from)
            .map_err(pyerr)
    }

    fn __repr__(&self) -> String {
        format!(
            "RegularityCertificate(n_members={}, kappa_star={}, min_phi={})",
            self.inner.n_members, self.inner.kappa_star, self.inner.min_phi
        )
    }
}

// ---------------------------------------------------------------------------
// Constants
// ---------------------------------------------------------------------------

/// Every constant of the displacement theory for one (κ*, N, η, γ) tuple:
/// ε* = κ*^{−N}/2, β* = (1 − η(2−η)ε*²)^{1/2}, the moment constants
/// C₁ … C_N, the closed-form majorant, and the rearrangement envelope
/// parameters ρ*, c*.
#[pyclass(name = "TheoreticalConstants", module = "_projlab", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyTheoreticalConstants {
    inner: CoreConstants,
}

impl From<CoreConstants> for PyTheoreticalConstants {
    fn from(inner: CoreConstants) -> Self {
        Self { inner }
    }
}

#[pymethods]
impl PyTheoreticalConstants {
    #[getter]
    fn n(&self) -> usize {
        self.inner.n
    }

    #[getter]
    fn eta(&self) -> f64 {
        self.inner.eta
    }

    #[getter]
    fn kappa_star(&self) -> f64 {
        self.inner.kappa_star
    }

    #[getter]
    fn gamma(&self) -> f64 {
        self.inner.gamma
    }

    #[getter]
    fn eps_star(&self) -> f64 {
        self.inner.eps_star
    }

    /// β* itself can round to 1.0 in double precision; `ln_beta_star`
    /// carries the value at full precision.
    #[getter]
    fn beta_star(&self) -> f64 {
        self.inner.beta_star
    }

    #[getter]
    fn ln_beta_star(&self) -> f64 {
        self.inner.ln_beta_star
    }

    /// C₁ … C_N from the exact recursion (strictly increasing).
    #[getter]
    fn c_seq(&self) -> Vec<f64> {
        self.inner.c_seq.clone()
    }

    /// Closed-form majorant of C_N.
    #[getter]
    fn c_closed(&self) -> f64 {
        self.inner.c_closed
    }

    /// Rearrangement decay rate ρ* = (N/9)·ln(1/β*).
    #[getter]
    fn rho_star(&self) -> f64 {
        self.inner.rho_star
    }

    /// Rearrangement prefactor c* = β*^{−N}.
    #[getter]
    fn c_star(&self) -> f64 {
        self.inner.c_star
    }

    /// C_N: the constant in Σ‖x_{n+1} − x_n‖^γ ≤ C_N·‖x₀‖^γ.
    fn moment_bound(&self) -> f64 {
        self.inner.moment_bound()
    }

    /// Upper bound on S(τ) = #{n : δ_n ≥ τ} for τ ∈ (0, 1].
    fn s_tau_bound(&self, tau: f64) -> PyResult<f64> {
        self.inner.s_tau_bound(tau).map_err(pyerr)
    }

    /// Rearrangement envelope c*·exp(−ρ*·n^{1/N}) for the 0-based rank n.
    fn rearrangement_bound(&self, n: usize) -> f64 {
        self.inner.rearrangement_bound(n)
    }

    /// Sibling constants sharing (κ*, N, η) at a different exponent γ.
    fn with_gamma(&self, gamma: f64) -> PyResult<Self> {
        self.inner.with_gamma(gamma).map(Self::from).map_err(pyerr)
    }

    fn __repr__(&self) -> String {
        format!(
            "TheoreticalConstants(N={}, eta={}, kappa_star={}, gamma={}, C_N={})",
            self.inner.n,
            self.inner.eta,
            self.inner.kappa_star,
            self.inner.gamma,
            self.inner.moment_bound()
        )
    }
}

// ---------------------------------------------------------------------------
// Dynamics
// ---------------------------------------------------------------------------

/// How the control index i_n is chosen at each step.  Build through the
/// static constructors; indices are 0-based.
#[pyclass(name = "ControlPolicy", module = "_projlab", frozen, from_py_object)]
#[derive(Clone)]
struct PyControlPolicy {
    inner: CorePolicy,
}

impl From<CorePolicy> for PyControlPolicy {
    fn from(inner: CorePolicy) -> Self {
        Self { inner }
    }
}

#[pymethods]
impl PyControlPolicy {
    /// i_n = n mod N.
    #[staticmethod]
    fn cyclic() -> Self {
        CorePolicy::Cyclic.into()
    }

    /// i_n uniform on {0, …, N−1} from a seeded generator.
    #[staticmethod]
    fn uniform_random(seed: u64) -> Self {
        CorePolicy::UniformRandom { seed }.into()
    }

    /// i_n maximizing the residual ‖x_n − P_i x_n‖ (ties to smallest index).
    #[staticmethod]
    fn greedy() -> Self {
        CorePolicy::Greedy.into()
    }

    /// A repeating block schedule of (index, repeat_count) pairs.
    #[staticmethod]
    fn adversarial_gap(pattern: Vec<(usize, usize)>) -> Self {
        CorePolicy::AdversarialGap { pattern }.into()
    }

    /// A fixed finite control sequence; the run ends when it is exhausted.
    #[staticmethod]
    fn explicit(sequence: Vec<usize>) -> Self {
        CorePolicy::Explicit { sequence }.into()
    }

    /// Short stable name (`cyclic`, `uniform_random`, `greedy`,
    /// `adversarial_gap`, `explicit`).
    #[getter]
    fn name(&self) -> &'static str {
        self.inner.describe()
    }

    /// Validates index ranges against a family of `n_members` subspaces.
    fn validate(&self, n_members: usize) -> PyResult<()> {
        self.inner.validate(n_members).map_err(pyerr)
    }

    fn __repr__(&self) -> String {
        format!("ControlPolicy({})", self.inner.describe())
    }
}

/// How the relaxation weight λ_n is chosen; every emitted value lies in the
/// band [η, 2−η] for the stored η ∈ (0, 1].
#[pyclass(name = "RelaxationSchedule", module = "_projlab", frozen, from_py_object)]
#[derive(Clone)]
struct PyRelaxationSchedule {
    inner: CoreSchedule,
}

impl From<CoreSchedule> for PyRelaxationSchedule {
    fn from(inner: CoreSchedule) -> Self {
        Self { inner }
    }
}

#[pymethods]
impl PyRelaxationSchedule {
    /// λ_n ≡ value, with value ∈ [η, 2−η].
    #[staticmethod]
    fn constant(eta: f64, value: f64) -> PyResult<Self> {
        CoreSchedule::new(eta, ScheduleKind::Constant(value))
            .map(Self::from)
            .map_err(pyerr)
    }

    /// λ_n uniform on [η, 2−η] from a seeded generator.
    #[staticmethod]
    fn uniform_random_in_band(eta: f64, seed: u64) -> PyResult<Self> {
        CoreSchedule::new(eta, ScheduleKind::UniformRandomInBand { seed })
            .map(Self::from)
            .map_err(pyerr)
    }

    /// λ_n alternates η (even steps) and 2−η (odd steps).
    #[staticmethod]
    fn alternating_extremes(eta: f64) -> PyResult<Self> {
        CoreSchedule::new(eta, ScheduleKind::AlternatingExtremes)
            .map(Self::from)
            .map_err(pyerr)
    }

    /// A fixed finite weight sequence inside the band; the run ends when it
    /// is exhausted.
    #[staticmethod]
    fn explicit(eta: f64, values: Vec<f64>) -> PyResult<Self> {
        CoreSchedule::new(eta, ScheduleKind::Explicit(values))
            .map(Self::from)
            .map_err(pyerr)
    }

    #[getter]
    fn eta(&self) -> f64 {
        self.inner.eta()
    }

    /// Short stable name (`constant`, `uniform_random_in_band`,
    /// `alternating_extremes`, `explicit`).
    #[getter]
    fn name(&self) -> &'static str {
        self.inner.describe()
    }

    fn __repr__(&self) -> String {
        format!(
            "RelaxationSchedule({}, eta={})",
            self.inner.describe(),
            self.inner.eta()
        )
    }
}

/// When a finite run of the (mathematically infinite) iteration stops: after
/// `max_steps`, or once the relative displacement stays below `stop_tol` for
/// `stall_window` consecutive steps.
#[pyclass(name = "StoppingRule", module = "_projlab", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyStoppingRule {
    inner: CoreStopping,
}

#[pymethods]
impl PyStoppingRule {
    #[new]
    #[pyo3(signature = (max_steps=dynamics::DEFAULT_MAX_STEPS, stop_tol=dynamics::DEFAULT_STOP_TOL, stall_window=dynamics::DEFAULT_STALL_WINDOW))]
    fn new(max_steps: usize, stop_tol: f64, stall_window: usize) -> Self {
        Self {
            inner: CoreStopping {
                max_steps,
                stop_tol,
                stall_window,
            },
        }
    }

    #[getter]
    fn max_steps(&self) -> usize {
        self.inner.max_steps
    }

    #[getter]
    fn stop_tol(&self) -> f64 {
        self.inner.stop_tol
    }

    #[getter]
    fn stall_window(&self) -> usize {
        self.inner.stall_window
    }

    fn __repr__(&self) -> String {
        format!(
            "StoppingRule(max_steps={}, stop_tol={}, stall_window={})",
            self.inner.max_steps, self.inner.stop_tol, self.inner.stall_window
        )
    }
}

/// Everything recorded along one trajectory.  Per-step lists run over
/// 0 ≤ n < steps; `norms` additionally carries ‖x₀‖ up front.
#[pyclass(name = "TrajectoryRecord", module = "_projlab", frozen)]
struct PyTrajectoryRecord {
    inner: CoreRecord,
}

#[pymethods]
impl PyTrajectoryRecord {
    #[getter]
    fn x0_norm(&self) -> f64 {
        self.inner.x0_norm
    }

    #[getter]
    fn eta(&self) -> f64 {
        self.inner.eta
    }

    #[getter]
    fn n_members(&self) -> usize {
        self.inner.n_members
    }

    #[getter]
    fn steps(&self) -> usize {
        self.inner.steps
    }

    #[getter]
    fn initial_point(&self) -> Vec<f64> {
        from_dvector(&self.inner.initial_point)
    }

    #[getter]
    fn final_point(&self) -> Vec<f64> {
        from_dvector(&self.inner.final_point)
    }

    /// i_n per step (0-based).
    #[getter]
    fn controls(&self) -> Vec<usize> {
        self.inner.controls.clone()
    }

    /// λ_n per step.
    #[getter]
    fn relaxations(&self) -> Vec<f64> {
        self.inner.relaxations.clone()
    }

    /// ‖x_{n+1} − x_n‖ per step.
    #[getter]
    fn displacement_norms(&self) -> Vec<f64> {
        self.inner.displacement_norms.clone()
    }

    /// ‖x_n‖ for n = 0 … steps.
    #[getter]
    fn norms(&self) -> Vec<f64> {
        self.inner.norms.clone()
    }

    /// I_n = {i_k : k ≤ n} per step, as bitmasks (bit i ⇔ member i used).
    #[getter]
    fn index_set_history(&self) -> Vec<u64> {
        self.inner.index_set_history.clone()
    }

    /// θ_{i_n}(x_n) per step.
    #[getter]
    fn per_step_theta(&self) -> Vec<f64> {
        self.inner.per_step_theta.clone()
    }

    /// x₀ … x_steps when the run retained iterates, else None.
    #[getter]
    fn iterates(&self) -> Option<Vec<Vec<f64>>> {
        self.inner
            .iterates
            .as_ref()
            .map(|xs| xs.iter().map(from_dvector).collect())
    }

    /// Σ ‖x_{n+1} − x_n‖^γ over the recorded steps.
    fn moment_sum(&self, gamma: f64) -> PyResult<f64> {
        analysis::moment_sum(&self.inner, gamma).map_err(pyerr)
    }

    fn __repr__(&self) -> String {
        format!(
            "TrajectoryRecord(steps={}, x0_norm={}, eta={}, n_members={})",
            self.inner.steps, self.inner.x0_norm, self.inner.eta, self.inner.n_members
        )
    }
}

/// A step at which the growth inequality failed its tolerance.
#[pyclass(name = "GrowthViolation", module = "_projlab", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyGrowthViolation {
    inner: CoreGrowthViolation,
}

#[pymethods]
impl PyGrowthViolation {
    #[getter]
    fn step(&self) -> usize {
        self.inner.step
    }

    /// θ_{I_n}(x_{n+1}), recomputed from the retained iterate.
    #[getter]
    fn lhs(&self) -> f64 {
        self.inner.lhs
    }

    /// κ*^{|I_n|} · max_{k≤n} θ_{i_k}(x_k).
    #[getter]
    fn rhs(&self) -> f64 {
        self.inner.rhs
    }

    fn __repr__(&self) -> String {
        format!(
            "GrowthViolation(step={}, lhs={}, rhs={})",
            self.inner.step, self.inner.lhs, self.inner.rhs
        )
    }
}

// ---------------------------------------------------------------------------
// Analysis
// ---------------------------------------------------------------------------

/// The empirical displacement statistics of one trajectory: normalized
/// displacements δ_n, their decreasing rearrangement, moment sums per γ, and
/// the S(τ) table.
#[pyclass(name = "DisplacementProfile", module = "_projlab", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyDisplacementProfile {
    inner: CoreProfile,
}

impl From<CoreProfile> for PyDisplacementProfile {
    fn from(inner: CoreProfile) -> Self {
        Self { inner }
    }
}

#[pymethods]
impl PyDisplacementProfile {
    #[getter]
    fn eta(&self) -> f64 {
        self.inner.eta
    }

    #[getter]
    fn n_members(&self) -> usize {
        self.inner.n_members
    }

    #[getter]
    fn x0_norm(&self) -> f64 {
        self.inner.x0_norm
    }

    /// δ_n = ‖x_{n+1}−x_n‖ / ((2−η)‖x₀‖), in step order.
    #[getter]
    fn deltas(&self) -> Vec<f64> {
        self.inner.deltas.clone()
    }

    /// The δ_n in nonincreasing order (decreasing rearrangement δ*).
    #[getter]
    fn sorted_deltas(&self) -> Vec<f64> {
        self.inner.sorted_deltas.clone()
    }

    /// (γ, Σ‖x_{n+1}−x_n‖^γ) pairs, in the requested γ order.
    #[getter]
    fn moment_sums(&self) -> Vec<(f64, f64)> {
        self.inner.moment_sums.clone()
    }

    /// (τ, #{n : δ_n ≥ τ}) pairs, in the requested τ order.
    #[getter]
    fn s_of_tau(&self) -> Vec<(f64, usize)> {
        self.inner.s_of_tau.clone()
    }

    /// Empirical S(τ) for an arbitrary threshold.
    fn s_at(&self, tau: f64) -> usize {
        self.inner.s_at(tau)
    }

    fn __repr__(&self) -> String {
        format!(
            "DisplacementProfile(steps={}, eta={}, x0_norm={})",
            self.inner.deltas.len(),
            self.inner.eta,
            self.inner.x0_norm
        )
    }
}

/// One γ row of a BoundReport.
#[pyclass(name = "MomentCheck", module = "_projlab", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyMomentCheck {
    inner: CoreMomentCheck,
}

#[pymethods]
impl PyMomentCheck {
    #[getter]
    fn gamma(&self) -> f64 {
        self.inner.gamma
    }

    #[getter]
    fn empirical(&self) -> f64 {
        self.inner.empirical
    }

    /// C_N(γ)·‖x₀‖^γ.
    #[getter]
    fn bound(&self) -> f64 {
        self.inner.bound
    }

    /// empirical / bound; conforming trajectories stay ≤ 1.
    #[getter]
    fn ratio(&self) -> f64 {
        self.inner.ratio
    }

    fn __repr__(&self) -> String {
        format!(
            "MomentCheck(gamma={}, ratio={})",
            self.inner.gamma, self.inner.ratio
        )
    }
}

/// One τ row of a BoundReport.
#[pyclass(name = "STauCheck", module = "_projlab", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PySTauCheck {
    inner: CoreSTauCheck,
}

#[pymethods]
impl PySTauCheck {
    #[getter]
    fn tau(&self) -> f64 {
        self.inner.tau
    }

    #[getter]
    fn empirical(&self) -> usize {
        self.inner.empirical
    }

    #[getter]
    fn bound(&self) -> f64 {
        self.inner.bound
    }

    fn __repr__(&self) -> String {
        format!(
            "STauCheck(tau={}, empirical={}, bound={})",
            self.inner.tau, self.inner.empirical, self.inner.bound
        )
    }
}

/// One rank row of a BoundReport.
#[pyclass(name = "RearrangementCheck", module = "_projlab", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyRearrangementCheck {
    inner: CoreRearrangementCheck,
}

#[pymethods]
impl PyRearrangementCheck {
    /// 0-based rank into the decreasing rearrangement.
    #[getter]
    fn n(&self) -> usize {
        self.inner.n
    }

    #[getter]
    fn delta_star(&self) -> f64 {
        self.inner.delta_star
    }

    /// c*·exp(−ρ*·n^{1/N}).
    #[getter]
    fn bound(&self) -> f64 {
        self.inner.bound
    }

    fn __repr__(&self) -> String {
        format!(
            "RearrangementCheck(n={}, delta_star={}, bound={})",
            self.inner.n, self.inner.delta_star, self.inner.bound
        )
    }
}

/// Empirical quantities of one trajectory against every theoretical envelope.
#[pyclass(name = "BoundReport", module = "_projlab", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyBoundReport {
    inner: CoreBoundReport,
}

impl From<CoreBoundReport> for PyBoundReport {
    fn from(inner: CoreBoundReport) -> Self {
        Self { inner }
    }
}

#[pymethods]
impl PyBoundReport {
    #[getter]
    fn constants(&self) -> PyTheoreticalConstants {
        self.inner.constants.clone().into()
    }

    #[getter]
    fn empirical_moment(&self) -> Vec<PyMomentCheck> {
        self.inner
            .empirical_moment
            .iter()
            .map(|m| PyMomentCheck { inner: m.clone() })
            .collect()
    }

    #[getter]
    fn s_tau_pairs(&self) -> Vec<PySTauCheck> {
        self.inner
            .s_tau_pairs
            .iter()
            .map(|s| PySTauCheck { inner: s.clone() })
            .collect()
    }

    #[getter]
    fn rearrangement_pairs(&self) -> Vec<PyRearrangementCheck> {
        self.inner
            .rearrangement_pairs
            .iter()
            .map(|r| PyRearrangementCheck { inner: r.clone() })
            .collect()
    }

    /// Empirical S(1): steps that moved the full allowed (2−η)‖x₀‖.
    #[getter]
    fn s_at_one(&self) -> usize {
        self.inner.s_at_one
    }

    /// Side check (never part of the verdict): S(1) ≤ 1.
    #[getter]
    fn s_one_side_check(&self) -> bool {
        self.inner.s_one_side_check
    }

    /// True iff every empirical quantity is within its envelope.
    #[getter]
    fn verdict(&self) -> bool {
        self.inner.verdict
    }

    #[getter]
    fn caveats(&self) -> Vec<String> {
        self.inner.caveats.clone()
    }

    fn __repr__(&self) -> String {
        format!(
            "BoundReport(verdict={}, moments={}, s_taus={}, ranks={})",
            self.inner.verdict,
            self.inner.empirical_moment.len(),
            self.inner.s_tau_pairs.len(),
            self.inner.rearrangement_pairs.len()
        )
    }
}

/// Verdict for one window of the segment-wise induction.
#[pyclass(name = "WindowCheck", module = "_projlab", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyWindowCheck {
    inner: CoreWindowCheck,
}

#[pymethods]
impl PyWindowCheck {
    #[getter]
    fn start(&self) -> usize {
        self.inner.start
    }

    #[getter]
    fn end(&self) -> usize {
        self.inner.end
    }

    /// Number of distinct control indices used inside the window.
    #[getter]
    fn ell(&self) -> usize {
        self.inner.ell
    }

    #[getter]
    fn moment(&self) -> f64 {
        self.inner.moment
    }

    #[getter]
    fn plain_ratio(&self) -> f64 {
        self.inner.plain_ratio
    }

    #[getter]
    fn translated_ratio(&self) -> f64 {
        self.inner.translated_ratio
    }

    #[getter]
    fn passed(&self) -> bool {
        self.inner.passed
    }

    fn __repr__(&self) -> String {
        format!(
            "WindowCheck(start={}, end={}, ell={}, passed={})",
            self.inner.start, self.inner.end, self.inner.ell, self.inner.passed
        )
    }
}

/// Outcome of the segment-wise induction replay on one trajectory.
#[pyclass(name = "SegmentInductionReport", module = "_projlab", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PySegmentInductionReport {
    inner: CoreSegmentReport,
}

#[pymethods]
impl PySegmentInductionReport {
    #[getter]
    fn gamma(&self) -> f64 {
        self.inner.gamma
    }

    #[getter]
    fn windows_checked(&self) -> usize {
        self.inner.windows_checked
    }

    #[getter]
    fn max_plain_ratio(&self) -> f64 {
        self.inner.max_plain_ratio
    }

    #[getter]
    fn max_translated_ratio(&self) -> f64 {
        self.inner.max_translated_ratio
    }

    /// Property (i): y-displacements equal x-displacements.
    #[getter]
    fn translation_displacements_ok(&self) -> bool {
        self.inner.translation_displacements_ok
    }

    /// Property (ii): y_{k+1} = P_{i_k, λ_k} y_k.
    #[getter]
    fn translation_steps_ok(&self) -> bool {
        self.inner.translation_steps_ok
    }

    /// Property (iii): y_k ⊥ V_{I_{p,q}}.
    #[getter]
    fn translation_membership_ok(&self) -> bool {
        self.inner.translation_membership_ok
    }

    /// ℓ = 1 base case on constant-control windows.
    #[getter]
    fn base_case_ok(&self) -> bool {
        self.inner.base_case_ok
    }

    /// Windows whose moment inequality failed its tolerance.
    #[getter]
    fn failures(&self) -> Vec<PyWindowCheck> {
        self.inner
            .failures
            .iter()
            .map(|w| PyWindowCheck { inner: w.clone() })
            .collect()
    }

    #[getter]
    fn passed(&self) -> bool {
        self.inner.passed
    }

    fn __repr__(&self) -> String {
        format!(
            "SegmentInductionReport(gamma={}, windows_checked={}, passed={})",
            self.inner.gamma, self.inner.windows_checked, self.inner.passed
        )
    }
}

/// One row of an ensemble summary (one trajectory).
#[pyclass(name = "TrajectorySummary", module = "_projlab", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyTrajectorySummary {
    inner: CoreSummary,
}

#[pymethods]
impl PyTrajectorySummary {
    #[getter]
    fn index(&self) -> usize {
        self.inner.index
    }

    /// The x₀ seed of this member (its policy/schedule seeds derive from the
    /// same sweep seed and index).
    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }

    #[getter]
    fn policy(&self) -> String {
        self.inner.policy.clone()
    }

    #[getter]
    fn schedule(&self) -> String {
        self.inner.schedule.clone()
    }

    #[getter]
    fn steps(&self) -> usize {
        self.inner.steps
    }

    /// (γ, empirical moment / bound) pairs.
    #[getter]
    fn moment_ratios(&self) -> Vec<(f64, f64)> {
        self.inner.moment_ratios.clone()
    }

    #[getter]
    fn max_s_ratio(&self) -> f64 {
        self.inner.max_s_ratio
    }

    #[getter]
    fn max_rearrangement_ratio(&self) -> f64 {
        self.inner.max_rearrangement_ratio
    }

    #[getter]
    fn s_at_one(&self) -> usize {
        self.inner.s_at_one
    }

    #[getter]
    fn verdict(&self) -> bool {
        self.inner.verdict
    }

    fn __repr__(&self) -> String {
        format!(
            "TrajectorySummary(index={}, policy={}, schedule={}, steps={}, verdict={})",
            self.inner.index,
            self.inner.policy,
            self.inner.schedule,
            self.inner.steps,
            self.inner.verdict
        )
    }
}

/// Which trajectory came closest to an envelope, per criterion.
#[pyclass(name = "WorstCase", module = "_projlab", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyWorstCase {
    inner: CoreWorstCase,
}

#[pymethods]
impl PyWorstCase {
    /// One of `moment`, `s_tau`, `rearrangement`.
    #[getter]
    fn criterion(&self) -> String {
        self.inner.criterion.clone()
    }

    #[getter]
    fn index(&self) -> usize {
        self.inner.index
    }

    #[getter]
    fn ratio(&self) -> f64 {
        self.inner.ratio
    }

    fn __repr__(&self) -> String {
        format!(
            "WorstCase(criterion={}, index={}, ratio={})",
            self.inner.criterion, self.inner.index, self.inner.ratio
        )
    }
}

/// Aggregated outcome of `ensemble_sweep`.
#[pyclass(name = "EnsembleReport", module = "_projlab", frozen)]
struct PyEnsembleReport {
    inner: CoreEnsembleReport,
}

#[pymethods]
impl PyEnsembleReport {
    #[getter]
    fn n_trajectories(&self) -> usize {
        self.inner.n_trajectories
    }

    #[getter]
    fn constants(&self) -> PyTheoreticalConstants {
        self.inner.constants.clone().into()
    }

    #[getter]
    fn rows(&self) -> Vec<PyTrajectorySummary> {
        self.inner
            .rows
            .iter()
            .map(|r| PyTrajectorySummary { inner: r.clone() })
            .collect()
    }

    /// (γ, max over trajectories of the moment ratio).
    #[getter]
    fn max_moment_ratio_per_gamma(&self) -> Vec<(f64, f64)> {
        self.inner.max_moment_ratio_per_gamma.clone()
    }

    #[getter]
    fn max_s_ratio(&self) -> f64 {
        self.inner.max_s_ratio
    }

    #[getter]
    fn max_rearrangement_ratio(&self) -> f64 {
        self.inner.max_rearrangement_ratio
    }

    /// True iff every per-trajectory verdict held.
    #[getter]
    fn all_verdicts_hold(&self) -> bool {
        self.inner.all_verdicts_hold
    }

    /// Closest approach per criterion (moment / s_tau / rearrangement).
    #[getter]
    fn worst(&self) -> Vec<PyWorstCase> {
        self.inner
            .worst
            .iter()
            .map(|w| PyWorstCase { inner: w.clone() })
            .collect()
    }

    /// Full report for the trajectory with the largest ratio overall.
    #[getter]
    fn worst_report(&self) -> PyBoundReport {
        self.inner.worst_report.clone().into()
    }

    /// Its profile, for reproduction and plot data.
    #[getter]
    fn worst_profile(&self) -> PyDisplacementProfile {
        self.inner.worst_profile.clone().into()
    }

    /// Seeds to replay the worst trajectory (x₀, policy, schedule).
    #[getter]
    fn worst_seeds(&self) -> (u64, u64, u64) {
        self.inner.worst_seeds
    }

    fn __repr__(&self) -> String {
        format!(
            "EnsembleReport(n_trajectories={}, all_verdicts_hold={}, max_s_ratio={})",
            self.inner.n_trajectories, self.inner.all_verdicts_hold, self.inner.max_s_ratio
        )
    }
}

// ---------------------------------------------------------------------------
// Functions
// ---------------------------------------------------------------------------

/// Principal angles between two subspaces, sorted ascending, in radians.
#[pyfunction]
fn principal_angles(v: &PySubspace, w: &PySubspace) -> PyResult<Vec<f64>> {
    regularity::principal_angles(&v.inner, &w.inner).map_err(pyerr)
}

/// Friedrichs angle of a pair (the smallest principal angle after deflating
/// the intersection), with cos/sin and κ(V, W) = 2/sin φ.
#[pyfunction]
fn friedrichs_angle(v: &PySubspace, w: &PySubspace) -> PyResult<PyAngleReport> {
    regularity::friedrichs_angle(&v.inner, &w.inner)
        .map(PyAngleReport::from)
        .map_err(pyerr)
}

/// Variational estimate of sin φ: minimizes d(x, V) + d(x, W) over unit
/// vectors of (V ∩ W)^⊥ by multi-start projected gradient descent.
#[pyfunction]
#[pyo3(signature = (v, w, restarts=regularity::DEFAULT_ORACLE_RESTARTS))]
fn sin_friedrichs_oracle(v: &PySubspace, w: &PySubspace, restarts: usize) -> PyResult<f64> {
    regularity::sin_friedrichs_oracle(&v.inner, &w.inner, restarts).map_err(pyerr)
}

/// κ* of a family via exhaustive enumeration of all subset pairs (including
/// ∅, which contributes κ = 2), capped at `max_members` members.
#[pyfunction]
#[pyo3(signature = (system, max_members=regularity::DEFAULT_MAX_MEMBERS))]
fn kappa_star(system: &PySubspaceSystem, max_members: usize) -> PyResult<PyRegularityCertificate> {
    regularity::kappa_star_with_limit(&system.inner, max_members)
        .map(PyRegularityCertificate::from)
        .map_err(pyerr)
}

/// Sampled estimate of the best constant in d(x, V_I) ≤ κ·max_{i∈I} d(x, V_i)
/// over the (0-based) index list I.
#[pyfunction]
fn empirical_regularity_kappa(
    system: &PySubspaceSystem,
    indices: Vec<usize>,
    n_samples: usize,
    seed: u64,
) -> PyResult<f64> {
    regularity::empirical_regularity_kappa(&system.inner, &indices, n_samples, seed).map_err(pyerr)
}

/// Displacement constants from a raw κ* value (no certificate needed).
#[pyfunction]
fn constants_for_kappa(
    kappa_star: f64,
    n: usize,
    eta: f64,
    gamma: f64,
) -> PyResult<PyTheoreticalConstants> {
    bounds::constants_for_kappa(kappa_star, n, eta, gamma)
        .map(PyTheoreticalConstants::from)
        .map_err(pyerr)
}

/// One relaxed projection step (1−λ)x + λP_{V_i}x (0-based member index).
#[pyfunction]
fn step(system: &PySubspaceSystem, i: usize, lam: f64, x: Vec<f64>) -> PyResult<Vec<f64>> {
    dynamics::step(&system.inner, i, lam, &to_dvector(&x))
        .map(|v| from_dvector(&v))
        .map_err(pyerr)
}

/// Runs the iteration x_{n+1} = (1−λ_n)x_n + λ_n P_{V_{i_n}} x_n until the
/// stopping rule fires (or an explicit control/relaxation sequence is
/// exhausted) and records everything.  Identical inputs reproduce
/// bit-identical records.
#[pyfunction]
#[pyo3(signature = (system, policy, schedule, x0, stopping=None, retain_iterates=false))]
fn run_trajectory(
    system: &PySubspaceSystem,
    policy: &PyControlPolicy,
    schedule: &PyRelaxationSchedule,
    x0: Vec<f64>,
    stopping: Option<&PyStoppingRule>,
    retain_iterates: bool,
) -> PyResult<PyTrajectoryRecord> {
    let stopping = stopping.map(|s| s.inner.clone()).unwrap_or_default();
    dynamics::run_trajectory(
        &system.inner,
        &policy.inner,
        &schedule.inner,
        &to_dvector(&x0),
        &stopping,
        retain_iterates,
    )
    .map(|inner| PyTrajectoryRecord { inner })
    .map_err(pyerr)
}

/// Σ ‖x_{n+1} − x_n‖^γ over the recorded steps of a trajectory.
#[pyfunction]
fn moment_sum(record: &PyTrajectoryRecord, gamma: f64) -> PyResult<f64> {
    analysis::moment_sum(&record.inner, gamma).map_err(pyerr)
}

/// Computes the normalized displacements, their rearrangement, moment sums
/// for every requested γ, and the S(τ) table for every requested τ.
#[pyfunction]
#[pyo3(signature = (record, gammas, taus=None))]
fn profile(
    record: &PyTrajectoryRecord,
    gammas: Vec<f64>,
    taus: Option<Vec<f64>>,
) -> PyResult<PyDisplacementProfile> {
    analysis::profile(&record.inner, &gammas, &taus.unwrap_or_default())
        .map(PyDisplacementProfile::from)
        .map_err(pyerr)
}

/// Compares a profile against the theory.  `constants` must come from the
/// same η and member count as the run; each moment row re-derives the
/// constants at its own exponent.
#[pyfunction]
fn check_bounds(
    profile: &PyDisplacementProfile,
    constants: &PyTheoreticalConstants,
) -> PyResult<PyBoundReport> {
    analysis::check_bounds(&profile.inner, &constants.inner)
        .map(PyBoundReport::from)
        .map_err(pyerr)
}

/// The natural τ comparison grid {β*^k} down to `floor`, thinned to at most
/// 64 points.
#[pyfunction]
#[pyo3(signature = (constants, floor=1e-14))]
fn default_tau_grid(constants: &PyTheoreticalConstants, floor: f64) -> Vec<f64> {
    analysis::default_tau_grid(&constants.inner, floor)
}

/// Recomputes θ_{I_n}(x_{n+1}) ≤ κ*^{|I_n|}·max_{k≤n} θ_{i_k}(x_k) at every
/// step of a record with retained iterates; conforming trajectories return
/// an empty list.
#[pyfunction]
fn verify_growth_lemma(
    record: &PyTrajectoryRecord,
    system: &PySubspaceSystem,
) -> PyResult<Vec<PyGrowthViolation>> {
    dynamics::verify_growth_lemma(&record.inner, &system.inner)
        .map(|vs| {
            vs.into_iter()
                .map(|inner| PyGrowthViolation { inner })
                .collect()
        })
        .map_err(pyerr)
}

/// Checks x_{m+1} − x₀ ∈ V_{I_m}^⊥ for every step of a record with retained
/// iterates.
#[pyfunction]
fn verify_displacement_membership(
    record: &PyTrajectoryRecord,
    system: &PySubspaceSystem,
) -> PyResult<bool> {
    dynamics::verify_displacement_membership(&record.inner, &system.inner).map_err(pyerr)
}

/// Verifies the small-angle dichotomy along a trajectory; returns
/// `"inapplicable"`, `"holds"`, or `"violated"`.
#[pyfunction]
fn verify_small_theta_dichotomy(
    record: &PyTrajectoryRecord,
    system: &PySubspaceSystem,
    constants: &PyTheoreticalConstants,
) -> PyResult<&'static str> {
    dynamics::verify_small_theta_dichotomy(&record.inner, &system.inner, &constants.inner)
        .map(|o| match o {
            DichotomyOutcome::Inapplicable => "inapplicable",
            DichotomyOutcome::Holds => "holds",
            DichotomyOutcome::Violated => "violated",
        })
        .map_err(pyerr)
}

/// Replays the segment-wise induction on a sampled family of windows of a
/// record with retained iterates: the moment inequality (plain and
/// translated form) plus the structural properties of the translated
/// trajectory.
#[pyfunction]
fn segment_induction_test(
    record: &PyTrajectoryRecord,
    system: &PySubspaceSystem,
    constants: &PyTheoreticalConstants,
) -> PyResult<PySegmentInductionReport> {
    analysis::segment_induction_test(&record.inner, &system.inner, &constants.inner)
        .map(|inner| PySegmentInductionReport { inner })
        .map_err(pyerr)
}

/// The exact (policy, schedule, x₀, seeds) tuple that `ensemble_sweep` hands
/// to trajectory `index` — a pure function of its arguments, so any sweep
/// member can be replayed offline with iterates retained.
#[pyfunction]
fn sweep_member_inputs(
    policies: Vec<PyControlPolicy>,
    schedules: Vec<PyRelaxationSchedule>,
    ambient_dim: usize,
    seed: u64,
    index: usize,
) -> PyResult<(
    PyControlPolicy,
    PyRelaxationSchedule,
    Vec<f64>,
    (u64, u64, u64),
)> {
    let policies: Vec<CorePolicy> = policies.into_iter().map(|p| p.inner).collect();
    let schedules: Vec<CoreSchedule> = schedules.into_iter().map(|s| s.inner).collect();
    analysis::sweep_member_inputs(&policies, &schedules, ambient_dim, seed, index)
        .map(|(p, s, x0, seeds)| (p.into(), s.into(), from_dvector(&x0), seeds))
        .map_err(pyerr)
}

/// Runs `n_trajectories` seeded trajectories in parallel (policies and
/// schedules cycled over the given lists, unit-Gaussian starts), checks
/// every bound on each, and aggregates the maxima.  Identical inputs
/// reproduce the report bit for bit.
#[pyfunction]
#[pyo3(signature = (system, policies, schedules, n_trajectories, gammas, taus=None, stopping=None, seed=0))]
#[allow(clippy::too_many_arguments)]
fn ensemble_sweep(
    system: &PySubspaceSystem,
    policies: Vec<PyControlPolicy>,
    schedules: Vec<PyRelaxationSchedule>,
    n_trajectories: usize,
    gammas: Vec<f64>,
    taus: Option<Vec<f64>>,
    stopping: Option<&PyStoppingRule>,
    seed: u64,
) -> PyResult<PyEnsembleReport> {
    let policies: Vec<CorePolicy> = policies.into_iter().map(|p| p.inner).collect();
    let schedules: Vec<CoreSchedule> = schedules.into_iter().map(|s| s.inner).collect();
    let stopping = stopping.map(|s| s.inner.clone()).unwrap_or_default();
    analysis::ensemble_sweep(
        &system.inner,
        &policies,
        &schedules,
        n_trajectories,
        &gammas,
        &taus.unwrap_or_default(),
        &stopping,
        seed,
    )
    .map(|inner| PyEnsembleReport { inner })
    .map_err(pyerr)
}

// ---------------------------------------------------------------------------
// Module
// ---------------------------------------------------------------------------

#[pymodule]
fn _projlab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;

    m.add("DEFAULT_MAX_STEPS", dynamics::DEFAULT_MAX_STEPS)?;
    m.add("DEFAULT_STOP_TOL", dynamics::DEFAULT_STOP_TOL)?;
    m.add("DEFAULT_STALL_WINDOW", dynamics::DEFAULT_STALL_WINDOW)?;
    m.add("DEFAULT_ORACLE_RESTARTS", regularity::DEFAULT_ORACLE_RESTARTS)?;
    m.add("DEFAULT_MAX_MEMBERS", regularity::DEFAULT_MAX_MEMBERS)?;
    m.add("VERDICT_SLACK", analysis::VERDICT_SLACK)?;

    m.add_class::<PySubspace>()?;
    m.add_class::<PySubspaceSystem>()?;
    m.add_class::<PyAngleReport>()?;
    m.add_class::<PyPairAngles>()?;
    m.add_class::<PyRegularityCertificate>()?;
    m.add_class::<PyTheoreticalConstants>()?;
    m.add_class::<PyControlPolicy>()?;
    m.add_class::<PyRelaxationSchedule>()?;
    m.add_class::<PyStoppingRule>()?;
    m.add_class::<PyTrajectoryRecord>()?;
    m.add_class::<PyGrowthViolation>()?;
    m.add_class::<PyDisplacementProfile>()?;
    m.add_class::<PyMomentCheck>()?;
    m.add_class::<PySTauCheck>()?;
    m.add_class::<PyRearrangementCheck>()?;
    m.add_class::<PyBoundReport>()?;
    m.add_class::<PyWindowCheck>()?;
    m.add_class::<PySegmentInductionReport>()?;
    m.add_class::<PyTrajectorySummary>()?;
    m.add_class::<PyWorstCase>()?;
    m.add_class::<PyEnsembleReport>()?;

    m.add_function(wrap_pyfunction!(principal_angles, m)?)?;
    m.add_function(wrap_pyfunction!(friedrichs_angle, m)?)?;
    m.add_function(wrap_pyfunction!(sin_friedrichs_oracle, m)?)?;
    m.add_function(wrap_pyfunction!(kappa_star, m)?)?;
    m.add_function(wrap_pyfunction!(empirical_regularity_kappa, m)?)?;
    m.add_function(wrap_pyfunction!(constants_for_kappa, m)?)?;
    m.add_function(wrap_pyfunction!(step, m)?)?;
    m.add_function(wrap_pyfunction!(run_trajectory, m)?)?;
    m.add_function(wrap_pyfunction!(moment_sum, m)?)?;
    m.add_function(wrap_pyfunction!(profile, m)?)?;
    m.add_function(wrap_pyfunction!(check_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(default_tau_grid, m)?)?;
    m.add_function(wrap_pyfunction!(verify_growth_lemma, m)?)?;
    m.add_function(wrap_pyfunction!(verify_displacement_membership, m)?)?;
    m.add_function(wrap_pyfunction!(verify_small_theta_dichotomy, m)?)?;
    m.add_function(wrap_pyfunction!(segment_induction_test, m)?)?;
    m.add_function(wrap_pyfunction!(sweep_member_inputs, m)?)?;
    m.add_function(wrap_pyfunction!(ensemble_sweep, m)?)?;
    Ok(())
}
