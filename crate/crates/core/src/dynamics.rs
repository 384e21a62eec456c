//! The trajectory engine: relaxed projection iterations under arbitrary
//! control.
//!
//! A trajectory is the sequence
//!
//! ```text
//!     x_{n+1} = P_{i_n, λ_n} x_n = (1 − λ_n) x_n + λ_n P_{V_{i_n}} x_n,
//! ```
//!
//! where the control indices i_n come from a [`ControlPolicy`] and the
//! relaxation weights λ_n ∈ [η, 2−η] from a [`RelaxationSchedule`].  The
//! engine records, per step, the displacement norm, ‖x_n‖, the relative
//! distance θ_{i_n}(x_n), and the accumulated index set
//! I_n = {i_k : k ≤ n} — everything needed to check the structural facts of
//! the theory afterwards:
//!
//! * ‖x_{n+1} − x_n‖ = λ_n·θ_{i_n}(x_n)·‖x_n‖ (a per-step identity),
//! * ‖x_{n+1}‖ ≤ ‖x_n‖ (the relaxed projections are norm-nonexpansive),
//! * θ_{I_n}(x_{n+1}) ≤ κ*^{|I_n|}·max_{k≤n} θ_{i_k}(x_k)
//!   ([`verify_growth_lemma`]),
//! * x_{m+1} − x_0 ∈ V_{I_m}^⊥ ([`verify_displacement_membership`]),
//! * the small-angle dichotomy: if every θ_{i_k}(x_k) stays below
//!   κ*^{−|I_n|}, then x_0 = 0 or x_0 ∉ V_{I_n}^⊥
//!   ([`verify_small_theta_dichotomy`]).

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bounds::TheoreticalConstants;
use crate::error::{Error, Result};
use crate::regularity;
use crate::subspace::{SubspaceSystem, TOL_ZERO};

/// Default step cap for a single trajectory.
pub const DEFAULT_MAX_STEPS: usize = 100_000;
/// Default relative displacement threshold for stall detection.
pub const DEFAULT_STOP_TOL: f64 = 1e-14;
/// Default number of consecutive sub-threshold steps that ends a run.
pub const DEFAULT_STALL_WINDOW: usize = 50;

/// How the control index i_n is chosen at each step.
#[derive(Clone, Debug, PartialEq)]
pub enum ControlPolicy {
    /// i_n = n mod N.
    Cyclic,
    /// i_n uniform on {0, …, N−1} from a seeded generator.
    UniformRandom { seed: u64 },
    /// i_n maximizing the residual ‖x_n − P_i x_n‖; ties break to the
    /// smallest index.
    Greedy,
    /// A repeating block schedule of (index, repeat-count) pairs — long gaps
    /// on one member delay convergence arbitrarily without breaking any of
    /// the displacement bounds.
    AdversarialGap { pattern: Vec<(usize, usize)> },
    /// A fixed finite sequence; the trajectory ends when it is exhausted.
    Explicit { sequence: Vec<usize> },
}

impl ControlPolicy {
    /// Validates index ranges and pattern shape against a family of
    /// `n_members` subspaces.
    pub fn validate(&self, n_members: usize) -> Result<()> {
        match self {
            ControlPolicy::Cyclic | ControlPolicy::UniformRandom { .. } | ControlPolicy::Greedy => {
                Ok(())
            }
            ControlPolicy::AdversarialGap { pattern } => {
                if pattern.is_empty() {
                    return Err(Error::InvalidInput(
                        "adversarial-gap pattern must contain at least one block".into(),
                    ));
                }
                for &(i, reps) in pattern {
                    if i >= n_members {
                        return Err(Error::IndexOutOfRange(format!(
                            "pattern index {i} of {n_members}"
                        )));
                    }
                    if reps == 0 {
                        return Err(Error::InvalidInput(
                            "pattern repeat-counts must be ≥ 1".into(),
                        ));
                    }
                }
                Ok(())
            }
            ControlPolicy::Explicit { sequence } => {
                for &i in sequence {
                    if i >= n_members {
                        return Err(Error::IndexOutOfRange(format!(
                            "explicit control {i} of {n_members}"
                        )));
                    }
                }
                Ok(())
            }
        }
    }

    /// Short stable name for reports and CSV rows.
    pub fn describe(&self) -> &'static str {
        match self {
            ControlPolicy::Cyclic => "cyclic",
            ControlPolicy::UniformRandom { .. } => "uniform_random",
            ControlPolicy::Greedy => "greedy",
            ControlPolicy::AdversarialGap { .. } => "adversarial_gap",
            ControlPolicy::Explicit { .. } => "explicit",
        }
    }
}

/// How the relaxation weight λ_n is chosen at each step; every emitted value
/// lies in the band [η, 2−η].
#[derive(Clone, Debug, PartialEq)]
pub enum ScheduleKind {
    /// λ_n ≡ λ.
    Constant(f64),
    /// λ_n uniform on [η, 2−η] from a seeded generator.
    UniformRandomInBand { seed: u64 },
    /// λ_n alternates η (even steps) and 2−η (odd steps).
    AlternatingExtremes,
    /// A fixed finite sequence; the trajectory ends when it is exhausted.
    Explicit(Vec<f64>),
}

/// A relaxation schedule: the band parameter η ∈ (0, 1] plus a rule.
#[derive(Clone, Debug, PartialEq)]
pub struct RelaxationSchedule {
    eta: f64,
    kind: ScheduleKind,
}

impl RelaxationSchedule {
    /// Validates η ∈ (0, 1] and that constant/explicit weights lie in
    /// [η, 2−η].
    pub fn new(eta: f64, kind: ScheduleKind) -> Result<Self> {
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "band parameter η = {eta} outside (0, 1]"
            )));
        }
        let band = eta..=(2.0 - eta);
        match &kind {
            ScheduleKind::Constant(l) => {
                if !band.contains(l) {
                    return Err(Error::InvalidParameter(format!(
                        "constant relaxation λ = {l} outside [η, 2−η] = [{eta}, {}]",
                        2.0 - eta
                    )));
                }
            }
            ScheduleKind::Explicit(seq) => {
                for (n, l) in seq.iter().enumerate() {
                    if !band.contains(l) {
                        return Err(Error::InvalidParameter(format!(
                            "explicit relaxation λ_{n} = {l} outside [η, 2−η]"
                        )));
                    }
                }
            }
            ScheduleKind::UniformRandomInBand { .. } | ScheduleKind::AlternatingExtremes => {}
        }
        Ok(Self { eta, kind })
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn kind(&self) -> &ScheduleKind {
        &self.kind
    }

    /// Short stable name for reports and CSV rows.
    pub fn describe(&self) -> &'static str {
        match self.kind {
            ScheduleKind::Constant(_) => "constant",
            ScheduleKind::UniformRandomInBand { .. } => "uniform_random_in_band",
            ScheduleKind::AlternatingExtremes => "alternating_extremes",
            ScheduleKind::Explicit(_) => "explicit",
        }
    }
}

/// When a finite run of the (mathematically infinite) iteration stops: after
/// `max_steps`, or once the relative displacement stays below `stop_tol` for
/// `stall_window` consecutive steps.
#[derive(Clone, Debug, Serialize)]
pub struct StoppingRule {
    pub max_steps: usize,
    /// Relative to ‖x₀‖.
    pub stop_tol: f64,
    pub stall_window: usize,
}

impl Default for StoppingRule {
    fn default() -> Self {
        Self {
            max_steps: DEFAULT_MAX_STEPS,
            stop_tol: DEFAULT_STOP_TOL,
            stall_window: DEFAULT_STALL_WINDOW,
        }
    }
}

/// Everything recorded along one trajectory.
///
/// Lists indexed by step n run over 0 ≤ n < `steps`; `norms` additionally
/// carries ‖x_0‖ up front, so `norms[n]` = ‖x_n‖ for 0 ≤ n ≤ steps.
#[derive(Clone, Debug)]
pub struct TrajectoryRecord {
    pub x0_norm: f64,
    /// Band parameter of the schedule that produced the run.
    pub eta: f64,
    /// Member count of the system that produced the run.
    pub n_members: usize,
    pub initial_point: DVector<f64>,
    pub final_point: DVector<f64>,
    pub steps: usize,
    /// i_n per step.
    pub controls: Vec<usize>,
    /// λ_n per step.
    pub relaxations: Vec<f64>,
    /// ‖x_{n+1} − x_n‖ per step.
    pub displacement_norms: Vec<f64>,
    /// ‖x_n‖ for n = 0 … steps.
    pub norms: Vec<f64>,
    /// I_n = {i_k : k ≤ n} per step, as bitmasks (nondecreasing; I_{−1} = ∅).
    pub index_set_history: Vec<u64>,
    /// θ_{i_n}(x_n) per step.
    pub per_step_theta: Vec<f64>,
    /// x_0 … x_steps, kept only on request.
    pub iterates: Option<Vec<DVector<f64>>>,
}

enum PolicyDriver<'a> {
    Cyclic,
    Uniform { rng: ChaCha8Rng },
    Greedy,
    Gap { pattern: &'a [(usize, usize)], block: usize, used: usize },
    Explicit { sequence: &'a [usize], pos: usize },
}

impl PolicyDriver<'_> {
    fn next(
        &mut self,
        step: usize,
        system: &SubspaceSystem,
        x: &DVector<f64>,
    ) -> Option<usize> {
        match self {
            PolicyDriver::Cyclic => Some(step % system.len()),
            PolicyDriver::Uniform { rng } => Some(rng.random_range(0..system.len())),
            PolicyDriver::Greedy => {
                let mut best = 0usize;
                let mut best_d = f64::NEG_INFINITY;
                for (i, m) in system.members().iter().enumerate() {
                    let d = m.distance_raw(x);
                    if d > best_d {
                        best_d = d;
                        best = i;
                    }
                }
                Some(best)
            }
            PolicyDriver::Gap { pattern, block, used } => {
                if *used == pattern[*block].1 {
                    *block = (*block + 1) % pattern.len();
                    *used = 0;
                }
                *used += 1;
                Some(pattern[*block].0)
            }
            PolicyDriver::Explicit { sequence, pos } => {
                let i = sequence.get(*pos).copied();
                *pos += 1;
                i
            }
        }
    }
}

enum ScheduleDriver<'a> {
    Constant(f64),
    Band { lo: f64, hi: f64, rng: ChaCha8Rng },
    Alternating { eta: f64 },
    Explicit { sequence: &'a [f64], pos: usize },
}

impl ScheduleDriver<'_> {
    fn next(&mut self, step: usize) -> Option<f64> {
        match self {
            ScheduleDriver::Constant(l) => Some(*l),
            ScheduleDriver::Band { lo, hi, rng } => {
                if *hi - *lo <= f64::EPSILON {
                    Some(*lo)
                } else {
                    Some(rng.random_range(*lo..=*hi))
                }
            }
            ScheduleDriver::Alternating { eta } => {
                Some(if step % 2 == 0 { *eta } else { 2.0 - *eta })
            }
            ScheduleDriver::Explicit { sequence, pos } => {
                let l = sequence.get(*pos).copied();
                *pos += 1;
                l
            }
        }
    }
}

/// One relaxed projection step onto member `i`.
pub fn step(
    system: &SubspaceSystem,
    i: usize,
    lambda: f64,
    x: &DVector<f64>,
) -> Result<DVector<f64>> {
    system.member(i)?.relaxed_project(lambda, x)
}

/// Runs the iteration until the stopping rule fires (or an explicit control
/// or relaxation sequence is exhausted) and records everything.
///
/// Determinism: the seeded policies and schedules are pure functions of their
/// seeds, so identical inputs reproduce bit-identical records.
pub fn run_trajectory(
    system: &SubspaceSystem,
    policy: &ControlPolicy,
    schedule: &RelaxationSchedule,
    x0: &DVector<f64>,
    stopping: &StoppingRule,
    retain_iterates: bool,
) -> Result<TrajectoryRecord> {
    if x0.len() != system.ambient_dim() {
        return Err(Error::InvalidInput(format!(
            "x₀ has length {} but the system lives in ℝ^{}",
            x0.len(),
            system.ambient_dim()
        )));
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("x₀ must be finite".into()));
    }
    policy.validate(system.len())?;

    let mut policy_driver = match policy {
        ControlPolicy::Cyclic => PolicyDriver::Cyclic,
        ControlPolicy::UniformRandom { seed } => PolicyDriver::Uniform {
            rng: ChaCha8Rng::seed_from_u64(*seed),
        },
        ControlPolicy::Greedy => PolicyDriver::Greedy,
        ControlPolicy::AdversarialGap { pattern } => PolicyDriver::Gap {
            pattern,
            block: 0,
            used: 0,
        },
        ControlPolicy::Explicit { sequence } => PolicyDriver::Explicit { sequence, pos: 0 },
    };
    let mut schedule_driver = match &schedule.kind {
        ScheduleKind::Constant(l) => ScheduleDriver::Constant(*l),
        ScheduleKind::UniformRandomInBand { seed } => ScheduleDriver::Band {
            lo: schedule.eta,
            hi: 2.0 - schedule.eta,
            rng: ChaCha8Rng::seed_from_u64(*seed),
        },
        ScheduleKind::AlternatingExtremes => ScheduleDriver::Alternating { eta: schedule.eta },
        ScheduleKind::Explicit(sequence) => ScheduleDriver::Explicit { sequence, pos: 0 },
    };

    let x0_norm = x0.norm();
    let mut x = x0.clone();
    let mut controls = Vec::new();
    let mut relaxations = Vec::new();
    let mut displacement_norms = Vec::new();
    let mut norms = vec![x0_norm];
    let mut index_set_history = Vec::new();
    let mut per_step_theta = Vec::new();
    let mut iterates = retain_iterates.then(|| vec![x0.clone()]);
    let mut mask = 0u64;
    let mut stall = 0usize;

    for n in 0..stopping.max_steps {
        let Some(i) = policy_driver.next(n, system, &x) else {
            break;
        };
        let Some(lambda) = schedule_driver.next(n) else {
            break;
        };
        debug_assert!(i < system.len(), "policies are validated up front");

        let member = system.member(i)?;
        let p = member.project_raw(&x);
        let r = &x - &p;
        let d = r.norm();
        let x_norm = norms[n];
        // θ(0) = 0 by convention; TOL_ZERO only guards against underflow.
        let theta = if x_norm <= TOL_ZERO { 0.0 } else { (d / x_norm).min(1.0) };
        // x − λ(x − Px) = (1−λ)x + λPx; via the residual so that the recorded
        // displacement λ·d matches the step bit-for-bit.
        let x_next = &x - lambda * &r;
        let displacement = lambda * d;

        controls.push(i);
        relaxations.push(lambda);
        displacement_norms.push(displacement);
        per_step_theta.push(theta);
        mask |= 1 << i;
        index_set_history.push(mask);
        norms.push(x_next.norm());
        if let Some(list) = iterates.as_mut() {
            list.push(x_next.clone());
        }
        x = x_next;

        if displacement <= stopping.stop_tol * x0_norm {
            stall += 1;
            if stall >= stopping.stall_window {
                break;
            }
        } else {
            stall = 0;
        }
    }

    Ok(TrajectoryRecord {
        x0_norm,
        eta: schedule.eta,
        n_members: system.len(),
        initial_point: x0.clone(),
        final_point: x,
        steps: controls.len(),
        controls,
        relaxations,
        displacement_norms,
        norms,
        index_set_history,
        per_step_theta,
        iterates,
    })
}

/// A step at which the growth inequality failed its tolerance.
#[derive(Clone, Debug, Serialize)]
pub struct GrowthViolation {
    pub step: usize,
    /// θ_{I_n}(x_{n+1}), recomputed from the retained iterate.
    pub lhs: f64,
    /// κ*^{|I_n|} · max_{k≤n} θ_{i_k}(x_k).
    pub rhs: f64,
}

fn require_iterates(record: &TrajectoryRecord) -> Result<&Vec<DVector<f64>>> {
    record.iterates.as_ref().ok_or_else(|| {
        Error::MissingData("this verification needs a record with retained iterates".into())
    })
}

fn check_record_system(record: &TrajectoryRecord, system: &SubspaceSystem) -> Result<()> {
    if record.n_members != system.len() {
        return Err(Error::ConfigMismatch(format!(
            "record was produced by a {}-member system, got {} members",
            record.n_members,
            system.len()
        )));
    }
    Ok(())
}

/// Recomputes θ_{I_n}(x_{n+1}) ≤ κ*^{|I_n|}·max_{k≤n} θ_{i_k}(x_k) at every
/// step, flagging violations beyond 1e-8 relative slack.  Conforming
/// trajectories return an empty list.
pub fn verify_growth_lemma(
    record: &TrajectoryRecord,
    system: &SubspaceSystem,
) -> Result<Vec<GrowthViolation>> {
    check_record_system(record, system)?;
    let iterates = require_iterates(record)?;
    let cert = regularity::kappa_star(system)?;
    let mut violations = Vec::new();
    let mut running_max_theta = 0.0_f64;
    for n in 0..record.steps {
        running_max_theta = running_max_theta.max(record.per_step_theta[n]);
        let mask = record.index_set_history[n];
        let v_in = system.intersection_mask(mask)?;
        let lhs = v_in.relative_distance(&iterates[n + 1])?;
        let rhs = cert.kappa_star.powi(mask.count_ones() as i32) * running_max_theta;
        if lhs > rhs * (1.0 + 1e-8) + 1e-12 {
            violations.push(GrowthViolation { step: n, lhs, rhs });
        }
    }
    Ok(violations)
}

/// Checks x_{m+1} − x_0 ∈ V_{I_m}^⊥ for every m: the projection of the
/// accumulated displacement onto V_{I_m} must have norm ≤ 1e-9·‖x₀‖.
pub fn verify_displacement_membership(
    record: &TrajectoryRecord,
    system: &SubspaceSystem,
) -> Result<bool> {
    check_record_system(record, system)?;
    let iterates = require_iterates(record)?;
    let tol = 1e-9 * record.x0_norm;
    for m in 0..record.steps {
        let v_im = system.intersection_mask(record.index_set_history[m])?;
        let moved = &iterates[m + 1] - &iterates[0];
        if v_im.project_raw(&moved).norm() > tol {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Outcome of the small-angle dichotomy check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum DichotomyOutcome {
    /// No step satisfied the smallness hypothesis; nothing to confirm.
    Inapplicable,
    /// At every applicable step, x₀ = 0 or x₀ sits quantifiably outside
    /// V_{I_n}^⊥.
    Holds,
    /// Some applicable step contradicted the dichotomy.
    Violated,
}

/// Verifies the dichotomy: wherever max_{k≤n} θ_{i_k}(x_k) < κ*^{−|I_n|},
/// either x₀ = 0 or x₀ ∉ V_{I_n}^⊥.
///
/// The membership test is quantitative rather than a bare ‖P_{I_n}x₀‖ > 0:
/// combining the growth inequality with x_{n+1} − x₀ ⊥ V_{I_n} gives
///
/// ```text
///     ‖P_{I_n} x₀‖ = ‖P_{I_n} x_{n+1}‖ ≥ ‖x_{n+1}‖·(1 − (κ*^{|I_n|}·ε_n)²)^{1/2},
/// ```
///
/// and that explicit lower bound is what gets checked (with 1e-8 relative
/// slack), so a conforming trajectory certifies the proposition with margins
/// rather than a sign bit.
pub fn verify_small_theta_dichotomy(
    record: &TrajectoryRecord,
    system: &SubspaceSystem,
    constants: &TheoreticalConstants,
) -> Result<DichotomyOutcome> {
    check_record_system(record, system)?;
    if record.x0_norm <= TOL_ZERO {
        // x₀ = 0: the dichotomy holds trivially (every step is applicable).
        return Ok(if record.steps > 0 {
            DichotomyOutcome::Holds
        } else {
            DichotomyOutcome::Inapplicable
        });
    }
    let kappa = constants.kappa_star;
    let mut applicable = false;
    let mut running_max_theta = 0.0_f64;
    for n in 0..record.steps {
        running_max_theta = running_max_theta.max(record.per_step_theta[n]);
        let mask = record.index_set_history[n];
        let ell = mask.count_ones() as i32;
        if running_max_theta >= kappa.powi(-ell) {
            continue; // hypothesis fails at this n
        }
        applicable = true;
        let growth = kappa.powi(ell) * running_max_theta; // < 1 by hypothesis
        let lower = record.norms[n + 1] * (1.0 - growth * growth).max(0.0).sqrt();
        let v_in = system.intersection_mask(mask)?;
        let projected = v_in.project_raw(&record.initial_point).norm();
        if projected < lower * (1.0 - 1e-8) - 1e-12 * record.x0_norm {
            return Ok(DichotomyOutcome::Violated);
        }
    }
    Ok(if applicable {
        DichotomyOutcome::Holds
    } else {
        DichotomyOutcome::Inapplicable
    })
}
