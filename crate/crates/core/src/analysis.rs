//! Displacement statistics and theory-vs-experiment reports.
//!
//! Given a recorded trajectory this module computes
//!
//! * moment sums Σ‖x_{n+1}−x_n‖^γ,
//! * normalized displacements δ_n = ‖x_{n+1}−x_n‖ / ((2−η)‖x₀‖) ∈ [0, 1],
//! * the empirical distribution count S(τ) = |{n : δ_n ≥ τ}|,
//! * the decreasing rearrangement δ*₀ ≥ δ*₁ ≥ ⋯,
//!
//! and compares each against its theoretical envelope from
//! [`crate::bounds`]: the moment bound C_N‖x₀‖^γ, the two |ln τ|-polynomial
//! envelopes for S(τ), and the root-exponential rearrangement decay
//! c*·exp(−ρ*·n^{1/N}).  [`segment_induction_test`] additionally replays the
//! segment-wise induction that underlies the moment bound — the inequality
//! P(ℓ): Σ_{k=p}^{q}‖x_{k+1}−x_k‖^γ ≤ C_ℓ‖x_p‖^γ whenever the window [p, q]
//! uses at most ℓ distinct indices — together with the translated-trajectory
//! facts the induction leans on.  [`ensemble_sweep`] batches all of it across
//! many seeded trajectories in parallel.

use nalgebra::DVector;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{constants_for_kappa, serialize_overflow, TheoreticalConstants};
use crate::dynamics::{
    run_trajectory, ControlPolicy, RelaxationSchedule, StoppingRule, TrajectoryRecord,
};
use crate::error::{Error, Result};
use crate::regularity;
use crate::subspace::{SubspaceSystem, TOL_ZERO};

/// Relative slack applied to every empirical-vs-theoretical comparison.
pub const VERDICT_SLACK: f64 = 1e-12;
/// Relative slack for the windowed induction inequalities, which involve
/// recomputed projections.
const WINDOW_SLACK: f64 = 1e-9;
/// Absolute floor shielding comparisons of denormal-range quantities.
const TINY: f64 = 1e-280;
/// Per-step displacement uncertainty relative to the local iterate scale:
/// a few hundred ulps, covering the worst-case rounding of one projector
/// application plus one vector subtraction in ambient dimensions ≤ 64.
const NOISE_REL: f64 = 1e-13;
/// Fixed seed for the random window family of [`segment_induction_test`].
const WINDOW_SEED: u64 = 0x5eed_0bad_cafe_0042;
/// Random windows sampled per trajectory by [`segment_induction_test`].
const N_RANDOM_WINDOWS: usize = 100;
/// Change-point suffix windows are subsampled beyond this count to keep the
/// test quadratic-cost-free on long runs; stretches and random windows are
/// never dropped.
const MAX_SUFFIX_WINDOWS: usize = 128;

/// Compensated (Kahan) summation; the moment sums add thousands of terms
/// spanning many orders of magnitude.
fn kahan_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0_f64;
    let mut carry = 0.0_f64;
    for v in values {
        let y = v - carry;
        let t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    sum
}

/// Σ‖x_{n+1}−x_n‖^γ over the recorded steps.
pub fn moment_sum(record: &TrajectoryRecord, gamma: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "moment exponent γ = {gamma} must be a positive finite real"
        )));
    }
    Ok(kahan_sum(
        record.displacement_norms.iter().map(|d| d.powf(gamma)),
    ))
}

/// The empirical displacement statistics of one trajectory.
#[derive(Clone, Debug, Serialize)]
pub struct DisplacementProfile {
    pub eta: f64,
    /// Member count of the producing system (carried for report matching).
    pub n_members: usize,
    pub x0_norm: f64,
    /// δ_n = ‖x_{n+1}−x_n‖ / ((2−η)‖x₀‖), in step order.
    pub deltas: Vec<f64>,
    /// The δ_n in nonincreasing order (decreasing rearrangement δ*).
    pub sorted_deltas: Vec<f64>,
    /// (γ, Σ‖x_{n+1}−x_n‖^γ) pairs, in the requested γ order.
    #[serde(serialize_with = "serialize_pairs")]
    pub moment_sums: Vec<(f64, f64)>,
    /// (τ, |{n : δ_n ≥ τ}|) pairs, in the requested τ order.
    pub s_of_tau: Vec<(f64, usize)>,
}

fn serialize_pairs<S: serde::Serializer>(
    pairs: &[(f64, f64)],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(pairs.len()))?;
    for (k, v) in pairs {
        // Large-η/γ corner cases can push raw sums past representability.
        let v = if v.is_finite() { *v } else { f64::MAX };
        seq.serialize_element(&(*k, v))?;
    }
    seq.end()
}

impl DisplacementProfile {
    /// Empirical S(τ) for an arbitrary threshold (not restricted to the
    /// tabulated grid).
    pub fn s_at(&self, tau: f64) -> usize {
        self.deltas.iter().filter(|&&d| d >= tau).count()
    }
}

/// Computes the normalized displacements, their rearrangement, moment sums
/// for every requested γ, and the S(τ) table for every requested τ.
pub fn profile(
    record: &TrajectoryRecord,
    gammas: &[f64],
    taus: &[f64],
) -> Result<DisplacementProfile> {
    if record.steps == 0 {
        return Err(Error::InvalidInput(
            "profile needs at least one recorded step".into(),
        ));
    }
    if record.x0_norm <= TOL_ZERO {
        return Err(Error::DegenerateProfile(
            "x₀ = 0: every displacement vanishes and δ_n is undefined".into(),
        ));
    }
    for &tau in taus {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "threshold τ = {tau} must be a positive finite real"
            )));
        }
    }

    let denom = (2.0 - record.eta) * record.x0_norm;
    // ‖x_{n+1}−x_n‖ = λ_n θ_n ‖x_n‖ ≤ (2−η)‖x₀‖, so δ_n ≤ 1 up to roundoff.
    let deltas: Vec<f64> = record
        .displacement_norms
        .iter()
        .map(|d| (d / denom).min(1.0))
        .collect();
    let mut sorted_deltas = deltas.clone();
    sorted_deltas.sort_by(|a, b| b.partial_cmp(a).expect("δ_n are finite"));

    let mut moment_sums = Vec::with_capacity(gammas.len());
    for &gamma in gammas {
        moment_sums.push((gamma, moment_sum(record, gamma)?));
    }
    let s_of_tau = taus
        .iter()
        .map(|&tau| (tau, deltas.iter().filter(|&&d| d >= tau).count()))
        .collect();

    Ok(DisplacementProfile {
        eta: record.eta,
        n_members: record.n_members,
        x0_norm: record.x0_norm,
        deltas,
        sorted_deltas,
        moment_sums,
        s_of_tau,
    })
}

/// One γ row of a [`BoundReport`].
#[derive(Clone, Debug, Serialize)]
pub struct MomentCheck {
    pub gamma: f64,
    pub empirical: f64,
    /// C_N(γ)·‖x₀‖^γ.
    #[serde(serialize_with = "serialize_overflow")]
    pub bound: f64,
    /// empirical / bound; conforming trajectories stay ≤ 1.
    pub ratio: f64,
}

/// One τ row of a [`BoundReport`].
#[derive(Clone, Debug, Serialize)]
pub struct STauCheck {
    pub tau: f64,
    pub empirical: usize,
    /// min of the two |ln τ|-polynomial envelopes.
    #[serde(serialize_with = "serialize_overflow")]
    pub bound: f64,
}

/// One rank row of a [`BoundReport`].
#[derive(Clone, Debug, Serialize)]
pub struct RearrangementCheck {
    pub n: usize,
    pub delta_star: f64,
    /// c*·exp(−ρ*·n^{1/N}).
    pub bound: f64,
}

/// Empirical quantities of one trajectory against every theoretical envelope.
#[derive(Clone, Debug, Serialize)]
pub struct BoundReport {
    pub constants: TheoreticalConstants,
    pub empirical_moment: Vec<MomentCheck>,
    pub s_tau_pairs: Vec<STauCheck>,
    pub rearrangement_pairs: Vec<RearrangementCheck>,
    /// Empirical S(1): how many steps moved the full allowed (2−η)‖x₀‖.
    pub s_at_one: usize,
    /// Side check (never part of the verdict): S(1) ≤ 1.
    pub s_one_side_check: bool,
    /// True iff every empirical quantity is within its envelope at 1e-12
    /// relative slack.
    pub verdict: bool,
    pub caveats: Vec<String>,
}

/// Compares a profile against the theory.  `constants` must come from the
/// same η and member count as the run; its γ is irrelevant because each
/// moment row re-derives the constants at its own exponent.
pub fn check_bounds(
    profile: &DisplacementProfile,
    constants: &TheoreticalConstants,
) -> Result<BoundReport> {
    if profile.n_members != constants.n {
        return Err(Error::ConfigMismatch(format!(
            "profile comes from an N = {} family, constants from N = {}",
            profile.n_members, constants.n
        )));
    }
    if profile.eta != constants.eta {
        return Err(Error::ConfigMismatch(format!(
            "profile uses η = {}, constants use η = {}",
            profile.eta, constants.eta
        )));
    }

    let mut verdict = true;
    let mut empirical_moment = Vec::with_capacity(profile.moment_sums.len());
    for &(gamma, empirical) in &profile.moment_sums {
        let at_gamma = constants.with_gamma(gamma)?;
        let bound = at_gamma.moment_bound() * profile.x0_norm.powf(gamma);
        let ratio = empirical / bound;
        verdict &= empirical <= bound * (1.0 + VERDICT_SLACK);
        empirical_moment.push(MomentCheck {
            gamma,
            empirical,
            bound,
            ratio,
        });
    }

    let mut s_tau_pairs = Vec::with_capacity(profile.s_of_tau.len());
    for &(tau, empirical) in &profile.s_of_tau {
        let bound = constants.s_tau_bound(tau)?;
        verdict &= (empirical as f64) <= bound * (1.0 + VERDICT_SLACK);
        s_tau_pairs.push(STauCheck {
            tau,
            empirical,
            bound,
        });
    }

    let mut rearrangement_pairs = Vec::with_capacity(profile.sorted_deltas.len());
    for (n, &delta_star) in profile.sorted_deltas.iter().enumerate() {
        let bound = constants.rearrangement_bound(n);
        verdict &= delta_star <= bound * (1.0 + VERDICT_SLACK);
        rearrangement_pairs.push(RearrangementCheck {
            n,
            delta_star,
            bound,
        });
    }

    let s_at_one = profile.s_at(1.0);
    Ok(BoundReport {
        constants: constants.clone(),
        empirical_moment,
        s_tau_pairs,
        rearrangement_pairs,
        s_at_one,
        s_one_side_check: s_at_one <= 1,
        verdict,
        caveats: vec![
            "empirical sums and counts are over the finite recorded trajectory; \
             the un-recorded tail is below the stopping threshold and cannot \
             affect comparisons at the stated tolerances"
                .into(),
        ],
    })
}

/// The natural comparison grid {β*^k : k = 0 … K} with β*^K still above
/// `floor`, thinned to at most 64 points (endpoints always kept).
pub fn default_tau_grid(constants: &TheoreticalConstants, floor: f64) -> Vec<f64> {
    let floor = if floor > 0.0 && floor < 1.0 { floor } else { 1e-14 };
    // β*^K > floor  ⇔  K < ln floor / ln β*.
    let k_max_f = (floor.ln() / constants.ln_beta_star).ceil() - 1.0;
    let k_max = if k_max_f.is_finite() && k_max_f > 0.0 {
        (k_max_f as usize).max(1)
    } else {
        1
    };
    let stride = k_max / 63 + 1;
    let mut grid: Vec<f64> = (0..=k_max)
        .step_by(stride)
        .map(|k| (k as f64 * constants.ln_beta_star).exp())
        .collect();
    let last = (k_max as f64 * constants.ln_beta_star).exp();
    if *grid.last().expect("grid is nonempty") > last {
        grid.push(last);
    }
    grid
}

/// Verdict for one window of the segment-wise induction.
#[derive(Clone, Debug, Serialize)]
pub struct WindowCheck {
    /// First step of the window (inclusive).
    pub start: usize,
    /// Last step of the window (inclusive).
    pub end: usize,
    /// Number of distinct control indices used inside the window.
    pub ell: usize,
    /// Σ_{k=start}^{end} ‖x_{k+1}−x_k‖^γ.
    pub moment: f64,
    /// moment / (C_ℓ‖x_start‖^γ) — the P(ℓ) inequality normalized to ≤ 1.
    pub plain_ratio: f64,
    /// moment / (C_ℓ‖y_start‖^γ) for the translated trajectory (the sharper
    /// form the induction actually proves).
    pub translated_ratio: f64,
    pub passed: bool,
}

/// Outcome of [`segment_induction_test`] on one trajectory.
#[derive(Clone, Debug, Serialize)]
pub struct SegmentInductionReport {
    pub gamma: f64,
    pub windows_checked: usize,
    pub max_plain_ratio: f64,
    pub max_translated_ratio: f64,
    /// Property (i): y-displacements equal x-displacements.
    pub translation_displacements_ok: bool,
    /// Property (ii): y_{k+1} = P_{i_k, λ_k} y_k.
    pub translation_steps_ok: bool,
    /// Property (iii): y_k ⊥ V_{I_{p,q}}.
    pub translation_membership_ok: bool,
    /// ℓ = 1 base case: ‖y_k‖ ≤ (1−η)^{k−p}‖y_p‖ on constant-control windows.
    pub base_case_ok: bool,
    /// Windows whose P(ℓ) inequality failed its tolerance.
    pub failures: Vec<WindowCheck>,
    pub passed: bool,
}

fn window_family(record: &TrajectoryRecord) -> Vec<(usize, usize)> {
    let steps = record.steps;
    let mut change_points = vec![0usize];
    for n in 1..steps {
        if record.controls[n] != record.controls[n - 1] {
            change_points.push(n);
        }
    }
    let mut windows = Vec::new();
    // Constant-control stretches [c_j, c_{j+1}−1] — the induction base case.
    for (j, &c) in change_points.iter().enumerate() {
        let end = change_points.get(j + 1).map_or(steps, |&next| next) - 1;
        windows.push((c, end));
    }
    // Suffixes [c_j, steps−1] — the segmentation the induction recurses on.
    // Evenly thinned when change points are dense (e.g. cyclic control).
    let stride = change_points.len() / MAX_SUFFIX_WINDOWS + 1;
    for &c in change_points.iter().step_by(stride) {
        windows.push((c, steps - 1));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(WINDOW_SEED);
    for _ in 0..N_RANDOM_WINDOWS {
        let p = rng.random_range(0..steps);
        let q = rng.random_range(p..steps);
        windows.push((p, q));
    }
    windows.sort_unstable();
    windows.dedup();
    windows
}

/// Replays the segment-wise induction on a sampled family of windows: the
/// P(ℓ) moment inequality (plain and translated form) plus the three
/// structural properties of the translated trajectory y_k = x_k − P_{I_{p,q}}x_p.
///
/// The family contains every constant-control stretch, suffixes from control
/// change points (the full-range window [0, steps−1] always included), and
/// 100 seeded random windows.
pub fn segment_induction_test(
    record: &TrajectoryRecord,
    system: &SubspaceSystem,
    constants: &TheoreticalConstants,
) -> Result<SegmentInductionReport> {
    if record.n_members != system.len() {
        return Err(Error::ConfigMismatch(format!(
            "record was produced by a {}-member system, got {} members",
            record.n_members,
            system.len()
        )));
    }
    if record.n_members != constants.n || record.eta != constants.eta {
        return Err(Error::ConfigMismatch(
            "constants must be built with the record's N and η".into(),
        ));
    }
    let iterates = record.iterates.as_ref().ok_or_else(|| {
        Error::MissingData("segment induction test needs retained iterates".into())
    })?;
    if record.steps == 0 {
        return Err(Error::InvalidInput(
            "segment induction test needs at least one recorded step".into(),
        ));
    }

    let gamma = constants.gamma;
    let eta = constants.eta;
    let scale = record.x0_norm.max(TOL_ZERO);
    let mut report = SegmentInductionReport {
        gamma,
        windows_checked: 0,
        max_plain_ratio: 0.0,
        max_translated_ratio: 0.0,
        translation_displacements_ok: true,
        translation_steps_ok: true,
        translation_membership_ok: true,
        base_case_ok: true,
        failures: Vec::new(),
        passed: true,
    };

    for (p, q) in window_family(record) {
        let mut mask = 0u64;
        for k in p..=q {
            mask |= 1 << record.controls[k];
        }
        let ell = mask.count_ones() as usize;
        let c_ell = constants.c_seq[ell - 1];
        let moment = kahan_sum(
            record.displacement_norms[p..=q]
                .iter()
                .map(|d| d.powf(gamma)),
        );

        // Translated trajectory for this window.
        let v_i = system.intersection_mask(mask)?;
        let shift = v_i.project_raw(&iterates[p]);
        let ys: Vec<DVector<f64>> = iterates[p..=q + 1].iter().map(|x| x - &shift).collect();

        // Each recorded displacement is a difference of computed iterates and
        // so carries an absolute uncertainty of ~NOISE_REL·‖x_p‖.  A window
        // whose allowance sits below the accumulated noise is undecidable in
        // f64 — e.g. a λ = 1 stretch lands on the subspace exactly in real
        // arithmetic, while every float re-projection injects fresh noise of
        // precisely this size — so the allowance is floored at the noise.
        let noise = (q - p + 1) as f64 * (NOISE_REL * record.norms[p]).powf(gamma);
        let plain_allowance = c_ell * record.norms[p].powf(gamma) + noise;
        let translated_allowance = c_ell * ys[0].norm().powf(gamma) + noise;
        let plain_ratio = moment / plain_allowance.max(TINY);
        let translated_ratio = moment / translated_allowance.max(TINY);
        let plain_ok = moment <= plain_allowance * (1.0 + WINDOW_SLACK) + TINY;
        let translated_ok = moment <= translated_allowance * (1.0 + WINDOW_SLACK) + TINY;
        report.max_plain_ratio = report.max_plain_ratio.max(plain_ratio);
        report.max_translated_ratio = report.max_translated_ratio.max(translated_ratio);
        report.windows_checked += 1;
        if !(plain_ok && translated_ok) {
            report.failures.push(WindowCheck {
                start: p,
                end: q,
                ell,
                moment,
                plain_ratio,
                translated_ratio,
                passed: false,
            });
        }

        for (k, y) in ys.iter().enumerate() {
            // (iii) y_k ⊥ V_{I_{p,q}}.
            if v_i.project_raw(y).norm() > 1e-8 * scale {
                report.translation_membership_ok = false;
            }
            if k < ys.len() - 1 {
                // (i) the y-steps are the x-steps.
                let y_step = &ys[k + 1] - y;
                let x_step = &iterates[p + k + 1] - &iterates[p + k];
                if (y_step - x_step).norm() > 1e-12 * scale {
                    report.translation_displacements_ok = false;
                }
                // (ii) y evolves by the same relaxed projections.
                let replayed = system
                    .member(record.controls[p + k])?
                    .relaxed_project(record.relaxations[p + k], y)?;
                if (replayed - &ys[k + 1]).norm() > 1e-8 * scale {
                    report.translation_steps_ok = false;
                }
            }
            // Base case: one active member means y contracts by ≥ the band
            // margin every step (same noise floor as above: at η = 1 the
            // exact contraction factor is 0 while floats leave ulp residue).
            if ell == 1 {
                let allowed = (1.0 - eta).powi(k as i32) * ys[0].norm();
                if y.norm() > allowed * (1.0 + 1e-8) + NOISE_REL * record.norms[p] + TINY {
                    report.base_case_ok = false;
                }
            }
        }
    }

    report.passed = report.failures.is_empty()
        && report.translation_displacements_ok
        && report.translation_steps_ok
        && report.translation_membership_ok
        && report.base_case_ok;
    Ok(report)
}

/// One row of an ensemble summary (one trajectory).
#[derive(Clone, Debug, Serialize)]
pub struct TrajectorySummary {
    pub index: usize,
    pub seed: u64,
    pub policy: String,
    pub schedule: String,
    pub steps: usize,
    /// (γ, empirical moment / bound) pairs.
    #[serde(serialize_with = "serialize_pairs")]
    pub moment_ratios: Vec<(f64, f64)>,
    pub max_s_ratio: f64,
    pub max_rearrangement_ratio: f64,
    pub s_at_one: usize,
    pub verdict: bool,
}

/// Which trajectory came closest to an envelope, per criterion.
#[derive(Clone, Debug, Serialize)]
pub struct WorstCase {
    pub criterion: String,
    pub index: usize,
    pub ratio: f64,
}

/// Aggregated outcome of [`ensemble_sweep`].
#[derive(Clone, Debug, Serialize)]
pub struct EnsembleReport {
    pub n_trajectories: usize,
    pub constants: TheoreticalConstants,
    pub rows: Vec<TrajectorySummary>,
    /// (γ, max over trajectories of the moment ratio).
    #[serde(serialize_with = "serialize_pairs")]
    pub max_moment_ratio_per_gamma: Vec<(f64, f64)>,
    pub max_s_ratio: f64,
    pub max_rearrangement_ratio: f64,
    /// True iff every per-trajectory verdict held.
    pub all_verdicts_hold: bool,
    /// Closest approach per criterion (moment / s_tau / rearrangement).
    pub worst: Vec<WorstCase>,
    /// Full report for the trajectory with the largest ratio overall.
    pub worst_report: BoundReport,
    /// Its profile, for reproduction and plot data.
    pub worst_profile: DisplacementProfile,
    /// Seeds to replay the worst trajectory (x₀, policy, schedule).
    pub worst_seeds: (u64, u64, u64),
}

/// SplitMix64: derives decorrelated per-trajectory seeds from the sweep seed.
fn mix_seed(base: u64, index: u64, role: u64) -> u64 {
    let mut z = base
        .wrapping_add(index.wrapping_mul(0x9e37_79b9_7f4a_7c15))
        .wrapping_add(role.wrapping_mul(0xbf58_476d_1ce4_e5b9));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn reseed_policy(policy: &ControlPolicy, seed: u64) -> ControlPolicy {
    match policy {
        ControlPolicy::UniformRandom { seed: base } => ControlPolicy::UniformRandom {
            seed: base.wrapping_add(seed),
        },
        other => other.clone(),
    }
}

fn reseed_schedule(schedule: &RelaxationSchedule, seed: u64) -> Result<RelaxationSchedule> {
    use crate::dynamics::ScheduleKind;
    let kind = match schedule.kind() {
        ScheduleKind::UniformRandomInBand { seed: base } => ScheduleKind::UniformRandomInBand {
            seed: base.wrapping_add(seed),
        },
        other => other.clone(),
    };
    RelaxationSchedule::new(schedule.eta(), kind)
}

fn unit_gaussian(dim: usize, seed: u64) -> DVector<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let x = DVector::from_fn(dim, |_, _| rng.sample::<f64, _>(rand_distr::StandardNormal));
        let norm = x.norm();
        if norm > 1e-8 {
            return x / norm;
        }
    }
}

/// The exact (policy, schedule, x₀) triple that [`ensemble_sweep`] hands to
/// trajectory `index`, plus the (x₀, policy, schedule) seeds.  Pure function
/// of its arguments, so any member of a sweep — e.g. the worst case named in
/// the report — can be replayed offline, with iterates retained if desired.
pub fn sweep_member_inputs(
    policies: &[ControlPolicy],
    schedules: &[RelaxationSchedule],
    ambient_dim: usize,
    seed: u64,
    index: usize,
) -> Result<(ControlPolicy, RelaxationSchedule, DVector<f64>, (u64, u64, u64))> {
    if policies.is_empty() || schedules.is_empty() {
        return Err(Error::InvalidInput(
            "sweep members need at least one policy and one schedule".into(),
        ));
    }
    let seeds = (
        mix_seed(seed, index as u64, 1),
        mix_seed(seed, index as u64, 2),
        mix_seed(seed, index as u64, 3),
    );
    let policy = reseed_policy(&policies[index % policies.len()], seeds.1);
    let schedule = reseed_schedule(
        &schedules[(index / policies.len()) % schedules.len()],
        seeds.2,
    )?;
    let x0 = unit_gaussian(ambient_dim, seeds.0);
    Ok((policy, schedule, x0, seeds))
}

/// Runs `n_trajectories` seeded trajectories in parallel (policies and
/// schedules cycled over the given lists, unit-Gaussian starts), checks every
/// bound on each, and aggregates the maxima.  Identical inputs reproduce the
/// report bit for bit: per-trajectory seeds are pure functions of `seed` and
/// the index, and the parallel map preserves ordering.
#[allow(clippy::too_many_arguments)]
pub fn ensemble_sweep(
    system: &SubspaceSystem,
    policies: &[ControlPolicy],
    schedules: &[RelaxationSchedule],
    n_trajectories: usize,
    gammas: &[f64],
    taus: &[f64],
    stopping: &StoppingRule,
    seed: u64,
) -> Result<EnsembleReport> {
    if policies.is_empty() || schedules.is_empty() || n_trajectories == 0 {
        return Err(Error::InvalidInput(
            "an ensemble needs at least one policy, one schedule, and one trajectory".into(),
        ));
    }
    if gammas.is_empty() {
        return Err(Error::InvalidInput(
            "an ensemble needs at least one moment exponent γ".into(),
        ));
    }
    let eta = schedules[0].eta();
    if schedules.iter().any(|s| s.eta() != eta) {
        return Err(Error::ConfigMismatch(
            "all schedules in one sweep must share the band parameter η".into(),
        ));
    }

    let cert = regularity::kappa_star(system)?;
    let constants = constants_for_kappa(cert.kappa_star, system.len(), eta, gammas[0])?;
    let taus: Vec<f64> = if taus.is_empty() {
        default_tau_grid(&constants, stopping.stop_tol)
    } else {
        taus.to_vec()
    };

    let results: Vec<(TrajectorySummary, BoundReport, DisplacementProfile, (u64, u64, u64))> =
        (0..n_trajectories)
            .into_par_iter()
            .map(|t| -> Result<_> {
                let (policy, schedule, x0, seeds) =
                    sweep_member_inputs(policies, schedules, system.ambient_dim(), seed, t)?;
                let record = run_trajectory(system, &policy, &schedule, &x0, stopping, false)?;
                let prof = profile(&record, gammas, &taus)?;
                let rep = check_bounds(&prof, &constants)?;
                let moment_ratios: Vec<(f64, f64)> = rep
                    .empirical_moment
                    .iter()
                    .map(|m| (m.gamma, m.ratio))
                    .collect();
                let max_s_ratio = rep
                    .s_tau_pairs
                    .iter()
                    .map(|s| s.empirical as f64 / s.bound)
                    .fold(0.0_f64, f64::max);
                let max_rearrangement_ratio = rep
                    .rearrangement_pairs
                    .iter()
                    .map(|r| r.delta_star / r.bound)
                    .fold(0.0_f64, f64::max);
                let summary = TrajectorySummary {
                    index: t,
                    seed: seeds.0,
                    policy: policy.describe().to_string(),
                    schedule: schedule.describe().to_string(),
                    steps: record.steps,
                    moment_ratios,
                    max_s_ratio,
                    max_rearrangement_ratio,
                    s_at_one: rep.s_at_one,
                    verdict: rep.verdict,
                };
                Ok((summary, rep, prof, seeds))
            })
            .collect::<Result<_>>()?;

    let mut max_moment_ratio_per_gamma: Vec<(f64, f64)> =
        gammas.iter().map(|&g| (g, 0.0)).collect();
    let mut max_s_ratio = 0.0_f64;
    let mut max_rearrangement_ratio = 0.0_f64;
    let mut all_verdicts_hold = true;
    let mut worst_moment = (0usize, 0.0_f64);
    let mut worst_s = (0usize, 0.0_f64);
    let mut worst_rearr = (0usize, 0.0_f64);
    for (summary, _, _, _) in &results {
        for (slot, &(_, ratio)) in max_moment_ratio_per_gamma
            .iter_mut()
            .zip(&summary.moment_ratios)
        {
            slot.1 = slot.1.max(ratio);
            if ratio > worst_moment.1 {
                worst_moment = (summary.index, ratio);
            }
        }
        max_s_ratio = max_s_ratio.max(summary.max_s_ratio);
        if summary.max_s_ratio > worst_s.1 {
            worst_s = (summary.index, summary.max_s_ratio);
        }
        max_rearrangement_ratio = max_rearrangement_ratio.max(summary.max_rearrangement_ratio);
        if summary.max_rearrangement_ratio > worst_rearr.1 {
            worst_rearr = (summary.index, summary.max_rearrangement_ratio);
        }
        all_verdicts_hold &= summary.verdict;
    }
    // The overall worst trajectory: largest ratio across all three criteria.
    let overall = [worst_moment, worst_s, worst_rearr]
        .into_iter()
        .max_by(|a, b| a.1.partial_cmp(&b.1).expect("ratios are finite"))
        .expect("three candidates");
    let (_, worst_report, worst_profile, worst_seeds) = results[overall.0].clone();

    Ok(EnsembleReport {
        n_trajectories,
        constants,
        rows: results.into_iter().map(|(s, _, _, _)| s).collect(),
        max_moment_ratio_per_gamma,
        max_s_ratio,
        max_rearrangement_ratio,
        all_verdicts_hold,
        worst: vec![
            WorstCase {
                criterion: "moment".into(),
                index: worst_moment.0,
                ratio: worst_moment.1,
            },
            WorstCase {
                criterion: "s_tau".into(),
                index: worst_s.0,
                ratio: worst_s.1,
            },
            WorstCase {
                criterion: "rearrangement".into(),
                index: worst_rearr.0,
                ratio: worst_rearr.1,
            },
        ],
        worst_report,
        worst_profile,
        worst_seeds,
    })
}
