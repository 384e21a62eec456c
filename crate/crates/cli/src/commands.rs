//! The four subcommands behind the `projlab` binary.
//!
//! Each command loads a validated [`Scenario`](crate::scenario::Scenario),
//! does its work through the core crate, writes machine-readable artifacts
//! into the output directory, and prints a short human summary to stdout.
//! All floating-point text (CSV cells, printed constants) goes through the
//! standard shortest-roundtrip formatter, so identical inputs produce
//! byte-identical artifacts.
//!
//! Artifacts:
//!
//! * `report.json` — full structured results of the command;
//! * `summary.csv` — one row per trajectory (`simulate`, `sweep`);
//! * `s_tau.csv`, `rearrangement.csv` — envelope comparisons;
//! * `trajectory_0000.csv` — per-step dump (on request, or on violation).
//!
//! Member indices are 1-based in every artifact and printout.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use projlab_core::analysis::{
    self, BoundReport, DisplacementProfile, EnsembleReport, TrajectorySummary,
};
use projlab_core::bounds::{self, TheoreticalConstants};
use projlab_core::dynamics::{self, StoppingRule, TrajectoryRecord};
use projlab_core::regularity::{self, RegularityCertificate};
use projlab_core::subspace::{SubspaceSystem, TOL_ZERO};
use serde::Serialize;

use crate::scenario::{build_policy, build_schedule, PolicySpec, Scenario, ScheduleSpec};
use crate::{CliError, CliResult};

// ---------------------------------------------------------------------------
// Shared artifact plumbing
// ---------------------------------------------------------------------------

fn ensure_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Config(format!("cannot create {}: {e}", dir.display())))
}

fn write_text(dir: &Path, name: &str, text: &str) -> CliResult<PathBuf> {
    let path = dir.join(name);
    std::fs::write(&path, text)
        .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> CliResult<PathBuf> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Config(format!("cannot serialize {name}: {e}")))?;
    text.push('\n');
    write_text(dir, name, &text)
}

/// One `summary.csv` row; shared by `simulate` (one row) and `sweep`.
fn summary_csv(gammas: &[f64], rows: &[(f64, &TrajectorySummary)]) -> String {
    let mut out = String::from("eta,index,seed,policy,schedule,steps");
    for g in gammas {
        let _ = write!(out, ",moment_ratio_gamma_{g}");
    }
    out.push_str(",max_s_ratio,max_rearrangement_ratio,s_at_one,verdict\n");
    for (eta, row) in rows {
        let _ = write!(
            out,
            "{eta},{},{},{},{},{}",
            row.index, row.seed, row.policy, row.schedule, row.steps
        );
        for &(_, ratio) in &row.moment_ratios {
            let _ = write!(out, ",{ratio}");
        }
        let _ = writeln!(
            out,
            ",{},{},{},{}",
            row.max_s_ratio, row.max_rearrangement_ratio, row.s_at_one, row.verdict
        );
    }
    out
}

/// `s_tau.csv`: the S(τ) comparison of one report, tagged with its η.
fn s_tau_csv(rows: &[(f64, &BoundReport)]) -> String {
    let mut out = String::from("eta,tau,empirical,bound\n");
    for (eta, report) in rows {
        for pair in &report.s_tau_pairs {
            let _ = writeln!(out, "{eta},{},{},{}", pair.tau, pair.empirical, pair.bound);
        }
    }
    out
}

/// `rearrangement.csv`: ranked displacements against the decay envelope.
fn rearrangement_csv(rows: &[(f64, &BoundReport)]) -> String {
    let mut out = String::from("eta,n,delta_star,bound\n");
    for (eta, report) in rows {
        for pair in &report.rearrangement_pairs {
            let _ = writeln!(out, "{eta},{},{},{}", pair.n, pair.delta_star, pair.bound);
        }
    }
    out
}

/// `trajectory_0000.csv`: the per-step record, controls 1-based.
fn trajectory_csv(record: &TrajectoryRecord) -> String {
    let mut out = String::from("n,control,lambda,theta,norm,displacement\n");
    for n in 0..record.steps {
        let _ = writeln!(
            out,
            "{n},{},{},{},{},{}",
            record.controls[n] + 1,
            record.relaxations[n],
            record.per_step_theta[n],
            record.norms[n],
            record.displacement_norms[n]
        );
    }
    out
}

fn dims_of(system: &SubspaceSystem) -> Vec<usize> {
    system.members().iter().map(|m| m.dim()).collect()
}

fn print_family(system: &SubspaceSystem, quiet: bool) {
    if !quiet {
        println!(
            "family: N = {} subspace(s) of dimensions {:?} in R^{}",
            system.len(),
            dims_of(system),
            system.ambient_dim()
        );
    }
}

// ---------------------------------------------------------------------------
// angles
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct AnglesReport<'a> {
    ambient_dim: usize,
    member_dims: Vec<usize>,
    certificate: &'a RegularityCertificate,
}

/// Tabulates Friedrichs angles of all intersection pairs and the regularity
/// level κ*.
pub fn cmd_angles(scenario: &Scenario, out: &Path, quiet: bool) -> CliResult<()> {
    let system = scenario.build_system()?;
    let cert = regularity::kappa_star(&system)?;
    ensure_dir(out)?;
    let path = write_json(
        out,
        "report.json",
        &AnglesReport {
            ambient_dim: system.ambient_dim(),
            member_dims: dims_of(&system),
            certificate: &cert,
        },
    )?;
    print_family(&system, quiet);
    if !quiet {
        println!("kappa_star = {}", cert.kappa_star);
        println!(
            "min Friedrichs angle = {} rad ({} deg)",
            cert.min_phi,
            cert.min_phi.to_degrees()
        );
        println!(
            "worst pair: I = {:?}, J = {:?}",
            cert.worst_pair.0, cert.worst_pair.1
        );
        println!("innately regular: {}", cert.innately_regular);
        println!(
            "subset pairs tabulated: {}",
            cert.per_pair_angles.len()
        );
        println!("wrote {}", path.display());
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// constants
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct ConstantsReport<'a> {
    ambient_dim: usize,
    n_members: usize,
    eta: f64,
    kappa_star: f64,
    per_gamma: &'a [TheoreticalConstants],
}

/// Evaluates every theoretical constant of the family at each requested γ.
pub fn cmd_constants(scenario: &Scenario, out: &Path, quiet: bool) -> CliResult<()> {
    let system = scenario.build_system()?;
    let cert = regularity::kappa_star(&system)?;
    let per_gamma: Vec<TheoreticalConstants> = scenario
        .gammas
        .iter()
        .map(|&gamma| bounds::constants_for(&cert, system.len(), scenario.eta, gamma))
        .collect::<Result<_, _>>()?;
    ensure_dir(out)?;
    let path = write_json(
        out,
        "report.json",
        &ConstantsReport {
            ambient_dim: system.ambient_dim(),
            n_members: system.len(),
            eta: scenario.eta,
            kappa_star: cert.kappa_star,
            per_gamma: &per_gamma,
        },
    )?;
    print_family(&system, quiet);
    if !quiet {
        println!("kappa_star = {}", cert.kappa_star);
        println!("eta = {}", scenario.eta);
        for c in &per_gamma {
            println!("gamma = {}:", c.gamma);
            println!("  eps_star = {}", c.eps_star);
            println!("  beta_star = {}", c.beta_star);
            for (ell, value) in c.c_seq.iter().enumerate() {
                println!("  C_{} = {}", ell + 1, value);
            }
            println!("  closed_form = {}", c.c_closed);
            println!("  rho_star = {}", c.rho_star);
            println!("  c_star = {}", c.c_star);
        }
        println!("wrote {}", path.display());
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct RunSummary {
    ambient_dim: usize,
    n_members: usize,
    kappa_star: f64,
    eta: f64,
    policy: &'static str,
    schedule: &'static str,
    steps: usize,
    x0_norm: f64,
    final_norm: f64,
    /// Σ‖x_{n+1} − x_n‖ over the recorded run.
    path_length: f64,
}

#[derive(Serialize)]
struct SimulateReport<'a> {
    run: RunSummary,
    certificate: &'a RegularityCertificate,
    profile: &'a DisplacementProfile,
    bounds: &'a BoundReport,
}

#[derive(Serialize)]
struct DegenerateReport {
    degenerate: bool,
    reason: String,
    steps: usize,
}

/// Runs one trajectory and checks every displacement bound on it.
pub fn cmd_simulate(
    scenario: &Scenario,
    out: &Path,
    retain_iterates: bool,
    quiet: bool,
) -> CliResult<()> {
    let system = scenario.build_system()?;
    let policy = scenario.build_policy(system.len())?;
    let schedule = scenario.build_schedule()?;
    let x0 = scenario.build_x0(&system)?;
    let stopping = scenario.build_stopping();
    let record = dynamics::run_trajectory(&system, &policy, &schedule, &x0, &stopping, false)?;
    ensure_dir(out)?;

    if record.x0_norm <= TOL_ZERO {
        // The zero trajectory satisfies every bound trivially, but the
        // normalized displacements δ_n are undefined; report and succeed.
        let reason =
            "x0 = 0: the trajectory is identically zero and the normalized displacements \
             are undefined"
                .to_string();
        let path = write_json(
            out,
            "report.json",
            &DegenerateReport {
                degenerate: true,
                reason: reason.clone(),
                steps: record.steps,
            },
        )?;
        if !quiet {
            println!("degenerate run: {reason}");
            println!("wrote {}", path.display());
        }
        return Ok(());
    }

    let cert = regularity::kappa_star(&system)?;
    let constants = bounds::constants_for(&cert, system.len(), scenario.eta, scenario.gammas[0])?;
    let taus = scenario
        .taus
        .clone()
        .unwrap_or_else(|| analysis::default_tau_grid(&constants, stopping.stop_tol));
    let profile = analysis::profile(&record, &scenario.gammas, &taus)?;
    let report = analysis::check_bounds(&profile, &constants)?;
    let path_length = analysis::moment_sum(&record, 1.0)?;

    let run = RunSummary {
        ambient_dim: system.ambient_dim(),
        n_members: system.len(),
        kappa_star: cert.kappa_star,
        eta: scenario.eta,
        policy: policy.describe(),
        schedule: schedule.describe(),
        steps: record.steps,
        x0_norm: record.x0_norm,
        final_norm: *record.norms.last().expect("norms is never empty"),
        path_length,
    };
    let report_path = write_json(
        out,
        "report.json",
        &SimulateReport {
            run,
            certificate: &cert,
            profile: &profile,
            bounds: &report,
        },
    )?;

    let row = summarize_single(&record, &report, &policy, &schedule);
    write_text(
        out,
        "summary.csv",
        &summary_csv(&scenario.gammas, &[(scenario.eta, &row)]),
    )?;
    write_text(out, "s_tau.csv", &s_tau_csv(&[(scenario.eta, &report)]))?;
    write_text(
        out,
        "rearrangement.csv",
        &rearrangement_csv(&[(scenario.eta, &report)]),
    )?;
    // Per-step dump on request — and always on a violation, so the offending
    // run can be replayed without rerunning the command.
    if retain_iterates || scenario.full_verbosity() || !report.verdict {
        write_text(out, "trajectory_0000.csv", &trajectory_csv(&record))?;
    }

    print_family(&system, quiet);
    if !quiet {
        println!("kappa_star = {}", cert.kappa_star);
        println!(
            "steps = {} (policy {}, schedule {}, eta = {})",
            record.steps,
            policy.describe(),
            schedule.describe(),
            scenario.eta
        );
        println!("x0_norm = {}", record.x0_norm);
        println!("path_length = {path_length}");
        for m in &report.empirical_moment {
            println!(
                "gamma = {}: moment = {} <= bound = {} (ratio {})",
                m.gamma, m.empirical, m.bound, m.ratio
            );
        }
        println!("S(1) = {} (side check S(1) <= 1: {})", report.s_at_one, report.s_one_side_check);
        println!("verdict: {}", if report.verdict { "all bounds hold" } else { "VIOLATION" });
        println!("wrote {}", report_path.display());
    }

    if !report.verdict {
        return Err(CliError::Violation(format!(
            "an empirical quantity exceeded its envelope; see {} and trajectory_0000.csv",
            report_path.display()
        )));
    }
    Ok(())
}

/// Builds the one-row summary of a single run in the same shape the ensemble
/// sweep produces, so `summary.csv` has one schema everywhere.
fn summarize_single(
    record: &TrajectoryRecord,
    report: &BoundReport,
    policy: &dynamics::ControlPolicy,
    schedule: &dynamics::RelaxationSchedule,
) -> TrajectorySummary {
    let max_s_ratio = report
        .s_tau_pairs
        .iter()
        .map(|s| s.empirical as f64 / s.bound)
        .fold(0.0_f64, f64::max);
    let max_rearrangement_ratio = report
        .rearrangement_pairs
        .iter()
        .map(|r| r.delta_star / r.bound)
        .fold(0.0_f64, f64::max);
    TrajectorySummary {
        index: 0,
        seed: 0,
        policy: policy.describe().to_string(),
        schedule: schedule.describe().to_string(),
        steps: record.steps,
        moment_ratios: report
            .empirical_moment
            .iter()
            .map(|m| (m.gamma, m.ratio))
            .collect(),
        max_s_ratio,
        max_rearrangement_ratio,
        s_at_one: report.s_at_one,
        verdict: report.verdict,
    }
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct SweepSlice<'a> {
    eta: f64,
    seed: u64,
    report: &'a EnsembleReport,
}

#[derive(Serialize)]
struct SweepReport<'a> {
    ambient_dim: usize,
    n_members: usize,
    n_trajectories_per_eta: usize,
    etas: &'a [f64],
    sweeps: Vec<SweepSlice<'a>>,
}

/// Runs a seeded trajectory ensemble per band parameter η and aggregates the
/// bound-to-empirical ratios.
pub fn cmd_sweep(scenario: &Scenario, out: &Path, quiet: bool) -> CliResult<()> {
    let sweep = scenario
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Config("this command needs a [sweep] table".into()))?;
    let system = scenario.build_system()?;
    let etas: Vec<f64> = sweep.etas.clone().unwrap_or_else(|| vec![scenario.eta]);
    let policy_specs: Vec<PolicySpec> = match (&sweep.policies, &scenario.policy) {
        (Some(list), _) => list.clone(),
        (None, Some(single)) => vec![single.clone()],
        (None, None) => {
            return Err(CliError::Config(
                "sweep needs a [policy] table or a [sweep] policies list".into(),
            ))
        }
    };
    let schedule_specs: Vec<ScheduleSpec> = match (&sweep.schedules, &scenario.schedule) {
        (Some(list), _) => list.clone(),
        (None, Some(single)) => vec![single.clone()],
        (None, None) => {
            return Err(CliError::Config(
                "sweep needs a [schedule] table or a [sweep] schedules list".into(),
            ))
        }
    };
    let policies: Vec<dynamics::ControlPolicy> = policy_specs
        .iter()
        .map(|p| build_policy(p, system.len()))
        .collect::<CliResult<_>>()?;
    let stopping: StoppingRule = scenario.build_stopping();
    let taus = scenario.taus.clone().unwrap_or_default();

    let mut slices: Vec<(f64, u64, EnsembleReport)> = Vec::with_capacity(etas.len());
    for (k, &eta) in etas.iter().enumerate() {
        let schedules: Vec<dynamics::RelaxationSchedule> = schedule_specs
            .iter()
            .map(|s| build_schedule(s, eta))
            .collect::<CliResult<_>>()?;
        // Decorrelated per-η seeds; the sweep itself splitmixes per trajectory.
        let seed = sweep.seed.wrapping_add(k as u64);
        let report = analysis::ensemble_sweep(
            &system,
            &policies,
            &schedules,
            sweep.n_trajectories,
            &scenario.gammas,
            &taus,
            &stopping,
            seed,
        )?;
        slices.push((eta, seed, report));
    }

    ensure_dir(out)?;
    let report_path = write_json(
        out,
        "report.json",
        &SweepReport {
            ambient_dim: system.ambient_dim(),
            n_members: system.len(),
            n_trajectories_per_eta: sweep.n_trajectories,
            etas: &etas,
            sweeps: slices
                .iter()
                .map(|(eta, seed, report)| SweepSlice {
                    eta: *eta,
                    seed: *seed,
                    report,
                })
                .collect(),
        },
    )?;

    let summary_rows: Vec<(f64, &TrajectorySummary)> = slices
        .iter()
        .flat_map(|(eta, _, report)| report.rows.iter().map(move |row| (*eta, row)))
        .collect();
    write_text(out, "summary.csv", &summary_csv(&scenario.gammas, &summary_rows))?;
    let worst_rows: Vec<(f64, &BoundReport)> = slices
        .iter()
        .map(|(eta, _, report)| (*eta, &report.worst_report))
        .collect();
    write_text(out, "s_tau.csv", &s_tau_csv(&worst_rows))?;
    write_text(out, "rearrangement.csv", &rearrangement_csv(&worst_rows))?;

    print_family(&system, quiet);
    let mut all_hold = true;
    for (eta, _, report) in &slices {
        all_hold &= report.all_verdicts_hold;
        if !quiet {
            let moment_part: Vec<String> = report
                .max_moment_ratio_per_gamma
                .iter()
                .map(|(g, r)| format!("gamma {g}: {r}"))
                .collect();
            println!(
                "eta = {eta}: C_N = {}, max moment ratio [{}], max S ratio = {}, \
                 max rearrangement ratio = {}, verdicts hold: {}",
                report.constants.moment_bound(),
                moment_part.join(", "),
                report.max_s_ratio,
                report.max_rearrangement_ratio,
                report.all_verdicts_hold
            );
        }
    }
    if !quiet {
        println!(
            "{} trajectories total across {} eta value(s)",
            sweep.n_trajectories * etas.len(),
            etas.len()
        );
        println!("wrote {}", report_path.display());
    }

    if !all_hold {
        return Err(CliError::Violation(format!(
            "at least one trajectory exceeded an envelope; see {}",
            report_path.display()
        )));
    }
    Ok(())
}
