//! Scenario files: the single TOML document that pins a whole experiment.
//!
//! Every stochastic ingredient carries an explicit seed in the file, so a
//! scenario is a complete, reproducible description: rerunning any command
//! on the same file yields byte-identical artifacts.  Member indices are
//! 1-based in scenario files and in every emitted artifact, matching the
//! convention that a family is (V₁, …, V_N); conversion to 0-based indices
//! happens here and nowhere else.
//!
//! Top-level fields:
//!
//! ```toml
//! ambient_dim = 6
//! eta = 0.5
//! gammas = [0.5, 1.0, 2.0]
//! taus = [0.5, 0.25]            # optional; default: geometric β*-grid
//!
//! [system]                      # explicit | random | preset
//! kind = "random"
//! n_subspaces = 3
//! dims = [2, 3, 2]              # or a single integer for uniform dims
//! seed = 7
//!
//! [policy]                      # cyclic | uniform_random | greedy |
//! kind = "cyclic"               #   adversarial_gap | explicit
//!
//! [schedule]                    # constant | uniform_random |
//! kind = "constant"             #   alternating_extremes | explicit
//! value = 1.0
//!
//! [x0]                          # explicit | random | unit_on_subspace
//! kind = "random"
//! seed = 11
//!
//! [stopping]                    # optional; defaults shown
//! max_steps = 100000
//! stop_tol = 1e-14
//! stall_window = 50
//!
//! [sweep]                       # consumed by the sweep subcommand only
//! n_trajectories = 200
//! seed = 99
//! etas = [0.3, 1.0]             # optional; default [eta]
//!
//! [outputs]                     # optional
//! dir = "projlab_out"
//! verbosity = "summary"         # or "full" (writes per-step trajectory CSV)
//! ```

use nalgebra::DVector;
use projlab_core::dynamics::{
    ControlPolicy, RelaxationSchedule, ScheduleKind, StoppingRule, DEFAULT_MAX_STEPS,
    DEFAULT_STALL_WINDOW, DEFAULT_STOP_TOL,
};
use projlab_core::subspace::{Subspace, SubspaceSystem};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Deserialize;
use std::path::Path;

use crate::{CliError, CliResult};

/// Fixed internal seed of the `generic_triple` preset (three Gaussian
/// subspaces of dimension ⌊d/2⌋ ∨ 1 in generic position).
const GENERIC_TRIPLE_SEED: u64 = 1729;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub ambient_dim: usize,
    pub eta: f64,
    pub gammas: Vec<f64>,
    #[serde(default)]
    pub taus: Option<Vec<f64>>,
    pub system: SystemSpec,
    #[serde(default)]
    pub policy: Option<PolicySpec>,
    #[serde(default)]
    pub schedule: Option<ScheduleSpec>,
    #[serde(default)]
    pub x0: Option<X0Spec>,
    #[serde(default)]
    pub stopping: Option<StoppingSpec>,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
    #[serde(default)]
    pub outputs: Option<OutputsSpec>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SystemSpec {
    /// One spanning set per member; vectors are rows of `ambient_dim` reals.
    Explicit { bases: Vec<Vec<Vec<f64>>> },
    /// Seeded Gaussian spanning sets, orthonormalized.
    Random { n_subspaces: usize, dims: Dims, seed: u64 },
    /// A named reference family.
    Preset {
        name: PresetName,
        /// Angle of the `two_lines` preset (radians); ignored otherwise.
        #[serde(default)]
        angle: Option<f64>,
    },
}

/// Subspace dimensions: one value for all members, or one per member.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum Dims {
    Uniform(usize),
    PerMember(Vec<usize>),
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PresetName {
    /// span{e₁} and span{cos θ·e₁ + sin θ·e₂} (d ≥ 2; θ from `angle`).
    TwoLines,
    /// The three coordinate planes span{e₁,e₂}, span{e₁,e₃}, span{e₂,e₃}
    /// (d ≥ 3).
    CoordinatePlanes,
    /// Three seeded Gaussian subspaces of dimension ⌊d/2⌋ ∨ 1 in generic
    /// position (d ≥ 2).
    GenericTriple,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PolicySpec {
    Cyclic,
    UniformRandom { seed: u64 },
    Greedy,
    /// Repeating blocks of (member, repeats); members are 1-based.
    AdversarialGap { pattern: Vec<GapBlock> },
    /// A finite 1-based control sequence; the run stops when it ends.
    Explicit { sequence: Vec<usize> },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GapBlock {
    pub member: usize,
    pub repeats: usize,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScheduleSpec {
    Constant { value: f64 },
    UniformRandom { seed: u64 },
    AlternatingExtremes,
    Explicit { values: Vec<f64> },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum X0Spec {
    Explicit { values: Vec<f64> },
    /// Unit Gaussian direction from the seed.
    Random { seed: u64 },
    /// First basis vector of member i (1-based).
    UnitOnSubspace { index: usize },
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StoppingSpec {
    pub max_steps: Option<usize>,
    pub stop_tol: Option<f64>,
    pub stall_window: Option<usize>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub n_trajectories: usize,
    pub seed: u64,
    /// Band parameters to sweep; default: the scenario's single `eta`.
    #[serde(default)]
    pub etas: Option<Vec<f64>>,
    /// Policy mix; default: the scenario's `[policy]`.
    #[serde(default)]
    pub policies: Option<Vec<PolicySpec>>,
    /// Schedule mix; default: the scenario's `[schedule]`.
    #[serde(default)]
    pub schedules: Option<Vec<ScheduleSpec>>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputsSpec {
    pub dir: Option<String>,
    pub verbosity: Option<Verbosity>,
}

#[derive(Clone, Copy, Debug, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Verbosity {
    #[default]
    Summary,
    /// Additionally emit the per-step trajectory CSV.
    Full,
}

impl Scenario {
    /// Parses and validates a scenario file.
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let scenario: Scenario = toml::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        scenario.validate()?;
        Ok(scenario)
    }

    fn validate(&self) -> CliResult<()> {
        if self.ambient_dim == 0 {
            return Err(CliError::Config("ambient_dim must be positive".into()));
        }
        if self.gammas.is_empty() || self.gammas.iter().any(|&g| !(g > 0.0) || !g.is_finite()) {
            return Err(CliError::Config(
                "gammas must be a nonempty list of positive reals".into(),
            ));
        }
        if let Some(taus) = &self.taus {
            if taus.iter().any(|&t| !(t > 0.0 && t <= 1.0)) {
                return Err(CliError::Config("taus must lie in (0, 1]".into()));
            }
        }
        Ok(())
    }

    /// Replaces every seed in the file with `seed` (systems, policies,
    /// schedules, x₀, sweep), for quick reruns under a different randomness.
    pub fn override_seeds(&mut self, seed: u64) {
        if let SystemSpec::Random { seed: s, .. } = &mut self.system {
            *s = seed;
        }
        let reseed_policy = |p: &mut PolicySpec| {
            if let PolicySpec::UniformRandom { seed: s } = p {
                *s = seed;
            }
        };
        let reseed_schedule = |p: &mut ScheduleSpec| {
            if let ScheduleSpec::UniformRandom { seed: s } = p {
                *s = seed;
            }
        };
        if let Some(p) = &mut self.policy {
            reseed_policy(p);
        }
        if let Some(s) = &mut self.schedule {
            reseed_schedule(s);
        }
        if let Some(X0Spec::Random { seed: s }) = &mut self.x0 {
            *s = seed;
        }
        if let Some(sweep) = &mut self.sweep {
            sweep.seed = seed;
            if let Some(ps) = &mut sweep.policies {
                ps.iter_mut().for_each(reseed_policy);
            }
            if let Some(ss) = &mut sweep.schedules {
                ss.iter_mut().for_each(reseed_schedule);
            }
        }
    }

    /// The subspace family this scenario describes.
    pub fn build_system(&self) -> CliResult<SubspaceSystem> {
        build_system(&self.system, self.ambient_dim)
    }

    /// The control policy (0-based), validated against `n_members`.
    pub fn build_policy(&self, n_members: usize) -> CliResult<ControlPolicy> {
        let spec = self
            .policy
            .as_ref()
            .ok_or_else(|| CliError::Config("this command needs a [policy] table".into()))?;
        build_policy(spec, n_members)
    }

    /// The relaxation schedule at the scenario's η.
    pub fn build_schedule(&self) -> CliResult<RelaxationSchedule> {
        let spec = self
            .schedule
            .as_ref()
            .ok_or_else(|| CliError::Config("this command needs a [schedule] table".into()))?;
        build_schedule(spec, self.eta)
    }

    /// The initial point (requires the system for `unit_on_subspace`).
    pub fn build_x0(&self, system: &SubspaceSystem) -> CliResult<DVector<f64>> {
        let spec = self
            .x0
            .as_ref()
            .ok_or_else(|| CliError::Config("this command needs an [x0] table".into()))?;
        let d = self.ambient_dim;
        match spec {
            X0Spec::Explicit { values } => {
                if values.len() != d {
                    return Err(CliError::Config(format!(
                        "x0 has {} entries but ambient_dim = {d}",
                        values.len()
                    )));
                }
                Ok(DVector::from_vec(values.clone()))
            }
            X0Spec::Random { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                loop {
                    let x = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
                    let n = x.norm();
                    if n > 1e-8 {
                        return Ok(x / n);
                    }
                }
            }
            X0Spec::UnitOnSubspace { index } => {
                let i = one_based(*index, system.len(), "x0.index")?;
                let member = system.member(i).map_err(CliError::from)?;
                if member.dim() == 0 {
                    return Err(CliError::Config(format!(
                        "member {index} is the zero subspace; it has no unit vector"
                    )));
                }
                Ok(member.basis().column(0).into_owned())
            }
        }
    }

    /// The stopping rule (defaults where the file is silent).
    pub fn build_stopping(&self) -> StoppingRule {
        let spec = self.stopping.clone().unwrap_or_default();
        StoppingRule {
            max_steps: spec.max_steps.unwrap_or(DEFAULT_MAX_STEPS),
            stop_tol: spec.stop_tol.unwrap_or(DEFAULT_STOP_TOL),
            stall_window: spec.stall_window.unwrap_or(DEFAULT_STALL_WINDOW),
        }
    }

    /// Output directory: `--out` wins, then `[outputs] dir`, then a default.
    pub fn out_dir(&self, flag: Option<&Path>) -> std::path::PathBuf {
        if let Some(p) = flag {
            return p.to_path_buf();
        }
        self.outputs
            .as_ref()
            .and_then(|o| o.dir.as_deref())
            .unwrap_or("projlab_out")
            .into()
    }

    /// Whether per-step trajectory CSVs were requested in the file.
    pub fn full_verbosity(&self) -> bool {
        self.outputs
            .as_ref()
            .and_then(|o| o.verbosity)
            .unwrap_or_default()
            == Verbosity::Full
    }
}

fn one_based(index: usize, n_members: usize, what: &str) -> CliResult<usize> {
    if index == 0 || index > n_members {
        return Err(CliError::Config(format!(
            "{what} = {index} outside the member range 1..={n_members}"
        )));
    }
    Ok(index - 1)
}

/// Builds the family described by a system spec inside ℝ^`ambient_dim`.
pub fn build_system(spec: &SystemSpec, ambient_dim: usize) -> CliResult<SubspaceSystem> {
    let d = ambient_dim;
    let members = match spec {
        SystemSpec::Explicit { bases } => {
            let mut members = Vec::with_capacity(bases.len());
            for (i, vectors) in bases.iter().enumerate() {
                let cols: Vec<DVector<f64>> = vectors
                    .iter()
                    .map(|v| {
                        if v.len() != d {
                            return Err(CliError::Config(format!(
                                "member {}: spanning vector of length {} in ℝ^{d}",
                                i + 1,
                                v.len()
                            )));
                        }
                        Ok(DVector::from_vec(v.clone()))
                    })
                    .collect::<CliResult<_>>()?;
                members.push(Subspace::from_span(&cols, d).map_err(CliError::from)?);
            }
            members
        }
        SystemSpec::Random { n_subspaces, dims, seed } => {
            let dims: Vec<usize> = match dims {
                Dims::Uniform(k) => vec![*k; *n_subspaces],
                Dims::PerMember(list) => {
                    if list.len() != *n_subspaces {
                        return Err(CliError::Config(format!(
                            "dims lists {} entries for {n_subspaces} subspaces",
                            list.len()
                        )));
                    }
                    list.clone()
                }
            };
            if dims.iter().any(|&k| k == 0 || k > d) {
                return Err(CliError::Config(format!(
                    "subspace dimensions must lie in 1..={d}"
                )));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            dims.iter()
                .map(|&k| gaussian_subspace(&mut rng, d, k))
                .collect::<CliResult<_>>()?
        }
        SystemSpec::Preset { name, angle } => match name {
            PresetName::TwoLines => {
                if d < 2 {
                    return Err(CliError::Config("two_lines needs ambient_dim ≥ 2".into()));
                }
                let theta = angle.unwrap_or(std::f64::consts::FRAC_PI_6);
                if !(theta > 0.0 && theta <= std::f64::consts::FRAC_PI_2) {
                    return Err(CliError::Config(format!(
                        "two_lines angle {theta} outside (0, π/2]"
                    )));
                }
                let mut a = DVector::zeros(d);
                a[0] = 1.0;
                let mut b = DVector::zeros(d);
                b[0] = theta.cos();
                b[1] = theta.sin();
                vec![
                    Subspace::from_span(&[a], d).map_err(CliError::from)?,
                    Subspace::from_span(&[b], d).map_err(CliError::from)?,
                ]
            }
            PresetName::CoordinatePlanes => {
                if d < 3 {
                    return Err(CliError::Config(
                        "coordinate_planes needs ambient_dim ≥ 3".into(),
                    ));
                }
                let e = |i: usize| {
                    let mut v = DVector::zeros(d);
                    v[i] = 1.0;
                    v
                };
                vec![
                    Subspace::from_span(&[e(0), e(1)], d).map_err(CliError::from)?,
                    Subspace::from_span(&[e(0), e(2)], d).map_err(CliError::from)?,
                    Subspace::from_span(&[e(1), e(2)], d).map_err(CliError::from)?,
                ]
            }
            PresetName::GenericTriple => {
                if d < 2 {
                    return Err(CliError::Config(
                        "generic_triple needs ambient_dim ≥ 2".into(),
                    ));
                }
                let k = (d / 2).max(1);
                let mut rng = ChaCha8Rng::seed_from_u64(GENERIC_TRIPLE_SEED);
                (0..3)
                    .map(|_| gaussian_subspace(&mut rng, d, k))
                    .collect::<CliResult<_>>()?
            }
        },
    };
    SubspaceSystem::new(members).map_err(CliError::from)
}

fn gaussian_subspace(rng: &mut ChaCha8Rng, d: usize, k: usize) -> CliResult<Subspace> {
    let cols: Vec<DVector<f64>> = (0..k)
        .map(|_| DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal)))
        .collect();
    let s = Subspace::from_span(&cols, d).map_err(CliError::from)?;
    if s.dim() != k {
        return Err(CliError::Config(format!(
            "seeded spanning set degenerated to dimension {} (wanted {k})",
            s.dim()
        )));
    }
    Ok(s)
}

/// Converts a policy spec (1-based members) into the 0-based core policy.
pub fn build_policy(spec: &PolicySpec, n_members: usize) -> CliResult<ControlPolicy> {
    let policy = match spec {
        PolicySpec::Cyclic => ControlPolicy::Cyclic,
        PolicySpec::UniformRandom { seed } => ControlPolicy::UniformRandom { seed: *seed },
        PolicySpec::Greedy => ControlPolicy::Greedy,
        PolicySpec::AdversarialGap { pattern } => ControlPolicy::AdversarialGap {
            pattern: pattern
                .iter()
                .map(|b| Ok((one_based(b.member, n_members, "pattern member")?, b.repeats)))
                .collect::<CliResult<_>>()?,
        },
        PolicySpec::Explicit { sequence } => ControlPolicy::Explicit {
            sequence: sequence
                .iter()
                .map(|&i| one_based(i, n_members, "control"))
                .collect::<CliResult<_>>()?,
        },
    };
    policy.validate(n_members).map_err(CliError::from)?;
    Ok(policy)
}

/// Builds a schedule spec at a given band parameter η.
pub fn build_schedule(spec: &ScheduleSpec, eta: f64) -> CliResult<RelaxationSchedule> {
    let kind = match spec {
        ScheduleSpec::Constant { value } => ScheduleKind::Constant(*value),
        ScheduleSpec::UniformRandom { seed } => ScheduleKind::UniformRandomInBand { seed: *seed },
        ScheduleSpec::AlternatingExtremes => ScheduleKind::AlternatingExtremes,
        ScheduleSpec::Explicit { values } => ScheduleKind::Explicit(values.clone()),
    };
    RelaxationSchedule::new(eta, kind).map_err(CliError::from)
}

#[cfg(test)]
mod tests {
    use super::*;

    const FULL: &str = r#"
ambient_dim = 4
eta = 0.5
gammas = [1.0, 2.0]

[system]
kind = "random"
n_subspaces = 3
dims = [1, 2, 2]
seed = 9

[policy]
kind = "adversarial_gap"
pattern = [{ member = 1, repeats = 5 }, { member = 3, repeats = 1 }]

[schedule]
kind = "uniform_random"
seed = 10

[x0]
kind = "unit_on_subspace"
index = 2

[sweep]
n_trajectories = 4
seed = 11
policies = [{ kind = "uniform_random", seed = 12 }]
"#;

    fn parse(text: &str) -> Scenario {
        let s: Scenario = toml::from_str(text).expect("parses");
        s
    }

    #[test]
    fn full_scenario_builds_every_component() {
        let s = parse(FULL);
        let system = s.build_system().unwrap();
        assert_eq!(system.len(), 3);
        assert_eq!(system.ambient_dim(), 4);
        assert_eq!(system.member(1).unwrap().dim(), 2);

        // 1-based file indices become 0-based policy indices.
        let policy = s.build_policy(system.len()).unwrap();
        assert_eq!(
            policy,
            ControlPolicy::AdversarialGap {
                pattern: vec![(0, 5), (2, 1)]
            }
        );

        let schedule = s.build_schedule().unwrap();
        assert_eq!(schedule.eta(), 0.5);

        // unit_on_subspace(2) = first basis vector of the second member.
        let x0 = s.build_x0(&system).unwrap();
        let member = system.member(1).unwrap();
        assert!((member.basis().column(0) - &x0).norm() < 1e-15);

        let stopping = s.build_stopping();
        assert_eq!(stopping.max_steps, DEFAULT_MAX_STEPS);
    }

    #[test]
    fn out_of_range_member_indices_are_config_errors() {
        let mut s = parse(FULL);
        s.policy = Some(PolicySpec::Explicit {
            sequence: vec![1, 4],
        });
        assert!(matches!(s.build_policy(3), Err(CliError::Config(_))));
        s.policy = Some(PolicySpec::Explicit { sequence: vec![0] });
        assert!(matches!(s.build_policy(3), Err(CliError::Config(_))));
        s.x0 = Some(X0Spec::UnitOnSubspace { index: 4 });
        let system = s.build_system().unwrap();
        assert!(matches!(s.build_x0(&system), Err(CliError::Config(_))));
    }

    #[test]
    fn seed_override_reaches_every_seed_field() {
        let mut s = parse(FULL);
        s.override_seeds(777);
        assert!(matches!(s.system, SystemSpec::Random { seed: 777, .. }));
        assert!(matches!(s.schedule, Some(ScheduleSpec::UniformRandom { seed: 777 })));
        let sweep = s.sweep.as_ref().unwrap();
        assert_eq!(sweep.seed, 777);
        assert!(matches!(
            sweep.policies.as_deref(),
            Some([PolicySpec::UniformRandom { seed: 777 }])
        ));
    }

    #[test]
    fn dims_accept_scalar_and_validate_length() {
        let mut s = parse(FULL);
        s.system = SystemSpec::Random {
            n_subspaces: 2,
            dims: Dims::Uniform(3),
            seed: 1,
        };
        let system = s.build_system().unwrap();
        assert_eq!(system.members().iter().map(Subspace::dim).sum::<usize>(), 6);

        s.system = SystemSpec::Random {
            n_subspaces: 2,
            dims: Dims::PerMember(vec![1, 2, 3]),
            seed: 1,
        };
        assert!(matches!(s.build_system(), Err(CliError::Config(_))));
    }

    #[test]
    fn presets_have_the_documented_shapes() {
        let two = build_system(
            &SystemSpec::Preset {
                name: PresetName::TwoLines,
                angle: Some(std::f64::consts::FRAC_PI_4),
            },
            5,
        )
        .unwrap();
        assert_eq!(two.len(), 2);
        assert!(two.members().iter().all(|m| m.dim() == 1));

        let planes = build_system(
            &SystemSpec::Preset {
                name: PresetName::CoordinatePlanes,
                angle: None,
            },
            3,
        )
        .unwrap();
        assert_eq!(planes.len(), 3);
        assert!(planes.members().iter().all(|m| m.dim() == 2));

        let triple = build_system(
            &SystemSpec::Preset {
                name: PresetName::GenericTriple,
                angle: None,
            },
            6,
        )
        .unwrap();
        assert_eq!(triple.len(), 3);
        assert!(triple.members().iter().all(|m| m.dim() == 3));

        // Presets validate their ambient-dimension floor.
        assert!(build_system(
            &SystemSpec::Preset {
                name: PresetName::CoordinatePlanes,
                angle: None
            },
            2
        )
        .is_err());
    }
}
