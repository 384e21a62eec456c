//! Angles between subspaces and regularity constants of subspace families.
//!
//! The central quantity is the Friedrichs angle φ(V, W) ∈ (0, π/2], defined
//! via the principal angles of the pair after the common intersection has
//! been deflated away; nested pairs (including V = W) take φ = π/2 by
//! convention.  From it we form the pairwise constant κ(V, W) = 2/sin φ(V, W)
//! and the family constant
//!
//! ```text
//!     κ* = max over all subset pairs (I, J) ⊆ [N], including ∅,
//!          of κ(V_I, V_J),            V_I := ⋂_{i∈I} V_i,  V_∅ := ℝᵈ,
//! ```
//!
//! which always satisfies 2 ≤ κ* < ∞ in finite dimensions.  A variational
//! oracle computes sin φ independently as inf { d(x,V) + d(x,W) } over unit
//! vectors x ⊥ V ∩ W, so the two routes can be cross-validated, and a
//! sampling routine estimates regularity constants of subcollections
//! empirically.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::subspace::{Subspace, SubspaceSystem, TOL_INTERSECT, TOL_ORTHO};

/// Default number of random restarts for [`sin_friedrichs_oracle`].
pub const DEFAULT_ORACLE_RESTARTS: usize = 32;
/// Default cap on family size for the exhaustive κ* enumeration.
pub const DEFAULT_MAX_MEMBERS: usize = 10;
/// Fixed seed of the oracle's internal restart generator (the oracle is a
/// deterministic function of its arguments).
const ORACLE_SEED: u64 = 0x00c0_ffee_5eed_0001;

/// The Friedrichs angle of a pair of subspaces together with derived data.
#[derive(Clone, Debug, Serialize)]
pub struct AngleReport {
    /// Friedrichs angle φ ∈ [0, π/2] in radians (π/2 for nested pairs).
    pub phi: f64,
    /// cos φ ∈ [0, 1).
    pub cos_phi: f64,
    /// sin φ ∈ (0, 1].
    pub sin_phi: f64,
    /// Dimension of V ∩ W that was deflated before measuring the angle.
    pub intersection_dim: usize,
    /// κ(V, W) = 2/sin φ ≥ 2, always finite.
    pub kappa_pair: f64,
}

/// Angle data of one subset pair inside a [`RegularityCertificate`].
///
/// Member indices in `I`/`J` are 1-based and sorted, matching the
/// mathematical convention [N] = {1, …, N} used in all emitted artifacts.
#[derive(Clone, Debug, Serialize)]
pub struct PairAngles {
    #[serde(rename = "I")]
    pub set_i: Vec<usize>,
    #[serde(rename = "J")]
    pub set_j: Vec<usize>,
    pub phi: f64,
    #[serde(rename = "kappa")]
    pub kappa_pair: f64,
    pub cos_phi: f64,
    pub sin_phi: f64,
    pub intersection_dim: usize,
}

/// The exhaustive regularity certificate of a family: κ* with the full table
/// of subset-pair angles behind it.
#[derive(Clone, Debug, Serialize)]
pub struct RegularityCertificate {
    pub n_members: usize,
    pub ambient_dim: usize,
    /// κ* = max κ(V_I, V_J) ≥ 2 over all subset pairs, including ∅.
    pub kappa_star: f64,
    /// First subset pair (in mask order) attaining κ*; 1-based indices.
    pub worst_pair: (Vec<usize>, Vec<usize>),
    /// Smallest Friedrichs angle found over all pairs.
    pub min_phi: f64,
    /// Every unordered subset pair with its angle data.
    #[serde(rename = "table")]
    pub per_pair_angles: Vec<PairAngles>,
    /// All pairs have φ > 0; always true in finite dimensions, recorded
    /// together with `min_phi` as evidence.
    pub innately_regular: bool,
}

/// Principal angles between two subspaces, sorted ascending.
///
/// These are arccos of the singular values of Q_VᵀQ_W (clamped to [0, 1]);
/// the list has length min(dim V, dim W), and is empty when either input is
/// the zero subspace.
pub fn principal_angles(v: &Subspace, w: &Subspace) -> Result<Vec<f64>> {
    if v.ambient_dim() != w.ambient_dim() {
        return Err(Error::InvalidInput(format!(
            "ambient dimensions differ: {} vs {}",
            v.ambient_dim(),
            w.ambient_dim()
        )));
    }
    if v.dim() == 0 || w.dim() == 0 {
        return Ok(Vec::new());
    }
    let product = v.basis().tr_mul(w.basis());
    let sigma = linalg::singular_values(&product);
    // Singular values are sorted descending, so arccos comes out ascending.
    Ok(sigma.iter().map(|s| s.clamp(0.0, 1.0).acos()).collect())
}

/// Absolute singular-value floor for deflation residuals.  Deflated bases are
/// orthonormal, so a residual singular value measures genuine remaining mass
/// on the unit scale: in-span deflation leaves ~1e-15 noise, intersection
/// bases are accurate to ~1e-10, and directions this close to a removed one
/// sit deep inside the cos ≥ 1 − [`TOL_INTERSECT`] ambiguity band anyway.
const TOL_DEFLATE: f64 = 1e-6;

/// Removes the component of every basis vector of `s` along `x` and returns
/// the span of what is left: s ⊖ x = s ∩ x^⊥ when x ⊆ s.
///
/// Uses the absolute [`TOL_DEFLATE`] floor so a residual consisting of pure
/// deflation noise collapses to {0} instead of being renormalized into a
/// spurious direction (which would stall the angle iteration).
fn deflate(s: &Subspace, x: &Subspace) -> Result<Subspace> {
    if x.dim() == 0 {
        return Ok(s.clone());
    }
    let residual = s.basis() - x.basis() * x.basis().tr_mul(s.basis());
    Subspace::from_columns_with_floor(&residual, TOL_DEFLATE)
}

/// The Friedrichs angle φ(V, W) with the nested convention φ = π/2.
///
/// The common intersection is deflated first (a principal direction counts as
/// shared when its cosine is ≥ 1 − `TOL_INTERSECT`, and the deflation repeats
/// until no such direction remains), then cos φ is the largest remaining
/// principal cosine.  The repeat guarantees cos φ < 1, hence κ(V, W) < ∞:
/// pairs whose genuine angle is below ≈ √(2·TOL_INTERSECT) are reported as
/// nested — an intrinsic discontinuity of the problem, resolved here in the
/// direction that keeps every certificate finite.
pub fn friedrichs_angle(v: &Subspace, w: &Subspace) -> Result<AngleReport> {
    if v.ambient_dim() != w.ambient_dim() {
        return Err(Error::InvalidInput(format!(
            "ambient dimensions differ: {} vs {}",
            v.ambient_dim(),
            w.ambient_dim()
        )));
    }
    let x = v.intersect(w)?;
    let mut intersection_dim = x.dim();
    let mut v_res = deflate(v, &x)?;
    let mut w_res = deflate(w, &x)?;

    loop {
        if v_res.dim() == 0 || w_res.dim() == 0 {
            // Nested (or equal) pair, including zero-subspace inputs.
            return Ok(AngleReport {
                phi: std::f64::consts::FRAC_PI_2,
                cos_phi: 0.0,
                sin_phi: 1.0,
                intersection_dim,
                kappa_pair: 2.0,
            });
        }
        let product = v_res.basis().tr_mul(w_res.basis());
        let svd = linalg::thin_svd(&product);
        let cos_max = svd.sigma[0].clamp(0.0, 1.0);
        if cos_max < 1.0 - TOL_INTERSECT {
            let sin_phi = ((1.0 - cos_max) * (1.0 + cos_max)).sqrt();
            let phi = cos_max.acos();
            return Ok(AngleReport {
                phi,
                cos_phi: cos_max,
                sin_phi,
                intersection_dim,
                kappa_pair: 2.0 / sin_phi,
            });
        }
        // A direction pair inside the ambiguity band cos ∈ (1 − tol, 1]
        // survived the bulk deflation (clustered singular values, or an
        // inexactly resolved intersection).  Treat it as shared: peel the top
        // principal direction off each side.  Those directions lie exactly in
        // the respective spans, so both dimensions strictly decrease and the
        // iteration terminates within d rounds.
        let dir_v = v_res.basis() * svd.u.column(0).into_owned();
        let dir_w = w_res.basis() * svd.v.column(0).into_owned();
        let shared_v = Subspace::from_span(&[dir_v], v.ambient_dim())?;
        let shared_w = Subspace::from_span(&[dir_w], v.ambient_dim())?;
        intersection_dim += 1;
        v_res = deflate(&v_res, &shared_v)?;
        w_res = deflate(&w_res, &shared_w)?;
    }
}

/// Variational oracle for sin φ(V, W):
///
/// ```text
///     sin φ(V, W) = inf { d(x, V) + d(x, W) : x ∈ (V ∩ W)^⊥, ‖x‖ = 1 },
/// ```
///
/// valid for distinct subspaces.  The infimum is located by multi-start
/// projected gradient descent on the unit sphere of (V ∩ W)^⊥ with Armijo
/// backtracking (gradient tolerance 1e-10); `n_restarts` random starts are
/// drawn from a fixed internal seed, so the oracle is deterministic.  This is
/// an independent route to the Friedrichs sine and is used to cross-validate
/// [`friedrichs_angle`].
pub fn sin_friedrichs_oracle(v: &Subspace, w: &Subspace, n_restarts: usize) -> Result<f64> {
    if v.ambient_dim() != w.ambient_dim() {
        return Err(Error::InvalidInput(format!(
            "ambient dimensions differ: {} vs {}",
            v.ambient_dim(),
            w.ambient_dim()
        )));
    }
    if v.same_span(w, TOL_ORTHO) {
        return Err(Error::UndefinedOracle(
            "the variational characterization of sin φ requires distinct subspaces".into(),
        ));
    }
    let x = v.intersect(w)?;
    let sphere = x.complement();
    let m = sphere.dim();
    debug_assert!(m >= 1, "distinct subspaces leave a nontrivial complement");

    // Objective and Euclidean gradient pulled back to sphere coordinates.
    let eval = |y: &DVector<f64>| -> (f64, DVector<f64>) {
        let point = sphere.basis() * y;
        let rv = &point - v.project_raw(&point);
        let rw = &point - w.project_raw(&point);
        let dv = rv.norm();
        let dw = rw.norm();
        let mut g = DVector::zeros(point.len());
        // d(·, V) is 1-Lipschitz with gradient r/‖r‖ away from V; on V itself
        // we take the zero subgradient.
        if dv > 1e-14 {
            g += rv / dv;
        }
        if dw > 1e-14 {
            g += rw / dw;
        }
        (dv + dw, sphere.basis().tr_mul(&g))
    };

    let mut rng = ChaCha8Rng::seed_from_u64(ORACLE_SEED);
    let mut best = f64::INFINITY;
    for _ in 0..n_restarts.max(1) {
        let mut y = loop {
            let cand: DVector<f64> =
                DVector::from_fn(m, |_, _| rng.sample::<f64, _>(StandardNormal));
            if cand.norm() > 1e-6 {
                break cand.normalize();
            }
        };
        let (mut fy, mut gy) = eval(&y);
        best = best.min(fy);
        let mut t = 0.5;
        for _ in 0..500 {
            let tangent = &gy - &y * y.dot(&gy);
            let g_norm = tangent.norm();
            if g_norm <= 1e-10 || fy <= 1e-15 {
                break;
            }
            let mut accepted = false;
            let mut step = t;
            for _ in 0..40 {
                let cand = (&y - step * &tangent).normalize();
                let (fc, gc) = eval(&cand);
                if fc <= fy - 1e-4 * step * g_norm * g_norm {
                    y = cand;
                    fy = fc;
                    gy = gc;
                    best = best.min(fy);
                    t = (step * 2.0).min(1.0);
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        best = best.min(fy);
    }
    Ok(best.clamp(0.0, 2.0))
}

fn mask_to_indices(mask: u64) -> Vec<usize> {
    (0..64).filter(|i| mask & (1 << i) != 0).map(|i| i + 1).collect()
}

/// κ* of a family via exhaustive enumeration of all subset pairs, including
/// the empty set (whose intersection is the whole space and contributes
/// κ = 2), capped at [`DEFAULT_MAX_MEMBERS`] members.
pub fn kappa_star(system: &SubspaceSystem) -> Result<RegularityCertificate> {
    kappa_star_with_limit(system, DEFAULT_MAX_MEMBERS)
}

/// κ* with an explicit family-size cap (the enumeration visits 4^N pairs).
pub fn kappa_star_with_limit(
    system: &SubspaceSystem,
    n_max_subsets: usize,
) -> Result<RegularityCertificate> {
    let n = system.len();
    if n > n_max_subsets {
        return Err(Error::Capacity(format!(
            "a family of {n} members has 2^{n} index subsets; exhaustive κ* enumeration is \
             capped at {n_max_subsets} members — evaluate friedrichs_angle on explicit subset \
             pairs instead"
        )));
    }
    let n_masks = 1u64 << n;
    // Warm the intersection cache serially so the parallel pair loop only reads.
    for mask in 0..n_masks {
        system.intersection_mask(mask)?;
    }
    let pairs: Vec<(u64, u64)> = (0..n_masks)
        .flat_map(|i| (i..n_masks).map(move |j| (i, j)))
        .collect();
    let per_pair_angles: Vec<PairAngles> = pairs
        .par_iter()
        .map(|&(mi, mj)| {
            let vi = system.intersection_mask(mi)?;
            let vj = system.intersection_mask(mj)?;
            let rep = friedrichs_angle(&vi, &vj)?;
            Ok(PairAngles {
                set_i: mask_to_indices(mi),
                set_j: mask_to_indices(mj),
                phi: rep.phi,
                kappa_pair: rep.kappa_pair,
                cos_phi: rep.cos_phi,
                sin_phi: rep.sin_phi,
                intersection_dim: rep.intersection_dim,
            })
        })
        .collect::<Result<_>>()?;

    let mut kappa_star = 2.0_f64;
    let mut min_phi = std::f64::consts::FRAC_PI_2;
    let mut worst = 0usize;
    for (idx, entry) in per_pair_angles.iter().enumerate() {
        if entry.kappa_pair > kappa_star {
            kappa_star = entry.kappa_pair;
            worst = idx;
        }
        min_phi = min_phi.min(entry.phi);
    }
    let worst_pair = (
        per_pair_angles[worst].set_i.clone(),
        per_pair_angles[worst].set_j.clone(),
    );
    Ok(RegularityCertificate {
        n_members: n,
        ambient_dim: system.ambient_dim(),
        kappa_star,
        worst_pair,
        min_phi,
        per_pair_angles,
        innately_regular: min_phi > 0.0,
    })
}

/// Empirical lower bound on the best regularity constant of a subcollection:
///
/// ```text
///     max over samples x of  d(x, V_I) / max_{i∈I} d(x, Vᵢ),
/// ```
///
/// over `n_samples` random unit vectors.  Samples with
/// max_i d(x, Vᵢ) ≤ 1e-12 are skipped; if every sample is skipped (the whole
/// sphere effectively lies in ⋂ Vᵢ) a degenerate-samples error is returned.
pub fn empirical_regularity_kappa(
    system: &SubspaceSystem,
    indices: &[usize],
    n_samples: usize,
    rng_seed: u64,
) -> Result<f64> {
    let v_i = system.intersection(indices)?;
    let members: Vec<&Subspace> = {
        let mut seen = vec![false; system.len()];
        let mut out = Vec::new();
        for &i in indices {
            if !seen[i] {
                seen[i] = true;
                out.push(system.member(i)?);
            }
        }
        out
    };
    let d = system.ambient_dim();
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut best: Option<f64> = None;
    for _ in 0..n_samples {
        let x: DVector<f64> = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
        let norm = x.norm();
        if norm <= 1e-12 {
            continue;
        }
        let x = x / norm;
        let denom = members
            .iter()
            .map(|m| m.distance_raw(&x))
            .fold(0.0_f64, f64::max);
        if denom <= 1e-12 {
            continue;
        }
        let ratio = v_i.distance_raw(&x) / denom;
        best = Some(best.map_or(ratio, |b: f64| b.max(ratio)));
    }
    best.ok_or_else(|| {
        Error::DegenerateSamples(format!(
            "all {n_samples} samples fell inside the subcollection intersection"
        ))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_6};

    fn v(coords: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(coords)
    }

    fn line(angle: f64) -> Subspace {
        Subspace::from_span(&[v(&[angle.cos(), angle.sin()])], 2).unwrap()
    }

    fn random_subspace(rng: &mut ChaCha8Rng, d: usize, k: usize) -> Subspace {
        let cols: Vec<DVector<f64>> = (0..k)
            .map(|_| DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal)))
            .collect();
        Subspace::from_span(&cols, d).unwrap()
    }

    #[test]
    fn principal_angles_of_classic_pairs() {
        let x_axis = line(0.0);
        assert_abs_diff_eq!(
            principal_angles(&x_axis, &x_axis).unwrap()[0],
            0.0,
            epsilon = 1e-12
        );
        let y_axis = line(FRAC_PI_2);
        assert_abs_diff_eq!(
            principal_angles(&x_axis, &y_axis).unwrap()[0],
            FRAC_PI_2,
            epsilon = 1e-12
        );
        let thirty = line(FRAC_PI_6);
        assert_abs_diff_eq!(
            principal_angles(&x_axis, &thirty).unwrap()[0],
            FRAC_PI_6,
            epsilon = 1e-12
        );
        assert!(principal_angles(&x_axis, &Subspace::zero(2)).unwrap().is_empty());
        // Ascending list, one angle per dimension of the smaller subspace.
        let xy = Subspace::from_span(&[v(&[1.0, 0.0, 0.0]), v(&[0.0, 1.0, 0.0])], 3).unwrap();
        let tilted = Subspace::from_span(
            &[v(&[0.0, 1.0, 0.0]), v(&[FRAC_PI_4.cos(), 0.0, FRAC_PI_4.sin()])],
            3,
        )
        .unwrap();
        let angles = principal_angles(&xy, &tilted).unwrap();
        assert_eq!(angles.len(), 2);
        assert!(angles[0] <= angles[1]);
        assert_abs_diff_eq!(angles[0], 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(angles[1], FRAC_PI_4, epsilon = 1e-10);
    }

    #[test]
    fn friedrichs_angle_of_plane_lines() {
        let rep = friedrichs_angle(&line(0.0), &line(FRAC_PI_6)).unwrap();
        assert_abs_diff_eq!(rep.phi, FRAC_PI_6, epsilon = 1e-12);
        assert_eq!(rep.intersection_dim, 0);
        assert_abs_diff_eq!(rep.kappa_pair, 4.0, epsilon = 1e-10);
        assert_abs_diff_eq!(
            rep.sin_phi * rep.sin_phi + rep.cos_phi * rep.cos_phi,
            1.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn friedrichs_angle_nested_convention_is_exact() {
        let plane = Subspace::from_span(&[v(&[1.0, 0.0, 0.0]), v(&[0.0, 1.0, 0.0])], 3).unwrap();
        let inner = Subspace::from_span(&[v(&[1.0, 1.0, 0.0])], 3).unwrap();
        let rep = friedrichs_angle(&inner, &plane).unwrap();
        assert_eq!(rep.phi, FRAC_PI_2);
        assert_eq!(rep.cos_phi, 0.0);
        assert_eq!(rep.sin_phi, 1.0);
        assert_eq!(rep.kappa_pair, 2.0);
        assert_eq!(rep.intersection_dim, 1);

        let rep = friedrichs_angle(&plane, &plane).unwrap();
        assert_eq!(rep.phi, FRAC_PI_2);
        assert_eq!(rep.intersection_dim, 2);

        let rep = friedrichs_angle(&plane, &Subspace::zero(3)).unwrap();
        assert_eq!(rep.phi, FRAC_PI_2);
    }

    #[test]
    fn friedrichs_angle_with_shared_line_matches_construction() {
        // V = xy-plane, W = span{e₂, (cos θ, 0, sin θ)}: intersection = e₂
        // axis, residual angle θ.
        let theta = FRAC_PI_4;
        let xy = Subspace::from_span(&[v(&[1.0, 0.0, 0.0]), v(&[0.0, 1.0, 0.0])], 3).unwrap();
        let w = Subspace::from_span(
            &[v(&[0.0, 1.0, 0.0]), v(&[theta.cos(), 0.0, theta.sin()])],
            3,
        )
        .unwrap();
        let rep = friedrichs_angle(&xy, &w).unwrap();
        assert_eq!(rep.intersection_dim, 1);
        assert_abs_diff_eq!(rep.phi, theta, epsilon = 1e-10);
    }

    #[test]
    fn friedrichs_angle_is_symmetric_and_matches_undeflated_singular_value() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..25 {
            let d = 6;
            let shared = random_subspace(&mut rng, d, 1);
            let mut span_v = vec![shared.basis().column(0).into_owned()];
            let mut span_w = vec![shared.basis().column(0).into_owned()];
            for _ in 0..2 {
                span_v.push(DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal)));
                span_w.push(DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal)));
            }
            let sv = Subspace::from_span(&span_v, d).unwrap();
            let sw = Subspace::from_span(&span_w, d).unwrap();
            let ab = friedrichs_angle(&sv, &sw).unwrap();
            let ba = friedrichs_angle(&sw, &sv).unwrap();
            assert_abs_diff_eq!(ab.phi, ba.phi, epsilon = 1e-12);
            assert_eq!(ab.intersection_dim, 1);
            // Cross-check against the (d₀+1)-th singular value of the raw
            // product of bases (no deflation).
            let sigma = crate::linalg::singular_values(&sv.basis().tr_mul(sw.basis()));
            let expected = sigma[ab.intersection_dim].clamp(0.0, 1.0);
            assert_abs_diff_eq!(ab.cos_phi, expected, epsilon = 1e-10);
        }
    }

    #[test]
    fn oracle_agrees_with_svd_route() {
        // Orthogonal lines: sin φ = 1.
        let o = sin_friedrichs_oracle(&line(0.0), &line(FRAC_PI_2), 8).unwrap();
        assert_abs_diff_eq!(o, 1.0, epsilon = 1e-6);
        // Lines at π/6: sin φ = 1/2.
        let o = sin_friedrichs_oracle(&line(0.0), &line(FRAC_PI_6), 8).unwrap();
        assert_abs_diff_eq!(o, 0.5, epsilon = 1e-6);
        // Nested distinct pair: the infimum is 1 (attained inside W ∩ V^⊥).
        let plane = Subspace::from_span(&[v(&[1.0, 0.0, 0.0]), v(&[0.0, 1.0, 0.0])], 3).unwrap();
        let inner = Subspace::from_span(&[v(&[1.0, 0.0, 0.0])], 3).unwrap();
        let o = sin_friedrichs_oracle(&inner, &plane, 8).unwrap();
        assert_abs_diff_eq!(o, 1.0, epsilon = 1e-4);
        // Random pairs in ℝ⁶ with an engineered 1-dim intersection.
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..5 {
            let d = 6;
            let shared = random_subspace(&mut rng, d, 1).basis().column(0).into_owned();
            let mk = |rng: &mut ChaCha8Rng| {
                let a = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
                Subspace::from_span(&[shared.clone(), a], d).unwrap()
            };
            let sv = mk(&mut rng);
            let sw = mk(&mut rng);
            let rep = friedrichs_angle(&sv, &sw).unwrap();
            let oracle = sin_friedrichs_oracle(&sv, &sw, DEFAULT_ORACLE_RESTARTS).unwrap();
            assert_abs_diff_eq!(oracle, rep.sin_phi, epsilon = 1e-4);
        }
    }

    #[test]
    fn oracle_rejects_equal_spans() {
        let a = Subspace::from_span(&[v(&[1.0, 2.0, 0.0]), v(&[0.0, 0.0, 1.0])], 3).unwrap();
        let b = Subspace::from_span(&[v(&[2.0, 4.0, 0.0]), v(&[1.0, 2.0, 3.0])], 3).unwrap();
        assert!(matches!(
            sin_friedrichs_oracle(&a, &b, 4),
            Err(Error::UndefinedOracle(_))
        ));
    }

    #[test]
    fn kappa_star_of_reference_systems() {
        // Single member: every pair is nested/trivial, κ* = 2.
        let single = SubspaceSystem::new(vec![line(0.3)]).unwrap();
        let cert = kappa_star(&single).unwrap();
        assert_eq!(cert.kappa_star, 2.0);
        assert_eq!(cert.per_pair_angles.len(), 3); // (∅,∅), (∅,{1}), ({1},{1})
        assert!(cert.innately_regular);

        // Two lines at π/6: the only non-right angle is ({1},{2}).
        let two = SubspaceSystem::new(vec![line(0.0), line(FRAC_PI_6)]).unwrap();
        let cert = kappa_star(&two).unwrap();
        assert_abs_diff_eq!(cert.kappa_star, 4.0, epsilon = 1e-10);
        assert_eq!(cert.worst_pair, (vec![1], vec![2]));
        assert_abs_diff_eq!(cert.min_phi, FRAC_PI_6, epsilon = 1e-12);

        // Three coordinate axes in ℝ³: all angles are π/2.
        let axes = SubspaceSystem::new(vec![
            Subspace::from_span(&[v(&[1.0, 0.0, 0.0])], 3).unwrap(),
            Subspace::from_span(&[v(&[0.0, 1.0, 0.0])], 3).unwrap(),
            Subspace::from_span(&[v(&[0.0, 0.0, 1.0])], 3).unwrap(),
        ])
        .unwrap();
        let cert = kappa_star(&axes).unwrap();
        // Distinct orthogonal pairs go through the arccos route, so the right
        // angle is exact only up to floating-point rounding (the bit-exact
        // π/2 convention applies to nested pairs, covered elsewhere).
        assert_abs_diff_eq!(cert.kappa_star, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(cert.min_phi, FRAC_PI_2, epsilon = 1e-12);
        // κ* dominates every stored pair.
        assert!(cert
            .per_pair_angles
            .iter()
            .all(|p| p.kappa_pair <= cert.kappa_star));
    }

    #[test]
    fn kappa_star_capacity_guard() {
        let members: Vec<Subspace> = (0..11)
            .map(|i| line(0.1 * i as f64))
            .collect();
        let sys = SubspaceSystem::new(members).unwrap();
        assert!(matches!(kappa_star(&sys), Err(Error::Capacity(_))));
        assert!(kappa_star_with_limit(&sys, 11).is_ok());
    }

    #[test]
    fn empirical_kappa_reference_values() {
        // Singleton: the ratio is identically 1 off V_i.
        let sys = SubspaceSystem::new(vec![line(0.0), line(FRAC_PI_6)]).unwrap();
        let k = empirical_regularity_kappa(&sys, &[0], 100, 5).unwrap();
        assert_abs_diff_eq!(k, 1.0, epsilon = 1e-12);

        // Two lines at π/6: bounded by κ = 2/sin φ = 4, and at least 1.
        let k = empirical_regularity_kappa(&sys, &[0, 1], 10_000, 6).unwrap();
        assert!((1.0..=4.0).contains(&k), "κ̂ = {k}");

        // Perpendicular axes in ℝ²: the analytic maximum of the ratio is √2.
        let axes = SubspaceSystem::new(vec![line(0.0), line(FRAC_PI_2)]).unwrap();
        let k = empirical_regularity_kappa(&axes, &[0, 1], 10_000, 7).unwrap();
        assert!(k <= 2.0_f64.sqrt() + 1e-9, "κ̂ = {k}");
        assert!(k >= 1.0);

        assert!(matches!(
            empirical_regularity_kappa(&sys, &[], 10, 1),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(
            empirical_regularity_kappa(&sys, &[2], 10, 1),
            Err(Error::IndexOutOfRange(_))
        ));
    }

    #[test]
    fn pairwise_regularity_inequality_holds_on_random_data() {
        // d(x, V∩W)·sin φ ≤ d(x, V) + d(x, W) for random pairs and points.
        let mut rng = ChaCha8Rng::seed_from_u64(1234);
        for _ in 0..40 {
            let d = 5;
            let kv = rng.random_range(1..4);
            let kw = rng.random_range(1..4);
            let sv = random_subspace(&mut rng, d, kv);
            let sw = random_subspace(&mut rng, d, kw);
            let rep = friedrichs_angle(&sv, &sw).unwrap();
            let inter = sv.intersect(&sw).unwrap();
            for _ in 0..20 {
                let x: DVector<f64> =
                    DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
                let lhs = inter.distance_raw(&x) * rep.sin_phi;
                let rhs = sv.distance_raw(&x) + sw.distance_raw(&x);
                assert!(
                    lhs <= rhs + 1e-10 * x.norm(),
                    "regularity inequality violated: {lhs} > {rhs}"
                );
            }
        }
    }
}
