//! Closed-form constants and displacement bounds.
//!
//! Given a family constant κ* ≥ 2, the member count N, a relaxation band
//! parameter η ∈ (0, 1], and a moment exponent γ > 0, this module evaluates
//!
//! ```text
//!     ε* = κ*^{−N}/2,
//!     β* = (1 − η(2−η)ε*²)^{1/2}          ∈ (1−η, 1),
//!     C₁ = (2−η)^γ / (1 − (1−η)^γ),
//!     C_{ℓ+1} = C_ℓ + (C_ℓ + (2−η)^γ)/(1 − β*^γ),
//!     ρ* = (N/9)·ln(1/β*),    c* = β*^{−N},
//! ```
//!
//! together with the closed-form majorant
//! C_N ≤ (3/(1−β*^γ))^{N−1} · (2−η)^γ/(1−(1−η)^γ), the distribution bound
//! min of
//!
//! ```text
//!     S(τ) ≤ 3^{N−1} e^N (1 + ln τ/(N ln β*))^{N−1} (1 + ln τ/(N ln(1−η)))
//!     S(τ) <  9^N (1 + ln τ/(N ln β*))^N
//! ```
//!
//! and the rearrangement envelope δ*_n < c*·exp(−ρ*·n^{1/N}).
//!
//! β* is typically within 1e-10…1e-20 of 1, so every expression involving
//! 1 − β*^γ or ln β* runs through `ln_1p`/`exp_m1` to avoid catastrophic
//! cancellation; `ln β*` is carried explicitly in the struct for that reason.
//! At η = 1 the factor (1 + ln τ/(N ln(1−η))) degenerates to 1, which IEEE
//! arithmetic produces automatically from ln 0 = −∞.

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::regularity::RegularityCertificate;

/// Values above this are emitted as the string `"overflow"` in JSON reports;
/// the bounds they witness hold trivially.
pub const OVERFLOW_SENTINEL: f64 = 1e300;

pub(crate) fn serialize_overflow<S: Serializer>(
    v: &f64,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() && v.abs() <= OVERFLOW_SENTINEL {
        s.serialize_f64(*v)
    } else {
        s.serialize_str("overflow")
    }
}

fn serialize_overflow_vec<S: Serializer>(
    v: &[f64],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for x in v {
        if x.is_finite() && x.abs() <= OVERFLOW_SENTINEL {
            seq.serialize_element(x)?;
        } else {
            seq.serialize_element("overflow")?;
        }
    }
    seq.end()
}

/// Every constant of the displacement theory for one (κ*, N, η, γ) tuple.
#[derive(Clone, Debug, Serialize)]
pub struct TheoreticalConstants {
    /// Member count N ≥ 1 of the family.
    #[serde(rename = "N")]
    pub n: usize,
    /// Relaxation band parameter η ∈ (0, 1].
    pub eta: f64,
    /// Family regularity constant κ* ≥ 2.
    pub kappa_star: f64,
    /// Moment exponent γ > 0.
    pub gamma: f64,
    /// ε* = κ*^{−N}/2 ∈ (0, 1/4].
    pub eps_star: f64,
    /// β* = (1 − η(2−η)ε*²)^{1/2} ∈ (1−η, 1).
    pub beta_star: f64,
    /// ln β* < 0, carried at full precision (β* itself can round to 1).
    pub ln_beta_star: f64,
    /// C₁ … C_N from the exact recursion (strictly increasing).
    #[serde(serialize_with = "serialize_overflow_vec")]
    pub c_seq: Vec<f64>,
    /// Closed-form majorant of C_N.
    #[serde(serialize_with = "serialize_overflow")]
    pub c_closed: f64,
    /// Rearrangement decay rate ρ* = (N/9)·ln(1/β*) > 0.
    pub rho_star: f64,
    /// Rearrangement prefactor c* = β*^{−N} > 1.
    pub c_star: f64,
}

/// Constants from a raw κ* value (no certificate needed).
pub fn constants_for_kappa(
    kappa_star: f64,
    n: usize,
    eta: f64,
    gamma: f64,
) -> Result<TheoreticalConstants> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "member count N must be at least 1".into(),
        ));
    }
    if !(kappa_star >= 2.0) || !kappa_star.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "κ* = {kappa_star} must be a finite value ≥ 2"
        )));
    }
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "η = {eta} must lie in (0, 1]: the base-constant denominator 1 − (1−η)^γ \
             vanishes as η → 0"
        )));
    }
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "moment exponent γ = {gamma} must be positive and finite"
        )));
    }

    let eps_star = 0.5 * kappa_star.powi(-(n as i32));
    // z = η(2−η)ε*² ∈ (0, 1/16]; β* = √(1−z) via ln_1p for full precision.
    let z = eta * (2.0 - eta) * eps_star * eps_star;
    let ln_beta_star = 0.5 * (-z).ln_1p();
    let beta_star = ln_beta_star.exp();

    // 1 − β*^γ and 1 − (1−η)^γ without cancellation.
    let one_minus_beta_gamma = -(gamma * ln_beta_star).exp_m1();
    let one_minus_decay_gamma = -(gamma * (1.0 - eta).ln()).exp_m1(); // = 1 at η = 1
    let top = (2.0 - eta).powf(gamma);

    let c1 = top / one_minus_decay_gamma;
    let mut c_seq = Vec::with_capacity(n);
    c_seq.push(c1);
    for ell in 1..n {
        let prev = c_seq[ell - 1];
        c_seq.push(prev + (prev + top) / one_minus_beta_gamma);
    }
    let c_closed = (3.0 / one_minus_beta_gamma).powi(n as i32 - 1) * c1;

    let rho_star = (n as f64 / 9.0) * (-ln_beta_star);
    let c_star = (-(n as f64) * ln_beta_star).exp();

    Ok(TheoreticalConstants {
        n,
        eta,
        kappa_star,
        gamma,
        eps_star,
        beta_star,
        ln_beta_star,
        c_seq,
        c_closed,
        rho_star,
        c_star,
    })
}

/// Constants from a regularity certificate (the usual entry point).
pub fn constants_for(
    cert: &RegularityCertificate,
    n: usize,
    eta: f64,
    gamma: f64,
) -> Result<TheoreticalConstants> {
    if n != cert.n_members {
        return Err(Error::ConfigMismatch(format!(
            "requested N = {n} but the certificate covers {} members",
            cert.n_members
        )));
    }
    constants_for_kappa(cert.kappa_star, n, eta, gamma)
}

impl TheoreticalConstants {
    /// Sibling constants sharing (κ*, N, η) at a different exponent γ.
    pub fn with_gamma(&self, gamma: f64) -> Result<Self> {
        constants_for_kappa(self.kappa_star, self.n, self.eta, gamma)
    }

    /// C_N: the moment bound Σ‖x_{n+1} − x_n‖^γ ≤ C_N·‖x₀‖^γ for the stored γ.
    pub fn moment_bound(&self) -> f64 {
        *self.c_seq.last().expect("c_seq has N ≥ 1 entries")
    }

    /// Upper bound on S(τ) = #{n : δ_n ≥ τ}: the minimum of the two published
    /// envelopes (the e^N form is sharper for η near 1, the 9^N form
    /// otherwise).  τ must lie in (0, 1] — δ_n never exceeds 1.
    pub fn s_tau_bound(&self, tau: f64) -> Result<f64> {
        if !(tau > 0.0 && tau <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "τ = {tau} outside (0, 1]"
            )));
        }
        let n = self.n as f64;
        let lt = tau.ln(); // ≤ 0
        let beta_factor = 1.0 + lt / (n * self.ln_beta_star); // ≥ 1
        // At η = 1: ln(1−η) = −∞ so the factor collapses to 1 on its own.
        let decay_factor = 1.0 + lt / (n * (1.0 - self.eta).ln());
        let first =
            3.0_f64.powi(self.n as i32 - 1) * n.exp() * beta_factor.powi(self.n as i32 - 1)
                * decay_factor;
        let second = 9.0_f64.powi(self.n as i32) * beta_factor.powi(self.n as i32);
        Ok(first.min(second))
    }

    /// Rearrangement envelope c*·exp(−ρ*·n^{1/N}) for the 0-based rank n:
    /// the n-th largest normalized displacement lies strictly below it.
    pub fn rearrangement_bound(&self, n: usize) -> f64 {
        self.c_star * (-self.rho_star * (n as f64).powf(1.0 / self.n as f64)).exp()
    }
}
