//! Relaxed projection dynamics on finite families of linear subspaces.
//!
//! The crate is organized around one question: run an arbitrary sequence of
//! relaxed orthogonal projections
//!
//! ```text
//!     x_{n+1} = (1 − λ_n) x_n + λ_n P_{V_{i_n}} x_n,      λ_n ∈ [η, 2 − η],
//! ```
//!
//! onto members of a fixed family 𝒱 = (V₁, …, V_N) of subspaces of ℝᵈ, with
//! *no* constraint on the control sequence (i_n) — and certify quantitative
//! decay of the displacements ‖x_{n+1} − x_n‖.
//!
//! Modules:
//!
//! * [`subspace`] — orthonormal-basis subspaces, relaxed projections,
//!   intersections, complements, and cached systems;
//! * [`regularity`] — principal/Friedrichs angles, the variational oracle for
//!   the Friedrichs sine, and the family regularity constant κ*;
//! * [`bounds`] — the derived constants (ε*, β*, C₁…C_N, ρ*, c*) and the
//!   closed-form displacement bounds built from them;
//! * [`dynamics`] — control policies, relaxation schedules, trajectory
//!   execution, and per-step structural verifiers;
//! * [`analysis`] — displacement profiles, bound checking, windowed segment
//!   verification, and deterministic parallel ensemble sweeps.

pub mod analysis;
pub mod bounds;
pub mod dynamics;
pub mod error;
pub(crate) mod linalg;
pub mod regularity;
pub mod subspace;

pub use error::{Error, Result};
