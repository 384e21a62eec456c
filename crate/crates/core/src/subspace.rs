//! Linear subspaces of ℝᵈ with orthonormal bases.
//!
//! A [`Subspace`] stores an orthonormal basis Q (d × k, columns orthonormal,
//! `k = 0` encodes the trivial subspace {0}).  On top of it we provide the
//! orthogonal projection Pₓ = QQᵀx, the relaxed projection
//!
//! ```text
//!     P_λ x = (1 − λ) x + λ P x,          λ ∈ [0, 2],
//! ```
//!
//! distances d(x, V) = ‖x − Px‖, the relative distance θ_V(x) = d(x, V)/‖x‖
//! (defined as 0 at the origin and clamped to [0, 1]), intersections,
//! orthogonal complements, and a [`SubspaceSystem`] that caches intersections
//! of its members over index subsets.
//!
//! Numerical conventions used throughout:
//!
//! * spanning sets are reduced by SVD, keeping singular directions with
//!   σ > [`TOL_RANK`] · σ_max;
//! * a principal direction of a pair of subspaces is treated as shared when
//!   its cosine is ≥ 1 − [`TOL_INTERSECT`];
//! * orthonormality is certified against [`TOL_ORTHO`];
//! * norms ≤ [`TOL_ZERO`] are treated as the origin when forming relative
//!   quantities (this is an underflow guard, not a modelling tolerance).

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;

/// Relative singular-value cutoff when extracting a basis from a spanning set.
pub const TOL_RANK: f64 = 1e-10;
/// Cosine tolerance deciding shared principal directions (σ ≥ 1 − tol).
pub const TOL_INTERSECT: f64 = 1e-8;
/// Orthonormality certification threshold.
pub const TOL_ORTHO: f64 = 1e-10;
/// Norms at or below this are treated as the origin in relative quantities.
pub const TOL_ZERO: f64 = 1e-300;

/// A linear subspace of ℝᵈ, stored as an orthonormal basis.
#[derive(Clone, Debug)]
pub struct Subspace {
    /// d × k matrix with orthonormal columns; k = 0 encodes {0}.
    basis: DMatrix<f64>,
}

/// Orthonormal basis for the column span of `m`, keeping singular directions
/// with σ > [`TOL_RANK`] · σ_max.
fn orthonormal_column_span(m: &DMatrix<f64>) -> DMatrix<f64> {
    let d = m.nrows();
    if m.ncols() == 0 {
        return DMatrix::zeros(d, 0);
    }
    let svd = linalg::thin_svd(m);
    let sigma = &svd.sigma;
    let sigma_max = sigma[0];
    if !(sigma_max > 0.0) {
        return DMatrix::zeros(d, 0);
    }
    // Singular values are sorted in decreasing order, so the retained
    // directions are a prefix of the columns of U.
    let k = sigma.iter().take_while(|&&s| s > TOL_RANK * sigma_max).count();
    svd.u.columns(0, k).into_owned()
}

/// Like [`orthonormal_column_span`] but with an absolute singular-value
/// floor.  Deflation residuals of orthonormal bases need this: when the whole
/// residual is numerical noise, a relative cutoff would renormalize the noise
/// into a spurious basis direction instead of dropping it.
pub(crate) fn orthonormal_span_with_floor(m: &DMatrix<f64>, floor: f64) -> DMatrix<f64> {
    let d = m.nrows();
    if m.ncols() == 0 {
        return DMatrix::zeros(d, 0);
    }
    let svd = linalg::thin_svd(m);
    let k = svd.sigma.iter().take_while(|&&s| s > floor).count();
    svd.u.columns(0, k).into_owned()
}

impl Subspace {
    /// Builds the span of `vectors` inside ℝ^`ambient_dim`.
    ///
    /// The spanning set may be empty, linearly dependent, or contain zero
    /// vectors; the stored basis is orthonormalized and near-dependent
    /// directions (relative σ ≤ [`TOL_RANK`]) are dropped.  An empty or
    /// all-zero spanning set yields the trivial subspace {0}.
    pub fn from_span(vectors: &[DVector<f64>], ambient_dim: usize) -> Result<Self> {
        if ambient_dim == 0 {
            return Err(Error::InvalidInput(
                "ambient dimension must be positive".into(),
            ));
        }
        for (j, v) in vectors.iter().enumerate() {
            if v.len() != ambient_dim {
                return Err(Error::InvalidInput(format!(
                    "spanning vector {j} has length {} but ambient dimension is {ambient_dim}",
                    v.len()
                )));
            }
        }
        let m = DMatrix::from_fn(ambient_dim, vectors.len(), |r, c| vectors[c][r]);
        Ok(Self {
            basis: orthonormal_column_span(&m),
        })
    }

    /// Builds the span of the columns of `matrix`.
    pub fn from_columns(matrix: &DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() == 0 {
            return Err(Error::InvalidInput(
                "ambient dimension must be positive".into(),
            ));
        }
        Ok(Self {
            basis: orthonormal_column_span(matrix),
        })
    }

    /// Span of the columns of `matrix`, dropping directions with singular
    /// value at or below the absolute `floor`.
    pub(crate) fn from_columns_with_floor(matrix: &DMatrix<f64>, floor: f64) -> Result<Self> {
        if matrix.nrows() == 0 {
            return Err(Error::InvalidInput(
                "ambient dimension must be positive".into(),
            ));
        }
        Ok(Self {
            basis: orthonormal_span_with_floor(matrix, floor),
        })
    }

    /// The trivial subspace {0} ⊂ ℝᵈ.
    ///
    /// Panics if `ambient_dim == 0` (a programming error, not a data error).
    pub fn zero(ambient_dim: usize) -> Self {
        assert!(ambient_dim > 0, "ambient dimension must be positive");
        Self {
            basis: DMatrix::zeros(ambient_dim, 0),
        }
    }

    /// The full space ℝᵈ.
    ///
    /// Panics if `ambient_dim == 0` (a programming error, not a data error).
    pub fn full(ambient_dim: usize) -> Self {
        assert!(ambient_dim > 0, "ambient dimension must be positive");
        Self {
            basis: DMatrix::identity(ambient_dim, ambient_dim),
        }
    }

    /// Ambient dimension d.
    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    /// Dimension k of the subspace.
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    /// The stored orthonormal basis (d × k).
    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    /// max |QᵀQ − I|: how far the stored basis is from exact orthonormality.
    pub fn gram_defect(&self) -> f64 {
        let k = self.dim();
        if k == 0 {
            return 0.0;
        }
        let g = self.basis.tr_mul(&self.basis) - DMatrix::<f64>::identity(k, k);
        g.iter().fold(0.0_f64, |acc, &v| acc.max(v.abs()))
    }

    fn check_vector(&self, x: &DVector<f64>) -> Result<()> {
        if x.len() != self.ambient_dim() {
            return Err(Error::InvalidInput(format!(
                "vector length {} does not match ambient dimension {}",
                x.len(),
                self.ambient_dim()
            )));
        }
        Ok(())
    }

    /// Orthogonal projection QQᵀx without input validation (hot path).
    pub(crate) fn project_raw(&self, x: &DVector<f64>) -> DVector<f64> {
        if self.dim() == 0 {
            return DVector::zeros(self.ambient_dim());
        }
        let coeffs = self.basis.tr_mul(x);
        &self.basis * coeffs
    }

    /// Orthogonal projection of `x` onto the subspace.
    pub fn project(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_vector(x)?;
        Ok(self.project_raw(x))
    }

    /// Relaxed projection (1 − λ)x + λPx with λ ∈ [0, 2].
    ///
    /// λ = 0 is the identity, λ = 1 the orthogonal projection, λ = 2 the
    /// reflection through the subspace.
    pub fn relaxed_project(&self, lambda: f64, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_vector(x)?;
        if !(0.0..=2.0).contains(&lambda) {
            return Err(Error::InvalidParameter(format!(
                "relaxation weight λ = {lambda} outside [0, 2]"
            )));
        }
        let p = self.project_raw(x);
        // x − λ(x − Px) = (1 − λ)x + λPx, computed via the residual so that
        // the companion identity ‖x − P_λx‖ = λ‖x − Px‖ holds to the very
        // last bit.
        let r = x - p;
        Ok(x - lambda * r)
    }

    /// Distance d(x, V) = ‖x − Px‖.
    pub fn distance(&self, x: &DVector<f64>) -> Result<f64> {
        self.check_vector(x)?;
        Ok(self.distance_raw(x))
    }

    pub(crate) fn distance_raw(&self, x: &DVector<f64>) -> f64 {
        if self.dim() == 0 {
            return x.norm();
        }
        (x - self.project_raw(x)).norm()
    }

    /// Relative distance θ_V(x) = d(x, V)/‖x‖ ∈ [0, 1], with θ_V(0) = 0.
    ///
    /// The clamp to [0, 1] removes harmless floating-point overshoot; the
    /// origin convention uses the [`TOL_ZERO`] underflow guard.
    pub fn relative_distance(&self, x: &DVector<f64>) -> Result<f64> {
        self.check_vector(x)?;
        let n = x.norm();
        if n <= TOL_ZERO {
            return Ok(0.0);
        }
        Ok((self.distance_raw(x) / n).clamp(0.0, 1.0))
    }

    /// The d × d orthogonal projector QQᵀ.
    pub fn projector(&self) -> DMatrix<f64> {
        let d = self.ambient_dim();
        if self.dim() == 0 {
            return DMatrix::zeros(d, d);
        }
        &self.basis * self.basis.transpose()
    }

    /// Intersection V ∩ W.
    ///
    /// The dimension of the intersection is decided by the principal cosines
    /// of the pair (σ ≥ 1 − [`TOL_INTERSECT`] counts as shared).  The basis
    /// itself is then recovered from the bottom singular vectors of the
    /// stacked residual projectors [(I − P_V); (I − P_W)], which pins the
    /// shared directions down to machine precision instead of the ≈ √ε
    /// accuracy a naive mapped-singular-vector construction would give.
    pub fn intersect(&self, other: &Self) -> Result<Self> {
        let d = self.ambient_dim();
        if other.ambient_dim() != d {
            return Err(Error::InvalidInput(format!(
                "ambient dimensions differ: {} vs {}",
                d,
                other.ambient_dim()
            )));
        }
        if self.dim() == 0 || other.dim() == 0 {
            return Ok(Self::zero(d));
        }
        if self.dim() == d {
            return Ok(other.clone());
        }
        if other.dim() == d {
            return Ok(self.clone());
        }

        // Decide the intersection dimension from the principal cosines.
        let product = self.basis.tr_mul(&other.basis);
        let cosines = linalg::singular_values(&product);
        let k = cosines.iter().filter(|&&s| s >= 1.0 - TOL_INTERSECT).count();
        if k == 0 {
            return Ok(Self::zero(d));
        }

        // Null directions of the stacked residual projectors.
        let eye = DMatrix::<f64>::identity(d, d);
        let mut stacked = DMatrix::zeros(2 * d, d);
        stacked
            .view_mut((0, 0), (d, d))
            .copy_from(&(&eye - self.projector()));
        stacked
            .view_mut((d, 0), (d, d))
            .copy_from(&(&eye - other.projector()));
        let svd = linalg::thin_svd(&stacked);
        debug_assert_eq!(svd.v.nrows(), d);
        let mut basis = DMatrix::zeros(d, k);
        for j in 0..k {
            // Smallest singular values sit in the last columns of V.
            basis.set_column(j, &svd.v.column(d - 1 - j));
        }
        Ok(Self { basis })
    }

    /// Orthogonal complement V^⊥.
    pub fn complement(&self) -> Self {
        let d = self.ambient_dim();
        let k = self.dim();
        if k == 0 {
            return Self::full(d);
        }
        if k == d {
            return Self::zero(d);
        }
        // I − QQᵀ is symmetric with eigenvalues {0, 1}; its top d − k singular
        // vectors span the complement.
        let residual = DMatrix::<f64>::identity(d, d) - self.projector();
        let svd = linalg::thin_svd(&residual);
        Self {
            basis: svd.u.columns(0, d - k).into_owned(),
        }
    }

    /// Whether `x` lies in the subspace up to `tol` (relative to ‖x‖ ∨ 1).
    pub fn contains(&self, x: &DVector<f64>, tol: f64) -> bool {
        x.len() == self.ambient_dim() && self.distance_raw(x) <= tol * x.norm().max(1.0)
    }

    /// Whether `other` ⊆ `self` up to `tol` (per basis vector of `other`).
    pub fn contains_subspace(&self, other: &Self, tol: f64) -> bool {
        other.ambient_dim() == self.ambient_dim()
            && other
                .basis
                .column_iter()
                .all(|c| self.distance_raw(&c.into_owned()) <= tol)
    }

    /// Whether the two subspaces span the same set up to `tol`.
    pub fn same_span(&self, other: &Self, tol: f64) -> bool {
        self.dim() == other.dim()
            && self.contains_subspace(other, tol)
            && other.contains_subspace(self, tol)
    }
}

/// A finite family (V₁, …, V_N) of subspaces of a common ℝᵈ, with a cache of
/// member intersections indexed by bitmask.
#[derive(Debug)]
pub struct SubspaceSystem {
    ambient_dim: usize,
    members: Vec<Subspace>,
    /// Intersections over index subsets, keyed by bitmask (bit i ⇔ member i).
    cache: RwLock<HashMap<u64, Arc<Subspace>>>,
}

impl Clone for SubspaceSystem {
    fn clone(&self) -> Self {
        Self {
            ambient_dim: self.ambient_dim,
            members: self.members.clone(),
            cache: RwLock::new(self.cache.read().expect("cache lock").clone()),
        }
    }
}

impl SubspaceSystem {
    /// Wraps a nonempty family of subspaces sharing one ambient space.
    ///
    /// At most 64 members are supported (index subsets are stored as `u64`
    /// bitmasks).
    pub fn new(members: Vec<Subspace>) -> Result<Self> {
        let first = members
            .first()
            .ok_or_else(|| Error::InvalidInput("a system needs at least one member".into()))?;
        let ambient_dim = first.ambient_dim();
        if members.len() > 64 {
            return Err(Error::Capacity(format!(
                "{} members exceed the 64-bit index-mask capacity",
                members.len()
            )));
        }
        for (i, m) in members.iter().enumerate() {
            if m.ambient_dim() != ambient_dim {
                return Err(Error::InvalidInput(format!(
                    "member {i} lives in ℝ^{} but member 0 lives in ℝ^{ambient_dim}",
                    m.ambient_dim()
                )));
            }
        }
        Ok(Self {
            ambient_dim,
            members,
            cache: RwLock::new(HashMap::new()),
        })
    }

    /// Number of members N.
    pub fn len(&self) -> usize {
        self.members.len()
    }

    /// Always false: systems are nonempty by construction.
    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Ambient dimension d.
    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    /// Member Vᵢ (0-based).
    pub fn member(&self, i: usize) -> Result<&Subspace> {
        self.members
            .get(i)
            .ok_or_else(|| Error::IndexOutOfRange(format!("member {i} of {}", self.len())))
    }

    /// All members in order.
    pub fn members(&self) -> &[Subspace] {
        &self.members
    }

    fn validate_mask(&self, mask: u64) -> Result<()> {
        if self.len() < 64 && mask >> self.len() != 0 {
            return Err(Error::IndexOutOfRange(format!(
                "mask {mask:#b} references members beyond the {} available",
                self.len()
            )));
        }
        Ok(())
    }

    /// Intersection ⋂_{i ∈ I} Vᵢ over the 0-based indices in `indices`.
    ///
    /// Duplicates are allowed and ignored; the list must be nonempty.  The
    /// pairwise intersections are folded in ascending index order and cached,
    /// so repeated queries (and queries of prefixes) are cheap.
    pub fn intersection(&self, indices: &[usize]) -> Result<Arc<Subspace>> {
        if indices.is_empty() {
            return Err(Error::InvalidInput(
                "intersection needs at least one member index".into(),
            ));
        }
        let mut mask = 0u64;
        for &i in indices {
            if i >= self.len() {
                return Err(Error::IndexOutOfRange(format!(
                    "member {i} of {}",
                    self.len()
                )));
            }
            mask |= 1 << i;
        }
        self.intersection_mask(mask)
    }

    /// Intersection over a bitmask of member indices.
    ///
    /// The empty mask denotes the empty index set, whose intersection is by
    /// convention the whole ambient space.
    pub fn intersection_mask(&self, mask: u64) -> Result<Arc<Subspace>> {
        self.validate_mask(mask)?;
        if let Some(hit) = self.cache.read().expect("cache lock").get(&mask) {
            return Ok(hit.clone());
        }
        let value = if mask == 0 {
            Arc::new(Subspace::full(self.ambient_dim))
        } else {
            // Fold members in ascending index order, caching every prefix.
            let mut cur: Option<(u64, Arc<Subspace>)> = None;
            for i in 0..self.len() {
                if mask & (1 << i) == 0 {
                    continue;
                }
                let next_mask = cur.as_ref().map_or(0, |(m, _)| *m) | (1 << i);
                // Look up under the read lock and release it before any
                // insert below asks for the write lock.
                let hit = self.cache.read().expect("cache lock").get(&next_mask).cloned();
                let next = match hit {
                    Some(hit) => hit,
                    None => {
                        let computed = match &cur {
                            None => Arc::new(self.members[i].clone()),
                            Some((_, s)) => Arc::new(
                                s.intersect(&self.members[i])
                                    .expect("members share one ambient space"),
                            ),
                        };
                        self.insert_cached(next_mask, computed)
                    }
                };
                cur = Some((next_mask, next));
            }
            cur.expect("mask is nonzero").1
        };
        Ok(self.insert_cached(mask, value))
    }

    fn insert_cached(&self, mask: u64, value: Arc<Subspace>) -> Arc<Subspace> {
        self.cache
            .write()
            .expect("cache lock")
            .entry(mask)
            .or_insert(value)
            .clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn v(coords: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(coords)
    }

    fn xy_plane() -> Subspace {
        Subspace::from_span(&[v(&[1.0, 0.0, 0.0]), v(&[1.0, 1.0, 0.0])], 3).unwrap()
    }

    #[test]
    fn span_reduces_dependent_sets() {
        let s = Subspace::from_span(
            &[v(&[1.0, 2.0, 0.0]), v(&[2.0, 4.0, 0.0]), v(&[0.0, 0.0, 0.0])],
            3,
        )
        .unwrap();
        assert_eq!(s.dim(), 1);
        assert!(s.gram_defect() <= TOL_ORTHO);
        assert!(s.contains(&v(&[3.0, 6.0, 0.0]), 1e-12));
    }

    #[test]
    fn span_drops_directions_below_rank_tolerance() {
        // Second vector differs from the first by 1e-13 ≪ TOL_RANK.
        let s = Subspace::from_span(&[v(&[1.0, 0.0]), v(&[1.0, 1e-13])], 2).unwrap();
        assert_eq!(s.dim(), 1);
        // While 1e-6 ≫ TOL_RANK survives.
        let s = Subspace::from_span(&[v(&[1.0, 0.0]), v(&[1.0, 1e-6])], 2).unwrap();
        assert_eq!(s.dim(), 2);
    }

    #[test]
    fn empty_and_zero_spans_give_the_trivial_subspace() {
        let s = Subspace::from_span(&[], 4).unwrap();
        assert_eq!((s.ambient_dim(), s.dim()), (4, 0));
        let s = Subspace::from_span(&[v(&[0.0, 0.0])], 2).unwrap();
        assert_eq!(s.dim(), 0);
        assert_eq!(s.distance(&v(&[3.0, 4.0])).unwrap(), 5.0);
    }

    #[test]
    fn projection_onto_coordinate_plane_is_exact() {
        let s = xy_plane();
        assert_eq!(s.dim(), 2);
        let p = s.project(&v(&[1.0, 2.0, 3.0])).unwrap();
        assert_abs_diff_eq!(p, v(&[1.0, 2.0, 0.0]), epsilon = 1e-12);
        let p = s.project(&v(&[0.0, 0.0, 5.0])).unwrap();
        assert_abs_diff_eq!(p.norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn distance_and_relative_distance_match_hand_values() {
        let s = xy_plane();
        let x = v(&[1.0, 2.0, 2.0]);
        // ‖x‖ = 3 and the residual is the z-component.
        assert_abs_diff_eq!(s.distance(&x).unwrap(), 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.relative_distance(&x).unwrap(), 2.0 / 3.0, epsilon = 1e-12);
        // Convention at the origin.
        assert_eq!(s.relative_distance(&v(&[0.0; 3])).unwrap(), 0.0);
        // Clamped to [0, 1] even for vectors orthogonal to the subspace.
        assert_eq!(s.relative_distance(&v(&[0.0, 0.0, 7.0])).unwrap(), 1.0);
    }

    #[test]
    fn relaxed_projection_endpoints_and_reflection() {
        let s = xy_plane();
        let x = v(&[1.0, -2.0, 2.0]);
        assert_abs_diff_eq!(s.relaxed_project(0.0, &x).unwrap(), x, epsilon = 0.0);
        assert_abs_diff_eq!(
            s.relaxed_project(1.0, &x).unwrap(),
            s.project(&x).unwrap(),
            epsilon = 0.0
        );
        let reflected = s.relaxed_project(2.0, &x).unwrap();
        assert_abs_diff_eq!(reflected, v(&[1.0, -2.0, -2.0]), epsilon = 1e-12);
        assert_abs_diff_eq!(reflected.norm(), x.norm(), epsilon = 1e-12);
        assert!(matches!(
            s.relaxed_project(2.5, &x),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn relaxed_projection_identities_hold_on_random_data() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(314159);
        for _ in 0..500 {
            let d = rng.random_range(2..=8usize);
            let k = rng.random_range(1..d);
            let cols: Vec<DVector<f64>> = (0..k)
                .map(|_| DVector::from_fn(d, |_, _| rng.random_range(-1.0..1.0)))
                .collect();
            let s = Subspace::from_span(&cols, d).unwrap();
            let x = DVector::from_fn(d, |_, _| rng.random_range(-1.0..1.0));
            let lambda = rng.random_range(0.0..=2.0);
            let px = s.project(&x).unwrap();
            let plx = s.relaxed_project(lambda, &x).unwrap();
            let dist = s.distance(&x).unwrap();
            // ‖x − P_λx‖ = λ‖x − Px‖
            assert_abs_diff_eq!((&x - &plx).norm(), lambda * dist, epsilon = 1e-12);
            // ‖P_λx‖² = ‖Px‖² + (1 − λ)²‖x − Px‖²
            assert_abs_diff_eq!(
                plx.norm_squared(),
                px.norm_squared() + (1.0 - lambda).powi(2) * dist * dist,
                epsilon = 1e-10
            );
            // ‖x‖² − ‖P_λx‖² = λ(2 − λ)‖x − Px‖²
            assert_abs_diff_eq!(
                x.norm_squared() - plx.norm_squared(),
                lambda * (2.0 - lambda) * dist * dist,
                epsilon = 1e-10
            );
            // Projection is idempotent.
            let ppx = s.project(&px).unwrap();
            assert_abs_diff_eq!(ppx, px, epsilon = 1e-10);
        }
    }

    #[test]
    fn intersection_of_coordinate_planes_is_an_axis() {
        let xy = xy_plane();
        let yz = Subspace::from_span(&[v(&[0.0, 1.0, 0.0]), v(&[0.0, 0.0, 1.0])], 3).unwrap();
        let axis = xy.intersect(&yz).unwrap();
        assert_eq!(axis.dim(), 1);
        assert!(axis.contains(&v(&[0.0, 1.0, 0.0]), 1e-12));
        assert!(axis.distance(&v(&[0.0, 1.0, 0.0])).unwrap() <= 1e-10);
    }

    #[test]
    fn intersection_of_random_planes_through_a_common_line_is_tight() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2718);
        for _ in 0..50 {
            let d = 6;
            let shared = DVector::from_fn(d, |_, _| rng.random_range(-1.0..1.0));
            let mk = |rng: &mut rand_chacha::ChaCha8Rng| {
                let a = DVector::from_fn(d, |_, _| rng.random_range(-1.0..1.0));
                let b = DVector::from_fn(d, |_, _| rng.random_range(-1.0..1.0));
                Subspace::from_span(&[shared.clone(), a, b], d).unwrap()
            };
            let v1 = mk(&mut rng);
            let v2 = mk(&mut rng);
            let x = v1.intersect(&v2).unwrap();
            assert_eq!(x.dim(), 1, "two generic 3-spaces in ℝ⁶ sharing a line");
            // Membership of the engineered shared direction, relative scale.
            let rel = x.distance(&shared).unwrap() / shared.norm();
            assert!(rel <= 1e-10, "membership residual {rel}");
            // The recovered basis direction really lies in both members.
            let b0 = x.basis().column(0).into_owned();
            assert!(v1.distance(&b0).unwrap() <= 1e-10);
            assert!(v2.distance(&b0).unwrap() <= 1e-10);
        }
    }

    #[test]
    fn generic_lines_do_not_intersect() {
        let l1 = Subspace::from_span(&[v(&[1.0, 0.2, 0.3])], 3).unwrap();
        let l2 = Subspace::from_span(&[v(&[0.5, -1.0, 0.8])], 3).unwrap();
        assert_eq!(l1.intersect(&l2).unwrap().dim(), 0);
    }

    #[test]
    fn intersection_with_full_and_zero_spaces() {
        let s = xy_plane();
        let full = Subspace::full(3);
        let zero = Subspace::zero(3);
        assert!(s.intersect(&full).unwrap().same_span(&s, 1e-12));
        assert_eq!(s.intersect(&zero).unwrap().dim(), 0);
        assert_eq!(full.intersect(&zero).unwrap().dim(), 0);
    }

    #[test]
    fn complement_of_a_plane_is_its_normal_line() {
        let s = xy_plane();
        let c = s.complement();
        assert_eq!(c.dim(), 1);
        assert!(c.contains(&v(&[0.0, 0.0, 1.0]), 1e-12));
        // Complement is orthogonal to the subspace at machine precision.
        let cross = s.basis().tr_mul(c.basis());
        assert!(cross.iter().all(|&x| x.abs() <= TOL_ORTHO));
        assert_eq!(Subspace::zero(5).complement().dim(), 5);
        assert_eq!(Subspace::full(5).complement().dim(), 0);
    }

    #[test]
    fn system_intersections_fold_deterministically() {
        let xy = xy_plane();
        let yz = Subspace::from_span(&[v(&[0.0, 1.0, 0.0]), v(&[0.0, 0.0, 1.0])], 3).unwrap();
        let xz = Subspace::from_span(&[v(&[1.0, 0.0, 0.0]), v(&[0.0, 0.0, 1.0])], 3).unwrap();
        let sys = SubspaceSystem::new(vec![xy, yz, xz]).unwrap();

        let pair = sys.intersection(&[0, 2]).unwrap();
        assert_eq!(pair.dim(), 1);
        assert!(pair.contains(&v(&[1.0, 0.0, 0.0]), 1e-12));

        let triple = sys.intersection(&[0, 1, 2]).unwrap();
        assert_eq!(triple.dim(), 0);

        // Duplicates collapse; order does not matter.
        let dup = sys.intersection(&[2, 0, 2, 0]).unwrap();
        assert!(dup.same_span(&pair, 1e-12));

        // The empty mask is the whole space by convention.
        assert_eq!(sys.intersection_mask(0).unwrap().dim(), 3);

        // Errors.
        assert!(matches!(
            sys.intersection(&[]),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(
            sys.intersection(&[3]),
            Err(Error::IndexOutOfRange(_))
        ));
        assert!(matches!(
            sys.intersection_mask(1 << 3),
            Err(Error::IndexOutOfRange(_))
        ));
    }

    #[test]
    fn dimension_mismatches_are_rejected() {
        let s = xy_plane();
        assert!(matches!(
            s.project(&v(&[1.0, 2.0])),
            Err(Error::InvalidInput(_))
        ));
        let other = Subspace::from_span(&[v(&[1.0, 0.0])], 2).unwrap();
        assert!(matches!(s.intersect(&other), Err(Error::InvalidInput(_))));
        assert!(matches!(
            Subspace::from_span(&[v(&[1.0, 0.0])], 3),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(
            SubspaceSystem::new(vec![xy_plane(), other]),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(
            SubspaceSystem::new(vec![]),
            Err(Error::InvalidInput(_))
        ));
    }
}
