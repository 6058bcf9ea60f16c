//! Finite-dimensional real Hilbert space primitives shared by all modules.
//!
//! The ambient space is `R^n` with the standard inner product, realized as
//! dense `f64` coordinate vectors. Values are immutable after construction and
//! safe to share across threads. All test-suite comparisons use relative
//! tolerance 1e-9 unless an operation states otherwise.

use nalgebra::DVector;

/// Element of the Hilbert space: a dense real coordinate vector.
pub type VecH = DVector<f64>;

/// Inner product `Σ u_i v_i`. Panics on dimension mismatch.
pub fn inner(u: &VecH, v: &VecH) -> f64 {
    assert_eq!(u.len(), v.len(), "inner: dimension mismatch {} vs {}", u.len(), v.len());
    u.dot(v)
}

/// Squared norm `⟨u, u⟩`.
pub fn norm_sq(u: &VecH) -> f64 {
    u.dot(u)
}

/// True when every coordinate is finite (no NaN/Inf).
pub fn all_finite(u: &VecH) -> bool {
    u.iter().all(|x| x.is_finite())
}

/// The composite iterate `p = (z, λw)` used in all Fejér arguments.
///
/// The second block stores `λw`, not `w`, because the convergence lemmas
/// measure distance in `(z, λw)` coordinates; this avoids rescaling at every
/// comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct PairPoint {
    pub z: VecH,
    pub lw: VecH,
}

impl PairPoint {
    pub fn new(z: VecH, lw: VecH) -> Self {
        assert_eq!(z.len(), lw.len(), "PairPoint: block dimension mismatch");
        Self { z, lw }
    }

    /// Builds `(z, λw)` from the natural variables.
    pub fn from_zw(z: &VecH, w: &VecH, lambda: f64) -> Self {
        Self::new(z.clone(), w * lambda)
    }

    /// `‖z‖² + ‖λw‖²`, the canonical product-space squared norm.
    pub fn norm_sq(&self) -> f64 {
        norm_sq(&self.z) + norm_sq(&self.lw)
    }

    /// Squared distance to another pair point.
    pub fn dist_sq(&self, other: &PairPoint) -> f64 {
        norm_sq(&(&self.z - &other.z)) + norm_sq(&(&self.lw - &other.lw))
    }
}
