//! Certificate data model and the arithmetic of the per-iteration error
//! quantities: residuals, the aggregate error `δ`, the aggregate progress
//! `ρ`, the relative-error acceptance criteria, and the error bound tying an
//! inexact solve to the exact resolvent.

use crate::operators::MonotoneOp;
use crate::space::{inner, norm_sq, VecH};

/// Slack applied to inequality checks at floating point.
pub const CHECK_SLACK: f64 = 1e-9;

/// One inexact proximal solve for a given `(operator, λ, ζ)`: a candidate
/// point, a candidate operator value, and an enlargement bound `eps`
/// certifying `value ∈ op^[eps](point)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub point: VecH,
    pub value: VecH,
    pub eps: f64,
    pub lambda: f64,
    /// The prox target: the solve aims at `λ·value + point = zeta`.
    pub zeta: VecH,
}

impl Certificate {
    pub fn new(point: VecH, value: VecH, eps: f64, lambda: f64, zeta: VecH) -> Self {
        assert!(eps >= 0.0, "certificate enlargement must be nonnegative");
        assert!(lambda > 0.0, "certificate lambda must be positive");
        assert_eq!(point.len(), value.len(), "certificate: point/value dimension mismatch");
        assert_eq!(point.len(), zeta.len(), "certificate: point/target dimension mismatch");
        Self { point, value, eps, lambda, zeta }
    }

    /// Residual of the proximal equation: `λ·value + point − zeta`.
    pub fn residual(&self) -> VecH {
        &self.value * self.lambda + &self.point - &self.zeta
    }

    pub fn residual_norm(&self) -> f64 {
        self.residual().norm()
    }

    /// Membership check `value ∈ op^[eps](point)` through the gap oracle.
    pub fn is_valid_for(&self, op: &MonotoneOp) -> bool {
        op.enlargement_gap(&self.point, &self.value) <= self.eps + CHECK_SLACK
    }
}

/// Per-iteration error ledger. For fully inexact iterations
/// `delta = r_norm² + s_norm² + 2λ(ε+μ)`; for semi-inexact ones
/// `delta = s_norm² + 2λμ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorLedger {
    pub delta: f64,
    pub rho: f64,
    pub r_norm: f64,
    pub s_norm: f64,
}

/// Aggregate progress `ρ = ‖λ(a+b)‖² + ‖x−y‖²`.
pub fn rho(a: &VecH, b: &VecH, x: &VecH, y: &VecH, lambda: f64) -> f64 {
    assert!(lambda > 0.0);
    norm_sq(&((a + b) * lambda)) + norm_sq(&(x - y))
}

/// Aggregate error of a fully inexact iteration:
/// `‖r‖² + ‖s‖² + 2λ(ε+μ)` with `r`, `s` the two proximal residuals.
///
/// Both certificates must share `λ`; the caller wires
/// `cert_b.zeta = cert_a.point + λ·w_prev`.
pub fn delta_fully_inexact(cert_a: &Certificate, cert_b: &Certificate) -> f64 {
    assert_eq!(
        cert_a.lambda, cert_b.lambda,
        "fully inexact delta: certificates must share lambda"
    );
    norm_sq(&cert_a.residual())
        + norm_sq(&cert_b.residual())
        + 2.0 * cert_a.lambda * (cert_a.eps + cert_b.eps)
}

/// Aggregate error of a semi-inexact iteration (the first subproblem exact):
/// `‖s‖² + 2λμ`.
pub fn delta_semi_inexact(cert_b: &Certificate) -> f64 {
    norm_sq(&cert_b.residual()) + 2.0 * cert_b.lambda * cert_b.eps
}

/// Fully inexact acceptance: `δ ≤ (σ²/4)·ρ`.
pub fn criterion_fully_inexact(delta: f64, rho: f64, sigma: f64) -> bool {
    debug_assert!(0.0 < sigma && sigma < 1.0);
    delta <= sigma * sigma / 4.0 * rho
}

/// Semi-inexact acceptance: `δ ≤ σ²·ρ`.
pub fn criterion_semi_inexact(delta: f64, rho: f64, sigma: f64) -> bool {
    debug_assert!(0.0 < sigma && sigma < 1.0);
    delta <= sigma * sigma * rho
}

/// Error bound of an inexact solve against the exact resolvent: with
/// `(z*, v*)` the exact solution of the proximal system at `ζ`,
/// `‖λ(v*−v)‖² + ‖z*−z‖² ≤ ‖r‖² + 2λε` (checked with 1e-9 slack).
pub fn error_bound_holds(op: &MonotoneOp, lambda: f64, zeta: &VecH, cert: &Certificate) -> bool {
    let (z_star, v_star) = op.exact_resolvent(lambda, zeta);
    let lhs = norm_sq(&((&v_star - &cert.value) * lambda)) + norm_sq(&(&z_star - &cert.point));
    let rhs = norm_sq(&cert.residual()) + 2.0 * lambda * cert.eps;
    lhs <= rhs + CHECK_SLACK
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::MonotoneOp;
    use nalgebra::DMatrix;

    fn vec_h(v: &[f64]) -> VecH {
        VecH::from_column_slice(v)
    }

    fn cert(point: &[f64], value: &[f64], eps: f64, lambda: f64, zeta: &[f64]) -> Certificate {
        Certificate::new(vec_h(point), vec_h(value), eps, lambda, vec_h(zeta))
    }

    #[test]
    fn residual_of_exact_resolvent_output_vanishes() {
        let op = MonotoneOp::identity(1);
        let zeta = vec_h(&[1.0]);
        let (z, v) = op.exact_resolvent(1.0, &zeta);
        let c = Certificate::new(z, v, 0.0, 1.0, zeta);
        assert!(c.residual_norm() <= 1e-12);
    }

    #[test]
    fn residual_hand_values() {
        let c = cert(&[0.6], &[0.6], 0.0, 1.0, &[1.0]);
        assert!((c.residual()[0] - 0.2).abs() <= 1e-15);

        let c = cert(&[1.0, 0.0], &[0.0, 1.0], 0.0, 2.0, &[1.0, 2.0]);
        assert_eq!(c.residual(), vec_h(&[0.0, 0.0]));
    }

    #[test]
    fn rho_hand_values() {
        let a = vec_h(&[0.5]);
        assert_eq!(rho(&a, &(-&a), &vec_h(&[2.0]), &vec_h(&[2.0]), 1.0), 0.0);
        // first exact step of the 1D identity problem
        assert_eq!(rho(&vec_h(&[0.5]), &vec_h(&[0.25]), &vec_h(&[0.25]), &vec_h(&[0.5]), 1.0), 0.625);
        assert_eq!(rho(&vec_h(&[1.0]), &vec_h(&[0.0]), &vec_h(&[1.0]), &vec_h(&[0.0]), 2.0), 5.0);
    }

    #[test]
    fn delta_fully_inexact_hand_values() {
        let exact_a = cert(&[0.5], &[0.5], 0.0, 1.0, &[1.0]);
        let exact_b = cert(&[0.25], &[0.25], 0.0, 1.0, &[0.5]);
        assert!(delta_fully_inexact(&exact_a, &exact_b) <= 1e-30);

        // r = 0.2, s = 0, eps = mu = 0, lambda = 1 -> 0.04
        let a = cert(&[0.6], &[0.6], 0.0, 1.0, &[1.0]);
        let b = cert(&[0.25], &[0.25], 0.0, 1.0, &[0.5]);
        assert!((delta_fully_inexact(&a, &b) - 0.04).abs() <= 1e-15);

        // r = 0, s = 0.1, eps = 0, mu = 0.005, lambda = 2 -> 0.01 + 0.02
        let a = cert(&[1.0], &[0.5], 0.0, 2.0, &[2.0]);
        let b = cert(&[0.1], &[0.0], 0.005, 2.0, &[0.0]);
        assert!((delta_fully_inexact(&a, &b) - 0.03).abs() <= 1e-15);
    }

    #[test]
    #[should_panic(expected = "share lambda")]
    fn delta_fully_inexact_rejects_mismatched_lambda() {
        let a = cert(&[0.0], &[0.0], 0.0, 1.0, &[0.0]);
        let b = cert(&[0.0], &[0.0], 0.0, 2.0, &[0.0]);
        delta_fully_inexact(&a, &b);
    }

    #[test]
    fn delta_semi_inexact_hand_values() {
        let exact = cert(&[0.25], &[0.25], 0.0, 1.0, &[0.5]);
        assert!(delta_semi_inexact(&exact) <= 1e-30);

        let b = cert(&[0.3], &[0.0], 0.0, 1.0, &[0.0]);
        assert!((delta_semi_inexact(&b) - 0.09).abs() <= 1e-15);

        let b = cert(&[0.0], &[0.0], 0.01, 0.5, &[0.0]);
        assert!((delta_semi_inexact(&b) - 0.01).abs() <= 1e-15);
    }

    #[test]
    fn criteria_boundaries() {
        assert!(criterion_fully_inexact(0.0, 0.0, 0.5));
        assert!(criterion_fully_inexact(0.0625, 1.0, 0.5));
        assert!(!criterion_fully_inexact(0.07, 1.0, 0.5));

        assert!(criterion_semi_inexact(0.0, 7.0, 0.5));
        assert!(criterion_semi_inexact(0.25, 1.0, 0.5));
        assert!(!criterion_semi_inexact(0.26, 1.0, 0.5));
    }

    #[test]
    fn error_bound_identity_hand_example() {
        let op = MonotoneOp::identity(1);
        let zeta = vec_h(&[0.0]);
        let c = cert(&[0.1], &[0.1], 0.0, 1.0, &[0.0]);
        // LHS 0.02 <= RHS 0.04
        assert!(error_bound_holds(&op, 1.0, &zeta, &c));
        assert!((c.residual_norm() - 0.2).abs() <= 1e-15);
    }

    #[test]
    fn error_bound_exact_certificate_is_tight() {
        let op = MonotoneOp::identity(2);
        let zeta = vec_h(&[1.0, -1.0]);
        let (z, v) = op.exact_resolvent(1.0, &zeta);
        let c = Certificate::new(z, v, 0.0, 1.0, zeta.clone());
        assert!(error_bound_holds(&op, 1.0, &zeta, &c));
    }

    #[test]
    fn error_bound_random_affine_with_gap_enlargements() {
        // Perturb exact solves and certify with the gap oracle; the bound
        // must hold on every trial.
        let mut state = 0x9E37_79B9_7F4A_7C15u64;
        let mut next = move || {
            state ^= state >> 12;
            state ^= state << 25;
            state ^= state >> 27;
            (state.wrapping_mul(0x2545_F491_4F6C_DD1D) >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..1000 {
            let dim = 1 + (next() * 5.0) as usize;
            let raw = DMatrix::from_fn(dim, dim, |_, _| 2.0 * next() - 1.0);
            let sym = &raw * raw.transpose() + DMatrix::identity(dim, dim) * 0.2;
            let shift = VecH::from_fn(dim, |_, _| 2.0 * next() - 1.0);
            let op = MonotoneOp::affine_pd(sym, None, shift).unwrap();
            let lambda = 0.1 + 3.0 * next();
            let zeta = VecH::from_fn(dim, |_, _| 4.0 * next() - 2.0);
            let (z_star, v_star) = op.exact_resolvent(lambda, &zeta);
            let z = &z_star + VecH::from_fn(dim, |_, _| 0.4 * next() - 0.2);
            let v = &v_star + VecH::from_fn(dim, |_, _| 0.4 * next() - 0.2);
            let eps = op.enlargement_gap(&z, &v);
            assert!(eps.is_finite());
            let c = Certificate::new(z, v, eps, lambda, zeta.clone());
            assert!(error_bound_holds(&op, lambda, &zeta, &c));
        }
    }

    #[test]
    fn delta_variants_are_consistent() {
        // Adding the exact-side terms to a semi-inexact ledger reproduces the
        // fully inexact delta.
        let a = cert(&[0.55], &[0.62], 0.003, 1.5, &[1.2]);
        let b = cert(&[0.2], &[0.3], 0.007, 1.5, &[0.9]);
        let lhs = delta_fully_inexact(&a, &b);
        let rhs = delta_semi_inexact(&b) + norm_sq(&a.residual()) + 2.0 * a.lambda * a.eps;
        assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
    }

    #[test]
    fn aggregates_are_nonnegative() {
        let a = cert(&[0.1, -0.2], &[0.4, 0.0], 0.01, 0.7, &[1.0, 1.0]);
        let b = cert(&[-0.3, 0.5], &[0.2, -0.1], 0.02, 0.7, &[0.0, 0.5]);
        assert!(delta_fully_inexact(&a, &b) >= 0.0);
        assert!(delta_semi_inexact(&b) >= 0.0);
        assert!(
            rho(&a.value, &b.value, &b.point, &a.point, 0.7) >= 0.0
        );
    }
}
