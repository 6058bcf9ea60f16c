//! Catalog of maximal monotone operators on `R^n` with exact resolvents and
//! computable enlargement-gap oracles.
//!
//! The gap oracle `enlargement_gap(op, x, v)` returns a finite `G >= 0` with
//! `v ∈ op^[G](x)`, or `+inf` when no finite enlargement contains `(x, v)`.
//! For affine operators with symmetric positive semidefinite part the gap is
//! exact (`¼⟨d, M⁻¹d⟩` with `d = v − T(x)`, pseudoinverse when `M` is
//! singular); for subdifferential kinds the Fenchel gap
//! `g(x) + g*(v) − ⟨x, v⟩` is used, a valid over-estimate of the exact gap.
//! Sound certificates are all the callers need; how tight they are is the
//! caller's choice.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::space::{inner, VecH};

/// Relative tolerance for structural matrix checks (symmetry, skewness, PSD).
const STRUCT_TOL: f64 = 1e-12;

/// Relative mass threshold deciding whether a vector lies in the range of a
/// singular symmetric matrix.
const RANGE_TOL: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum OperatorError {
    #[error("matrix must be square, got {0}x{1}")]
    NotSquare(usize, usize),
    #[error("matrix is not symmetric (max deviation {0:.3e})")]
    NotSymmetric(f64),
    #[error("matrix is not positive semidefinite (eigenvalue {0:.3e})")]
    NotPositiveSemidefinite(f64),
    #[error("matrix is not skew-symmetric (max deviation {0:.3e})")]
    NotSkewSymmetric(f64),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("box bounds violate lower <= upper at coordinate {0}")]
    InvalidBox(usize),
    #[error("l1 weight must be positive, got {0}")]
    InvalidL1Weight(f64),
    #[error("identity coefficient must be nonnegative, got {0}")]
    InvalidIdentityCoefficient(f64),
}

/// Eigendecomposition of a symmetric PSD matrix, kept for pseudoinverse
/// applications and range tests.
#[derive(Debug, Clone)]
struct SymSpectrum {
    basis: DMatrix<f64>,
    eigs: DVector<f64>,
}

impl SymSpectrum {
    fn new(m: DMatrix<f64>) -> Result<Self, OperatorError> {
        let scale = m.amax().max(1.0);
        let eigen = nalgebra::SymmetricEigen::new(m);
        let min = eigen.eigenvalues.min();
        if min < -STRUCT_TOL * scale {
            return Err(OperatorError::NotPositiveSemidefinite(min));
        }
        let eigs = eigen.eigenvalues.map(|e| e.max(0.0));
        Ok(Self { basis: eigen.eigenvectors, eigs })
    }

    fn cutoff(&self) -> f64 {
        let max_eig = if self.eigs.is_empty() { 0.0 } else { self.eigs.max() };
        if max_eig > 0.0 {
            STRUCT_TOL * max_eig
        } else {
            f64::MIN_POSITIVE
        }
    }

    /// `¼⟨d, M⁺d⟩`, or `+inf` when `d` has a component outside `range(M)`.
    fn quarter_pinv_quadratic(&self, d: &VecH) -> f64 {
        let coeffs = self.basis.transpose() * d;
        let cut = self.cutoff();
        let mut quad = 0.0;
        let mut out_mass = 0.0;
        for (c, &lam) in coeffs.iter().zip(self.eigs.iter()) {
            if lam > cut {
                quad += c * c / lam;
            } else {
                out_mass += c * c;
            }
        }
        if out_mass.sqrt() > RANGE_TOL * (1.0 + d.norm()) {
            f64::INFINITY
        } else {
            0.25 * quad
        }
    }

    /// Least-norm solution of `M x = rhs`, or `None` when inconsistent.
    fn solve_in_range(&self, rhs: &VecH) -> Option<VecH> {
        let coeffs = self.basis.transpose() * rhs;
        let cut = self.cutoff();
        let mut out_mass = 0.0;
        let scaled = DVector::from_fn(coeffs.len(), |i, _| {
            if self.eigs[i] > cut {
                coeffs[i] / self.eigs[i]
            } else {
                out_mass += coeffs[i] * coeffs[i];
                0.0
            }
        });
        if out_mass.sqrt() > RANGE_TOL * (1.0 + rhs.norm()) {
            None
        } else {
            Some(&self.basis * scaled)
        }
    }
}

/// Affine operator `T(x) = (M + S)x + c` with `M` symmetric PSD, `S` skew.
#[derive(Debug, Clone)]
pub struct AffinePd {
    sym: DMatrix<f64>,
    skew: DMatrix<f64>,
    shift: DVector<f64>,
    spectrum: SymSpectrum,
}

impl AffinePd {
    pub fn new(
        sym: DMatrix<f64>,
        skew: Option<DMatrix<f64>>,
        shift: DVector<f64>,
    ) -> Result<Self, OperatorError> {
        let n = sym.nrows();
        if sym.ncols() != n {
            return Err(OperatorError::NotSquare(sym.nrows(), sym.ncols()));
        }
        if shift.len() != n {
            return Err(OperatorError::Dimension(format!(
                "shift has length {}, matrix is {n}x{n}",
                shift.len()
            )));
        }
        let scale = sym.amax().max(1.0);
        let asym = (&sym - sym.transpose()).amax();
        if asym > STRUCT_TOL * scale {
            return Err(OperatorError::NotSymmetric(asym));
        }
        let skew = match skew {
            Some(s) => {
                if s.nrows() != n || s.ncols() != n {
                    return Err(OperatorError::Dimension(format!(
                        "skew part is {}x{}, expected {n}x{n}",
                        s.nrows(),
                        s.ncols()
                    )));
                }
                let dev = (&s + s.transpose()).amax();
                if dev > STRUCT_TOL * s.amax().max(1.0) {
                    return Err(OperatorError::NotSkewSymmetric(dev));
                }
                s
            }
            None => DMatrix::zeros(n, n),
        };
        // Symmetrize to kill representation roundoff before factoring.
        let sym = (&sym + sym.transpose()) * 0.5;
        let spectrum = SymSpectrum::new(sym.clone())?;
        Ok(Self { sym, skew, shift, spectrum })
    }

    fn scaled(&self, factor: f64) -> Self {
        Self {
            sym: &self.sym * factor,
            skew: &self.skew * factor,
            shift: &self.shift * factor,
            spectrum: SymSpectrum {
                basis: self.spectrum.basis.clone(),
                eigs: &self.spectrum.eigs * factor,
            },
        }
    }

    /// `M + S`.
    pub fn full_matrix(&self) -> DMatrix<f64> {
        &self.sym + &self.skew
    }

    pub fn value(&self, x: &VecH) -> VecH {
        &self.sym * x + &self.skew * x + &self.shift
    }
}

/// Gradient of the quadratic `g(x) = ½‖Px − q‖²`.
#[derive(Debug, Clone)]
pub struct GradQuadratic {
    design: DMatrix<f64>,
    target: DVector<f64>,
    gram: DMatrix<f64>,
    lin: DVector<f64>,
    spectrum: SymSpectrum,
}

impl GradQuadratic {
    pub fn new(design: DMatrix<f64>, target: DVector<f64>) -> Result<Self, OperatorError> {
        if design.nrows() != target.len() {
            return Err(OperatorError::Dimension(format!(
                "design has {} rows, target has length {}",
                design.nrows(),
                target.len()
            )));
        }
        let gram = design.transpose() * &design;
        let gram = (&gram + gram.transpose()) * 0.5;
        let lin = design.transpose() * &target;
        let spectrum = SymSpectrum::new(gram.clone())?;
        Ok(Self { design, target, gram, lin, spectrum })
    }

    pub fn objective(&self, x: &VecH) -> f64 {
        0.5 * (&self.design * x - &self.target).norm_squared()
    }

    pub fn gradient(&self, x: &VecH) -> VecH {
        &self.gram * x - &self.lin
    }

    /// Fenchel conjugate `g*(v)`, `None` outside its domain.
    fn conjugate(&self, v: &VecH) -> Option<f64> {
        let rhs = v + &self.lin;
        let x_hat = self.spectrum.solve_in_range(&rhs)?;
        Some(inner(&x_hat, v) - self.objective(&x_hat))
    }

    /// Largest and smallest eigenvalues of `PᵀP` (for gradient-based inner
    /// engines).
    pub fn curvature_bounds(&self) -> (f64, f64) {
        if self.spectrum.eigs.is_empty() {
            (0.0, 0.0)
        } else {
            (self.spectrum.eigs.max(), self.spectrum.eigs.min())
        }
    }

    pub fn design(&self) -> &DMatrix<f64> {
        &self.design
    }

    pub fn target(&self) -> &DVector<f64> {
        &self.target
    }
}

/// Coordinate box `[lower_i, upper_i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxSet {
    pub lower: DVector<f64>,
    pub upper: DVector<f64>,
}

impl BoxSet {
    pub fn new(lower: DVector<f64>, upper: DVector<f64>) -> Result<Self, OperatorError> {
        if lower.len() != upper.len() {
            return Err(OperatorError::Dimension(format!(
                "box bounds have lengths {} and {}",
                lower.len(),
                upper.len()
            )));
        }
        for i in 0..lower.len() {
            if !(lower[i] <= upper[i]) {
                return Err(OperatorError::InvalidBox(i));
            }
        }
        Ok(Self { lower, upper })
    }

    pub fn contains(&self, x: &VecH) -> bool {
        (0..x.len()).all(|i| self.lower[i] <= x[i] && x[i] <= self.upper[i])
    }

    pub fn clamp(&self, x: &VecH) -> VecH {
        DVector::from_fn(x.len(), |i, _| x[i].clamp(self.lower[i], self.upper[i]))
    }

    /// Support function `Σ_i max(l_i v_i, u_i v_i)` (boxes are bounded, so
    /// this is always finite).
    pub fn support(&self, v: &VecH) -> f64 {
        (0..v.len())
            .map(|i| (self.lower[i] * v[i]).max(self.upper[i] * v[i]))
            .sum()
    }
}

/// A maximal monotone operator from the catalog. Every kind admits exact
/// resolvent evaluation; operators are immutable after construction and all
/// operations are pure.
#[derive(Debug, Clone)]
pub enum MonotoneOp {
    AffinePd(AffinePd),
    GradQuadratic(GradQuadratic),
    SubdiffL1 { tau: f64, dim: usize },
    NormalCone(BoxSet),
    /// `base + alpha·I` with `alpha >= 0`.
    SumWithIdentity { base: Box<MonotoneOp>, alpha: f64 },
}

impl MonotoneOp {
    pub fn affine_pd(
        sym: DMatrix<f64>,
        skew: Option<DMatrix<f64>>,
        shift: DVector<f64>,
    ) -> Result<Self, OperatorError> {
        Ok(Self::AffinePd(AffinePd::new(sym, skew, shift)?))
    }

    /// The identity operator `T(x) = x`.
    pub fn identity(dim: usize) -> Self {
        Self::AffinePd(
            AffinePd::new(DMatrix::identity(dim, dim), None, DVector::zeros(dim))
                .expect("identity matrix is symmetric PSD"),
        )
    }

    pub fn grad_quadratic(design: DMatrix<f64>, target: DVector<f64>) -> Result<Self, OperatorError> {
        Ok(Self::GradQuadratic(GradQuadratic::new(design, target)?))
    }

    pub fn subdiff_l1(tau: f64, dim: usize) -> Result<Self, OperatorError> {
        if !(tau > 0.0) {
            return Err(OperatorError::InvalidL1Weight(tau));
        }
        Ok(Self::SubdiffL1 { tau, dim })
    }

    pub fn normal_cone(lower: DVector<f64>, upper: DVector<f64>) -> Result<Self, OperatorError> {
        Ok(Self::NormalCone(BoxSet::new(lower, upper)?))
    }

    pub fn sum_with_identity(base: MonotoneOp, alpha: f64) -> Result<Self, OperatorError> {
        if !(alpha >= 0.0) {
            return Err(OperatorError::InvalidIdentityCoefficient(alpha));
        }
        Ok(Self::SumWithIdentity { base: Box::new(base), alpha })
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::AffinePd(op) => op.shift.len(),
            Self::GradQuadratic(op) => op.gram.nrows(),
            Self::SubdiffL1 { dim, .. } => *dim,
            Self::NormalCone(b) => b.lower.len(),
            Self::SumWithIdentity { base, .. } => base.dim(),
        }
    }

    /// `T(x)` for single-valued kinds, `None` otherwise.
    pub fn point_value(&self, x: &VecH) -> Option<VecH> {
        match self {
            Self::AffinePd(op) => Some(op.value(x)),
            Self::GradQuadratic(op) => Some(op.gradient(x)),
            Self::SubdiffL1 { .. } | Self::NormalCone(_) => None,
            Self::SumWithIdentity { base, alpha } => {
                base.point_value(x).map(|v| v + x * *alpha)
            }
        }
    }

    /// The element of `T(z)` minimizing the proximal residual
    /// `‖λv + z − ζ‖`. For set-valued kinds `z` must lie in the operator's
    /// domain.
    pub fn selection_min_residual(&self, z: &VecH, lambda: f64, zeta: &VecH) -> VecH {
        match self {
            Self::AffinePd(op) => op.value(z),
            Self::GradQuadratic(op) => op.gradient(z),
            Self::SubdiffL1 { tau, .. } => DVector::from_fn(z.len(), |i, _| {
                if z[i] > 0.0 {
                    *tau
                } else if z[i] < 0.0 {
                    -*tau
                } else {
                    ((zeta[i] - z[i]) / lambda).clamp(-*tau, *tau)
                }
            }),
            Self::NormalCone(b) => {
                debug_assert!(b.contains(z), "selection requested outside the box");
                DVector::from_fn(z.len(), |i, _| {
                    let ideal = (zeta[i] - z[i]) / lambda;
                    if b.lower[i] == b.upper[i] {
                        ideal
                    } else if z[i] <= b.lower[i] {
                        ideal.min(0.0)
                    } else if z[i] >= b.upper[i] {
                        ideal.max(0.0)
                    } else {
                        0.0
                    }
                })
            }
            Self::SumWithIdentity { base, alpha } => {
                let shifted = zeta - z * (lambda * *alpha);
                base.selection_min_residual(z, lambda, &shifted) + z * *alpha
            }
        }
    }

    /// Solves the proximal inclusion-equation system exactly:
    /// `v ∈ T(z)`, `λv + z − ζ = 0` (up to roundoff `≤ 1e-12·(1+‖ζ‖)`).
    pub fn exact_resolvent(&self, lambda: f64, zeta: &VecH) -> (VecH, VecH) {
        Resolvent::new(self, lambda).solve(zeta)
    }

    /// A computable `G(x, v) ≥ 0` with `v ∈ T^[G](x)`, `+inf` when membership
    /// fails for every finite enlargement.
    pub fn enlargement_gap(&self, x: &VecH, v: &VecH) -> f64 {
        assert_eq!(x.len(), self.dim(), "enlargement_gap: point dimension mismatch");
        assert_eq!(v.len(), self.dim(), "enlargement_gap: value dimension mismatch");
        match self {
            Self::AffinePd(op) => {
                let d = v - op.value(x);
                op.spectrum.quarter_pinv_quadratic(&d)
            }
            Self::GradQuadratic(op) => match op.conjugate(v) {
                None => f64::INFINITY,
                Some(gstar) => (op.objective(x) + gstar - inner(x, v)).max(0.0),
            },
            Self::SubdiffL1 { tau, .. } => {
                if v.iter().any(|&vi| vi.abs() > *tau) {
                    return f64::INFINITY;
                }
                let l1: f64 = x.iter().map(|xi| xi.abs()).sum();
                (*tau * l1 - inner(x, v)).max(0.0)
            }
            Self::NormalCone(b) => {
                if !b.contains(x) {
                    return f64::INFINITY;
                }
                (b.support(v) - inner(x, v)).max(0.0)
            }
            Self::SumWithIdentity { base, alpha } => {
                base.enlargement_gap(x, &(v - x * *alpha))
            }
        }
    }

    /// The operator `factor·T` (again in the catalog).
    pub fn scale(&self, factor: f64) -> MonotoneOp {
        assert!(factor > 0.0, "scale factor must be positive");
        match self {
            Self::AffinePd(op) => Self::AffinePd(op.scaled(factor)),
            Self::GradQuadratic(op) => {
                let s = factor.sqrt();
                Self::GradQuadratic(GradQuadratic {
                    design: &op.design * s,
                    target: &op.target * s,
                    gram: &op.gram * factor,
                    lin: &op.lin * factor,
                    spectrum: SymSpectrum {
                        basis: op.spectrum.basis.clone(),
                        eigs: &op.spectrum.eigs * factor,
                    },
                })
            }
            Self::SubdiffL1 { tau, dim } => Self::SubdiffL1 { tau: tau * factor, dim: *dim },
            // Normal cones are positively homogeneous: factor·N_C = N_C.
            Self::NormalCone(b) => Self::NormalCone(b.clone()),
            Self::SumWithIdentity { base, alpha } => Self::SumWithIdentity {
                base: Box::new(base.scale(factor)),
                alpha: alpha * factor,
            },
        }
    }
}

/// Checks the enlargement scaling identity `gap_{λT}(x, λv) = λ·gap_T(x, v)`
/// within 1e-9 relative (`+inf` on both sides also counts as agreement).
pub fn scaled_gap_identity_check(op: &MonotoneOp, x: &VecH, v: &VecH, lambda: f64) -> bool {
    assert!(lambda > 0.0);
    let lhs = op.scale(lambda).enlargement_gap(x, &(v * lambda));
    let rhs = lambda * op.enlargement_gap(x, v);
    if lhs.is_infinite() || rhs.is_infinite() {
        return lhs.is_infinite() && rhs.is_infinite();
    }
    (lhs - rhs).abs() <= 1e-9 * (1.0 + lhs.abs().max(rhs.abs()))
}

/// A pair `(z*, w*)` with `w* ∈ B(z*)` and `−w* ∈ A(z*)`; its first component
/// solves `0 ∈ A(z) + B(z)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedSolution {
    pub z: VecH,
    pub w: VecH,
}

impl ExtendedSolution {
    pub fn new(z: VecH, w: VecH) -> Self {
        assert_eq!(z.len(), w.len(), "ExtendedSolution: dimension mismatch");
        Self { z, w }
    }
}

/// Resolvent `(I + λT)⁻¹` with factorizations precomputed once per
/// `(operator, λ)` pair, for reuse across iterations.
pub struct Resolvent<'a> {
    op: &'a MonotoneOp,
    lambda: f64,
    factor: ResolventFactor<'a>,
}

enum ResolventFactor<'a> {
    /// LU of `I + λ(M+S)`; system `(I + λ(M+S)) z = ζ − λc`.
    Affine(nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>),
    /// LU of `I + λPᵀP`; system `(I + λPᵀP) z = ζ + λPᵀq`.
    Quadratic(nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>),
    /// Soft-thresholding / box clamping: no factorization needed.
    Direct,
    /// `(I + λ(T+αI))⁻¹ζ = (I + λ'T)⁻¹(ζ/(1+λα))` with `λ' = λ/(1+λα)`.
    Shifted { inner: Box<Resolvent<'a>>, contraction: f64 },
}

impl<'a> Resolvent<'a> {
    pub fn new(op: &'a MonotoneOp, lambda: f64) -> Self {
        assert!(lambda > 0.0, "resolvent parameter must be positive");
        let n = op.dim();
        let factor = match op {
            MonotoneOp::AffinePd(a) => {
                let system = DMatrix::identity(n, n) + a.full_matrix() * lambda;
                ResolventFactor::Affine(system.lu())
            }
            MonotoneOp::GradQuadratic(g) => {
                let system = DMatrix::identity(n, n) + &g.gram * lambda;
                ResolventFactor::Quadratic(system.lu())
            }
            MonotoneOp::SubdiffL1 { .. } | MonotoneOp::NormalCone(_) => ResolventFactor::Direct,
            MonotoneOp::SumWithIdentity { base, alpha } => {
                let contraction = 1.0 / (1.0 + lambda * alpha);
                ResolventFactor::Shifted {
                    inner: Box::new(Resolvent::new(base, lambda * contraction)),
                    contraction,
                }
            }
        };
        Self { op, lambda, factor }
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn op(&self) -> &'a MonotoneOp {
        self.op
    }

    /// Returns `(z, v)` with `v ∈ T(z)` and `λv + z = ζ` up to roundoff.
    pub fn solve(&self, zeta: &VecH) -> (VecH, VecH) {
        assert_eq!(zeta.len(), self.op.dim(), "resolvent: target dimension mismatch");
        match (&self.factor, self.op) {
            (ResolventFactor::Affine(lu), MonotoneOp::AffinePd(a)) => {
                let rhs = zeta - &a.shift * self.lambda;
                let z = lu.solve(&rhs).expect("I + lambda*(M+S) is invertible for PSD M");
                let v = a.value(&z);
                (z, v)
            }
            (ResolventFactor::Quadratic(lu), MonotoneOp::GradQuadratic(g)) => {
                let rhs = zeta + &g.lin * self.lambda;
                let z = lu.solve(&rhs).expect("I + lambda*PᵀP is invertible");
                let v = g.gradient(&z);
                (z, v)
            }
            (ResolventFactor::Direct, MonotoneOp::SubdiffL1 { tau, .. }) => {
                let shrink = self.lambda * tau;
                let mut z = VecH::zeros(zeta.len());
                let mut v = VecH::zeros(zeta.len());
                for i in 0..zeta.len() {
                    if zeta[i] > shrink {
                        z[i] = zeta[i] - shrink;
                        v[i] = *tau;
                    } else if zeta[i] < -shrink {
                        z[i] = zeta[i] + shrink;
                        v[i] = -*tau;
                    } else {
                        z[i] = 0.0;
                        v[i] = zeta[i] / self.lambda;
                    }
                }
                (z, v)
            }
            (ResolventFactor::Direct, MonotoneOp::NormalCone(b)) => {
                let z = b.clamp(zeta);
                let v = (zeta - &z) / self.lambda;
                (z, v)
            }
            (ResolventFactor::Shifted { inner, contraction }, MonotoneOp::SumWithIdentity { alpha, .. }) => {
                let (z, u) = inner.solve(&(zeta * *contraction));
                let v = &u + &z * *alpha;
                (z, v)
            }
            _ => unreachable!("factor kind always matches operator kind"),
        }
    }
}
