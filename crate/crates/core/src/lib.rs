//! Douglas-Rachford splitting for the inclusion `0 ∈ A(x) + B(x)` with maximal
//! monotone `A`, `B`, in three flavours:
//!
//! - an exact baseline (both proximal subproblems solved exactly),
//! - a fully inexact method where both subproblems are solved up to a relative
//!   error criterion, with a data-driven under-relaxation factor,
//! - a semi-inexact method where the first subproblem is exact and only the
//!   second carries error.
//!
//! Inexact proximal solves are represented as [`certify::Certificate`]s: a
//! candidate point, a candidate operator value, an enlargement bound `eps`
//! certifying set-valued membership, and the residual of the proximal equation.
//! The [`operators`] catalog ships computable enlargement-gap oracles so every
//! certificate can be checked, and [`diagnostics`] replays the Fejér and bound
//! inequalities the convergence theory rests on against recorded traces.
//!
//! [`problems`] generates test instances (affine pairs, lasso, box feasibility)
//! together with extended solutions computed by methods entirely disjoint from
//! Douglas-Rachford, so solver tests are non-circular.

pub mod certify;
pub mod diagnostics;
pub mod drsolve;
pub mod inner;
pub mod operators;
pub mod problems;
pub mod space;

pub use certify::{Certificate, ErrorLedger};
pub use drsolve::{IterationRecord, RunStatus, RunTrace, SolverConfig, Variant};
pub use inner::{CertificateStream, RefinementMode, RefinementSchedule};
pub use operators::{ExtendedSolution, MonotoneOp, OperatorError};
pub use problems::{Family, ProblemInstance};
pub use space::{PairPoint, VecH};
