//! Error type shared by all solvers in this crate.

use thiserror::Error;

/// Failure modes surfaced by construction and solve routines.
///
/// Numerical quality problems that the drivers are expected to survive
/// (e.g. a rejected sweep point) are reported through result records, not
/// through this enum; `Error` is reserved for contract violations and
/// genuinely unusable output.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied parameter is outside the documented domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A dense linear system could not be factorized or solved.
    #[error("linear solve failed: {0}")]
    SingularSystem(String),

    /// A self-consistency check between a solve at resolution `n` and a
    /// verification solve on a refined grid did not meet the agreement
    /// tolerance (also used for diagnostic windows too thin to fit).
    #[error("solution unresolved at n = {n}: refinement disagreement {gap:.3e} exceeds {tol:.3e}")]
    Unresolved { n: usize, gap: f64, tol: f64 },
}
