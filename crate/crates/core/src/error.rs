use thiserror::Error;

/// Errors raised by the bound computations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoundsError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix `{0}` is not symmetric")]
    NotSymmetric(&'static str),

    #[error("matrix `{0}` is not positive definite")]
    NotPositiveDefinite(&'static str),

    #[error("subspace basis is rank deficient (numerical rank {rank} < {expected})")]
    RankDeficient { rank: usize, expected: usize },

    #[error("stiffness matrix is singular")]
    SingularK,

    #[error("right-hand matrix of the harmonic Ritz pencil is not definite")]
    IndefiniteRightSide,

    #[error("invalid split: nu ({nu}) + pi ({pi}) must equal m ({m}) with both positive")]
    BadSplit { nu: usize, pi: usize, m: usize },

    #[error("shift {0} is (numerically) an eigenvalue of the pencil")]
    ShiftAtEigenvalue(f64),

    #[error("shift {0} coincides with a Ritz value and could not be perturbed away")]
    ShiftAtRitzValue(f64),

    #[error("shift must be positive for left-definite bordered forms, got {0}")]
    NonPositiveShift(f64),

    #[error("Temple's inequality needs p'(K - rho M)p < 0, got {0}")]
    WrongSide(f64),

    #[error("kappa must be a positive lower bound on the spectrum of K, got {0}")]
    BadKappa(f64),

    #[error("omega must be positive, got {0}")]
    BadOmega(f64),

    #[error("Lanczos start vector is zero")]
    ZeroStartVector,

    #[error("shifted matrix K - rho M is singular at rho = {0}")]
    SingularShiftedMatrix(f64),

    #[error("symmetric eigensolver did not converge")]
    EigenFailure,
}

pub type Result<T> = std::result::Result<T, BoundsError>;
