//! Optimal eigenvalue bounds for symmetric definite pencils `K - λM` from
//! trial subspaces: Ritz, harmonic and dual harmonic Ritz values, right- and
//! left-definite Lehmann inclusion intervals, Kahan's bordered formulation
//! with Goerisch's relaxation for inexact solves, and a Lanczos harness that
//! tracks all of them along a Krylov sequence.

// `!(x > 0.0)` is used on purpose so that NaN takes the rejecting branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod kahan;
pub mod lanczos;
pub mod lehmann;
pub mod oracle;
pub mod pencil;
pub mod ritz;
pub mod verify;

pub use error::{BoundsError, Result};
pub use kahan::{
    block_lanczos_step, conjugate_gradient, exact_w, goerisch_left, goerisch_w, kahan_left, kahan_right,
    kahan_right_spectrum, BlockLanczosData, GoerischW, WProvenance,
};
pub use lanczos::{
    bauer_fike_check, convergence_history, lanczos, pencil_krylov_basis, pencil_lanczos, shift_invert_ritz,
    shift_labels, tridiagonal_lehmann, ConvergenceHistory, HistoryConfig, HistoryStep, LanczosFactorization,
    SymmetricOperator,
};
pub use lehmann::{
    coupled_inertia, inclusion_intervals, left_lehmann, left_right_compare, limit_consistency, right_lehmann, temple,
    Bound, ComparisonReport, InclusionStatement, LimitReport, ShiftedBounds, Side, Variant,
};
pub use pencil::{
    inertia, j_matrices, m_orthonormalize, schwarz_matrices, solve_definite_gep, EdgeLabeledValues, GepSolution,
    Inertia, JMatrices, Pencil, SchwarzMatrices, SubspaceBasis,
};
pub use ritz::{
    dual_harmonic_ritz, harmonic_ritz, harmonic_ritz_definite, optimality_witness, ritz, OptimalityWitness, RitzKind,
    RitzResult,
};
pub use verify::{run_verification, PropertyOutcome, VerifyConfig, VerifyReport};
