//! Rayleigh–Ritz values of `K - λM` on a trial subspace and the two harmonic
//! variants obtained from the equivalent problems `KM⁻¹Kx = λKx` and
//! `Mx = λMK⁻¹Mx`.

use nalgebra::{DMatrix, DVector};

use crate::error::{BoundsError, Result};
use crate::pencil::{
    schwarz_h0, schwarz_h1, schwarz_h2, schwarz_h3, solve_definite_gep, symmetrize, EdgeLabeledValues, Pencil,
    SubspaceBasis,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RitzKind {
    Ritz,
    Harmonic,
    DualHarmonic,
}

impl RitzKind {
    pub fn name(self) -> &'static str {
        match self {
            RitzKind::Ritz => "ritz",
            RitzKind::Harmonic => "harmonic",
            RitzKind::DualHarmonic => "dual",
        }
    }
}

#[derive(Clone, Debug)]
pub struct RitzResult {
    pub kind: RitzKind,
    pub values: EdgeLabeledValues,
    /// `M`-normalized vectors `u = P y`, one column per ascending value.
    pub vectors: DMatrix<f64>,
    /// `false` when `K` is indefinite: harmonic values are then no longer
    /// inner bounds to the outer eigenvalues.
    pub outer_bounds_guaranteed: bool,
}

/// Scales each column to unit `M`-norm and makes its largest-magnitude entry positive.
fn normalize_columns(u: &mut DMatrix<f64>, m: &DMatrix<f64>) {
    for mut col in u.column_iter_mut() {
        let owned = col.clone_owned();
        let norm = owned.dot(&(m * &owned)).max(0.0).sqrt();
        if norm > 0.0 {
            col /= norm;
        }
        let pivot = col
            .iter()
            .copied()
            .fold(0.0f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
        if pivot < 0.0 {
            col.neg_mut();
        }
    }
}

fn finish(
    kind: RitzKind,
    pencil: &Pencil,
    basis: &SubspaceBasis,
    values: EdgeLabeledValues,
    y: &DMatrix<f64>,
    outer_bounds_guaranteed: bool,
) -> RitzResult {
    let mut vectors = basis.matrix() * y;
    normalize_columns(&mut vectors, pencil.m());
    RitzResult {
        kind,
        values,
        vectors,
        outer_bounds_guaranteed,
    }
}

/// Eigenpairs of `PᵗKP y = Λ PᵗMP y`.
pub fn ritz(pencil: &Pencil, basis: &SubspaceBasis) -> Result<RitzResult> {
    basis.check_against(pencil)?;
    let p = basis.matrix();
    let sol =
        solve_definite_gep(&schwarz_h1(pencil, p), &schwarz_h2(pencil, p)).map_err(|_| BoundsError::RankDeficient {
            rank: 0,
            expected: basis.dim(),
        })?;
    Ok(finish(RitzKind::Ritz, pencil, basis, sol.values, &sol.vectors, true))
}

/// Eigenpairs of `PᵗKM⁻¹KP y = Λ̃ PᵗKP y`.
///
/// With `K` positive definite this is a definite pencil. Otherwise the
/// reciprocal pencil `PᵗKP y = Λ̃⁻¹ PᵗKM⁻¹KP y` is solved instead and the
/// result is marked as not guaranteeing outer bounds.
pub fn harmonic_ritz(pencil: &Pencil, basis: &SubspaceBasis) -> Result<RitzResult> {
    match harmonic_ritz_definite(pencil, basis) {
        Err(BoundsError::IndefiniteRightSide) => harmonic_ritz_indefinite(pencil, basis),
        other => other,
    }
}

/// As [`harmonic_ritz`], but fails with `IndefiniteRightSide` instead of
/// falling back when `PᵗKP` is not positive definite.
pub fn harmonic_ritz_definite(pencil: &Pencil, basis: &SubspaceBasis) -> Result<RitzResult> {
    basis.check_against(pencil)?;
    let p = basis.matrix();
    let h1 = schwarz_h1(pencil, p);
    if !pencil.is_k_positive_definite() {
        return Err(BoundsError::IndefiniteRightSide);
    }
    let sol = match solve_definite_gep(&schwarz_h0(pencil, p), &h1) {
        Err(BoundsError::NotPositiveDefinite(_)) => return Err(BoundsError::IndefiniteRightSide),
        other => other?,
    };
    Ok(finish(
        RitzKind::Harmonic,
        pencil,
        basis,
        sol.values,
        &sol.vectors,
        true,
    ))
}

fn harmonic_ritz_indefinite(pencil: &Pencil, basis: &SubspaceBasis) -> Result<RitzResult> {
    let p = basis.matrix();
    let sol = solve_definite_gep(&schwarz_h1(pencil, p), &schwarz_h0(pencil, p)).map_err(|_| BoundsError::SingularK)?;
    let m = sol.values.len();
    let mut pairs: Vec<(f64, DVector<f64>)> = (0..m)
        .map(|i| {
            let mu = sol.values.as_slice()[i];
            let value = if mu == 0.0 { f64::INFINITY } else { mu.recip() };
            (value, sol.vectors.column(i).into_owned())
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let values = EdgeLabeledValues::new(pairs.iter().map(|p| p.0).collect());
    let columns: Vec<DVector<f64>> = pairs.into_iter().map(|p| p.1).collect();
    let y = DMatrix::from_columns(&columns);
    Ok(finish(RitzKind::Harmonic, pencil, basis, values, &y, false))
}

/// Eigenpairs of `PᵗMP y = Λ̆ PᵗMK⁻¹MP y`; needs `K` positive definite.
pub fn dual_harmonic_ritz(pencil: &Pencil, basis: &SubspaceBasis) -> Result<RitzResult> {
    basis.check_against(pencil)?;
    pencil.require_k_positive_definite()?;
    let p = basis.matrix();
    let sol = solve_definite_gep(&schwarz_h2(pencil, p), &schwarz_h3(pencil, p)?)?;
    Ok(finish(
        RitzKind::DualHarmonic,
        pencil,
        basis,
        sol.values,
        &sol.vectors,
        true,
    ))
}

/// A pencil `(Â, B̂)` that agrees with `(K, M)` on the trial subspace and
/// whose spectrum reproduces the selected Ritz values exactly, showing that
/// no better bounds follow from the projected data alone.
#[derive(Clone, Debug)]
pub struct OptimalityWitness {
    pub a_hat: DMatrix<f64>,
    pub b_hat: DMatrix<f64>,
    /// `(Λ_ν + Λ₋π) / 2`, the eigenvalue filling the complement of the subspace.
    pub fill_value: f64,
}

/// Builds `Â = MUDUᵗM + Λ̂(M - MUUᵗM)`, `B̂ = M` from the Ritz vectors `U`
/// and Ritz values `D`, with `Λ̂ = (Λ_ν + Λ₋π)/2`.
pub fn optimality_witness(pencil: &Pencil, basis: &SubspaceBasis, nu: usize, pi: usize) -> Result<OptimalityWitness> {
    let m = basis.dim();
    if nu == 0 || pi == 0 || nu + pi != m {
        return Err(BoundsError::BadSplit { nu, pi, m });
    }
    pencil.require_k_positive_definite()?;
    let r = ritz(pencil, basis)?;
    let fill_value = 0.5 * (r.values.bottom(nu).unwrap() + r.values.top(pi).unwrap());
    let mu = pencil.m() * &r.vectors;
    let d = DMatrix::from_diagonal(&DVector::from_column_slice(r.values.as_slice()));
    let a_hat = &mu * d * mu.transpose() + (pencil.m() - &mu * mu.transpose()) * fill_value;
    Ok(OptimalityWitness {
        a_hat: symmetrize(&a_hat),
        b_hat: pencil.m().clone(),
        fill_value,
    })
}
