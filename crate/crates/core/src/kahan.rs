//! Bordered (Kahan) forms of the Lehmann bounds and Goerisch's relaxation.
//!
//! One block Lanczos step in the `M` inner product gives
//! `M⁻¹KQ₁ = Q₁H + Q₂C` with `Q₁, Q₂` `M`-orthonormal and `C` upper
//! triangular. The Schwarz matrices in the `Q₁` basis are then
//! `H₀ = H² + CᵗC`, `H₁ = H`, `H₂ = I`, `H₃ = H⁻¹ + H⁻¹CᵗWCH⁻¹` with
//! `W = Q₂ᵗMK⁻¹MQ₂`, so every bound is a function of `(H, C, W)` alone.
//! Replacing `W` by any `Ŵ ≥ W` keeps the left-definite bounds valid.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::error::{BoundsError, Result};
use crate::lehmann::{ShiftedBounds, Variant};
use crate::pencil::{
    frobenius, m_orthonormalize, solve_definite_gep, symmetric_eigen, symmetric_eigenvalues, symmetrize, Pencil,
    SubspaceBasis, RANK_TOL, ZERO_BAND,
};

/// Relative size of the step used to move `ρ` off a Ritz value.
pub const SHIFT_NUDGE: f64 = 1e-8;

/// `M⁻¹KQ₁ = Q₁H + Q₂C`.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockLanczosData {
    pub q1: DMatrix<f64>,
    pub h: DMatrix<f64>,
    /// `k × m`, upper triangular in echelon form.
    pub c: DMatrix<f64>,
    pub q2: DMatrix<f64>,
}

impl BlockLanczosData {
    /// Rank `k` of the residual block.
    pub fn rank(&self) -> usize {
        self.c.nrows()
    }
}

/// One step of block Lanczos from the trial basis `P`. Residual directions
/// with `M`-norm below `1e-12` of the largest column of `M⁻¹KQ₁` are dropped.
pub fn block_lanczos_step(pencil: &Pencil, basis: &SubspaceBasis) -> Result<BlockLanczosData> {
    basis.check_against(pencil)?;
    let m = pencil.m();
    let q1 = m_orthonormalize(basis, m)?.into_matrix();
    let mq1 = m * &q1;
    let h = symmetrize(&(q1.transpose() * pencil.k() * &q1));
    let y = pencil.solve_m(&(pencil.k() * &q1));
    let scale = y
        .column_iter()
        .map(|c| c.dot(&(m * c)).max(0.0).sqrt())
        .fold(0.0, f64::max);
    let residual = &y - &q1 * &h;

    let (n, cols) = q1.shape();
    let mut q2: Vec<DVector<f64>> = Vec::new();
    let mut mq2: Vec<DVector<f64>> = Vec::new();
    let mut coeffs: Vec<Vec<f64>> = Vec::with_capacity(cols);
    for j in 0..cols {
        let mut v = residual.column(j).into_owned();
        let mut col = vec![0.0; q2.len()];
        for _ in 0..2 {
            let against_q1 = mq1.transpose() * &v;
            v -= &q1 * against_q1;
            for (i, (q, mq)) in q2.iter().zip(&mq2).enumerate() {
                let c = mq.dot(&v);
                v.axpy(-c, q, 1.0);
                col[i] += c;
            }
        }
        let mv = m * &v;
        let norm = v.dot(&mv).max(0.0).sqrt();
        if norm > RANK_TOL * scale {
            col.push(norm);
            q2.push(v / norm);
            mq2.push(mv / norm);
        }
        coeffs.push(col);
    }
    let k = q2.len();
    let c = DMatrix::from_fn(k, cols, |i, j| coeffs[j].get(i).copied().unwrap_or(0.0));
    let q2 = if k == 0 {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(&q2)
    };
    Ok(BlockLanczosData { q1, h, c, q2 })
}

/// Eigen-split of `H` used to form `C f(H) Cᵗ` without cancellation.
struct RitzSplit {
    values: Vec<f64>,
    /// `C V` for the eigenvectors `V` of `H`.
    cv: DMatrix<f64>,
}

impl RitzSplit {
    fn new(h: &DMatrix<f64>, c: &DMatrix<f64>) -> Result<Self> {
        let (values, v) = symmetric_eigen(h)?;
        Ok(Self { values, cv: c * v })
    }

    /// `C V diag(f(d)) Vᵗ Cᵗ`.
    fn congruence(&self, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let d = DVector::from_iterator(self.values.len(), self.values.iter().map(|&x| f(x)));
        symmetrize(&(&self.cv * DMatrix::from_diagonal(&d) * self.cv.transpose()))
    }

    fn too_close(&self, rho: f64, scale: f64) -> bool {
        self.values.iter().any(|&d| (d - rho).abs() <= ZERO_BAND * scale)
    }
}

fn check_blocks(h: &DMatrix<f64>, c: &DMatrix<f64>) -> Result<()> {
    if !h.is_square() || c.ncols() != h.nrows() {
        return Err(BoundsError::DimensionMismatch(format!(
            "H is {}x{}, C is {}x{}",
            h.nrows(),
            h.ncols(),
            c.nrows(),
            c.ncols()
        )));
    }
    Ok(())
}

/// Moves `ρ` off the eigenvalues of `H` by `±1e-8‖H‖` when needed.
fn settle_shift(split: &RitzSplit, h_norm: f64, rho: f64) -> Result<f64> {
    nudge_shift(&split.values, h_norm, rho)
}

pub(crate) fn nudge_shift(ritz: &[f64], h_norm: f64, rho: f64) -> Result<f64> {
    let scale = h_norm.max(rho.abs());
    let too_close = |r: f64| ritz.iter().any(|&d| (d - r).abs() <= ZERO_BAND * scale);
    if !too_close(rho) {
        return Ok(rho);
    }
    let step = SHIFT_NUDGE * h_norm.max(f64::MIN_POSITIVE);
    [rho + step, rho - step]
        .into_iter()
        .find(|&r| !too_close(r))
        .ok_or(BoundsError::ShiftAtRitzValue(rho))
}

/// Indices of the `k` entries of `values` nearest `target`.
fn nearest(values: &[f64], target: f64, k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| (values[a] - target).abs().total_cmp(&(values[b] - target).abs()));
    idx.truncate(k);
    idx
}

/// Number of entries within `band * scale` of `target`.
pub fn multiplicity_near(values: &[f64], target: f64, scale: f64) -> usize {
    values
        .iter()
        .filter(|&&v| (v - target).abs() <= ZERO_BAND * scale)
        .count()
}

/// Bordered right-definite matrix `[[H, Cᵗ], [C, ρI + C(H-ρI)⁻¹Cᵗ]]`.
fn kahan_right_matrix(h: &DMatrix<f64>, c: &DMatrix<f64>, split: &RitzSplit, rho: f64) -> DMatrix<f64> {
    let (m, k) = (h.nrows(), c.nrows());
    let mut x = DMatrix::zeros(m + k, m + k);
    x.view_mut((0, 0), (m, m)).copy_from(h);
    x.view_mut((m, 0), (k, m)).copy_from(c);
    x.view_mut((0, m), (m, k)).copy_from(&c.transpose());
    let corner = split.congruence(|d| 1.0 / (d - rho)) + DMatrix::identity(k, k) * rho;
    x.view_mut((m, m), (k, k)).copy_from(&corner);
    x
}

/// Full spectrum of the bordered right-definite matrix, ascending.
/// Contains `ρ` with multiplicity `k`.
pub fn kahan_right_spectrum(h: &DMatrix<f64>, c: &DMatrix<f64>, rho: f64) -> Result<Vec<f64>> {
    check_blocks(h, c)?;
    let split = RitzSplit::new(h, c)?;
    if split.too_close(rho, frobenius(h).max(rho.abs())) {
        return Err(BoundsError::ShiftAtRitzValue(rho));
    }
    symmetric_eigenvalues(&kahan_right_matrix(h, c, &split, rho))
}

/// Right-definite Lehmann bounds from the bordered matrix, with the `k`
/// copies of `ρ` removed.
pub fn kahan_right(h: &DMatrix<f64>, c: &DMatrix<f64>, rho: f64) -> Result<ShiftedBounds> {
    check_blocks(h, c)?;
    let split = RitzSplit::new(h, c)?;
    let used = settle_shift(&split, frobenius(h), rho)?;
    let values = symmetric_eigenvalues(&kahan_right_matrix(h, c, &split, used))?;
    let drop = nearest(&values, used, c.nrows());
    let pairs = values
        .iter()
        .enumerate()
        .filter(|(i, _)| !drop.contains(i))
        .map(|(_, &v)| (1.0 / (v - used), v))
        .collect();
    let mut out = ShiftedBounds::assemble(used, Variant::Right, pairs);
    out.shift_perturbation = used - rho;
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WProvenance {
    /// `W = Q₂ᵗMK⁻¹MQ₂` from a direct solve.
    Exact,
    /// Goerisch's upper bound from approximate solves and a spectral lower bound `κ`.
    ResidualBound,
}

/// `Ŵ ≥ W = Q₂ᵗMK⁻¹MQ₂`.
#[derive(Clone, Debug, PartialEq)]
pub struct GoerischW {
    pub w_hat: DMatrix<f64>,
    pub provenance: WProvenance,
    pub kappa: Option<f64>,
}

/// `W` by a direct solve with `K`.
pub fn exact_w(pencil: &Pencil, data: &BlockLanczosData) -> Result<GoerischW> {
    pencil.require_k_positive_definite()?;
    let b = pencil.m() * &data.q2;
    let x = pencil.solve_k(&b)?;
    Ok(GoerischW {
        w_hat: symmetrize(&(b.transpose() * x)),
        provenance: WProvenance::Exact,
        kappa: None,
    })
}

/// Goerisch's bound from approximate solves `Z ≈ K⁻¹B`, where `B = MQ₂`
/// (just `Q₂` when `M = I`) and `κ‖x‖² <= xᵗKx`:
/// `R = B - KZ`, `Ŵ = RᵗR/κ + ZᵗR + BᵗZ`.
pub fn goerisch_w(k: &DMatrix<f64>, b: &DMatrix<f64>, z: &DMatrix<f64>, kappa: f64) -> Result<GoerischW> {
    if !(kappa > 0.0) || !kappa.is_finite() {
        return Err(BoundsError::BadKappa(kappa));
    }
    if k.nrows() != b.nrows() || b.shape() != z.shape() {
        return Err(BoundsError::DimensionMismatch(format!(
            "K is {}x{}, B is {}x{}, Z is {}x{}",
            k.nrows(),
            k.ncols(),
            b.nrows(),
            b.ncols(),
            z.nrows(),
            z.ncols()
        )));
    }
    let r = b - k * z;
    let w_hat = r.transpose() * &r / kappa + z.transpose() * &r + b.transpose() * z;
    Ok(GoerischW {
        w_hat: symmetrize(&w_hat),
        provenance: WProvenance::ResidualBound,
        kappa: Some(kappa),
    })
}

/// A fixed number of conjugate gradient steps on `KZ = B`, column by column,
/// from a zero start. Meant for producing deliberately inexact solves.
pub fn conjugate_gradient(k: &DMatrix<f64>, b: &DMatrix<f64>, iterations: usize) -> DMatrix<f64> {
    let mut z = DMatrix::zeros(b.nrows(), b.ncols());
    for j in 0..b.ncols() {
        let mut x = DVector::zeros(b.nrows());
        let mut r = b.column(j).into_owned();
        let mut p = r.clone();
        let mut rr = r.dot(&r);
        for _ in 0..iterations {
            if rr == 0.0 {
                break;
            }
            let kp = k * &p;
            let alpha = rr / p.dot(&kp);
            x.axpy(alpha, &p, 1.0);
            r.axpy(-alpha, &kp, 1.0);
            let next = r.dot(&r);
            p = &r + &p * (next / rr);
            rr = next;
        }
        z.set_column(j, &x);
    }
    z
}

/// Solves the left-definite bordered pencil
/// `[[H, Cᵗ], [C, N₁]] - Λ diag(I, M₁)` through its reciprocal
/// `diag(I, M₁) y = μ [[H, Cᵗ], [C, N₁]] y`, `Λ = 1/μ`, whose right side is
/// positive definite whenever `H` and `N₁ - CH⁻¹Cᵗ` are. The `k` copies of
/// `ρ` are removed and the rest are labeled about `ρ`.
pub(crate) fn bordered_left(
    h: &DMatrix<f64>,
    c: &DMatrix<f64>,
    n1: &DMatrix<f64>,
    m1: &DMatrix<f64>,
    rho: f64,
    variant: Variant,
) -> Result<ShiftedBounds> {
    let mu = bordered_left_reciprocal(h, c, n1, m1)?;
    let drop = nearest(&mu, 1.0 / rho, c.nrows());
    let pairs = mu
        .iter()
        .enumerate()
        .filter(|(i, _)| !drop.contains(i))
        .map(|(_, &u)| (1.0 / (1.0 - rho * u), 1.0 / u))
        .collect();
    let mut out = ShiftedBounds::assemble(rho, variant, pairs);
    out.definite = Cholesky::new(m1.clone()).is_some();
    Ok(out)
}

/// Eigenvalues `μ = 1/Λ` of the reciprocal bordered left pencil, ascending.
fn bordered_left_reciprocal(
    h: &DMatrix<f64>,
    c: &DMatrix<f64>,
    n1: &DMatrix<f64>,
    m1: &DMatrix<f64>,
) -> Result<Vec<f64>> {
    let (m, k) = (h.nrows(), c.nrows());
    let mut a = DMatrix::zeros(m + k, m + k);
    a.view_mut((0, 0), (m, m)).copy_from(h);
    a.view_mut((m, 0), (k, m)).copy_from(c);
    a.view_mut((0, m), (m, k)).copy_from(&c.transpose());
    a.view_mut((m, m), (k, k)).copy_from(n1);
    let mut b = DMatrix::identity(m + k, m + k);
    b.view_mut((m, m), (k, k)).copy_from(m1);
    let sol = solve_definite_gep(&b, &a).map_err(|e| match e {
        BoundsError::NotPositiveDefinite(_) => BoundsError::NotPositiveDefinite("K"),
        other => other,
    })?;
    Ok(sol.values.as_slice().to_vec())
}

struct LeftBlocks {
    n1: DMatrix<f64>,
    m1: DMatrix<f64>,
    used: f64,
}

fn left_blocks(h: &DMatrix<f64>, c: &DMatrix<f64>, w: &DMatrix<f64>, rho: f64) -> Result<LeftBlocks> {
    check_blocks(h, c)?;
    if w.shape() != (c.nrows(), c.nrows()) {
        return Err(BoundsError::DimensionMismatch(format!(
            "W is {}x{}, C has {} rows",
            w.nrows(),
            w.ncols(),
            c.nrows()
        )));
    }
    if !(rho > 0.0) {
        return Err(BoundsError::NonPositiveShift(rho));
    }
    let split = RitzSplit::new(h, c)?;
    if split.values.first().is_some_and(|&d| d <= 0.0) {
        return Err(BoundsError::NotPositiveDefinite("K"));
    }
    let used = settle_shift(&split, frobenius(h), rho)?;
    let w_inv = Cholesky::new(symmetrize(w))
        .ok_or(BoundsError::NotPositiveDefinite("W"))?
        .inverse();
    // N₁ - N₂ = W⁻¹ - ρ C H⁻¹(H-ρI)⁻¹ Cᵗ, so M₁ needs no subtraction of large terms.
    let n1 = &w_inv + split.congruence(|d| 1.0 / d);
    let m1 = &w_inv / used - split.congruence(|d| 1.0 / (d * (d - used)));
    Ok(LeftBlocks { n1, m1, used })
}

fn bordered_left_bounds(
    h: &DMatrix<f64>,
    c: &DMatrix<f64>,
    w: &DMatrix<f64>,
    rho: f64,
    variant: Variant,
) -> Result<ShiftedBounds> {
    let blocks = left_blocks(h, c, w, rho)?;
    let mut out = bordered_left(h, c, &blocks.n1, &blocks.m1, blocks.used, variant)?;
    out.shift_perturbation = blocks.used - rho;
    Ok(out)
}

/// All eigenvalues `Λ` of the bordered left pencil (including the `k`
/// copies of `ρ`), ascending in `1/Λ`.
pub fn kahan_left_spectrum(h: &DMatrix<f64>, c: &DMatrix<f64>, w: &GoerischW, rho: f64) -> Result<Vec<f64>> {
    let blocks = left_blocks(h, c, &w.w_hat, rho)?;
    if blocks.used != rho {
        return Err(BoundsError::ShiftAtRitzValue(rho));
    }
    Ok(bordered_left_reciprocal(h, c, &blocks.n1, &blocks.m1)?
        .into_iter()
        .map(|u| 1.0 / u)
        .collect())
}

/// Left-definite Lehmann bounds from `(H, C, W)`.
pub fn kahan_left(h: &DMatrix<f64>, c: &DMatrix<f64>, w: &GoerischW, rho: f64) -> Result<ShiftedBounds> {
    bordered_left_bounds(h, c, &w.w_hat, rho, Variant::Left)
}

/// Left-definite bounds with `Ŵ ≥ W`; valid but possibly weaker, and
/// entries that crossed the point at infinity come back wrapped.
pub fn goerisch_left(h: &DMatrix<f64>, c: &DMatrix<f64>, w_hat: &GoerischW, rho: f64) -> Result<ShiftedBounds> {
    bordered_left_bounds(h, c, &w_hat.w_hat, rho, Variant::GoerischLeft)
}
