//! Lanczos with full reorthogonalization, the tridiagonal left-definite
//! Lehmann–Goerisch pencil, shift-and-invert comparison runs, the
//! Bauer–Fike style residual check and convergence histories along a
//! Krylov sequence.

use nalgebra::{DMatrix, DVector};

use crate::error::{BoundsError, Result};
use crate::kahan::{bordered_left, kahan_right, nudge_shift};
use crate::lehmann::{ShiftedBounds, Variant};
use crate::oracle::pencil_spectrum;
use crate::pencil::{
    frobenius, lu_solve, schwarz_h0, schwarz_h1, schwarz_h2, schwarz_h3, solve_definite_gep, symmetric_eigenvalues,
    EdgeLabeledValues, Pencil, SubspaceBasis, ZERO_BAND,
};

/// Matrix-free symmetric operator.
pub trait SymmetricOperator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &DVector<f64>) -> DVector<f64>;
}

impl SymmetricOperator for DMatrix<f64> {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        self * x
    }
}

/// A diagonal operator stored as its diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct Diagonal(pub DVector<f64>);

impl SymmetricOperator for Diagonal {
    fn dim(&self) -> usize {
        self.0.len()
    }

    fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        self.0.component_mul(x)
    }
}

/// `A Q_ℓ = Q_ℓ T_ℓ + β_ℓ q_{ℓ+1} e_ℓᵗ`.
#[derive(Clone, Debug, PartialEq)]
pub struct LanczosFactorization {
    pub alpha: Vec<f64>,
    /// `β₁..β_ℓ`; the last entry couples to `q_{ℓ+1}`.
    pub beta: Vec<f64>,
    /// `n × (ℓ+1)`; the last column is zero after a breakdown.
    pub q: DMatrix<f64>,
    pub breakdown: bool,
}

impl LanczosFactorization {
    pub fn ell(&self) -> usize {
        self.alpha.len()
    }

    pub fn tridiagonal(&self) -> DMatrix<f64> {
        let l = self.ell();
        let mut t = DMatrix::from_diagonal(&DVector::from_column_slice(&self.alpha));
        for i in 1..l {
            t[(i, i - 1)] = self.beta[i - 1];
            t[(i - 1, i)] = self.beta[i - 1];
        }
        t
    }

    /// `Q_ℓ`.
    pub fn basis(&self) -> DMatrix<f64> {
        self.q.columns(0, self.ell()).into_owned()
    }

    pub fn next_vector(&self) -> DVector<f64> {
        self.q.column(self.ell()).into_owned()
    }

    pub fn residual_coupling(&self) -> f64 {
        self.beta.last().copied().unwrap_or(0.0)
    }

    /// The factorization after the first `ell` steps.
    pub fn prefix(&self, ell: usize) -> LanczosFactorization {
        let ell = ell.min(self.ell());
        LanczosFactorization {
            alpha: self.alpha[..ell].to_vec(),
            beta: self.beta[..ell].to_vec(),
            q: self.q.columns(0, ell + 1).into_owned(),
            breakdown: self.breakdown && ell == self.ell(),
        }
    }

    /// `‖A Q_ℓ - Q_ℓ T_ℓ - β_ℓ q_{ℓ+1} e_ℓᵗ‖_F`.
    pub fn recursion_residual(&self, op: &impl SymmetricOperator) -> f64 {
        let l = self.ell();
        let q = self.basis();
        let mut aq = DMatrix::zeros(q.nrows(), l);
        for j in 0..l {
            aq.set_column(j, &op.apply(&q.column(j).into_owned()));
        }
        let mut r = aq - &q * self.tridiagonal();
        if l > 0 {
            let mut last = r.column_mut(l - 1);
            last.axpy(-self.residual_coupling(), &self.next_vector(), 1.0);
        }
        frobenius(&r)
    }
}

/// `ell` steps of Lanczos from `q1`, reorthogonalizing every new vector
/// against all previous ones twice. Stops early when `β` falls in the zero
/// band relative to the largest `‖Aq‖` seen.
pub fn lanczos(op: &impl SymmetricOperator, q1: &DVector<f64>, ell: usize) -> Result<LanczosFactorization> {
    let n = op.dim();
    if q1.len() != n {
        return Err(BoundsError::DimensionMismatch(format!(
            "start vector has length {}, operator has dimension {n}",
            q1.len()
        )));
    }
    let norm = q1.norm();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(BoundsError::ZeroStartVector);
    }
    let ell = ell.min(n);
    let mut q = DMatrix::zeros(n, ell + 1);
    q.set_column(0, &(q1 / norm));
    let mut alpha = Vec::with_capacity(ell);
    let mut beta: Vec<f64> = Vec::with_capacity(ell);
    let mut scale = 0.0f64;
    let mut breakdown = false;
    for j in 0..ell {
        let qj = q.column(j).into_owned();
        let mut w = op.apply(&qj);
        scale = scale.max(w.norm());
        let a = qj.dot(&w);
        w.axpy(-a, &qj, 1.0);
        if j > 0 {
            w.axpy(-beta[j - 1], &q.column(j - 1).into_owned(), 1.0);
        }
        for _ in 0..2 {
            let prev = q.columns(0, j + 1);
            let c = prev.transpose() * &w;
            w -= prev * c;
        }
        alpha.push(a);
        let b = w.norm();
        if b <= ZERO_BAND * scale || j + 1 == n && b <= 1e3 * f64::EPSILON * scale {
            beta.push(0.0);
            breakdown = true;
            break;
        }
        beta.push(b);
        q.set_column(j + 1, &(w / b));
    }
    let l = alpha.len();
    Ok(LanczosFactorization {
        alpha,
        beta,
        q: q.columns(0, l + 1).into_owned(),
        breakdown,
    })
}

/// Orthonormal Krylov basis `Q_ℓ` of the factorization.
pub fn krylov_basis(fact: &LanczosFactorization) -> Result<SubspaceBasis> {
    SubspaceBasis::new(fact.basis())
}

/// `M`-orthonormal basis of the Krylov space of `M⁻¹K` from `q1`, of
/// dimension `m` (or less if the space becomes invariant first).
pub fn pencil_krylov_basis(pencil: &Pencil, q1: &DVector<f64>, m: usize) -> Result<SubspaceBasis> {
    krylov_basis(&pencil_lanczos(pencil, q1, m)?)
}

/// `ω = 1/κ`, which bounds `qᵗK⁻¹q` for unit `q` when `κ <= λ_min(K)`.
pub fn omega_from_kappa(kappa: f64) -> Result<f64> {
    if !(kappa > 0.0) || !kappa.is_finite() {
        return Err(BoundsError::BadKappa(kappa));
    }
    Ok(1.0 / kappa)
}

/// `κ = (1 - 10⁻⁶) λ_min`, a safe lower bound from a computed smallest eigenvalue.
pub fn default_kappa(lambda_min: f64) -> f64 {
    (1.0 - 1e-6) * lambda_min
}

/// Left-definite bounds from the `(ℓ+1) × (ℓ+1)` tridiagonal pencil
///
/// ```text
/// [[T_ℓ, β e_ℓ], [β e_ℓᵗ, ω⁻¹ + β² e_ℓᵗT_ℓ⁻¹e_ℓ]] - Λ diag(I, (ρω)⁻¹ - β²δ),
/// δ = e_ℓᵗ T_ℓ⁻¹ (T_ℓ - ρI)⁻¹ e_ℓ,
/// ```
///
/// where `ω >= q_{ℓ+1}ᵗK⁻¹q_{ℓ+1}`. `ρ` is a simple eigenvalue and is removed.
pub fn tridiagonal_lehmann(fact: &LanczosFactorization, omega: f64, rho: f64) -> Result<ShiftedBounds> {
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(BoundsError::BadOmega(omega));
    }
    if !(rho > 0.0) {
        return Err(BoundsError::NonPositiveShift(rho));
    }
    let l = fact.ell();
    let t = fact.tridiagonal();
    let ritz = symmetric_eigenvalues(&t)?;
    if ritz.first().is_some_and(|&d| d <= 0.0) {
        return Err(BoundsError::NotPositiveDefinite("K"));
    }
    let beta = fact.residual_coupling();
    if beta == 0.0 {
        let pairs = ritz.iter().map(|&v| (v / (v - rho), v)).collect();
        return Ok(ShiftedBounds::assemble(rho, Variant::GoerischLeft, pairs));
    }
    let used = nudge_shift(&ritz, frobenius(&t), rho)?;
    let mut e = DMatrix::zeros(l, 1);
    e[(l - 1, 0)] = 1.0;
    let u = lu_solve(&t, &e).ok_or(BoundsError::NotPositiveDefinite("K"))?;
    let shifted = &t - DMatrix::identity(l, l) * used;
    let v = lu_solve(&shifted, &e).ok_or(BoundsError::ShiftAtRitzValue(rho))?;
    let delta = u.dot(&v);
    let n1 = DMatrix::from_element(1, 1, 1.0 / omega + beta * beta * u[(l - 1, 0)]);
    let m1 = DMatrix::from_element(1, 1, 1.0 / (used * omega) - beta * beta * delta);
    let c = e.transpose() * beta;
    let mut out = bordered_left(&t, &c, &n1, &m1, used, Variant::GoerischLeft)?;
    out.shift_perturbation = used - rho;
    Ok(out)
}

/// `Lᵗ(K - ρM)⁻¹L` with `K = LLᵗ`: symmetric, with eigenvalues `λ/(λ-ρ)`.
struct ShiftInvert<'a> {
    l: DMatrix<f64>,
    lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    _pencil: &'a Pencil,
}

impl SymmetricOperator for ShiftInvert<'_> {
    fn dim(&self) -> usize {
        self.l.nrows()
    }

    fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        let y = self
            .lu
            .solve(&(&self.l * x))
            .expect("shifted matrix was checked nonsingular");
        self.l.transpose() * y
    }
}

fn shift_invert_operator(pencil: &Pencil, rho: f64) -> Result<ShiftInvert<'_>> {
    let chol = pencil.k_cholesky().ok_or(BoundsError::NotPositiveDefinite("K"))?;
    let shifted = pencil.k() - pencil.m() * rho;
    let lu = shifted.lu();
    let diag = lu.u().diagonal();
    let scale = diag.amax();
    if scale == 0.0 || diag.iter().any(|d| d.abs() <= 1e-14 * scale) {
        return Err(BoundsError::SingularShiftedMatrix(rho));
    }
    Ok(ShiftInvert {
        l: chol.l(),
        lu,
        _pencil: pencil,
    })
}

/// Shift-and-invert Lanczos run: the factorization of the transformed
/// operator started from `Lᵗq₁`.
pub fn shift_invert_lanczos(pencil: &Pencil, rho: f64, q1: &DVector<f64>, ell: usize) -> Result<LanczosFactorization> {
    let op = shift_invert_operator(pencil, rho)?;
    let start = op.l.transpose() * q1;
    lanczos(&op, &start, ell)
}

/// Maps Ritz values `θ` of the transformed operator back by `λ = ρθ/(θ-1)`.
pub fn map_back(theta: &[f64], rho: f64) -> EdgeLabeledValues {
    EdgeLabeledValues::new(
        theta
            .iter()
            .map(|&t| if t == 1.0 { f64::INFINITY } else { rho * t / (t - 1.0) })
            .collect(),
    )
}

/// Eigenvalue estimates near `ρ` from `ℓ` steps of shift-and-invert Lanczos.
/// These are estimates, not certified bounds.
pub fn shift_invert_ritz(pencil: &Pencil, rho: f64, q1: &DVector<f64>, ell: usize) -> Result<EdgeLabeledValues> {
    let fact = shift_invert_lanczos(pencil, rho, q1, ell)?;
    Ok(map_back(&symmetric_eigenvalues(&fact.tridiagonal())?, rho))
}

/// One bound's side of `min_i (|Λ_i-ρ|/ρ)(|Λ_i-Λ|/Λ)Λ_i <= ‖W‖‖C‖²`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BauerFikeEntry {
    pub bound: f64,
    pub lhs: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BauerFikeReport {
    pub rhs: f64,
    pub entries: Vec<BauerFikeEntry>,
}

impl BauerFikeReport {
    pub fn holds(&self) -> bool {
        self.entries.iter().all(|e| e.holds)
    }

    pub fn violations(&self) -> usize {
        self.entries.iter().filter(|e| !e.holds).count()
    }
}

/// Checks every positive non-wrapped left bound against the residual
/// estimate `‖W‖₂‖C‖₂²`, with `10⁻⁹` relative and `10⁻¹²‖H‖` absolute slack.
pub fn bauer_fike_check(
    h: &DMatrix<f64>,
    c: &DMatrix<f64>,
    w: &DMatrix<f64>,
    rho: f64,
    bounds: &ShiftedBounds,
) -> Result<BauerFikeReport> {
    let ritz = symmetric_eigenvalues(h)?;
    let w_norm = symmetric_eigenvalues(w)?.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let c_norm = if c.is_empty() { 0.0 } else { c.singular_values().max() };
    let rhs = w_norm * c_norm * c_norm;
    let slack = 1e-12 * frobenius(h);
    let entries = bounds
        .lower
        .iter()
        .chain(&bounds.upper)
        .filter(|b| !b.wrapped && b.value > 0.0 && b.value.is_finite())
        .map(|b| {
            let lhs = ritz
                .iter()
                .map(|&r| ((r - rho).abs() / rho) * ((r - b.value).abs() / b.value) * r)
                .fold(f64::INFINITY, f64::min);
            BauerFikeEntry {
                bound: b.value,
                lhs,
                holds: lhs <= rhs * (1.0 + 1e-9) + slack,
            }
        })
        .collect();
    Ok(BauerFikeReport { rhs, entries })
}

/// Configuration of a convergence history run.
#[derive(Clone, Debug, PartialEq)]
pub struct HistoryConfig {
    pub rho: f64,
    pub max_ell: usize,
    /// Lower bound on the spectrum of `K` for the Goerisch family;
    /// defaults to [`default_kappa`] of the computed smallest eigenvalue.
    pub kappa: Option<f64>,
    /// Record shift-and-invert estimates.
    pub shift_invert: bool,
}

/// All value families after `ell` Lanczos steps.
#[derive(Clone, Debug, PartialEq)]
pub struct HistoryStep {
    pub ell: usize,
    pub ritz: EdgeLabeledValues,
    pub harmonic: EdgeLabeledValues,
    pub dual: Option<EdgeLabeledValues>,
    pub lehmann_right: Option<ShiftedBounds>,
    /// Tridiagonal pencil with the exact `ω = q_{ℓ+1}ᵗMK⁻¹Mq_{ℓ+1}`.
    pub lehmann_left: Option<ShiftedBounds>,
    /// Tridiagonal pencil with `ω` from `κ`.
    pub goerisch_left: Option<ShiftedBounds>,
    pub shift_invert: Option<EdgeLabeledValues>,
    /// Bauer–Fike violations among the left families at this step.
    pub bauer_fike_violations: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceHistory {
    pub rho: f64,
    pub exact: EdgeLabeledValues,
    pub steps: Vec<HistoryStep>,
}

/// Lanczos for `M⁻¹K` in the `M` inner product, carried out on
/// `L_M⁻¹ K L_M⁻ᵗ` and mapped back, so `Q` is `M`-orthonormal.
pub fn pencil_lanczos(pencil: &Pencil, q1: &DVector<f64>, ell: usize) -> Result<LanczosFactorization> {
    let chol = pencil.m_cholesky();
    let l = chol.l();
    let linv_k = l
        .solve_lower_triangular(pencil.k())
        .ok_or(BoundsError::NotPositiveDefinite("M"))?;
    let op = crate::pencil::symmetrize(
        &l.solve_lower_triangular(&linv_k.transpose())
            .ok_or(BoundsError::NotPositiveDefinite("M"))?,
    );
    let mut fact = lanczos(&op, &(l.transpose() * q1), ell)?;
    fact.q = l
        .tr_solve_lower_triangular(&fact.q)
        .ok_or(BoundsError::NotPositiveDefinite("M"))?;
    Ok(fact)
}

/// Tracks Ritz, harmonic, dual harmonic, Lehmann (right, left, Goerisch)
/// and shift-and-invert values along the Krylov sequence from `q1`.
pub fn convergence_history(pencil: &Pencil, q1: &DVector<f64>, config: &HistoryConfig) -> Result<ConvergenceHistory> {
    let rho = config.rho;
    let exact = EdgeLabeledValues::new(pencil_spectrum(pencil.k(), pencil.m())?);
    let fact = pencil_lanczos(pencil, q1, config.max_ell)?;
    let k_pd = pencil.is_k_positive_definite();
    let left_ok = k_pd && rho > 0.0;
    let kappa = match config.kappa {
        Some(k) => k,
        None => default_kappa(pencil.k_min_eigenvalue()?),
    };
    let si = if config.shift_invert && k_pd {
        Some(shift_invert_lanczos(pencil, rho, q1, config.max_ell)?)
    } else {
        None
    };

    let mut steps = Vec::with_capacity(fact.ell());
    for ell in 1..=fact.ell() {
        let part = fact.prefix(ell);
        let q = part.basis();
        let t = part.tridiagonal();
        let h0 = schwarz_h0(pencil, &q);
        let h1 = schwarz_h1(pencil, &q);
        let h2 = schwarz_h2(pencil, &q);
        let ritz = solve_definite_gep(&h1, &h2)?.values;
        let harmonic = if k_pd {
            solve_definite_gep(&h0, &h1)?.values
        } else {
            let mu = solve_definite_gep(&h1, &h0)?.values;
            EdgeLabeledValues::new(mu.as_slice().iter().map(|m| 1.0 / m).collect())
        };
        let dual = if k_pd {
            Some(solve_definite_gep(&h2, &schwarz_h3(pencil, &q)?)?.values)
        } else {
            None
        };

        let beta = part.residual_coupling();
        let mut c = DMatrix::zeros(usize::from(beta != 0.0), ell);
        if beta != 0.0 {
            c[(0, ell - 1)] = beta;
        }
        let lehmann_right = Some(kahan_right(&t, &c, rho)?);

        let (mut lehmann_left, mut goerisch_left, mut violations) = (None, None, 0);
        if left_ok {
            let next = part.next_vector();
            let mq = pencil.m() * &next;
            let mq_mat = DMatrix::from_column_slice(mq.len(), 1, mq.as_slice());
            let omega_exact = if beta == 0.0 {
                1.0
            } else {
                (mq_mat.transpose() * pencil.solve_k(&mq_mat)?)[(0, 0)]
            };
            let omega_kappa = if beta == 0.0 {
                1.0
            } else {
                mq.norm_squared() / kappa.max(f64::MIN_POSITIVE)
            };
            let exact_left = tridiagonal_lehmann(&part, omega_exact, rho)?;
            let relaxed = tridiagonal_lehmann(&part, omega_kappa, rho)?;
            for (bounds, omega) in [(&exact_left, omega_exact), (&relaxed, omega_kappa)] {
                let w = DMatrix::from_element(c.nrows(), c.nrows(), omega);
                violations += bauer_fike_check(&t, &c, &w, bounds.rho, bounds)?.violations();
            }
            lehmann_left = Some(ShiftedBounds {
                variant: Variant::Left,
                ..exact_left
            });
            goerisch_left = Some(relaxed);
        }

        let shift_invert = match &si {
            Some(f) if ell <= f.ell() => Some(map_back(&symmetric_eigenvalues(&f.prefix(ell).tridiagonal())?, rho)),
            _ => None,
        };

        steps.push(HistoryStep {
            ell,
            ritz,
            harmonic,
            dual,
            lehmann_right,
            lehmann_left,
            goerisch_left,
            shift_invert,
            bauer_fike_violations: violations,
        });
    }
    Ok(ConvergenceHistory { rho, exact, steps })
}

/// Values of a set labeled relative to `ρ`: `-1, -2, …` below (nearest
/// first) and `1, 2, …` above.
pub fn shift_labels(values: &[f64], rho: f64) -> Vec<(isize, f64)> {
    let mut below: Vec<f64> = values.iter().copied().filter(|&v| v < rho).collect();
    let mut above: Vec<f64> = values.iter().copied().filter(|&v| v >= rho).collect();
    below.sort_by(|a, b| b.total_cmp(a));
    above.sort_by(f64::total_cmp);
    let mut out: Vec<(isize, f64)> = below
        .into_iter()
        .enumerate()
        .map(|(i, v)| (-(i as isize) - 1, v))
        .collect();
    out.extend(above.into_iter().enumerate().map(|(i, v)| (i as isize + 1, v)));
    out
}
