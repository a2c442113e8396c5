//! Right- and left-definite Lehmann bounds about a shift `ρ`.
//!
//! Both variants are Rayleigh–Ritz applied to a spectrally transformed
//! problem: `λ ↦ 1/(λ-ρ)` (right-definite, needs solves with `M`) and
//! `λ ↦ λ/(λ-ρ)` (left-definite, needs solves with `K`). In terms of the
//! Schwarz matrices and `J₀, J₁, J₂` the projected pencils are
//!
//! ```text
//! right:  J₁ y = R (J₀ - ρJ₁) y,   Λ⁽ᴿ⁾ = ρ + 1/R
//! left:   J₁ y = L (J₁ - ρJ₂) y,   Λ⁽ᴸ⁾ = ρ - ρ/(1 - L)
//! ```
//!
//! Both right-hand sides are positive definite whenever `ρ` is not an
//! eigenvalue, so every solve is a Cholesky reduction. Negative `R`/`L`
//! give bounds below `ρ`, positive ones bounds above; the interval
//! `[Λ₋ₖ, ρ)` holds at least `k` eigenvalues and `(ρ, Λ_ℓ]` at least `ℓ`.

use nalgebra::{DMatrix, DVector};

use crate::error::{BoundsError, Result};
use crate::pencil::{
    frobenius, inertia, j_matrices, solve_definite_gep, symmetric_eigenvalues, Inertia, Pencil, SchwarzMatrices,
    ZERO_BAND,
};

/// Smallest eigenvalue of the definite right-hand side below this fraction
/// of its Frobenius norm means `ρ` is taken to be an eigenvalue.
pub const SHIFT_BAND: f64 = 1e-12;

/// Relative slack used when comparing bounds in the verification reports.
pub const COMPARE_SLACK: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    Right,
    Left,
    GoerischLeft,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Right => "lehmann_right",
            Variant::Left => "lehmann_left",
            Variant::GoerischLeft => "goerisch_left",
        }
    }
}

/// One Lehmann bound. A wrapped bound landed on the wrong side of `ρ`
/// (its transformed value crossed the point at infinity) and only carries a
/// trivial statement.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bound {
    pub value: f64,
    pub wrapped: bool,
}

/// Lehmann bounds labeled relative to the shift.
#[derive(Clone, Debug, PartialEq)]
pub struct ShiftedBounds {
    pub rho: f64,
    pub variant: Variant,
    /// `Λ₋₁, Λ₋₂, …` below `ρ`, nearest first.
    pub lower: Vec<Bound>,
    /// `Λ₁, Λ₂, …` above `ρ`, nearest first (wrapped entries last).
    pub upper: Vec<Bound>,
    /// Transformed values inside the zero band, assigned to neither side.
    pub indeterminate: usize,
    /// Amount added to the caller's shift to step off a Ritz value (bordered forms only).
    pub shift_perturbation: f64,
    /// Whether the bordered left pencil was Hermitian definite.
    pub definite: bool,
}

impl ShiftedBounds {
    pub fn nu(&self) -> usize {
        self.lower.len()
    }

    pub fn pi(&self) -> usize {
        self.upper.len()
    }

    /// `Λ₋ₖ`, unless missing or wrapped.
    pub fn lower_bound(&self, k: usize) -> Option<f64> {
        k.checked_sub(1)
            .and_then(|i| self.lower.get(i))
            .filter(|b| !b.wrapped)
            .map(|b| b.value)
    }

    /// `Λ_ℓ`, unless missing or wrapped.
    pub fn upper_bound(&self, l: usize) -> Option<f64> {
        l.checked_sub(1)
            .and_then(|i| self.upper.get(i))
            .filter(|b| !b.wrapped)
            .map(|b| b.value)
    }

    /// Every bound value in ascending order, wrapped ones included.
    pub fn all_values(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.lower.iter().chain(&self.upper).map(|b| b.value).collect();
        v.sort_by(f64::total_cmp);
        v
    }

    /// Splits `(θ, Λ)` pairs, where `θ` is the eigenvalue of the pencil with
    /// left-hand side `J₁`, into bounds below and above `ρ`.
    pub(crate) fn assemble(rho: f64, variant: Variant, pairs: Vec<(f64, f64)>) -> Self {
        let band = ZERO_BAND * pairs.iter().fold(0.0f64, |acc, p| acc.max(p.0.abs()));
        let mut lower: Vec<(f64, f64)> = Vec::new();
        let mut upper: Vec<(f64, f64)> = Vec::new();
        let mut indeterminate = 0;
        for (theta, value) in pairs {
            if theta.is_nan() || theta.abs() <= band {
                indeterminate += 1;
            } else if theta < 0.0 {
                lower.push((theta, value));
            } else {
                upper.push((theta, value));
            }
        }
        lower.sort_by(|a, b| a.0.total_cmp(&b.0));
        upper.sort_by(|a, b| b.0.total_cmp(&a.0));
        Self {
            rho,
            variant,
            lower: lower
                .into_iter()
                .map(|(_, value)| Bound {
                    value,
                    wrapped: !(value < rho),
                })
                .collect(),
            upper: upper
                .into_iter()
                .map(|(_, value)| Bound {
                    value,
                    wrapped: !(value > rho),
                })
                .collect(),
            indeterminate,
            shift_perturbation: 0.0,
            definite: true,
        }
    }
}

/// Solves the shifted pencil with inner matrix `X` and outer matrix `Y`
/// (`B = Y - ρX` positive definite). Returns `(t, s, Λ)` triples where
/// `X y = t B y`, `Y y = s B y`, `s = 1 + ρt` and `Λ = ρ + 1/t = ρs/(s-1)`.
///
/// The `t` form is used for small shifts and the `s` form for large ones so
/// that neither the `ρ → 0` nor the `|ρ| → ∞` limit suffers cancellation.
fn shifted_pencil(inner: &DMatrix<f64>, outer: &DMatrix<f64>, rho: f64, scale: f64) -> Result<Vec<(f64, f64, f64)>> {
    let b = outer - inner * rho;
    let b_min = symmetric_eigenvalues(&b)?.first().copied().unwrap_or(1.0);
    if !(b_min > SHIFT_BAND * frobenius(&b)) {
        return Err(BoundsError::ShiftAtEigenvalue(rho));
    }
    if rho.abs() <= scale {
        let sol = solve_definite_gep(inner, &b)?;
        Ok(sol
            .values
            .as_slice()
            .iter()
            .map(|&t| {
                let value = if t == 0.0 { f64::INFINITY } else { rho + t.recip() };
                (t, 1.0 + rho * t, value)
            })
            .collect())
    } else {
        let sol = solve_definite_gep(outer, &b)?;
        Ok(sol
            .values
            .as_slice()
            .iter()
            .map(|&s| {
                let value = if s == 1.0 { f64::INFINITY } else { rho * s / (s - 1.0) };
                ((s - 1.0) / rho, s, value)
            })
            .collect())
    }
}

fn ratio_scale(num: &DMatrix<f64>, den: &DMatrix<f64>) -> f64 {
    let d = frobenius(den);
    if d == 0.0 {
        f64::INFINITY
    } else {
        frobenius(num) / d
    }
}

/// Right-definite Lehmann bounds from `J₁ y = R (H₀ - 2ρH₁ + ρ²H₂) y`.
pub fn right_lehmann(s: &SchwarzMatrices, rho: f64) -> Result<ShiftedBounds> {
    if !rho.is_finite() {
        return Err(BoundsError::ShiftAtEigenvalue(rho));
    }
    let j = j_matrices(s, rho);
    let triples = shifted_pencil(&j.j1, &j.j0, rho, ratio_scale(&s.h1, &s.h2))?;
    let pairs = triples.into_iter().map(|(t, _, value)| (t, value)).collect();
    Ok(ShiftedBounds::assemble(rho, Variant::Right, pairs))
}

/// Left-definite Lehmann bounds from `J₁ y = L (H₁ - 2ρH₂ + ρ²H₃) y`;
/// needs `K` positive definite (checked through `H₁`).
pub fn left_lehmann(s: &SchwarzMatrices, rho: f64) -> Result<ShiftedBounds> {
    if !rho.is_finite() {
        return Err(BoundsError::ShiftAtEigenvalue(rho));
    }
    if nalgebra::Cholesky::new(s.h1.clone()).is_none() {
        return Err(BoundsError::NotPositiveDefinite("K"));
    }
    let j = j_matrices(s, rho);
    let triples = shifted_pencil(&j.j2, &j.j1, rho, ratio_scale(&s.h2, &s.h3))?;
    let pairs = triples.into_iter().map(|(_, l, value)| (l, value)).collect();
    Ok(ShiftedBounds::assemble(rho, Variant::Left, pairs))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// `[endpoint, ρ)`
    Below,
    /// `(ρ, endpoint]`
    Above,
}

/// "The interval contains at least `guaranteed_count` eigenvalues."
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InclusionStatement {
    pub side: Side,
    pub endpoint: f64,
    pub rho: f64,
    pub guaranteed_count: usize,
}

impl InclusionStatement {
    /// Checks the statement against a known spectrum; the closed end is
    /// widened by `slack` relative to absorb roundoff in exact cases.
    pub fn holds(&self, spectrum: &[f64], slack: f64) -> bool {
        let widen = slack * (1.0 + self.endpoint.abs());
        let count = match self.side {
            Side::Below => spectrum
                .iter()
                .filter(|&&l| l >= self.endpoint - widen && l < self.rho)
                .count(),
            Side::Above => spectrum
                .iter()
                .filter(|&&l| l > self.rho && l <= self.endpoint + widen)
                .count(),
        };
        count >= self.guaranteed_count
    }
}

/// One statement per non-wrapped bound: `[Λ₋ₖ, ρ)` holds `k`, `(ρ, Λ_ℓ]` holds `ℓ`.
pub fn inclusion_intervals(b: &ShiftedBounds) -> Vec<InclusionStatement> {
    let below = b
        .lower
        .iter()
        .enumerate()
        .filter(|(_, e)| !e.wrapped)
        .map(|(i, e)| InclusionStatement {
            side: Side::Below,
            endpoint: e.value,
            rho: b.rho,
            guaranteed_count: i + 1,
        });
    let above = b
        .upper
        .iter()
        .enumerate()
        .filter(|(_, e)| !e.wrapped)
        .map(|(i, e)| InclusionStatement {
            side: Side::Above,
            endpoint: e.value,
            rho: b.rho,
            guaranteed_count: i + 1,
        });
    below.chain(above).collect()
}

/// Temple's lower bound `ρ + pᵗ(K-ρM)M⁻¹(K-ρM)p / pᵗ(K-ρM)p` for the
/// eigenvalue just below `ρ`; needs `pᵗ(K-ρM)p < 0`.
pub fn temple(pencil: &Pencil, p: &DVector<f64>, rho: f64) -> Result<f64> {
    if p.len() != pencil.dim() {
        return Err(BoundsError::DimensionMismatch(format!(
            "vector has length {}, pencil has dimension {}",
            p.len(),
            pencil.dim()
        )));
    }
    let q = pencil.k() * p - pencil.m() * p * rho;
    let den = p.dot(&q);
    if !(den < 0.0) {
        return Err(BoundsError::WrongSide(den));
    }
    let qm = DMatrix::from_column_slice(q.len(), 1, q.as_slice());
    let num = (qm.transpose() * pencil.solve_m(&qm))[(0, 0)];
    Ok(rho + num / den)
}

/// Maximum relative deviations between limiting Lehmann bounds and the Ritz family.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LimitReport {
    /// Right-definite at `ρ = 0` against harmonic Ritz values.
    pub right_at_zero: f64,
    /// Left-definite at `ρ = 0` against Ritz values.
    pub left_at_zero: f64,
    /// Right-definite at `|ρ| = 10⁸‖K‖` against Ritz values.
    pub right_at_infinity: f64,
    /// Left-definite at `|ρ| = 10⁸‖K‖` against dual harmonic Ritz values.
    pub left_at_infinity: f64,
}

impl LimitReport {
    pub fn max(&self) -> f64 {
        self.right_at_zero
            .max(self.left_at_zero)
            .max(self.right_at_infinity)
            .max(self.left_at_infinity)
    }
}

/// Shift magnitude, relative to `‖K‖`, standing in for `ρ → ±∞`.
pub const INFINITE_SHIFT_FACTOR: f64 = 1e8;

pub(crate) fn max_relative_deviation(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs() / y.abs().max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max)
}

/// Compares the `ρ → 0` and `ρ → ±∞` limits of both Lehmann variants with
/// the Ritz, harmonic and dual harmonic values; `k_norm` sets the scale of
/// the large shift.
pub fn limit_consistency(s: &SchwarzMatrices, k_norm: f64) -> Result<LimitReport> {
    let ritz = solve_definite_gep(&s.h1, &s.h2)?.values;
    let harmonic = solve_definite_gep(&s.h0, &s.h1)?.values;
    let dual = solve_definite_gep(&s.h2, &s.h3)?.values;

    let right_at_zero = max_relative_deviation(&right_lehmann(s, 0.0)?.all_values(), harmonic.as_slice());
    let left_at_zero = max_relative_deviation(&left_lehmann(s, 0.0)?.all_values(), ritz.as_slice());
    let big = INFINITE_SHIFT_FACTOR * k_norm;
    let mut right_at_infinity = 0.0f64;
    let mut left_at_infinity = 0.0f64;
    for rho in [big, -big] {
        right_at_infinity = right_at_infinity.max(max_relative_deviation(
            &right_lehmann(s, rho)?.all_values(),
            ritz.as_slice(),
        ));
        left_at_infinity = left_at_infinity.max(max_relative_deviation(
            &left_lehmann(s, rho)?.all_values(),
            dual.as_slice(),
        ));
    }
    Ok(LimitReport {
        right_at_zero,
        left_at_zero,
        right_at_infinity,
        left_at_infinity,
    })
}

/// `a <= b` up to [`COMPARE_SLACK`] relative.
pub fn le_slack(a: f64, b: f64) -> bool {
    a <= b + COMPARE_SLACK * 1f64.max(a.abs()).max(b.abs())
}

#[derive(Clone, Debug, PartialEq)]
pub struct IndexCheck {
    pub index: usize,
    pub right: f64,
    pub left: f64,
    pub exact: f64,
    /// Both links of the chain hold.
    pub holds: bool,
}

/// Index-wise comparison of left- and right-definite bounds.
#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonReport {
    pub rho: f64,
    pub r: usize,
    /// Whether the harmonic Ritz value `Λ̃_{r-1}` lies below `ρ`.
    pub hypothesis_met: bool,
    /// `Λ⁽ᴿ⁾₋ₖ <= Λ⁽ᴸ⁾₋ₖ <= λ_{r-k}`.
    pub lower: Vec<IndexCheck>,
    /// `λ_{r+ℓ-1} <= Λ⁽ᴸ⁾_ℓ <= Λ⁽ᴿ⁾_ℓ`.
    pub upper: Vec<IndexCheck>,
}

impl ComparisonReport {
    /// True when the hypothesis is unmet or every checked index holds.
    pub fn passed(&self) -> bool {
        !self.hypothesis_met || self.lower.iter().chain(&self.upper).all(|c| c.holds)
    }
}

/// Checks that left-definite bounds are uniformly tighter than right-definite
/// ones whenever `Λ̃_{r-1} < ρ`. `spectrum` is the exact spectrum (ascending),
/// used to locate `r` and to close both inequality chains.
pub fn left_right_compare(s: &SchwarzMatrices, rho: f64, spectrum: &[f64]) -> Result<ComparisonReport> {
    let m = s.dim();
    let r = 1 + spectrum.iter().filter(|&&l| l < rho).count();
    let harmonic = solve_definite_gep(&s.h0, &s.h1)?.values;
    let hypothesis_met = r - 1 <= m && (r == 1 || harmonic.bottom(r - 1).is_some_and(|h| h < rho));
    let mut report = ComparisonReport {
        rho,
        r,
        hypothesis_met,
        lower: Vec::new(),
        upper: Vec::new(),
    };
    if !hypothesis_met {
        return Ok(report);
    }
    let right = right_lehmann(s, rho)?;
    let left = left_lehmann(s, rho)?;
    for k in 1..r {
        let exact = spectrum[r - 1 - k];
        let (rv, lv) = (right.lower_bound(k), left.lower_bound(k));
        let holds = match (rv, lv) {
            (Some(a), Some(b)) => le_slack(a, b) && le_slack(b, exact),
            _ => false,
        };
        report.lower.push(IndexCheck {
            index: k,
            right: rv.unwrap_or(f64::NAN),
            left: lv.unwrap_or(f64::NAN),
            exact,
            holds,
        });
    }
    for l in 1..=(m + 1 - r) {
        let Some(&exact) = spectrum.get(r + l - 2) else { break };
        let (rv, lv) = (right.upper_bound(l), left.upper_bound(l));
        let holds = match (rv, lv) {
            (Some(a), Some(b)) => le_slack(exact, b) && le_slack(b, a),
            _ => false,
        };
        report.upper.push(IndexCheck {
            index: l,
            right: rv.unwrap_or(f64::NAN),
            left: lv.unwrap_or(f64::NAN),
            exact,
            holds,
        });
    }
    Ok(report)
}

/// Inertia of the `2m × 2m` matrix `[[J₀, J₁], [J₁, J₂]]`, which has at most
/// `r - 1` negative eigenvalues.
pub fn coupled_inertia(s: &SchwarzMatrices, rho: f64) -> Result<Inertia> {
    let j = j_matrices(s, rho);
    let m = s.dim();
    let mut g = DMatrix::zeros(2 * m, 2 * m);
    g.view_mut((0, 0), (m, m)).copy_from(&j.j0);
    g.view_mut((0, m), (m, m)).copy_from(&j.j1);
    g.view_mut((m, 0), (m, m)).copy_from(&j.j1);
    g.view_mut((m, m), (m, m)).copy_from(&j.j2);
    inertia(&g)
}
