//! Brute-force references: full dense spectra of a pencil computed through
//! `M^{-1/2}` (a route independent of the Cholesky reductions used by the
//! bound computations) and seeded random test instances.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{BoundsError, Result};
use crate::pencil::{symmetric_eigen, symmetrize, Pencil, SubspaceBasis};

pub fn random_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

pub fn random_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.sample(StandardNormal))
}

pub fn random_orthogonal<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DMatrix<f64> {
    random_matrix(rng, n, n).qr().q()
}

/// Symmetric positive definite matrix with eigenvalues drawn uniformly from `[lo, hi]`.
pub fn random_spd<R: Rng + ?Sized>(rng: &mut R, n: usize, lo: f64, hi: f64) -> DMatrix<f64> {
    let q = random_orthogonal(rng, n);
    let d = DVector::from_fn(n, |_, _| rng.random_range(lo..=hi));
    symmetrize(&(&q * DMatrix::from_diagonal(&d) * q.transpose()))
}

fn inverse_sqrt(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (values, vectors) = symmetric_eigen(m)?;
    if values.first().is_some_and(|&v| v <= 0.0) {
        return Err(BoundsError::NotPositiveDefinite("M"));
    }
    let d = DVector::from_iterator(values.len(), values.iter().map(|v| v.sqrt().recip()));
    Ok(&vectors * DMatrix::from_diagonal(&d) * vectors.transpose())
}

/// All eigenvalues of `Kx = λMx`, ascending.
pub fn pencil_spectrum(k: &DMatrix<f64>, m: &DMatrix<f64>) -> Result<Vec<f64>> {
    let s = inverse_sqrt(m)?;
    Ok(symmetric_eigen(&symmetrize(&(&s * k * &s)))?.0)
}

/// `M`-orthonormal eigenvectors of `Kx = λMx`, columns in ascending eigenvalue order.
pub fn pencil_eigenvectors(k: &DMatrix<f64>, m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let s = inverse_sqrt(m)?;
    let (_, v) = symmetric_eigen(&symmetrize(&(&s * k * &s)))?;
    Ok(s * v)
}

/// `r` with `λ_{r-1} < ρ < λ_r` (1-based); `None` when `ρ` sits on an eigenvalue.
pub fn separation_index(spectrum: &[f64], rho: f64, tol: f64) -> Option<usize> {
    if spectrum.iter().any(|&l| (l - rho).abs() <= tol * (1.0 + l.abs())) {
        return None;
    }
    Some(1 + spectrum.iter().filter(|&&l| l < rho).count())
}

/// Midpoint between `λ_{r-1}` and `λ_r` for `2 <= r <= n`.
pub fn gap_midpoint(spectrum: &[f64], r: usize) -> Option<f64> {
    if r < 2 || r > spectrum.len() {
        return None;
    }
    let (a, b) = (spectrum[r - 2], spectrum[r - 1]);
    (b > a).then_some(0.5 * (a + b))
}

/// Number of eigenvalues in the closed interval `[lo, hi]`, widened by `slack` relative.
pub fn count_in(spectrum: &[f64], lo: f64, hi: f64, slack: f64) -> usize {
    spectrum
        .iter()
        .filter(|&&l| l >= lo - slack * (1.0 + lo.abs()) && l <= hi + slack * (1.0 + hi.abs()))
        .count()
}

/// A seeded random definite pencil with a trial subspace and a shift in a spectral gap.
#[derive(Clone, Debug)]
pub struct Instance {
    pub pencil: Pencil,
    pub basis: SubspaceBasis,
    pub rho: f64,
    /// Exact spectrum, ascending.
    pub spectrum: Vec<f64>,
    /// `λ_{r-1} < ρ < λ_r`.
    pub r: usize,
    /// Whether the basis was built near an invariant subspace.
    pub near_invariant: bool,
}

#[derive(Clone, Copy, Debug)]
pub struct InstanceShape {
    pub min_n: usize,
    pub max_n: usize,
    /// Use `M = I`.
    pub standard: bool,
}

impl Default for InstanceShape {
    fn default() -> Self {
        Self {
            min_n: 4,
            max_n: 12,
            standard: false,
        }
    }
}

/// Draws an instance with `n` in `[min_n, max_n]`, `1 <= m <= n - 2`, `K`
/// eigenvalues in `[0.5, 20]`, `M` eigenvalues in `[0.5, 2]` and `ρ` at the
/// midpoint of a randomly chosen gap. Half the instances use a perturbed
/// invariant subspace around `ρ` so that the bounds are sharp.
pub fn random_instance<R: Rng + ?Sized>(rng: &mut R, shape: InstanceShape) -> Result<Instance> {
    let n = rng.random_range(shape.min_n.max(3)..=shape.max_n.max(shape.min_n.max(3)));
    let m_dim = rng.random_range(1..=n - 2);
    let k = random_spd(rng, n, 0.5, 20.0);
    let m = if shape.standard {
        DMatrix::identity(n, n)
    } else {
        random_spd(rng, n, 0.5, 2.0)
    };
    let spectrum = pencil_spectrum(&k, &m)?;
    let r = rng.random_range(2..=n);
    let rho = gap_midpoint(&spectrum, r).ok_or(BoundsError::ShiftAtEigenvalue(spectrum[r - 1]))?;

    let near_invariant = rng.random_bool(0.5);
    let p = if near_invariant {
        let vectors = pencil_eigenvectors(&k, &m)?;
        // eigenvectors nearest the gap, alternating below and above
        let mut picks = Vec::with_capacity(m_dim);
        let (mut lo, mut hi) = (r as isize - 2, r - 1);
        while picks.len() < m_dim {
            if (picks.len() % 2 == 0 && lo >= 0) || hi >= n {
                picks.push(lo as usize);
                lo -= 1;
            } else {
                picks.push(hi);
                hi += 1;
            }
        }
        let noise = 10f64.powf(rng.random_range(-4.0..-1.0));
        DMatrix::from_fn(n, m_dim, |i, j| vectors[(i, picks[j])]) + random_matrix(rng, n, m_dim) * noise
    } else {
        random_matrix(rng, n, m_dim)
    };
    Ok(Instance {
        pencil: Pencil::new(k, m)?,
        basis: SubspaceBasis::new(p)?,
        rho,
        spectrum,
        r,
        near_invariant,
    })
}
