//! Dense building blocks shared by every bound: the definite pencil `K - λM`,
//! trial subspaces, the Cholesky-reduced generalized eigensolver, matrix
//! inertia and the matrices of Schwarz constants.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};

use crate::error::{BoundsError, Result};

/// Relative width of the band around zero used by inertia counts and
/// "is this an eigenvalue" tests.
pub const ZERO_BAND: f64 = 1e-10;

/// Singular values below `RANK_TOL * sigma_max` are treated as zero.
pub const RANK_TOL: f64 = 1e-12;

/// Relative asymmetry tolerated on input before a matrix is rejected.
const SYMMETRY_TOL: f64 = 1e-12;

const EIGEN_EPS: f64 = f64::EPSILON;
const EIGEN_MAX_ITER: usize = 0;

pub(crate) fn frobenius(a: &DMatrix<f64>) -> f64 {
    a.norm()
}

pub(crate) fn symmetrize(a: &DMatrix<f64>) -> DMatrix<f64> {
    (a + a.transpose()) * 0.5
}

fn check_square(a: &DMatrix<f64>, name: &str) -> Result<usize> {
    if a.nrows() != a.ncols() {
        return Err(BoundsError::DimensionMismatch(format!(
            "{name} is {}x{}, expected square",
            a.nrows(),
            a.ncols()
        )));
    }
    Ok(a.nrows())
}

fn check_finite(a: &DMatrix<f64>, name: &'static str) -> Result<()> {
    if a.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(BoundsError::DimensionMismatch(format!("{name} has non-finite entries")))
    }
}

fn checked_symmetric(a: DMatrix<f64>, name: &'static str) -> Result<DMatrix<f64>> {
    check_square(&a, name)?;
    check_finite(&a, name)?;
    let scale = frobenius(&a).max(f64::MIN_POSITIVE);
    if frobenius(&(&a - a.transpose())) > SYMMETRY_TOL * scale {
        return Err(BoundsError::NotSymmetric(name));
    }
    Ok(symmetrize(&a))
}

/// Dense symmetric eigendecomposition with eigenvalues sorted ascending.
pub fn symmetric_eigen(a: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = check_square(a, "A")?;
    if n == 0 {
        return Ok((Vec::new(), DMatrix::zeros(0, 0)));
    }
    check_finite(a, "A")?;
    let eig = SymmetricEigen::try_new(symmetrize(a), EIGEN_EPS, EIGEN_MAX_ITER).ok_or(BoundsError::EigenFailure)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((values, vectors))
}

/// Eigenvalues of a symmetric matrix, ascending.
pub fn symmetric_eigenvalues(a: &DMatrix<f64>) -> Result<Vec<f64>> {
    let n = check_square(a, "A")?;
    if n == 0 {
        return Ok(Vec::new());
    }
    check_finite(a, "A")?;
    let mut values: Vec<f64> = SymmetricEigen::try_new(symmetrize(a), EIGEN_EPS, EIGEN_MAX_ITER)
        .ok_or(BoundsError::EigenFailure)?
        .eigenvalues
        .iter()
        .copied()
        .collect();
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// The symmetric pencil `K - λM` with `M` positive definite.
#[derive(Clone, Debug)]
pub struct Pencil {
    k: DMatrix<f64>,
    m: DMatrix<f64>,
    m_chol: Cholesky<f64, Dyn>,
    k_chol: Option<Cholesky<f64, Dyn>>,
}

impl Pencil {
    pub fn new(k: DMatrix<f64>, m: DMatrix<f64>) -> Result<Self> {
        let k = checked_symmetric(k, "K")?;
        let m = checked_symmetric(m, "M")?;
        if k.nrows() != m.nrows() {
            return Err(BoundsError::DimensionMismatch(format!(
                "K is {n}x{n} but M is {p}x{p}",
                n = k.nrows(),
                p = m.nrows()
            )));
        }
        let m_chol = Cholesky::new(m.clone()).ok_or(BoundsError::NotPositiveDefinite("M"))?;
        let k_chol = Cholesky::new(k.clone());
        Ok(Self { k, m, m_chol, k_chol })
    }

    /// The standard problem `Kx = λx`.
    pub fn standard(k: DMatrix<f64>) -> Result<Self> {
        let n = k.nrows();
        Self::new(k, DMatrix::identity(n, n))
    }

    pub fn dim(&self) -> usize {
        self.k.nrows()
    }

    pub fn k(&self) -> &DMatrix<f64> {
        &self.k
    }

    pub fn m(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn is_k_positive_definite(&self) -> bool {
        self.k_chol.is_some()
    }

    pub(crate) fn require_k_positive_definite(&self) -> Result<()> {
        if self.is_k_positive_definite() {
            Ok(())
        } else {
            Err(BoundsError::NotPositiveDefinite("K"))
        }
    }

    /// Frobenius norm of `K`.
    pub fn k_norm(&self) -> f64 {
        frobenius(&self.k)
    }

    pub fn solve_m(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        self.m_chol.solve(b)
    }

    /// `L_M^{-1} B` where `M = L_M L_Mᵗ`; `(L_M^{-1}B)ᵗ(L_M^{-1}B) = BᵗM⁻¹B`.
    pub(crate) fn m_half_solve(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        self.m_chol
            .l_dirty()
            .solve_lower_triangular(b)
            .expect("Cholesky factor has a nonzero diagonal")
    }

    /// Solves `K X = B`, through Cholesky when `K` is positive definite and LU otherwise.
    pub fn solve_k(&self, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if let Some(chol) = &self.k_chol {
            return Ok(chol.solve(b));
        }
        lu_solve(&self.k, b).ok_or(BoundsError::SingularK)
    }

    pub(crate) fn k_cholesky(&self) -> Option<&Cholesky<f64, Dyn>> {
        self.k_chol.as_ref()
    }

    pub(crate) fn m_cholesky(&self) -> &Cholesky<f64, Dyn> {
        &self.m_chol
    }

    /// Smallest eigenvalue of `K` (dense).
    pub fn k_min_eigenvalue(&self) -> Result<f64> {
        Ok(symmetric_eigenvalues(&self.k)?[0])
    }
}

/// Solves `A X = B` by partial-pivoting LU, `None` if `A` is numerically singular.
pub(crate) fn lu_solve(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let lu = a.clone().lu();
    let u = lu.u();
    let scale = u.diagonal().amax();
    if scale == 0.0 || u.diagonal().iter().any(|d| d.abs() <= 1e-14 * scale) {
        return None;
    }
    lu.solve(b)
}

/// Full-column-rank `n × m` basis of a trial subspace.
#[derive(Clone, Debug, PartialEq)]
pub struct SubspaceBasis {
    p: DMatrix<f64>,
}

impl SubspaceBasis {
    pub fn new(p: DMatrix<f64>) -> Result<Self> {
        let (n, m) = p.shape();
        if m == 0 || m > n {
            return Err(BoundsError::DimensionMismatch(format!(
                "basis is {n}x{m}; need 1 <= m <= n"
            )));
        }
        check_finite(&p, "P")?;
        let rank = numerical_rank(&p);
        if rank < m {
            return Err(BoundsError::RankDeficient { rank, expected: m });
        }
        Ok(Self { p })
    }

    pub fn from_columns(columns: &[DVector<f64>]) -> Result<Self> {
        if columns.is_empty() {
            return Err(BoundsError::DimensionMismatch("no basis columns".into()));
        }
        Self::new(DMatrix::from_columns(columns))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.p
    }

    pub fn dim(&self) -> usize {
        self.p.ncols()
    }

    pub fn ambient_dim(&self) -> usize {
        self.p.nrows()
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.p
    }

    pub(crate) fn check_against(&self, pencil: &Pencil) -> Result<()> {
        if self.ambient_dim() != pencil.dim() {
            return Err(BoundsError::DimensionMismatch(format!(
                "basis has {} rows, pencil has dimension {}",
                self.ambient_dim(),
                pencil.dim()
            )));
        }
        Ok(())
    }
}

fn numerical_rank(p: &DMatrix<f64>) -> usize {
    let sv = p.clone().singular_values();
    let smax = sv.amax();
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > RANK_TOL * smax).count()
}

/// Sorted values indexed from both edges: `k >= 1` counts from the bottom,
/// `-l` counts from the top.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EdgeLabeledValues {
    values: Vec<f64>,
}

impl EdgeLabeledValues {
    pub fn new(mut values: Vec<f64>) -> Self {
        values.sort_by(f64::total_cmp);
        Self { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    /// Value at a signed edge label; `0` and out-of-range labels give `None`.
    pub fn get(&self, index: isize) -> Option<f64> {
        let m = self.values.len() as isize;
        match index {
            k if k >= 1 && k <= m => Some(self.values[(k - 1) as usize]),
            l if l <= -1 && -l <= m => Some(self.values[(m + l) as usize]),
            _ => None,
        }
    }

    /// The `k`-th value from the bottom (1-based).
    pub fn bottom(&self, k: usize) -> Option<f64> {
        self.get(k as isize)
    }

    /// The `l`-th value from the top (1-based).
    pub fn top(&self, l: usize) -> Option<f64> {
        self.get(-(l as isize))
    }

    /// Signed label of the `i`-th ascending entry, counting from whichever edge is nearer.
    pub fn edge_label(&self, i: usize) -> isize {
        let m = self.values.len();
        if 2 * i < m {
            i as isize + 1
        } else {
            -((m - i) as isize)
        }
    }
}

/// All eigenpairs of a definite pencil `A y = θ B y`.
#[derive(Clone, Debug)]
pub struct GepSolution {
    pub values: EdgeLabeledValues,
    /// `B`-orthonormal eigenvectors, column `i` belongs to the `i`-th ascending value.
    pub vectors: DMatrix<f64>,
}

/// Solves `A y = θ B y` for symmetric `A` and symmetric positive definite `B`
/// by reducing with `B = L Lᵗ` to the symmetric eigenproblem for `L⁻¹ A L⁻ᵗ`.
pub fn solve_definite_gep(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<GepSolution> {
    let m = check_square(a, "A")?;
    if check_square(b, "B")? != m {
        return Err(BoundsError::DimensionMismatch(format!(
            "A is {m}x{m} but B is {n}x{n}",
            n = b.nrows()
        )));
    }
    check_finite(a, "A")?;
    check_finite(b, "B")?;
    let chol = Cholesky::new(symmetrize(b)).ok_or(BoundsError::NotPositiveDefinite("B"))?;
    let l = chol.l();
    let x = l
        .solve_lower_triangular(&symmetrize(a))
        .ok_or(BoundsError::NotPositiveDefinite("B"))?;
    let reduced = l
        .solve_lower_triangular(&x.transpose())
        .ok_or(BoundsError::NotPositiveDefinite("B"))?;
    let (values, v) = symmetric_eigen(&reduced)?;
    let vectors = l
        .tr_solve_lower_triangular(&v)
        .ok_or(BoundsError::NotPositiveDefinite("B"))?;
    Ok(GepSolution {
        values: EdgeLabeledValues::new(values),
        vectors,
    })
}

/// Negative, zero and positive eigenvalue counts of a symmetric matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Inertia {
    pub negative: usize,
    pub zero: usize,
    pub positive: usize,
}

impl Inertia {
    pub fn dim(&self) -> usize {
        self.negative + self.zero + self.positive
    }
}

/// Inertia with eigenvalues `|θ| <= ZERO_BAND * ‖A‖_F` counted as zero.
pub fn inertia(a: &DMatrix<f64>) -> Result<Inertia> {
    let values = symmetric_eigenvalues(a)?;
    let band = ZERO_BAND * frobenius(a);
    let mut out = Inertia {
        negative: 0,
        zero: 0,
        positive: 0,
    };
    for v in values {
        if v.abs() <= band {
            out.zero += 1;
        } else if v < 0.0 {
            out.negative += 1;
        } else {
            out.positive += 1;
        }
    }
    Ok(out)
}

/// Returns `Q₁` with `Q₁ᵗ M Q₁ = I` and the same span as `P`
/// (Gram–Schmidt in the `M` inner product, two passes per column).
pub fn m_orthonormalize(basis: &SubspaceBasis, m: &DMatrix<f64>) -> Result<SubspaceBasis> {
    let p = basis.matrix();
    let (n, cols) = p.shape();
    if m.shape() != (n, n) {
        return Err(BoundsError::DimensionMismatch(format!(
            "M is {}x{}, basis has {n} rows",
            m.nrows(),
            m.ncols()
        )));
    }
    let mut q = DMatrix::zeros(n, cols);
    let mut mq = DMatrix::zeros(n, cols);
    for j in 0..cols {
        let original = p.column(j).into_owned();
        let mut v = original.clone();
        for _ in 0..2 {
            for i in 0..j {
                let c = mq.column(i).dot(&v);
                v.axpy(-c, &q.column(i), 1.0);
            }
        }
        let mv = m * &v;
        let norm = v.dot(&mv).max(0.0).sqrt();
        let original_norm = original.dot(&(m * &original)).max(0.0).sqrt();
        if !(norm > RANK_TOL * original_norm) {
            return Err(BoundsError::RankDeficient {
                rank: j,
                expected: cols,
            });
        }
        q.set_column(j, &(v / norm));
        mq.set_column(j, &(mv / norm));
    }
    Ok(SubspaceBasis { p: q })
}

/// `H₀ = PᵗKM⁻¹KP`, `H₁ = PᵗKP`, `H₂ = PᵗMP`, `H₃ = PᵗMK⁻¹MP`.
#[derive(Clone, Debug, PartialEq)]
pub struct SchwarzMatrices {
    pub h0: DMatrix<f64>,
    pub h1: DMatrix<f64>,
    pub h2: DMatrix<f64>,
    pub h3: DMatrix<f64>,
}

impl SchwarzMatrices {
    pub fn from_parts(h0: DMatrix<f64>, h1: DMatrix<f64>, h2: DMatrix<f64>, h3: DMatrix<f64>) -> Result<Self> {
        let h0 = checked_symmetric(h0, "H0")?;
        let h1 = checked_symmetric(h1, "H1")?;
        let h2 = checked_symmetric(h2, "H2")?;
        let h3 = checked_symmetric(h3, "H3")?;
        let m = h0.nrows();
        if [h1.nrows(), h2.nrows(), h3.nrows()].iter().any(|&d| d != m) {
            return Err(BoundsError::DimensionMismatch("Schwarz matrices differ in size".into()));
        }
        Ok(Self { h0, h1, h2, h3 })
    }

    pub fn dim(&self) -> usize {
        self.h1.nrows()
    }
}

pub fn schwarz_matrices(pencil: &Pencil, basis: &SubspaceBasis) -> Result<SchwarzMatrices> {
    basis.check_against(pencil)?;
    let p = basis.matrix();
    Ok(SchwarzMatrices {
        h0: schwarz_h0(pencil, p),
        h1: schwarz_h1(pencil, p),
        h2: schwarz_h2(pencil, p),
        h3: schwarz_h3(pencil, p)?,
    })
}

/// `PᵗKM⁻¹KP`, formed as a Gram matrix so it is positive semidefinite by construction.
pub(crate) fn schwarz_h0(pencil: &Pencil, p: &DMatrix<f64>) -> DMatrix<f64> {
    let half = pencil.m_half_solve(&(pencil.k() * p));
    symmetrize(&(half.transpose() * &half))
}

pub(crate) fn schwarz_h1(pencil: &Pencil, p: &DMatrix<f64>) -> DMatrix<f64> {
    symmetrize(&(p.transpose() * pencil.k() * p))
}

pub(crate) fn schwarz_h2(pencil: &Pencil, p: &DMatrix<f64>) -> DMatrix<f64> {
    symmetrize(&(p.transpose() * pencil.m() * p))
}

/// `PᵗMK⁻¹MP`; a Gram matrix when `K` is positive definite, an LU solve otherwise.
pub(crate) fn schwarz_h3(pencil: &Pencil, p: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let mp = pencil.m() * p;
    match &pencil.k_chol {
        Some(chol) => {
            let half = chol
                .l_dirty()
                .solve_lower_triangular(&mp)
                .expect("Cholesky factor has a nonzero diagonal");
            Ok(symmetrize(&(half.transpose() * &half)))
        }
        None => {
            let x = lu_solve(pencil.k(), &mp).ok_or(BoundsError::SingularK)?;
            Ok(symmetrize(&(mp.transpose() * x)))
        }
    }
}

/// `J₀ = H₀ - ρH₁`, `J₁ = H₁ - ρH₂`, `J₂ = H₂ - ρH₃`.
#[derive(Clone, Debug, PartialEq)]
pub struct JMatrices {
    pub j0: DMatrix<f64>,
    pub j1: DMatrix<f64>,
    pub j2: DMatrix<f64>,
}

pub fn j_matrices(s: &SchwarzMatrices, rho: f64) -> JMatrices {
    JMatrices {
        j0: &s.h0 - &s.h1 * rho,
        j1: &s.h1 - &s.h2 * rho,
        j2: &s.h2 - &s.h3 * rho,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use crate::oracle::{random_matrix, random_spd};

    fn diag(v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_column_slice(v))
    }

    #[test]
    fn gep_diagonal_cases() {
        let sol = solve_definite_gep(&diag(&[3.0, 1.0]), &DMatrix::identity(2, 2)).unwrap();
        assert_eq!(sol.values.as_slice(), &[1.0, 3.0]);
        assert!((sol.vectors[(1, 0)].abs() - 1.0).abs() < 1e-15);
        assert!((sol.vectors[(0, 1)].abs() - 1.0).abs() < 1e-15);

        let sol = solve_definite_gep(&DMatrix::identity(2, 2), &diag(&[2.0, 4.0])).unwrap();
        assert!((sol.values.bottom(1).unwrap() - 0.25).abs() < 1e-15);
        assert!((sol.values.bottom(2).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn gep_rejects_indefinite_b_and_bad_shapes() {
        let err = solve_definite_gep(&DMatrix::identity(2, 2), &diag(&[1.0, -1.0])).unwrap_err();
        assert_eq!(err, BoundsError::NotPositiveDefinite("B"));
        let err = solve_definite_gep(&DMatrix::identity(2, 2), &DMatrix::identity(3, 3));
        assert!(matches!(err, Err(BoundsError::DimensionMismatch(_))));
    }

    #[test]
    fn gep_random_residual_and_b_orthonormality() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let a = crate::pencil::symmetrize(&random_matrix(&mut rng, 6, 6));
            let b = random_spd(&mut rng, 6, 0.5, 3.0);
            let sol = solve_definite_gep(&a, &b).unwrap();
            let theta = DMatrix::from_diagonal(&DVector::from_column_slice(sol.values.as_slice()));
            let resid = &a * &sol.vectors - &b * &sol.vectors * theta;
            let tmax = sol.values.as_slice().iter().fold(0.0f64, |acc, t| acc.max(t.abs()));
            assert!(resid.norm() <= 1e-10 * 6.0 * (a.norm() + tmax * b.norm()));
            let gram = sol.vectors.transpose() * &b * &sol.vectors;
            assert!((gram - DMatrix::identity(6, 6)).norm() < 1e-10);
        }
    }

    #[test]
    fn inertia_examples() {
        let i = inertia(&diag(&[-1.0, 2.0, 3.0])).unwrap();
        assert_eq!(
            i,
            Inertia {
                negative: 1,
                zero: 0,
                positive: 2
            }
        );
        let i = inertia(&DMatrix::zeros(3, 3)).unwrap();
        assert_eq!(
            i,
            Inertia {
                negative: 0,
                zero: 3,
                positive: 0
            }
        );
        assert_eq!(i.dim(), 3);
    }

    #[test]
    fn edge_labels() {
        let v = EdgeLabeledValues::new(vec![3.0, 1.0, 2.0, 5.0]);
        assert_eq!(v.get(1), Some(1.0));
        assert_eq!(v.get(-1), Some(5.0));
        assert_eq!(v.get(0), None);
        assert_eq!(v.get(5), None);
        assert_eq!(v.get(-5), None);
        for k in 1..=4 {
            assert_eq!(v.get(k), v.get(-(5 - k)));
        }
        let labels: Vec<isize> = (0..4).map(|i| v.edge_label(i)).collect();
        assert_eq!(labels, vec![1, 2, -2, -1]);
        let odd = EdgeLabeledValues::new(vec![1.0, 2.0, 3.0]);
        assert_eq!((0..3).map(|i| odd.edge_label(i)).collect::<Vec<_>>(), vec![1, 2, -1]);
    }

    #[test]
    fn m_orthonormalize_examples() {
        let p = SubspaceBasis::new(DMatrix::from_column_slice(2, 1, &[1.0, 0.0])).unwrap();
        let q = m_orthonormalize(&p, &diag(&[4.0, 1.0])).unwrap();
        assert!((q.matrix()[(0, 0)] - 0.5).abs() < 1e-15);
        assert_eq!(q.matrix()[(1, 0)], 0.0);

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let p = DMatrix::from_column_slice(3, 2, &[s, s, 0.0, 0.0, 0.0, 1.0]);
        let q = m_orthonormalize(&SubspaceBasis::new(p.clone()).unwrap(), &DMatrix::identity(3, 3)).unwrap();
        assert!((q.matrix() - p).norm() < 1e-15);
    }

    #[test]
    fn m_orthonormalize_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let p = SubspaceBasis::new(random_matrix(&mut rng, 8, 3)).unwrap();
            let m = random_spd(&mut rng, 8, 0.3, 4.0);
            let q = m_orthonormalize(&p, &m).unwrap();
            let gram = q.matrix().transpose() * &m * q.matrix();
            assert!((gram - DMatrix::identity(3, 3)).norm() < 1e-12);
            // same span: projecting P onto span(Q) in the M inner product loses nothing
            let coeff = q.matrix().transpose() * &m * p.matrix();
            assert!((q.matrix() * coeff - p.matrix()).norm() < 1e-10 * p.matrix().norm());
        }
    }

    #[test]
    fn rank_deficient_basis_rejected() {
        let p = DMatrix::from_column_slice(3, 2, &[1.0, 2.0, 3.0, 2.0, 4.0, 6.0]);
        assert_eq!(
            SubspaceBasis::new(p).unwrap_err(),
            BoundsError::RankDeficient { rank: 1, expected: 2 }
        );
        assert!(SubspaceBasis::new(DMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn pencil_validation() {
        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]);
        assert_eq!(Pencil::standard(asym).unwrap_err(), BoundsError::NotSymmetric("K"));
        let err = Pencil::new(DMatrix::identity(2, 2), diag(&[1.0, -1.0])).unwrap_err();
        assert_eq!(err, BoundsError::NotPositiveDefinite("M"));
        let p = Pencil::standard(diag(&[-1.0, 2.0])).unwrap();
        assert!(!p.is_k_positive_definite());
        let p = Pencil::standard(diag(&[1.0, 2.0])).unwrap();
        assert!(p.is_k_positive_definite());
    }

    #[test]
    fn schwarz_diagonal_example() {
        let pencil = Pencil::standard(diag(&[1.0, 3.0])).unwrap();
        let basis = SubspaceBasis::new(DMatrix::identity(2, 2)).unwrap();
        let s = schwarz_matrices(&pencil, &basis).unwrap();
        assert!((s.h0.clone() - diag(&[1.0, 9.0])).norm() < 1e-14);
        assert!((s.h1.clone() - diag(&[1.0, 3.0])).norm() < 1e-14);
        assert!((s.h2.clone() - DMatrix::identity(2, 2)).norm() < 1e-14);
        assert!((s.h3.clone() - diag(&[1.0, 1.0 / 3.0])).norm() < 1e-14);

        let j = j_matrices(&s, 0.0);
        assert_eq!((j.j0, j.j1, j.j2), (s.h0.clone(), s.h1.clone(), s.h2.clone()));
        let j = j_matrices(&s, 2.0);
        assert!((j.j1 - diag(&[-1.0, 1.0])).norm() < 1e-14);
    }

    #[test]
    fn schwarz_invariant_subspace_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let k = random_spd(&mut rng, 7, 1.0, 9.0);
        let m = random_spd(&mut rng, 7, 0.5, 2.0);
        let pencil = Pencil::new(k.clone(), m.clone()).unwrap();
        let vecs = crate::oracle::pencil_eigenvectors(&k, &m).unwrap();
        let basis = SubspaceBasis::new(vecs.columns(1, 3).into_owned()).unwrap();
        let s = schwarz_matrices(&pencil, &basis).unwrap();
        let h2_inv = s.h2.clone().try_inverse().unwrap();
        let rhs = &s.h1 * &h2_inv * &s.h1;
        assert!((s.h0.clone() - rhs).norm() < 1e-9 * s.h0.norm());
        let rho = 1.7;
        let j = j_matrices(&s, rho);
        // invariant subspace: J0 = H1 H2⁻¹ J1
        let direct = &s.h1 * &h2_inv * &j.j1;
        assert!((j.j0.clone() - direct).norm() < 1e-9 * j.j0.norm());
    }

    #[test]
    fn schwarz_needs_nonsingular_k() {
        let pencil = Pencil::standard(diag(&[0.0, 1.0])).unwrap();
        let basis = SubspaceBasis::new(DMatrix::identity(2, 2)).unwrap();
        assert_eq!(schwarz_matrices(&pencil, &basis).unwrap_err(), BoundsError::SingularK);
    }
}
