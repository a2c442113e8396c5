//! Parsing of the small argument languages: matrix generators, shifts,
//! start vectors and subspace specifications.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spectral_bounds::oracle::{gap_midpoint, pencil_spectrum, random_matrix, random_vector};
use spectral_bounds::{pencil_krylov_basis, Pencil, SubspaceBasis};

use crate::error::CliError;
use crate::mtx;

/// `diag:start:step:stop` (inclusive stop, like a colon range) or `diag:v1,v2,…`.
#[derive(Clone, Debug, PartialEq)]
pub struct Generator(pub Vec<f64>);

impl FromStr for Generator {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let body = s
            .strip_prefix("diag:")
            .ok_or_else(|| format!("unknown generator `{s}` (expected diag:a:b:c or diag:v1,v2,...)"))?;
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| format!("bad number `{t}` in `{s}`"))
        };
        let parts: Vec<&str> = body.split(':').collect();
        let values = match parts.as_slice() {
            [start, step, stop] => {
                let (start, step, stop) = (num(start)?, num(step)?, num(stop)?);
                if step == 0.0 || !step.is_finite() {
                    return Err(format!("range step must be nonzero in `{s}`"));
                }
                let count = ((stop - start) / step + 1e-9).floor();
                if !(count >= 0.0) || count > 1e6 {
                    return Err(format!("range `{s}` is empty or too long"));
                }
                (0..=count as usize).map(|i| start + step * i as f64).collect()
            }
            [list] => list.split(',').map(num).collect::<Result<Vec<_>, _>>()?,
            _ => return Err(format!("malformed generator `{s}`")),
        };
        if values.is_empty() {
            return Err(format!("generator `{s}` produced no entries"));
        }
        Ok(Generator(values))
    }
}

impl Generator {
    pub fn matrix(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_column_slice(&self.0))
    }
}

/// Shift given directly or as `gap:r`, the midpoint of `λ_{r-1}` and `λ_r`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ShiftSpec {
    Value(f64),
    Gap(usize),
}

impl FromStr for ShiftSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Some(r) = s.strip_prefix("gap:") {
            return r
                .parse()
                .map(ShiftSpec::Gap)
                .map_err(|_| format!("bad gap index in `{s}`"));
        }
        s.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .map(ShiftSpec::Value)
            .ok_or_else(|| format!("shift must be a number or gap:r, got `{s}`"))
    }
}

impl ShiftSpec {
    pub fn resolve(self, pencil: &Pencil) -> Result<f64, CliError> {
        match self {
            ShiftSpec::Value(v) => Ok(v),
            ShiftSpec::Gap(r) => {
                let spectrum = pencil_spectrum(pencil.k(), pencil.m()).map_err(|e| CliError::math("spectrum", e))?;
                gap_midpoint(&spectrum, r).ok_or_else(|| {
                    CliError::Input(format!(
                        "gap:{r} needs 2 <= r <= {} and distinct neighbouring eigenvalues",
                        spectrum.len()
                    ))
                })
            }
        }
    }
}

/// Start vector: `ones`, `e<i>` (1-based), `random` or a Matrix Market file.
#[derive(Clone, Debug, PartialEq)]
pub enum StartSpec {
    Ones,
    Unit(usize),
    Random,
    File(PathBuf),
}

impl FromStr for StartSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "ones" => StartSpec::Ones,
            "random" => StartSpec::Random,
            _ => match unit_index(s) {
                Some(i) => StartSpec::Unit(i),
                None => StartSpec::File(PathBuf::from(s)),
            },
        })
    }
}

fn unit_index(s: &str) -> Option<usize> {
    s.strip_prefix('e')?.parse().ok().filter(|&i| i >= 1)
}

impl StartSpec {
    pub fn vector(&self, n: usize, seed: u64) -> Result<DVector<f64>, CliError> {
        match self {
            StartSpec::Ones => Ok(DVector::from_element(n, 1.0)),
            StartSpec::Unit(i) => {
                if *i > n {
                    return Err(CliError::Input(format!("e{i} out of range for dimension {n}")));
                }
                let mut v = DVector::zeros(n);
                v[i - 1] = 1.0;
                Ok(v)
            }
            StartSpec::Random => Ok(random_vector(&mut ChaCha8Rng::seed_from_u64(seed), n)),
            StartSpec::File(path) => {
                let m = read_matrix(path)?;
                if m.shape() != (n, 1) {
                    return Err(CliError::Input(format!(
                        "{}: start vector must be {n}x1, got {}x{}",
                        path.display(),
                        m.nrows(),
                        m.ncols()
                    )));
                }
                Ok(m.column(0).into_owned())
            }
        }
    }
}

/// `START:M`, e.g. `ones:10`.
#[derive(Clone, Debug, PartialEq)]
pub struct KrylovSpec {
    pub start: StartSpec,
    pub dim: usize,
}

impl FromStr for KrylovSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (start, dim) = s
            .rsplit_once(':')
            .ok_or_else(|| format!("expected START:M, got `{s}`"))?;
        let dim: usize = dim.parse().map_err(|_| format!("bad Krylov dimension in `{s}`"))?;
        if dim == 0 {
            return Err("Krylov dimension must be positive".into());
        }
        Ok(KrylovSpec {
            start: start.parse()?,
            dim,
        })
    }
}

/// Explicit columns: `e1,e3,…` or a Matrix Market file holding the basis.
#[derive(Clone, Debug, PartialEq)]
pub enum ColumnsSpec {
    Units(Vec<usize>),
    File(PathBuf),
}

impl FromStr for ColumnsSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let units: Option<Vec<usize>> = s.split(',').map(unit_index).collect();
        Ok(match units {
            Some(u) if !u.is_empty() => ColumnsSpec::Units(u),
            _ => ColumnsSpec::File(PathBuf::from(s)),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SubspaceSpec {
    Krylov(KrylovSpec),
    Columns(ColumnsSpec),
    Random(usize),
}

impl SubspaceSpec {
    pub fn basis(&self, pencil: &Pencil, seed: u64) -> Result<SubspaceBasis, CliError> {
        let n = pencil.dim();
        let p = match self {
            SubspaceSpec::Krylov(k) => {
                let q1 = k.start.vector(n, seed)?;
                return pencil_krylov_basis(pencil, &q1, k.dim).map_err(|e| CliError::math("krylov basis", e));
            }
            SubspaceSpec::Columns(ColumnsSpec::Units(units)) => {
                let mut p = DMatrix::zeros(n, units.len());
                for (j, &i) in units.iter().enumerate() {
                    if i > n {
                        return Err(CliError::Input(format!("e{i} out of range for dimension {n}")));
                    }
                    p[(i - 1, j)] = 1.0;
                }
                p
            }
            SubspaceSpec::Columns(ColumnsSpec::File(path)) => {
                let p = read_matrix(path)?;
                if p.nrows() != n {
                    return Err(CliError::Input(format!(
                        "{}: basis has {} rows, pencil has dimension {n}",
                        path.display(),
                        p.nrows()
                    )));
                }
                p
            }
            SubspaceSpec::Random(m) => random_matrix(&mut ChaCha8Rng::seed_from_u64(seed), n, *m),
        };
        SubspaceBasis::new(p).map_err(|e| CliError::Input(format!("subspace: {e}")))
    }
}

pub fn read_matrix(path: &Path) -> Result<DMatrix<f64>, CliError> {
    mtx::read_file(path).map_err(|e| match e {
        mtx::MtxError::Parse { .. } => CliError::Input(format!("{}: {e}", path.display())),
        mtx::MtxError::Io { .. } => CliError::Input(e.to_string()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators() {
        let g: Generator = "diag:1:2:100".parse().unwrap();
        assert_eq!(g.0.len(), 50);
        assert_eq!((g.0[0], g.0[49]), (1.0, 99.0));
        let g: Generator = "diag:1,2,3,4".parse().unwrap();
        assert_eq!(g.0, vec![1.0, 2.0, 3.0, 4.0]);
        let g: Generator = "diag:0:0.5:1".parse().unwrap();
        assert_eq!(g.0, vec![0.0, 0.5, 1.0]);
        assert!("diag:1:0:4".parse::<Generator>().is_err());
        assert!("eye:3".parse::<Generator>().is_err());
        assert!("diag:1,x".parse::<Generator>().is_err());
    }

    #[test]
    fn shifts_and_subspaces() {
        assert_eq!("gap:3".parse::<ShiftSpec>().unwrap(), ShiftSpec::Gap(3));
        assert_eq!("-2.5".parse::<ShiftSpec>().unwrap(), ShiftSpec::Value(-2.5));
        assert!("nan".parse::<ShiftSpec>().is_err());
        let k: KrylovSpec = "ones:10".parse().unwrap();
        assert_eq!(
            k,
            KrylovSpec {
                start: StartSpec::Ones,
                dim: 10
            }
        );
        assert_eq!("e1,e2".parse::<ColumnsSpec>().unwrap(), ColumnsSpec::Units(vec![1, 2]));
        assert!(matches!(
            "basis.mtx".parse::<ColumnsSpec>().unwrap(),
            ColumnsSpec::File(_)
        ));
    }

    #[test]
    fn gap_shift_resolves_to_midpoint() {
        let pencil = Pencil::standard(Generator(vec![1.0, 3.0, 7.0]).matrix()).unwrap();
        assert_eq!(ShiftSpec::Gap(3).resolve(&pencil).unwrap(), 5.0);
        assert!(ShiftSpec::Gap(1).resolve(&pencil).is_err());
    }
}
