//! Hermitian spectral primitives.
//!
//! Every detection quantity in the crate is a function of the eigenvalues
//! of a Hermitian matrix: Schatten norms `(sum |l|^p)^(1/p)` and trace
//! moments `sum l^n` are both evaluated on the spectrum rather than on
//! matrix powers, so negative eigenvalues enter explicitly.

use nalgebra::SymmetricEigen;

use crate::{Error, Operator, Result, C64};

/// Absolute tolerance on `|m[i][j] - conj(m[j][i])|`.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// A square complex matrix known to be Hermitian.
///
/// Construction checks the entry asymmetry against [`HERMITIAN_TOL`] and then
/// stores the symmetrized `(m + m^dagger) / 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix(Operator);

impl HermitianMatrix {
    pub fn new(m: Operator) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        if m.nrows() == 0 {
            return Err(Error::InvalidParameter("matrix dimension must be >= 1".into()));
        }
        let asymmetry = max_asymmetry(&m);
        if !(asymmetry <= HERMITIAN_TOL) {
            return Err(Error::NotHermitian { asymmetry });
        }
        Ok(Self::symmetrize(m))
    }

    /// Symmetrizes without checking. Used for matrices that are Hermitian by
    /// construction but carry round-off proportional to their magnitude.
    pub(crate) fn symmetrize(m: Operator) -> Self {
        let h = (&m + m.adjoint()) * C64::new(0.5, 0.0);
        Self(h)
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Result<Self> {
        let n = diag.len();
        let m = Operator::from_fn(n, n, |i, j| {
            if i == j {
                C64::new(diag[i], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        Self::new(m)
    }

    pub fn identity(dim: usize) -> Result<Self> {
        Self::new(Operator::identity(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &Operator {
        &self.0
    }

    pub fn into_inner(self) -> Operator {
        self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    pub fn spectrum(&self) -> Spectrum {
        hermitian_spectrum(self)
    }
}

/// Largest `|m[i][j] - conj(m[j][i])|` over all entries.
pub fn max_asymmetry(m: &Operator) -> f64 {
    let n = m.nrows().min(m.ncols());
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            let d = (m[(i, j)] - m[(j, i)].conj()).norm();
            worst = worst.max(d);
        }
    }
    worst
}

/// Largest entry magnitude of a matrix.
pub fn max_abs(m: &Operator) -> f64 {
    m.iter().fold(0.0f64, |acc, z| acc.max(z.norm()))
}

/// Real eigenvalues of a Hermitian matrix, sorted descending.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum(Vec<f64>);

impl Spectrum {
    /// Wraps a list of eigenvalues, sorting it descending.
    pub fn from_eigenvalues(mut values: Vec<f64>) -> Self {
        values.sort_by(|a, b| b.total_cmp(a));
        Self(values)
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn min(&self) -> f64 {
        *self.0.last().expect("spectrum of a matrix with dim >= 1")
    }

    pub fn max(&self) -> f64 {
        self.0[0]
    }

    /// `(sum |l|^p)^(1/p)`; `p = 1` is the trace norm.
    pub fn schatten_norm(&self, p: f64) -> Result<f64> {
        if !(p >= 1.0) || !p.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "Schatten index p must be a finite value >= 1, got {p}"
            )));
        }
        if p == 1.0 {
            return Ok(self.0.iter().map(|l| l.abs()).sum());
        }
        let s: f64 = self.0.iter().map(|l| l.abs().powf(p)).sum();
        Ok(s.powf(1.0 / p))
    }

    /// `sum l^n` for `n >= 1`.
    pub fn moment(&self, n: u32) -> Result<f64> {
        if n == 0 {
            return Err(Error::InvalidParameter(
                "moment order must be >= 1 (order 0 is the dimension)".into(),
            ));
        }
        let n = i32::try_from(n).map_err(|_| Error::InvalidParameter(format!("moment order {n} too large")))?;
        Ok(self.0.iter().map(|l| l.powi(n)).sum())
    }
}

/// All eigenvalues of `m`, with multiplicity, descending.
pub fn hermitian_spectrum(m: &HermitianMatrix) -> Spectrum {
    let eig = SymmetricEigen::new(m.0.clone());
    Spectrum::from_eigenvalues(eig.eigenvalues.iter().copied().collect())
}

/// Eigenvalues (descending) and the matching orthonormal eigenvectors as
/// columns.
pub fn eigendecomposition(m: &HermitianMatrix) -> (Vec<f64>, Operator) {
    let eig = SymmetricEigen::new(m.0.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let n = m.dim();
    let vectors = Operator::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    (values, vectors)
}

pub fn schatten_norm(m: &HermitianMatrix, p: f64) -> Result<f64> {
    hermitian_spectrum(m).schatten_norm(p)
}

pub fn trace_moment(m: &HermitianMatrix, n: u32) -> Result<f64> {
    hermitian_spectrum(m).moment(n)
}
