//! Time-dependent Lindblad generators
//! `L_t(rho) = -i[H, rho] + sum_i gamma_i(t) (L_i rho L_i^dag - 1/2 {L_i^dag L_i, rho})`.

mod rate;

pub use rate::{RateModel, OHMIC_CUTOFF_MULTIPLE, OHMIC_QUAD_TOL};

use nalgebra::DMatrix;

use crate::spectral::{max_abs, HermitianMatrix};
use crate::{Error, Operator, Result, C64};

const UNITAL_TOL: f64 = 1e-10;
const NORMAL_TOL: f64 = 1e-10;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn sigma_x() -> Operator {
    DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)])
}

pub fn sigma_y() -> Operator {
    DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)])
}

pub fn sigma_z() -> Operator {
    DMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)])
}

/// `|0><1|`.
pub fn lowering() -> Operator {
    DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(0., 0.), c(0., 0.)])
}

/// `|1><0|`.
pub fn raising() -> Operator {
    lowering().adjoint()
}

/// Matrix unit `|i><j|` of dimension `d`.
pub fn matrix_unit(d: usize, i: usize, j: usize) -> Operator {
    let mut m = Operator::zeros(d, d);
    m[(i, j)] = c(1.0, 0.0);
    m
}

/// Row-major vectorization: `v[i * d + j] = m[(i, j)]`.
pub fn vectorize(m: &Operator) -> nalgebra::DVector<C64> {
    let (r, cols) = m.shape();
    nalgebra::DVector::from_fn(r * cols, |k, _| m[(k / cols, k % cols)])
}

/// Inverse of [`vectorize`] for a `d x d` operator.
pub fn unvectorize(v: &nalgebra::DVector<C64>, d: usize) -> Operator {
    Operator::from_fn(d, d, |i, j| v[i * d + j])
}

/// A unit-trace positive semidefinite Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(HermitianMatrix);

impl DensityMatrix {
    pub const TRACE_TOL: f64 = 1e-10;
    pub const PSD_TOL: f64 = 1e-10;

    pub fn new(m: HermitianMatrix) -> Result<Self> {
        let tr = m.trace();
        if (tr - 1.0).abs() > Self::TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let min = m.spectrum().min();
        if min < -Self::PSD_TOL {
            return Err(Error::InvalidState(format!("minimum eigenvalue {min} is negative")));
        }
        Ok(Self(m))
    }

    pub fn from_operator(m: Operator) -> Result<Self> {
        Self::new(HermitianMatrix::new(m)?)
    }

    pub fn maximally_mixed(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidParameter("dimension must be >= 1".into()));
        }
        Self::from_operator(Operator::identity(d, d) * c(1.0 / d as f64, 0.0))
    }

    /// `|psi><psi|` for a (not necessarily normalized) state vector.
    pub fn pure(psi: &[C64]) -> Result<Self> {
        let norm2: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        if !(norm2 > 0.0) {
            return Err(Error::InvalidState("zero state vector".into()));
        }
        let n = psi.len();
        let m = Operator::from_fn(n, n, |i, j| psi[i] * psi[j].conj() / norm2);
        Ok(Self(HermitianMatrix::symmetrize(m)))
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn as_hermitian(&self) -> &HermitianMatrix {
        &self.0
    }

    pub fn matrix(&self) -> &Operator {
        self.0.matrix()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dissipator {
    pub op: Operator,
    pub rate: RateModel,
}

impl Dissipator {
    pub fn new(op: Operator, rate: RateModel) -> Self {
        Self { op, rate }
    }
}

/// Constant Hamiltonian plus a list of `(L_i, gamma_i(t))` channels.
#[derive(Debug, Clone, PartialEq)]
pub struct LindbladGenerator {
    dim: usize,
    hamiltonian: HermitianMatrix,
    dissipators: Vec<Dissipator>,
}

impl LindbladGenerator {
    pub fn new(hamiltonian: HermitianMatrix, dissipators: Vec<Dissipator>) -> Result<Self> {
        let dim = hamiltonian.dim();
        for d in &dissipators {
            if d.op.nrows() != dim || d.op.ncols() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: if d.op.nrows() != dim {
                        d.op.nrows()
                    } else {
                        d.op.ncols()
                    },
                });
            }
            d.rate.validate()?;
        }
        Ok(Self {
            dim,
            hamiltonian,
            dissipators,
        })
    }

    /// Generator with `H = 0`.
    pub fn dissipative(dim: usize, dissipators: Vec<Dissipator>) -> Result<Self> {
        Self::new(HermitianMatrix::new(Operator::zeros(dim, dim))?, dissipators)
    }

    /// Single `sigma_z` channel: `gamma(t) (sigma_z rho sigma_z - rho)`.
    pub fn dephasing(rate: RateModel) -> Result<Self> {
        Self::dissipative(2, vec![Dissipator::new(sigma_z(), rate)])
    }

    /// `sigma_x`, `sigma_y` and `sigma_z` channels sharing one rate law.
    pub fn pauli(rate: RateModel) -> Result<Self> {
        Self::dissipative(
            2,
            vec![
                Dissipator::new(sigma_x(), rate.clone()),
                Dissipator::new(sigma_y(), rate.clone()),
                Dissipator::new(sigma_z(), rate),
            ],
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn hamiltonian(&self) -> &HermitianMatrix {
        &self.hamiltonian
    }

    pub fn dissipators(&self) -> &[Dissipator] {
        &self.dissipators
    }

    /// All `gamma_i(t)`; fails on any non-finite value.
    pub fn rates_at(&self, t: f64) -> Result<Vec<f64>> {
        self.dissipators
            .iter()
            .map(|d| {
                let g = d.rate.eval(t)?;
                if g.is_finite() {
                    Ok(g)
                } else {
                    Err(Error::NonFiniteRate { t })
                }
            })
            .collect()
    }

    /// Applies the generator with explicitly supplied rates to an arbitrary
    /// (not necessarily Hermitian) operator.
    pub fn apply_with_rates(&self, x: &Operator, rates: &[f64]) -> Result<Operator> {
        if x.nrows() != self.dim || x.ncols() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.nrows(),
            });
        }
        if rates.len() != self.dissipators.len() {
            return Err(Error::InvalidParameter(format!(
                "{} rates supplied for {} dissipators",
                rates.len(),
                self.dissipators.len()
            )));
        }
        let h = self.hamiltonian.matrix();
        let mut out = (h * x - x * h) * c(0.0, -1.0);
        for (d, &g) in self.dissipators.iter().zip(rates) {
            if g == 0.0 {
                continue;
            }
            let l = &d.op;
            let ld = l.adjoint();
            let ldl = &ld * l;
            let term = l * x * &ld - (&ldl * x + x * &ldl) * c(0.5, 0.0);
            out += term * c(g, 0.0);
        }
        Ok(out)
    }

    /// `L_t(x)` for an arbitrary operator.
    pub fn apply_to_operator(&self, x: &Operator, t: f64) -> Result<Operator> {
        self.apply_with_rates(x, &self.rates_at(t)?)
    }

    /// `d rho / dt` at time `t`; traceless and Hermitian.
    pub fn apply_generator(&self, rho: &DensityMatrix, t: f64) -> Result<HermitianMatrix> {
        let out = self.apply_to_operator(rho.matrix(), t)?;
        Ok(HermitianMatrix::symmetrize(out))
    }

    /// Matrix `Lhat(t)` with `vec(L_t(x)) = Lhat(t) vec(x)` (row-major).
    pub fn generator_superoperator(&self, t: f64) -> Result<Operator> {
        Ok(self.superoperator_parts().assemble(&self.rates_at(t)?))
    }

    /// Rate-independent pieces of `Lhat(t)`, for repeated assembly.
    pub fn superoperator_parts(&self) -> SuperoperatorParts {
        let d = self.dim;
        let id = Operator::identity(d, d);
        let h = self.hamiltonian.matrix();
        let coherent = (h.kronecker(&id) - id.kronecker(&h.transpose())) * c(0.0, -1.0);
        let channels = self
            .dissipators
            .iter()
            .map(|diss| {
                let l = &diss.op;
                let ldl = l.adjoint() * l;
                l.kronecker(&l.conjugate()) - (ldl.kronecker(&id) + id.kronecker(&ldl.transpose())) * c(0.5, 0.0)
            })
            .collect();
        SuperoperatorParts { coherent, channels }
    }

    /// Whether `L_t(I/d)` vanishes (max entry below 1e-10).
    pub fn is_unital(&self, t: f64) -> Result<bool> {
        let mixed = Operator::identity(self.dim, self.dim) * c(1.0 / self.dim as f64, 0.0);
        Ok(max_abs(&self.apply_to_operator(&mixed, t)?) < UNITAL_TOL)
    }

    /// Whether every Lindblad operator commutes with its adjoint.
    pub fn lindblad_ops_normal(&self) -> bool {
        self.dissipators.iter().all(|d| {
            let l = &d.op;
            let ld = l.adjoint();
            max_abs(&(l * &ld - &ld * l)) < NORMAL_TOL
        })
    }
}

/// `Lhat(t) = coherent + sum_i gamma_i(t) channels[i]`.
#[derive(Debug, Clone)]
pub struct SuperoperatorParts {
    coherent: Operator,
    channels: Vec<Operator>,
}

impl SuperoperatorParts {
    pub fn assemble(&self, rates: &[f64]) -> Operator {
        let mut out = self.coherent.clone();
        for (ch, &g) in self.channels.iter().zip(rates) {
            out += ch * c(g, 0.0);
        }
        out
    }
}
