//! Detection and quantification of non-Markovian open-system dynamics from
//! the low-order moments of Choi states of intermediate dynamical maps.
//!
//! The crate is layered bottom-up:
//!
//! - [`spectral`]: Hermitian eigenvalues, Schatten norms and trace moments.
//! - [`lindblad`]: time-dependent Lindblad generators and their rate laws.
//! - [`choi`]: Choi states of small-time and finite-interval intermediate maps.
//! - [`detect`]: the `r2^2 <= r3` witness, the moment measure `M`, the RHP
//!   measure `I` and CP-divisibility scans.
//! - [`scenario`]: scenario config files, CSV output and the run pipeline
//!   behind the `choi-moments` binary.
//!
//! Matrices are dense `nalgebra` complex matrices. Superoperators act on
//! row-major vectorized operators: `vec(rho)[i * d + j] = rho[(i, j)]`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod choi;
pub mod detect;
mod error;
pub mod lindblad;
pub mod quad;
pub mod random;
pub mod scenario;
pub mod spectral;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;

/// Dense complex matrix: Hamiltonians, Lindblad operators, superoperators.
pub type Operator = nalgebra::DMatrix<C64>;
