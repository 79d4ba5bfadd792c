use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian: max entry asymmetry {asymmetry:.3e}")]
    NotHermitian { asymmetry: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("Lorentzian rate has a pole at t = {pole:.12} (evaluated at t = {t:.12})")]
    RatePole { t: f64, pole: f64 },

    #[error("quadrature did not converge: residual estimate {residual:.3e}")]
    QuadratureFailed { residual: f64 },

    #[error("tabulated rate queried at t = {t} outside knot range [{lo}, {hi}]")]
    Extrapolation { t: f64, lo: f64, hi: f64 },

    #[error("non-finite rate encountered at t = {t}")]
    NonFiniteRate { t: f64 },

    #[error("map is not invertible: condition number {condition:.3e}")]
    SingularMap { condition: f64 },

    #[error("map is not trace preserving: trace deviation {deviation:.3e}")]
    NotTracePreserving { deviation: f64 },

    #[error("density matrix invalid: {0}")]
    InvalidState(String),

    #[error("epsilon extrapolation did not converge: estimates {coarse} and {fine}")]
    NotConverged { coarse: f64, fine: f64 },
}
