//! Choi states of intermediate dynamical maps.
//!
//! The normalized convention is used everywhere:
//! `C = (I (x) Lambda)(|phi+><phi+|)` with `|phi+> = sum_i |ii> / sqrt(d)`,
//! so a trace-preserving map has a unit-trace Choi state. Entry
//! `C[(i d + a, j d + b)] = Phi[(a d + b, i d + j)] / d` for a row-major
//! superoperator `Phi`.

use log::warn;
use nalgebra::DMatrix;

use crate::lindblad::{matrix_unit, DensityMatrix, LindbladGenerator};
use crate::spectral::{max_abs, HermitianMatrix};
use crate::{Error, Operator, Result, C64};

/// Default RK4 resolution: steps per unit time.
pub const STEPS_PER_UNIT_TIME: f64 = 1000.0;
/// Maps with condition number above this are treated as non-invertible.
pub const MAX_CONDITION: f64 = 1e12;
/// Superoperators must send `I/d` to a unit-trace operator within this.
pub const SUPEROP_TRACE_TOL: f64 = 1e-8;
/// `choi_of_superoperator` rejects maps whose Choi trace deviates by more.
pub const CHOI_TRACE_REJECT: f64 = 1e-6;
/// `choi_small_time` warns when `max |eps gamma_i(t)|` reaches this.
pub const SMALL_TIME_WARN: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChoiMode {
    /// `(I (x) (id + eps L_t))|phi+><phi+|`, first order in `eps`.
    SmallTime,
    /// Choi state of an integrated propagator `Lambda(t, s)`.
    FiniteInterval,
}

impl ChoiMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ChoiMode::SmallTime => "small-time",
            ChoiMode::FiniteInterval => "finite-interval",
        }
    }
}

/// Row-major superoperator of a map `Lambda(t, s)` on `d x d` operators.
#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    matrix: Operator,
    dim: usize,
    interval: (f64, f64),
}

impl Superoperator {
    pub fn new(matrix: Operator, interval: (f64, f64)) -> Result<Self> {
        let dim = square_root_dim(matrix.nrows())?;
        if matrix.ncols() != matrix.nrows() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        let out = &matrix * mixed_vec(dim);
        let trace: C64 = (0..dim).map(|i| out[i * dim + i]).sum();
        let deviation = (trace - C64::new(1.0, 0.0)).norm();
        if !(deviation <= SUPEROP_TRACE_TOL) {
            return Err(Error::NotTracePreserving { deviation });
        }
        Ok(Self { matrix, dim, interval })
    }

    pub fn identity(dim: usize, at: f64) -> Self {
        let n = dim * dim;
        Self {
            matrix: Operator::identity(n, n),
            dim,
            interval: (at, at),
        }
    }

    pub fn matrix(&self) -> &Operator {
        &self.matrix
    }

    /// System dimension `d` (the matrix is `d^2 x d^2`).
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn interval(&self) -> (f64, f64) {
        self.interval
    }

    /// `self o earlier`, i.e. apply `earlier` first.
    pub fn compose(&self, earlier: &Superoperator) -> Result<Superoperator> {
        Superoperator::new(&self.matrix * &earlier.matrix, (earlier.interval.0, self.interval.1))
    }

    /// Applies the map to a `d x d` operator.
    pub fn apply(&self, x: &Operator) -> Operator {
        let v = &self.matrix * crate::lindblad::vectorize(x);
        crate::lindblad::unvectorize(&v, self.dim)
    }
}

fn square_root_dim(n: usize) -> Result<usize> {
    let d = (n as f64).sqrt().round() as usize;
    if d * d != n || d == 0 {
        return Err(Error::InvalidParameter(format!(
            "superoperator size {n} is not a square d^2"
        )));
    }
    Ok(d)
}

fn mixed_vec(d: usize) -> nalgebra::DVector<C64> {
    let mut v = nalgebra::DVector::zeros(d * d);
    for i in 0..d {
        v[i * d + i] = C64::new(1.0 / d as f64, 0.0);
    }
    v
}

/// Choi state of a dynamical map over `(s, t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiMatrix {
    matrix: HermitianMatrix,
    dim: usize,
    interval: (f64, f64),
    mode: ChoiMode,
}

impl ChoiMatrix {
    pub fn as_hermitian(&self) -> &HermitianMatrix {
        &self.matrix
    }

    pub fn matrix(&self) -> &Operator {
        self.matrix.matrix()
    }

    /// System dimension `d`; the Choi matrix is `d^2 x d^2`.
    pub fn system_dim(&self) -> usize {
        self.dim
    }

    pub fn interval(&self) -> (f64, f64) {
        self.interval
    }

    pub fn mode(&self) -> ChoiMode {
        self.mode
    }

    /// `Tr_out C`, a `d x d` matrix equal to `I/d` for trace-preserving maps.
    pub fn partial_trace_output(&self) -> Operator {
        let d = self.dim;
        let m = self.matrix.matrix();
        Operator::from_fn(d, d, |i, j| (0..d).map(|a| m[(i * d + a, j * d + a)]).sum())
    }
}

/// `|phi+><phi+|` for `|phi+> = sum_i |ii> / sqrt(d)`.
pub fn max_entangled_projector(d: usize) -> Result<DensityMatrix> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!(
            "maximally entangled state needs d >= 2, got {d}"
        )));
    }
    let n = d * d;
    let mut m = Operator::zeros(n, n);
    for i in 0..d {
        for j in 0..d {
            m[(i * d + i, j * d + j)] = C64::new(1.0 / d as f64, 0.0);
        }
    }
    DensityMatrix::from_operator(m)
}

fn choi_from_blocks(d: usize, block: impl Fn(usize, usize) -> Operator) -> Operator {
    let n = d * d;
    let mut c = Operator::zeros(n, n);
    let inv_d = C64::new(1.0 / d as f64, 0.0);
    for i in 0..d {
        for j in 0..d {
            let b = block(i, j);
            for a in 0..d {
                for bb in 0..d {
                    c[(i * d + a, j * d + bb)] = b[(a, bb)] * inv_d;
                }
            }
        }
    }
    c
}

/// First-order Choi state `|phi+><phi+| + eps (I (x) L_t)(|phi+><phi+|)`.
///
/// Valid while `|eps gamma_i(t)| << 1`; a warning is logged once the
/// largest product reaches 0.1.
pub fn choi_small_time(gen: &LindbladGenerator, t: f64, epsilon: f64) -> Result<ChoiMatrix> {
    let rates = gen.rates_at(t)?;
    choi_small_time_with_rates(gen, &rates, t, epsilon)
}

/// Choi state of `exp(eps Lhat(t))`, the map generated over `[t, t + eps]`
/// with the rates frozen at `t`. It agrees with [`choi_small_time`] to first
/// order in `eps` but is exactly CPTP whenever every `gamma_i(t) >= 0`.
pub fn choi_frozen_with_rates(gen: &LindbladGenerator, rates: &[f64], t: f64, epsilon: f64) -> Result<ChoiMatrix> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be finite and > 0, got {epsilon}"
        )));
    }
    if rates.iter().any(|g| !g.is_finite()) {
        return Err(Error::NonFiniteRate { t });
    }
    if gen.dim() < 2 {
        return Err(Error::InvalidParameter("Choi states need system dimension >= 2".into()));
    }
    let lhat = gen.superoperator_parts().assemble(rates) * C64::new(epsilon, 0.0);
    choi_of_matrix(&lhat.exp(), (t, t + epsilon), ChoiMode::SmallTime)
}

/// [`choi_small_time`] with `gamma_i(t)` already evaluated.
pub fn choi_small_time_with_rates(gen: &LindbladGenerator, rates: &[f64], t: f64, epsilon: f64) -> Result<ChoiMatrix> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be finite and > 0, got {epsilon}"
        )));
    }
    if rates.iter().any(|g| !g.is_finite()) {
        return Err(Error::NonFiniteRate { t });
    }
    let worst = rates.iter().fold(0.0f64, |a, g| a.max((g * epsilon).abs()));
    if worst >= SMALL_TIME_WARN {
        warn!("small-time Choi at t = {t}: max |eps * gamma| = {worst:.3} is not small");
    }
    let d = gen.dim();
    if d < 2 {
        return Err(Error::InvalidParameter("Choi states need system dimension >= 2".into()));
    }
    let eps = C64::new(epsilon, 0.0);
    let mut blocks = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            let e = matrix_unit(d, i, j);
            let le = gen.apply_with_rates(&e, rates)?;
            blocks.push(e + le * eps);
        }
    }
    let c = choi_from_blocks(d, |i, j| blocks[i * d + j].clone());
    Ok(ChoiMatrix {
        matrix: HermitianMatrix::symmetrize(c),
        dim: d,
        interval: (t, t + epsilon),
        mode: ChoiMode::SmallTime,
    })
}

/// `(I (x) Lambda)(|phi+><phi+|)`; rejects maps whose Choi trace is off by
/// more than 1e-6.
pub fn choi_of_superoperator(phi: &Superoperator) -> Result<ChoiMatrix> {
    choi_of_matrix(phi.matrix(), phi.interval(), ChoiMode::FiniteInterval)
}

pub(crate) fn choi_of_matrix(phi: &Operator, interval: (f64, f64), mode: ChoiMode) -> Result<ChoiMatrix> {
    let d = square_root_dim(phi.nrows())?;
    if d < 2 {
        return Err(Error::InvalidParameter("Choi states need system dimension >= 2".into()));
    }
    let c = choi_from_blocks(d, |i, j| Operator::from_fn(d, d, |a, b| phi[(a * d + b, i * d + j)]));
    let deviation = (c.trace() - C64::new(1.0, 0.0)).norm();
    if !(deviation <= CHOI_TRACE_REJECT) {
        return Err(Error::NotTracePreserving { deviation });
    }
    Ok(ChoiMatrix {
        matrix: HermitianMatrix::symmetrize(c),
        dim: d,
        interval,
        mode,
    })
}

/// Default number of RK4 steps for an interval.
pub fn default_steps(t0: f64, t1: f64) -> usize {
    steps_for(t1 - t0, STEPS_PER_UNIT_TIME)
}

fn steps_for(span: f64, per_unit: f64) -> usize {
    ((span * per_unit).ceil() as usize).max(1)
}

fn rk4(gen: &LindbladGenerator, start: &Operator, t0: f64, t1: f64, steps: usize) -> Result<Operator> {
    let parts = gen.superoperator_parts();
    let lhat = |t: f64| -> Result<Operator> { Ok(parts.assemble(&gen.rates_at(t)?)) };
    let h = (t1 - t0) / steps as f64;
    let mut phi = start.clone();
    let mut next_l = lhat(t0)?;
    for k in 0..steps {
        let t = t0 + h * k as f64;
        let l0 = next_l;
        let lm = lhat(t + 0.5 * h)?;
        let l1 = lhat(if k + 1 == steps { t1 } else { t + h })?;
        let hc = C64::new(h, 0.0);
        let k1 = &l0 * &phi;
        let k2 = &lm * (&phi + &k1 * (hc * 0.5));
        let k3 = &lm * (&phi + &k2 * (hc * 0.5));
        let k4 = &l1 * (&phi + &k3 * hc);
        phi += (k1 + (k2 + k3) * C64::new(2.0, 0.0) + k4) * (hc / 6.0);
        if phi.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFiniteRate { t: t + h });
        }
        next_l = l1;
    }
    Ok(phi)
}

/// `Phi(t1, t0)` solving `dPhi/dt = Lhat(t) Phi`, `Phi(t0, t0) = I`, by
/// classical RK4 with `steps` equal steps.
pub fn propagate_map(gen: &LindbladGenerator, t0: f64, t1: f64, steps: usize) -> Result<Superoperator> {
    if !(t1 >= t0) || !t0.is_finite() || !t1.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "propagation needs t1 >= t0, got [{t0}, {t1}]"
        )));
    }
    if steps == 0 {
        return Err(Error::InvalidParameter("steps must be >= 1".into()));
    }
    let n = gen.dim() * gen.dim();
    if t1 == t0 {
        return Ok(Superoperator::identity(gen.dim(), t0));
    }
    let phi = rk4(gen, &Operator::identity(n, n), t0, t1, steps)?;
    Superoperator::new(phi, (t0, t1))
}

/// `Phi(t_k, 0)` for every `t_k` in a non-decreasing list of times, chained
/// interval by interval at `steps_per_unit` resolution.
pub fn propagate_along(gen: &LindbladGenerator, times: &[f64], steps_per_unit: f64) -> Result<Vec<Operator>> {
    if !(steps_per_unit > 0.0) {
        return Err(Error::InvalidParameter("steps_per_unit must be > 0".into()));
    }
    let n = gen.dim() * gen.dim();
    let mut out = Vec::with_capacity(times.len());
    let mut phi = Operator::identity(n, n);
    let mut at = 0.0;
    for &t in times {
        if !(t >= at) || !t.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "times must be finite, non-negative and non-decreasing (got {t} after {at})"
            )));
        }
        if t > at {
            phi = rk4(gen, &phi, at, t, steps_for(t - at, steps_per_unit))?;
            at = t;
        }
        out.push(phi.clone());
    }
    Ok(out)
}

/// Condition number `sigma_max / sigma_min`.
pub fn condition_number(m: &Operator) -> f64 {
    let sv = m.clone().singular_values();
    let max = sv.iter().cloned().fold(0.0f64, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// `later * earlier^{-1}` by a linear solve, rejecting ill-conditioned
/// `earlier`.
pub fn divide_maps(later: &Operator, earlier: &Operator) -> Result<Operator> {
    let condition = condition_number(earlier);
    if !(condition < MAX_CONDITION) {
        return Err(Error::SingularMap { condition });
    }
    // X E = L  <=>  E^T X^T = L^T
    let lu = earlier.transpose().lu();
    let xt = lu.solve(&later.transpose()).ok_or(Error::SingularMap {
        condition: f64::INFINITY,
    })?;
    Ok(xt.transpose())
}

/// `Lambda(t, s) = Phi(t, 0) Phi(s, 0)^{-1}`.
///
/// `steps_per_unit` sets the RK4 resolution ([`STEPS_PER_UNIT_TIME`] by
/// default).
pub fn intermediate_map(gen: &LindbladGenerator, s: f64, t: f64, steps_per_unit: f64) -> Result<Superoperator> {
    if !(s >= 0.0 && t >= s) {
        return Err(Error::InvalidParameter(format!(
            "intermediate map needs t >= s >= 0, got s={s}, t={t}"
        )));
    }
    if s == t {
        return Ok(Superoperator::identity(gen.dim(), s));
    }
    let phis = propagate_along(gen, &[s, t], steps_per_unit)?;
    let lambda = divide_maps(&phis[1], &phis[0])?;
    Superoperator::new(lambda, (s, t))
}

/// Outcome of a complete-positivity / trace-preservation check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CptpDiagnostics {
    pub min_eigenvalue: f64,
    pub trace_deviation: f64,
    pub partial_trace_deviation: f64,
    pub is_cp: bool,
    pub is_tp: bool,
}

pub const DEFAULT_CPTP_TOL: f64 = 1e-10;

pub fn cptp_diagnostics(c: &ChoiMatrix, tol: f64) -> CptpDiagnostics {
    let min_eigenvalue = c.as_hermitian().spectrum().min();
    let trace_deviation = (c.as_hermitian().trace() - 1.0).abs();
    let d = c.system_dim();
    let target = DMatrix::<C64>::identity(d, d) * C64::new(1.0 / d as f64, 0.0);
    let partial_trace_deviation = max_abs(&(c.partial_trace_output() - target));
    CptpDiagnostics {
        min_eigenvalue,
        trace_deviation,
        partial_trace_deviation,
        is_cp: min_eigenvalue >= -tol,
        is_tp: partial_trace_deviation <= tol,
    }
}
