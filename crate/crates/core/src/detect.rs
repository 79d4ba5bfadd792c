//! Moment-based detection and quantification of CP-indivisibility.
//!
//! For a Choi state `C` of a trace-preserving map, `r_n = Tr C^n`. If the map
//! is completely positive then `r2^2 <= r3`; a positive witness `r2^2 - r3`
//! therefore certifies that the intermediate map is not CP and the dynamics
//! is not CP-divisible.
//!
//! Instantaneous rates are `eps -> 0` limits over the Choi state of
//! `Lambda(t + eps, t)`, approximated by `exp(eps Lhat(t))`:
//!
//! - `f(t) = lim max(0, r2^2 - r3) / eps` integrates to the moment measure `M`;
//! - `g(t) = lim (||C||_1 - 1) / eps` integrates to the RHP measure `I`.

use log::warn;
use rayon::prelude::*;

use crate::choi::{
    choi_frozen_with_rates, choi_of_matrix, choi_small_time, choi_small_time_with_rates, divide_maps, propagate_along,
    ChoiMatrix, ChoiMode, STEPS_PER_UNIT_TIME,
};
use crate::lindblad::{DensityMatrix, LindbladGenerator};
use crate::spectral::Spectrum;
use crate::{Error, Operator, Result};

/// Witness values above this certify a non-CP map.
pub const WITNESS_THRESHOLD: f64 = 1e-12;
/// Minimum Choi eigenvalues below `-CP_EIGEN_TOL` count as non-CP.
pub const CP_EIGEN_TOL: f64 = 1e-10;
pub const DEFAULT_EPS_SCHEDULE: [f64; 2] = [1e-4, 5e-5];
/// Relative disagreement allowed between successive Richardson estimates.
pub const EXTRAPOLATION_RTOL: f64 = 1e-4;
const EXTRAPOLATION_ATOL: f64 = 1e-6;
/// Tail check: `|f|` on the last 5% of a measure grid should stay below this.
pub const TAIL_TOL: f64 = 1e-8;

/// `[r_1, ..., r_{n_max}]` of a Choi state.
pub fn lambda_moments(c: &ChoiMatrix, n_max: u32) -> Result<Vec<f64>> {
    if n_max < 3 {
        return Err(Error::InvalidParameter(format!("n_max must be >= 3, got {n_max}")));
    }
    let spec = c.as_hermitian().spectrum();
    (1..=n_max).map(|n| spec.moment(n)).collect()
}

fn witness_of(spec: &Spectrum) -> (f64, f64, f64) {
    let r2: f64 = spec.eigenvalues().iter().map(|l| l * l).sum();
    let r3: f64 = spec.eigenvalues().iter().map(|l| l * l * l).sum();
    (r2, r3, r2 * r2 - r3)
}

/// `r2^2 - r3`.
pub fn moment_witness(c: &ChoiMatrix) -> f64 {
    witness_of(&c.as_hermitian().spectrum()).2
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("time grid is empty".into()));
    }
    if grid.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(Error::InvalidParameter(
            "time grid must be finite and non-negative".into(),
        ));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("time grid must be strictly increasing".into()));
    }
    Ok(())
}

/// `n` equally spaced points on `[start, end]`, endpoints included.
pub fn linspace(start: f64, end: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![start],
        _ => {
            let h = (end - start) / (n - 1) as f64;
            (0..n)
                .map(|k| if k + 1 == n { end } else { start + h * k as f64 })
                .collect()
        }
    }
}

/// Maximal runs of consecutive grid points satisfying `hit`, as
/// `(first, last)` grid times.
pub fn violation_intervals(grid: &[f64], hit: impl Fn(usize) -> bool) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    for k in 0..grid.len() {
        match (hit(k), start) {
            (true, None) => start = Some(k),
            (false, Some(s)) => {
                out.push((grid[s], grid[k - 1]));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((grid[s], grid[grid.len() - 1]));
    }
    out
}

/// Witness `r2^2 - r3` sampled on a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct WitnessSeries {
    pub grid: Vec<f64>,
    pub epsilon: f64,
    pub mode: ChoiMode,
    /// `gamma_i(t)` per grid point.
    pub rates: Vec<Vec<f64>>,
    pub r2: Vec<f64>,
    pub r3: Vec<f64>,
    pub values: Vec<f64>,
    /// Runs of grid points where the witness exceeds [`WITNESS_THRESHOLD`].
    pub violations: Vec<(f64, f64)>,
}

impl WitnessSeries {
    pub fn is_violated(&self) -> bool {
        !self.violations.is_empty()
    }
}

/// Evaluates the witness on the Choi state of `Lambda(t + eps, t)` at every
/// grid time, either to first order in `eps` or from the integrated
/// propagator.
pub fn witness_series(gen: &LindbladGenerator, grid: &[f64], epsilon: f64, mode: ChoiMode) -> Result<WitnessSeries> {
    check_grid(grid)?;
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be finite and > 0, got {epsilon}"
        )));
    }
    let points: Vec<(Vec<f64>, f64, f64, f64)> = match mode {
        ChoiMode::SmallTime => grid
            .par_iter()
            .map(|&t| {
                let rates = gen.rates_at(t)?;
                let c = choi_small_time_with_rates(gen, &rates, t, epsilon)?;
                let (r2, r3, w) = witness_of(&c.as_hermitian().spectrum());
                Ok((rates, r2, r3, w))
            })
            .collect::<Result<_>>()?,
        ChoiMode::FiniteInterval => {
            let phis = propagate_along(gen, grid, STEPS_PER_UNIT_TIME)?;
            grid.par_iter()
                .zip(phis.par_iter())
                .map(|(&t, phi)| {
                    let rates = gen.rates_at(t)?;
                    let c = step_choi(gen, phi, t, epsilon)?;
                    let (r2, r3, w) = witness_of(&c.as_hermitian().spectrum());
                    Ok((rates, r2, r3, w))
                })
                .collect::<Result<_>>()?
        }
    };
    let mut series = WitnessSeries {
        grid: grid.to_vec(),
        epsilon,
        mode,
        rates: Vec::with_capacity(grid.len()),
        r2: Vec::with_capacity(grid.len()),
        r3: Vec::with_capacity(grid.len()),
        values: Vec::with_capacity(grid.len()),
        violations: vec![],
    };
    for (rates, r2, r3, w) in points {
        series.rates.push(rates);
        series.r2.push(r2);
        series.r3.push(r3);
        series.values.push(w);
    }
    series.violations = violation_intervals(grid, |k| series.values[k] > WITNESS_THRESHOLD);
    Ok(series)
}

/// Choi state of `Lambda(t + delta, t) = Phi(t + delta, 0) Phi(t, 0)^{-1}`
/// given `Phi(t, 0)`.
fn step_choi(gen: &LindbladGenerator, phi_t: &Operator, t: f64, delta: f64) -> Result<ChoiMatrix> {
    let later = propagate_along_from(gen, phi_t, t, t + delta)?;
    let lambda = divide_maps(&later, phi_t)?;
    choi_of_matrix(&lambda, (t, t + delta), ChoiMode::FiniteInterval)
}

fn propagate_along_from(gen: &LindbladGenerator, phi: &Operator, t0: f64, t1: f64) -> Result<Operator> {
    let step = crate::choi::propagate_map(gen, t0, t1, crate::choi::default_steps(t0, t1))?;
    Ok(step.matrix() * phi)
}

/// `f(t)` and `g(t)` at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InstantaneousRates {
    pub f: f64,
    pub g: f64,
}

fn check_schedule(schedule: &[f64]) -> Result<()> {
    if schedule.len() < 2 {
        return Err(Error::InvalidParameter(
            "epsilon schedule needs at least two entries".into(),
        ));
    }
    if schedule.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
        return Err(Error::InvalidParameter(
            "epsilon schedule entries must be finite and > 0".into(),
        ));
    }
    if schedule.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidParameter(
            "epsilon schedule must be strictly decreasing".into(),
        ));
    }
    Ok(())
}

/// Linear-in-eps extrapolation to eps = 0 through two samples.
fn richardson(e1: f64, v1: f64, e2: f64, v2: f64) -> f64 {
    (e1 * v2 - e2 * v1) / (e1 - e2)
}

/// Extrapolates samples at the last two schedule entries to `eps -> 0`; a
/// third sample at half the finest `eps` checks convergence.
fn extrapolate(eps: [f64; 3], v: [f64; 3]) -> Result<f64> {
    let coarse = richardson(eps[0], v[0], eps[1], v[1]);
    let fine = richardson(eps[1], v[1], eps[2], v[2]);
    if (coarse - fine).abs() > EXTRAPOLATION_RTOL * fine.abs() + EXTRAPOLATION_ATOL {
        return Err(Error::NotConverged { coarse, fine });
    }
    Ok(coarse)
}

fn extrapolation_points(schedule: &[f64]) -> [f64; 3] {
    let n = schedule.len();
    [schedule[n - 2], schedule[n - 1], 0.5 * schedule[n - 1]]
}

/// Spectra of the Choi states of `exp(eps Lhat(t))` at the extrapolation
/// points.
fn frozen_spectra(gen: &LindbladGenerator, t: f64, eps: [f64; 3]) -> Result<[Spectrum; 3]> {
    let rates = gen.rates_at(t)?;
    let s = |e: f64| -> Result<Spectrum> { Ok(choi_frozen_with_rates(gen, &rates, t, e)?.as_hermitian().spectrum()) };
    Ok([s(eps[0])?, s(eps[1])?, s(eps[2])?])
}

fn f_sample(s: &Spectrum, eps: f64) -> f64 {
    witness_of(s).2.max(0.0) / eps
}

/// `(||C||_1 - Tr C) / eps`; equal to `(||C||_1 - 1) / eps` for trace-preserving maps.
fn g_sample(s: &Spectrum, eps: f64) -> f64 {
    s.eigenvalues().iter().map(|l| l.abs() - l).sum::<f64>() / eps
}

/// Both instantaneous rates from the same Choi states.
pub fn instantaneous_rates(gen: &LindbladGenerator, t: f64, schedule: &[f64]) -> Result<InstantaneousRates> {
    check_schedule(schedule)?;
    let eps = extrapolation_points(schedule);
    let spectra = frozen_spectra(gen, t, eps)?;
    let f = extrapolate(eps, std::array::from_fn(|k| f_sample(&spectra[k], eps[k])))?;
    let g = extrapolate(eps, std::array::from_fn(|k| g_sample(&spectra[k], eps[k])))?;
    Ok(InstantaneousRates {
        f: f.max(0.0),
        g: g.max(0.0),
    })
}

/// `f(t) = lim_{eps -> 0} max(0, r2^2 - r3) / eps`.
pub fn moment_rate_f(gen: &LindbladGenerator, t: f64, schedule: &[f64]) -> Result<f64> {
    check_schedule(schedule)?;
    let eps = extrapolation_points(schedule);
    let spectra = frozen_spectra(gen, t, eps)?;
    let f = extrapolate(eps, std::array::from_fn(|k| f_sample(&spectra[k], eps[k])))?;
    Ok(f.max(0.0))
}

/// `g(t) = lim_{eps -> 0} (||C||_1 - 1) / eps`.
pub fn rhp_rate_g(gen: &LindbladGenerator, t: f64, schedule: &[f64]) -> Result<f64> {
    check_schedule(schedule)?;
    let eps = extrapolation_points(schedule);
    let spectra = frozen_spectra(gen, t, eps)?;
    let g = extrapolate(eps, std::array::from_fn(|k| g_sample(&spectra[k], eps[k])))?;
    Ok(g.max(0.0))
}

/// Time series of `f` and `g` with their trapezoidal integrals.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureReport {
    pub grid: Vec<f64>,
    pub eps_schedule: Vec<f64>,
    pub f: Vec<f64>,
    pub g: Vec<f64>,
    /// `M`.
    pub moment_measure: f64,
    /// `I`.
    pub rhp_measure: f64,
    /// Whether the generator was unital at every sampled time.
    pub unital: bool,
    /// Whether `f` and `g` stayed below [`TAIL_TOL`] over the last 5% of the grid.
    pub tail_converged: bool,
}

impl MeasureReport {
    /// `I / M`; `None` when `M` vanishes.
    pub fn ratio(&self) -> Option<f64> {
        if self.moment_measure > 0.0 {
            Some(self.rhp_measure / self.moment_measure)
        } else {
            None
        }
    }

    /// Runs of grid points with `f > 0`.
    pub fn f_support(&self) -> Vec<(f64, f64)> {
        violation_intervals(&self.grid, |k| self.f[k] > 0.0)
    }

    /// Runs of grid points with `g > 0`.
    pub fn g_support(&self) -> Vec<(f64, f64)> {
        violation_intervals(&self.grid, |k| self.g[k] > 0.0)
    }
}

pub fn trapezoid(grid: &[f64], values: &[f64]) -> f64 {
    grid.windows(2)
        .zip(values.windows(2))
        .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1]))
        .sum()
}

/// Samples `f` and `g` on `grid_points` equally spaced times over
/// `[0, t_max]` and integrates them.
///
/// Non-unital generators are accepted with a warning.
pub fn measure_report(
    gen: &LindbladGenerator,
    t_max: f64,
    grid_points: usize,
    schedule: &[f64],
) -> Result<MeasureReport> {
    if !(t_max > 0.0 && t_max.is_finite()) || grid_points < 2 {
        return Err(Error::InvalidParameter(format!(
            "measure needs t_max > 0 and at least two grid points (t_max={t_max}, points={grid_points})"
        )));
    }
    check_schedule(schedule)?;
    let grid = linspace(0.0, t_max, grid_points);

    let probes = linspace(0.0, t_max, grid_points.min(11));
    let mut unital = true;
    for &t in &probes {
        unital &= gen.is_unital(t)?;
    }
    if !unital {
        warn!("generator is not unital: the moment measure is only a faithful measure for unital dynamics");
    }

    let rates: Vec<InstantaneousRates> = grid
        .par_iter()
        .map(|&t| instantaneous_rates(gen, t, schedule))
        .collect::<Result<_>>()?;
    let f: Vec<f64> = rates.iter().map(|r| r.f).collect();
    let g: Vec<f64> = rates.iter().map(|r| r.g).collect();

    let tail_start = grid_points - (grid_points / 20).max(1);
    let tail_converged = f[tail_start..]
        .iter()
        .chain(&g[tail_start..])
        .all(|v| v.abs() < TAIL_TOL);
    if !tail_converged {
        warn!("f or g exceeds {TAIL_TOL:e} over the last 5% of [0, {t_max}]: the measure may be truncated");
    }

    Ok(MeasureReport {
        moment_measure: trapezoid(&grid, &f),
        rhp_measure: trapezoid(&grid, &g),
        grid,
        eps_schedule: schedule.to_vec(),
        f,
        g,
        unital,
        tail_converged,
    })
}

/// `M = int_0^t_max f(t) dt` with the default epsilon schedule.
pub fn moment_measure(gen: &LindbladGenerator, t_max: f64, grid_points: usize) -> Result<f64> {
    Ok(measure_report(gen, t_max, grid_points, &DEFAULT_EPS_SCHEDULE)?.moment_measure)
}

/// `I = int_0^t_max g(t) dt` with the default epsilon schedule.
pub fn rhp_measure(gen: &LindbladGenerator, t_max: f64, grid_points: usize) -> Result<f64> {
    Ok(measure_report(gen, t_max, grid_points, &DEFAULT_EPS_SCHEDULE)?.rhp_measure)
}

/// Minimum Choi eigenvalue of `Lambda(t + delta, t)` along a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DivisibilityReport {
    pub grid: Vec<f64>,
    pub delta: f64,
    pub min_eigenvalues: Vec<f64>,
    /// Runs of grid points whose intermediate map is not CP.
    pub violations: Vec<(f64, f64)>,
}

impl DivisibilityReport {
    pub fn cp_divisible(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn cp_divisibility_scan(gen: &LindbladGenerator, grid: &[f64], delta: f64) -> Result<DivisibilityReport> {
    check_grid(grid)?;
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "delta must be finite and > 0, got {delta}"
        )));
    }
    let phis = propagate_along(gen, grid, STEPS_PER_UNIT_TIME)?;
    let min_eigenvalues: Vec<f64> = grid
        .par_iter()
        .zip(phis.par_iter())
        .map(|(&t, phi)| Ok(step_choi(gen, phi, t, delta)?.as_hermitian().spectrum().min()))
        .collect::<Result<_>>()?;
    let violations = violation_intervals(grid, |k| min_eigenvalues[k] < -CP_EIGEN_TOL);
    Ok(DivisibilityReport {
        grid: grid.to_vec(),
        delta,
        min_eigenvalues,
        violations,
    })
}

const RENYI_ZERO: f64 = 1e-14;

/// `S_alpha = log2(Tr rho^alpha) / (1 - alpha)` for `alpha > 0`, `alpha != 1`.
pub fn renyi_entropy(rho: &DensityMatrix, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha.is_finite()) || alpha == 1.0 {
        return Err(Error::InvalidParameter(format!(
            "Renyi order must be finite, > 0 and != 1 (von Neumann limit), got {alpha}"
        )));
    }
    let spec = rho.as_hermitian().spectrum();
    // rounding-level eigenvalues would otherwise dominate for alpha < 1
    let s: f64 = spec
        .eigenvalues()
        .iter()
        .filter(|l| **l > RENYI_ZERO)
        .map(|l| l.powf(alpha))
        .sum();
    Ok(s.log2() / (1.0 - alpha))
}

/// Witness of the small-time Choi state at a single time.
pub fn small_time_witness(gen: &LindbladGenerator, t: f64, epsilon: f64) -> Result<f64> {
    Ok(moment_witness(&choi_small_time(gen, t, epsilon)?))
}
