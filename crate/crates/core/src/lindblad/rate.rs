//! Time-dependent Lindblad rates.
//!
//! Time is dimensionless throughout (`t' = k t` is folded into `k`), and
//! `hbar = k_B = 1`.

use std::f64::consts::PI;

use crate::quad;
use crate::{Error, Result};

/// Absolute tolerance for the Ohmic rate integral.
pub const OHMIC_QUAD_TOL: f64 = 1e-8;
/// The Ohmic integral is truncated at `OHMIC_CUTOFF_MULTIPLE * omega_c`.
pub const OHMIC_CUTOFF_MULTIPLE: f64 = 50.0;
/// Below this argument `coth(x)` is replaced by `1/x + x/3`.
const COTH_SERIES_BELOW: f64 = 1e-4;
/// Below this `|g|` the Lorentzian rate uses its small-`g` expansion.
const LORENTZIAN_SMALL_G: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub enum RateModel {
    Constant {
        value: f64,
    },
    /// `gamma(t) = exp(-k t) cos(k t)`.
    ExpCos {
        k: f64,
    },
    /// Dephasing rate of a qubit coupled to a Lorentzian reservoir with
    /// spectral width `lambda` and coupling `gamma0`.
    Lorentzian {
        lambda: f64,
        gamma0: f64,
        k: f64,
    },
    /// Pure-dephasing rate for `J(w) = w exp(-w / omega_c)` at temperature
    /// `temperature`.
    OhmicDephasing {
        omega_c: f64,
        temperature: f64,
    },
    /// Piecewise-linear interpolation through `(t, gamma)` knots.
    Tabulated {
        knots: Vec<(f64, f64)>,
    },
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must be finite and > 0, got {v}"
        )))
    }
}

impl RateModel {
    pub fn validate(&self) -> Result<()> {
        match self {
            RateModel::Constant { value } => {
                if value.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(format!(
                        "constant rate must be finite, got {value}"
                    )))
                }
            }
            RateModel::ExpCos { k } => positive("k", *k),
            RateModel::Lorentzian { lambda, gamma0, k } => {
                positive("lambda", *lambda)?;
                positive("gamma0", *gamma0)?;
                positive("k", *k)
            }
            RateModel::OhmicDephasing { omega_c, temperature } => {
                positive("omega_c", *omega_c)?;
                if *temperature >= 0.0 && temperature.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(format!(
                        "temperature must be finite and >= 0, got {temperature}"
                    )))
                }
            }
            RateModel::Tabulated { knots } => {
                if knots.len() < 2 {
                    return Err(Error::InvalidParameter(
                        "tabulated rate needs at least two knots".into(),
                    ));
                }
                if knots.iter().any(|(t, g)| !t.is_finite() || !g.is_finite()) {
                    return Err(Error::InvalidParameter("tabulated knots must be finite".into()));
                }
                if knots.windows(2).any(|w| w[1].0 <= w[0].0) {
                    return Err(Error::InvalidParameter(
                        "tabulated knot times must be strictly increasing".into(),
                    ));
                }
                Ok(())
            }
        }
    }

    /// `gamma(t)`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if !t.is_finite() {
            return Err(Error::InvalidParameter(format!("rate queried at non-finite t = {t}")));
        }
        if t < 0.0 && !matches!(self, RateModel::Tabulated { .. }) {
            return Err(Error::InvalidParameter(format!("rate queried at negative t = {t}")));
        }
        match self {
            RateModel::Constant { value } => Ok(*value),
            RateModel::ExpCos { k } => {
                let tp = k * t;
                Ok((-tp).exp() * tp.cos())
            }
            RateModel::Lorentzian { lambda, gamma0, k } => lorentzian(*lambda, *gamma0, k * t, t, *k),
            RateModel::OhmicDephasing { omega_c, temperature } => ohmic(*omega_c, *temperature, t),
            RateModel::Tabulated { knots } => tabulated(knots, t),
        }
    }

    /// Short lowercase tag used by scenario files.
    pub fn kind(&self) -> &'static str {
        match self {
            RateModel::Constant { .. } => "constant",
            RateModel::ExpCos { .. } => "exp-cos",
            RateModel::Lorentzian { .. } => "lorentzian",
            RateModel::OhmicDephasing { .. } => "ohmic",
            RateModel::Tabulated { .. } => "tabulated",
        }
    }
}

fn lorentzian(lambda: f64, gamma0: f64, tp: f64, t: f64, k: f64) -> Result<f64> {
    // gamma = 2 lambda gamma0 S / (C + lambda S) with S = sinh(tp g / 2) / g,
    // C = cosh(tp g / 2); for imaginary g these become sin / |g| and cos.
    let disc = lambda * lambda - 2.0 * gamma0 * lambda;
    let g = disc.abs().sqrt();
    let half = 0.5 * tp;
    if g < LORENTZIAN_SMALL_G {
        let a2 = (half * g).powi(2) * disc.signum();
        let s = half * (1.0 + a2 / 6.0);
        let c = 1.0 + a2 / 2.0;
        return finish_lorentzian(lambda, gamma0, s, c, t, || None);
    }
    if disc > 0.0 {
        // real branch: divide through by cosh to stay finite for large tp
        let th = (half * g).tanh();
        return Ok(2.0 * lambda * gamma0 * th / (g + lambda * th));
    }
    let a = half * g;
    let s = a.sin() / g;
    let c = a.cos();
    finish_lorentzian(lambda, gamma0, s, c, t, || {
        // cos a + (lambda / g) sin a = 0  =>  a = pi - atan(g / lambda) + n pi
        let base = PI - (g / lambda).atan();
        let n = ((a - base) / PI).round().max(0.0);
        Some(2.0 * (base + n * PI) / (g * k))
    })
}

fn finish_lorentzian(lambda: f64, gamma0: f64, s: f64, c: f64, t: f64, pole: impl Fn() -> Option<f64>) -> Result<f64> {
    let den = c + lambda * s;
    let scale = c.abs() + (lambda * s).abs();
    if den.abs() <= 1e-14 * scale.max(1.0) {
        return Err(Error::RatePole {
            t,
            pole: pole().unwrap_or(t),
        });
    }
    let value = 2.0 * lambda * gamma0 * s / den;
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::RatePole {
            t,
            pole: pole().unwrap_or(t),
        })
    }
}

/// `coth(w * half_beta) * sin(w t)`, finite as `w -> 0`.
fn coth_times_sin(w: f64, half_beta: f64, t: f64) -> f64 {
    let x = w * half_beta;
    if x < COTH_SERIES_BELOW {
        if w == 0.0 {
            return t / half_beta;
        }
        (1.0 / x + x / 3.0) * (w * t).sin()
    } else {
        (w * t).sin() / x.tanh()
    }
}

fn ohmic(omega_c: f64, temperature: f64, t: f64) -> Result<f64> {
    if t == 0.0 {
        return Ok(0.0);
    }
    let upper = OHMIC_CUTOFF_MULTIPLE * omega_c;
    // resolve each half-oscillation of sin(w t) from the start
    let initial = ((upper * t / PI).ceil() as usize).clamp(4, 4096);
    let q = if temperature == 0.0 {
        quad::integrate(
            |w| (-w / omega_c).exp() * (w * t).sin(),
            0.0,
            upper,
            OHMIC_QUAD_TOL,
            initial,
            20_000,
        )?
    } else {
        let beta_half = 0.5 / temperature;
        quad::integrate(
            |w| (-w / omega_c).exp() * coth_times_sin(w, beta_half, t),
            0.0,
            upper,
            OHMIC_QUAD_TOL,
            initial,
            20_000,
        )?
    };
    Ok(q.value)
}

fn tabulated(knots: &[(f64, f64)], t: f64) -> Result<f64> {
    let (lo, hi) = (knots[0].0, knots[knots.len() - 1].0);
    if t < lo || t > hi {
        return Err(Error::Extrapolation { t, lo, hi });
    }
    let idx = knots.partition_point(|(tk, _)| *tk <= t);
    if idx == knots.len() {
        return Ok(knots[knots.len() - 1].1);
    }
    let (t0, g0) = knots[idx - 1];
    let (t1, g1) = knots[idx];
    Ok(g0 + (g1 - g0) * (t - t0) / (t1 - t0))
}
