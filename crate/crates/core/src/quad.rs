//! Adaptive Gauss-Kronrod (7/15) quadrature on finite intervals.

#![allow(clippy::excessive_precision)]

use crate::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5) and the centre.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let pair = f(centre - dx) + f(centre + dx);
        kronrod += w * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Segment {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    }
}

/// Integrates `f` over `[a, b]` to absolute tolerance `tol`.
///
/// The interval is first split into `initial` equal pieces, then the
/// segment with the largest error estimate is bisected until the summed
/// estimate falls below `tol` or `max_intervals` is reached.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    tol: f64,
    initial: usize,
    max_intervals: usize,
) -> Result<Quadrature> {
    if !(a.is_finite() && b.is_finite()) || !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "quadrature needs finite bounds and positive tolerance (a={a}, b={b}, tol={tol})"
        )));
    }
    if a == b {
        return Ok(Quadrature {
            value: 0.0,
            error: 0.0,
            intervals: 0,
        });
    }
    let initial = initial.max(1);
    let width = (b - a) / initial as f64;
    let mut segments: Vec<Segment> = (0..initial)
        .map(|k| {
            let lo = a + width * k as f64;
            let hi = if k + 1 == initial { b } else { lo + width };
            gk15(&f, lo, hi)
        })
        .collect();

    loop {
        let error: f64 = segments.iter().map(|s| s.error).sum();
        if !error.is_finite() {
            return Err(Error::QuadratureFailed { residual: error });
        }
        if error <= tol {
            let value = segments.iter().map(|s| s.value).sum();
            return Ok(Quadrature {
                value,
                error,
                intervals: segments.len(),
            });
        }
        if segments.len() >= max_intervals {
            return Err(Error::QuadratureFailed { residual: error });
        }
        let (worst, _) = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .expect("at least one segment");
        let s = segments.swap_remove(worst);
        let mid = 0.5 * (s.a + s.b);
        if mid <= s.a || mid >= s.b {
            return Err(Error::QuadratureFailed { residual: error });
        }
        segments.push(gk15(&f, s.a, mid));
        segments.push(gk15(&f, mid, s.b));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_is_exact() {
        let q = integrate(|x| x.powi(5) - 2.0 * x, 0.0, 2.0, 1e-12, 1, 10).unwrap();
        assert!((q.value - (64.0 / 6.0 - 4.0)).abs() < 1e-13);
    }

    #[test]
    fn damped_oscillation_matches_closed_form() {
        // int_0^inf e^{-w} sin(w t) dw = t / (1 + t^2)
        for t in [0.5, 1.0, 3.0, 10.0] {
            let q = integrate(|w| (-w).exp() * (w * t).sin(), 0.0, 50.0, 1e-10, 8, 2000).unwrap();
            assert!((q.value - t / (1.0 + t * t)).abs() < 1e-9, "t = {t}");
        }
    }

    #[test]
    fn reports_failure_on_budget_exhaustion() {
        let r = integrate(|x| (1.0 / x).sin(), 1e-6, 1.0, 1e-14, 1, 4);
        assert!(matches!(r, Err(Error::QuadratureFailed { .. })));
        assert!(integrate(|x| x, 0.0, f64::INFINITY, 1e-8, 1, 10).is_err());
        let q = integrate(|x| x.sin(), 0.0, PI, 1e-12, 1, 100).unwrap();
        assert!((q.value - 2.0).abs() < 1e-12);
    }
}
