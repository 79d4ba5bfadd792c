//! Random operators, states, channels and generators for property testing
//! and sampling studies.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::lindblad::DensityMatrix;
use crate::lindblad::{Dissipator, LindbladGenerator, RateModel};
use crate::spectral::HermitianMatrix;
use crate::{Operator, C64};

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> Operator {
    DMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    })
}

pub fn hermitian<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> HermitianMatrix {
    let g = ginibre(rng, dim, dim);
    HermitianMatrix::symmetrize(&g + g.adjoint())
}

/// Haar-random unitary (QR of a Ginibre matrix with phase-corrected `R`).
pub fn unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Operator {
    isometry(rng, dim, dim)
}

/// `rows x cols` isometry (`V^dag V = I`), `rows >= cols`.
pub fn isometry<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> Operator {
    assert!(rows >= cols, "isometry needs rows >= cols");
    let qr = ginibre(rng, rows, cols).qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..cols {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        for i in 0..rows {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Random full-rank density matrix `G G^dag / tr(G G^dag)`.
pub fn density_matrix<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DensityMatrix {
    psd_unit_trace(rng, dim, dim)
}

/// Random unit-trace PSD matrix of rank at most `rank`.
pub fn psd_unit_trace<R: Rng + ?Sized>(rng: &mut R, dim: usize, rank: usize) -> DensityMatrix {
    let g = ginibre(rng, dim, rank.max(1));
    let w = &g * g.adjoint();
    let tr = w.trace().re;
    DensityMatrix::new(HermitianMatrix::symmetrize(w / C64::new(tr, 0.0))).expect("Wishart matrices are PSD")
}

/// Kraus operators of a random CPTP map on dimension `dim` with `count`
/// operators, cut from a random isometry so that `sum K^dag K = I`.
pub fn kraus_channel<R: Rng + ?Sized>(rng: &mut R, dim: usize, count: usize) -> Vec<Operator> {
    let v = isometry(rng, dim * count, dim);
    (0..count).map(|k| v.rows(k * dim, dim).into_owned()).collect()
}

/// Row-major superoperator `sum_k K (x) conj(K)` of a Kraus map.
pub fn kraus_superoperator(kraus: &[Operator]) -> Operator {
    let d = kraus[0].nrows();
    let mut out = Operator::zeros(d * d, d * d);
    for k in kraus {
        out += k.kronecker(&k.conjugate());
    }
    out
}

fn normal_operator<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Operator {
    let u = unitary(rng, dim);
    let diag = ginibre(rng, dim, 1);
    let d = Operator::from_diagonal(&diag.column(0).into_owned());
    &u * d * u.adjoint()
}

/// Random generator: Hermitian `H`, one or two arbitrary Lindblad operators
/// with constant or exp-cos rates.
pub fn generator<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> LindbladGenerator {
    let count = rng.random_range(1..=2);
    let dissipators = (0..count)
        .map(|_| {
            let op = ginibre(rng, dim, dim);
            let rate = if rng.random_bool(0.5) {
                RateModel::Constant {
                    value: rng.random_range(-1.0..1.0),
                }
            } else {
                RateModel::ExpCos {
                    k: rng.random_range(0.5..2.0),
                }
            };
            Dissipator::new(op, rate)
        })
        .collect();
    let h = hermitian(rng, dim);
    LindbladGenerator::new(
        HermitianMatrix::symmetrize(h.matrix() * C64::new(0.5, 0.0)),
        dissipators,
    )
    .expect("dimensions agree")
}

/// Random CP-divisible unital generator: normal Lindblad operators with
/// constant rates drawn uniformly from `[0, max_rate]`, plus a random
/// Hermitian `H`.
pub fn divisible_unital_generator<R: Rng + ?Sized>(rng: &mut R, dim: usize, max_rate: f64) -> LindbladGenerator {
    let count = rng.random_range(1..=3);
    let dissipators = (0..count)
        .map(|_| {
            let mut op = normal_operator(rng, dim);
            let scale = op.iter().fold(0.0f64, |a, z| a.max(z.norm())).max(1e-12);
            op /= C64::new(scale, 0.0);
            let value = rng.random_range(0.0..=max_rate);
            Dissipator::new(op, RateModel::Constant { value })
        })
        .collect();
    LindbladGenerator::new(hermitian(rng, dim), dissipators).expect("dimensions agree")
}
