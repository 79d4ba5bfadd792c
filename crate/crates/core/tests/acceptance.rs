//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use choi_moments::choi::{
    choi_of_superoperator, choi_small_time, cptp_diagnostics, default_steps, intermediate_map, propagate_along,
    propagate_map, Superoperator, DEFAULT_CPTP_TOL, STEPS_PER_UNIT_TIME,
};
use choi_moments::detect::{
    instantaneous_rates, linspace, measure_report, moment_witness, renyi_entropy, witness_series, WitnessSeries,
    DEFAULT_EPS_SCHEDULE, WITNESS_THRESHOLD,
};
use choi_moments::lindblad::{unvectorize, vectorize, DensityMatrix, LindbladGenerator, RateModel};
use choi_moments::scenario::parse_scenario;
use choi_moments::spectral::HermitianMatrix;
use choi_moments::{random, Operator};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = fn() -> (bool, String);

const FIG_RUNTIME: Duration = Duration::from_secs(10);
const MONOTONE_RUNTIME: Duration = Duration::from_secs(60);
const RATE_TOL: f64 = 5e-4;
const MEASURE_RTOL: f64 = 5e-3;
const RATIO_RTOL: f64 = 1e-2;
const SOUNDNESS_TOL: f64 = 1e-12;
const MONOTONE_TOL: f64 = 1e-9;
const STEP_DOUBLING_TOL: f64 = 1e-8;
const ORDER_FACTOR: f64 = 10.0;

/// `int_0^t_max max(0, -e^{-t} cos t) dt` from the antiderivative
/// `e^{-t} (sin t - cos t) / 2`, summed over the negative lobes.
fn expcos_negative_area(t_max: f64) -> f64 {
    let anti = |u: f64| (-u).exp() * (u.sin() - u.cos()) / 2.0;
    let mut total = 0.0;
    let mut a = PI / 2.0;
    while a < t_max {
        let b = (a + PI).min(t_max);
        total -= anti(b) - anti(a);
        a += 2.0 * PI;
    }
    total
}

/// Grid points where `witness > threshold` disagrees with `gamma < 0`, ignoring
/// points within one grid spacing of a sign change of `gamma`.
fn sign_mismatches(s: &WitnessSeries, gamma: &[f64]) -> Vec<f64> {
    let neg = |k: usize| gamma[k] < 0.0;
    let near_boundary = |k: usize| (k > 0 && neg(k - 1) != neg(k)) || (k + 1 < gamma.len() && neg(k + 1) != neg(k));
    (0..s.grid.len())
        .filter(|&k| (s.values[k] > WITNESS_THRESHOLD) != neg(k) && !near_boundary(k))
        .map(|k| s.grid[k])
        .collect()
}

fn criterion_1() -> (bool, String) {
    let cfg = parse_scenario(include_str!("../scenarios/example1.cfg")).expect("bundled example1");
    let gen = cfg.generator().expect("generator");
    let grid = cfg.grid();
    let h = grid[1] - grid[0];
    let start = Instant::now();
    let s = witness_series(&gen, &grid, cfg.epsilon, cfg.mode).expect("witness series");
    let elapsed = start.elapsed();
    let gamma: Vec<f64> = grid.iter().map(|t| (-t).exp() * t.cos()).collect();
    let setup_ok = cfg.points == 2000 && cfg.epsilon == 1e-3 && (cfg.t_max - 2.0 * PI).abs() < 1e-15;
    let mismatches = sign_mismatches(&s, &gamma);
    let first = s.violations.first().map(|v| v.0);
    let crossing_ok = first.is_some_and(|t| (t - PI / 2.0).abs() <= h);
    let pass = setup_ok && mismatches.is_empty() && crossing_ok && elapsed < FIG_RUNTIME;
    (
        pass,
        format!(
            "Pauli exp-cos witness sign pattern: {} mismatches off-boundary, first violation at {:?} (pi/2 = {:.6}, h = {:.2e}), {:.2?}",
            mismatches.len(),
            first,
            PI / 2.0,
            h,
            elapsed
        ),
    )
}

fn criterion_2() -> (bool, String) {
    let cfg = parse_scenario(include_str!("../scenarios/example2.cfg")).expect("bundled example2");
    let gen = cfg.generator().expect("generator");
    let grid = cfg.grid();
    let start = Instant::now();
    let s = witness_series(&gen, &grid, cfg.epsilon, cfg.mode).expect("witness series");
    let elapsed = start.elapsed();
    let rate = RateModel::Lorentzian {
        lambda: 1.5,
        gamma0: 1.0,
        k: 1.0,
    };
    let gamma: Vec<f64> = grid
        .iter()
        .map(|&t| rate.eval(t).expect("rate off the poles"))
        .collect();
    let mismatches = sign_mismatches(&s, &gamma);

    let control = LindbladGenerator::dephasing(RateModel::Lorentzian {
        lambda: 2.0,
        gamma0: 1.0,
        k: 1.0,
    })
    .unwrap();
    let c = witness_series(&control, &grid, cfg.epsilon, cfg.mode).expect("control series");
    let pass = s.is_violated() && mismatches.is_empty() && !c.is_violated() && elapsed < FIG_RUNTIME;
    (
        pass,
        format!(
            "Lorentzian lambda = 1.5 witness: {} intervals, {} mismatches vs gamma < 0; lambda = 2 control: {} intervals; {:.2?}",
            s.violations.len(),
            mismatches.len(),
            c.violations.len(),
            elapsed
        ),
    )
}

fn criterion_3() -> (bool, String) {
    let mut worst_f = 0.0f64;
    let mut worst_g = 0.0f64;
    for k in 0..50 {
        let gamma = -2.0 + 4.0 * k as f64 / 49.0;
        let gen = LindbladGenerator::dephasing(RateModel::Constant { value: gamma }).unwrap();
        let r = instantaneous_rates(&gen, 0.0, &DEFAULT_EPS_SCHEDULE).expect("rates");
        worst_f = worst_f.max((r.f - (-gamma).max(0.0)).abs());
        worst_g = worst_g.max((r.g - (-2.0 * gamma).max(0.0)).abs());
    }
    (
        worst_f < RATE_TOL && worst_g < RATE_TOL,
        format!("dephasing f, g over 50 rates in [-2, 2]: max errors {worst_f:.2e}, {worst_g:.2e} (tol {RATE_TOL:e})"),
    )
}

fn criterion_4() -> (bool, String) {
    let t_max = 20.0;
    let m_ref = expcos_negative_area(t_max);
    let i_ref = 2.0 * m_ref;
    let gen = LindbladGenerator::dephasing(RateModel::ExpCos { k: 1.0 }).unwrap();
    let rep = measure_report(&gen, t_max, 2001, &DEFAULT_EPS_SCHEDULE).expect("ExpCos measures");
    let m_err = (rep.moment_measure - m_ref).abs() / m_ref;
    let i_err = (rep.rhp_measure - i_ref).abs() / i_ref;
    let ratio = rep.ratio();
    let ratio_ok = ratio.is_some_and(|r| (r - 2.0).abs() <= RATIO_RTOL * 2.0);
    let expcos_ok = m_err < MEASURE_RTOL && i_err < MEASURE_RTOL && ratio_ok;
    let mut detail = format!(
        "ExpCos M = {:.6} (ref {m_ref:.6}), I = {:.6} (ref {i_ref:.6}), I/M = {:?}",
        rep.moment_measure, rep.rhp_measure, ratio
    );

    let mut ohmic_ok = true;
    for temperature in [0.0, 5.0] {
        let gen = LindbladGenerator::dephasing(RateModel::OhmicDephasing {
            omega_c: 1.0,
            temperature,
        })
        .unwrap();
        let rep = measure_report(&gen, t_max, 2001, &DEFAULT_EPS_SCHEDULE).expect("Ohmic measures");
        let ratio = rep.ratio();
        ohmic_ok &= ratio.is_some_and(|r| (r - 2.0).abs() <= RATIO_RTOL * 2.0);
        detail += &format!(
            "; Ohmic(omega_c = 1, T = {temperature}) M = {:.3e}, I = {:.3e}, I/M = {}",
            rep.moment_measure,
            rep.rhp_measure,
            ratio.map_or("undefined".to_string(), |r| format!("{r:.6}"))
        );
    }
    (expcos_ok && ohmic_ok, detail)
}

fn criterion_5() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = f64::NEG_INFINITY;
    let mut checked = 0;
    for (dim, count) in [(4, 1000), (9, 100), (16, 100)] {
        for _ in 0..count {
            let rank = rng.random_range(1..=dim);
            let c = random::psd_unit_trace(&mut rng, dim, rank);
            let spec = c.as_hermitian().spectrum();
            let (r2, r3) = (spec.moment(2).unwrap(), spec.moment(3).unwrap());
            worst = worst.max(r2 * r2 - r3);
            checked += 1;
        }
    }
    let mut cptp = 0;
    for k in 0..100 {
        let d = if k < 80 { 2 } else { 3 };
        let count = rng.random_range(1..=d * d);
        let kraus = random::kraus_channel(&mut rng, d, count);
        let phi = Superoperator::new(random::kraus_superoperator(&kraus), (0.0, 1.0)).expect("trace preserving");
        let diag = cptp_diagnostics(&choi_of_superoperator(&phi).expect("Choi"), DEFAULT_CPTP_TOL);
        if diag.is_cp && diag.is_tp {
            cptp += 1;
        }
    }
    (
        worst <= SOUNDNESS_TOL && cptp == 100,
        format!(
            "max r2^2 - r3 over {checked} PSD unit-trace matrices = {worst:.3e}; {cptp}/100 Kraus Choi states CPTP"
        ),
    )
}

struct MonotoneWorst {
    renyi_drop: f64,
    schatten_rise: f64,
    witness_rise: f64,
    witness_generators: usize,
}

fn criterion_6() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let grid = linspace(0.0, 5.0, 500);
    let start = Instant::now();
    let mut w = MonotoneWorst {
        renyi_drop: 0.0,
        schatten_rise: 0.0,
        witness_rise: 0.0,
        witness_generators: 0,
    };
    for _ in 0..20 {
        let gen = random::divisible_unital_generator(&mut rng, 2, 1.0);
        let rho0 = random::density_matrix(&mut rng, 2);
        let phis = propagate_along(&gen, &grid, STEPS_PER_UNIT_TIME).expect("propagation");
        let mut prev: Option<[f64; 5]> = None;
        let mut rose = false;
        for (k, phi) in phis.iter().enumerate() {
            let rho = unvectorize(&(phi * vectorize(rho0.matrix())), 2);
            let rho = DensityMatrix::new(HermitianMatrix::new(rho).expect("Hermitian state")).expect("state");
            let spec = rho.as_hermitian().spectrum();
            let map = Superoperator::new(phi.clone(), (0.0, grid[k])).expect("map");
            let cur = [
                renyi_entropy(&rho, 2.0).unwrap(),
                renyi_entropy(&rho, 3.0).unwrap(),
                spec.schatten_norm(2.0).unwrap(),
                spec.schatten_norm(3.0).unwrap(),
                moment_witness(&choi_of_superoperator(&map).expect("Choi")),
            ];
            if let Some(p) = prev {
                w.renyi_drop = w.renyi_drop.max(p[0] - cur[0]).max(p[1] - cur[1]);
                w.schatten_rise = w.schatten_rise.max(cur[2] - p[2]).max(cur[3] - p[3]);
                w.witness_rise = w.witness_rise.max(cur[4] - p[4]);
                rose |= cur[4] - p[4] > MONOTONE_TOL;
            }
            prev = Some(cur);
        }
        w.witness_generators += rose as usize;
    }
    let elapsed = start.elapsed();
    let pass = w.renyi_drop <= MONOTONE_TOL
        && w.schatten_rise <= MONOTONE_TOL
        && w.witness_rise <= MONOTONE_TOL
        && elapsed < MONOTONE_RUNTIME;
    (
        pass,
        format!(
            "20 divisible unital generators, 500 steps: max Renyi drop {:.2e}, max Schatten rise {:.2e}, \
             max Choi-witness rise {:.2e} ({}/20 generators non-monotone); {:.2?}",
            w.renyi_drop, w.schatten_rise, w.witness_rise, w.witness_generators, elapsed
        ),
    )
}

fn criterion_7() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut gens = vec![
        LindbladGenerator::pauli(RateModel::ExpCos { k: 1.0 }).unwrap(),
        LindbladGenerator::dephasing(RateModel::Lorentzian {
            lambda: 1.5,
            gamma0: 1.0,
            k: 1.0,
        })
        .unwrap(),
    ];
    gens.extend((0..3).map(|_| random::generator(&mut rng, 2)));
    let mut doubling = 0.0f64;
    for gen in &gens {
        let (t0, t1) = (0.0, 5.0);
        let n = default_steps(t0, t1);
        let a = propagate_map(gen, t0, t1, n).expect("propagate");
        let b = propagate_map(gen, t0, t1, 2 * n).expect("propagate");
        doubling = doubling.max((a.matrix() - b.matrix()).camax());
    }

    let mut worst_ratio = 0.0f64;
    for gen in &gens[..2] {
        for t in [0.5, 2.0, 4.0] {
            for eps in [1e-2, 1e-3, 1e-4] {
                let small = choi_small_time(gen, t, eps).expect("small-time Choi");
                let lambda = intermediate_map(gen, t, t + eps, STEPS_PER_UNIT_TIME).expect("intermediate map");
                let finite = choi_of_superoperator(&lambda).expect("Choi");
                let diff: Operator = small.matrix() - finite.matrix();
                worst_ratio = worst_ratio.max(diff.camax() / (eps * eps));
            }
        }
    }
    (
        doubling < STEP_DOUBLING_TOL && worst_ratio < ORDER_FACTOR,
        format!(
            "step doubling max change {doubling:.2e} (tol {STEP_DOUBLING_TOL:e}); small-time vs finite-interval Choi max diff / eps^2 = {worst_ratio:.3} (limit {ORDER_FACTOR})"
        ),
    )
}

fn run_cli(cfg: &Path, out: &Path) -> Option<i32> {
    Command::new(env!("CARGO_BIN_EXE_choi-moments"))
        .args(["run", "--quiet", "--out-dir"])
        .arg(out)
        .arg(cfg)
        .status()
        .ok()?
        .code()
}

fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .map(|entries| {
            entries
                .filter_map(|e| e.ok())
                .filter(|e| e.path().extension().is_some_and(|x| x == "csv"))
                .map(|e| {
                    (
                        e.file_name().to_string_lossy().into_owned(),
                        fs::read(e.path()).unwrap_or_default(),
                    )
                })
                .collect()
        })
        .unwrap_or_default();
    out.sort();
    out
}

fn criterion_8() -> (bool, String) {
    let scenarios = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios");
    let expected = [
        ("example1", 10),
        ("example2", 10),
        ("ohmic_compare", 0),
        ("markovian_control", 0),
    ];
    let mut pass = true;
    let mut detail = Vec::new();
    for (name, code) in expected {
        let cfg = scenarios.join(format!("{name}.cfg"));
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let (ca, cb) = (run_cli(&cfg, a.path()), run_cli(&cfg, b.path()));
        let (fa, fb) = (csv_files(a.path()), csv_files(b.path()));
        let identical = !fa.is_empty() && fa == fb;
        let ok = ca == Some(code) && cb == Some(code) && identical;
        pass &= ok;
        detail.push(format!(
            "{name}: exit {ca:?}/{cb:?} (want {code}), {} CSVs identical = {identical}",
            fa.len()
        ));
    }
    (pass, detail.join("; "))
}

fn main() {
    let criteria: [(&str, Check); 8] = [
        ("1 witness curve, three Pauli channels", criterion_1),
        ("2 witness curve, Lorentzian dephasing", criterion_2),
        ("3 dephasing rate formulas", criterion_3),
        ("4 measure relation", criterion_4),
        ("5 witness soundness", criterion_5),
        ("6 monotonicity under divisible unital dynamics", criterion_6),
        ("7 integration quality", criterion_7),
        ("8 determinism and exit codes", criterion_8),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let (pass, detail) = check();
        failed += !pass as usize;
        println!("{} criterion {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    }
    if failed > 0 {
        println!("{failed} of 8 criteria failed");
        std::process::exit(1);
    }
    println!("all 8 criteria passed");
}
