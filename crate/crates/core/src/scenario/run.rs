use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use log::info;

use super::config::{render_scenario, OutputKind, ScenarioConfig};
use crate::detect::{self, DivisibilityReport, MeasureReport, WitnessSeries};

pub const EXIT_MARKOVIAN: i32 = 0;
pub const EXIT_NON_MARKOVIAN: i32 = 10;
pub const EXIT_CONFIG_ERROR: i32 = 1;
pub const EXIT_NUMERICAL_FAILURE: i32 = 2;

/// `f` or `g` above this counts as support of the measure integrand.
pub const RATE_SUPPORT_TOL: f64 = 1e-6;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("scenario `{scenario}`: {source}")]
    Numerical {
        scenario: String,
        #[source]
        source: crate::Error,
    },
    #[error("scenario `{scenario}`: cannot write {}: {source}", path.display())]
    Io {
        scenario: String,
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    MarkovianConsistent,
    NonMarkovian,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::MarkovianConsistent => "Markovian-consistent",
            Verdict::NonMarkovian => "non-Markovian",
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::MarkovianConsistent => EXIT_MARKOVIAN,
            Verdict::NonMarkovian => EXIT_NON_MARKOVIAN,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub scenario: String,
    pub files: Vec<PathBuf>,
    pub verdict: Verdict,
    /// Violation intervals per detector that found any.
    pub violations: Vec<(&'static str, Vec<(f64, f64)>)>,
    pub moment_measure: Option<f64>,
    pub rhp_measure: Option<f64>,
    pub ratio: Option<f64>,
    pub config_echo: String,
    pub version: &'static str,
}

impl RunReport {
    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "choi-moments {}", self.version);
        let _ = writeln!(s, "scenario: {}", self.scenario);
        let _ = writeln!(s, "verdict: {}", self.verdict.as_str());
        for (source, runs) in &self.violations {
            for (a, b) in runs {
                let _ = writeln!(s, "violation ({source}): [{}, {}]", format_float(*a), format_float(*b));
            }
        }
        if let Some(m) = self.moment_measure {
            let _ = writeln!(s, "moment measure M: {}", format_float(m));
        }
        if let Some(i) = self.rhp_measure {
            let _ = writeln!(s, "RHP measure I: {}", format_float(i));
        }
        if self.moment_measure.is_some() && self.rhp_measure.is_some() {
            match self.ratio {
                Some(r) => {
                    let _ = writeln!(s, "ratio I/M: {}", format_float(r));
                }
                None => {
                    let _ = writeln!(s, "ratio I/M: undefined (M = 0)");
                }
            }
        }
        let _ = writeln!(s, "files:");
        for f in &self.files {
            let _ = writeln!(
                s,
                "  {}",
                f.file_name().map(|n| n.to_string_lossy()).unwrap_or_default()
            );
        }
        let _ = writeln!(s, "config:");
        for line in self.config_echo.lines() {
            let _ = writeln!(s, "  {line}");
        }
        s
    }
}

/// 17 significant digits.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn witness_csv(s: &WitnessSeries) -> String {
    let n_rates = s.rates.first().map_or(0, Vec::len);
    let mut out = String::from("t");
    for i in 1..=n_rates {
        let _ = write!(out, ",gamma_{i}");
    }
    out.push_str(",r2,r3,witness\n");
    for k in 0..s.grid.len() {
        out.push_str(&format_float(s.grid[k]));
        for g in &s.rates[k] {
            out.push(',');
            out.push_str(&format_float(*g));
        }
        let _ = writeln!(
            out,
            ",{},{},{}",
            format_float(s.r2[k]),
            format_float(s.r3[k]),
            format_float(s.values[k])
        );
    }
    out
}

fn measure_csv(m: &MeasureReport) -> String {
    let mut out = String::from("t,f,g\n");
    for k in 0..m.grid.len() {
        let _ = writeln!(
            out,
            "{},{},{}",
            format_float(m.grid[k]),
            format_float(m.f[k]),
            format_float(m.g[k])
        );
    }
    out
}

fn divisibility_csv(d: &DivisibilityReport) -> String {
    let mut out = String::from("t,min_choi_eigenvalue\n");
    for k in 0..d.grid.len() {
        let _ = writeln!(
            out,
            "{},{}",
            format_float(d.grid[k]),
            format_float(d.min_eigenvalues[k])
        );
    }
    out
}

fn write_atomic(path: &Path, contents: &str) -> io::Result<()> {
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let tmp = path.with_file_name(format!(".{name}.{}.tmp", std::process::id()));
    fs::write(&tmp, contents)
        .and_then(|()| fs::rename(&tmp, path))
        .inspect_err(|_| {
            let _ = fs::remove_file(&tmp);
        })
}

/// Runs every requested output of `config` and writes
/// `<name>_{witness,measure,divisibility}.csv` plus `<name>_report.txt`
/// into `out_dir`.
///
/// Nothing is written unless every computation succeeds; if a write fails,
/// files already written by this run are removed.
pub fn run_scenario(config: &ScenarioConfig, out_dir: &Path) -> Result<RunReport, RunError> {
    let numerical = |source| RunError::Numerical {
        scenario: config.name.clone(),
        source,
    };
    let gen = config.generator().map_err(numerical)?;
    let grid = config.grid();
    let wants = |k: OutputKind| config.outputs.contains(&k);

    let mut pending: Vec<(PathBuf, String)> = Vec::new();
    let mut violations = Vec::new();
    let file = |suffix: &str| out_dir.join(format!("{}_{suffix}", config.name));

    if wants(OutputKind::Witness) {
        info!("{}: witness on {} points", config.name, grid.len());
        let s = detect::witness_series(&gen, &grid, config.epsilon, config.mode).map_err(numerical)?;
        if s.is_violated() {
            violations.push(("witness", s.violations.clone()));
        }
        pending.push((file("witness.csv"), witness_csv(&s)));
    }

    let (mut moment, mut rhp, mut ratio) = (None, None, None);
    if wants(OutputKind::Measure) || wants(OutputKind::Rhp) || wants(OutputKind::Compare) {
        info!("{}: measures on {} points", config.name, grid.len());
        let m = detect::measure_report(&gen, config.t_max, config.points, &config.eps_schedule).map_err(numerical)?;
        if wants(OutputKind::Measure) || wants(OutputKind::Compare) {
            moment = Some(m.moment_measure);
            let runs = detect::violation_intervals(&m.grid, |k| m.f[k] > RATE_SUPPORT_TOL);
            if !runs.is_empty() {
                violations.push(("moment rate f", runs));
            }
        }
        if wants(OutputKind::Rhp) || wants(OutputKind::Compare) {
            rhp = Some(m.rhp_measure);
            let runs = detect::violation_intervals(&m.grid, |k| m.g[k] > RATE_SUPPORT_TOL);
            if !runs.is_empty() {
                violations.push(("RHP rate g", runs));
            }
        }
        if moment.is_some() && rhp.is_some() {
            ratio = m.ratio();
        }
        pending.push((file("measure.csv"), measure_csv(&m)));
    }

    if wants(OutputKind::Divisibility) {
        info!("{}: divisibility scan, delta = {}", config.name, config.delta);
        let d = detect::cp_divisibility_scan(&gen, &grid, config.delta).map_err(numerical)?;
        if !d.cp_divisible() {
            violations.push(("divisibility", d.violations.clone()));
        }
        pending.push((file("divisibility.csv"), divisibility_csv(&d)));
    }

    let report_path = file("report.txt");
    let mut files: Vec<PathBuf> = pending.iter().map(|(p, _)| p.clone()).collect();
    files.push(report_path.clone());
    let report = RunReport {
        scenario: config.name.clone(),
        files,
        verdict: if violations.is_empty() {
            Verdict::MarkovianConsistent
        } else {
            Verdict::NonMarkovian
        },
        violations,
        moment_measure: moment,
        rhp_measure: rhp,
        ratio,
        config_echo: render_scenario(config),
        version: env!("CARGO_PKG_VERSION"),
    };
    pending.push((report_path, report.render()));

    let mut written: Vec<&Path> = Vec::new();
    let io_err = |path: &Path, source| RunError::Io {
        scenario: config.name.clone(),
        path: path.to_path_buf(),
        source,
    };
    if let Err(e) = fs::create_dir_all(out_dir) {
        return Err(io_err(out_dir, e));
    }
    for (path, contents) in &pending {
        if let Err(e) = write_atomic(path, contents) {
            for done in written {
                let _ = fs::remove_file(done);
            }
            return Err(io_err(path, e));
        }
        written.push(path);
    }
    Ok(report)
}
