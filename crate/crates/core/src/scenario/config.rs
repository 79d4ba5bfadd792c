use std::collections::BTreeMap;
use std::fmt;
use std::fmt::Write as _;

use crate::choi::ChoiMode;
use crate::detect::DEFAULT_EPS_SCHEDULE;
use crate::lindblad::{self, Dissipator, LindbladGenerator, RateModel};
use crate::spectral::{max_asymmetry, HermitianMatrix, HERMITIAN_TOL};
use crate::{Operator, C64};

pub const SCHEMA_VERSION: u32 = 1;
const DEFAULT_DELTA: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub key: String,
    pub line: Option<usize>,
    pub message: String,
}

impl ConfigError {
    fn new(key: impl Into<String>, line: Option<usize>, message: impl Into<String>) -> Self {
        Self {
            key: key.into(),
            line,
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: `{}`: {}", self.key, self.message),
            None => write!(f, "`{}`: {}", self.key, self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum OutputKind {
    Witness,
    Measure,
    Rhp,
    Divisibility,
    Compare,
}

impl OutputKind {
    pub const ALL: [OutputKind; 5] = [
        OutputKind::Witness,
        OutputKind::Measure,
        OutputKind::Rhp,
        OutputKind::Divisibility,
        OutputKind::Compare,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            OutputKind::Witness => "witness",
            OutputKind::Measure => "measure",
            OutputKind::Rhp => "rhp",
            OutputKind::Divisibility => "divisibility",
            OutputKind::Compare => "compare",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.as_str() == s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum OperatorSpec {
    SigmaX,
    SigmaY,
    SigmaZ,
    Lowering,
    Raising,
    Custom(Operator),
}

impl OperatorSpec {
    fn name(&self) -> &'static str {
        match self {
            OperatorSpec::SigmaX => "sigma_x",
            OperatorSpec::SigmaY => "sigma_y",
            OperatorSpec::SigmaZ => "sigma_z",
            OperatorSpec::Lowering => "lowering",
            OperatorSpec::Raising => "raising",
            OperatorSpec::Custom(_) => "custom",
        }
    }

    pub fn matrix(&self) -> Operator {
        match self {
            OperatorSpec::SigmaX => lindblad::sigma_x(),
            OperatorSpec::SigmaY => lindblad::sigma_y(),
            OperatorSpec::SigmaZ => lindblad::sigma_z(),
            OperatorSpec::Lowering => lindblad::lowering(),
            OperatorSpec::Raising => lindblad::raising(),
            OperatorSpec::Custom(m) => m.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DissipatorSpec {
    pub operator: OperatorSpec,
    pub rate: RateModel,
}

/// A validated scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub version: u32,
    pub name: String,
    pub dimension: usize,
    pub hamiltonian: Option<Operator>,
    pub dissipators: Vec<DissipatorSpec>,
    pub epsilon: f64,
    pub t_max: f64,
    pub points: usize,
    pub mode: ChoiMode,
    pub outputs: Vec<OutputKind>,
    pub delta: f64,
    pub eps_schedule: Vec<f64>,
}

impl ScenarioConfig {
    pub fn generator(&self) -> crate::Result<LindbladGenerator> {
        let h = match &self.hamiltonian {
            Some(h) => HermitianMatrix::new(h.clone())?,
            None => HermitianMatrix::new(Operator::zeros(self.dimension, self.dimension))?,
        };
        let dissipators = self
            .dissipators
            .iter()
            .map(|d| Dissipator::new(d.operator.matrix(), d.rate.clone()))
            .collect();
        LindbladGenerator::new(h, dissipators)
    }

    /// `points` equally spaced times on `[0, t_max]`.
    pub fn grid(&self) -> Vec<f64> {
        crate::detect::linspace(0.0, self.t_max, self.points)
    }
}

struct Entry {
    line: usize,
    value: String,
}

struct Doc {
    entries: BTreeMap<String, Entry>,
}

impl Doc {
    fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| ConfigError::new(content, Some(line), "expected `key = value`"))?;
            let key = key.trim();
            if key.is_empty()
                || !key
                    .chars()
                    .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.' || c == '-')
            {
                return Err(ConfigError::new(
                    key,
                    Some(line),
                    "keys use letters, digits, `_`, `-` and `.`",
                ));
            }
            let value = value.trim().to_string();
            if let Some(prev) = entries.insert(key.to_string(), Entry { line, value }) {
                return Err(ConfigError::new(
                    key,
                    Some(line),
                    format!("duplicate key (first set on line {})", prev.line),
                ));
            }
        }
        Ok(Self { entries })
    }

    fn take(&mut self, key: &str) -> Option<Entry> {
        self.entries.remove(key)
    }

    fn required(&mut self, key: &str) -> Result<Entry, ConfigError> {
        self.take(key)
            .ok_or_else(|| ConfigError::new(key, None, "required key is missing"))
    }

    fn f64_field(&mut self, key: &str, what: &str, ok: impl Fn(f64) -> bool) -> Result<f64, ConfigError> {
        let e = self.required(key)?;
        parse_f64(&e.value)
            .filter(|v| ok(*v))
            .ok_or_else(|| ConfigError::new(key, Some(e.line), format!("expected {what}, got `{}`", e.value)))
    }
}

fn parse_f64(s: &str) -> Option<f64> {
    s.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

fn parse_usize(key: &str, e: &Entry) -> Result<usize, ConfigError> {
    e.value.parse::<usize>().map_err(|_| {
        ConfigError::new(
            key,
            Some(e.line),
            format!("expected a non-negative integer, got `{}`", e.value),
        )
    })
}

fn parse_list(s: &str) -> Vec<&str> {
    s.split(',').map(str::trim).filter(|x| !x.is_empty()).collect()
}

fn parse_complex(s: &str) -> Option<C64> {
    match s.split_once(':') {
        Some((re, im)) => Some(C64::new(parse_f64(re)?, parse_f64(im)?)),
        None => Some(C64::new(parse_f64(s)?, 0.0)),
    }
}

/// Parses `a, b; c, d` (rows split by `;`, entries by `,`; each entry `re`
/// or `re:im`) into a square matrix.
pub fn parse_complex_matrix(text: &str) -> Result<Operator, String> {
    let rows: Vec<Vec<C64>> = text
        .split(';')
        .map(|row| {
            row.split(',')
                .map(|e| parse_complex(e.trim()).ok_or_else(|| format!("bad matrix entry `{}`", e.trim())))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<_, _>>()?;
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(format!(
            "matrix must be square; got {n} rows with lengths {:?}",
            rows.iter().map(Vec::len).collect::<Vec<_>>()
        ));
    }
    Ok(Operator::from_fn(n, n, |i, j| rows[i][j]))
}

/// Parses `t:gamma, t:gamma, ...` knots.
pub fn parse_knots(text: &str) -> Result<Vec<(f64, f64)>, String> {
    parse_list(text)
        .into_iter()
        .map(|k| {
            let (t, g) = k
                .split_once(':')
                .ok_or_else(|| format!("knot `{k}` is not `t:gamma`"))?;
            match (parse_f64(t), parse_f64(g)) {
                (Some(t), Some(g)) => Ok((t, g)),
                _ => Err(format!("knot `{k}` has a non-numeric or non-finite part")),
            }
        })
        .collect()
}

fn parse_rate(doc: &mut Doc, prefix: &str) -> Result<RateModel, ConfigError> {
    let key = format!("{prefix}.rate");
    let kind = doc.required(&key)?;
    let pos = |v: f64| v > 0.0;
    let model = match kind.value.as_str() {
        "constant" => RateModel::Constant {
            value: doc.f64_field(&format!("{key}.value"), "a finite number", |_| true)?,
        },
        "exp-cos" => RateModel::ExpCos {
            k: doc.f64_field(&format!("{key}.k"), "a number > 0", pos)?,
        },
        "lorentzian" => RateModel::Lorentzian {
            lambda: doc.f64_field(&format!("{key}.lambda"), "a number > 0", pos)?,
            gamma0: doc.f64_field(&format!("{key}.gamma0"), "a number > 0", pos)?,
            k: doc.f64_field(&format!("{key}.k"), "a number > 0", pos)?,
        },
        "ohmic" => RateModel::OhmicDephasing {
            omega_c: doc.f64_field(&format!("{key}.omega_c"), "a number > 0", pos)?,
            temperature: doc.f64_field(&format!("{key}.temperature"), "a number >= 0", |v| v >= 0.0)?,
        },
        "tabulated" => {
            let kk = format!("{key}.knots");
            let e = doc.required(&kk)?;
            let knots = parse_knots(&e.value).map_err(|m| ConfigError::new(&kk, Some(e.line), m))?;
            let model = RateModel::Tabulated { knots };
            model
                .validate()
                .map_err(|err| ConfigError::new(&kk, Some(e.line), err.to_string()))?;
            model
        }
        other => {
            return Err(ConfigError::new(
                &key,
                Some(kind.line),
                format!("unknown rate model `{other}` (expected constant, exp-cos, lorentzian, ohmic or tabulated)"),
            ))
        }
    };
    Ok(model)
}

fn parse_operator(doc: &mut Doc, prefix: &str, dim: usize) -> Result<OperatorSpec, ConfigError> {
    let key = format!("{prefix}.operator");
    let e = doc.required(&key)?;
    let spec = match e.value.as_str() {
        "sigma_x" => OperatorSpec::SigmaX,
        "sigma_y" => OperatorSpec::SigmaY,
        "sigma_z" => OperatorSpec::SigmaZ,
        "lowering" => OperatorSpec::Lowering,
        "raising" => OperatorSpec::Raising,
        "custom" => {
            let mk = format!("{prefix}.matrix");
            let m = doc.required(&mk)?;
            OperatorSpec::Custom(
                parse_complex_matrix(&m.value).map_err(|msg| ConfigError::new(&mk, Some(m.line), msg))?,
            )
        }
        other => {
            return Err(ConfigError::new(
                &key,
                Some(e.line),
                format!("unknown operator `{other}` (expected sigma_x, sigma_y, sigma_z, lowering, raising or custom)"),
            ))
        }
    };
    let n = spec.matrix().nrows();
    if n != dim {
        return Err(ConfigError::new(
            &key,
            Some(e.line),
            format!("operator has dimension {n} but the scenario declares dimension {dim}"),
        ));
    }
    Ok(spec)
}

/// Parses and fully validates a scenario document.
pub fn parse_scenario(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let mut doc = Doc::parse(text)?;

    let v = doc.required("version")?;
    let version = v
        .value
        .parse::<u32>()
        .map_err(|_| ConfigError::new("version", Some(v.line), "expected an integer"))?;
    if version != SCHEMA_VERSION {
        return Err(ConfigError::new(
            "version",
            Some(v.line),
            format!("unsupported version {version} (expected {SCHEMA_VERSION})"),
        ));
    }

    let n = doc.required("name")?;
    if n.value.is_empty()
        || !n
            .value
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
    {
        return Err(ConfigError::new(
            "name",
            Some(n.line),
            "expected a non-empty name of letters, digits, `_` or `-`",
        ));
    }
    let name = n.value;

    let d = doc.required("dimension")?;
    let dimension = parse_usize("dimension", &d)?;
    if dimension < 2 {
        return Err(ConfigError::new("dimension", Some(d.line), "dimension must be >= 2"));
    }

    let epsilon = doc.f64_field("epsilon", "a number > 0", |v| v > 0.0)?;
    let t_max = doc.f64_field("grid.t_max", "a number > 0", |v| v > 0.0)?;
    let p = doc.required("grid.points")?;
    let points = parse_usize("grid.points", &p)?;
    if points < 2 {
        return Err(ConfigError::new(
            "grid.points",
            Some(p.line),
            "need at least 2 grid points",
        ));
    }

    let mode = match doc.take("mode") {
        None => ChoiMode::SmallTime,
        Some(e) => match e.value.as_str() {
            "small-time" => ChoiMode::SmallTime,
            "finite-interval" => ChoiMode::FiniteInterval,
            other => {
                return Err(ConfigError::new(
                    "mode",
                    Some(e.line),
                    format!("expected small-time or finite-interval, got `{other}`"),
                ))
            }
        },
    };

    let o = doc.required("outputs")?;
    let mut outputs = Vec::new();
    for item in parse_list(&o.value) {
        let kind = OutputKind::parse(item).ok_or_else(|| {
            ConfigError::new(
                "outputs",
                Some(o.line),
                format!("unknown output `{item}` (expected witness, measure, rhp, divisibility or compare)"),
            )
        })?;
        if !outputs.contains(&kind) {
            outputs.push(kind);
        }
    }
    if outputs.is_empty() {
        return Err(ConfigError::new(
            "outputs",
            Some(o.line),
            "at least one output is required",
        ));
    }

    let delta = match doc.take("divisibility.delta") {
        None => DEFAULT_DELTA,
        Some(e) => parse_f64(&e.value)
            .filter(|v| *v > 0.0)
            .ok_or_else(|| ConfigError::new("divisibility.delta", Some(e.line), "expected a number > 0"))?,
    };

    let eps_schedule = match doc.take("measure.eps_schedule") {
        None => DEFAULT_EPS_SCHEDULE.to_vec(),
        Some(e) => {
            let bad = || {
                ConfigError::new(
                    "measure.eps_schedule",
                    Some(e.line),
                    "expected >= 2 strictly decreasing numbers > 0",
                )
            };
            let list: Vec<f64> = parse_list(&e.value)
                .into_iter()
                .map(|x| parse_f64(x).filter(|v| *v > 0.0))
                .collect::<Option<_>>()
                .ok_or_else(bad)?;
            if list.len() < 2 || list.windows(2).any(|w| w[1] >= w[0]) {
                return Err(bad());
            }
            list
        }
    };

    let hamiltonian = match doc.take("hamiltonian") {
        None => None,
        Some(e) => {
            let m = parse_complex_matrix(&e.value).map_err(|msg| ConfigError::new("hamiltonian", Some(e.line), msg))?;
            if m.nrows() != dimension {
                return Err(ConfigError::new(
                    "hamiltonian",
                    Some(e.line),
                    format!(
                        "matrix has dimension {} but the scenario declares dimension {dimension}",
                        m.nrows()
                    ),
                ));
            }
            let asym = max_asymmetry(&m);
            if asym > HERMITIAN_TOL {
                return Err(ConfigError::new(
                    "hamiltonian",
                    Some(e.line),
                    format!("not Hermitian (asymmetry {asym:.3e})"),
                ));
            }
            Some(m)
        }
    };

    let mut dissipators = Vec::new();
    loop {
        let prefix = format!("dissipator.{}", dissipators.len());
        if !doc.entries.contains_key(&format!("{prefix}.operator")) {
            break;
        }
        let operator = parse_operator(&mut doc, &prefix, dimension)?;
        let rate = parse_rate(&mut doc, &prefix)?;
        dissipators.push(DissipatorSpec { operator, rate });
    }

    if let Some((key, e)) = doc.entries.iter().next() {
        return Err(ConfigError::new(
            key,
            Some(e.line),
            "unknown key (dissipators must be numbered 0, 1, 2, ... with an `operator`)",
        ));
    }

    Ok(ScenarioConfig {
        version,
        name,
        dimension,
        hamiltonian,
        dissipators,
        epsilon,
        t_max,
        points,
        mode,
        outputs,
        delta,
        eps_schedule,
    })
}

fn render_complex(z: C64) -> String {
    if z.im == 0.0 {
        format!("{:?}", z.re)
    } else {
        format!("{:?}:{:?}", z.re, z.im)
    }
}

fn render_matrix(m: &Operator) -> String {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| render_complex(m[(i, j)]))
                .collect::<Vec<_>>()
                .join(", ")
        })
        .collect::<Vec<_>>()
        .join("; ")
}

fn render_list(xs: &[f64]) -> String {
    xs.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(", ")
}

/// Serializes a scenario in the format accepted by [`parse_scenario`].
pub fn render_scenario(c: &ScenarioConfig) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "version = {}", c.version);
    let _ = writeln!(s, "name = {}", c.name);
    let _ = writeln!(s, "dimension = {}", c.dimension);
    let _ = writeln!(s, "epsilon = {:?}", c.epsilon);
    let _ = writeln!(s, "mode = {}", c.mode.as_str());
    let _ = writeln!(s, "grid.t_max = {:?}", c.t_max);
    let _ = writeln!(s, "grid.points = {}", c.points);
    let outs: Vec<&str> = c.outputs.iter().map(|o| o.as_str()).collect();
    let _ = writeln!(s, "outputs = {}", outs.join(", "));
    let _ = writeln!(s, "divisibility.delta = {:?}", c.delta);
    let _ = writeln!(s, "measure.eps_schedule = {}", render_list(&c.eps_schedule));
    if let Some(h) = &c.hamiltonian {
        let _ = writeln!(s, "hamiltonian = {}", render_matrix(h));
    }
    for (i, d) in c.dissipators.iter().enumerate() {
        let p = format!("dissipator.{i}");
        let _ = writeln!(s, "{p}.operator = {}", d.operator.name());
        if let OperatorSpec::Custom(m) = &d.operator {
            let _ = writeln!(s, "{p}.matrix = {}", render_matrix(m));
        }
        let _ = writeln!(s, "{p}.rate = {}", d.rate.kind());
        match &d.rate {
            RateModel::Constant { value } => {
                let _ = writeln!(s, "{p}.rate.value = {value:?}");
            }
            RateModel::ExpCos { k } => {
                let _ = writeln!(s, "{p}.rate.k = {k:?}");
            }
            RateModel::Lorentzian { lambda, gamma0, k } => {
                let _ = writeln!(s, "{p}.rate.lambda = {lambda:?}");
                let _ = writeln!(s, "{p}.rate.gamma0 = {gamma0:?}");
                let _ = writeln!(s, "{p}.rate.k = {k:?}");
            }
            RateModel::OhmicDephasing { omega_c, temperature } => {
                let _ = writeln!(s, "{p}.rate.omega_c = {omega_c:?}");
                let _ = writeln!(s, "{p}.rate.temperature = {temperature:?}");
            }
            RateModel::Tabulated { knots } => {
                let ks: Vec<String> = knots.iter().map(|(t, g)| format!("{t:?}:{g:?}")).collect();
                let _ = writeln!(s, "{p}.rate.knots = {}", ks.join(", "));
            }
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const EXAMPLE1: &str = include_str!("../../scenarios/example1.cfg");
    const EXAMPLE2: &str = include_str!("../../scenarios/example2.cfg");

    #[test]
    fn bundled_example1() {
        let c = parse_scenario(EXAMPLE1).unwrap();
        assert_eq!(c.dimension, 2);
        assert_eq!(c.epsilon, 0.001);
        assert_eq!(
            c.dissipators.iter().map(|d| d.operator.clone()).collect::<Vec<_>>(),
            vec![OperatorSpec::SigmaX, OperatorSpec::SigmaY, OperatorSpec::SigmaZ]
        );
        assert!(c.dissipators.iter().all(|d| d.rate == RateModel::ExpCos { k: 1.0 }));
        assert!(c.hamiltonian.is_none());
        assert_eq!(
            c.generator().unwrap(),
            LindbladGenerator::pauli(RateModel::ExpCos { k: 1.0 }).unwrap()
        );
    }

    #[test]
    fn bundled_example2() {
        let c = parse_scenario(EXAMPLE2).unwrap();
        assert_eq!(c.dissipators.len(), 1);
        assert_eq!(c.dissipators[0].operator, OperatorSpec::SigmaZ);
        assert_eq!(
            c.dissipators[0].rate,
            RateModel::Lorentzian {
                lambda: 1.5,
                gamma0: 1.0,
                k: 1.0
            }
        );
        assert_eq!(c.epsilon, 0.001);
    }

    #[test]
    fn rejects_dimension_mismatch() {
        let text = "version = 1\nname = x\ndimension = 2\nepsilon = 0.001\ngrid.t_max = 1\ngrid.points = 10\noutputs = witness\n\
                    dissipator.0.operator = custom\ndissipator.0.matrix = 1, 0, 0; 0, 1, 0; 0, 0, 1\n\
                    dissipator.0.rate = constant\ndissipator.0.rate.value = 1\n";
        let err = parse_scenario(text).unwrap_err();
        assert_eq!(err.key, "dissipator.0.operator");
        assert!(err.message.contains("dimension 3"), "{err}");
    }

    #[test]
    fn rejects_unknown_and_duplicate_keys() {
        let base = "version = 1\nname = x\ndimension = 2\nepsilon = 0.001\ngrid.t_max = 1\ngrid.points = 10\noutputs = witness\n";
        let err = parse_scenario(&format!("{base}colour = blue\n")).unwrap_err();
        assert_eq!(err.key, "colour");
        assert_eq!(err.line, Some(8));
        let err = parse_scenario(&format!("{base}epsilon = 0.1\n")).unwrap_err();
        assert!(err.message.contains("duplicate"));
        // gap in dissipator numbering leaves dissipator.1 unconsumed
        let err = parse_scenario(&format!(
            "{base}dissipator.1.operator = sigma_z\ndissipator.1.rate = constant\ndissipator.1.rate.value = 1\n"
        ))
        .unwrap_err();
        assert!(err.key.starts_with("dissipator.1"));
    }

    #[test]
    fn rejects_bad_values() {
        let base = "version = 1\nname = x\ndimension = 2\ngrid.t_max = 1\noutputs = witness\n";
        for (extra, key) in [
            ("epsilon = -1\ngrid.points = 10\n", "epsilon"),
            ("epsilon = 0.1\ngrid.points = 1\n", "grid.points"),
            ("epsilon = 0.1\ngrid.points = 10\nmode = sideways\n", "mode"),
            ("epsilon = nan\ngrid.points = 10\n", "epsilon"),
            (
                "epsilon = 0.1\ngrid.points = 10\nhamiltonian = 0, 1; 0, 0\n",
                "hamiltonian",
            ),
        ] {
            let err = parse_scenario(&format!("{base}{extra}")).unwrap_err();
            assert_eq!(err.key, key, "{err}");
        }
        assert_eq!(parse_scenario("name = x\n").unwrap_err().key, "version");
        assert_eq!(parse_scenario("version = 2\n").unwrap_err().key, "version");
        assert!(parse_scenario("version 1\n").is_err());
    }

    #[test]
    fn matrix_and_knot_literals() {
        let m = parse_complex_matrix("0, 0:-1; 0:1, 0").unwrap();
        assert_eq!(m, lindblad::sigma_y());
        assert!(parse_complex_matrix("1, 2; 3").is_err());
        assert!(parse_complex_matrix("").is_err());
        assert_eq!(parse_knots("0:1, 2:-0.5").unwrap(), vec![(0.0, 1.0), (2.0, -0.5)]);
        assert!(parse_knots("0:1, 2").is_err());
    }

    fn arb_rate() -> impl Strategy<Value = RateModel> {
        prop_oneof![
            (-5.0f64..5.0).prop_map(|value| RateModel::Constant { value }),
            (0.01f64..5.0).prop_map(|k| RateModel::ExpCos { k }),
            (0.01f64..5.0, 0.01f64..5.0, 0.01f64..5.0).prop_map(|(lambda, gamma0, k)| RateModel::Lorentzian {
                lambda,
                gamma0,
                k
            }),
            (0.01f64..5.0, 0.0f64..10.0)
                .prop_map(|(omega_c, temperature)| RateModel::OhmicDephasing { omega_c, temperature }),
            proptest::collection::vec((0.01f64..1.0, -2.0f64..2.0), 2..6).prop_map(|steps| {
                let mut t = 0.0;
                RateModel::Tabulated {
                    knots: steps
                        .into_iter()
                        .map(|(dt, g)| {
                            t += dt;
                            (t, g)
                        })
                        .collect(),
                }
            }),
        ]
    }

    fn arb_operator() -> impl Strategy<Value = OperatorSpec> {
        prop_oneof![
            Just(OperatorSpec::SigmaX),
            Just(OperatorSpec::SigmaY),
            Just(OperatorSpec::SigmaZ),
            Just(OperatorSpec::Lowering),
            Just(OperatorSpec::Raising),
            proptest::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 4).prop_map(|v| OperatorSpec::Custom(
                Operator::from_fn(2, 2, |i, j| C64::new(v[2 * i + j].0, v[2 * i + j].1))
            )),
        ]
    }

    prop_compose! {
        fn arb_config()(
            name in "[a-z][a-z0-9_-]{0,12}",
            epsilon in 1e-6f64..0.1,
            t_max in 0.1f64..50.0,
            points in 2usize..5000,
            finite in any::<bool>(),
            outputs in proptest::sample::subsequence(OutputKind::ALL.to_vec(), 1..=5),
            delta in 1e-4f64..0.1,
            diss in proptest::collection::vec((arb_operator(), arb_rate()), 0..4),
            h in proptest::option::of((-2.0f64..2.0, -2.0f64..2.0, -2.0f64..2.0)),
        ) -> ScenarioConfig {
            ScenarioConfig {
                version: SCHEMA_VERSION,
                name,
                dimension: 2,
                hamiltonian: h.map(|(a, b, c)| Operator::from_row_slice(2, 2, &[
                    C64::new(a, 0.0), C64::new(b, c), C64::new(b, -c), C64::new(-a, 0.0),
                ])),
                dissipators: diss.into_iter().map(|(operator, rate)| DissipatorSpec { operator, rate }).collect(),
                epsilon,
                t_max,
                points,
                mode: if finite { ChoiMode::FiniteInterval } else { ChoiMode::SmallTime },
                outputs,
                delta,
                eps_schedule: vec![1e-4, 5e-5],
            }
        }
    }

    proptest! {
        #[test]
        fn render_then_parse_round_trips(c in arb_config()) {
            let text = render_scenario(&c);
            prop_assert_eq!(parse_scenario(&text).unwrap(), c);
        }

        #[test]
        fn parser_never_panics(text in "(?s).{0,400}") {
            let _ = parse_scenario(&text);
            let _ = parse_complex_matrix(&text);
            let _ = parse_knots(&text);
        }
    }
}
