//! Scenario files and the pipeline behind the `choi-moments` binary.
//!
//! A scenario is a flat `key = value` document. Keys may be dotted; `#`
//! starts a comment; blank lines are ignored. Unknown keys are errors.
//!
//! ```text
//! version = 1
//! name = example1
//! dimension = 2
//! epsilon = 0.001
//! mode = small-time                # or finite-interval
//! grid.t_max = 6.283185307179586
//! grid.points = 2000
//! outputs = witness, measure
//! divisibility.delta = 0.01        # optional
//! measure.eps_schedule = 1e-4, 5e-5  # optional
//! hamiltonian = 1, 0; 0, -1        # optional, rows split by ';'
//! dissipator.0.operator = sigma_z  # sigma_x|sigma_y|sigma_z|lowering|raising|custom
//! dissipator.0.matrix = 0, 1:0; 0, 0   # custom only; entries `re` or `re:im`
//! dissipator.0.rate = exp-cos      # constant|exp-cos|lorentzian|ohmic|tabulated
//! dissipator.0.rate.k = 1
//! ```
//!
//! Rate parameters: `constant` takes `value`; `exp-cos` takes `k`;
//! `lorentzian` takes `lambda`, `gamma0`, `k`; `ohmic` takes `omega_c`,
//! `temperature`; `tabulated` takes `knots = t:gamma, t:gamma, ...`.

mod config;
mod run;

pub use config::{
    parse_complex_matrix, parse_knots, parse_scenario, render_scenario, ConfigError, DissipatorSpec, OperatorSpec,
    OutputKind, ScenarioConfig, SCHEMA_VERSION,
};
pub use run::{
    format_float, run_scenario, RunError, RunReport, Verdict, EXIT_CONFIG_ERROR, EXIT_MARKOVIAN, EXIT_NON_MARKOVIAN,
    EXIT_NUMERICAL_FAILURE, RATE_SUPPORT_TOL,
};
