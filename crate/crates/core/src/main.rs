use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use choi_moments::scenario::{
    parse_scenario, run_scenario, OutputKind, ScenarioConfig, EXIT_CONFIG_ERROR, EXIT_MARKOVIAN, EXIT_NUMERICAL_FAILURE,
};

/// Detect and quantify non-Markovian open-system dynamics from Choi-state moments.
#[derive(Debug, Parser)]
#[command(name = "choi-moments", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Directory for CSV files and the report.
    #[arg(long, global = true, env = "CHOI_MOMENTS_OUT", default_value = ".")]
    out_dir: PathBuf,

    /// Override `grid.points`.
    #[arg(long, global = true)]
    grid_points: Option<usize>,

    /// Override `epsilon`.
    #[arg(long, global = true)]
    epsilon: Option<f64>,

    /// Only report errors.
    #[arg(long, short, global = true)]
    quiet: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Witness r2^2 - r3 along the time grid.
    Witness { config: PathBuf },
    /// Moment-based measure M.
    Measure { config: PathBuf },
    /// RHP measure I.
    Rhp { config: PathBuf },
    /// Minimum Choi eigenvalue of Lambda(t + delta, t) along the grid.
    Divisibility { config: PathBuf },
    /// M, I and the ratio I/M.
    Compare { config: PathBuf },
    /// Parse and validate only.
    Validate { config: PathBuf },
    /// Every output listed in the scenario.
    Run { config: PathBuf },
}

impl Command {
    fn config(&self) -> &Path {
        match self {
            Command::Witness { config }
            | Command::Measure { config }
            | Command::Rhp { config }
            | Command::Divisibility { config }
            | Command::Compare { config }
            | Command::Validate { config }
            | Command::Run { config } => config,
        }
    }

    fn output(&self) -> Option<OutputKind> {
        match self {
            Command::Witness { .. } => Some(OutputKind::Witness),
            Command::Measure { .. } => Some(OutputKind::Measure),
            Command::Rhp { .. } => Some(OutputKind::Rhp),
            Command::Divisibility { .. } => Some(OutputKind::Divisibility),
            Command::Compare { .. } => Some(OutputKind::Compare),
            Command::Validate { .. } | Command::Run { .. } => None,
        }
    }
}

fn load(cli: &Cli) -> Result<ScenarioConfig, String> {
    let path = cli.command.config();
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut config = parse_scenario(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    if let Some(points) = cli.grid_points {
        if points < 2 {
            return Err(format!("--grid-points must be >= 2, got {points}"));
        }
        config.points = points;
    }
    if let Some(eps) = cli.epsilon {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(format!("--epsilon must be finite and > 0, got {eps}"));
        }
        config.epsilon = eps;
    }
    if let Some(kind) = cli.command.output() {
        config.outputs = vec![kind];
    }
    Ok(config)
}

fn exit(code: i32) -> ExitCode {
    ExitCode::from(code as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => exit(EXIT_MARKOVIAN),
                _ => exit(EXIT_CONFIG_ERROR),
            };
        }
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(if cli.quiet {
        "error"
    } else {
        "warn"
    }))
    .init();

    let config = match load(&cli) {
        Ok(c) => c,
        Err(msg) => {
            eprintln!("config error: {msg}");
            return exit(EXIT_CONFIG_ERROR);
        }
    };
    if matches!(cli.command, Command::Validate { .. }) {
        if !cli.quiet {
            println!("{}: ok", config.name);
        }
        return exit(EXIT_MARKOVIAN);
    }
    match run_scenario(&config, &cli.out_dir) {
        Ok(report) => {
            if !cli.quiet {
                print!("{}", report.render());
            }
            exit(report.verdict.exit_code())
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit(EXIT_NUMERICAL_FAILURE)
        }
    }
}
