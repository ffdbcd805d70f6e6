//! `eucdyn`: reproducible verification runs for the standard, centred and odd
//! Euclidean algorithms.

mod commands;
mod config;
mod report;

use clap::{Args, Parser, Subcommand};
use commands::{execute, CliError};
use config::{parse_config_file, RunConfig, KEYS};
use std::collections::BTreeMap;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "eucdyn", version, about = "Dynamical analysis of Euclidean algorithms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Subcommand)]
enum Command {
    /// Digit expansion of one pair.
    Expand,
    /// Mean, variance and histogram of the total cost over Omega_N.
    Stats,
    /// Dominant eigenvalue, pressure and moment constants.
    Spectral,
    /// mu and delta^2 from sigma(w).
    Moments,
    /// Dirichlet coefficients and their partial sums.
    Dirichlet,
    /// Checks with tolerances; exit code 1 when one fails.
    Verify {
        #[command(subcommand)]
        check: Check,
    },
}

#[derive(Subcommand)]
enum Check {
    Clt,
    Llt,
    Quasipower,
    Decay,
    Identity,
    #[command(name = "model-distance")]
    ModelDistance,
}

impl Check {
    fn name(&self) -> &'static str {
        match self {
            Check::Clt => "clt",
            Check::Llt => "llt",
            Check::Quasipower => "quasipower",
            Check::Decay => "decay",
            Check::Identity => "identity",
            Check::ModelDistance => "model-distance",
        }
    }
}

#[derive(Args)]
struct Opts {
    /// Flat `key = value` file; flags override its values.
    #[arg(long, global = true)]
    config: Option<std::path::PathBuf>,
    /// Algorithm: g, k or o.
    #[arg(long, global = true)]
    algo: Option<String>,
    /// Built-in cost (unit, logq, binlen, indicator:<m><sign>) or a cost table path.
    #[arg(long, global = true)]
    cost: Option<String>,
    #[arg(long = "N", visible_alias = "n", global = true)]
    n: Option<String>,
    /// Comma-separated list of N.
    #[arg(long, global = true)]
    grid: Option<String>,
    /// exhaustive or mc.
    #[arg(long, global = true)]
    mode: Option<String>,
    #[arg(long, global = true)]
    samples: Option<String>,
    #[arg(long, global = true)]
    seed: Option<String>,
    #[arg(long = "grid_order", alias = "grid-order", global = true)]
    grid_order: Option<String>,
    /// Quotient truncation of the operator.
    #[arg(long = "M", global = true)]
    m: Option<String>,
    #[arg(long = "tail_order", alias = "tail-order", global = true)]
    tail_order: Option<String>,
    #[arg(long = "fd_step", alias = "fd-step", global = true)]
    fd_step: Option<String>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<String>,
    /// Worker threads (default: EUCLID_THREADS, else available parallelism).
    #[arg(long, global = true)]
    threads: Option<String>,
    #[arg(long, global = true)]
    shards: Option<String>,
    #[arg(long, global = true)]
    u: Option<String>,
    #[arg(long, global = true)]
    v: Option<String>,
    /// Comma-separated centring points of the local limit check.
    #[arg(long, global = true, allow_hyphen_values = true)]
    x: Option<String>,
    /// Window `a,b` meaning (a, b].
    #[arg(long = "J", global = true, allow_hyphen_values = true)]
    j: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    tau: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    taus: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    s: Option<String>,
    #[arg(long, global = true)]
    alpha0: Option<String>,
    #[arg(long = "n_max", alias = "n-max", global = true)]
    n_max: Option<String>,
    #[arg(long = "n_neumann", alias = "n-neumann", global = true)]
    n_neumann: Option<String>,
    /// Tolerance of the invoked check.
    #[arg(long, global = true)]
    tol: Option<String>,
    /// restricted (default) or unrestricted pair domain.
    #[arg(long, global = true)]
    domain: Option<String>,
}

impl Opts {
    fn flags(&self) -> BTreeMap<String, String> {
        let values = [
            &self.algo, &self.cost, &self.n, &self.grid, &self.mode, &self.samples, &self.seed, &self.grid_order,
            &self.m, &self.tail_order, &self.fd_step, &self.out, &self.threads, &self.shards, &self.u, &self.v,
            &self.x, &self.j, &self.tau, &self.taus, &self.s, &self.alpha0, &self.n_max, &self.n_neumann, &self.tol,
            &self.domain,
        ];
        KEYS.iter()
            .zip(values)
            .filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone())))
            .collect()
    }
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let mut settings = match &cli.opts.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
            parse_config_file(&text)?
        }
        None => BTreeMap::new(),
    };
    settings.extend(cli.opts.flags());
    let (name, verify) = match &cli.command {
        Command::Expand => ("expand", false),
        Command::Stats => ("stats", false),
        Command::Spectral => ("spectral", false),
        Command::Moments => ("moments", false),
        Command::Dirichlet => ("dirichlet", false),
        Command::Verify { check } => (check.name(), true),
    };
    let cfg = RunConfig::from_settings(name, &settings)?;
    let run = execute(&cfg, verify)?;
    run.outputs
        .write_all(&cfg.out)
        .map_err(|e| CliError::Runtime(format!("cannot write reports to {}: {e}", cfg.out.display())))?;
    if let Some(text) = &run.outputs.summary {
        print!("{text}");
    }
    Ok(run.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("eucdyn: a verification tolerance was not met");
            ExitCode::from(1)
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("eucdyn: {msg}\n\nRun `eucdyn --help` for usage.");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("eucdyn: {msg}");
            ExitCode::from(1)
        }
    }
}
