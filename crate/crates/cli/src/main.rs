use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod config;
mod output;

use commands::{parse_list, Target};
use config::{ConfigError, Format, RunConfig};

/// Dynamic anti-plane strip crack in a Kelvin-Voigt half-space.
#[derive(Parser)]
#[command(name = "antiplane", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Run configuration (`section.key = value` lines).
    #[arg(long)]
    config: PathBuf,
    /// Output file; overrides `output.path`. Defaults to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides `output.format`.
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// SIF evaluation time; overrides `output.t`.
    #[arg(long, allow_negative_numbers = true)]
    time: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve by the reduction method and write SIF, coefficients and history.
    Solve(Common),
    /// One solve per value of a material parameter.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// G, G0, rho, k or tau0; several axes joined by `:` move together.
        #[arg(long)]
        axis: String,
        /// Comma-separated values, with `:` between paired components.
        #[arg(long, allow_negative_numbers = true)]
        values: String,
    },
    /// Coefficient sums and increments over a list of truncation sizes.
    Convergence {
        #[command(flatten)]
        common: Common,
        #[arg(long = "n-list")]
        n_list: String,
    },
    /// Evaluate the regular kernel at distances s, or the field kernel at (x, s) pairs.
    KernelProbe {
        #[command(flatten)]
        common: Common,
        #[arg(long = "s-list", allow_negative_numbers = true)]
        s_list: String,
        #[arg(long = "x-list", allow_negative_numbers = true)]
        x_list: Option<String>,
    },
    /// Run the regularity, oracle and convergence checks; exit 1 on any failure.
    Validate {
        #[command(flatten)]
        common: Common,
        /// Truncation size of the checks.
        #[arg(long, default_value_t = 25)]
        n: usize,
    },
}

fn prepare(common: &Common) -> Result<(RunConfig, Target)> {
    let cfg = RunConfig::load(&common.config)?;
    let target = Target::new(&cfg, common.out.clone(), common.format.map(Format::from), common.time);
    Ok((cfg, target))
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Solve(common) => {
            let (cfg, target) = prepare(&common)?;
            commands::solve(&cfg, &target)
        }
        Command::Sweep { common, axis, values } => {
            let (cfg, target) = prepare(&common)?;
            let values: Vec<String> = parse_list("--values", &values)?;
            commands::sweep(&cfg, &target, &axis, &values)
        }
        Command::Convergence { common, n_list } => {
            let (cfg, target) = prepare(&common)?;
            commands::convergence(&cfg, &target, &parse_list("--n-list", &n_list)?)
        }
        Command::KernelProbe { common, s_list, x_list } => {
            let (cfg, target) = prepare(&common)?;
            let s: Vec<f64> = parse_list("--s-list", &s_list)?;
            let x: Option<Vec<f64>> = x_list.map(|raw| parse_list("--x-list", &raw)).transpose()?;
            commands::kernel_probe(&cfg, &target, &s, x.as_deref())
        }
        Command::Validate { common, n } => {
            let (cfg, target) = prepare(&common)?;
            commands::validate(&cfg, &target, n)
        }
    }
}

/// 2 for configuration and usage problems, 3 when the reduction ladder
/// does not settle, 4 when a kernel integral does not converge, 5 otherwise.
fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.downcast_ref::<ConfigError>().is_some() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<antiplane::Error>() {
            return match e {
                antiplane::Error::NoConvergence { .. } => 3,
                antiplane::Error::NonConvergence(_) => 4,
                antiplane::Error::InvalidMaterial(_)
                | antiplane::Error::InvalidQuadrature(_)
                | antiplane::Error::UnsupportedRegime => 2,
                _ => 5,
            };
        }
    }
    5
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
