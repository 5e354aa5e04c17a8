//! cevm — command-line front end for the conditional-extremes library.
//!
//! Pipelines: simulate → transform → verify → fit → report, all deterministic
//! given a seed. Every output file starts with a comment line carrying the
//! command, a hash of the effective configuration, and the seed.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numeric failure.

mod commands;
mod config;
mod output;

use clap::{Args, Parser, Subcommand};

use config::{CliError, RunConfig};

#[derive(Parser)]
#[command(name = "cevm", version, about = "Conditional extremes on Laplace margins")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default, Clone)]
struct CommonArgs {
    /// Example distribution: ex2_3, ex3_1, ex3_2, ex4_2 or ex4_4.
    #[arg(long)]
    example: Option<String>,
    /// Number of draws.
    #[arg(long)]
    n: Option<usize>,
    /// Master RNG seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated Laplace-scale thresholds, strictly increasing.
    #[arg(long)]
    thresholds: Option<String>,
    /// Residual grid as min,max,points.
    #[arg(long)]
    zgrid: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<String>,
    /// JSON config file; explicit flags override its values.
    #[arg(long)]
    config: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw labelled samples and export them with their Laplace transforms.
    Simulate(CommonArgs),
    /// Transform data to Laplace scale: exact transforms for --example,
    /// rank-based for --input CSV (columns x,y).
    Transform {
        #[command(flatten)]
        common: CommonArgs,
        /// Two-column CSV of raw data to transform by ranks.
        #[arg(long)]
        input: Option<String>,
    },
    /// Estimate the normalized conditional CDF per threshold and compare it
    /// with the limiting law.
    Verify(CommonArgs),
    /// Empirical vs exact P(B=1 | X_L > t) for the four-component mixture.
    Oscillation(CommonArgs),
    /// Tail dependence estimate at level p, rank-based and exact.
    Chi {
        #[command(flatten)]
        common: CommonArgs,
        /// Quantile level of the χ estimator.
        #[arg(long)]
        p: Option<f64>,
    },
    /// Fit the canonical model and report misfit diagnostics.
    Fit {
        #[command(flatten)]
        common: CommonArgs,
        /// Exceedance threshold quantile for the fit.
        #[arg(long)]
        quantile: Option<f64>,
        /// Two-column CSV (x,y) of external data; transformed by ranks.
        #[arg(long)]
        input: Option<String>,
    },
    /// Emit scatter data, convergence tables, oscillation curves and fit
    /// summaries for one example.
    Report(CommonArgs),
}

fn main() {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(()) => 0,
        Err(CliError::Config(msg)) => {
            eprintln!("configuration error: {msg}");
            2
        }
        Err(CliError::Numeric(msg)) => {
            eprintln!("numeric failure: {msg}");
            3
        }
        Err(CliError::Io(msg)) => {
            eprintln!("i/o error: {msg}");
            2
        }
    };
    std::process::exit(code);
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate(common) => {
            let cfg = RunConfig::build("simulate", &common)?;
            commands::simulate(&cfg)
        }
        Command::Transform { common, input } => {
            let cfg = RunConfig::build("transform", &common)?;
            commands::transform(&cfg, input.as_deref())
        }
        Command::Verify(common) => {
            let cfg = RunConfig::build("verify", &common)?;
            commands::verify(&cfg)
        }
        Command::Oscillation(common) => {
            let cfg = RunConfig::build("oscillation", &common)?;
            commands::oscillation(&cfg)
        }
        Command::Chi { common, p } => {
            let cfg = RunConfig::build("chi", &common)?;
            commands::chi(&cfg, p)
        }
        Command::Fit {
            common,
            quantile,
            input,
        } => {
            let cfg = RunConfig::build("fit", &common)?;
            commands::fit(&cfg, quantile, input.as_deref())
        }
        Command::Report(common) => {
            let cfg = RunConfig::build("report", &common)?;
            commands::report(&cfg)
        }
    }
}
