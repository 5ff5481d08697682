//! Command-line front end: estimation, nowcasting, simulation and rolling
//! evaluation, all reproducible from the run manifest written next to the
//! outputs.

mod commands;
mod config;
mod manifest;
mod outputs;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::Overrides;

#[derive(Parser)]
#[command(
    name = "bsts",
    version,
    about = "Structural time series nowcasting with shrinkage priors"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Configuration file (TOML).
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Directory for the run manifest and all outputs.
    #[arg(long, short)]
    output_dir: PathBuf,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate on the full sample: draw store, inclusion table, model sizes,
    /// state-variance density ratios.
    Estimate(CommonArgs),
    /// Nowcast the quarter after the sample at one vintage or all of them.
    Nowcast {
        #[command(flatten)]
        common: CommonArgs,
        /// Vintage to nowcast at.
        #[arg(long, conflicts_with = "all")]
        vintage: Option<usize>,
        /// Nowcast at every vintage of the calendar.
        #[arg(long)]
        all: bool,
    },
    /// Run the replication study and write the summary table.
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
        /// Grid preset: desk (fast) or full.
        #[arg(long)]
        preset: Option<String>,
    },
    /// Rolling evaluation of point and density nowcasts across vintages.
    Evaluate(CommonArgs),
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Estimate(common) => commands::estimate::run(
            common.config.as_deref(),
            &common.output_dir,
            &common.overrides,
        ),
        Command::Nowcast {
            common,
            vintage,
            all,
        } => commands::nowcast::run(
            common.config.as_deref(),
            &common.output_dir,
            *vintage,
            *all,
            &common.overrides,
        ),
        Command::Simulate { common, preset } => commands::simulate::run(
            common.config.as_deref(),
            &common.output_dir,
            preset.as_deref(),
            &common.overrides,
        ),
        Command::Evaluate(common) => commands::evaluate::run(
            common.config.as_deref(),
            &common.output_dir,
            &common.overrides,
        ),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

/// 2 for configuration problems, 3 for data problems, 4 for numerical
/// failures (clap itself exits 2 on usage errors).
fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(core) = cause.downcast_ref::<bsts_core::Error>() {
            return match core {
                bsts_core::Error::Config(_) => 2,
                bsts_core::Error::Data(_) | bsts_core::Error::Io(_) | bsts_core::Error::Csv(_) => 3,
                bsts_core::Error::Chain { .. }
                | bsts_core::Error::Numerical(_)
                | bsts_core::Error::NotPositiveDefinite { .. }
                | bsts_core::Error::InvalidDimension(_)
                | bsts_core::Error::Serde(_) => 4,
            };
        }
    }
    4
}
