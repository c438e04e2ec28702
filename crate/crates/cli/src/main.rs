//! `blobloop`: transfer-matrix spectra, partition functions, amplitude
//! tables and verification reports for the boundary loop model and its
//! RSOS counterpart.

mod commands;
mod config;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use crate::config::RunConfig;

#[derive(Debug, Parser)]
#[command(
    name = "blobloop",
    version,
    about = "Boundary loop model and RSOS transfer matrices on the annulus"
)]
struct Cli {
    #[command(flatten)]
    config: RunConfig,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Text,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Level sets of the transfer-matrix blocks.
    Spectra {
        /// Levels per block; all of them for blocks small enough to
        /// diagonalize densely.
        #[arg(long)]
        levels: Option<usize>,
    },
    /// Partition function on the annulus, cross-checked against the
    /// enumeration and, for even N, the amplitude decomposition.
    Partition,
    /// Amplitude polynomials and the decomposition of the partition function.
    Amplitudes,
    /// Verification reports; exits nonzero when a check fails.
    Verify {
        #[command(subcommand)]
        target: VerifyTarget,
    },
    /// Extrapolated exponents over a grid of boundary weights, as CSV.
    ScanY {
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        y_min: f64,
        #[arg(long, default_value_t = 2.0, allow_hyphen_values = true)]
        y_max: f64,
        #[arg(long, default_value_t = 11)]
        steps: usize,
    },
    /// Every level of every loop block, with multiplicities.
    Table1 {
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Every RSOS level with its multiplicity in the loop blocks.
    Table2 {
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// List both members of each symmetric sector pair.
        #[arg(long)]
        all: bool,
    },
}

#[derive(Debug, Subcommand)]
enum VerifyTarget {
    /// Blobbed/unblobbed level coincidences at integer r.
    Levels,
    /// RSOS sector spectra inside their loop blocks.
    Rsos,
    /// Ghost-string blob relations and spectra.
    Cabling,
    /// Transfer-matrix partition function against brute-force enumeration.
    Oracle,
    /// Sector sums of winding-weighted loop partition functions.
    Sumda,
    /// q-series identities of the conformal partition functions.
    Series,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let run = || -> anyhow::Result<bool> {
        let config = cli.config.resolve()?;
        config.validate()?;
        if let Some(jobs) = config.jobs {
            rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global()?;
        }
        let mut out = output::Sink::open(config.out.as_deref())?;
        let ok = match cli.command {
            Command::Spectra { levels } => commands::spectra(&config, levels, &mut out)?,
            Command::Partition => commands::partition(&config, &mut out)?,
            Command::Amplitudes => commands::amplitudes(&config, &mut out)?,
            Command::Verify { target } => match target {
                VerifyTarget::Levels => commands::verify_levels(&config, &mut out)?,
                VerifyTarget::Rsos => commands::verify_rsos(&config, &mut out)?,
                VerifyTarget::Cabling => commands::verify_cabling(&config, &mut out)?,
                VerifyTarget::Oracle => commands::verify_oracle(&config, &mut out)?,
                VerifyTarget::Sumda => commands::verify_sumda(&config, &mut out)?,
                VerifyTarget::Series => commands::verify_series(&config, &mut out)?,
            },
            Command::ScanY { y_min, y_max, steps } => commands::scan_y(&config, y_min, y_max, steps, &mut out)?,
            Command::Table1 { format } => commands::table1(&config, format, &mut out)?,
            Command::Table2 { format, all } => commands::table2(&config, format, all, &mut out)?,
        };
        out.finish()?;
        Ok(ok)
    };
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
