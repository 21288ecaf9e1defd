//! `sprint` — evaluate, sweep and optimize ion–photon SWAP gates.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sprint_core::optimize::Branch;
use sprint_core::{CavityFlavor, SamplerMode};

use config::{Overrides, ScenarioConfig};
use error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(
    name = "sprint",
    version,
    about = "Single-photon Raman interaction SWAP gate toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Scenario file (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// CSV output path; histograms go next to it as `<stem>.histogram.csv`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// haar | grid | theta
    #[arg(long, global = true)]
    mode: Option<SamplerMode>,
    /// plus | minus
    #[arg(long, global = true)]
    branch: Option<Branch>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// P_D, P_B, F and η for one input and/or sampled averages.
    Outcome,
    /// Optimized and unoptimized averages versus κ_ex (CSV).
    Sweep,
    /// Maximize the mean fidelity over (δ_c, δ_a, B).
    Optimize,
    /// Landmark couplings and cavity tables.
    Tables,
    /// Compare the closed form with the time-domain integrator.
    OracleCheck,
    /// Print a preset as an editable scenario file.
    Preset {
        ion: String,
        #[arg(default_value = "conventional")]
        flavor: CavityFlavor,
    },
}

fn run(cli: Cli) -> CliResult<()> {
    let ov = Overrides {
        seed: cli.seed,
        samples: cli.samples,
        mode: cli.mode,
        branch: cli.branch,
    };
    let file = cli
        .config
        .as_deref()
        .map(ScenarioConfig::load)
        .transpose()?;
    let out = cli
        .out
        .clone()
        .or_else(|| file.as_ref().and_then(|f| f.output.clone()));
    let scenario = || -> CliResult<_> {
        file.as_ref()
            .ok_or_else(|| CliError::Config("this command needs --config".into()))?
            .resolve(&ov)
    };
    match cli.command {
        Command::Outcome => print!("{}", commands::outcome(&scenario()?, out.as_deref())?),
        Command::Sweep => commands::sweep(&scenario()?, out.as_deref())?,
        Command::Optimize => print!("{}", commands::optimize(&scenario()?, out.as_deref())?),
        Command::Tables => print!("{}", commands::tables(out.as_deref())?),
        Command::OracleCheck => {
            let mut section = file.as_ref().and_then(|f| f.oracle).unwrap_or_default();
            if let Some(seed) = cli.seed {
                section.seed = seed;
            }
            if let Some(n) = cli.samples {
                section.cases = n;
            }
            let has_system = file
                .as_ref()
                .is_some_and(|f| f.preset.is_some() || f.system.is_some());
            let s = if has_system { Some(scenario()?) } else { None };
            print!(
                "{}",
                commands::oracle_check(s.as_ref(), &section, out.as_deref())?
            );
        }
        Command::Preset { ion, flavor } => print!("{}", commands::preset(&ion, flavor)?),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
