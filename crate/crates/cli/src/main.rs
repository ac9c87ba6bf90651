use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fairfed::exec::Exec;
use fairfed_cli::{cmd_compare, cmd_oracle, cmd_run, cmd_sweep_alpha, CliError, ExperimentSpec};

/// Fair federated learning experiments under demographic data heterogeneity.
///
/// Log verbosity is read from FAIRFED_LOG (e.g. `FAIRFED_LOG=debug`).
#[derive(Debug, Parser)]
#[command(name = "fairfed", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the configured heuristic for every repeat.
    Run(Common),
    /// Run α-FairAvg and α-FairAccAvg over a list of α values.
    SweepAlpha {
        #[command(flatten)]
        common: Common,
        /// Comma-separated α values in (0, 100]; defaults to `sweep.alphas`.
        #[arg(long, value_delimiter = ',')]
        alphas: Option<Vec<f64>>,
    },
    /// Compare FedAvg, FairBest, α-FairAvg and α-FairAccAvg on the same data.
    Compare(Common),
    /// Compare against FedAvg baselines trained on homogeneous shards.
    Oracle(Common),
}

#[derive(Debug, Args)]
struct Common {
    /// Experiment file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "results")]
    out: PathBuf,
    /// Override the experiment seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the number of repeats.
    #[arg(long)]
    repeats: Option<usize>,
    /// Run clients and repeats on one thread.
    #[arg(long)]
    sequential: bool,
}

impl Common {
    fn load(&self) -> Result<(ExperimentSpec, Exec), CliError> {
        let mut spec = ExperimentSpec::load(&self.config)?;
        if let Some(seed) = self.seed {
            spec.seed = seed;
        }
        if let Some(repeats) = self.repeats {
            spec.repeats = repeats;
        }
        spec.validate()?;
        let exec = if self.sequential {
            Exec::Sequential
        } else {
            Exec::default()
        };
        Ok((spec, exec))
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let (summary, dir) = match &cli.command {
        Command::Run(c) => {
            let (spec, exec) = c.load()?;
            (cmd_run(&spec, &c.out, exec)?, c.out.join(&spec.name))
        }
        Command::SweepAlpha { common, alphas } => {
            let (spec, exec) = common.load()?;
            let alphas = alphas.clone().unwrap_or_else(|| spec.sweep.alphas.clone());
            (
                cmd_sweep_alpha(&spec, &alphas, &common.out, exec)?,
                common.out.join(&spec.name),
            )
        }
        Command::Compare(c) => {
            let (spec, exec) = c.load()?;
            (cmd_compare(&spec, &c.out, exec)?, c.out.join(&spec.name))
        }
        Command::Oracle(c) => {
            let (spec, exec) = c.load()?;
            (cmd_oracle(&spec, &c.out, exec)?, c.out.join(&spec.name))
        }
    };
    print!("{}", summary.to_csv()?);
    log::info!("results written to {}", dir.display());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("FAIRFED_LOG", "warn")).init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
