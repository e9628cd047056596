use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use talbot_lattice::commands::{run, Command};
use talbot_lattice::scenario::Scenario;
use talbot_lattice::Error;

#[derive(Parser)]
#[command(name = "talbot", version, about = "Talbot optical lattice and atom register simulations")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// Scenario JSON document.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the scenario's master_seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides the scenario's output_dir.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides the scenario's trial count.
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Worker threads; defaults to all cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Intensity rasters over the configured z range.
    Carpet,
    /// Trap tables per plane.
    Traps,
    /// Loading statistics.
    Load,
    /// Load and assemble, with success rate.
    Assemble,
    /// Interleaved registers and separation check.
    Interleave,
    /// Separation check over a list of minimum separations.
    Sweep,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(cli: &Cli) -> Result<Vec<PathBuf>, Error> {
    let Some(path) = &cli.config else {
        return Err(Error::Config("--config is required".into()));
    };
    let mut scenario = Scenario::from_path(path)?;
    if let Some(seed) = cli.seed {
        scenario.master_seed = seed;
    }
    if let Some(out) = &cli.out {
        scenario.output_dir = out.clone();
    }
    if let Some(trials) = cli.trials {
        scenario.trials = trials;
    }
    let command = match cli.command {
        Cmd::Carpet => Command::Carpet,
        Cmd::Traps => Command::Traps,
        Cmd::Load => Command::Load,
        Cmd::Assemble => Command::Assemble,
        Cmd::Interleave => Command::Interleave,
        Cmd::Sweep => Command::Sweep,
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| run(command, &scenario))
}
