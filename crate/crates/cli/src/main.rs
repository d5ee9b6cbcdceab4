use std::path::PathBuf;
use std::process::ExitCode;

use bpe::{commands, parse_config, CliError, RunConfig};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "bpe",
    version,
    about = "Biphoton amplitudes, entanglement entropy and dephasing checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides `out` in the config; default `out`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides `seed` in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; default is one per core.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Two-photon amplitude maps for each configured coupling.
    AmplitudeMap,
    /// Entropy along one parameter axis.
    EntropyScan,
    /// Leading Schmidt modes of the slow-modulation kernel.
    SchmidtModes,
    /// Monte Carlo check of the dephasing factors.
    McValidate,
    /// Coincidence rate relative to the uncoupled baseline.
    Coincidence,
}

fn load(cli: &Cli) -> Result<RunConfig, CliError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("--config <path> is required".into()))?;
    let bytes = std::fs::read(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let mut cfg = parse_config(&bytes)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.out = Some(out.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<commands::Outcome, CliError> {
    let cfg = load(cli)?;
    let out = cfg.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    let job = || match cli.command {
        Command::AmplitudeMap => commands::amplitude_map(&cfg, &out),
        Command::EntropyScan => commands::entropy_scan(&cfg, &out),
        Command::SchmidtModes => commands::schmidt_modes(&cfg, &out),
        Command::McValidate => commands::mc_validate(&cfg, &out),
        Command::Coincidence => commands::coincidence(&cfg, &out),
    };
    match cli.threads {
        Some(0) => Err(CliError::Config("--threads: must be >= 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Config(format!("--threads: {e}")))?
            .install(job),
        None => job(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcome) => {
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            for f in &outcome.files {
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
