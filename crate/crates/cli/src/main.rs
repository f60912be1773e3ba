use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use hypgraph_cli::{run, Command, ConfigError, RunConfig, RunError, RunOptions};

/// Constant-curvature graphs in hyperbolic space: solves, radial profiles,
/// property suites and scalar checks.
#[derive(Debug, Parser)]
#[command(name = "hypgraph", version)]
struct Args {
    /// Command to run; taken from the config when omitted.
    #[arg(value_enum)]
    command: Option<Command>,
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// RNG seed for the property suites.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for artifacts.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print nothing on success.
    #[arg(long)]
    quiet: bool,
}

fn load(args: &Args) -> Result<RunConfig, ConfigError> {
    match (&args.config, args.command) {
        (Some(path), cmd) => {
            let cfg = RunConfig::load(path)?;
            match cmd {
                Some(c) if c != cfg.command => Err(ConfigError::Invalid(format!(
                    "command {} does not match config command {}",
                    c.name(),
                    cfg.command.name()
                ))),
                _ => Ok(cfg),
            }
        }
        (None, Some(c)) => Ok(RunConfig::new(c)),
        (None, None) => Err(ConfigError::Invalid("give a command or --config".into())),
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    let result = load(&args).map_err(RunError::from).and_then(|cfg| {
        let opts = RunOptions { out: args.out.clone(), seed: args.seed, config_path: args.config.clone() };
        run(&cfg, &opts)
    });
    match result {
        Ok(outcome) => {
            if !args.quiet || !outcome.passed {
                for line in &outcome.summary {
                    println!("{line}");
                }
            }
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
