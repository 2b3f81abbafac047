use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use qpf_cli::config::{Mode, RunConfig};
use qpf_cli::modes::execute;
use qpf_cli::output::RunError;

/// Sweeps and diagnostics for quasi-periodically forced circle maps.
#[derive(Parser)]
#[command(name = "qpf", version)]
struct Cli {
    mode: Mode,
    /// run configuration (JSON)
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// overrides the seed in the config
    #[arg(long)]
    seed: Option<u64>,
    /// worker threads; defaults to the available parallelism
    #[arg(long)]
    workers: Option<usize>,
}

fn run(cli: &Cli) -> Result<PathBuf, RunError> {
    let cfg = RunConfig::load(&cli.config)?;
    let base = cli.config.parent().map(PathBuf::from).unwrap_or_default();
    execute(cli.mode, &cfg, &base, &cli.out, cli.seed, cli.workers)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(manifest) => {
            println!("{}", manifest.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("qpf: {e}");
            ExitCode::from(e.kind.exit_code() as u8)
        }
    }
}
