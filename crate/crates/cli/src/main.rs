mod args;
mod commands;

use anyhow::{Context, Result};
use clap::Parser;
use std::process::ExitCode;

use args::{Cli, Command};

fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var("TOPOSIM_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .with_context(|| format!("TOPOSIM_THREADS must be a positive integer, got `{v}`"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global()?;
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    init_threads()?;
    match &cli.command {
        Command::Generate(a) => commands::generate(&a.resolve()?),
        Command::Analyze { input, run } => commands::analyze(&run.resolve()?, input.as_deref()),
        Command::Sweep(a) => commands::sweep(&a.resolve()?),
        Command::Bootstrap(a) => commands::bootstrap(&a.resolve()?),
        Command::Graph(a) => commands::graph(&a.resolve()?),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
