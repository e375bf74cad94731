//! `metricpose`: command-line driver for the metric-scale shape and pose pipeline.

mod commands;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "metricpose", version, about = "Metric-scale object shape and pose from normalized predictions")]
struct Cli {
    /// Worker threads (overrides MP_THREADS; defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic dataset.
    Synth(commands::synth::Args),
    /// Lift one object's normalized mesh to a metric camera-space mesh.
    Lift(commands::lift::Args),
    /// Render depth (and optionally NOCS) maps of a mesh.
    Render(commands::render::Args),
    /// Estimate pose and size of one or all objects of a record.
    Solve(commands::solve::Args),
    /// Score predictions against ground truth.
    Eval(commands::eval::Args),
    /// Run a design-choice comparison on synthetic data.
    Ablate(commands::ablate::Args),
}

fn thread_count(flag: Option<usize>) -> CliResult<Option<usize>> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var("MP_THREADS") {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse::<usize>()
            .map(Some)
            .map_err(|_| CliError::Usage(format!("MP_THREADS must be a positive integer, got `{v}`"))),
        _ => Ok(None),
    }
}

fn run(cli: Cli) -> CliResult<()> {
    if let Some(n) = thread_count(cli.threads)? {
        if n == 0 {
            return Err(CliError::Usage("thread count must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    match cli.command {
        Command::Synth(a) => commands::synth::run(a),
        Command::Lift(a) => commands::lift::run(a),
        Command::Render(a) => commands::render::run(a),
        Command::Solve(a) => commands::solve::run(a),
        Command::Eval(a) => commands::eval::run(a),
        Command::Ablate(a) => commands::ablate::run(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return CliError::Usage(e.to_string()).report(),
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => e.report(),
    }
}
