//! Command-line pipeline: generate synthetic instances, solve them with the
//! Benders engine, the benchmark heuristic, or the extensive-form oracle,
//! evaluate portfolios against held-out days, and re-emit report tables.

mod commands;
mod manifest;
mod overrides;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crewsched::error::{Error, ParseError, SolveError};

#[derive(Parser)]
#[command(name = "crewsched", version, about = "Robust tactical crew scheduling")]
struct Cli {
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded synthetic instance file.
    Generate(commands::GenerateArgs),
    /// Solve an instance and write solution artifacts.
    Solve(commands::SolveArgs),
    /// Evaluate a solved portfolio against held-out days.
    Evaluate(commands::EvaluateArgs),
    /// Re-emit CSV tables and plot data from a solution.
    Report(commands::ReportArgs),
}

/// Input problems exit 2, solver failures 3, anything else 4.
fn exit_code_for(err: &anyhow::Error) -> u8 {
    if let Some(e) = err.downcast_ref::<Error>() {
        return match e {
            Error::Parse(_) | Error::Model(_) => 2,
            Error::Solve(s) => solve_exit(s),
            Error::Lp(_) => 3,
            Error::Io(_) => 4,
        };
    }
    if err.downcast_ref::<ParseError>().is_some() {
        return 2;
    }
    if let Some(s) = err.downcast_ref::<SolveError>() {
        return solve_exit(s);
    }
    4
}

fn solve_exit(s: &SolveError) -> u8 {
    match s {
        SolveError::UnsupportedByBenchmark(_)
        | SolveError::BadGeneratorConfig(_)
        | SolveError::Model(_)
        | SolveError::UncoverableTask { .. } => 2,
        _ => 3,
    }
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    let threads = cli
        .threads
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1));
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
        eprintln!("error: failed to set up {threads} worker threads: {e}");
        return ExitCode::from(4);
    }

    let result = match cli.command {
        Command::Generate(args) => commands::generate(args, threads),
        Command::Solve(args) => commands::solve(args, threads),
        Command::Evaluate(args) => commands::evaluate(args, threads),
        Command::Report(args) => commands::report(args, threads),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
