use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use katufrac_cli::{configure_threads, run, Command, RunOptions, THREADS_ENV};

/// Fractional anti-periodic boundary value problems with Caputo-Katugampola derivatives.
#[derive(Parser)]
#[command(name = "katufrac", version)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(clap::Args)]
struct Common {
    /// Problem file (TOML).
    problem: PathBuf,
    /// Output directory for reports and solution tables.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Number of grid cells (overrides the file).
    #[arg(long)]
    n: Option<usize>,
    /// Picard stopping tolerance (overrides the file).
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Subcommand)]
enum Sub {
    /// Evaluate the existence constants and theorem verdicts; JSON on stdout.
    Check(Common),
    /// Solve by Picard iteration; writes solution.csv and report.json.
    Solve(Common),
    /// Run the oracle suite at the problem's parameters.
    Verify(Common),
    /// Grid-refinement study against [manufactured] y_exact.
    Order(Common),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, c) = match cli.command {
        Sub::Check(c) => (Command::Check, c),
        Sub::Solve(c) => (Command::Solve, c),
        Sub::Verify(c) => (Command::Verify, c),
        Sub::Order(c) => (Command::Order, c),
    };
    let opts = RunOptions {
        command,
        problem: c.problem,
        out: c.out,
        n: c.n,
        tol: c.tol,
    };
    let threads = std::env::var(THREADS_ENV).ok();
    let result = configure_threads(threads.as_deref())
        .and_then(|()| run(&opts, &mut std::io::stdout().lock()));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
