use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use bvqft_cli::{render_report, run_path, Command, RunOptions, EXIT_INPUT};

/// Exact-rational solver and verifier for BV QFT algebras.
#[derive(Parser)]
#[command(name = "bvqft", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(clap::Args)]
struct Common {
    /// Instance file (JSON).
    instance: PathBuf,
    /// Order N in the coordinates t; overrides the instance file.
    #[arg(long)]
    order: Option<usize>,
    /// Highest hbar order kept in the quantization map; overrides the instance file.
    #[arg(long = "hbar-max")]
    hbar_max: Option<usize>,
    /// Write the JSON report here.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Seed for randomized gauge choices and randomized checks.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check every algebra, cycle and integral axiom.
    Validate(Common),
    /// Solve the quantum master equation and verify the tensor package.
    Solve(Common),
    /// Quantum coordinates, correlators, generating function and free energy.
    Observables(Common),
    /// Pairings, metric, potential and the WDVV residual.
    Wdvv(Common),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = std::env::var("BVQFT_THREADS").ok().and_then(|s| s.parse::<usize>().ok()).filter(|&n| n > 0) {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().expect("thread pool configured once");
    }
    let (cmd, common) = match cli.command {
        Cmd::Validate(c) => (Command::Validate, c),
        Cmd::Solve(c) => (Command::Solve, c),
        Cmd::Observables(c) => (Command::Observables, c),
        Cmd::Wdvv(c) => (Command::Wdvv, c),
    };
    let opts = RunOptions { order: common.order, hbar_max: common.hbar_max, seed: common.seed };
    let outcome = run_path(cmd, &common.instance, opts);
    print!("{}", outcome.text);
    if let Some(path) = &common.report {
        if let Err(e) = std::fs::write(path, render_report(&outcome.report)) {
            eprintln!("cannot write report {}: {e}", path.display());
            return ExitCode::from(EXIT_INPUT as u8);
        }
    }
    ExitCode::from(outcome.exit_code as u8)
}
