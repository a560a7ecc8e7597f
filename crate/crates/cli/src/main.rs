use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dtn_cli::config::Mode;

/// Neumann trace of the linear Schrödinger equation on a convex moving domain.
#[derive(Parser, Debug)]
#[command(name = "dtnmap", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve for f₁ and write f1.csv.
    Solve(Args),
    /// Solve and check against oracles; writes report.json.
    Verify(Args),
    /// Write the regularised memory kernel to kernel.csv.
    KernelDump(Args),
    /// Global-relation residuals of the solved trace; writes residuals.csv.
    Residual(Args),
}

#[derive(clap::Args, Debug)]
struct Args {
    /// JSON run configuration.
    config: PathBuf,
    /// Overrides `output_dir` from the config.
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (mode, args) = match cli.command {
        Command::Solve(a) => (Mode::Solve, a),
        Command::Verify(a) => (Mode::Verify, a),
        Command::KernelDump(a) => (Mode::KernelDump, a),
        Command::Residual(a) => (Mode::Residual, a),
    };
    match dtn_cli::run(mode, &args.config, args.output_dir.as_deref()) {
        Ok(out) => {
            for f in out.files {
                println!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code())
        }
    }
}
