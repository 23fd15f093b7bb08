use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use rdtm::commands::{self, Command, Overrides};
use rdtm::BackendKind;

/// Truncated power-series solutions of ZK(n,n) equations.
#[derive(Parser)]
#[command(name = "rdtm", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Dump the coefficients U_0..U_K (exact terms or grid field statistics).
    Solve(Common),
    /// Evaluate the truncated series and its self-convergence error.
    Table(Common),
    /// Check that every series residual R_k vanishes.
    Residual {
        #[command(flatten)]
        common: Common,
        /// Perturb U_K before checking (test hook).
        #[arg(long, hide = true, value_name = "K")]
        corrupt: Option<usize>,
    },
    /// Compare grid coefficients against the exact backend.
    Compare(Common),
}

#[derive(Args)]
struct Common {
    /// Run configuration file.
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Truncation order K, overriding the config.
    #[arg(long, value_name = "K")]
    order: Option<usize>,
    /// Backend, overriding the config.
    #[arg(long, value_enum)]
    backend: Option<BackendArg>,
    /// Output file; stdout when absent from both here and the config.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Exact,
    Grid,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, common, corrupt) = match cli.command {
        Cmd::Solve(c) => (Command::Solve, c, None),
        Cmd::Table(c) => (Command::Table, c, None),
        Cmd::Residual { common, corrupt } => (Command::Residual, common, corrupt),
        Cmd::Compare(c) => (Command::Compare, c, None),
    };
    let overrides = Overrides {
        order: common.order,
        backend: common.backend.map(|b| match b {
            BackendArg::Exact => BackendKind::Exact,
            BackendArg::Grid => BackendKind::Grid,
        }),
        out: common.out,
        corrupt,
    };
    let code = commands::run(command, &common.config, &overrides);
    ExitCode::from(code as u8)
}
