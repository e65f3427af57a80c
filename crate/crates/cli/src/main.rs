//! `herbrand` command-line front end.

mod commands;
mod render;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "herbrand", version, about = "Exact Hasse-Herbrand functions and depth transforms of local field extensions")]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalOpts {
    /// Output format (sweep defaults to csv, everything else to table).
    #[arg(long, global = true, value_enum)]
    pub format: Option<OutputFormat>,
    /// Also show rationals rounded to this many decimal digits (table and csv only).
    #[arg(long, global = true, value_name = "DIGITS")]
    pub decimal: Option<usize>,
    /// Only check monotonicity, divisibility and termination of the orders.
    #[arg(long, global = true)]
    pub lenient: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Table,
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Ramification index, breaks, tower degrees and a(L/K) of an extension.
    Info { file: PathBuf },
    /// Evaluate φ (or ψ = φ⁻¹ with --inverse) at the given points.
    Phi {
        file: PathBuf,
        #[arg(long, required = true, num_args = 1, value_delimiter = ',', allow_hyphen_values = true)]
        at: Vec<String>,
        #[arg(long)]
        inverse: bool,
    },
    /// Depth of the Langlands parameter of a character of the given depth.
    Depth {
        file: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        chi: String,
    },
    /// Tabulate the depth transform over an arithmetic progression of depths.
    Sweep {
        file: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        from: String,
        #[arg(long, allow_hyphen_values = true)]
        to: String,
        #[arg(long, allow_hyphen_values = true)]
        step: String,
    },
    /// Check the tame/wild depth predicates (and catalog expectations) for a file.
    Check { file: PathBuf },
    /// List, show and verify the built-in example families.
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
}

#[derive(Debug, Subcommand)]
pub enum CatalogAction {
    /// List the family names.
    List,
    /// Show one entry: filtration, expected values and notes.
    Show {
        name: String,
        #[arg(long, num_args = 1.., value_delimiter = ',')]
        params: Vec<String>,
    },
    /// Recompute e, b, φ(b), a from the filtration and compare with the expected values.
    Verify {
        #[arg(long, conflicts_with_all = ["name", "params"])]
        all: bool,
        #[arg(required_unless_present = "all")]
        name: Option<String>,
        #[arg(long, num_args = 1.., value_delimiter = ',')]
        params: Vec<String>,
    },
}

/// Failure categories, each with its own exit status.
#[derive(Debug)]
pub enum Failure {
    /// A check or verification did not pass (exit 1).
    Check,
    /// Bad flag values (exit 2).
    Usage(String),
    /// Unreadable or invalid input (exit 3).
    Input(String),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Info { file } => commands::info(&cli.global, &file),
        Command::Phi { file, at, inverse } => commands::phi(&cli.global, &file, &at, inverse),
        Command::Depth { file, chi } => commands::depth(&cli.global, &file, &chi),
        Command::Sweep { file, from, to, step } => commands::sweep(&cli.global, &file, &from, &to, &step),
        Command::Check { file } => commands::check(&cli.global, &file),
        Command::Catalog { action } => commands::catalog(&cli.global, action),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
