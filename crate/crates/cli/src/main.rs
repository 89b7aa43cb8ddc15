mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "braidsheaf", version, about = "Exact checks for hyperbolic sheaves on the braid arrangement")]
struct Cli {
    /// Axiom configuration file.
    #[arg(long, global = true)]
    axioms: Option<PathBuf>,
    /// can/var configuration file.
    #[arg(long, global = true)]
    canvar: Option<PathBuf>,
    /// Seed for every randomised step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// List the faces of the braid arrangement.
    Faces { n: usize },
    /// Check a sheaf against the axioms, or a datum against the gluing axiom.
    Validate { file: PathBuf },
    /// Per-pattern dimensions of the fiber along a tree.
    Fiber { sheaf: PathBuf, tree: String },
    /// Convert between an n=2 sheaf and its gluing datum.
    Glue {
        file: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Comparison map between the stalk at the minimal face and tree fibers.
    Compare {
        sheaf: PathBuf,
        /// Defaults to every tree.
        tree: Option<String>,
    },
    /// Transport along a word such as `swap(1,2); loop(1,2)`.
    Cross { sheaf: PathBuf, tree: String, path: String },
    /// Build the section family over all trees and reconstruct.
    Sections {
        sheaf: PathBuf,
        #[arg(long)]
        base: Option<String>,
    },
    /// Graded dimensions of the path coalgebra.
    Coalgebra {
        #[arg(long, default_value = "double")]
        quiver: String,
        #[arg(long, default_value_t = 10)]
        max: usize,
    },
    /// Run the verification suite, adding any given sheaf, config or directory.
    Suite {
        inputs: Vec<PathBuf>,
        /// Random instances per randomised check.
        #[arg(long, default_value_t = 100)]
        random: usize,
    },
    /// Write a built-in fixture.
    Fixture {
        #[arg(value_parser = ["constant", "skyscraper"])]
        kind: String,
        n: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Write a seeded random valid sheaf.
    Random {
        n: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let _ = cli.format;
    let ctx = match commands::Context::new(cli.axioms.as_deref(), cli.canvar.as_deref(), cli.seed) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match commands::run(&ctx, &cli.command) {
        Ok(out) => {
            print!("{}", out.text);
            if out.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
