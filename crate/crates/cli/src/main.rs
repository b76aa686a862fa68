mod commands;
mod error;
mod inputs;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use filtrations::Execution;

use crate::output::OutputDir;

#[derive(Debug, Parser)]
#[command(name = "filtrations", version, about = "Batch experiments on split-words processes, bricks and couplings")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Directory for report files.
    #[arg(long, global = true, env = "FILTRATIONS_OUT", default_value = "reports")]
    out: PathBuf,
    /// Exhaustive enumerations stop beyond 2^bits cells.
    #[arg(long, global = true, default_value_t = 28, value_parser = clap::value_parser!(u32).range(1..=62))]
    enum_bits: u32,
    /// Largest exponent, in bits, kept for symbolic lengths 2^e.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    exp_bits: Option<u64>,
    /// Run every loop on the current thread.
    #[arg(long, global = true)]
    sequential: bool,
}

impl Common {
    pub fn budget(&self) -> u64 {
        1u64 << self.enum_bits
    }

    pub fn exec(&self) -> Execution {
        if self.sequential {
            Execution::Sequential
        } else {
            Execution::Parallel
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Start {
    Independent,
    Identical,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Verdicts for (Δ), (⋆), (□), the threshold and extraction sets.
    Classify {
        #[arg(long)]
        input: PathBuf,
    },
    /// Length table of a sequence file.
    Generate {
        #[arg(long)]
        input: PathBuf,
    },
    /// Seeded split-words paths with an exact uniformity check.
    Simulate {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        replicates: u64,
    },
    /// Clause-by-clause verification of a brick file.
    BrickVerify {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        seed: u64,
    },
    /// Monte Carlo run of a coupling strategy on two copies of a chain.
    Couple {
        #[arg(long)]
        chain: PathBuf,
        #[arg(long)]
        strategy: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        replicates: u64,
        #[arg(long, value_enum, default_value = "independent")]
        start: Start,
        /// Level n ≤ 0 from which the strategy drives the pair (default:
        /// the deepest level).
        #[arg(long, allow_negative_numbers = true)]
        start_level: Option<i64>,
    },
    /// Exact immersion check of a strategy-built pair chain, or of the
    /// built-in future-revealing law.
    Immersion {
        #[arg(long, required_unless_present = "future_revealing", requires = "strategy")]
        chain: Option<PathBuf>,
        #[arg(long)]
        strategy: Option<PathBuf>,
        #[arg(long, conflicts_with_all = ["chain", "strategy"])]
        future_revealing: bool,
    },
    /// Index of every report in the output directory.
    Report,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = OutputDir::new(cli.common.out.clone()).and_then(|out| {
        let c = &cli.common;
        match &cli.command {
            Command::Classify { input } => commands::classify(c, &out, input),
            Command::Generate { input } => commands::generate(c, &out, input),
            Command::Simulate { input, seed, replicates } => commands::simulate(c, &out, input, *seed, *replicates),
            Command::BrickVerify { input, seed } => commands::brick_verify(c, &out, input, *seed),
            Command::Couple { chain, strategy, seed, replicates, start, start_level } => {
                commands::couple(c, &out, chain, strategy, *seed, *replicates, *start, *start_level)
            }
            Command::Immersion { chain, strategy, future_revealing } => {
                commands::immersion(c, &out, chain.as_deref(), strategy.as_deref(), *future_revealing)
            }
            Command::Report => commands::report(&out),
        }
    });
    match result {
        Ok(done) => {
            for p in &done.files {
                println!("{}", p.display());
            }
            println!("status: {}", serde_json::to_value(done.status).expect("status").as_str().unwrap_or_default());
            ExitCode::from(done.status.exit_code())
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
