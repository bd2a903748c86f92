//! `plckit` — command-line surface for the party-local stabilizer toolkit.
//!
//! Subcommands cover state diagnostics (`info`), party-local equivalence
//! (`equiv`), tensor-factor decomposition (`decompose`), tableau synthesis
//! from a commutation tuple (`synth`), entanglement-generating-set searches
//! (`egs`), and standing verification batteries (`verify`).
//!
//! Exit codes are a stable contract: `0` success / equivalent / complete,
//! `1` definite negative, `2` inconclusive or partial, `3` input errors,
//! `4` internal errors.  Identical invocations (same flags and seed)
//! produce byte-identical output.

mod commands;
mod inputs;
mod render;
mod reports;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use plckit::equivalence::SearchLimits;

/// Toolkit for party-local Clifford equivalence of stabilizer states:
/// decide equivalence, decompose states into indecomposable factors, and
/// enumerate entanglement generating sets.
#[derive(Parser, Debug)]
#[command(name = "plckit", version, disable_help_subcommand = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Diagnostics for one state: validity, local ranks, extraction
    /// count, rank condition, and the commutation tuple.
    Info(InfoArgs),
    /// Decide party-local Clifford equivalence of two states.
    Equiv(EquivArgs),
    /// Decompose a state or tuple into indecomposable tensor factors.
    Decompose(DecomposeArgs),
    /// Synthesize a stabilizer tableau realizing a commutation tuple.
    Synth(SynthArgs),
    /// Enumerate entanglement-generating-set classes for a party layout.
    Egs(EgsArgs),
    /// Run a named verification battery.
    Verify(VerifyArgs),
}

/// Options shared by every subcommand: field order, seed, budgets,
/// output destination, and rendering format.
#[derive(Args, Debug, Clone)]
struct CommonOpts {
    /// Field order (prime). Files carry their own and must agree.
    #[arg(long)]
    d: Option<u64>,
    /// Seed for every randomized phase; fixed seed ⇒ identical output.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Cap on exhaustive endomorphism-ring enumeration.
    #[arg(long, default_value_t = 1 << 20, env = "PLCKIT_BUDGET_RING")]
    budget_ring: u128,
    /// Cap on exhaustive congruence-witness enumeration.
    #[arg(long, default_value_t = 1 << 20, env = "PLCKIT_BUDGET_CONGRUENCE")]
    budget_congruence: u128,
    /// Cap on graph enumeration for searches.
    #[arg(long, default_value_t = 1 << 22, env = "PLCKIT_BUDGET_GRAPHS")]
    budget_graphs: u128,
    /// Random witness samples tried once exhaustive budgets run out.
    #[arg(long, default_value_t = 4096)]
    samples: u64,
    /// Worker threads for parallel enumeration (0 = library default).
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Write the report here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Report rendering.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

impl CommonOpts {
    /// Search limits assembled from the budget flags and seed.
    fn limits(&self) -> SearchLimits {
        SearchLimits {
            ring_enumeration: self.budget_ring,
            congruence_search: self.budget_congruence,
            random_samples: self.samples,
            seed: self.seed,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Json,
    Table,
}

#[derive(Args, Debug)]
struct InfoArgs {
    /// Stabilizer tableau JSON file.
    #[arg(long, conflicts_with = "graph")]
    state: Option<PathBuf>,
    /// Graph edge-list file (`n=<count>` header, then `i j [m]` lines).
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Party partition, e.g. "1,2|3|4" (1-indexed sites).
    #[arg(long)]
    partition: String,
    #[command(flatten)]
    common: CommonOpts,
}

#[derive(Args, Debug)]
struct EquivArgs {
    /// First state as a tableau JSON file.
    #[arg(long, conflicts_with = "graph_a")]
    state_a: Option<PathBuf>,
    /// First state as a graph edge-list file.
    #[arg(long)]
    graph_a: Option<PathBuf>,
    /// Second state as a tableau JSON file.
    #[arg(long, conflicts_with = "graph_b")]
    state_b: Option<PathBuf>,
    /// Second state as a graph edge-list file.
    #[arg(long)]
    graph_b: Option<PathBuf>,
    /// Party partition shared by both states.
    #[arg(long)]
    partition: String,
    #[command(flatten)]
    common: CommonOpts,
}

#[derive(Args, Debug)]
struct DecomposeArgs {
    /// State as a tableau JSON file (requires --partition).
    #[arg(long, conflicts_with_all = ["graph", "tuple"])]
    state: Option<PathBuf>,
    /// State as a graph edge-list file (requires --partition).
    #[arg(long, conflicts_with = "tuple")]
    graph: Option<PathBuf>,
    /// Commutation tuple JSON file (no partition needed).
    #[arg(long)]
    tuple: Option<PathBuf>,
    /// Party partition for state or graph input.
    #[arg(long)]
    partition: Option<String>,
    #[command(flatten)]
    common: CommonOpts,
}

#[derive(Args, Debug)]
struct SynthArgs {
    /// Commutation tuple JSON file to realize.
    #[arg(long)]
    tuple: PathBuf,
    #[command(flatten)]
    common: CommonOpts,
}

#[derive(Args, Debug)]
struct EgsArgs {
    /// Party sizes, e.g. "2,1,1,1".
    #[arg(long)]
    sizes: String,
    /// Orbit database file; searched instead of full enumeration.
    #[arg(long)]
    database: Option<PathBuf>,
    #[command(flatten)]
    common: CommonOpts,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[command(subcommand)]
    suite: VerifySuite,
}

#[derive(Subcommand, Debug)]
enum VerifySuite {
    /// Split verdicts for the spiral family of four-party states.
    Spiral {
        /// Smallest site count checked.
        #[arg(long, default_value_t = 4)]
        min: usize,
        /// Largest site count checked.
        #[arg(long, default_value_t = 12)]
        max: usize,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Two-site Clifford coset table: order, subgroup, coverage.
    Cosets {
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Randomized invariants battery over sampled states and tuples.
    Properties {
        /// Number of sampled trials.
        #[arg(long, default_value_t = 200)]
        trials: u64,
        #[command(flatten)]
        common: CommonOpts,
    },
}

/// Input-side failure: bad files, flags, or preconditions. Exit 3.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct InputError(pub String);

/// How a finished command maps onto the exit-code contract.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    /// Success, equivalence, or a complete report.
    Success,
    /// A definite negative verdict or failed verification.
    Negative,
    /// Inconclusive verdict or partial report.
    Partial,
}

impl Outcome {
    fn code(self) -> u8 {
        match self {
            Outcome::Success => 0,
            Outcome::Negative => 1,
            Outcome::Partial => 2,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let kind = err.kind();
            let _ = err.print();
            return if matches!(kind, ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(3)
            };
        }
    };

    let common = match &cli.command {
        Command::Info(args) => args.common.clone(),
        Command::Equiv(args) => args.common.clone(),
        Command::Decompose(args) => args.common.clone(),
        Command::Synth(args) => args.common.clone(),
        Command::Egs(args) => args.common.clone(),
        Command::Verify(args) => match &args.suite {
            VerifySuite::Spiral { common, .. }
            | VerifySuite::Cosets { common }
            | VerifySuite::Properties { common, .. } => common.clone(),
        },
    };
    if common.threads > 0 {
        // Best-effort: a pool may already exist in tests; reports are
        // independent of the worker count either way.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(common.threads)
            .build_global();
    }

    let result = match &cli.command {
        Command::Info(args) => commands::info(args),
        Command::Equiv(args) => commands::equiv(args),
        Command::Decompose(args) => commands::decompose_cmd(args),
        Command::Synth(args) => commands::synth(args),
        Command::Egs(args) => commands::egs_cmd(args),
        Command::Verify(args) => commands::verify(args),
    };

    match result {
        Ok((outcome, rendered)) => {
            if let Err(err) = render::emit(&rendered, &common) {
                eprintln!("error: {err}");
                return ExitCode::from(4);
            }
            ExitCode::from(outcome.code())
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(3)
        }
    }
}
