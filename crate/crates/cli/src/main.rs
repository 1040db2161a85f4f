mod commands;
mod grid;

use std::ops::RangeInclusive;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use onerel_core::Error;

/// Finite complete rewriting systems for the monoids
/// Mon<a,b : a^α b^β a^γ b^δ = b>.
///
/// Exit status: 0 success, 1 check failure, 2 usage error, 3 budget exhausted.
#[derive(Debug, Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Classify a tuple and emit its complete system.
    Build(BuildArgs),
    /// Run checks over a grid of exponent tuples.
    Grid(GridArgs),
    /// Knuth-Bendix completion of a presentation file.
    Complete(CompleteArgs),
    /// Normal form of a word under a system file.
    Nf(NfArgs),
    /// Bounded word-problem oracle on a presentation file.
    Equal(EqualArgs),
    /// Empirical Dehn and space functions of a presentation file.
    Dehn(DehnArgs),
    /// Check an assignment on generators for a family monoid.
    Endo(EndoArgs),
    /// The surjective, non-injective endomorphism of Mon<a,b : ab^2a^2b^2 = b>.
    HopfDemo(JsonFlag),
}

#[derive(Debug, Args)]
struct JsonFlag {
    /// Print a JSON report instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct OrderBudget {
    /// Weight cap in the termination order search. `a` may go up to the
    /// longest right-hand side.
    #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u32).range(1..))]
    max_weight: u32,
    /// Rewrite steps allowed per normalization.
    #[arg(long, default_value_t = onerel_core::DEFAULT_FUEL, value_parser = clap::value_parser!(u64).range(1..))]
    fuel: u64,
}

#[derive(Debug, Args)]
struct BuildArgs {
    /// Exponents α β γ δ, each at least 1.
    #[arg(long, num_args = 4, value_names = ["ALPHA", "BETA", "GAMMA", "DELTA"], required = true,
          value_parser = clap::value_parser!(i64).range(1..))]
    params: Vec<i64>,
    /// Certify the system and check it presents the same monoid.
    #[arg(long)]
    verify: bool,
    /// Write the system file here.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    budget: OrderBudget,
    /// Node budget per oracle search during verification.
    #[arg(long, default_value_t = onerel_core::analysis::DEFAULT_NODE_BUDGET)]
    node_budget: usize,
    #[command(flatten)]
    json: JsonFlag,
}

#[derive(Debug, Args)]
struct GridArgs {
    /// Range for every exponent, `LO..HI` inclusive or a single value.
    #[arg(long, default_value = "1..4", value_parser = parse_range)]
    range: RangeInclusive<usize>,
    #[arg(long, value_parser = parse_range)]
    alpha: Option<RangeInclusive<usize>>,
    #[arg(long, value_parser = parse_range)]
    beta: Option<RangeInclusive<usize>>,
    #[arg(long, value_parser = parse_range)]
    gamma: Option<RangeInclusive<usize>>,
    #[arg(long, value_parser = parse_range)]
    delta: Option<RangeInclusive<usize>>,
    /// Comma-separated checks: completeness, equivalence, dehn, probe.
    #[arg(long, value_delimiter = ',', default_value = "completeness")]
    checks: Vec<grid::Check>,
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    budget: OrderBudget,
    /// Node budget per oracle search.
    #[arg(long, default_value_t = onerel_core::analysis::DEFAULT_NODE_BUDGET as u64, value_parser = clap::value_parser!(u64).range(1..))]
    node_budget: u64,
    /// Rule limit for the completion probe.
    #[arg(long, default_value_t = 200, value_parser = clap::value_parser!(u64).range(1..))]
    max_rules: u64,
    /// Step limit for the completion probe.
    #[arg(long, default_value_t = 20_000, value_parser = clap::value_parser!(u64).range(1..))]
    max_steps: u64,
    /// Word length for the Dehn check.
    #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u64).range(1..))]
    dehn_n: u64,
    /// Show per-row timings in the text table.
    #[arg(long)]
    timings: bool,
    #[command(flatten)]
    json: JsonFlag,
}

#[derive(Debug, Args)]
struct CompleteArgs {
    /// Presentation file: `letters: ...` then one `lhs = rhs` per line.
    #[arg(long)]
    presentation: PathBuf,
    /// Reduction order, e.g. "weights: a=1 b=1; precedence: a>b".
    /// Defaults to shortlex in alphabet order.
    #[arg(long)]
    order: Option<String>,
    #[arg(long, default_value_t = 200)]
    max_rules: usize,
    #[arg(long, default_value_t = 20_000)]
    max_steps: usize,
    /// Write the completed system file here.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    json: JsonFlag,
}

#[derive(Debug, Args)]
struct NfArgs {
    /// System file: `letters: ...` then one `lhs -> rhs` per line.
    #[arg(long)]
    system: PathBuf,
    word: String,
    #[arg(long, default_value_t = onerel_core::DEFAULT_FUEL)]
    fuel: u64,
    /// Print every rewrite step.
    #[arg(long)]
    trace: bool,
    #[command(flatten)]
    json: JsonFlag,
}

#[derive(Debug, Args)]
struct EqualArgs {
    #[arg(long)]
    presentation: PathBuf,
    u: String,
    v: String,
    /// Length cap on intermediate words. Without it the cap is deepened
    /// from max(|u|,|v|) + 2·(longest relation side), doubling the slack twice.
    #[arg(long)]
    bound: Option<usize>,
    #[arg(long, default_value_t = onerel_core::analysis::DEFAULT_NODE_BUDGET)]
    node_budget: usize,
    #[command(flatten)]
    json: JsonFlag,
}

#[derive(Debug, Args)]
struct DehnArgs {
    #[arg(long)]
    presentation: PathBuf,
    /// Largest word length measured.
    #[arg(long)]
    n: usize,
    /// `exhaustive` or `random:COUNT`.
    #[arg(long, default_value = "exhaustive", value_parser = parse_mode)]
    mode: ModeArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Length slack above n; defaults to 2·(longest relation side).
    #[arg(long)]
    slack: Option<usize>,
    #[arg(long, default_value_t = onerel_core::analysis::DEFAULT_NODE_BUDGET)]
    node_budget: usize,
    #[command(flatten)]
    json: JsonFlag,
}

#[derive(Debug, Args)]
struct EndoArgs {
    #[arg(long, num_args = 4, value_names = ["ALPHA", "BETA", "GAMMA", "DELTA"], required = true,
          value_parser = clap::value_parser!(i64).range(1..))]
    params: Vec<i64>,
    /// Images of the generators, e.g. "a=a,b=bab".
    #[arg(long)]
    map: String,
    #[arg(long, default_value_t = 3)]
    surjective_bound: usize,
    #[arg(long, default_value_t = 8)]
    noninjective_bound: usize,
    #[command(flatten)]
    budget: OrderBudget,
    #[command(flatten)]
    json: JsonFlag,
}

fn parse_range(s: &str) -> Result<RangeInclusive<usize>, String> {
    let (lo, hi) = match s.split_once("..") {
        Some((lo, hi)) => (lo, hi.strip_prefix('=').unwrap_or(hi)),
        None => (s, s),
    };
    let lo: usize = lo.trim().parse().map_err(|e| format!("`{lo}`: {e}"))?;
    let hi: usize = hi.trim().parse().map_err(|e| format!("`{hi}`: {e}"))?;
    if lo == 0 {
        return Err("exponents start at 1".into());
    }
    if lo > hi {
        return Err(format!("empty range {lo}..{hi}"));
    }
    Ok(lo..=hi)
}

#[derive(Debug, Clone, Copy)]
enum ModeArg {
    Exhaustive,
    Random(usize),
}

fn parse_mode(s: &str) -> Result<ModeArg, String> {
    if s == "exhaustive" {
        return Ok(ModeArg::Exhaustive);
    }
    match s.strip_prefix("random:").map(str::parse::<usize>) {
        Some(Ok(count)) if count > 0 => Ok(ModeArg::Random(count)),
        _ => Err("expected `exhaustive` or `random:COUNT` with COUNT >= 1".into()),
    }
}

/// How a command finished, mapped onto the exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success,
    CheckFailed,
    BudgetExhausted,
}

impl From<Status> for ExitCode {
    fn from(s: Status) -> Self {
        ExitCode::from(match s {
            Status::Success => 0,
            Status::CheckFailed => 1,
            Status::BudgetExhausted => 3,
        })
    }
}

fn error_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::FuelExhausted { .. }) => 3,
        Some(
            Error::EmptyAlphabet
            | Error::DuplicateLetter(_)
            | Error::InvalidLetter(_)
            | Error::UnknownLetter { .. }
            | Error::MalformedExponent { .. }
            | Error::ZeroExponent { .. }
            | Error::EmptyWord
            | Error::InvalidOrder(_)
            | Error::MissingWeight(_)
            | Error::InvalidMap(_)
            | Error::MissingImage(_)
            | Error::NonPositiveExponent(..)
            | Error::Parse { .. },
        ) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Build(a) => commands::build(a),
        Command::Grid(a) => grid::run(a),
        Command::Complete(a) => commands::complete(a),
        Command::Nf(a) => commands::nf(a),
        Command::Equal(a) => commands::equal(a),
        Command::Dehn(a) => commands::dehn(a),
        Command::Endo(a) => commands::endo(a),
        Command::HopfDemo(a) => commands::hopf_demo(a),
    };
    match result {
        Ok(status) => status.into(),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(error_code(&err))
        }
    }
}
