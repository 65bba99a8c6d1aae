mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use cbe_core::Rational;
use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "cbe", version, about = "Competitive bundling equilibria: generate, solve, verify and search markets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write the output to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for parallel searches (results do not depend on it).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Include wall-clock time in the report (makes it non-reproducible).
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a named or random market as JSON.
    Generate(GenerateArgs),
    /// Run one of the equilibrium constructions on a market.
    Solve(SolveArgs),
    /// Check an outcome for profit maximization and market clearance.
    Verify(VerifyArgs),
    /// Enumerate every bundling of a small market.
    Search(SearchArgs),
    /// Solve the configuration LP, CAP2 or the menu LP.
    Lp(LpArgs),
    /// Rerun a reference instance and check its known values.
    Reproduce(ReproduceArgs),
}

#[derive(Args, Debug, Clone, Default)]
pub struct Params {
    #[arg(long, value_parser = parse_rational)]
    pub epsilon: Option<Rational>,
    #[arg(long, value_parser = parse_rational)]
    pub delta: Option<Rational>,
    #[arg(short, long)]
    pub m: Option<usize>,
    #[arg(short, long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("source").required(true).args(["name", "class"])))]
pub struct GenerateArgs {
    /// Named instance: prop22, thm42, table1, ex81, ex82, revenue-lb.
    #[arg(long)]
    pub name: Option<String>,
    /// Random class, e.g. additive, budget-additive, matroid-rank-common.
    #[arg(long)]
    pub class: Option<String>,
    #[command(flatten)]
    pub params: Params,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algo {
    TwoConsumer,
    SubadditiveN2,
    Multiunit,
    GeneralM23,
    BudgetAdditive,
    MatroidRevenue,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Setting {
    Uniform,
    Common,
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    #[arg(long, value_enum)]
    pub algo: Algo,
    #[arg(long)]
    pub input: PathBuf,
    /// Matroid setting for matroid-revenue.
    #[arg(long, value_enum, default_value = "uniform")]
    pub setting: Setting,
    /// Multi-unit: bundle price margin (chosen automatically when omitted).
    #[arg(long, value_parser = parse_rational)]
    pub epsilon: Option<Rational>,
    /// Multi-unit: use only value queries via pre-bundles.
    #[arg(long)]
    pub value_queries: bool,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("files").required(true).args(["input", "market"])))]
pub struct VerifyArgs {
    /// A file holding {"market": ..., "outcome": ...}.
    #[arg(long, conflicts_with_all = ["market", "outcome"])]
    pub input: Option<PathBuf>,
    #[arg(long, requires = "outcome")]
    pub market: Option<PathBuf>,
    #[arg(long, requires = "market")]
    pub outcome: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SearchArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Largest number of bundlings to examine.
    #[arg(long)]
    pub budget: Option<u128>,
    /// Include one row per bundling.
    #[arg(long)]
    pub table: bool,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpModel {
    Config,
    Cap2,
    Menu,
}

#[derive(Args, Debug)]
pub struct LpArgs {
    #[arg(long, value_enum)]
    pub model: LpModel,
    /// Market file for config and cap2.
    #[arg(long, required_if_eq_any = [("model", "config"), ("model", "cap2")])]
    pub input: Option<PathBuf>,
    /// Menu: comma-separated type values (default 1/2, ..., 1/n).
    #[arg(long, value_delimiter = ',', value_parser = parse_rational)]
    pub values: Vec<Rational>,
    /// Menu: n for the default values.
    #[arg(short, long, default_value_t = 3)]
    pub n: usize,
    /// Menu: cap on every allocation probability.
    #[arg(long, value_parser = parse_rational, default_value = "1")]
    pub cap: Rational,
    /// Enumeration guard for the LP column count.
    #[arg(long)]
    pub budget: Option<u128>,
}

#[derive(Args, Debug)]
pub struct ReproduceArgs {
    /// prop22, thm42, table1, ex81, ex82, revenue-lb or myerson.
    #[arg(long)]
    pub case: String,
    #[command(flatten)]
    pub params: Params,
}

fn parse_rational(s: &str) -> Result<Rational, String> {
    s.parse::<Rational>().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Some(j) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(j.max(1)).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let start = std::time::Instant::now();
    let result = match &cli.command {
        Command::Generate(a) => commands::generate(a),
        Command::Solve(a) => commands::solve(a),
        Command::Verify(a) => commands::verify(a),
        Command::Search(a) => commands::search(a),
        Command::Lp(a) => commands::lp(a),
        Command::Reproduce(a) => commands::reproduce(a),
    };
    let output = match result {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let timing = cli.timing.then(|| start.elapsed());
    let (text, pass) = output.render(&argv, timing);
    if let Some(path) = &cli.out {
        if let Err(e) = std::fs::write(path, &text) {
            eprintln!("error: cannot write {}: {e}", path.display());
            return ExitCode::from(2);
        }
    } else {
        print!("{text}");
    }
    if pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
