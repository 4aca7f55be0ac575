use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use dynprice::analysis::analyze;
use dynprice::gen::{generate, GenProfile, TargetRegime};
use dynprice::io::{
    market_hash, market_to_json, parse_market, parse_prices, prices_to_json, trace_to_json, BranchRecord,
    PriceMetadata, TraceFile, TRACE_VERSION,
};
use dynprice::rational::fmt_rat;
use dynprice::sim::{explore, Orders, Ties};
use dynprice::verify::is_dynamic_pricing;
use dynprice::{price_market, Algo, Error, Market, Result};

/// Dynamic posted prices for multi-demand markets.
#[derive(Parser)]
#[command(name = "dynprice", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute a dynamic pricing and write a price file.
    Price {
        market: PathBuf,
        #[arg(long, default_value = "auto", value_parser = parse_algo)]
        algo: Algo,
        /// Item that must be the cheapest residual item (tri-demand only).
        #[arg(long)]
        fixed_at: Option<String>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Check a price file; exits 1 with a counterexample when rejected.
    Verify { market: PathBuf, prices: PathBuf },
    /// Simulate arrivals with repricing between them.
    Simulate {
        market: PathBuf,
        #[arg(long, value_enum, default_value_t = OrderMode::All)]
        orders: OrderMode,
        /// Number of random orders with `--orders seeded`.
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = TieMode::All)]
        ties: TieMode,
        /// Where to write every explored branch.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Report optimum, legal and exclusive items, and applicable regimes.
    Analyze {
        market: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Generate a random market that meets the standing assumptions.
    Generate {
        #[arg(long, default_value = "1..4", value_parser = parse_range)]
        players: RangeInclusive<usize>,
        #[arg(long, default_value = "1..3", value_parser = parse_range)]
        demand: RangeInclusive<usize>,
        /// Largest integer value.
        #[arg(long, default_value_t = 10)]
        values: u32,
        #[arg(long, default_value = "any", value_parser = parse_regime)]
        regime: TargetRegime,
        #[arg(long)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum OrderMode {
    All,
    Seeded,
}

#[derive(Clone, Copy, ValueEnum)]
enum TieMode {
    All,
    First,
}

fn parse_algo(s: &str) -> std::result::Result<Algo, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_regime(s: &str) -> std::result::Result<TargetRegime, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// `a..b` (inclusive) or a single number.
fn parse_range(s: &str) -> std::result::Result<RangeInclusive<usize>, String> {
    let num = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("{t:?}: {e}"));
    match s.split_once("..") {
        Some((a, b)) => Ok(num(a)?..=num(b.trim_start_matches('='))?),
        None => num(s).map(|k| k..=k),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn load_market(path: &Path) -> Result<Market> {
    parse_market(&read(path)?)
}

/// Writes to a file, or appends to the buffered standard output.
fn emit(output: Option<&Path>, text: &str, out: &mut String) -> Result<()> {
    match output {
        Some(path) => fs::write(path, text).map_err(|e| Error::Parse(format!("{}: {e}", path.display()))),
        None => {
            out.push_str(text);
            Ok(())
        }
    }
}

fn run(cli: Cli, out: &mut String) -> Result<u8> {
    match cli.command {
        Command::Price { market, algo, fixed_at, output } => {
            let m = load_market(&market)?;
            let fixed = fixed_at.map(|x| m.item_id(&x)).transpose()?;
            let priced = price_market(&m, algo, fixed)?;
            let metadata =
                PriceMetadata { algorithm: priced.algorithm.to_string(), seed: None, market_hash: market_hash(&m) };
            emit(output.as_deref(), &prices_to_json(&m, &priced.prices, metadata), out)?;
            Ok(0)
        }
        Command::Verify { market, prices } => {
            let m = load_market(&market)?;
            let (p, _) = parse_prices(&m, &read(&prices)?)?;
            let report = is_dynamic_pricing(&m, &p)?;
            match report.counterexample {
                None => {
                    out.push_str("accepted\n");
                    Ok(0)
                }
                Some((i, bundle)) => {
                    let bundle = m.item_names(&bundle).join(", ");
                    writeln!(out, "rejected: player {} can buy {{{bundle}}}", m.players[i]).ok();
                    Ok(1)
                }
            }
        }
        Command::Simulate { market, orders, count, seed, ties, trace } => {
            let m = load_market(&market)?;
            let orders = match orders {
                OrderMode::All => Orders::All,
                OrderMode::Seeded => Orders::Seeded { count, seed },
            };
            let ties = match ties {
                TieMode::All => Ties::All,
                TieMode::First => Ties::First,
            };
            let run = explore(&m, orders, ties)?;
            if let Some(path) = trace {
                let branches = run
                    .branches
                    .iter()
                    .map(|(order, r)| match r {
                        Ok(t) => BranchRecord::from_trace(&m, order, t),
                        Err(e) => BranchRecord::failed(&m, order, e),
                    })
                    .collect();
                let file = TraceFile {
                    version: TRACE_VERSION.into(),
                    market_hash: market_hash(&m),
                    optimum: fmt_rat(&run.optimum),
                    branches,
                };
                emit(Some(&path), &trace_to_json(&file), out)?;
            }
            let show = |r: Option<&dynprice::Rat>| r.map_or("-".to_string(), fmt_rat);
            let errors: Vec<&Error> = run.errors().collect();
            writeln!(out, "branches: {}", run.branches.len()).ok();
            writeln!(out, "optimum: {}", fmt_rat(&run.optimum)).ok();
            writeln!(out, "min welfare: {}", show(run.min_welfare())).ok();
            writeln!(out, "max welfare: {}", show(run.max_welfare())).ok();
            writeln!(out, "errors: {}", errors.len()).ok();
            for e in &errors {
                writeln!(out, "  {}: {e}", e.kind()).ok();
            }
            Ok(match errors.first() {
                Some(e) => e.exit_code() as u8,
                None if run.all_optimal() => 0,
                None => 1,
            })
        }
        Command::Analyze { market, json } => {
            let a = analyze(&load_market(&market)?)?;
            if json {
                writeln!(out, "{}", serde_json::to_string_pretty(&a).expect("serializable")).ok();
            } else {
                write!(out, "{a}").ok();
            }
            Ok(0)
        }
        Command::Generate { players, demand, values, regime, seed, output } => {
            let profile = GenProfile { players, demand, value_bound: values, regime, seed };
            emit(output.as_deref(), &market_to_json(&generate(&profile)?), out)?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let mut out = String::new();
    let result = run(Cli::parse(), &mut out);
    // A closed pipe downstream is not a failure of the command.
    let _ = std::io::stdout().lock().write_all(out.as_bytes());
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("{}", serde_json::json!({ "error": e.kind(), "message": e.to_string() }));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
