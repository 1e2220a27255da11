mod bench;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use linsplit::formula::rational::{int, parse_rational};
use linsplit::nia::{NiaConfig, Strategy};
use linsplit::Rational;

pub const EXIT_SAT: u8 = 0;
pub const EXIT_UNSAT: u8 = 1;
pub const EXIT_UNKNOWN: u8 = 2;
pub const EXIT_USAGE: u8 = 3;
pub const EXIT_INPUT: u8 = 4;
pub const EXIT_INTERNAL: u8 = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Smt,
    Maxsmt,
    Ea,
}

#[derive(Parser, Debug)]
#[command(name = "linsplit", version, about = "SMT and Max-SMT for non-linear integer arithmetic")]
struct Args {
    /// Input script (SMT-LIB 2).
    input: Option<PathBuf>,
    /// Problem kind; inferred from the script when omitted.
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    /// cores, maxsmt, omt, jump or jump-cores.
    #[arg(long, default_value = "maxsmt", value_parser = parse_strategy)]
    strategy: Strategy,
    /// Wall-clock limit in seconds per instance.
    #[arg(long, default_value_t = 60.0)]
    timeout: f64,
    /// Base weight of a violated artificial bound.
    #[arg(long, default_value = "2", value_parser = parse_positive)]
    alpha: Rational,
    /// Extra weight per case clause a relaxation would add.
    #[arg(long, default_value = "10", value_parser = parse_positive)]
    beta: Rational,
    /// Radius of the domains picked by the jump strategies.
    #[arg(long, default_value_t = 2)]
    radius: i64,
    /// Out-of-domain clauses for squares (`--ood-clauses=false` disables).
    #[arg(long, default_value_t = true, num_args = 0..=1, default_missing_value = "true", action = clap::ArgAction::Set)]
    ood_clauses: bool,
    /// Do not scale bound weights by the correction factor.
    #[arg(long)]
    no_correction: bool,
    /// Print statistics on standard error.
    #[arg(long)]
    stats: bool,
    /// Solve every .smt2 file of a directory.
    #[arg(long, value_name = "DIR", conflicts_with = "input")]
    bench: Option<PathBuf>,
    /// Cross-check against exhaustive enumeration of [LO, HI] per variable.
    #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true)]
    oracle_box: Option<Vec<i64>>,
    /// Seed of the optimizer heuristics.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Stop after this many outer iterations.
    #[arg(long)]
    max_iterations: Option<u32>,
    /// Worker threads for --bench (0: one per core).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

fn parse_strategy(s: &str) -> Result<Strategy, String> {
    s.parse()
}

fn parse_positive(s: &str) -> Result<Rational, String> {
    match parse_rational(s) {
        Some(q) if q > int(0) => Ok(q),
        _ => Err(format!("`{s}` is not a positive rational")),
    }
}

/// Everything a single solve needs besides the input.
#[derive(Clone, Debug)]
pub struct Options {
    pub mode: Option<Mode>,
    pub config: NiaConfig,
    pub timeout: std::time::Duration,
    pub oracle_box: Option<(i64, i64)>,
}

fn options(args: &Args) -> Result<Options, String> {
    if !(args.timeout > 0.0 && args.timeout.is_finite()) {
        return Err(format!("--timeout must be positive, got {}", args.timeout));
    }
    if args.radius <= 0 {
        return Err(format!("--radius must be positive, got {}", args.radius));
    }
    let oracle_box = match args.oracle_box.as_deref() {
        None => None,
        Some(&[lo, hi]) if lo <= hi => Some((lo, hi)),
        Some(b) => return Err(format!("--oracle-box needs LO <= HI, got {b:?}")),
    };
    let mut config = NiaConfig::with_strategy(args.strategy);
    config.relax.alpha = args.alpha.clone();
    config.relax.beta = args.beta.clone();
    config.relax.correction = !args.no_correction;
    config.radius = args.radius;
    config.ood_clauses = args.ood_clauses;
    config.seed = args.seed;
    config.max_iterations = args.max_iterations;
    Ok(Options {
        mode: args.mode,
        config,
        timeout: std::time::Duration::from_secs_f64(args.timeout),
        oracle_box,
    })
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let opts = match options(&args) {
        Ok(o) => o,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    if let Some(dir) = &args.bench {
        return ExitCode::from(bench::run_bench(dir, &opts, args.jobs));
    }
    let Some(input) = &args.input else {
        eprintln!("error: no input file (see --help)");
        return ExitCode::from(EXIT_USAGE);
    };
    let text = match std::fs::read_to_string(input) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {}: {e}", input.display());
            return ExitCode::from(EXIT_INPUT);
        }
    };
    match run::solve_text(&text, &opts) {
        Ok(out) => {
            println!("{}", out.stdout);
            if args.stats {
                for line in &out.stats {
                    eprintln!("; {line}");
                }
            }
            if let Some(note) = &out.oracle_note {
                eprintln!("; oracle: {note}");
            }
            ExitCode::from(out.exit_code())
        }
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
