//! The `nsf` command line: `simulate`, `bell-chain` and `verify`.
//!
//! Exit codes: 0 on success, 1 for invalid input, 2 when a verified
//! property fails.

use std::ffi::OsString;
use std::io::Write;
use std::ops::RangeInclusive;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use num_rational::BigRational;

use crate::chain::{self, Scaling, StrategyOrder, SweepConfig};
use crate::io::{simulate_files, RunConfig};
use crate::verify::{self, VerifyConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_PROPERTY: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "nsf", version, about = "Noise tracking on qudit graph states")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Track Pauli-diagonal noise through an operation script.
    Simulate(SimulateArgs),
    /// Bell-pair fidelity from a measured linear chain, as CSV.
    BellChain(BellChainArgs),
    /// Run the randomized property suites.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Graph JSON.
    #[arg(long)]
    graph: PathBuf,
    /// Channel list JSON.
    #[arg(long)]
    channels: Option<PathBuf>,
    /// Operation script JSON.
    #[arg(long)]
    ops: Option<PathBuf>,
    /// Output file; standard output if absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Floating-point probabilities instead of exact rationals.
    #[arg(long)]
    float: bool,
}

#[derive(Debug, Args)]
struct BellChainArgs {
    /// Chain length.
    #[arg(long = "N", short = 'N')]
    n: usize,
    #[arg(long)]
    p: u32,
    /// Extension degrees, e.g. `1..5` or `3`.
    #[arg(long, default_value = "1")]
    m_range: String,
    #[arg(long)]
    q2: f64,
    /// Comma list such as `0.9,0.95,1`, or `start:stop:step`.
    #[arg(long, default_value = "1")]
    r: String,
    #[arg(long, default_value = "choi")]
    scaling: String,
    /// `side-to-side`, `reversed`, `random:<seed>` or a comma list of vertices in measurement order.
    #[arg(long, default_value = "side-to-side")]
    order: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long, value_delimiter = ',', default_value = "2,3,5,9")]
    d_list: Vec<u32>,
    #[arg(long, default_value_t = 4)]
    max_n: usize,
    #[arg(long, default_value_t = 50)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// Parses `a..b`, `a..=b`, `a-b` or a single integer, inclusive.
pub fn parse_m_range(s: &str) -> Result<RangeInclusive<u32>, String> {
    let s = s.trim();
    let num = |t: &str| {
        t.trim()
            .parse::<u32>()
            .map_err(|_| format!("invalid m range {s:?}"))
    };
    let (a, b) = if let Some((a, b)) = s.split_once("..=") {
        (num(a)?, num(b)?)
    } else if let Some((a, b)) = s.split_once("..") {
        (num(a)?, num(b)?)
    } else if let Some((a, b)) = s.split_once('-') {
        (num(a)?, num(b)?)
    } else {
        let a = num(s)?;
        (a, a)
    };
    if a == 0 || a > b {
        return Err(format!("invalid m range {s:?}"));
    }
    Ok(a..=b)
}

/// Parses a comma list, or `start:stop:step` inclusive of `stop`.
pub fn parse_r_grid(s: &str) -> Result<Vec<f64>, String> {
    let bad = || format!("invalid r grid {s:?}");
    let parts: Vec<&str> = s.split(':').collect();
    let values = match parts.as_slice() {
        [a, b, step] => {
            let (a, b, step): (f64, f64, f64) = (
                a.trim().parse().map_err(|_| bad())?,
                b.trim().parse().map_err(|_| bad())?,
                step.trim().parse().map_err(|_| bad())?,
            );
            if step.is_nan() || step <= 0.0 || b < a {
                return Err(bad());
            }
            let count = ((b - a) / step + 1e-9).floor() as usize;
            (0..=count).map(|k| a + step * k as f64).collect()
        }
        [_] => s
            .split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<Vec<_>, _>>()?,
        _ => return Err(bad()),
    };
    if values.is_empty() {
        return Err(bad());
    }
    Ok(values)
}

fn write_output(out: Option<&PathBuf>, bytes: &[u8]) -> Result<(), String> {
    match out {
        Some(p) => std::fs::write(p, bytes).map_err(|e| format!("{}: {e}", p.display())),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| e.to_string()),
    }
}

fn cmd_simulate(a: &SimulateArgs) -> Result<i32, String> {
    let cfg = RunConfig {
        graph: a.graph.clone(),
        channels: a.channels.clone(),
        ops: a.ops.clone(),
        output: a.out.clone(),
        float: a.float,
    };
    let doc = if cfg.float {
        simulate_files::<f64>(&cfg)
    } else {
        simulate_files::<BigRational>(&cfg)
    }
    .map_err(|e| e.to_string())?;
    let mut text = serde_json::to_string_pretty(&doc).map_err(|e| e.to_string())?;
    text.push('\n');
    write_output(cfg.output.as_ref(), text.as_bytes())?;
    Ok(EXIT_OK)
}

fn cmd_bell_chain(a: &BellChainArgs) -> Result<i32, String> {
    let order = match a.order.trim() {
        "side-to-side" => None,
        other => Some(StrategyOrder::parse(a.n, other).map_err(|e| e.to_string())?),
    };
    let cfg = SweepConfig {
        n: a.n,
        p: a.p,
        m_range: parse_m_range(&a.m_range)?,
        q2: a.q2,
        r: parse_r_grid(&a.r)?,
        scaling: a.scaling.parse::<Scaling>().map_err(|e| e.to_string())?,
        order,
    };
    let rows = chain::bell_chain_sweep(&cfg).map_err(|e| e.to_string())?;
    let mut buf = Vec::new();
    chain::write_csv(&rows, &mut buf).map_err(|e| e.to_string())?;
    write_output(a.out.as_ref(), &buf)?;
    Ok(EXIT_OK)
}

fn cmd_verify(a: &VerifyArgs) -> Result<i32, String> {
    if a.d_list.is_empty() {
        return Err("--d-list is empty".into());
    }
    let cfg = VerifyConfig {
        d_list: a.d_list.clone(),
        max_n: a.max_n,
        trials: a.trials,
        seed: a.seed,
    };
    let report = verify::run(&cfg).map_err(|e| e.to_string())?;
    println!("{report}");
    Ok(if report.passed() {
        EXIT_OK
    } else {
        EXIT_PROPERTY
    })
}

/// Runs the command line and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_INVALID
            } else {
                EXIT_OK
            };
            let _ = e.print();
            return code;
        }
    };
    let result = match &cli.command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::BellChain(a) => cmd_bell_chain(a),
        Command::Verify(a) => cmd_verify(a),
    };
    match result {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            EXIT_INVALID
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_m_range("1..5").unwrap(), 1..=5);
        assert_eq!(parse_m_range("2-6").unwrap(), 2..=6);
        assert_eq!(parse_m_range("3").unwrap(), 3..=3);
        assert!(parse_m_range("0..2").is_err());
        assert!(parse_m_range("5..2").is_err());
        assert_eq!(parse_r_grid("0.9,1").unwrap(), vec![0.9, 1.0]);
        let g = parse_r_grid("0.5:1:0.25").unwrap();
        assert_eq!(g, vec![0.5, 0.75, 1.0]);
        assert!(parse_r_grid("1:0:0.1").is_err());
        assert!(parse_r_grid("x").is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(
            run(["nsf", "bell-chain", "--N", "2", "--p", "2", "--q2", "0.9"]),
            EXIT_INVALID
        );
        assert_eq!(
            run(["nsf", "bell-chain", "--N", "5", "--p", "4", "--q2", "0.9"]),
            EXIT_INVALID
        );
        assert_eq!(run(["nsf", "frobnicate"]), EXIT_INVALID);
        assert_eq!(run(["nsf", "verify", "--d-list", "6"]), EXIT_INVALID);
    }
}
