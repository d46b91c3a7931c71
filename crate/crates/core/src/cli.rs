//! Command-line interface of the `ipl` binary.

use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::json;

use crate::error::{Error, Result};
use crate::experiments::registry;
use crate::oracle::{conformance, fixtures, invasion as oracle_invasion, ratio, ratio_to_f64, EdgeSet};
use crate::runner::{self, ExecOptions, RunConfig, OUTPUT_DIR_ENV};
use crate::scaling::estimate_pi;

pub const EXIT_OK: i32 = 0;
pub const EXIT_UNDERPOWERED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
/// I/O failures, failed oracle checks and nonzero diagnostic counters.
pub const EXIT_FAILURE: i32 = 3;

pub const ORACLE_COMMANDS: [&str; 4] = ["conformance", "invasion", "fixtures", "onearm"];

#[derive(Debug, Parser)]
#[command(name = "ipl", version, about = "Invasion percolation lab")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run an experiment config; outputs go to its output_dir, else $IPL_OUTPUT_DIR, else ./results.
    Run {
        config: PathBuf,
        /// Stop after this many checkpoint blocks.
        #[arg(long, hide = true)]
        max_blocks: Option<u64>,
    },
    /// Print the experiment registry as JSON.
    List,
    /// Exact checks against enumeration.
    Oracle {
        #[command(subcommand)]
        command: OracleCommand,
    },
    /// Recompute a finished run from its sidecar and compare.
    Replay {
        sidecar: PathBuf,
        /// Compare only this 0-based data row.
        #[arg(long)]
        row: Option<usize>,
    },
}

#[derive(Debug, Subcommand)]
pub enum OracleCommand {
    /// Detector conformance on B(1), B(2) and Ann(0,2).
    Conformance {
        /// Only the small instances (seconds instead of minutes).
        #[arg(long)]
        quick: bool,
    },
    /// Pond decomposition against all orderings of the 5-edge graphs.
    Invasion,
    /// Write exact-value fixtures as JSON.
    Fixtures { out: PathBuf },
    /// Exact P(0 <-> dB(1)) at p = 1/2 against a Monte Carlo estimate.
    Onearm {
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

fn error_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Parameter(_) | Error::Json(_) => EXIT_CONFIG,
        _ => EXIT_FAILURE,
    }
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            error_code(&e)
        }
    }
}

fn dispatch(cmd: Command) -> Result<i32> {
    match cmd {
        Command::Run { config, max_blocks } => run(config, max_blocks),
        Command::List => {
            let out = json!({
                "experiments": registry(),
                "oracle": ORACLE_COMMANDS,
                "output_dir_env": OUTPUT_DIR_ENV,
            });
            println!("{}", serde_json::to_string_pretty(&out)?);
            Ok(EXIT_OK)
        }
        Command::Oracle { command } => oracle(command),
        Command::Replay { sidecar, row } => {
            let r = runner::replay(&sidecar, row)?;
            println!("{}: recomputed {} rows", sidecar.display(), r.rows.len());
            let mut ok = r.csv_matches;
            println!("csv sha256 {}", if r.csv_matches { "matches" } else { "DIFFERS" });
            if let Some((row, same)) = r.row {
                println!("row {}: {} {} = {} [{}, {}] {}", row_label(&row), row.quantity, row.flag, row.estimate, row.ci_lo, row.ci_hi, if same { "matches" } else { "DIFFERS" });
                ok &= same;
            }
            Ok(if ok { EXIT_OK } else { EXIT_FAILURE })
        }
    }
}

fn row_label(r: &crate::experiments::Row) -> String {
    let f = |name: &str, v: Option<i64>| v.map(|v| format!("{name}={v}")).unwrap_or_default();
    [f("k", r.k), f("m", r.m), f("n", r.n), f("horizon", r.horizon)].iter().filter(|s| !s.is_empty()).cloned().collect::<Vec<_>>().join(",")
}

fn run(path: PathBuf, max_blocks: Option<u64>) -> Result<i32> {
    let cfg = RunConfig::load(&path)?;
    let out = runner::execute(&cfg, &ExecOptions { max_blocks })?;
    if !out.completed {
        println!("stopped early; checkpoint at {}", out.checkpoint_path.display());
        return Ok(EXIT_OK);
    }
    println!("{}", out.csv_path.display());
    println!("{}", out.sidecar_path.display());
    let (weak, bad) = (out.underpowered(), out.violations());
    println!("{} rows, {} underpowered, {} diagnostic violations", out.rows.len(), weak, bad);
    Ok(if bad > 0 {
        EXIT_FAILURE
    } else if weak > 0 {
        EXIT_UNDERPOWERED
    } else {
        EXIT_OK
    })
}

fn oracle(cmd: OracleCommand) -> Result<i32> {
    match cmd {
        OracleCommand::Conformance { quick } => {
            let start = Instant::now();
            let checks = if quick { fixtures::small_checks()? } else { conformance::run_all()? };
            let mut ok = true;
            for c in &checks {
                ok &= c.passed();
                let kind = if c.exhaustive { "exhaustive" } else { "partial" };
                println!(
                    "{} {} on {} ({} edges, {} configs, {kind}): {} mismatches",
                    if c.passed() { "ok  " } else { "FAIL" },
                    c.detector,
                    c.instance,
                    c.edges,
                    c.configs,
                    c.mismatches
                );
            }
            println!("{:.1} s", start.elapsed().as_secs_f64());
            Ok(if ok { EXIT_OK } else { EXIT_FAILURE })
        }
        OracleCommand::Invasion => {
            let mut ok = true;
            for (name, g) in oracle_invasion::five_edge_graphs() {
                let c = oracle_invasion::pond_conformance(name, &g)?;
                ok &= c.mismatches == 0;
                println!("{} {}: {} orderings, {} mismatches", if c.mismatches == 0 { "ok  " } else { "FAIL" }, c.graph, c.orderings, c.mismatches);
            }
            Ok(if ok { EXIT_OK } else { EXIT_FAILURE })
        }
        OracleCommand::Fixtures { out } => {
            let f = fixtures::from_checks(&fixtures::small_checks()?);
            fixtures::write(&out, &f)?;
            println!("{} fixtures -> {}", f.len(), out.display());
            Ok(EXIT_OK)
        }
        OracleCommand::Onearm { trials, seed } => {
            let c = conformance::check_origin_connects(1, EdgeSet::ball(1)?, "B(1)")?;
            let half = ratio(1, 2).to_string();
            let exact = c.values.iter().find(|v| v.p == half).ok_or_else(|| Error::Config("no value at p = 1/2".into()))?;
            let (num, den) = exact.reference.split_once('/').unwrap_or((&exact.reference, "1"));
            let pi1 = ratio_to_f64(&ratio(num.parse().unwrap_or(0), den.parse().unwrap_or(1)));
            let est = estimate_pi(1, trials, seed)?;
            let z = (est.estimate - pi1) / (pi1 * (1.0 - pi1) / trials as f64).sqrt();
            let ok = c.passed() && z.abs() <= 3.0;
            println!("pi(1) exact {} = {pi1:.6}; estimate {:.6} over {trials} trials; z = {z:.2}", exact.reference, est.estimate);
            Ok(if ok { EXIT_OK } else { EXIT_FAILURE })
        }
    }
}
