//! Config-driven execution with checkpoints, CSV output and a JSON sidecar.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::experiments::{self, flag, invade, invasion_field, tally_block, Experiment, Phase, Row, SCHEMA_VERSION};
use crate::invasion::write_trace;

/// Output directory used when a config does not name one.
pub const OUTPUT_DIR_ENV: &str = "IPL_OUTPUT_DIR";
pub const DEFAULT_OUTPUT_DIR: &str = "results";

/// Acceptance bands frozen after the pilot runs.
pub const ACCEPTANCE_BANDS: &str = include_str!("../../../configs/acceptance.json");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceExport {
    /// Traces of invasion trials `0..trials` are written.
    pub trials: u64,
    pub horizon: i32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: String,
    #[serde(default)]
    pub params: Value,
    pub seed: u64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    /// Trials per checkpoint block; 0 disables checkpoints.
    #[serde(default = "default_interval")]
    pub checkpoint_interval: u64,
    /// Worker threads; the rayon default when absent.
    #[serde(default)]
    pub threads: Option<usize>,
    /// File stem for the outputs; the experiment id when absent.
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub export_traces: Option<TraceExport>,
}

fn default_interval() -> u64 {
    10_000
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.threads == Some(0) {
            return Err(Error::Config("threads must be >= 1".into()));
        }
        if let Some(n) = &self.name {
            if n.is_empty() || n.contains(['/', '\\']) {
                return Err(Error::Config(format!("name {n:?} is not a plain file stem")));
            }
        }
        if let Some(t) = &self.export_traces {
            if t.horizon < 1 {
                return Err(Error::Config("export_traces.horizon must be >= 1".into()));
            }
        }
        self.experiment().map(|_| ())
    }

    pub fn experiment(&self) -> Result<Box<dyn Experiment>> {
        experiments::build(&self.experiment, self.params.clone(), self.seed)
    }

    pub fn output_dir(&self) -> PathBuf {
        match &self.output_dir {
            Some(d) => d.clone(),
            None => std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| DEFAULT_OUTPUT_DIR.into()),
        }
    }

    pub fn stem(&self) -> String {
        self.name.clone().unwrap_or_else(|| self.experiment.clone())
    }

    /// Identifies the work a checkpoint belongs to. Thread count and paths
    /// do not change results and are left out.
    pub fn fingerprint(&self) -> String {
        let key = serde_json::json!({
            "experiment": self.experiment,
            "params": self.params,
            "seed": self.seed,
            "checkpoint_interval": self.checkpoint_interval,
            "version": env!("CARGO_PKG_VERSION"),
        });
        sha256_hex(key.to_string().as_bytes())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub fingerprint: String,
    pub phase: usize,
    pub next_trial: u64,
    pub tallies: Vec<Vec<u64>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Software {
    pub name: String,
    pub version: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Sidecar {
    pub schema_version: u32,
    pub software: Software,
    pub experiment: String,
    pub seed: u64,
    /// The run config exactly as given.
    pub config: RunConfig,
    pub phases: Vec<Phase>,
    pub tallies: Vec<Vec<u64>>,
    pub csv_file: String,
    pub csv_sha256: String,
    pub rows: usize,
    pub underpowered_rows: usize,
    pub discards: u64,
    pub diagnostic_violations: u64,
    pub resumed: bool,
    pub wall_clock_seconds: f64,
    pub acceptance_bands: Value,
}

#[derive(Clone, Debug, Default)]
pub struct ExecOptions {
    /// Stop after this many checkpoint blocks, leaving the checkpoint on
    /// disk, as an interrupted run would.
    pub max_blocks: Option<u64>,
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub completed: bool,
    pub csv_path: PathBuf,
    pub sidecar_path: PathBuf,
    pub checkpoint_path: PathBuf,
    pub rows: Vec<Row>,
}

impl RunOutcome {
    pub fn underpowered(&self) -> usize {
        self.rows.iter().filter(|r| r.flag == flag::UNDERPOWERED).count()
    }

    pub fn violations(&self) -> u64 {
        diagnostic_violations(&self.rows)
    }
}

pub fn diagnostic_violations(rows: &[Row]) -> u64 {
    rows.iter().filter(|r| r.flag == flag::DIAGNOSTIC).map(|r| r.successes.unwrap_or(0)).sum()
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn load_checkpoint(path: &Path, fingerprint: &str, phases: &[Phase]) -> Result<Option<Checkpoint>> {
    if !path.exists() {
        return Ok(None);
    }
    let c: Checkpoint = serde_json::from_str(&fs::read_to_string(path)?)?;
    if c.fingerprint != fingerprint {
        return Err(Error::Config(format!("checkpoint {} belongs to a different config; remove it to start over", path.display())));
    }
    let shape_ok = c.tallies.len() == phases.len() && c.tallies.iter().zip(phases).all(|(t, p)| t.len() == p.width);
    if !shape_ok || c.phase > phases.len() {
        return Err(Error::Config(format!("checkpoint {} does not match the experiment's phases", path.display())));
    }
    Ok(Some(c))
}

/// Runs `cfg`, resuming from a matching checkpoint when one exists.
pub fn execute(cfg: &RunConfig, opts: &ExecOptions) -> Result<RunOutcome> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| execute_in_pool(cfg, opts))
}

fn execute_in_pool(cfg: &RunConfig, opts: &ExecOptions) -> Result<RunOutcome> {
    let start = Instant::now();
    let exp = cfg.experiment()?;
    let dir = cfg.output_dir();
    fs::create_dir_all(&dir)?;
    let stem = cfg.stem();
    let csv_path = dir.join(format!("{stem}.csv"));
    let sidecar_path = dir.join(format!("{stem}.json"));
    let checkpoint_path = dir.join(format!("{stem}.checkpoint.json"));

    let phases = exp.phases();
    let fingerprint = cfg.fingerprint();
    let resumed = load_checkpoint(&checkpoint_path, &fingerprint, &phases)?;
    let was_resumed = resumed.is_some();
    let mut state = resumed.unwrap_or_else(|| Checkpoint {
        fingerprint,
        phase: 0,
        next_trial: 0,
        tallies: phases.iter().map(|p| vec![0; p.width]).collect(),
    });

    let mut blocks = 0u64;
    while state.phase < phases.len() {
        let ph = &phases[state.phase];
        if state.next_trial >= ph.trials {
            state.phase += 1;
            state.next_trial = 0;
            continue;
        }
        if opts.max_blocks == Some(blocks) {
            return Ok(RunOutcome { completed: false, csv_path, sidecar_path, checkpoint_path, rows: Vec::new() });
        }
        let block = if cfg.checkpoint_interval == 0 { ph.trials } else { cfg.checkpoint_interval };
        let end = (state.next_trial + block).min(ph.trials);
        let t = tally_block(exp.as_ref(), state.phase, ph.width, state.next_trial..end);
        for (a, b) in state.tallies[state.phase].iter_mut().zip(t) {
            *a += b;
        }
        state.next_trial = end;
        blocks += 1;
        if cfg.checkpoint_interval > 0 {
            write_atomic(&checkpoint_path, serde_json::to_string(&state)?.as_bytes())?;
        }
    }

    let rows = exp.rows(&state.tallies)?;
    let mut csv = Vec::new();
    experiments::write_csv(&mut csv, &rows)?;
    write_atomic(&csv_path, &csv)?;

    if let Some(t) = &cfg.export_traces {
        let tdir = dir.join(format!("{stem}.traces"));
        fs::create_dir_all(&tdir)?;
        for i in 0..t.trials {
            let trace = invade(&invasion_field(cfg.seed, i), t.horizon);
            let mut buf = Vec::new();
            write_trace(&trace, &mut buf)?;
            write_atomic(&tdir.join(format!("trace_{i}.csv")), &buf)?;
        }
    }

    let sidecar = Sidecar {
        schema_version: SCHEMA_VERSION,
        software: Software { name: env!("CARGO_PKG_NAME").into(), version: env!("CARGO_PKG_VERSION").into() },
        experiment: cfg.experiment.clone(),
        seed: cfg.seed,
        config: cfg.clone(),
        phases,
        tallies: state.tallies,
        csv_file: csv_path.file_name().unwrap().to_string_lossy().into_owned(),
        csv_sha256: sha256_hex(&csv),
        rows: rows.len(),
        underpowered_rows: rows.iter().filter(|r| r.flag == flag::UNDERPOWERED).count(),
        discards: rows.iter().map(|r| r.discards).sum(),
        diagnostic_violations: diagnostic_violations(&rows),
        resumed: was_resumed,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        acceptance_bands: serde_json::from_str(ACCEPTANCE_BANDS)?,
    };
    let mut text = serde_json::to_string_pretty(&sidecar)?;
    text.push('\n');
    write_atomic(&sidecar_path, text.as_bytes())?;
    if checkpoint_path.exists() {
        fs::remove_file(&checkpoint_path)?;
    }
    Ok(RunOutcome { completed: true, csv_path, sidecar_path, checkpoint_path, rows })
}

/// Result of recomputing a finished run from its sidecar.
#[derive(Clone, Debug)]
pub struct ReplayReport {
    pub sidecar: Sidecar,
    pub rows: Vec<Row>,
    /// The recomputed CSV hashes to the recorded value.
    pub csv_matches: bool,
    /// The requested row, recomputed, and whether it equals the one in the
    /// recorded CSV.
    pub row: Option<(Row, bool)>,
}

/// Recomputes a run from the config echoed in its sidecar, without touching
/// the run's output files.
pub fn replay(sidecar_path: &Path, row: Option<usize>) -> Result<ReplayReport> {
    let sidecar: Sidecar = serde_json::from_str(&fs::read_to_string(sidecar_path)?).map_err(|e| Error::Config(format!("{}: {e}", sidecar_path.display())))?;
    let cfg = &sidecar.config;
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let rows = pool.install(|| experiments::run_rows(cfg.experiment()?.as_ref()))?;
    let mut csv = Vec::new();
    experiments::write_csv(&mut csv, &rows)?;
    let csv_matches = sha256_hex(&csv) == sidecar.csv_sha256;
    let row = match row {
        None => None,
        Some(i) => {
            let r = rows.get(i).cloned().ok_or_else(|| Error::Config(format!("row {i} out of range ({} rows)", rows.len())))?;
            let recorded_path = sidecar_path.with_file_name(&sidecar.csv_file);
            let recorded = experiments::read_csv(fs::File::open(recorded_path)?)?;
            let same = recorded.get(i).is_some_and(|x| same_row(x, &r));
            Some((r, same))
        }
    };
    Ok(ReplayReport { sidecar, rows, csv_matches, row })
}

/// Row equality that treats NaN fields as equal.
fn same_row(a: &Row, b: &Row) -> bool {
    let f = |x: f64, y: f64| x.to_bits() == y.to_bits() || (x.is_nan() && y.is_nan());
    a.quantity == b.quantity
        && (a.k, a.m, a.n, a.horizon, a.successes, a.trials, a.discards, a.seed) == (b.k, b.m, b.n, b.horizon, b.successes, b.trials, b.discards, b.seed)
        && f(a.estimate, b.estimate)
        && f(a.ci_lo, b.ci_lo)
        && f(a.ci_hi, b.ci_hi)
        && a.flag == b.flag
}
