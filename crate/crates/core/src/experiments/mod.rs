//! Monte Carlo experiments. Each one is a set of trial-indexed phases whose
//! per-trial outcomes are integer counters; tallies are plain sums, so they
//! do not depend on thread count, scheduling or checkpoint boundaries.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::invasion::{run_invasion, InvasionTrace, StopRule};
use crate::stats::{lane, ratio_interval, Estimate};
use crate::weights::WeightField;

mod couplings;
mod defects;
mod disconnect;
mod kesten;
mod kpoint;
mod onearm;
mod ponds;
mod registry;
mod weights;

pub use couplings::{coupled_dominations, CouplingParams, CouplingReport, CouplingsExperiment};
pub use defects::{DefectExperiment, DefectParams};
pub use disconnect::{
    cluster_edges, no_disconnecting_edge, sample_iic, sample_iic_field, DisconnectExperiment, DisconnectParams, IicSample,
};
pub use kesten::{kesten_edge, KestenExperiment, KestenParams};
pub use kpoint::{KPointExperiment, KPointParams};
pub use onearm::{OneArmExperiment, OneArmParams};
pub use ponds::{ClusterSize, PondClustersExperiment, PondClustersParams, PondRadiiExperiment, PondRadiiParams, MIN_CONDITIONING};
pub use registry::{build, registry, RegistryEntry, EXPERIMENT_IDS};
pub use weights::{InvadedWeightsExperiment, InvadedWeightsParams};

pub const SCHEMA_VERSION: u32 = 1;

/// Successes below this make a binomial cell underpowered.
pub const MIN_SUCCESSES: u64 = 5;

pub const CONFIDENCE: f64 = 0.95;

pub mod flag {
    pub const NONE: &str = "";
    pub const UNDERPOWERED: &str = "underpowered";
    pub const BOUNDARY_UNCERTAIN: &str = "boundary_uncertain";
    /// Consistency counters; not estimates.
    pub const DIAGNOSTIC: &str = "diagnostic";
}

/// One line of an experiment CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub schema_version: u32,
    pub experiment: String,
    pub quantity: String,
    pub k: Option<i64>,
    pub m: Option<i64>,
    pub n: Option<i64>,
    pub horizon: Option<i64>,
    pub successes: Option<u64>,
    pub trials: Option<u64>,
    pub estimate: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub discards: u64,
    pub seed: u64,
    pub flag: String,
}

pub const CSV_COLUMNS: [&str; 15] = [
    "schema_version",
    "experiment",
    "quantity",
    "k",
    "m",
    "n",
    "horizon",
    "successes",
    "trials",
    "estimate",
    "ci_lo",
    "ci_hi",
    "discards",
    "seed",
    "flag",
];

/// Cell coordinates of a row.
#[derive(Clone, Copy, Debug, Default)]
pub struct Cell {
    pub k: Option<i64>,
    pub m: Option<i64>,
    pub n: Option<i64>,
    pub horizon: Option<i64>,
}

impl Cell {
    pub fn k(mut self, k: impl Into<i64>) -> Self {
        self.k = Some(k.into());
        self
    }
    pub fn m(mut self, m: impl Into<i64>) -> Self {
        self.m = Some(m.into());
        self
    }
    pub fn n(mut self, n: impl Into<i64>) -> Self {
        self.n = Some(n.into());
        self
    }
    pub fn horizon(mut self, h: impl Into<i64>) -> Self {
        self.horizon = Some(h.into());
        self
    }
}

/// Builds rows for one experiment and seed.
#[derive(Clone, Debug)]
pub struct RowBuilder {
    pub experiment: &'static str,
    pub seed: u64,
}

impl RowBuilder {
    fn base(&self, quantity: &str, cell: Cell) -> Row {
        debug_assert!(!quantity.contains(','), "quantity must not contain commas");
        Row {
            schema_version: SCHEMA_VERSION,
            experiment: self.experiment.into(),
            quantity: quantity.into(),
            k: cell.k,
            m: cell.m,
            n: cell.n,
            horizon: cell.horizon,
            successes: None,
            trials: None,
            estimate: f64::NAN,
            ci_lo: f64::NAN,
            ci_hi: f64::NAN,
            discards: 0,
            seed: self.seed,
            flag: flag::NONE.into(),
        }
    }

    /// Binomial frequency; underpowered below [`MIN_SUCCESSES`] successes.
    pub fn binomial(&self, quantity: &str, cell: Cell, successes: u64, trials: u64, discards: u64) -> Row {
        self.binomial_min(quantity, cell, successes, trials, discards, MIN_SUCCESSES)
    }

    /// Conditional frequency; underpowered when the conditioning event was
    /// seen fewer than `min_trials` times.
    pub fn conditional(&self, quantity: &str, cell: Cell, successes: u64, trials: u64, discards: u64, min_trials: u64) -> Row {
        let mut r = self.binomial_min(quantity, cell, successes, trials, discards, 0);
        if trials < min_trials {
            r.flag = flag::UNDERPOWERED.into();
        }
        r
    }

    fn binomial_min(&self, quantity: &str, cell: Cell, successes: u64, trials: u64, discards: u64, min: u64) -> Row {
        let e = Estimate::new(successes, trials, CONFIDENCE);
        let mut r = self.base(quantity, cell);
        r.successes = Some(successes);
        r.trials = Some(trials);
        r.discards = discards;
        if trials > 0 {
            r.estimate = e.estimate;
            r.ci_lo = e.ci_lo;
            r.ci_hi = e.ci_hi;
        }
        if successes < min || trials == 0 {
            r.flag = flag::UNDERPOWERED.into();
        }
        r
    }

    pub fn value(&self, quantity: &str, cell: Cell, estimate: f64, ci_lo: f64, ci_hi: f64, flag: &str) -> Row {
        let mut r = self.base(quantity, cell);
        r.estimate = estimate;
        r.ci_lo = ci_lo;
        r.ci_hi = ci_hi;
        r.flag = flag.into();
        r
    }

    /// A count that must be zero.
    pub fn diagnostic(&self, quantity: &str, cell: Cell, count: u64, checked: u64) -> Row {
        let mut r = self.base(quantity, cell);
        r.successes = Some(count);
        r.trials = Some(checked);
        r.estimate = count as f64;
        r.flag = flag::DIAGNOSTIC.into();
        r
    }

    /// `scale · a / b` from two binomial rows, with a log-scale interval.
    pub fn ratio(&self, quantity: &str, cell: Cell, a: &Row, b: &Row, scale: f64) -> Row {
        let est = |r: &Row| Estimate::new(r.successes.unwrap_or(0), r.trials.unwrap_or(0), CONFIDENCE);
        let (ea, eb) = (est(a), est(b));
        let (v, lo, hi) = ratio_interval(&ea, &eb, CONFIDENCE);
        let weak = a.flag == flag::UNDERPOWERED || b.flag == flag::UNDERPOWERED || v.is_nan();
        self.value(quantity, cell, scale * v, scale * lo, scale * hi, if weak { flag::UNDERPOWERED } else { flag::NONE })
    }
}

/// A trial-indexed phase: `trials` independent trials, each adding into
/// `width` counters.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Phase {
    pub name: String,
    pub trials: u64,
    pub width: usize,
}

pub trait Experiment: Sync {
    fn id(&self) -> &'static str;
    fn seed(&self) -> u64;
    fn phases(&self) -> Vec<Phase>;
    /// Adds the outcome of trial `i` of `phase` into `acc`.
    fn trial(&self, phase: usize, i: u64, acc: &mut [u64]);
    /// Turns final tallies (one per phase) into rows. Deterministic work
    /// that is not trial-indexed happens here.
    fn rows(&self, tallies: &[Vec<u64>]) -> Result<Vec<Row>>;

    fn builder(&self) -> RowBuilder {
        RowBuilder { experiment: self.id(), seed: self.seed() }
    }
}

/// Sums trials `range` of `phase` in parallel.
pub fn tally_block<E: Experiment + ?Sized>(exp: &E, phase: usize, width: usize, range: std::ops::Range<u64>) -> Vec<u64> {
    range
        .into_par_iter()
        .fold(
            || vec![0u64; width],
            |mut acc, i| {
                exp.trial(phase, i, &mut acc);
                acc
            },
        )
        .reduce(
            || vec![0u64; width],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        )
}

/// Runs every phase to completion and returns the rows, without
/// checkpoints.
pub fn run_rows<E: Experiment + ?Sized>(exp: &E) -> Result<Vec<Row>> {
    let tallies: Vec<Vec<u64>> = exp.phases().iter().enumerate().map(|(i, p)| tally_block(exp, i, p.width, 0..p.trials)).collect();
    exp.rows(&tallies)
}

pub fn write_csv<W: Write>(out: W, rows: &[Row]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(true).from_writer(out);
    if rows.is_empty() {
        w.write_record(CSV_COLUMNS)?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: std::io::Read>(input: R) -> Result<Vec<Row>> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != CSV_COLUMNS {
        return Err(crate::Error::Config(format!("unexpected CSV header: {}", header.join(","))));
    }
    r.deserialize().map(|x| x.map_err(Into::into)).collect()
}

/// Weights of invasion trial `i`.
pub fn invasion_field(seed: u64, i: u64) -> WeightField {
    WeightField::new(seed, WeightField::lane_stream(lane::INVASION, i))
}

/// Invades until `∂B(horizon)` is reached.
pub fn invade(w: &WeightField, horizon: i32) -> InvasionTrace {
    run_invasion(w, StopRule::radius(horizon)).expect("horizon >= 1")
}

/// `(log₂ n)^e`.
pub fn log2_pow(n: i64, e: i32) -> f64 {
    (n as f64).log2().powi(e)
}

/// Finds the row for `quantity` at `cell`.
pub fn find<'a>(rows: &'a [Row], quantity: &str, k: Option<i64>, m: Option<i64>, n: Option<i64>) -> Option<&'a Row> {
    rows.iter().find(|r| r.quantity == quantity && r.k == k && r.m == m && r.n == n)
}

/// Ratio between the largest and smallest of positive values.
pub fn spread(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    max / min
}
