//! Disconnecting edges of the invasion cluster against the critical cluster
//! conditioned to reach distance `N`.

use rustc_hash::FxHashSet;
use serde::{Deserialize, Serialize};

use super::{invasion_field, Cell, Experiment, Phase, Row, CONFIDENCE};
use crate::connectivity::{disconnecting_edges, max_disjoint_arms, origin_cluster, origin_connects};
use crate::error::{Error, Result};
use crate::experiments::flag;
use crate::invasion::{decompose_ponds_with, run_invasion, PondOptions, StopRule};
use crate::lattice::{Edge, Region, Site};
use crate::scaling::P_C;
use crate::stats::{lane, product_interval, Estimate};
use crate::weights::{derive_seed, threshold_config, Config, EdgeStatus, Thresholded, WeightField};

/// A critical configuration on `B(N)` conditioned on `{0 ↔ ∂B(N)}`.
#[derive(Clone, Debug)]
pub struct IicSample {
    pub config: Config,
    pub field: WeightField,
    pub attempts: u64,
}

/// Lazy rejection sampler: returns the accepted weight field and the number
/// of attempts, or `None` after `max_attempts` rejections.
pub fn sample_iic_field(n: i32, max_attempts: u64, seed: u64) -> Option<(WeightField, u64)> {
    (0..max_attempts).find_map(|a| {
        let w = WeightField::new(seed, WeightField::lane_stream(lane::IIC, a));
        origin_connects(&Thresholded::new(&w, P_C), n).then_some((w, a + 1))
    })
}

/// Rejection sampler for the finite-`N` conditioned law.
pub fn sample_iic(n: i32, max_attempts: u64, seed: u64) -> Result<IicSample> {
    if n < 1 {
        return Err(Error::Parameter(format!("N must be >= 1, got {n}")));
    }
    let (field, attempts) = sample_iic_field(n, max_attempts, seed).ok_or(Error::Exhausted(max_attempts))?;
    Ok(IicSample { config: threshold_config(&field, Region::ball(n)?, P_C), field, attempts })
}

/// Whether `edges` has no disconnecting edge with both endpoints in
/// `Ann(m, n)`, i.e. at norms in `(m, n]`. The separating boundary is
/// `boundary`.
pub fn no_disconnecting_edge(edges: &[Edge], boundary: &[Site], m: i32, n: i32) -> Result<bool> {
    let bridges = disconnecting_edges(edges, Site::ORIGIN, boundary)?;
    Ok(!bridges.iter().any(|e| {
        let (a, b) = e.endpoints();
        a.norm() > m && b.norm() > m && a.norm() <= n && b.norm() <= n
    }))
}

/// Open edges among the sites of the origin's cluster in `B(N)`.
pub fn cluster_edges<S: EdgeStatus>(status: &S, n: i32) -> (Vec<Edge>, Vec<Site>) {
    let sites = origin_cluster(status, n);
    let set: FxHashSet<Site> = sites.iter().copied().collect();
    let mut edges = Vec::new();
    for s in &sites {
        for (e, nb) in s.incident_edges().into_iter().zip(s.neighbors()) {
            if e.a() == *s && set.contains(&nb) && status.is_open(e) {
                edges.push(e);
            }
        }
    }
    let boundary = sites.into_iter().filter(|s| s.norm() == n).collect();
    (edges, boundary)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DisconnectParams {
    /// `(m, n, N)` cells.
    pub cells: Vec<[i32; 3]>,
    pub trials: u64,
    pub iic_max_attempts: u64,
    pub p_ref: f64,
    pub confirm_factor: i32,
}

impl Default for DisconnectParams {
    fn default() -> Self {
        DisconnectParams { cells: vec![[4, 16, 64], [8, 32, 128]], trials: 10_000, iic_max_attempts: 10_000, p_ref: 0.5, confirm_factor: 4 }
    }
}

impl DisconnectParams {
    pub fn validate(&self) -> Result<()> {
        if self.cells.is_empty() {
            return Err(Error::Parameter("cells must be nonempty".into()));
        }
        for &[m, n, big] in &self.cells {
            if !(1 <= m && m < n && 4 * n <= big) {
                return Err(Error::Parameter(format!("cell (m={m}, n={n}, N={big}) needs 1 <= m < n <= N/4")));
            }
        }
        if self.iic_max_attempts == 0 {
            return Err(Error::Parameter("iic_max_attempts must be >= 1".into()));
        }
        if !(self.p_ref > 0.0 && self.p_ref < 1.0) || self.confirm_factor < 1 {
            return Err(Error::Parameter("need 0 < p_ref < 1 and confirm_factor >= 1".into()));
        }
        Ok(())
    }
}

const IIC_TAG: u64 = 0x11c;

// per-cell counters
const IPC_D: usize = 0;
const IIC_D: usize = 1;
const IIC_FAIL: usize = 2;
const ARMS1: usize = 3;
const ARMS2: usize = 4;
const STRIDE: usize = 5;

/// For every cell: no disconnecting edge in `Ann(m, n)` for the invasion
/// run until it reaches `∂B(N)`, the same for the conditioned critical
/// cluster, and the one- and two-arm frequencies of `Ann(m, n)`.
///
/// The invasion is run once to the largest `N`; smaller cells use the
/// prefix up to the first arrival at their own `∂B(N)`.
pub struct DisconnectExperiment {
    pub params: DisconnectParams,
    pub seed: u64,
}

impl DisconnectExperiment {
    pub fn new(params: DisconnectParams, seed: u64) -> Result<Self> {
        params.validate()?;
        Ok(DisconnectExperiment { params, seed })
    }

    fn diag(&self) -> usize {
        STRIDE * self.params.cells.len()
    }
}

impl Experiment for DisconnectExperiment {
    fn id(&self) -> &'static str {
        "exp_disconnect"
    }

    fn seed(&self) -> u64 {
        self.seed
    }

    fn phases(&self) -> Vec<Phase> {
        vec![Phase { name: "trials".into(), trials: self.params.trials, width: self.diag() + 2 }]
    }

    fn trial(&self, _phase: usize, i: u64, acc: &mut [u64]) {
        let p = &self.params;
        let big = p.cells.iter().map(|c| c[2]).max().unwrap();
        let w = invasion_field(self.seed, i);
        let trace = run_invasion(&w, StopRule::radius(big)).expect("stop rule");
        let d = decompose_ponds_with(&trace, PondOptions { p_ref: p.p_ref, confirm_factor: p.confirm_factor })
            .expect("nonempty trace");
        let arms_field = WeightField::new(self.seed, WeightField::lane_stream(lane::ARMS, i));
        let arms_status = Thresholded::new(&arms_field, P_C);

        for (c, &[m, n, big_c]) in p.cells.iter().enumerate() {
            let s = c * STRIDE;
            // first step at which the invasion reaches ∂B(N)
            let (hit, step) = trace.sites().iter().find(|(x, _)| x.norm() >= big_c).copied().expect("run reaches the largest N");
            let prefix = &trace.edges()[..step as usize];
            acc[s + IPC_D] += no_disconnecting_edge(prefix, &[hit], m, n).expect("prefix graph") as u64;

            let bridges: FxHashSet<Edge> =
                disconnecting_edges(prefix, Site::ORIGIN, &[hit]).expect("prefix graph").into_iter().collect();
            for o in d.outlets().iter().filter(|o| o.confirmed && o.index < step as usize) {
                acc[self.diag()] += !bridges.contains(&o.edge) as u64;
                acc[self.diag() + 1] += 1;
            }

            let arms = max_disjoint_arms(&arms_status, m, n).expect("annulus");
            acc[s + ARMS1] += (arms >= 1) as u64;
            acc[s + ARMS2] += (arms >= 2) as u64;

            let iic_seed = derive_seed(self.seed, IIC_TAG, i * p.cells.len() as u64 + c as u64);
            match sample_iic_field(big_c, p.iic_max_attempts, iic_seed) {
                Some((field, _)) => {
                    let (edges, boundary) = cluster_edges(&Thresholded::new(&field, P_C), big_c);
                    acc[s + IIC_D] += no_disconnecting_edge(&edges, &boundary, m, n).expect("cluster graph") as u64;
                }
                None => acc[s + IIC_FAIL] += 1,
            }
        }
    }

    fn rows(&self, tallies: &[Vec<u64>]) -> Result<Vec<Row>> {
        let t = &tallies[0];
        let p = &self.params;
        let b = self.builder();
        let mut rows = Vec::new();
        for (c, &[m, n, big]) in p.cells.iter().enumerate() {
            let s = c * STRIDE;
            let cell = Cell::default().m(m).n(n).horizon(big);
            let ipc = b.binomial("P(IPC no disconnecting edge)", cell, t[s + IPC_D], p.trials, 0);
            let iic = b.binomial("nu_N(no disconnecting edge)", cell, t[s + IIC_D], p.trials - t[s + IIC_FAIL], t[s + IIC_FAIL]);
            let a1 = b.binomial("P(A1)", cell, t[s + ARMS1], p.trials, 0);
            let a2 = b.binomial("P(A2)", cell, t[s + ARMS2], p.trials, 0);
            let upper = b.ratio("IPC/A2", cell, &ipc, &a2, 1.0);
            let est = |r: &Row| Estimate::new(r.successes.unwrap_or(0), r.trials.unwrap_or(0), CONFIDENCE);
            let (v, lo, hi) = product_interval(&[est(&iic), est(&a1)], &[est(&a2)], CONFIDENCE);
            let weak = [&iic, &a1, &a2].iter().any(|r| r.flag == flag::UNDERPOWERED) || v.is_nan();
            let lower = b.value("nu_N*A1/A2", cell, v, lo, hi, if weak { flag::UNDERPOWERED } else { flag::NONE });
            rows.extend([ipc, iic, a1, a2, upper, lower]);
        }
        let d = self.diag();
        rows.push(b.diagnostic("confirmed outlet not disconnecting", Cell::default(), t[d], t[d + 1]));
        Ok(rows)
    }
}
