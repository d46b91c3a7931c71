//! Pond radii against the one-arm probability, and large critical clusters
//! inside the first ponds.

use serde::{Deserialize, Serialize};

use super::{invade, invasion_field, log2_pow, Cell, Experiment, Phase, Row};
use crate::connectivity::origin_reach_radius;
use crate::error::{Error, Result};
use crate::invasion::{decompose_ponds_with, PondOptions};
use crate::weights::Thresholded;

/// Conditional cells with fewer conditioning hits are underpowered.
pub const MIN_CONDITIONING: u64 = 50;

/// Radii need `headroom · n ≤ horizon`.
pub const RADII_HEADROOM: i32 = 4;
pub const CLUSTERS_HEADROOM: i32 = 8;

fn check_grid(grid: &[i32], horizon: i32, headroom: i32) -> Result<()> {
    if grid.is_empty() || grid.iter().any(|&n| n < 1) {
        return Err(Error::Parameter("grid must be nonempty with entries >= 1".into()));
    }
    if let Some(n) = grid.iter().find(|&&n| headroom * n > horizon) {
        return Err(Error::Parameter(format!("n = {n} exceeds horizon/{headroom} = {}", horizon / headroom)));
    }
    Ok(())
}

fn check_ref(p_ref: f64, confirm_factor: i32) -> Result<()> {
    if !(p_ref > 0.0 && p_ref < 1.0) || confirm_factor < 1 {
        return Err(Error::Parameter("need 0 < p_ref < 1 and confirm_factor >= 1".into()));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PondRadiiParams {
    pub k_max: usize,
    pub n_grid: Vec<i32>,
    pub trials: u64,
    pub horizon: i32,
    pub p_ref: f64,
    pub confirm_factor: i32,
}

impl Default for PondRadiiParams {
    fn default() -> Self {
        PondRadiiParams { k_max: 2, n_grid: vec![16, 32, 64], trials: 10_000, horizon: 512, p_ref: 0.5, confirm_factor: 4 }
    }
}

impl PondRadiiParams {
    pub fn validate(&self) -> Result<()> {
        if self.k_max == 0 {
            return Err(Error::Parameter("k_max must be >= 1".into()));
        }
        check_grid(&self.n_grid, self.horizon, RADII_HEADROOM)?;
        check_ref(self.p_ref, self.confirm_factor)
    }
}

/// `P(R̂_k ≥ n)`, `P(R̄_k ≥ n)` and `π(n)` on shared weights.
///
/// `R̂_k ≥ n` is decided from the lower bound of an unconfirmed outlet
/// when that bound already reaches `n`; otherwise an unconfirmed outlet
/// discards the trial for that cell only. `R̄_k` uses confirmed ponds only.
pub struct PondRadiiExperiment {
    pub params: PondRadiiParams,
    pub seed: u64,
}

impl PondRadiiExperiment {
    pub fn new(params: PondRadiiParams, seed: u64) -> Result<Self> {
        params.validate()?;
        Ok(PondRadiiExperiment { params, seed })
    }

    fn slot(&self, k: usize, j: usize) -> usize {
        4 * ((k - 1) * self.params.n_grid.len() + j)
    }

    fn pi_slot(&self, j: usize) -> usize {
        4 * self.params.k_max * self.params.n_grid.len() + j
    }

    fn diag_slot(&self) -> usize {
        self.pi_slot(self.params.n_grid.len())
    }
}

impl Experiment for PondRadiiExperiment {
    fn id(&self) -> &'static str {
        "exp_pond_radii"
    }

    fn seed(&self) -> u64 {
        self.seed
    }

    fn phases(&self) -> Vec<Phase> {
        vec![Phase { name: "trials".into(), trials: self.params.trials, width: self.diag_slot() + 3 }]
    }

    fn trial(&self, _phase: usize, i: u64, acc: &mut [u64]) {
        let p = &self.params;
        let w = invasion_field(self.seed, i);
        let n_max = *p.n_grid.iter().max().unwrap();
        let reach = origin_reach_radius(&Thresholded::new(&w, p.p_ref), n_max);
        for (j, &n) in p.n_grid.iter().enumerate() {
            acc[self.pi_slot(j)] += (reach >= n) as u64;
        }

        let trace = invade(&w, p.horizon);
        let d = decompose_ponds_with(&trace, PondOptions { p_ref: p.p_ref, confirm_factor: p.confirm_factor })
            .expect("nonempty trace");
        let confirmed = d.confirmed_prefix();
        let diag = self.diag_slot();
        let mut prev: Option<i32> = None;
        for k in 1..=p.k_max {
            let (hat, exact) = d.hat_radius_bound(k).expect("k >= 1");
            let bar = (k <= confirmed).then(|| d.raw_radii()[k - 1].1);
            for (j, &n) in p.n_grid.iter().enumerate() {
                let s = self.slot(k, j);
                if hat >= n {
                    acc[s] += 1;
                } else if !exact {
                    acc[s + 1] += 1;
                }
                match bar {
                    Some(b) => acc[s + 2] += (b >= n) as u64,
                    None => acc[s + 3] += 1,
                }
            }
            if exact {
                if k == 1 {
                    // C(0) ⊂ V̂_1
                    acc[diag] += (reach.min(n_max) > hat) as u64;
                    acc[diag + 2] += 1;
                }
                if let Some(q) = prev {
                    acc[diag + 1] += (hat < q) as u64;
                }
                prev = Some(hat);
            }
        }
    }

    fn rows(&self, tallies: &[Vec<u64>]) -> Result<Vec<Row>> {
        let t = &tallies[0];
        let p = &self.params;
        let b = self.builder();
        let mut rows = Vec::new();
        let pis: Vec<Row> = p
            .n_grid
            .iter()
            .enumerate()
            .map(|(j, &n)| b.binomial("pi", Cell::default().n(n).horizon(p.horizon), t[self.pi_slot(j)], p.trials, 0))
            .collect();
        for k in 1..=p.k_max {
            for (j, &n) in p.n_grid.iter().enumerate() {
                let s = self.slot(k, j);
                let cell = Cell::default().k(k as i64).n(n).horizon(p.horizon);
                rows.push(b.binomial("P(Rhat_k>=n)", cell, t[s], p.trials - t[s + 1], t[s + 1]));
                rows.push(b.binomial("P(Rbar_k>=n)", cell, t[s + 2], p.trials - t[s + 3], t[s + 3]));
            }
        }
        rows.extend(pis.iter().cloned());
        for k in 1..=p.k_max {
            for (j, &n) in p.n_grid.iter().enumerate() {
                let cell = Cell::default().k(k as i64).n(n).horizon(p.horizon);
                let hat = rows[2 * ((k - 1) * p.n_grid.len() + j)].clone();
                rows.push(b.ratio("r_k", cell, &hat, &pis[j], 1.0 / log2_pow(n as i64, k as i32 - 1)));
            }
        }
        let d = self.diag_slot();
        let cell = Cell::default().horizon(p.horizon);
        rows.push(b.diagnostic("C0 radius above Rhat_1", cell, t[d], t[d + 2]));
        rows.push(b.diagnostic("Rhat_k decreasing in k", cell, t[d + 1], p.trials));
        Ok(rows)
    }
}

/// How the size of a critical cluster is measured.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClusterSize {
    /// L∞ diameter.
    Diameter,
    /// Number of sites.
    Volume,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PondClustersParams {
    /// Required number of disjoint clusters.
    pub k: usize,
    pub n_grid: Vec<i32>,
    /// Ponds `1..=m_max` are scanned for `U(m, K, N)`.
    pub m_max: usize,
    pub size: ClusterSize,
    pub trials: u64,
    pub horizon: i32,
    pub p_ref: f64,
    pub confirm_factor: i32,
}

impl Default for PondClustersParams {
    fn default() -> Self {
        PondClustersParams {
            k: 2,
            n_grid: vec![8, 16],
            m_max: 3,
            size: ClusterSize::Diameter,
            trials: 10_000,
            horizon: 128,
            p_ref: 0.5,
            confirm_factor: 4,
        }
    }
}

impl PondClustersParams {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.m_max == 0 {
            return Err(Error::Parameter("k and m_max must be >= 1".into()));
        }
        check_grid(&self.n_grid, self.horizon, CLUSTERS_HEADROOM)?;
        check_ref(self.p_ref, self.confirm_factor)
    }
}

/// `P(U(1, K, N) | R̂_1 ≥ N)`, and `P(U(m, K, N))` for the first few ponds.
pub struct PondClustersExperiment {
    pub params: PondClustersParams,
    pub seed: u64,
}

impl PondClustersExperiment {
    pub fn new(params: PondClustersParams, seed: u64) -> Result<Self> {
        params.validate()?;
        Ok(PondClustersExperiment { params, seed })
    }

    fn stride(&self) -> usize {
        3 + 2 * self.params.m_max
    }
}

impl Experiment for PondClustersExperiment {
    fn id(&self) -> &'static str {
        "exp_pond_clusters"
    }

    fn seed(&self) -> u64 {
        self.seed
    }

    fn phases(&self) -> Vec<Phase> {
        vec![Phase { name: "trials".into(), trials: self.params.trials, width: self.stride() * self.params.n_grid.len() }]
    }

    fn trial(&self, _phase: usize, i: u64, acc: &mut [u64]) {
        let p = &self.params;
        let w = invasion_field(self.seed, i);
        let trace = invade(&w, p.horizon);
        let d = decompose_ponds_with(&trace, PondOptions { p_ref: p.p_ref, confirm_factor: p.confirm_factor })
            .expect("nonempty trace");
        let confirmed = d.confirmed_prefix();
        let sizes: Vec<Vec<i64>> = (1..=p.m_max.min(confirmed))
            .map(|m| {
                d.open_clusters(m, p.p_ref)
                    .iter()
                    .map(|c| match p.size {
                        ClusterSize::Diameter => c.diameter as i64,
                        ClusterSize::Volume => c.size as i64,
                    })
                    .collect()
            })
            .collect();
        let u = |m: usize, n: i32| sizes[m - 1].iter().filter(|&&s| s >= n as i64).count() >= p.k;
        for (j, &n) in p.n_grid.iter().enumerate() {
            let s = j * self.stride();
            if confirmed == 0 {
                acc[s + 2] += 1;
            } else if d.raw_radii()[0].0 >= n {
                acc[s] += 1;
                acc[s + 1] += u(1, n) as u64;
            }
            for m in 1..=p.m_max {
                let c = s + 3 + 2 * (m - 1);
                if m <= confirmed {
                    acc[c] += u(m, n) as u64;
                } else {
                    acc[c + 1] += 1;
                }
            }
        }
    }

    fn rows(&self, tallies: &[Vec<u64>]) -> Result<Vec<Row>> {
        let t = &tallies[0];
        let p = &self.params;
        let b = self.builder();
        let mut rows = Vec::new();
        for (j, &n) in p.n_grid.iter().enumerate() {
            let s = j * self.stride();
            let cell = Cell::default().k(p.k as i64).n(n).horizon(p.horizon);
            let kept = p.trials - t[s + 2];
            rows.push(b.binomial("P(Rhat_1>=N)", cell, t[s], kept, t[s + 2]));
            rows.push(b.conditional("P(U(1;K;N)|Rhat_1>=N)", cell, t[s + 1], t[s], t[s + 2], MIN_CONDITIONING));
            for m in 1..=p.m_max {
                let c = s + 3 + 2 * (m - 1);
                let cell = cell.m(m as i64);
                rows.push(b.binomial("P(U(m;K;N))", cell, t[c], p.trials - t[c + 1], t[c + 1]));
            }
        }
        Ok(rows)
    }
}
