//! k-point function of the first pond against the critical cluster of the
//! origin, on shared weights.

use rustc_hash::FxHashSet;
use serde::{Deserialize, Serialize};

use super::{invade, invasion_field, Cell, Experiment, Phase, Row};
use crate::connectivity::origin_cluster;
use crate::error::{Error, Result};
use crate::invasion::{decompose_ponds_with, PondOptions};
use crate::lattice::{Region, Site};
use crate::weights::Thresholded;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KPointParams {
    /// Explicit points; ignored when `fullbox` is set.
    pub points: Vec<[i32; 2]>,
    /// Use every site of `B(n)` as the point set.
    pub fullbox: Option<i32>,
    pub trials: u64,
    pub horizon: i32,
    pub p_ref: f64,
    pub confirm_factor: i32,
}

impl Default for KPointParams {
    fn default() -> Self {
        KPointParams { points: vec![[1, 0]], fullbox: None, trials: 10_000, horizon: 64, p_ref: 0.5, confirm_factor: 4 }
    }
}

impl KPointParams {
    pub fn point_set(&self) -> Result<Vec<Site>> {
        match self.fullbox {
            Some(n) if !(0..=3).contains(&n) => Err(Error::Parameter(format!("fullbox needs 0 <= n <= 3, got {n}"))),
            Some(n) => Ok(Region::ball(n)?.sites()),
            None => Ok(self.points.iter().map(|p| Site::new(p[0], p[1])).collect()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let pts = self.point_set()?;
        if self.horizon < 4 {
            return Err(Error::Parameter("horizon must be >= 4".into()));
        }
        if let Some(s) = pts.iter().find(|s| 4 * s.norm() > self.horizon) {
            return Err(Error::Parameter(format!("point {s} lies outside B(horizon/4)")));
        }
        if !(self.p_ref > 0.0 && self.p_ref < 1.0) || self.confirm_factor < 1 {
            return Err(Error::Parameter("need 0 < p_ref < 1 and confirm_factor >= 1".into()));
        }
        Ok(())
    }
}

pub struct KPointExperiment {
    pub params: KPointParams,
    pub seed: u64,
    points: Vec<Site>,
}

impl KPointExperiment {
    pub fn new(params: KPointParams, seed: u64) -> Result<Self> {
        params.validate()?;
        let points = params.point_set()?;
        Ok(KPointExperiment { params, seed, points })
    }
}

// counters
const DISCARD: usize = 0;
const IN_POND: usize = 1;
const IN_CLUSTER: usize = 2;
const VIOLATION: usize = 3;

impl Experiment for KPointExperiment {
    fn id(&self) -> &'static str {
        "exp_kpoint"
    }

    fn seed(&self) -> u64 {
        self.seed
    }

    fn phases(&self) -> Vec<Phase> {
        vec![Phase { name: "trials".into(), trials: self.params.trials, width: 4 }]
    }

    fn trial(&self, _phase: usize, i: u64, acc: &mut [u64]) {
        let p = &self.params;
        let w = invasion_field(self.seed, i);
        let cluster: FxHashSet<Site> = origin_cluster(&Thresholded::new(&w, p.p_ref), p.horizon).into_iter().collect();
        let in_cluster = self.points.iter().all(|s| cluster.contains(s));
        acc[IN_CLUSTER] += in_cluster as u64;

        let trace = invade(&w, p.horizon);
        let d = decompose_ponds_with(&trace, PondOptions { p_ref: p.p_ref, confirm_factor: p.confirm_factor })
            .expect("nonempty trace");
        if d.confirmed_prefix() == 0 {
            acc[DISCARD] += 1;
            return;
        }
        let pond: FxHashSet<Site> = d.pond_sites(1).into_iter().collect();
        acc[IN_POND] += self.points.iter().all(|s| pond.contains(s)) as u64;
        acc[VIOLATION] += cluster.iter().any(|s| !pond.contains(s)) as u64;
    }

    fn rows(&self, tallies: &[Vec<u64>]) -> Result<Vec<Row>> {
        let t = &tallies[0];
        let p = &self.params;
        let b = self.builder();
        let mut cell = Cell::default().k(self.points.len() as i64).horizon(p.horizon);
        if let Some(n) = p.fullbox {
            cell = cell.n(n);
        }
        let kept = p.trials - t[DISCARD];
        let pond = b.binomial("P(points in V1)", cell, t[IN_POND], kept, t[DISCARD]);
        let crit = b.binomial("P(points in C0)", cell, t[IN_CLUSTER], p.trials, 0);
        let ratio = b.ratio("kpoint_ratio", cell, &pond, &crit, 1.0);
        let viol = b.diagnostic("C0 not in V1", cell, t[VIOLATION], kept);
        Ok(vec![pond, crit, ratio, viol])
    }
}
