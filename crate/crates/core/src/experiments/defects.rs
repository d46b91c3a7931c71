//! Critical connections with a bounded number of closed edges.

use serde::{Deserialize, Serialize};

use super::{log2_pow, Cell, Experiment, Phase, Row};
use crate::connectivity::{defect_costs, origin_connects};
use crate::error::{Error, Result};
use crate::stats::lane;
use crate::weights::{Thresholded, WeightField};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DefectParams {
    pub k_max: u32,
    pub n_grid: Vec<i32>,
    pub trials: u64,
    pub p: f64,
}

impl Default for DefectParams {
    fn default() -> Self {
        DefectParams { k_max: 1, n_grid: vec![16, 32, 64, 128], trials: 10_000, p: 0.5 }
    }
}

impl DefectParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_grid.is_empty() || self.n_grid.iter().any(|&n| n < 2) {
            return Err(Error::Parameter("n_grid must be nonempty with entries >= 2".into()));
        }
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::Parameter(format!("p must be in [0,1], got {}", self.p)));
        }
        Ok(())
    }
}

/// `P(0 ↔_k ∂B(n))` for `k ≤ k_max` and `s_k(n) = P / ((log₂ n)^k π(n))`.
/// The two factors of `s_k` come from the same samples and are positively
/// correlated, so the independent-ratio interval is conservative.
pub struct DefectExperiment {
    pub params: DefectParams,
    pub seed: u64,
}

impl DefectExperiment {
    pub fn new(params: DefectParams, seed: u64) -> Result<Self> {
        params.validate()?;
        Ok(DefectExperiment { params, seed })
    }

    fn levels(&self) -> usize {
        self.params.k_max as usize + 1
    }

    fn diag(&self) -> usize {
        self.levels() * self.params.n_grid.len()
    }
}

impl Experiment for DefectExperiment {
    fn id(&self) -> &'static str {
        "exp_defect_scaling"
    }

    fn seed(&self) -> u64 {
        self.seed
    }

    fn phases(&self) -> Vec<Phase> {
        vec![Phase { name: "trials".into(), trials: self.params.trials, width: self.diag() + 1 }]
    }

    fn trial(&self, _phase: usize, i: u64, acc: &mut [u64]) {
        let p = &self.params;
        let w = WeightField::new(self.seed, WeightField::lane_stream(lane::DEFECT, i));
        let status = Thresholded::new(&w, p.p);
        let n_max = *p.n_grid.iter().max().unwrap();
        let costs = defect_costs(&status, n_max, p.k_max);
        for (j, &n) in p.n_grid.iter().enumerate() {
            let cost = costs[n as usize - 1];
            for k in 0..=p.k_max {
                acc[j * self.levels() + k as usize] += cost.is_some_and(|c| c <= k) as u64;
            }
            // zero defects is the plain one-arm event
            acc[self.diag()] += ((cost == Some(0)) != origin_connects(&status, n)) as u64;
        }
    }

    fn rows(&self, tallies: &[Vec<u64>]) -> Result<Vec<Row>> {
        let t = &tallies[0];
        let p = &self.params;
        let b = self.builder();
        let mut rows = Vec::new();
        for (j, &n) in p.n_grid.iter().enumerate() {
            for k in 0..=p.k_max {
                let cell = Cell::default().k(k).n(n);
                rows.push(b.binomial("P(0<->_k dB(n))", cell, t[j * self.levels() + k as usize], p.trials, 0));
            }
        }
        for (j, &n) in p.n_grid.iter().enumerate() {
            let pi = rows[j * self.levels()].clone();
            for k in 1..=p.k_max {
                let cell = Cell::default().k(k).n(n);
                let r = rows[j * self.levels() + k as usize].clone();
                rows.push(b.ratio("s_k", cell, &r, &pi, 1.0 / log2_pow(n as i64, k as i32)));
            }
        }
        rows.push(b.diagnostic("zero-defect reach differs from one-arm", Cell::default(), t[self.diag()], p.trials * p.n_grid.len() as u64));
        Ok(rows)
    }
}
