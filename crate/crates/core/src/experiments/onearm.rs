//! One-arm probabilities at `p = 1/2` and the self-dual crossing check.

use serde::{Deserialize, Serialize};

use super::{Cell, Experiment, Phase, Row};
use crate::connectivity::{has_crossing, origin_reach_radius};
use crate::error::{Error, Result};
use crate::experiments::flag;
use crate::lattice::{Orientation, Region};
use crate::scaling::P_C;
use crate::stats::lane;
use crate::weights::{Thresholded, WeightField};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OneArmParams {
    pub n_grid: Vec<i32>,
    pub trials: u64,
    /// Side of the self-dual rectangle `[0, n] × [0, n − 1]`.
    pub self_dual_n: i32,
    pub self_dual_trials: u64,
}

impl Default for OneArmParams {
    fn default() -> Self {
        OneArmParams { n_grid: vec![4, 8, 16, 32], trials: 100_000, self_dual_n: 8, self_dual_trials: 100_000 }
    }
}

pub struct OneArmExperiment {
    pub params: OneArmParams,
    pub seed: u64,
}

impl OneArmExperiment {
    pub fn new(params: OneArmParams, seed: u64) -> Result<Self> {
        if params.n_grid.is_empty() || params.n_grid.iter().any(|&n| n < 1) || params.self_dual_n < 2 {
            return Err(Error::Parameter("n_grid entries must be >= 1 and self_dual_n >= 2".into()));
        }
        Ok(OneArmExperiment { params, seed })
    }
}

impl Experiment for OneArmExperiment {
    fn id(&self) -> &'static str {
        "exp_onearm"
    }

    fn seed(&self) -> u64 {
        self.seed
    }

    fn phases(&self) -> Vec<Phase> {
        let p = &self.params;
        vec![
            Phase { name: "one_arm".into(), trials: p.trials, width: p.n_grid.len() },
            Phase { name: "self_dual".into(), trials: p.self_dual_trials, width: 1 },
        ]
    }

    fn trial(&self, phase: usize, i: u64, acc: &mut [u64]) {
        let p = &self.params;
        if phase == 0 {
            let w = WeightField::new(self.seed, WeightField::lane_stream(lane::ONE_ARM, i));
            let reach = origin_reach_radius(&Thresholded::new(&w, P_C), *p.n_grid.iter().max().unwrap());
            for (j, &n) in p.n_grid.iter().enumerate() {
                acc[j] += (reach >= n) as u64;
            }
        } else {
            let w = WeightField::new(self.seed, WeightField::lane_stream(lane::SIGMA, i));
            let n = p.self_dual_n;
            let rect = Region::Rect { x0: 0, x1: n, y0: 0, y1: n - 1 };
            acc[0] += has_crossing(&Thresholded::new(&w, P_C), rect, Orientation::Horizontal).expect("rectangle") as u64;
        }
    }

    fn rows(&self, tallies: &[Vec<u64>]) -> Result<Vec<Row>> {
        let p = &self.params;
        let b = self.builder();
        let mut rows = Vec::new();
        let pis: Vec<Row> =
            p.n_grid.iter().enumerate().map(|(j, &n)| b.binomial("pi", Cell::default().n(n), tallies[0][j], p.trials, 0)).collect();
        for r in &pis {
            let floor = 0.5 / (r.n.unwrap() as f64).sqrt();
            let mut m = b.value("pi - n^-1/2/2", Cell::default().n(r.n.unwrap()), r.estimate - floor, r.ci_lo - floor, r.ci_hi - floor, flag::NONE);
            m.flag = r.flag.clone();
            rows.push(m);
        }
        for a in &pis {
            if let Some(c) = pis.iter().find(|c| c.n == a.n.map(|n| 2 * n)) {
                rows.push(b.ratio("pi(2n)/pi(n)", Cell::default().n(a.n.unwrap()), c, a, 1.0));
            }
        }
        let mut all = pis;
        all.extend(rows);
        all.push(b.binomial("self_dual_crossing", Cell::default().n(p.self_dual_n), tallies[1][0], p.self_dual_trials, 0));
        Ok(all)
    }
}
