//! The product `κ(n) = (p_n − 1/2) · n² · P_cr(A_n^{2,2})`.

use serde::{Deserialize, Serialize};

use super::{Cell, Experiment, Phase, Row, CONFIDENCE};
use crate::connectivity::four_arm;
use crate::error::{Error, Result};
use crate::experiments::flag;
use crate::lattice::{Edge, Site};
use crate::scaling::{estimate_pn, EstimatorConfig, P_C};
use crate::stats::{lane, Estimate};
use crate::weights::{derive_seed, WeightField};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KestenParams {
    pub n_grid: Vec<u32>,
    pub four_arm_trials: u64,
    pub epsilon: f64,
    /// Crossing trials per classification point before escalation.
    pub sigma_trials: u64,
    pub sigma_max_trials: u64,
}

impl Default for KestenParams {
    fn default() -> Self {
        KestenParams { n_grid: vec![8, 16, 32], four_arm_trials: 20_000, epsilon: 0.02, sigma_trials: 1000, sigma_max_trials: 16_000 }
    }
}

impl KestenParams {
    fn estimator(&self, seed: u64) -> EstimatorConfig {
        EstimatorConfig {
            epsilon: self.epsilon,
            trials: self.sigma_trials,
            max_trials: self.sigma_max_trials,
            confidence: CONFIDENCE,
            seed,
            ..EstimatorConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_grid.is_empty() || self.n_grid.iter().any(|&n| n < 2) {
            return Err(Error::Parameter("n_grid must be nonempty with entries >= 2".into()));
        }
        self.estimator(0).validate()
    }
}

const PN_TAG: u64 = 0x706e;

/// The four-arm edge `⟨(0,0),(1,0)⟩`.
pub fn kesten_edge() -> Edge {
    Edge::horizontal(Site::ORIGIN)
}

pub struct KestenExperiment {
    pub params: KestenParams,
    pub seed: u64,
}

impl KestenExperiment {
    pub fn new(params: KestenParams, seed: u64) -> Result<Self> {
        params.validate()?;
        Ok(KestenExperiment { params, seed })
    }
}

impl Experiment for KestenExperiment {
    fn id(&self) -> &'static str {
        "exp_kesten"
    }

    fn seed(&self) -> u64 {
        self.seed
    }

    fn phases(&self) -> Vec<Phase> {
        vec![Phase { name: "four_arm".into(), trials: self.params.four_arm_trials, width: self.params.n_grid.len() }]
    }

    fn trial(&self, _phase: usize, i: u64, acc: &mut [u64]) {
        let w = WeightField::new(self.seed, WeightField::lane_stream(lane::FOUR_ARM, i));
        for (j, &n) in self.params.n_grid.iter().enumerate() {
            acc[j] += four_arm(&w, kesten_edge(), n as i32, P_C, P_C).expect("edge inside B(n/2)") as u64;
        }
    }

    /// `p_n` is found by sequential bisection here, after the four-arm
    /// tallies are complete.
    fn rows(&self, tallies: &[Vec<u64>]) -> Result<Vec<Row>> {
        let t = &tallies[0];
        let p = &self.params;
        let b = self.builder();
        let mut rows = Vec::new();
        for (j, &n) in p.n_grid.iter().enumerate() {
            let cell = Cell::default().n(n);
            let pn = estimate_pn(n, &p.estimator(derive_seed(self.seed, PN_TAG, n as u64)))?;
            let uncertain = if pn.boundary_uncertain { flag::BOUNDARY_UNCERTAIN } else { flag::NONE };
            rows.push(b.value("p_n", cell, pn.p, pn.lo, pn.hi, uncertain));
            let arms = b.binomial("P(A4_n)", cell, t[j], p.four_arm_trials, 0);
            let e = Estimate::new(t[j], p.four_arm_trials, CONFIDENCE);
            let n2 = (n as f64).powi(2);
            let kappa = (pn.p - P_C) * n2 * e.estimate;
            let flag = if arms.flag == flag::UNDERPOWERED { flag::UNDERPOWERED } else { uncertain };
            rows.push(arms);
            rows.push(b.value("kappa", cell, kappa, (pn.lo - P_C) * n2 * e.ci_lo, (pn.hi - P_C) * n2 * e.ci_hi, flag));
        }
        Ok(rows)
    }
}
