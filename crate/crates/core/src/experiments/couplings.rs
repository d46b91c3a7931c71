//! Per-sample dominations that hold exactly under shared weights.

use rustc_hash::FxHashSet;
use serde::{Deserialize, Serialize};

use super::{invade, invasion_field, tally_block, Cell, Experiment, Phase, Row};
use crate::connectivity::{disconnecting_edges, origin_cluster, reach_with_defects};
use crate::error::{Error, Result};
use crate::invasion::{decompose_ponds_with, PondOptions};
use crate::lattice::{Edge, Site};
use crate::stats::lane;
use crate::weights::{Thresholded, WeightField};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CouplingParams {
    pub trials: u64,
    pub horizon: i32,
    pub k_max: u32,
    /// Radius for the defect-reach check.
    pub defect_n: i32,
    pub p_ref: f64,
    pub confirm_factor: i32,
}

impl Default for CouplingParams {
    fn default() -> Self {
        CouplingParams { trials: 10_000, horizon: 64, k_max: 3, defect_n: 32, p_ref: 0.5, confirm_factor: 4 }
    }
}

impl CouplingParams {
    pub fn validate(&self) -> Result<()> {
        if self.horizon < 1 || self.defect_n < 1 || self.k_max == 0 {
            return Err(Error::Parameter("horizon, defect_n and k_max must be >= 1".into()));
        }
        if !(self.p_ref > 0.0 && self.p_ref < 1.0) || self.confirm_factor < 1 {
            return Err(Error::Parameter("need 0 < p_ref < 1 and confirm_factor >= 1".into()));
        }
        Ok(())
    }
}

pub const CHECKS: [&str; 4] = [
    "C0 not in V1",
    "Rhat_k decreasing in k",
    "defect reach not monotone in k",
    "confirmed outlet not disconnecting",
];

pub struct CouplingsExperiment {
    pub params: CouplingParams,
    pub seed: u64,
}

impl CouplingsExperiment {
    pub fn new(params: CouplingParams, seed: u64) -> Result<Self> {
        params.validate()?;
        Ok(CouplingsExperiment { params, seed })
    }
}

impl Experiment for CouplingsExperiment {
    fn id(&self) -> &'static str {
        "exp_couplings"
    }

    fn seed(&self) -> u64 {
        self.seed
    }

    fn phases(&self) -> Vec<Phase> {
        vec![Phase { name: "trials".into(), trials: self.params.trials, width: 2 * CHECKS.len() }]
    }

    /// Counters come in `(checked, violations)` pairs, one per check.
    fn trial(&self, _phase: usize, i: u64, acc: &mut [u64]) {
        let p = &self.params;
        let w = invasion_field(self.seed, i);
        let trace = invade(&w, p.horizon);
        let d = decompose_ponds_with(&trace, PondOptions { p_ref: p.p_ref, confirm_factor: p.confirm_factor })
            .expect("nonempty trace");
        let confirmed = d.confirmed_prefix();

        if confirmed >= 1 {
            let pond: FxHashSet<Site> = d.pond_sites(1).into_iter().collect();
            let cluster = origin_cluster(&Thresholded::new(&w, p.p_ref), p.horizon);
            acc[0] += 1;
            acc[1] += cluster.iter().any(|s| !pond.contains(s)) as u64;
        }

        for k in 2..=confirmed.min(p.k_max as usize) {
            let (a, b) = (d.pond_radius(k - 1).unwrap().0, d.pond_radius(k).unwrap().0);
            acc[2] += 1;
            acc[3] += (b < a) as u64;
        }

        let dw = WeightField::new(self.seed, WeightField::lane_stream(lane::DEFECT, i));
        let status = Thresholded::new(&dw, p.p_ref);
        let reach: Vec<bool> = (0..=p.k_max).map(|k| reach_with_defects(&status, k, p.defect_n).unwrap()).collect();
        for k in 0..p.k_max as usize {
            acc[4] += 1;
            acc[5] += (reach[k] && !reach[k + 1]) as u64;
        }

        let far: Vec<Site> = trace.sites().iter().map(|(s, _)| *s).filter(|s| s.norm() >= p.horizon).collect();
        if !far.is_empty() {
            let bridges: FxHashSet<Edge> = disconnecting_edges(trace.edges(), Site::ORIGIN, &far).unwrap().into_iter().collect();
            for o in d.outlets().iter().filter(|o| o.confirmed) {
                acc[6] += 1;
                acc[7] += !bridges.contains(&o.edge) as u64;
            }
        }
    }

    fn rows(&self, tallies: &[Vec<u64>]) -> Result<Vec<Row>> {
        let t = &tallies[0];
        let b = self.builder();
        let cell = Cell::default().horizon(self.params.horizon);
        Ok(CHECKS.iter().enumerate().map(|(j, name)| b.diagnostic(name, cell, t[2 * j + 1], t[2 * j])).collect())
    }
}

/// Checked instances and violations for each domination.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingReport {
    pub trials: u64,
    pub checks: Vec<(String, u64, u64)>,
}

impl CouplingReport {
    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| c.2 == 0)
    }
}

/// Runs the coupled checks: `C(0) ⊂ V̂_1`, `R̂_k` nondecreasing in `k`,
/// defect reach monotone in `k`, and every confirmed outlet a disconnecting
/// edge of the invaded graph.
pub fn coupled_dominations(trials: u64, horizon: i32, k_max: u32, seed: u64) -> Result<CouplingReport> {
    let params = CouplingParams { trials, horizon, k_max, defect_n: horizon.max(2) / 2, ..CouplingParams::default() };
    let exp = CouplingsExperiment::new(params, seed)?;
    let t = tally_block(&exp, 0, 2 * CHECKS.len(), 0..trials);
    Ok(CouplingReport {
        trials,
        checks: CHECKS.iter().enumerate().map(|(j, n)| (n.to_string(), t[2 * j], t[2 * j + 1])).collect(),
    })
}
