//! Law of the invaded weights along one long invasion.

use serde::{Deserialize, Serialize};

use super::{invasion_field, Cell, Experiment, Phase, Row};
use crate::error::{Error, Result};
use crate::experiments::flag;
use crate::invasion::{invaded_statistics, ks_distance_uniform, run_invasion, StopRule};
use crate::scaling::P_C;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InvadedWeightsParams {
    pub steps: usize,
    pub bins: usize,
}

impl Default for InvadedWeightsParams {
    fn default() -> Self {
        InvadedWeightsParams { steps: 1_000_000, bins: 50 }
    }
}

/// One invasion of `steps` steps: histogram density of the invaded weights
/// on `[0, 1)`, KS distance to Uniform[0, 1/2], `|ΔG|/|E|` and the fraction
/// of invaded weights above 1/2.
pub struct InvadedWeightsExperiment {
    pub params: InvadedWeightsParams,
    pub seed: u64,
}

impl InvadedWeightsExperiment {
    pub fn new(params: InvadedWeightsParams, seed: u64) -> Result<Self> {
        if params.steps == 0 || params.bins == 0 {
            return Err(Error::Parameter("steps and bins must be >= 1".into()));
        }
        Ok(InvadedWeightsExperiment { params, seed })
    }
}

impl Experiment for InvadedWeightsExperiment {
    fn id(&self) -> &'static str {
        "exp_invaded_weights"
    }

    fn seed(&self) -> u64 {
        self.seed
    }

    fn phases(&self) -> Vec<Phase> {
        Vec::new()
    }

    fn trial(&self, _phase: usize, _i: u64, _acc: &mut [u64]) {}

    fn rows(&self, _tallies: &[Vec<u64>]) -> Result<Vec<Row>> {
        let p = &self.params;
        let b = self.builder();
        let trace = run_invasion(&invasion_field(self.seed, 0), StopRule::steps(p.steps))?;
        let st = invaded_statistics(&trace, p.bins);
        let cell = Cell::default().horizon(p.steps as i64);
        let total = trace.len() as f64;
        let mut rows: Vec<Row> = st
            .histogram
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                let mut r = b.value("weight_density", cell.k(i as i64), c as f64 / total * p.bins as f64, f64::NAN, f64::NAN, flag::NONE);
                r.successes = Some(c);
                r.trials = Some(trace.len() as u64);
                r
            })
            .collect();
        let ks = ks_distance_uniform(trace.taus(), 0.0, P_C);
        rows.push(b.value("ks_uniform_0_half", cell, ks, f64::NAN, f64::NAN, flag::NONE));
        rows.push(b.value("boundary_to_volume", cell, st.boundary_to_volume, f64::NAN, f64::NAN, flag::NONE));
        rows.push(b.value("fraction_above_half", cell, st.fraction_above_half, f64::NAN, f64::NAN, flag::NONE));
        Ok(rows)
    }
}
