//! Experiment ids, parameter documentation and construction from JSON.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::*;
use crate::error::{Error, Result};

pub const EXPERIMENT_IDS: [&str; 9] = [
    "exp_kpoint",
    "exp_pond_radii",
    "exp_pond_clusters",
    "exp_defect_scaling",
    "exp_kesten",
    "exp_disconnect",
    "exp_invaded_weights",
    "exp_onearm",
    "exp_couplings",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegistryEntry {
    pub id: String,
    pub description: String,
    /// Parameter name to meaning.
    pub params: Value,
    pub defaults: Value,
    /// Small parameters that run in seconds.
    pub smoke: Value,
}

fn parse<T: DeserializeOwned>(id: &str, params: Value) -> Result<T> {
    let params = if params.is_null() { json!({}) } else { params };
    serde_json::from_value(params).map_err(|e| Error::Config(format!("{id}.params: {e}")))
}

/// Builds experiment `id` from its JSON parameters; missing keys take
/// their defaults and unknown keys are rejected.
pub fn build(id: &str, params: Value, seed: u64) -> Result<Box<dyn Experiment>> {
    let exp: Box<dyn Experiment> = match id {
        "exp_kpoint" => Box::new(KPointExperiment::new(parse(id, params)?, seed)?),
        "exp_pond_radii" => Box::new(PondRadiiExperiment::new(parse(id, params)?, seed)?),
        "exp_pond_clusters" => Box::new(PondClustersExperiment::new(parse(id, params)?, seed)?),
        "exp_defect_scaling" => Box::new(DefectExperiment::new(parse(id, params)?, seed)?),
        "exp_kesten" => Box::new(KestenExperiment::new(parse(id, params)?, seed)?),
        "exp_disconnect" => Box::new(DisconnectExperiment::new(parse(id, params)?, seed)?),
        "exp_invaded_weights" => Box::new(InvadedWeightsExperiment::new(parse(id, params)?, seed)?),
        "exp_onearm" => Box::new(OneArmExperiment::new(parse(id, params)?, seed)?),
        "exp_couplings" => Box::new(CouplingsExperiment::new(parse(id, params)?, seed)?),
        other => return Err(Error::Config(format!("unknown experiment id {other:?}"))),
    };
    Ok(exp)
}

fn entry<T: Serialize + Default>(id: &str, description: &str, params: Value, smoke: Value) -> RegistryEntry {
    RegistryEntry {
        id: id.into(),
        description: description.into(),
        params,
        defaults: serde_json::to_value(T::default()).expect("serializable defaults"),
        smoke,
    }
}

pub fn registry() -> Vec<RegistryEntry> {
    let invasion = |extra: Value| {
        let mut m = json!({
            "trials": "number of invasion trials",
            "horizon": "invasion stops when it reaches the boundary of B(horizon)",
            "p_ref": "threshold separating open from closed, default 1/2",
            "confirm_factor": "an outlet at norm r is confirmed once the run reaches norm confirm_factor * r",
        });
        m.as_object_mut().unwrap().extend(extra.as_object().unwrap().clone());
        m
    };
    vec![
        entry::<KPointParams>(
            "exp_kpoint",
            "P(points in first pond) against P(points in critical cluster of 0) on shared weights",
            invasion(json!({"points": "list of [x, y] sites inside B(horizon/4)", "fullbox": "use all of B(n), n <= 3, as the point set"})),
            json!({"points": [[1, 0]], "trials": 500, "horizon": 32}),
        ),
        entry::<PondRadiiParams>(
            "exp_pond_radii",
            "P(Rhat_k >= n), P(Rbar_k >= n), pi(n) and r_k(n) = P(Rhat_k >= n) / ((log2 n)^(k-1) pi(n))",
            invasion(json!({"k_max": "largest pond index", "n_grid": "radii, each <= horizon/4"})),
            json!({"k_max": 2, "n_grid": [8, 16], "trials": 1000, "horizon": 128}),
        ),
        entry::<PondClustersParams>(
            "exp_pond_clusters",
            "P(U(1;K;N) | Rhat_1 >= N) and P(U(m;K;N)) for the first m_max ponds",
            invasion(json!({
                "k": "required number of disjoint critical clusters",
                "n_grid": "cluster size thresholds N, each <= horizon/8",
                "m_max": "ponds scanned for U(m;K;N)",
                "size": "\"diameter\" (L-infinity) or \"volume\" (sites)",
            })),
            json!({"k": 2, "n_grid": [4], "m_max": 2, "trials": 500, "horizon": 32}),
        ),
        entry::<DefectParams>(
            "exp_defect_scaling",
            "P(0 <->_k dB(n)) and s_k(n) = P / ((log2 n)^k pi(n))",
            json!({"k_max": "largest number of closed edges", "n_grid": "radii, each >= 2", "trials": "number of configurations", "p": "threshold"}),
            json!({"k_max": 1, "n_grid": [4, 8], "trials": 500}),
        ),
        entry::<KestenParams>(
            "exp_kesten",
            "kappa(n) = (p_n - 1/2) n^2 P(A4_n) with p_n by bisection on square crossings",
            json!({
                "n_grid": "box sides",
                "four_arm_trials": "configurations for the four-arm frequency",
                "epsilon": "crossing tolerance in sigma(n,n,p) >= 1 - epsilon",
                "sigma_trials": "crossing trials per classification point",
                "sigma_max_trials": "escalation cap per classification point",
            }),
            json!({"n_grid": [4], "four_arm_trials": 500, "sigma_trials": 200, "sigma_max_trials": 400}),
        ),
        entry::<DisconnectParams>(
            "exp_disconnect",
            "no disconnecting edge in Ann(m,n) for the invasion cluster and the conditioned critical cluster, with A1 and A2 arm frequencies",
            json!({
                "cells": "list of [m, n, N] with m < n <= N/4",
                "trials": "trials per cell",
                "iic_max_attempts": "rejection sampler cap",
                "p_ref": "threshold for outlet confirmation",
                "confirm_factor": "outlet confirmation distance factor",
            }),
            json!({"cells": [[2, 4, 16]], "trials": 200, "iic_max_attempts": 1000}),
        ),
        entry::<InvadedWeightsParams>(
            "exp_invaded_weights",
            "histogram of invaded weights, KS distance to Uniform[0, 1/2], boundary to volume ratio",
            json!({"steps": "invasion steps", "bins": "histogram bins on [0, 1)"}),
            json!({"steps": 20000, "bins": 20}),
        ),
        entry::<OneArmParams>(
            "exp_onearm",
            "pi(n) at p = 1/2 with the n^(-1/2)/2 margin and pi(2n)/pi(n); self-dual rectangle crossing",
            json!({
                "n_grid": "radii",
                "trials": "configurations for pi",
                "self_dual_n": "side of [0,n] x [0,n-1]",
                "self_dual_trials": "configurations for the crossing",
            }),
            json!({"n_grid": [2, 4], "trials": 2000, "self_dual_n": 4, "self_dual_trials": 2000}),
        ),
        entry::<CouplingParams>(
            "exp_couplings",
            "violation counts of per-sample dominations, all expected to be zero",
            invasion(json!({"k_max": "largest pond / defect index checked", "defect_n": "radius of the defect-reach check"})),
            json!({"trials": 300, "horizon": 32, "k_max": 2, "defect_n": 8}),
        ),
    ]
}
