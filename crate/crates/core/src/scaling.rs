//! Crossing probabilities, the finite-size-scaling correlation length
//! `L(p, ε)`, near-critical thresholds `p_n`, the ladder `p_l(j)` and
//! one-arm probabilities.
//!
//! Every estimator at a given seed uses the same weight fields for all `p`,
//! so per-sample events are monotone in `p`.

use serde::{Deserialize, Serialize};

use crate::connectivity::{has_crossing, origin_connects};
use crate::error::{Error, Result};
use crate::lattice::{Orientation, Region};
use crate::stats::{count_par, lane, Estimate};
use crate::weights::{Thresholded, WeightField};

/// The critical point of bond percolation on Z².
pub const P_C: f64 = 0.5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EstimatorConfig {
    /// Crossing tolerance `ε`.
    pub epsilon: f64,
    /// Trials per point before escalation.
    pub trials: u64,
    /// Escalation cap; points still undecided here are boundary-uncertain.
    pub max_trials: u64,
    pub confidence: f64,
    /// Ladder constant `C_*`.
    pub c_star: f64,
    /// Largest box side searched by [`estimate_l`].
    pub max_n: u32,
    pub seed: u64,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig { epsilon: 0.02, trials: 1000, max_trials: 16_000, confidence: 0.95, c_star: 1.0, max_n: 256, seed: 1 }
    }
}

impl EstimatorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 0.5) {
            return Err(Error::Parameter(format!("epsilon must lie in (0, 1/2), got {}", self.epsilon)));
        }
        if self.trials < 100 {
            return Err(Error::Parameter(format!("trials must be >= 100, got {}", self.trials)));
        }
        if self.max_trials < self.trials {
            return Err(Error::Parameter("max_trials < trials".into()));
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(Error::Parameter(format!("confidence must lie in (0, 1), got {}", self.confidence)));
        }
        if !(self.c_star > 0.0) {
            return Err(Error::Parameter(format!("c_star must be positive, got {}", self.c_star)));
        }
        if self.max_n < 1 {
            return Err(Error::Parameter("max_n must be >= 1".into()));
        }
        Ok(())
    }
}

fn check_p(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::Parameter(format!("p must lie in [0, 1], got {p}")))
    }
}

/// Crossing indicator of `[0, n] × [0, m]` at `p` on trial `i`.
fn crosses(n: u32, m: u32, p: f64, seed: u64, i: u64) -> bool {
    let w = WeightField::new(seed, WeightField::lane_stream(lane::SIGMA, i));
    let rect = Region::Rect { x0: 0, x1: n as i32, y0: 0, y1: m as i32 };
    has_crossing(&Thresholded::new(w, p), rect, Orientation::Horizontal).expect("rectangle")
}

fn sigma_range(n: u32, m: u32, p: f64, seed: u64, range: std::ops::Range<u64>) -> u64 {
    count_par(range, |i| crosses(n, m, p, seed, i))
}

/// `σ(n, m, p)`: probability of an open left-right crossing of `[0, n] × [0, m]`.
pub fn estimate_sigma(n: u32, m: u32, p: f64, trials: u64, seed: u64) -> Result<Estimate> {
    estimate_sigma_at(n, m, p, trials, seed, 0.95)
}

pub fn estimate_sigma_at(n: u32, m: u32, p: f64, trials: u64, seed: u64, confidence: f64) -> Result<Estimate> {
    if n < 1 || m < 1 {
        return Err(Error::Parameter(format!("rectangle sides must be >= 1, got {n} x {m}")));
    }
    check_p(p)?;
    Ok(Estimate::new(sigma_range(n, m, p, seed, 0..trials), trials, confidence))
}

/// `[0, n] × [0, n−1]`: its horizontal crossing has probability exactly 1/2 at `p = 1/2`.
pub fn self_dual_crossing(n: u32, trials: u64, seed: u64) -> Result<Estimate> {
    estimate_sigma(n, n.saturating_sub(1).max(1), P_C, trials, seed)
}

/// Outcome of comparing `σ(n, n, p)` with `1 − ε`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub reaches: bool,
    /// The interval still contained `1 − ε` at the trial cap; `reaches`
    /// then falls back to the point estimate.
    pub uncertain: bool,
    pub estimate: Estimate,
}

/// Decides `σ(n, n, p) ≥ 1 − ε`, quadrupling trials while the interval
/// contains the target. Earlier trials are reused, so the decision at a
/// given trial count is monotone in `p`.
pub fn classify_square(n: u32, p: f64, cfg: &EstimatorConfig) -> Classification {
    let target = 1.0 - cfg.epsilon;
    let mut trials = cfg.trials;
    let mut hits = sigma_range(n, n, p, cfg.seed, 0..trials);
    loop {
        let est = Estimate::new(hits, trials, cfg.confidence);
        if est.ci_lo >= target {
            return Classification { reaches: true, uncertain: false, estimate: est };
        }
        if est.ci_hi < target {
            return Classification { reaches: false, uncertain: false, estimate: est };
        }
        if trials >= cfg.max_trials {
            return Classification { reaches: est.estimate >= target, uncertain: true, estimate: est };
        }
        let next = (trials * 4).min(cfg.max_trials);
        hits += sigma_range(n, n, p, cfg.seed, trials..next);
        trials = next;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LEstimate {
    /// `None` when no `n ≤ max_n` reaches `1 − ε`.
    pub l: Option<u32>,
    pub boundary_uncertain: bool,
}

/// `L(p, ε) = min{n : σ(n, n, p) ≥ 1 − ε}` by doubling then bisection.
pub fn estimate_l(p: f64, cfg: &EstimatorConfig) -> Result<LEstimate> {
    cfg.validate()?;
    check_p(p)?;
    let mut uncertain = false;
    let mut lo = 0u32; // largest side known to fail
    let mut n = 1u32;
    let hi = loop {
        let c = classify_square(n, p, cfg);
        uncertain |= c.uncertain;
        if c.reaches {
            break n;
        }
        lo = n;
        if n >= cfg.max_n {
            return Ok(LEstimate { l: None, boundary_uncertain: uncertain });
        }
        n = (n * 2).min(cfg.max_n);
    };
    let (mut lo, mut hi) = (lo, hi);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        let c = classify_square(mid, p, cfg);
        uncertain |= c.uncertain;
        if c.reaches {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(LEstimate { l: Some(hi), boundary_uncertain: uncertain })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PnEstimate {
    /// Midpoint of the final bracket.
    pub p: f64,
    pub lo: f64,
    pub hi: f64,
    pub boundary_uncertain: bool,
}

/// Bracket width at which [`estimate_pn`] stops.
pub const PN_TOLERANCE: f64 = 1e-3;

/// `p_n = sup{p : L(p) > n}` by bisection on `p ∈ [1/2, 1]`.
///
/// `L(p) > n` is decided as `σ(n, n, p) < 1 − ε`, the same monotone-in-`n`
/// reading that the bisection in [`estimate_l`] relies on.
pub fn estimate_pn(n: u32, cfg: &EstimatorConfig) -> Result<PnEstimate> {
    cfg.validate()?;
    if n < 1 {
        return Err(Error::Parameter("n must be >= 1".into()));
    }
    let (mut lo, mut hi) = (P_C, 1.0);
    let mut uncertain = false;
    while hi - lo > PN_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        let c = classify_square(n, mid, cfg);
        uncertain |= c.uncertain;
        if c.reaches {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(PnEstimate { p: 0.5 * (lo + hi), lo, hi, boundary_uncertain: uncertain })
}

/// `log^{(j)} l`, base 2.
pub fn iterated_log(l: f64, j: u32) -> f64 {
    (0..j).fold(l, |x, _| x.log2())
}

/// `log* l = min{j > 0 : log^{(j)} l ≤ 10}`.
pub fn log_star(l: u64) -> Result<u32> {
    if l <= 10 {
        return Err(Error::Parameter(format!("log* needs l > 10, got {l}")));
    }
    let mut j = 1;
    while iterated_log(l as f64, j) > 10.0 {
        j += 1;
    }
    Ok(j)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LadderResult {
    pub l: u64,
    pub log_star: u32,
    /// `p_l(j)` for `j = 0..=log* l`.
    pub p_values: Vec<f64>,
    /// Side `⌊l / (C_* log^{(j)} l)⌋` used for each intermediate level.
    pub sides: Vec<Option<u32>>,
    pub boundary_uncertain: bool,
}

/// `p_l(0) = 1`, `p_l(j) = inf{p > p_c : L(p) ≤ l / (C_* log^{(j)} l)}` for
/// `0 < j < log* l`, and `p_c` from `log* l` on. The infimum is `p_t` with
/// `t` the integer part of the allowed side.
pub fn ladder(l: u64, cfg: &EstimatorConfig) -> Result<LadderResult> {
    cfg.validate()?;
    let ls = log_star(l)?;
    let mut p_values = vec![1.0];
    let mut sides = vec![None];
    let mut uncertain = false;
    for j in 1..ls {
        let t = (l as f64 / (cfg.c_star * iterated_log(l as f64, j))).floor();
        if t < 1.0 {
            // L ≥ 1 always, so no p qualifies
            p_values.push(1.0);
            sides.push(Some(0));
            continue;
        }
        let pn = estimate_pn(t as u32, cfg)?;
        uncertain |= pn.boundary_uncertain;
        p_values.push(pn.p);
        sides.push(Some(t as u32));
    }
    p_values.push(P_C);
    sides.push(None);
    Ok(LadderResult { l, log_star: ls, p_values, sides, boundary_uncertain: uncertain })
}

/// `π(n) = P_cr(0 ↔ ∂B(n))`.
pub fn estimate_pi(n: u32, trials: u64, seed: u64) -> Result<Estimate> {
    estimate_onearm(P_C, n, trials, seed)
}

/// `P_p(0 ↔ ∂B(n))`.
pub fn estimate_onearm(p: f64, n: u32, trials: u64, seed: u64) -> Result<Estimate> {
    if n < 1 {
        return Err(Error::Parameter("n must be >= 1".into()));
    }
    check_p(p)?;
    let hits = count_par(0..trials, |i| {
        let w = WeightField::new(seed, WeightField::lane_stream(lane::ONE_ARM, i));
        origin_connects(&Thresholded::new(w, p), n as i32)
    });
    Ok(Estimate::new(hits, trials, 0.95))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{count_configs, ratio, ratio_to_f64, EdgeSet};

    fn quick() -> EstimatorConfig {
        EstimatorConfig { trials: 400, max_trials: 1600, ..Default::default() }
    }

    #[test]
    fn sigma_at_one_is_one() {
        let e = estimate_sigma(5, 3, 1.0, 200, 3).unwrap();
        assert_eq!(e.successes, 200);
        assert_eq!(estimate_sigma(5, 3, 0.0, 200, 3).unwrap().successes, 0);
    }

    #[test]
    fn sigma_2x2_matches_enumeration() {
        let rect = Region::rect(0, 2, 0, 2).unwrap();
        let set = EdgeSet::new(rect.edges()).unwrap();
        let c = count_configs(&set, |c| has_crossing(c, rect, Orientation::Horizontal).unwrap()).unwrap();
        let exact = ratio_to_f64(&c.probability(&ratio(3, 10)));
        let e = estimate_sigma(2, 2, 0.3, 20_000, 11).unwrap();
        assert!((e.estimate - exact).abs() < 3.0 * e.std_err(), "{} vs {exact}", e.estimate);
    }

    #[test]
    fn self_dual_rectangle_is_exactly_half_at_n2() {
        let rect = Region::rect(0, 2, 0, 1).unwrap();
        let set = EdgeSet::new(rect.edges()).unwrap();
        let c = count_configs(&set, |c| has_crossing(c, rect, Orientation::Horizontal).unwrap()).unwrap();
        assert_eq!(c.probability(&ratio(1, 2)), ratio(1, 2));
    }

    #[test]
    fn log_star_values() {
        assert_eq!(log_star(11).unwrap(), 1);
        assert_eq!(log_star(16).unwrap(), 1);
        assert_eq!(log_star(1024).unwrap(), 1);
        assert_eq!(log_star(1025).unwrap(), 2);
        assert_eq!(log_star(2048).unwrap(), 2);
        assert!(log_star(10).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(EstimatorConfig::default().validate().is_ok());
        assert!(EstimatorConfig { epsilon: 0.5, ..Default::default() }.validate().is_err());
        assert!(EstimatorConfig { trials: 99, ..Default::default() }.validate().is_err());
    }

    #[test]
    fn correlation_length_far_above_criticality() {
        let l = estimate_l(0.95, &quick()).unwrap();
        assert!(l.l.unwrap() <= 4, "{l:?}");
    }

    #[test]
    fn correlation_length_nonincreasing_in_p() {
        let cfg = quick();
        let ls: Vec<u32> = [0.55, 0.6, 0.7, 0.9].iter().map(|&p| estimate_l(p, &cfg).unwrap().l.unwrap_or(u32::MAX)).collect();
        assert!(ls.windows(2).all(|w| w[0] >= w[1]), "{ls:?}");
    }

    #[test]
    fn correlation_length_exceeds_cap_near_criticality() {
        let cfg = EstimatorConfig { trials: 100, max_trials: 400, max_n: 256, ..Default::default() };
        assert_eq!(estimate_l(0.505, &cfg).unwrap().l, None);
    }

    #[test]
    fn pn_trends() {
        let cfg = quick();
        let ns = [4u32, 8, 16, 32];
        let ps: Vec<f64> = ns.iter().map(|&n| estimate_pn(n, &cfg).unwrap().p).collect();
        assert!(ps.iter().all(|&p| p > P_C));
        assert!(ps.windows(2).all(|w| w[0] >= w[1]), "{ps:?}");
        let scaled: Vec<f64> = ns.iter().zip(&ps).map(|(&n, p)| (n * n) as f64 * (p - P_C)).collect();
        assert!(scaled.windows(2).all(|w| w[0] < w[1]), "{scaled:?}");
    }

    #[test]
    fn pn_and_l_are_inverse_consistent() {
        let cfg = quick();
        for n in [4u32, 8] {
            let pn = estimate_pn(n, &cfg).unwrap();
            assert!(estimate_l(pn.p + 0.01, &cfg).unwrap().l.unwrap() <= n);
            assert!(estimate_l(pn.p - 0.01, &cfg).unwrap().l.unwrap() > n);
        }
    }

    #[test]
    fn ladder_shape() {
        let cfg = EstimatorConfig { trials: 100, max_trials: 400, ..Default::default() };
        let r = ladder(64, &cfg).unwrap();
        assert_eq!(r.log_star, 1);
        assert_eq!(r.p_values, vec![1.0, P_C]);
        let r = ladder(2048, &cfg).unwrap();
        assert_eq!(r.log_star, 2);
        assert_eq!(r.p_values[0], 1.0);
        assert!(r.p_values.windows(2).all(|w| w[0] >= w[1]), "{:?}", r.p_values);
        assert!(ladder(10, &cfg).is_err());
    }

    #[test]
    fn ladder_lower_bracket() {
        // C_* log^{(j)} l ≤ l / L(p_l(j)) at j = 1, l = 2048
        let cfg = EstimatorConfig { trials: 100, max_trials: 400, ..Default::default() };
        let r = ladder(2048, &cfg).unwrap();
        let l = estimate_l(r.p_values[1] + PN_TOLERANCE, &EstimatorConfig { max_n: 512, ..cfg.clone() }).unwrap().l.unwrap();
        assert!(cfg.c_star * iterated_log(2048.0, 1) <= 2048.0 / l as f64 + 1e-9, "L = {l}");
    }

    #[test]
    fn one_arm_at_b1_matches_enumeration() {
        let set = EdgeSet::ball(1).unwrap();
        let c = count_configs(&set, |c| origin_connects(c, 1)).unwrap();
        let exact = ratio_to_f64(&c.probability(&ratio(1, 2)));
        assert_eq!(exact, 15.0 / 16.0);
        let e = estimate_pi(1, 20_000, 5).unwrap();
        assert!((e.estimate - exact).abs() < 3.0 * e.std_err());
    }

    #[test]
    fn one_arm_monotone_in_p_per_seed() {
        let a = estimate_onearm(0.45, 8, 2000, 9).unwrap();
        let b = estimate_onearm(0.55, 8, 2000, 9).unwrap();
        assert!(a.successes <= b.successes);
    }
}
