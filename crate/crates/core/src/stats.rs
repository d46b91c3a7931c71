//! Binomial tallies, Wilson intervals and deterministic parallel counting.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

/// Stream lanes: each use of a trial index draws from its own lane.
pub mod lane {
    pub const SIGMA: u16 = 1;
    pub const ONE_ARM: u16 = 2;
    pub const INVASION: u16 = 3;
    pub const DEFECT: u16 = 4;
    pub const FOUR_ARM: u16 = 5;
    pub const IIC: u16 = 6;
    pub const ARMS: u16 = 7;
    pub const SMOKE: u16 = 8;
}

/// Two-sided normal quantile for a confidence level.
pub fn z_value(confidence: f64) -> f64 {
    let n = Normal::new(0.0, 1.0).expect("standard normal");
    n.inverse_cdf(1.0 - (1.0 - confidence) / 2.0)
}

/// Wilson score interval.
pub fn wilson(successes: u64, trials: u64, confidence: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = z_value(confidence);
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    let lo = if successes == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if successes == trials { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

/// A binomial frequency with its Wilson interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub successes: u64,
    pub trials: u64,
    pub estimate: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

impl Estimate {
    pub fn new(successes: u64, trials: u64, confidence: f64) -> Self {
        assert!(successes <= trials, "successes exceed trials");
        let (ci_lo, ci_hi) = wilson(successes, trials, confidence);
        let estimate = if trials == 0 { 0.0 } else { successes as f64 / trials as f64 };
        Estimate { successes, trials, estimate, ci_lo, ci_hi }
    }

    /// Plug-in standard error `sqrt(p̂(1 − p̂)/n)`.
    pub fn std_err(&self) -> f64 {
        if self.trials == 0 {
            return f64::INFINITY;
        }
        (self.estimate * (1.0 - self.estimate) / self.trials as f64).sqrt()
    }
}

/// Number of indices in `range` where `f` holds, evaluated in parallel.
/// The result does not depend on scheduling.
pub fn count_par(range: std::ops::Range<u64>, f: impl Fn(u64) -> bool + Sync + Send) -> u64 {
    range.into_par_iter().filter(|&i| f(i)).count() as u64
}

/// Ratio `a / b` of two independent estimates with a delta-method interval
/// on the log scale.
pub fn ratio_interval(a: &Estimate, b: &Estimate, confidence: f64) -> (f64, f64, f64) {
    product_interval(&[*a], &[*b], confidence)
}

/// `Π num / Π den` of independent estimates with a delta-method interval on
/// the log scale. NaN when any factor has no successes.
pub fn product_interval(num: &[Estimate], den: &[Estimate], confidence: f64) -> (f64, f64, f64) {
    if num.iter().chain(den).any(|e| e.successes == 0) {
        return (f64::NAN, f64::NAN, f64::NAN);
    }
    let r = num.iter().map(|e| e.estimate).product::<f64>() / den.iter().map(|e| e.estimate).product::<f64>();
    let s = num.iter().chain(den).map(|e| (1.0 - e.estimate) / e.successes as f64).sum::<f64>().sqrt();
    let z = z_value(confidence);
    (r, r * (-z * s).exp(), r * (z * s).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_reference_values() {
        // 95%: z = 1.959964
        assert!((z_value(0.95) - 1.959_964).abs() < 1e-5);
        let (lo, hi) = wilson(0, 10, 0.95);
        assert_eq!(lo, 0.0);
        assert!((hi - 0.277_532).abs() < 1e-5);
        let (lo, hi) = wilson(50, 100, 0.95);
        assert!((lo - 0.403_832).abs() < 1e-5 && (hi - 0.596_168).abs() < 1e-5);
    }

    #[test]
    fn count_par_is_exact() {
        assert_eq!(count_par(0..1000, |i| i % 7 == 0), 143);
        assert_eq!(count_par(5..5, |_| true), 0);
    }

    #[test]
    fn ratio_of_equal_estimates_is_one() {
        let a = Estimate::new(400, 1000, 0.95);
        let (r, lo, hi) = ratio_interval(&a, &a, 0.95);
        assert!((r - 1.0).abs() < 1e-12 && lo < 1.0 && hi > 1.0);
    }
}
