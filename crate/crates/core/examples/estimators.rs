//! One-arm probabilities and the ratio estimators built from them.
//!
//! cargo run --release --example estimators

use invasion_lab::scaling::{estimate_onearm, estimate_pi};
use invasion_lab::stats::{product_interval, ratio_interval, Estimate};

fn main() -> anyhow::Result<()> {
    let trials = 20_000;
    let mut prev: Option<Estimate> = None;
    for n in [4, 8, 16, 32, 64] {
        let pi = estimate_pi(n, trials, 1)?;
        let margin = pi.estimate - 0.5 / (n as f64).sqrt();
        print!("pi({n:>2}) = {:.4} [{:.4}, {:.4}], pi - n^-1/2/2 = {margin:+.4}", pi.estimate, pi.ci_lo, pi.ci_hi);
        if let Some(p) = prev {
            let (r, lo, hi) = ratio_interval(&pi, &p, 0.95);
            print!(", pi(n)/pi(n/2) = {r:.3} [{lo:.3}, {hi:.3}]");
        }
        println!();
        prev = Some(pi);
    }

    // supercritical one-arm probability approaches the infinite-cluster density
    for p in [0.55, 0.6, 0.7] {
        let e = estimate_onearm(p, 32, trials, 2)?;
        println!("P_p(0 <-> dB(32)) at p = {p}: {:.4}", e.estimate);
    }

    let a = Estimate::new(300, 1000, 0.95);
    let b = Estimate::new(600, 1000, 0.95);
    let c = Estimate::new(900, 1000, 0.95);
    let (v, lo, hi) = product_interval(&[a, b], &[c], 0.95);
    println!("a*b/c = {v:.4} [{lo:.4}, {hi:.4}]");
    Ok(())
}
