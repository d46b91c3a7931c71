//! Square crossings near p = 1/2, the correlation length L(p) and the
//! effective threshold p_n.
//!
//! cargo run --release --example correlation_length

use invasion_lab::scaling::{estimate_l, estimate_pn, estimate_sigma, ladder, EstimatorConfig};

fn main() -> anyhow::Result<()> {
    let t = std::time::Instant::now();
    let cfg = EstimatorConfig { max_n: 64, trials: 400, max_trials: 3200, ..EstimatorConfig::default() };

    println!("sigma(n, n, p), 2000 trials");
    for p in [0.45, 0.5, 0.55, 0.6] {
        let row: Vec<String> = [8, 16, 32]
            .iter()
            .map(|&n| format!("{:.3}", estimate_sigma(n, n, p, 2000, 1).map(|e| e.estimate).unwrap_or(f64::NAN)))
            .collect();
        println!("  p = {p:.2}: {}", row.join("  "));
    }

    for p in [0.6, 0.7] {
        let l = estimate_l(p, &cfg)?;
        println!("L({p}) = {:?}{}", l.l, if l.boundary_uncertain { " (boundary uncertain)" } else { "" });
    }
    for n in [8, 16] {
        let e = estimate_pn(n, &cfg)?;
        println!("p_{n} = {:.4} in [{:.4}, {:.4}]", e.p, e.lo, e.hi);
    }

    let lad = ladder(2048, &EstimatorConfig { c_star: 4.0, ..cfg.clone() })?;
    println!("ladder for l = {}, C_* = 4: log* = {}, p = {:?}, sides = {:?}", lad.l, lad.log_star, lad.p_values, lad.sides);
    println!("{:.1}s", t.elapsed().as_secs_f64());
    Ok(())
}
