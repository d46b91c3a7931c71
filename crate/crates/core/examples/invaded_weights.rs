//! Long invasion: invaded weights against Uniform[0, 1/2] and the ratio of
//! boundary edges to invaded edges.
//!
//! cargo run --release --example invaded_weights -- [steps]

use invasion_lab::invasion::{invaded_statistics, ks_distance_uniform, run_invasion, StopRule};
use invasion_lab::weights::WeightField;

fn main() -> anyhow::Result<()> {
    let steps: usize = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(200_000);
    let trace = run_invasion(&WeightField::new(3, 0), StopRule::steps(steps))?;
    let s = invaded_statistics(&trace, 20);

    let ks = ks_distance_uniform(trace.taus(), 0.0, 0.5);
    println!("steps {steps}");
    println!("KS distance to Uniform[0, 1/2]: {ks:.4}");
    println!("boundary / volume: {:.4}", s.boundary_to_volume);
    println!("fraction of weights above 1/2: {:.5}", s.fraction_above_half);

    let total: u64 = s.histogram.iter().sum();
    let width = 1.0 / s.histogram.len() as f64;
    for (i, c) in s.histogram.iter().enumerate() {
        let density = *c as f64 / total as f64 / width;
        println!("[{:.2}, {:.2}) {:>6.3} {}", i as f64 * width, (i + 1) as f64 * width, density, "#".repeat((density * 20.0) as usize));
    }
    Ok(())
}
