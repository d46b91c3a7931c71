//! Grows an invasion cluster, splits it into ponds and prints the outlets.
//!
//! cargo run --release --example invasion -- [seed] [horizon]

use invasion_lab::invasion::{decompose_ponds_with, run_invasion, write_trace, PondOptions, StopRule};
use invasion_lab::weights::WeightField;

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(1);
    let horizon: i32 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(256);

    let w = WeightField::new(seed, 0);
    let trace = run_invasion(&w, StopRule::radius(horizon))?;
    println!("{} steps until dB({horizon}) ({:?})", trace.len(), trace.stop_reason);

    let d = decompose_ponds_with(&trace, PondOptions::default())?;
    println!("{} outlets, first {} confirmed", d.outlets().len(), d.confirmed_prefix());
    println!("{:>3} {:>8} {:>10} {:>6} {:>6} {:>9}", "k", "step", "tau", "Rhat", "Rbar", "confirmed");
    for (k, (o, (hat, bar))) in d.outlets().iter().zip(d.raw_radii()).enumerate().take(12) {
        println!("{:>3} {:>8} {:>10.6} {:>6} {:>6} {:>9}", k + 1, o.index + 1, o.tau, hat, bar, o.confirmed);
    }
    for k in 1..=2 {
        let (b, exact) = d.hat_radius_bound(k).unwrap();
        println!("Rhat_{k} {} {b}", if exact { "=" } else { ">=" });
    }

    let path = std::env::temp_dir().join(format!("invasion_{seed}.csv"));
    write_trace(&trace, std::fs::File::create(&path)?)?;
    println!("trace written to {}", path.display());
    Ok(())
}
