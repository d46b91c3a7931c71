//! Runs every detector against its reference definition on all
//! configurations of small boxes and annuli.
//!
//! cargo run --release --example conformance

use std::time::Instant;

use invasion_lab::oracle::conformance;

fn main() -> anyhow::Result<()> {
    let t = Instant::now();
    let results = conformance::run_all()?;
    for r in &results {
        let half = r.values.iter().find(|v| v.p == "1/2").map(|v| v.reference.as_str()).unwrap_or("-");
        println!(
            "{:<6} {:<28} {:<40} configs={:<10} mismatches={} P_1/2={}",
            if r.passed() { "ok" } else { "FAIL" },
            r.detector,
            r.instance,
            r.configs,
            r.mismatches,
            half
        );
    }
    println!("{:.1}s", t.elapsed().as_secs_f64());
    Ok(())
}
