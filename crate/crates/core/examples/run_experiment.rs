//! Runs a registered experiment through the checkpointing runner, then
//! replays it from its sidecar.
//!
//! cargo run --release --example run_experiment -- [experiment id]

use invasion_lab::experiments::registry;
use invasion_lab::runner::{execute, replay, ExecOptions, RunConfig};

fn main() -> anyhow::Result<()> {
    let id = std::env::args().nth(1).unwrap_or_else(|| "exp_pond_radii".into());
    let entry = registry().into_iter().find(|e| e.id == id).ok_or_else(|| anyhow::anyhow!("unknown id {id}"))?;
    let dir = std::env::temp_dir().join("ipl_example");
    let cfg = RunConfig::from_json(&serde_json::json!({
        "experiment": id,
        "seed": 1,
        "params": entry.smoke,
        "output_dir": dir,
        "checkpoint_interval": 100,
    }).to_string())?;

    // stop after two blocks, as if killed, then resume
    let partial = execute(&cfg, &ExecOptions { max_blocks: Some(2) })?;
    println!("stopped: completed = {}, checkpoint {}", partial.completed, partial.checkpoint_path.display());
    let out = execute(&cfg, &ExecOptions::default())?;
    println!("{} rows -> {}", out.rows.len(), out.csv_path.display());
    for r in &out.rows {
        println!(
            "{:<40} k={:<4} m={:<4} n={:<5} {:.5} [{:.5}, {:.5}] {}",
            r.quantity,
            r.k.map_or("-".into(), |v| v.to_string()),
            r.m.map_or("-".into(), |v| v.to_string()),
            r.n.map_or("-".into(), |v| v.to_string()),
            r.estimate,
            r.ci_lo,
            r.ci_hi,
            r.flag
        );
    }

    let rep = replay(&out.sidecar_path, Some(0))?;
    println!("replay: csv matches = {}, row 0 matches = {:?}", rep.csv_matches, rep.row.map(|(_, same)| same));
    Ok(())
}
