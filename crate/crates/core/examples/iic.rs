//! Critical clusters conditioned to reach dB(N), and the disconnecting
//! edges of their origin cluster.
//!
//! cargo run --release --example iic -- [N]

use invasion_lab::connectivity::disconnecting_edges;
use invasion_lab::experiments::{cluster_edges, no_disconnecting_edge, sample_iic};
use invasion_lab::lattice::Site;
use invasion_lab::weights::Thresholded;

fn main() -> anyhow::Result<()> {
    let big: i32 = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(64);
    for seed in 1..=5 {
        let s = sample_iic(big, 100_000, seed)?;
        let (edges, boundary) = cluster_edges(&Thresholded::new(&s.field, 0.5), big);
        let bridges = disconnecting_edges(&edges, Site::ORIGIN, &boundary)?;
        let mut norms: Vec<i32> = bridges.iter().map(|e| e.norm()).collect();
        norms.sort_unstable();
        let m = big / 16;
        let n = big / 4;
        println!(
            "seed {seed}: {} attempts, {} edges, {} disconnecting edges at norms {:?}; none in Ann({m},{n}): {}",
            s.attempts,
            edges.len(),
            bridges.len(),
            &norms[..norms.len().min(10)],
            no_disconnecting_edge(&edges, &boundary, m, n)?
        );
    }
    Ok(())
}
