//! Counter-based weights: every edge weight is a pure function of
//! (seed, stream, edge), so trials can run in any order on any thread.
//!
//! cargo run --release --example weight_streams

use invasion_lab::lattice::{Edge, Site};
use invasion_lab::stats::lane;
use invasion_lab::weights::{derive_seed, threshold_config, EdgeWeights, WeightField};
use invasion_lab::lattice::Region;

fn main() -> anyhow::Result<()> {
    let e = Edge::between(Site::ORIGIN, Site::new(1, 0))?;
    let a = WeightField::new(42, WeightField::lane_stream(lane::INVASION, 7));
    let b = WeightField::new(42, WeightField::lane_stream(lane::INVASION, 7));
    let c = WeightField::new(42, WeightField::lane_stream(lane::ARMS, 7));
    println!("same seed and stream: {} {}", a.weight(e), b.weight(e));
    println!("other lane:           {}", c.weight(e));
    println!("derived seeds: {:#x} {:#x}", derive_seed(42, 0x11c, 0), derive_seed(42, 0x11c, 1));

    // one field, many thresholds: configurations are nested in p
    for p in [0.3, 0.5, 0.7] {
        let cfg = threshold_config(&a, Region::ball(4)?, p);
        println!("p = {p}: {} of {} edges of B(4) open", cfg.open_count(), Region::ball(4)?.edges().len());
    }
    Ok(())
}
