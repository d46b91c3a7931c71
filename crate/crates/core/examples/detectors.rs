//! The connectivity detectors on one critical configuration.
//!
//! cargo run --release --example detectors -- [seed]

use invasion_lab::connectivity::{
    clusters, defect_costs, four_arm, has_crossing, has_open_circuit_in_annulus, max_disjoint_arms, origin_reach_radius,
    surrounding_closed_cluster,
};
use invasion_lab::lattice::{Edge, Orientation, Region, Site};
use invasion_lab::weights::{Thresholded, WeightField};

fn main() -> anyhow::Result<()> {
    let seed: u64 = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(5);
    let w = WeightField::new(seed, 0);
    let open = Thresholded::new(&w, 0.5);
    let n = 32;

    let labels = clusters(&open, Region::ball(n)?);
    let mut sizes: Vec<usize> = labels.clusters().iter().map(|c| c.size).collect();
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    println!("{} clusters in B({n}); largest {:?}", labels.len(), &sizes[..5.min(sizes.len())]);
    if let Some(c) = labels.cluster_of(Site::ORIGIN) {
        println!("origin cluster: {} sites, diameter {}", c.size, c.diameter());
    }
    println!("origin reaches radius {}", origin_reach_radius(&open, n));

    let rect = Region::rect(0, n, 0, n)?;
    println!("left-right crossing of [0,{n}]^2: {}", has_crossing(&open, rect, Orientation::Horizontal)?);
    for (m, k) in [(2, 8), (4, 16), (8, 32)] {
        println!(
            "Ann({m},{k}): open circuit {}, disjoint open arms {}",
            has_open_circuit_in_annulus(&open, m, k)?,
            max_disjoint_arms(&open, m, k)?
        );
    }
    match surrounding_closed_cluster(&open, n)? {
        Some(r) => println!("a closed dual circuit surrounds the origin inside B({r})"),
        None => println!("no closed dual circuit around the origin inside B({n})"),
    }
    let e = Edge::between(Site::ORIGIN, Site::new(1, 0))?;
    println!("four alternating arms from {e:?} to dB(8) at p = 1/2: {}", four_arm(&w, e, 8, 0.5, 0.5)?);

    let costs = defect_costs(&open, n, 4);
    for r in [4, 8, 16, 32] {
        println!("closed edges needed to reach dB({r}): {:?}", costs[r as usize - 1]);
    }
    Ok(())
}
