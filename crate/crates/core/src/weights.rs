//! Edge weights `τ_e ∈ [0, 1)` and the p-open / p-closed configurations they
//! induce.
//!
//! [`WeightField`] is counter based: the weight of an edge is a hash of
//! `(master seed, stream, canonical edge id)`. Nothing is stored, so fields
//! are free to create, cheap to share across threads and can be queried in
//! any order.

use std::collections::BTreeMap;

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{DualEdge, Edge, Orientation, Region};

/// Anything that assigns a weight to every edge of Z².
///
/// A weight of `f64::INFINITY` marks an edge as absent: the invasion never
/// enters it and it is closed at every threshold.
pub trait EdgeWeights: Sync {
    fn weight(&self, e: Edge) -> f64;
}

impl<W: EdgeWeights + ?Sized> EdgeWeights for &W {
    fn weight(&self, e: Edge) -> f64 {
        (**self).weight(e)
    }
}

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A seed for an independent sub-experiment, keyed by a tag and an index.
pub fn derive_seed(master_seed: u64, tag: u64, index: u64) -> u64 {
    mix64(mix64(master_seed ^ tag.wrapping_mul(GOLDEN)).wrapping_add(mix64(index.wrapping_add(GOLDEN))))
}

/// Maps a 64-bit hash to `[0, 1)` with 53 bits of resolution.
#[inline]
pub fn unit_f64(h: u64) -> f64 {
    (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Counter-based i.i.d. Uniform[0,1) weights keyed by `(seed, stream, edge)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WeightField {
    pub master_seed: u64,
    pub stream_index: u64,
    #[serde(skip)]
    key: u64,
}

impl WeightField {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        let key = mix64(mix64(master_seed.wrapping_add(GOLDEN)) ^ stream_index.wrapping_mul(GOLDEN));
        WeightField { master_seed, stream_index, key }
    }

    /// Same seed, different stream.
    pub fn stream(&self, stream_index: u64) -> Self {
        Self::new(self.master_seed, stream_index)
    }

    /// Packs a lane tag and a trial index into one stream index so that
    /// different uses of the same trial never share weights.
    pub fn lane_stream(lane: u16, index: u64) -> u64 {
        ((lane as u64) << 48) | (index & ((1u64 << 48) - 1))
    }

    #[inline]
    pub fn hash(&self, e: Edge) -> u64 {
        mix64(self.key ^ mix64(e.id().wrapping_add(GOLDEN)))
    }
}

impl EdgeWeights for WeightField {
    #[inline]
    fn weight(&self, e: Edge) -> f64 {
        unit_f64(self.hash(e))
    }
}

/// Hand-assigned weights; unlisted edges are absent (infinite weight).
#[derive(Clone, Debug, Default)]
pub struct ExplicitWeights {
    map: FxHashMap<Edge, f64>,
}

impl ExplicitWeights {
    /// Fails if two edges share a weight or a weight is not finite.
    pub fn new(weights: impl IntoIterator<Item = (Edge, f64)>) -> Result<Self> {
        let mut map = FxHashMap::default();
        let mut seen: BTreeMap<u64, ()> = BTreeMap::new();
        for (e, w) in weights {
            if !w.is_finite() {
                return Err(Error::Parameter(format!("weight of {e} is not finite")));
            }
            if seen.insert(w.to_bits(), ()).is_some() {
                return Err(Error::DuplicateWeight(w));
            }
            map.insert(e, w);
        }
        Ok(ExplicitWeights { map })
    }

    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.map.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

impl EdgeWeights for ExplicitWeights {
    fn weight(&self, e: Edge) -> f64 {
        self.map.get(&e).copied().unwrap_or(f64::INFINITY)
    }
}

/// Open/closed status of edges. Edges that a status does not know about are
/// closed.
pub trait EdgeStatus {
    fn is_open(&self, e: Edge) -> bool;

    /// A dual edge is open exactly when its primal edge is.
    fn dual_is_closed(&self, d: DualEdge) -> bool {
        !self.is_open(d.primal())
    }
}

impl<S: EdgeStatus + ?Sized> EdgeStatus for &S {
    fn is_open(&self, e: Edge) -> bool {
        (**self).is_open(e)
    }
}

/// Lazily thresholded weights: `e` is p-open iff `τ_e < p`; `τ_e = p` counts
/// as closed.
#[derive(Clone, Copy, Debug)]
pub struct Thresholded<W> {
    pub weights: W,
    pub p: f64,
}

impl<W: EdgeWeights> Thresholded<W> {
    pub fn new(weights: W, p: f64) -> Self {
        Thresholded { weights, p }
    }
}

impl<W: EdgeWeights> EdgeStatus for Thresholded<W> {
    #[inline]
    fn is_open(&self, e: Edge) -> bool {
        self.weights.weight(e) < self.p
    }
}

/// A materialised open/closed configuration over a finite region.
#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    region: Region,
    x0: i32,
    y0: i32,
    width: usize,
    height: usize,
    horizontal: Vec<bool>,
    vertical: Vec<bool>,
    p: Option<f64>,
}

impl Config {
    /// All region edges closed.
    pub fn closed(region: Region) -> Self {
        let (x0, x1, y0, y1) = region.bounds();
        let width = (x1 - x0 + 1) as usize;
        let height = (y1 - y0 + 1) as usize;
        Config {
            region,
            x0,
            y0,
            width,
            height,
            horizontal: vec![false; width * height],
            vertical: vec![false; width * height],
            p: None,
        }
    }

    /// All region edges open.
    pub fn open(region: Region) -> Self {
        let mut c = Self::closed(region);
        for e in region.edges() {
            c.set(e, true);
        }
        c
    }

    pub fn from_open_edges(region: Region, open: impl IntoIterator<Item = Edge>) -> Self {
        let mut c = Self::closed(region);
        for e in open {
            c.set(e, true);
        }
        c
    }

    pub fn region(&self) -> Region {
        self.region
    }

    /// Threshold the configuration was built at, if any.
    pub fn threshold(&self) -> Option<f64> {
        self.p
    }

    #[inline]
    fn slot(&self, e: Edge) -> Option<usize> {
        let dx = e.base.x - self.x0;
        let dy = e.base.y - self.y0;
        if dx < 0 || dy < 0 || dx as usize >= self.width || dy as usize >= self.height {
            return None;
        }
        Some(dy as usize * self.width + dx as usize)
    }

    /// Sets an edge's state. Edges outside the region are ignored.
    pub fn set(&mut self, e: Edge, open: bool) {
        if !self.region.contains_edge(e) {
            return;
        }
        if let Some(i) = self.slot(e) {
            match e.orientation {
                Orientation::Horizontal => self.horizontal[i] = open,
                Orientation::Vertical => self.vertical[i] = open,
            }
        }
    }

    pub fn open_edges(&self) -> Vec<Edge> {
        self.region.edges().into_iter().filter(|e| self.is_open(*e)).collect()
    }

    pub fn open_count(&self) -> usize {
        self.horizontal.iter().chain(&self.vertical).filter(|b| **b).count()
    }
}

impl EdgeStatus for Config {
    #[inline]
    fn is_open(&self, e: Edge) -> bool {
        match self.slot(e) {
            Some(i) => match e.orientation {
                Orientation::Horizontal => self.horizontal[i],
                Orientation::Vertical => self.vertical[i],
            },
            None => false,
        }
    }
}

/// The p-open configuration `{e ∈ region : τ_e < p}`.
pub fn threshold_config<W: EdgeWeights>(weights: &W, region: Region, p: f64) -> Config {
    let mut c = Config::closed(region);
    c.p = Some(p);
    for e in region.edges() {
        if weights.weight(e) < p {
            c.set(e, true);
        }
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{dual_edge, Site};
    use statrs::distribution::{ChiSquared, ContinuousCDF};

    fn edges_in(n: i32) -> Vec<Edge> {
        Region::ball(n).unwrap().edges()
    }

    #[test]
    fn deterministic_and_order_independent() {
        let f = WeightField::new(42, 7);
        let edges = edges_in(50);
        let forward: Vec<f64> = edges.iter().map(|e| f.weight(*e)).collect();
        let backward: Vec<f64> = edges.iter().rev().map(|e| f.weight(*e)).collect();
        let rev: Vec<f64> = backward.into_iter().rev().collect();
        assert_eq!(forward, rev);
        let g = WeightField::new(42, 7);
        assert_eq!(f.weight(edges[3]), g.weight(edges[3]));
        assert_ne!(f.weight(edges[3]), f.stream(8).weight(edges[3]));
    }

    #[test]
    fn uniform_marginals() {
        // 10^6 draws over many streams; chi-square on 100 bins at the 1% level
        let bins = 100;
        let mut counts = vec![0u64; bins];
        let mut sum = 0.0;
        let mut total = 0u64;
        let edges = edges_in(10); // 440 edges
        'outer: for s in 0.. {
            let f = WeightField::new(2024, s);
            for e in &edges {
                let w = f.weight(*e);
                assert!((0.0..1.0).contains(&w));
                sum += w;
                counts[(w * bins as f64) as usize] += 1;
                total += 1;
                if total == 1_000_000 {
                    break 'outer;
                }
            }
        }
        let mean = sum / total as f64;
        assert!((mean - 0.5).abs() < 0.002, "mean {mean}");
        let expect = total as f64 / bins as f64;
        let chi2: f64 = counts.iter().map(|c| (*c as f64 - expect).powi(2) / expect).sum();
        let crit = ChiSquared::new((bins - 1) as f64).unwrap().inverse_cdf(0.99);
        assert!(chi2 < crit, "chi2 {chi2} >= {crit}");
    }

    #[test]
    fn pairwise_correlation_and_collisions() {
        let f = WeightField::new(9, 0);
        let edges = edges_in(120);
        let n = 100_000.min(edges.len() - 1);
        let xs: Vec<f64> = (0..n).map(|i| f.weight(edges[i])).collect();
        let ys: Vec<f64> = (0..n).map(|i| f.weight(edges[i + 1])).collect();
        let mx = xs.iter().sum::<f64>() / n as f64;
        let my = ys.iter().sum::<f64>() / n as f64;
        let cov: f64 = xs.iter().zip(&ys).map(|(a, b)| (a - mx) * (b - my)).sum::<f64>();
        let vx: f64 = xs.iter().map(|a| (a - mx).powi(2)).sum();
        let vy: f64 = ys.iter().map(|b| (b - my).powi(2)).sum();
        let rho = cov / (vx * vy).sqrt();
        assert!(rho.abs() < 0.01, "rho {rho}");

        // Birthday bound: with 53-bit weights, 10^6 pairs collide with
        // probability ~1e-10; any collision would signal a broken mixer.
        let g = WeightField::new(10, 3);
        let mut pairs = 0u64;
        let mut collisions = 0u64;
        for (i, e) in edges.iter().enumerate().take(1_000_000) {
            let e2 = edges[(i * 7919 + 13) % edges.len()];
            if *e != e2 {
                pairs += 1;
                if g.weight(*e) == g.weight(e2) {
                    collisions += 1;
                }
            }
        }
        assert!(pairs > 50_000);
        assert_eq!(collisions, 0);
    }

    #[test]
    fn threshold_extremes_and_fraction() {
        let f = WeightField::new(1, 1);
        let r = Region::ball(8).unwrap();
        assert_eq!(threshold_config(&f, r, 0.0).open_count(), 0);
        assert_eq!(threshold_config(&f, r, 1.0).open_count(), r.edges().len());
        let c = threshold_config(&f, r, 0.5);
        assert_eq!(r.edges().len(), 544);
        // Binomial(544, 1/2), 3 sigma band on the open fraction
        let frac = c.open_count() as f64 / 544.0;
        assert!((frac - 0.5).abs() < 3.0 * (0.25f64 / 544.0).sqrt(), "{frac}");
        for e in r.edges() {
            assert_eq!(c.is_open(e), f.weight(e) < 0.5);
            assert_eq!(c.dual_is_closed(dual_edge(e)), !c.is_open(e));
        }
    }

    #[test]
    fn explicit_weights_validation() {
        let e1 = Edge::horizontal(Site::ORIGIN);
        let e2 = Edge::vertical(Site::ORIGIN);
        assert!(matches!(
            ExplicitWeights::new([(e1, 0.3), (e2, 0.3)]),
            Err(Error::DuplicateWeight(_))
        ));
        let w = ExplicitWeights::new([(e1, 0.3), (e2, 0.7)]).unwrap();
        assert_eq!(w.weight(e1), 0.3);
        assert!(w.weight(Edge::horizontal(Site::new(5, 5))).is_infinite());
        let r = Region::ball(1).unwrap();
        let c = threshold_config(&w, r, 0.5);
        assert_eq!(c.open_edges(), vec![e1]);
    }

    #[test]
    fn ties_are_closed() {
        let e = Edge::horizontal(Site::ORIGIN);
        let w = ExplicitWeights::new([(e, 0.5)]).unwrap();
        assert!(!Thresholded::new(&w, 0.5).is_open(e));
    }
}
