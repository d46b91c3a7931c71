//! Exact ground truth on tiny instances.
//!
//! Bernoulli events are computed by enumerating every open/closed
//! configuration of a small edge set; invasion events by enumerating every
//! ordering of the weights of a tiny graph. The reference definitions in
//! [`reference`] are written directly from the combinatorial definitions and
//! share no code with the grid detectors they validate.

pub mod conformance;
pub mod fixtures;
pub mod invasion;
pub mod reference;

use std::collections::BTreeMap;

use num::{BigInt, BigRational, One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Edge, Site};
use crate::unionfind::UnionFind;
use crate::weights::{EdgeStatus, ExplicitWeights};

pub use invasion::{oracle_invasion_event, reference_invasion, ReferenceInvasion};

/// Largest edge set enumerated configuration by configuration.
pub const MAX_BERNOULLI_EDGES: usize = 24;
/// Largest edge set whose weight orderings are enumerated.
pub const MAX_ORDERING_EDGES: usize = 8;

/// An ordered set of at most 64 edges; configurations over it are `u64`
/// masks with bit `i` set iff edge `i` is open.
#[derive(Clone, Debug)]
pub struct EdgeSet {
    edges: Vec<Edge>,
    x0: i32,
    y0: i32,
    w: usize,
    h: usize,
    // slot per (site, orientation) of the bounding box, 255 = absent
    slots: Vec<u8>,
}

impl EdgeSet {
    pub fn new(edges: Vec<Edge>) -> Result<Self> {
        if edges.len() > 64 {
            return Err(Error::TooLarge(format!("{} edges exceed the 64-edge mask width", edges.len())));
        }
        let (mut x0, mut x1, mut y0, mut y1) = (0, 0, 0, 0);
        for (i, e) in edges.iter().enumerate() {
            if edges[..i].contains(e) {
                return Err(Error::Parameter(format!("edge {e} listed twice")));
            }
            let b = e.base;
            if i == 0 {
                (x0, x1, y0, y1) = (b.x, b.x, b.y, b.y);
            }
            x0 = x0.min(b.x);
            x1 = x1.max(b.x);
            y0 = y0.min(b.y);
            y1 = y1.max(b.y);
        }
        let w = (x1 - x0 + 1) as usize;
        let h = (y1 - y0 + 1) as usize;
        let mut set = EdgeSet { edges, x0, y0, w, h, slots: vec![u8::MAX; 2 * w * h] };
        for i in 0..set.edges.len() {
            let s = set.slot(set.edges[i]).unwrap();
            set.slots[s] = i as u8;
        }
        Ok(set)
    }

    /// All edges of `B(n)`.
    pub fn ball(n: i32) -> Result<Self> {
        Self::new(crate::lattice::Region::ball(n)?.edges())
    }

    /// Edges of `B(n)` with at least one end strictly inside: the only
    /// edges that can matter for paths that stop at `∂B(n)`.
    pub fn ball_interior(n: i32) -> Result<Self> {
        Self::new(crate::lattice::Region::ball(n)?.edges().into_iter().filter(|e| e.a().norm() < n || e.b().norm() < n).collect())
    }

    /// Edges with both ends in `Ann(m, n)`.
    pub fn annulus(m: i32, n: i32) -> Result<Self> {
        Self::new(crate::lattice::Region::annulus(m, n)?.edges())
    }

    #[inline]
    fn slot(&self, e: Edge) -> Option<usize> {
        let dx = e.base.x - self.x0;
        let dy = e.base.y - self.y0;
        if dx < 0 || dy < 0 || dx as usize >= self.w || dy as usize >= self.h {
            return None;
        }
        let o = matches!(e.orientation, crate::lattice::Orientation::Vertical) as usize;
        Some(2 * (dy as usize * self.w + dx as usize) + o)
    }

    /// Position of `e` in the set.
    #[inline]
    pub fn index(&self, e: Edge) -> Option<usize> {
        self.slot(e).map(|s| self.slots[s]).filter(|i| *i != u8::MAX).map(usize::from)
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Mask of the edges satisfying `f`.
    pub fn mask(&self, f: impl Fn(Edge) -> bool) -> u64 {
        self.edges.iter().enumerate().filter(|(_, e)| f(**e)).fold(0, |m, (i, _)| m | 1 << i)
    }

    pub fn full_mask(&self) -> u64 {
        if self.edges.len() == 64 {
            u64::MAX
        } else {
            (1u64 << self.edges.len()) - 1
        }
    }

    pub fn config(&self, open: u64) -> MaskConfig<'_> {
        MaskConfig { set: self, open }
    }
}

/// One configuration of an [`EdgeSet`]; edges outside the set are closed.
#[derive(Clone, Copy, Debug)]
pub struct MaskConfig<'a> {
    set: &'a EdgeSet,
    pub open: u64,
}

impl EdgeStatus for MaskConfig<'_> {
    #[inline]
    fn is_open(&self, e: Edge) -> bool {
        self.set.index(e).is_some_and(|i| self.open >> i & 1 == 1)
    }
}

/// A small connected graph with a designated origin and boundary.
#[derive(Clone, Debug)]
pub struct TinyGraph {
    set: EdgeSet,
    sites: Vec<Site>,
    origin: Site,
    boundary: Vec<Site>,
}

impl TinyGraph {
    pub fn new(edges: Vec<Edge>, origin: Site, boundary: Vec<Site>) -> Result<Self> {
        if edges.is_empty() {
            return Err(Error::Parameter("tiny graph needs at least one edge".into()));
        }
        let set = EdgeSet::new(edges)?;
        let mut sites: Vec<Site> = set.edges().iter().flat_map(|e| [e.a(), e.b()]).collect();
        sites.sort();
        sites.dedup();
        let pos = |s: Site| sites.binary_search(&s).ok();
        if pos(origin).is_none() {
            return Err(Error::Parameter(format!("origin {origin} is not a vertex")));
        }
        if let Some(b) = boundary.iter().find(|b| pos(**b).is_none()) {
            return Err(Error::Parameter(format!("boundary site {b} is not a vertex")));
        }
        let mut uf = UnionFind::new(sites.len());
        for e in set.edges() {
            uf.union(pos(e.a()).unwrap(), pos(e.b()).unwrap());
        }
        if uf.size_of(0) != sites.len() {
            return Err(Error::Parameter("tiny graph is not connected".into()));
        }
        Ok(TinyGraph { set, sites, origin, boundary })
    }

    /// The relevant edges of `B(n)` for events between the origin and
    /// `∂B(n)`, with that boundary.
    pub fn ball(n: i32) -> Result<Self> {
        let set = EdgeSet::ball_interior(n)?;
        // corners of ∂B(n) touch no interior edge
        let bd = crate::lattice::boundary(Site::ORIGIN, n)?.into_iter().filter(|s| s.x.abs() != s.y.abs() || n == 0).collect();
        Self::new(set.edges, Site::ORIGIN, bd)
    }

    pub fn edge_set(&self) -> &EdgeSet {
        &self.set
    }

    pub fn edges(&self) -> &[Edge] {
        self.set.edges()
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn origin(&self) -> Site {
        self.origin
    }

    pub fn boundary(&self) -> &[Site] {
        &self.boundary
    }
}

/// Number of satisfying configurations of an edge set, split by the number
/// of open edges: `counts[k]` configurations with `k` open edges.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpenCounts {
    pub edges: usize,
    pub counts: Vec<u64>,
}

impl OpenCounts {
    pub fn zero(edges: usize) -> Self {
        OpenCounts { edges, counts: vec![0; edges + 1] }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    fn add(mut self, other: &OpenCounts) -> Self {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self
    }

    /// `Σ_k counts[k] p^k (1 − p)^{E − k}`.
    pub fn probability(&self, p: &BigRational) -> BigRational {
        let q = BigRational::one() - p;
        let mut total = BigRational::zero();
        for (k, c) in self.counts.iter().enumerate() {
            if *c == 0 {
                continue;
            }
            let term = num::pow(p.clone(), k) * num::pow(q.clone(), self.edges - k);
            total += term * BigRational::from_integer(BigInt::from(*c));
        }
        total
    }
}

/// `a / b` as an exact rational.
pub fn ratio(a: i64, b: i64) -> BigRational {
    BigRational::new(a.into(), b.into())
}

pub fn ratio_to_f64(r: &BigRational) -> f64 {
    r.numer().to_f64().unwrap_or(f64::NAN) / r.denom().to_f64().unwrap_or(f64::NAN)
}

/// Validates `p ∈ [0, 1]` with denominator at most 64.
pub fn check_probability(p: &BigRational) -> Result<()> {
    if *p < BigRational::zero() || *p > BigRational::one() {
        return Err(Error::Parameter(format!("p = {p} is outside [0, 1]")));
    }
    if *p.denom() > BigInt::from(64) {
        return Err(Error::Parameter(format!("p = {p} has denominator above 64")));
    }
    Ok(())
}

const CHUNK_BITS: u32 = 14;

/// Tallies a value computed on every configuration of `free` (bit
/// positions in `set`), with the other bits fixed to `base`. The returned
/// map sends each value to its counts by number of open free edges.
pub fn tally_configs<T, F>(set: &EdgeSet, base: u64, free: &[usize], f: F) -> Result<BTreeMap<T, OpenCounts>>
where
    T: Ord + Send,
    F: Fn(&MaskConfig<'_>) -> T + Sync,
{
    if free.len() > MAX_BERNOULLI_EDGES {
        return Err(Error::TooLarge(format!(
            "{} free edges, the enumeration limit is {MAX_BERNOULLI_EDGES}",
            free.len()
        )));
    }
    if free.iter().any(|b| *b >= set.len()) {
        return Err(Error::Parameter("free bit outside the edge set".into()));
    }
    let e = free.len();
    let total: u64 = 1 << e;
    let chunk = 1u64 << CHUNK_BITS.min(e as u32);
    let base = base & !free.iter().fold(0u64, |m, b| m | 1 << b);
    let merged = (0..total / chunk)
        .into_par_iter()
        .map(|c| {
            let mut out: BTreeMap<T, OpenCounts> = BTreeMap::new();
            for j in c * chunk..(c + 1) * chunk {
                let mut mask = base;
                for (k, b) in free.iter().enumerate() {
                    mask |= (j >> k & 1) << b;
                }
                let v = f(&set.config(mask));
                out.entry(v).or_insert_with(|| OpenCounts::zero(e)).counts[j.count_ones() as usize] += 1;
            }
            out
        })
        .reduce(BTreeMap::new, |mut a, b| {
            for (k, v) in b {
                let slot = a.remove(&k).unwrap_or_else(|| OpenCounts::zero(e));
                a.insert(k, slot.add(&v));
            }
            a
        });
    Ok(merged)
}

/// Counts the configurations of all edges of `set` satisfying `pred`.
pub fn count_configs<F>(set: &EdgeSet, pred: F) -> Result<OpenCounts>
where
    F: Fn(&MaskConfig<'_>) -> bool + Sync,
{
    let free: Vec<usize> = (0..set.len()).collect();
    let mut t = tally_configs(set, 0, &free, pred)?;
    Ok(t.remove(&true).unwrap_or_else(|| OpenCounts::zero(set.len())))
}

/// Exact `P_p(predicate)` over all `2^E` configurations of the graph's
/// edges; edges outside the graph are closed.
pub fn oracle_bernoulli_event<F>(graph: &TinyGraph, p: &BigRational, predicate: F) -> Result<BigRational>
where
    F: Fn(&MaskConfig<'_>) -> bool + Sync,
{
    check_probability(p)?;
    Ok(count_configs(graph.edge_set(), predicate)?.probability(p))
}

/// Explicit weights on the edges of a tiny graph; every other edge has
/// infinite weight and is never invaded.
pub fn explicit_weights(graph: &TinyGraph, weights: &[(Edge, f64)]) -> Result<ExplicitWeights> {
    if let Some((e, _)) = weights.iter().find(|(e, _)| graph.edge_set().index(*e).is_none()) {
        return Err(Error::Parameter(format!("{e} is not an edge of the graph")));
    }
    ExplicitWeights::new(weights.iter().copied())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connectivity::origin_connects;
    use crate::lattice::Site;

    #[test]
    fn trivial_events() {
        let g = TinyGraph::new(vec![Edge::horizontal(Site::ORIGIN)], Site::ORIGIN, vec![Site::new(1, 0)]).unwrap();
        let half = ratio(1, 2);
        assert_eq!(oracle_bernoulli_event(&g, &half, |_| true).unwrap(), BigRational::one());
        let e = g.edges()[0];
        assert_eq!(oracle_bernoulli_event(&g, &half, |c| c.is_open(e)).unwrap(), half);
        assert_eq!(oracle_bernoulli_event(&g, &ratio(1, 3), |c| c.is_open(e)).unwrap(), ratio(1, 3));
        assert!(oracle_bernoulli_event(&g, &ratio(1, 65), |_| true).is_err());
        assert!(oracle_bernoulli_event(&g, &ratio(3, 2), |_| true).is_err());
    }

    #[test]
    fn partitions_sum_to_one() {
        let g = TinyGraph::ball(1).unwrap();
        let set = g.edge_set();
        let free: Vec<usize> = (0..set.len()).collect();
        let t = tally_configs(set, 0, &free, |c| c.open.count_ones() % 3).unwrap();
        for p in [ratio(1, 4), ratio(1, 2), ratio(3, 4), ratio(5, 64)] {
            let s: BigRational = t.values().map(|c| c.probability(&p)).sum();
            assert_eq!(s, BigRational::one());
        }
    }

    #[test]
    fn refuses_large_sets() {
        let g = TinyGraph::new(crate::lattice::Region::ball(2).unwrap().edges(), Site::ORIGIN, vec![]).unwrap();
        assert!(matches!(oracle_bernoulli_event(&g, &ratio(1, 2), |_| true), Err(Error::TooLarge(_))));
        assert!(EdgeSet::ball(4).is_err());
    }

    #[test]
    fn tiny_graph_validation() {
        let e = Edge::horizontal(Site::new(3, 3));
        assert!(TinyGraph::new(vec![e], Site::ORIGIN, vec![]).is_err());
        let far = vec![Edge::horizontal(Site::ORIGIN), e];
        assert!(TinyGraph::new(far, Site::ORIGIN, vec![]).is_err());
        assert!(TinyGraph::new(vec![], Site::ORIGIN, vec![]).is_err());
    }

    #[test]
    fn one_arm_on_b1() {
        // P(0 ↔ ∂B(1)) on B(1): the origin is cut off only when its four
        // edges are closed, so the value is 1 − (1 − p)^4.
        let g = TinyGraph::new(EdgeSet::ball(1).unwrap().edges().to_vec(), Site::ORIGIN, vec![]).unwrap();
        let half = ratio(1, 2);
        let p = oracle_bernoulli_event(&g, &half, |c| origin_connects(c, 1)).unwrap();
        assert_eq!(p, ratio(15, 16));
    }
}
