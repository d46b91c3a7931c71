//! Direct combinatorial definitions evaluated on bit masks.
//!
//! A [`MaskGraph`] is a graph whose edges are tied to bits of an
//! [`EdgeSet`]; an edge is usable in a configuration when its bit is set in
//! the `usable` mask (the open mask for primal graphs, its complement for
//! dual graphs). Vertex sets are `u64` masks.

use rustc_hash::FxHashMap;

use super::EdgeSet;

#[derive(Clone, Debug)]
pub struct MaskGraph {
    verts: Vec<(i32, i32)>,
    index: FxHashMap<(i32, i32), u8>,
    /// (edge-set bit, end, end)
    edges: Vec<(u8, u8, u8)>,
}

/// Dual ends of a primal edge, as integer representatives `(i, j)` of the
/// dual sites `(i + ½, j + ½)`. The dual edge is the primal edge turned a
/// quarter around its midpoint; coordinates are doubled to stay integral.
pub fn dual_reps(a: (i32, i32), b: (i32, i32)) -> ((i32, i32), (i32, i32)) {
    let (mx, my) = (a.0 + b.0, a.1 + b.1);
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let rep = |px: i32, py: i32| ((px - 1).div_euclid(2), (py - 1).div_euclid(2));
    (rep(mx - dy, my + dx), rep(mx + dy, my - dx))
}

impl MaskGraph {
    fn build(set: &EdgeSet, ends: impl Fn(usize) -> Option<((i32, i32), (i32, i32))>) -> Self {
        let mut g = MaskGraph { verts: Vec::new(), index: FxHashMap::default(), edges: Vec::new() };
        for i in 0..set.len() {
            let Some((a, b)) = ends(i) else { continue };
            let ia = g.vertex_or_insert(a);
            let ib = g.vertex_or_insert(b);
            g.edges.push((i as u8, ia, ib));
        }
        assert!(g.verts.len() <= 64, "mask graphs hold at most 64 vertices");
        g
    }

    fn vertex_or_insert(&mut self, v: (i32, i32)) -> u8 {
        if let Some(i) = self.index.get(&v) {
            return *i;
        }
        self.verts.push(v);
        let i = (self.verts.len() - 1) as u8;
        self.index.insert(v, i);
        i
    }

    /// Edges of `set` with both ends accepted by `keep`.
    pub fn primal(set: &EdgeSet, keep: impl Fn(i32, i32) -> bool) -> Self {
        Self::build(set, |i| {
            let e = set.edges()[i];
            let (a, b) = ((e.a().x, e.a().y), (e.b().x, e.b().y));
            (keep(a.0, a.1) && keep(b.0, b.1)).then_some((a, b))
        })
    }

    /// Dual edges of `set` with both dual ends accepted by `keep`.
    pub fn dual(set: &EdgeSet, keep: impl Fn(i32, i32) -> bool) -> Self {
        Self::build(set, |i| {
            let e = set.edges()[i];
            let (a, b) = dual_reps((e.a().x, e.a().y), (e.b().x, e.b().y));
            (keep(a.0, a.1) && keep(b.0, b.1)).then_some((a, b))
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.verts.len()
    }

    pub fn vertex(&self, x: i32, y: i32) -> Option<usize> {
        self.index.get(&(x, y)).map(|i| *i as usize)
    }

    pub fn coords(&self, v: usize) -> (i32, i32) {
        self.verts[v]
    }

    pub fn vertex_mask(&self, f: impl Fn(i32, i32) -> bool) -> u64 {
        self.verts.iter().enumerate().filter(|(_, v)| f(v.0, v.1)).fold(0, |m, (i, _)| m | 1 << i)
    }

    /// Edge-set bits of the edges of this graph satisfying `f` (given the
    /// coordinates of both ends).
    pub fn edge_bits(&self, f: impl Fn((i32, i32), (i32, i32)) -> bool) -> u64 {
        self.edges
            .iter()
            .filter(|(_, a, b)| f(self.verts[*a as usize], self.verts[*b as usize]))
            .fold(0, |m, (bit, _, _)| m | 1 << bit)
    }

    /// Vertices reachable from `seeds` along usable edges.
    pub fn reach(&self, usable: u64, seeds: u64) -> u64 {
        let (buf, k) = self.usable_edges(usable);
        let live = &buf[..k];
        let mut r = seeds;
        let mut forward = true;
        loop {
            let before = r;
            // in-place sweeps, alternating direction
            let mut step = |&(_, a, b, _): &(u8, u8, u8, u8)| {
                r |= (r >> a & 1) << b;
                r |= (r >> b & 1) << a;
            };
            if forward {
                live.iter().for_each(&mut step);
            } else {
                live.iter().rev().for_each(&mut step);
            }
            forward = !forward;
            if r == before {
                return r;
            }
        }
    }

    /// The usable edges as `(bit, a, b, crossing)`, with their count.
    fn usable_edges(&self, usable: u64) -> ([(u8, u8, u8, u8); 64], usize) {
        let mut buf = [(0u8, 0u8, 0u8, 0u8); 64];
        let mut k = 0;
        for &(bit, a, b) in &self.edges {
            if usable >> bit & 1 == 1 {
                buf[k] = (bit, a, b, 0);
                k += 1;
            }
        }
        (buf, k)
    }

    /// Vertices adjacent to `set` along any edge of the graph, plus `set`.
    pub fn grow(&self, set: u64) -> u64 {
        self.reach_one_step(u64::MAX, set)
    }

    fn reach_one_step(&self, usable: u64, r: u64) -> u64 {
        let mut next = r;
        for &(bit, a, b) in &self.edges {
            if usable >> bit & 1 == 1 {
                next |= (r >> a & 1) << b;
                next |= (r >> b & 1) << a;
            }
        }
        next
    }

    /// Connected components (as vertex masks) of the usable subgraph.
    pub fn components(&self, usable: u64) -> Vec<u64> {
        let mut seen = 0u64;
        let mut out = Vec::new();
        for v in 0..self.verts.len() {
            if seen >> v & 1 == 1 {
                continue;
            }
            let c = self.reach(usable, 1 << v);
            seen |= c;
            out.push(c);
        }
        out
    }

    /// Vertices whose usable component contains a closed walk crossing the
    /// `crossing` edges an odd number of times, found by search in the
    /// parity double cover.
    pub fn odd_walk_vertices(&self, usable: u64, crossing: u64) -> u64 {
        let (mut buf, k) = self.usable_edges(usable);
        let mut touched = 0u64;
        for e in &mut buf[..k] {
            e.3 = (crossing >> e.0 & 1) as u8;
            touched |= 1 << e.1 | 1 << e.2;
        }
        let live = &buf[..k];
        // vertices without usable edges lie on no closed walk
        let mut done = !touched;
        let mut out = 0u64;
        for v in 0..self.verts.len() {
            if done >> v & 1 == 1 {
                continue;
            }
            // double cover: layer 0 holds (u, even), layer 1 holds (u, odd)
            let mut r = [1u64 << v, 0u64];
            let mut forward = true;
            loop {
                let before = r;
                let mut step = |&(_, a, b, t): &(u8, u8, u8, u8)| {
                    let t = t as usize;
                    for par in 0..2 {
                        r[par ^ t] |= (r[par] >> a & 1) << b;
                        r[par] |= (r[par ^ t] >> b & 1) << a;
                    }
                };
                if forward {
                    live.iter().for_each(&mut step);
                } else {
                    live.iter().rev().for_each(&mut step);
                }
                forward = !forward;
                if r == before {
                    break;
                }
            }
            let comp = r[0] | r[1];
            done |= comp;
            if r[1] >> v & 1 == 1 {
                out |= comp;
            }
        }
        out
    }
}

/// A simple path: its edge-set bits and vertex masks.
#[derive(Clone, Copy, Debug)]
struct Path {
    edges: u64,
    verts: u64,
    inner: u64,
}

/// Simple paths from `from` whose interior lies in `through` and whose last
/// vertex is the first one in `targets`. A start inside `targets` gives the
/// one-vertex path only.
fn simple_paths(g: &MaskGraph, from: usize, targets: u64, through: u64, allowed: u64) -> Vec<Path> {
    fn go(g: &MaskGraph, v: usize, cur: Path, targets: u64, through: u64, allowed: u64, out: &mut Vec<Path>) {
        for &(bit, a, b) in &g.edges {
            if allowed >> bit & 1 == 0 {
                continue;
            }
            let w = if a as usize == v {
                b as usize
            } else if b as usize == v {
                a as usize
            } else {
                continue;
            };
            if cur.verts >> w & 1 == 1 {
                continue;
            }
            let next = Path { edges: cur.edges | 1 << bit, verts: cur.verts | 1 << w, inner: cur.inner };
            if targets >> w & 1 == 1 {
                out.push(next);
            } else if through >> w & 1 == 1 {
                go(g, w, Path { inner: next.inner | 1 << w, ..next }, targets, through, allowed, out);
            }
        }
    }
    let start = Path { edges: 0, verts: 1 << from, inner: 0 };
    if targets >> from & 1 == 1 {
        return vec![start];
    }
    let mut out = Vec::new();
    go(g, from, start, targets, through, allowed, &mut out);
    out
}

/// Minimal elements of a family of edge masks under inclusion.
fn minimal(mut masks: Vec<u64>) -> Vec<u64> {
    masks.sort_by_key(|m| (m.count_ones(), *m));
    masks.dedup();
    let mut keep: Vec<u64> = Vec::new();
    for m in masks {
        if !keep.iter().any(|k| k & !m == 0) {
            keep.push(m);
        }
    }
    keep
}

/// Minimal edge sets certifying `k` disjoint paths, for `k = 1, 2, …`.
#[derive(Clone, Debug)]
pub struct Certificates {
    pub by_k: Vec<Vec<u64>>,
}

impl Certificates {
    /// Largest `k` such that some certificate of `k` paths is usable.
    pub fn max_k(&self, usable: u64) -> usize {
        self.by_k.iter().take_while(|level| level.iter().any(|c| c & !usable == 0)).count()
    }
}

/// Families of paths from `starts` to `targets` with interiors in
/// `through`, pairwise disjoint in edges and interior vertices (ends in
/// `starts` and `targets` may be shared).
pub fn arm_certificates(g: &MaskGraph, starts: u64, targets: u64, through: u64, max_k: usize) -> Certificates {
    let mut paths = Vec::new();
    for v in 0..g.vertex_count() {
        if starts >> v & 1 == 1 {
            paths.extend(simple_paths(g, v, targets, through, u64::MAX));
        }
    }
    let mut by_k: Vec<Vec<u64>> = vec![Vec::new(); max_k];
    fn extend(paths: &[Path], from: usize, edges: u64, inner: u64, depth: usize, by_k: &mut Vec<Vec<u64>>) {
        for (i, p) in paths.iter().enumerate().skip(from) {
            if p.edges & edges != 0 || p.inner & inner != 0 {
                continue;
            }
            let (e, n) = (edges | p.edges, inner | p.inner);
            by_k[depth].push(e);
            if depth + 1 < by_k.len() {
                extend(paths, i + 1, e, n, depth + 1, by_k);
            }
        }
    }
    extend(&paths, 0, 0, 0, 0, &mut by_k);
    let mut by_k: Vec<Vec<u64>> = by_k.into_iter().map(minimal).collect();
    while by_k.last().is_some_and(|l| l.is_empty()) {
        by_k.pop();
    }
    Certificates { by_k }
}

/// Minimal edge sets of two vertex-disjoint paths, one from `a` and one from
/// `b`, to `targets` with interiors in `through`, avoiding the edge bits
/// outside `allowed`.
pub fn two_source_certificates(g: &MaskGraph, a: usize, b: usize, targets: u64, through: u64, allowed: u64) -> Vec<u64> {
    let pa = simple_paths(g, a, targets, through, allowed);
    let pb = simple_paths(g, b, targets, through, allowed);
    let mut out = Vec::new();
    for p in &pa {
        for q in &pb {
            if p.verts & q.verts == 0 {
                out.push(p.edges | q.edges);
            }
        }
    }
    minimal(out)
}
