//! Bernoulli percolation event detectors: clusters, crossings, circuits
//! (through planar duality), disjoint arms, alternating four-arm events,
//! paths with defects and disconnecting edges.
//!
//! Detectors are generic over [`EdgeStatus`], so they run equally on a
//! materialised [`Config`](crate::weights::Config) and on lazily thresholded
//! weights.

use std::collections::VecDeque;

use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::lattice::{dual_edge, dual_ends, DualEdge, DualSite, Edge, Orientation, Region, Site};
use crate::unionfind::{ParityUnionFind, UnionFind};
use crate::weights::{EdgeStatus, EdgeWeights, Thresholded};

/// Dense indexing of the sites of an axis-parallel rectangle.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Grid {
    x0: i32,
    y0: i32,
    w: usize,
    h: usize,
}

impl Grid {
    pub(crate) fn new(x0: i32, x1: i32, y0: i32, y1: i32) -> Self {
        Grid { x0, y0, w: (x1 - x0 + 1) as usize, h: (y1 - y0 + 1) as usize }
    }

    pub(crate) fn square(r: i32) -> Self {
        Self::new(-r, r, -r, r)
    }

    pub(crate) fn len(&self) -> usize {
        self.w * self.h
    }

    #[inline]
    pub(crate) fn idx(&self, x: i32, y: i32) -> Option<usize> {
        let dx = x - self.x0;
        let dy = y - self.y0;
        if dx < 0 || dy < 0 || dx as usize >= self.w || dy as usize >= self.h {
            None
        } else {
            Some(dy as usize * self.w + dx as usize)
        }
    }

    #[inline]
    pub(crate) fn coords(&self, i: usize) -> (i32, i32) {
        ((i % self.w) as i32 + self.x0, (i / self.w) as i32 + self.y0)
    }
}

/// One open cluster of a [`ClusterLabeling`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClusterInfo {
    pub size: usize,
    pub min: Site,
    pub max: Site,
    /// Some member lies on the border of the region's bounding rectangle.
    pub touches_boundary: bool,
}

impl ClusterInfo {
    /// L∞ diameter, i.e. the larger side of the bounding box.
    pub fn diameter(&self) -> i32 {
        (self.max.x - self.min.x).max(self.max.y - self.min.y)
    }
}

/// Open clusters of a finite region.
#[derive(Clone, Debug)]
pub struct ClusterLabeling {
    region: Region,
    grid: Grid,
    labels: Vec<u32>,
    clusters: Vec<ClusterInfo>,
}

const NO_LABEL: u32 = u32::MAX;

impl ClusterLabeling {
    pub fn label(&self, s: Site) -> Option<usize> {
        if !self.region.contains(s) {
            return None;
        }
        self.grid.idx(s.x, s.y).map(|i| self.labels[i] as usize)
    }

    pub fn cluster_of(&self, s: Site) -> Option<&ClusterInfo> {
        self.label(s).map(|l| &self.clusters[l])
    }

    pub fn connected(&self, a: Site, b: Site) -> bool {
        matches!((self.label(a), self.label(b)), (Some(x), Some(y)) if x == y)
    }

    pub fn clusters(&self) -> &[ClusterInfo] {
        &self.clusters
    }

    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }
}

/// Connected components of the open edges with both ends in `region`.
pub fn clusters<S: EdgeStatus>(status: &S, region: Region) -> ClusterLabeling {
    let (x0, x1, y0, y1) = region.bounds();
    let grid = Grid::new(x0, x1, y0, y1);
    let mut uf = UnionFind::new(grid.len());
    for i in 0..grid.len() {
        let (x, y) = grid.coords(i);
        let s = Site::new(x, y);
        if !region.contains(s) {
            continue;
        }
        for e in [Edge::horizontal(s), Edge::vertical(s)] {
            let b = e.b();
            if region.contains(b) && status.is_open(e) {
                uf.union(i, grid.idx(b.x, b.y).unwrap());
            }
        }
    }
    let mut labels = vec![NO_LABEL; grid.len()];
    let mut root_label: FxHashMap<usize, u32> = FxHashMap::default();
    let mut infos: Vec<ClusterInfo> = Vec::new();
    for i in 0..grid.len() {
        let (x, y) = grid.coords(i);
        let s = Site::new(x, y);
        if !region.contains(s) {
            continue;
        }
        let r = uf.find(i);
        let l = *root_label.entry(r).or_insert_with(|| {
            infos.push(ClusterInfo { size: 0, min: s, max: s, touches_boundary: false });
            (infos.len() - 1) as u32
        });
        labels[i] = l;
        let c = &mut infos[l as usize];
        c.size += 1;
        c.min = Site::new(c.min.x.min(x), c.min.y.min(y));
        c.max = Site::new(c.max.x.max(x), c.max.y.max(y));
        c.touches_boundary |= x == x0 || x == x1 || y == y0 || y == y1;
    }
    ClusterLabeling { region, grid, labels, clusters: infos }
}

/// Breadth-first search over open edges inside `region`, starting from every
/// `source` site in the region; returns true as soon as `target` accepts a
/// reached site.
fn open_search<S, F>(status: &S, region: Region, sources: &[Site], target: F) -> bool
where
    S: EdgeStatus,
    F: Fn(Site) -> bool,
{
    let (x0, x1, y0, y1) = region.bounds();
    let grid = Grid::new(x0, x1, y0, y1);
    let mut seen = vec![false; grid.len()];
    let mut queue = VecDeque::new();
    for &s in sources {
        if region.contains(s) {
            let i = grid.idx(s.x, s.y).unwrap();
            if !seen[i] {
                if target(s) {
                    return true;
                }
                seen[i] = true;
                queue.push_back(s);
            }
        }
    }
    while let Some(s) = queue.pop_front() {
        for (e, nb) in s.incident_edges().into_iter().zip(s.neighbors()) {
            if !region.contains(nb) {
                continue;
            }
            let i = grid.idx(nb.x, nb.y).unwrap();
            if seen[i] || !status.is_open(e) {
                continue;
            }
            if target(nb) {
                return true;
            }
            seen[i] = true;
            queue.push_back(nb);
        }
    }
    false
}

/// Open crossing of a rectangle: left to right for `Horizontal`, bottom to
/// top for `Vertical`, using only edges inside the rectangle.
pub fn has_crossing<S: EdgeStatus>(status: &S, rect: Region, orientation: Orientation) -> Result<bool> {
    let Region::Rect { x0, x1, y0, y1 } = rect else {
        return Err(Error::Parameter("crossings are defined on rectangles".into()));
    };
    Ok(match orientation {
        Orientation::Horizontal => {
            let sources: Vec<Site> = (y0..=y1).map(|y| Site::new(x0, y)).collect();
            open_search(status, rect, &sources, |s| s.x == x1)
        }
        Orientation::Vertical => {
            let sources: Vec<Site> = (x0..=x1).map(|x| Site::new(x, y0)).collect();
            open_search(status, rect, &sources, |s| s.y == y1)
        }
    })
}

/// `{0 ↔ ∂B(n)}` by open edges of `B(n)`.
pub fn origin_connects<S: EdgeStatus>(status: &S, n: i32) -> bool {
    if n <= 0 {
        return true;
    }
    let region = Region::Box { center: Site::ORIGIN, n };
    open_search(status, region, &[Site::ORIGIN], |s| s.norm() == n)
}

/// Sites of the open cluster of the origin inside `B(n)`, in BFS order.
pub fn origin_cluster<S: EdgeStatus>(status: &S, n: i32) -> Vec<Site> {
    let grid = Grid::square(n);
    let mut seen = vec![false; grid.len()];
    let mut out = vec![Site::ORIGIN];
    seen[grid.idx(0, 0).unwrap()] = true;
    let mut head = 0;
    while head < out.len() {
        let s = out[head];
        head += 1;
        for (e, nb) in s.incident_edges().into_iter().zip(s.neighbors()) {
            let Some(i) = grid.idx(nb.x, nb.y) else { continue };
            if !seen[i] && status.is_open(e) {
                seen[i] = true;
                out.push(nb);
            }
        }
    }
    out
}

/// Largest norm reached by the open cluster of the origin inside
/// `B(n_max)`; `{0 ↔ ∂B(n)}` holds for `n ≤ n_max` iff the result is `≥ n`.
pub fn origin_reach_radius<S: EdgeStatus>(status: &S, n_max: i32) -> i32 {
    let grid = Grid::square(n_max);
    let mut seen = vec![false; grid.len()];
    let mut stack = vec![Site::ORIGIN];
    seen[grid.idx(0, 0).unwrap()] = true;
    let mut best = 0;
    while let Some(s) = stack.pop() {
        for (e, nb) in s.incident_edges().into_iter().zip(s.neighbors()) {
            let Some(i) = grid.idx(nb.x, nb.y) else { continue };
            if !seen[i] && status.is_open(e) {
                seen[i] = true;
                best = best.max(nb.norm());
                if best == n_max {
                    return best;
                }
                stack.push(nb);
            }
        }
    }
    best
}

/// Open circuit surrounding the origin inside `Ann(m, n)`.
///
/// Computed on the dual: the circuit exists iff no dual path, crossing only
/// primal edges that are not open edges of the annulus, leads from the faces
/// around the origin to the faces outside `B(n)`.
pub fn has_open_circuit_in_annulus<S: EdgeStatus>(status: &S, m: i32, n: i32) -> Result<bool> {
    let ann = Region::annulus(m, n)?;
    // faces (i, j) ↔ unit squares with lower-left corner (i, j)
    let grid = Grid::square_faces(n);
    let outer = |d: DualSite| d.i == -n - 1 || d.i == n || d.j == -n - 1 || d.j == n;
    let mut seen = vec![false; grid.len()];
    let mut queue = VecDeque::new();
    for (i, j) in [(-1, -1), (0, -1), (-1, 0), (0, 0)] {
        let idx = grid.idx(i, j).unwrap();
        seen[idx] = true;
        queue.push_back(DualSite::new(i, j));
    }
    while let Some(d) = queue.pop_front() {
        if outer(d) {
            return Ok(false);
        }
        for (de, nb) in d.incident_edges().into_iter().zip(d.neighbors()) {
            let Some(idx) = grid.idx(nb.i, nb.j) else { continue };
            if seen[idx] {
                continue;
            }
            let e = de.primal();
            let blocking = ann.contains_edge(e) && status.is_open(e);
            if !blocking {
                seen[idx] = true;
                queue.push_back(nb);
            }
        }
    }
    Ok(true)
}

impl Grid {
    /// Faces of `B(n)` plus one ring of outside faces: `i, j ∈ [-n-1, n]`.
    fn square_faces(n: i32) -> Self {
        Self::new(-n - 1, n, -n - 1, n)
    }
}

/// Whether a dual edge crosses the ray `{(t, 0) : t > 0}` from the origin.
#[inline]
fn crosses_ray(d: DualEdge) -> u8 {
    (d.orientation == Orientation::Vertical && d.base.j == -1 && d.base.i >= 0) as u8
}

/// Largest extent among closed dual clusters inside `B(n)*` that surround
/// the origin, or `None` if no closed dual cluster surrounds it.
///
/// The extent of a cluster is the floor of the largest L∞ norm of its dual
/// sites. A cluster surrounds the origin iff it contains a closed dual cycle
/// winding an odd number of times around it, which is detected with a
/// parity union-find keyed on crossings of a fixed ray.
pub fn surrounding_closed_cluster<S: EdgeStatus>(status: &S, n: i32) -> Result<Option<i32>> {
    if n < 1 {
        return Err(Error::Parameter(format!("box radius must be >= 1, got {n}")));
    }
    // dual sites (i + ½, j + ½) ∈ B(n) ⟺ i, j ∈ [-n, n-1]
    let grid = Grid::new(-n, n - 1, -n, n - 1);
    let mut uf = ParityUnionFind::new(grid.len());
    for idx in 0..grid.len() {
        let (i, j) = grid.coords(idx);
        let d = DualSite::new(i, j);
        for de in [DualEdge::horizontal(d), DualEdge::vertical(d)] {
            let b = de.b();
            let Some(bi) = grid.idx(b.i, b.j) else { continue };
            if status.dual_is_closed(de) {
                uf.union(idx, bi, crosses_ray(de));
            }
        }
    }
    let mut extent: FxHashMap<usize, i32> = FxHashMap::default();
    for idx in 0..grid.len() {
        if uf.has_odd_cycle(idx) {
            let (i, j) = grid.coords(idx);
            let (root, _) = uf.find(idx);
            let e = extent.entry(root).or_insert(0);
            *e = (*e).max(DualSite::new(i, j).norm_floor());
        }
    }
    Ok(extent.values().copied().max())
}

/// Largest `r` such that a p-closed dual cluster inside `B(n)*` surrounds the
/// origin and reaches L∞ distance `≥ r`; 0 when there is none. `B_{r,p}` is
/// reported as `extent ≥ r`.
pub fn surrounding_closed_extent<W: EdgeWeights>(weights: &W, p: f64, n: i32) -> Result<i32> {
    if n < 2 {
        return Err(Error::Parameter(format!("box too small: N = {n} < 2")));
    }
    Ok(surrounding_closed_cluster(&Thresholded::new(weights, p), n)?.unwrap_or(0))
}

/// Unit-capacity max-flow network (augmenting paths).
struct FlowNet {
    head: Vec<u32>,
    next: Vec<u32>,
    to: Vec<u32>,
    cap: Vec<u8>,
}

const NIL: u32 = u32::MAX;

impl FlowNet {
    fn new(n: usize) -> Self {
        FlowNet { head: vec![NIL; n], next: Vec::new(), to: Vec::new(), cap: Vec::new() }
    }

    fn add(&mut self, u: usize, v: usize) {
        for (a, b, c) in [(u, v, 1u8), (v, u, 0u8)] {
            self.to.push(b as u32);
            self.cap.push(c);
            self.next.push(self.head[a]);
            self.head[a] = (self.to.len() - 1) as u32;
        }
    }

    fn max_flow(&mut self, s: usize, t: usize) -> usize {
        let n = self.head.len();
        let mut flow = 0;
        let mut via = vec![NIL; n];
        let mut seen = vec![false; n];
        loop {
            seen.iter_mut().for_each(|x| *x = false);
            let mut stack = vec![s];
            seen[s] = true;
            let mut found = false;
            while let Some(u) = stack.pop() {
                if u == t {
                    found = true;
                    break;
                }
                let mut a = self.head[u];
                while a != NIL {
                    let v = self.to[a as usize] as usize;
                    if self.cap[a as usize] > 0 && !seen[v] {
                        seen[v] = true;
                        via[v] = a;
                        stack.push(v);
                    }
                    a = self.next[a as usize];
                }
            }
            if !found {
                return flow;
            }
            let mut v = t;
            while v != s {
                let a = via[v] as usize;
                self.cap[a] -= 1;
                self.cap[a ^ 1] += 1;
                v = self.to[a ^ 1] as usize;
            }
            flow += 1;
        }
    }
}

/// Maximum number of vertex-disjoint open paths from `B(m)` to `∂B(n)`
/// inside `Ann(m, n)`. Endpoints in `B(m)` and on `∂B(n)` may be shared.
/// `A^k_{m,n}` holds iff the result is `≥ k`.
pub fn max_disjoint_arms<S: EdgeStatus>(status: &S, m: i32, n: i32) -> Result<usize> {
    Region::annulus(m, n)?;
    let grid = Grid::square(n);
    // node 2i = in, 2i+1 = out for interior sites; S and T at the end
    let src = 2 * grid.len();
    let sink = src + 1;
    let mut net = FlowNet::new(sink + 1);
    let role = |s: Site| {
        let d = s.norm();
        if d <= m {
            0
        } else if d < n {
            1
        } else {
            2
        }
    };
    for idx in 0..grid.len() {
        let (x, y) = grid.coords(idx);
        let s = Site::new(x, y);
        if role(s) == 1 {
            net.add(2 * idx, 2 * idx + 1);
        }
        for e in [Edge::horizontal(s), Edge::vertical(s)] {
            let b = e.b();
            let Some(bi) = grid.idx(b.x, b.y) else { continue };
            let (ra, rb) = (role(s), role(b));
            if ra == rb && ra != 1 {
                continue;
            }
            if !status.is_open(e) {
                continue;
            }
            let out_of = |r: i32, i: usize| if r == 0 { src } else { 2 * i + 1 };
            let in_of = |r: i32, i: usize| if r == 2 { sink } else { 2 * i };
            // each direction that moves outward or sideways in the annulus
            if ra != 2 && rb != 0 {
                net.add(out_of(ra, idx), in_of(rb, bi));
            }
            if rb != 2 && ra != 0 {
                net.add(out_of(rb, bi), in_of(ra, idx));
            }
        }
    }
    Ok(net.max_flow(src, sink))
}

/// Two vertex-disjoint paths in the `(2n+1)²` grid of `[-n, n]²`, one from
/// each of `a` and `b`, to the border of the grid. `usable(x, y, horizontal)`
/// says whether the edge leaving `(x, y)` to the right or upwards may be used.
fn two_disjoint_to_border(n: i32, a: (i32, i32), b: (i32, i32), usable: impl Fn(i32, i32, bool) -> bool) -> bool {
    let grid = Grid::square(n);
    let src = 2 * grid.len();
    let sink = src + 1;
    let mut net = FlowNet::new(sink + 1);
    for idx in 0..grid.len() {
        let (x, y) = grid.coords(idx);
        net.add(2 * idx, 2 * idx + 1);
        if x.abs().max(y.abs()) == n {
            net.add(2 * idx + 1, sink);
        }
        for (horizontal, (bx, by)) in [(true, (x + 1, y)), (false, (x, y + 1))] {
            let Some(bi) = grid.idx(bx, by) else { continue };
            if usable(x, y, horizontal) {
                net.add(2 * idx + 1, 2 * bi);
                net.add(2 * bi + 1, 2 * idx);
            }
        }
    }
    for (x, y) in [a, b] {
        net.add(src, 2 * grid.idx(x, y).unwrap());
    }
    net.max_flow(src, sink) == 2
}

/// Alternating four-arm event at `e` for statuses given separately for the
/// open arms and for the closed dual arms: four disjoint paths, open ones in
/// `B(n) \ {e}` from `e_x` and `e_y` to `∂B(n)`, closed dual ones in
/// `B(n)* \ {e*}` from `e*_x` and `e*_y` to `∂B(n)*`, where
/// `B(n)* = (½,½) + B(n)`.
pub fn four_arm_status<O: EdgeStatus, C: EdgeStatus>(open: &O, closed: &C, e: Edge, n: i32) -> Result<bool> {
    if 2 * e.norm() > n {
        return Err(Error::Parameter(format!("{e} is not inside B(n/2) for n = {n}")));
    }
    let (ex, ey) = e.endpoints();
    let primal = two_disjoint_to_border(n, (ex.x, ex.y), (ey.x, ey.y), |x, y, h| {
        let f = if h { Edge::horizontal(Site::new(x, y)) } else { Edge::vertical(Site::new(x, y)) };
        f != e && open.is_open(f)
    });
    if !primal {
        return Ok(false);
    }
    // dual site (i, j) is (i + ½, j + ½), so B(n)* is |i|, |j| ≤ n
    let estar = dual_edge(e);
    let (dx, dy) = dual_ends(e);
    Ok(two_disjoint_to_border(n, (dx.i, dx.j), (dy.i, dy.j), |i, j, h| {
        let d = DualSite::new(i, j);
        let de = if h { DualEdge::horizontal(d) } else { DualEdge::vertical(d) };
        de != estar && closed.dual_is_closed(de)
    }))
}

/// Four-arm event with open arms at level `q1` and closed dual arms at level
/// `q2`. With `q1 = q2 = p` and `e = ⟨(0,0),(1,0)⟩` this is `A_n^{2,2}`.
pub fn four_arm<W: EdgeWeights>(weights: &W, e: Edge, n: i32, q1: f64, q2: f64) -> Result<bool> {
    four_arm_status(&Thresholded::new(weights, q1), &Thresholded::new(weights, q2), e, n)
}

/// Minimum number of closed edges on a path from the origin to `∂B(r)`,
/// for `r = 1..=n_max`, computed by a 0-1 breadth-first search inside
/// `B(n_max)`. Entries above `k_max` are reported as `None`.
pub fn defect_costs<S: EdgeStatus>(status: &S, n_max: i32, k_max: u32) -> Vec<Option<u32>> {
    let grid = Grid::square(n_max);
    let mut dist = vec![u32::MAX; grid.len()];
    let mut best: Vec<Option<u32>> = vec![None; n_max.max(0) as usize + 1];
    best[0] = Some(0);
    let mut deque = VecDeque::new();
    let o = grid.idx(0, 0).unwrap();
    dist[o] = 0;
    deque.push_back((Site::ORIGIN, 0u32));
    while let Some((s, d)) = deque.pop_front() {
        let i = grid.idx(s.x, s.y).unwrap();
        if d != dist[i] {
            continue;
        }
        if d > k_max {
            break;
        }
        let r = s.norm() as usize;
        if best[r].is_none() {
            best[r] = Some(d);
        }
        for (e, nb) in s.incident_edges().into_iter().zip(s.neighbors()) {
            let Some(j) = grid.idx(nb.x, nb.y) else { continue };
            let w = if status.is_open(e) { 0 } else { 1 };
            let nd = d + w;
            if nd < dist[j] && nd <= k_max {
                dist[j] = nd;
                if w == 0 {
                    deque.push_front((nb, nd));
                } else {
                    deque.push_back((nb, nd));
                }
            }
        }
    }
    // a path reaching norm r passes every smaller norm first
    for r in (0..best.len().saturating_sub(1)).rev() {
        best[r] = match (best[r], best[r + 1]) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
    }
    best.remove(0);
    best
}

/// `{0 ↔_k ∂B(n)}`: a path from the origin to `∂B(n)` with at most `k`
/// closed edges.
pub fn reach_with_defects<S: EdgeStatus>(status: &S, k: u32, n: i32) -> Result<bool> {
    if n < 1 {
        return Err(Error::Parameter(format!("n must be >= 1, got {n}")));
    }
    Ok(defect_costs(status, n, k)[n as usize - 1].is_some())
}

/// Bridges of `edges` whose removal separates `origin` from every site in
/// `boundary`. Only the component of the origin is considered.
pub fn disconnecting_edges(edges: &[Edge], origin: Site, boundary: &[Site]) -> Result<Vec<Edge>> {
    let mut index: FxHashMap<Site, usize> = FxHashMap::default();
    let mut sites: Vec<Site> = Vec::new();
    let mut adj: Vec<Vec<(usize, usize)>> = Vec::new();
    let mut uniq: Vec<Edge> = edges.to_vec();
    uniq.sort();
    uniq.dedup();
    let mut id = |s: Site, sites: &mut Vec<Site>, adj: &mut Vec<Vec<(usize, usize)>>| {
        *index.entry(s).or_insert_with(|| {
            sites.push(s);
            adj.push(Vec::new());
            sites.len() - 1
        })
    };
    for (k, e) in uniq.iter().enumerate() {
        let a = id(e.a(), &mut sites, &mut adj);
        let b = id(e.b(), &mut sites, &mut adj);
        adj[a].push((b, k));
        adj[b].push((a, k));
    }
    let Some(&root) = index.get(&origin) else {
        return Err(Error::Parameter(format!("origin {origin} is not in the graph")));
    };
    let nv = sites.len();
    let mut is_boundary = vec![false; nv];
    for s in boundary {
        if let Some(&i) = index.get(s) {
            is_boundary[i] = true;
        }
    }

    // iterative DFS computing discovery times, low links and boundary
    // counts per subtree
    let mut tin = vec![u32::MAX; nv];
    let mut low = vec![0u32; nv];
    let mut sub = vec![0u32; nv];
    let mut parent_edge = vec![usize::MAX; nv];
    let mut cursor = vec![0usize; nv];
    let mut timer = 0;
    let mut stack = vec![root];
    tin[root] = 0;
    low[root] = 0;
    sub[root] = is_boundary[root] as u32;
    let mut tree_children: Vec<(usize, usize)> = Vec::new();
    while let Some(&u) = stack.last() {
        if cursor[u] < adj[u].len() {
            let (v, k) = adj[u][cursor[u]];
            cursor[u] += 1;
            if k == parent_edge[u] {
                continue;
            }
            if tin[v] == u32::MAX {
                timer += 1;
                tin[v] = timer;
                low[v] = timer;
                sub[v] = is_boundary[v] as u32;
                parent_edge[v] = k;
                stack.push(v);
            } else {
                low[u] = low[u].min(tin[v]);
            }
        } else {
            stack.pop();
            if let Some(&p) = stack.last() {
                low[p] = low[p].min(low[u]);
                sub[p] += sub[u];
                tree_children.push((p, u));
            }
        }
    }
    let total = sub[root];
    let mut out: Vec<Edge> = tree_children
        .into_iter()
        .filter(|&(p, v)| low[v] > tin[p] && sub[v] == total)
        .map(|(_, v)| uniq[parent_edge[v]])
        .collect();
    out.sort();
    Ok(out)
}
