//! Square lattice geometry: sites, edges, the dual lattice and finite regions.
//!
//! Dual sites `(i + 1/2, j + 1/2)` are stored as the integer pair `(i, j)`, so
//! every geometric computation stays in integer arithmetic.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A site of Z².
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Site {
    pub x: i32,
    pub y: i32,
}

impl Site {
    pub const ORIGIN: Site = Site { x: 0, y: 0 };

    pub const fn new(x: i32, y: i32) -> Self {
        Site { x, y }
    }

    /// L∞ norm `max(|x|, |y|)`.
    pub fn norm(self) -> i32 {
        self.x.abs().max(self.y.abs())
    }

    pub fn dist(self, other: Site) -> i32 {
        (self.x - other.x).abs().max((self.y - other.y).abs())
    }

    pub fn offset(self, dx: i32, dy: i32) -> Site {
        Site::new(self.x + dx, self.y + dy)
    }

    /// The four lattice neighbours in the order right, up, left, down.
    pub fn neighbors(self) -> [Site; 4] {
        [
            self.offset(1, 0),
            self.offset(0, 1),
            self.offset(-1, 0),
            self.offset(0, -1),
        ]
    }

    /// The four incident edges in the same order as [`Site::neighbors`].
    pub fn incident_edges(self) -> [Edge; 4] {
        [
            Edge::horizontal(self),
            Edge::vertical(self),
            Edge::horizontal(self.offset(-1, 0)),
            Edge::vertical(self.offset(0, -1)),
        ]
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Orientation {
    Horizontal,
    Vertical,
}

/// A nearest-neighbour edge in canonical form: its lower-left endpoint plus
/// an orientation. The derived ordering (site, then orientation) is the
/// canonical total order used for tie-breaking.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub base: Site,
    pub orientation: Orientation,
}

impl Edge {
    pub const fn horizontal(base: Site) -> Self {
        Edge { base, orientation: Orientation::Horizontal }
    }

    pub const fn vertical(base: Site) -> Self {
        Edge { base, orientation: Orientation::Vertical }
    }

    /// Builds the edge joining two sites at unit L¹ distance.
    pub fn between(a: Site, b: Site) -> Result<Self> {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        match (hi.x - lo.x, hi.y - lo.y) {
            (1, 0) => Ok(Edge::horizontal(lo)),
            (0, 1) => Ok(Edge::vertical(lo)),
            _ => Err(Error::Parameter(format!("{a} and {b} are not lattice neighbours"))),
        }
    }

    /// Left (horizontal) or bottom (vertical) endpoint.
    pub fn a(self) -> Site {
        self.base
    }

    /// Right (horizontal) or top (vertical) endpoint.
    pub fn b(self) -> Site {
        match self.orientation {
            Orientation::Horizontal => self.base.offset(1, 0),
            Orientation::Vertical => self.base.offset(0, 1),
        }
    }

    pub fn endpoints(self) -> (Site, Site) {
        (self.a(), self.b())
    }

    pub fn other(self, s: Site) -> Site {
        if s == self.a() {
            self.b()
        } else {
            self.a()
        }
    }

    /// Largest norm of the two endpoints.
    pub fn norm(self) -> i32 {
        self.a().norm().max(self.b().norm())
    }

    /// Dense 64-bit identifier, injective on edges with coordinates in i32.
    pub fn id(self) -> u64 {
        let x = self.base.x as u32 as u64;
        let y = self.base.y as u32 as u64;
        let o = matches!(self.orientation, Orientation::Vertical) as u64;
        // 31 bits per coordinate is plenty for any simulated box.
        ((x & 0x7fff_ffff) << 32) | ((y & 0x7fff_ffff) << 1) | o
    }

    pub fn dual(self) -> DualEdge {
        dual_edge(self)
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{},{}>", self.a(), self.b())
    }
}

/// A dual site; `(i, j)` stands for the point `(i + 1/2, j + 1/2)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DualSite {
    pub i: i32,
    pub j: i32,
}

impl DualSite {
    pub const fn new(i: i32, j: i32) -> Self {
        DualSite { i, j }
    }

    /// Twice the L∞ norm of the represented point, which is always odd.
    pub fn norm2(self) -> i32 {
        (2 * self.i + 1).abs().max((2 * self.j + 1).abs())
    }

    /// `floor` of the L∞ norm of the represented point.
    pub fn norm_floor(self) -> i32 {
        (self.norm2() - 1) / 2
    }

    pub fn neighbors(self) -> [DualSite; 4] {
        [
            DualSite::new(self.i + 1, self.j),
            DualSite::new(self.i, self.j + 1),
            DualSite::new(self.i - 1, self.j),
            DualSite::new(self.i, self.j - 1),
        ]
    }

    pub fn incident_edges(self) -> [DualEdge; 4] {
        [
            DualEdge::horizontal(self),
            DualEdge::vertical(self),
            DualEdge::horizontal(DualSite::new(self.i - 1, self.j)),
            DualEdge::vertical(DualSite::new(self.i, self.j - 1)),
        ]
    }
}

impl fmt::Display for DualSite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}+½,{}+½)", self.i, self.j)
    }
}

/// A dual edge in canonical form (lower-left dual endpoint and orientation).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DualEdge {
    pub base: DualSite,
    pub orientation: Orientation,
}

impl DualEdge {
    pub const fn horizontal(base: DualSite) -> Self {
        DualEdge { base, orientation: Orientation::Horizontal }
    }

    pub const fn vertical(base: DualSite) -> Self {
        DualEdge { base, orientation: Orientation::Vertical }
    }

    pub fn a(self) -> DualSite {
        self.base
    }

    pub fn b(self) -> DualSite {
        match self.orientation {
            Orientation::Horizontal => DualSite::new(self.base.i + 1, self.base.j),
            Orientation::Vertical => DualSite::new(self.base.i, self.base.j + 1),
        }
    }

    /// The primal edge crossed by this dual edge.
    pub fn primal(self) -> Edge {
        let DualSite { i, j } = self.base;
        match self.orientation {
            Orientation::Vertical => Edge::horizontal(Site::new(i, j + 1)),
            Orientation::Horizontal => Edge::vertical(Site::new(i + 1, j)),
        }
    }
}

/// The dual edge crossing `e`.
///
/// With `e = ⟨e_x, e_y⟩`, the dual edge joins `e_x + (½,½)` and `e_y − (½,½)`.
pub fn dual_edge(e: Edge) -> DualEdge {
    let Site { x, y } = e.base;
    match e.orientation {
        // (x+½, y+½) and (x+½, y−½)
        Orientation::Horizontal => DualEdge::vertical(DualSite::new(x, y - 1)),
        // (x+½, y+½) and (x−½, y+½)
        Orientation::Vertical => DualEdge::horizontal(DualSite::new(x - 1, y)),
    }
}

/// The two ends `(e*_x, e*_y)` of the dual edge, in the order produced by
/// `e_x + (½,½)` and `e_y − (½,½)`.
pub fn dual_ends(e: Edge) -> (DualSite, DualSite) {
    let Site { x, y } = e.base;
    match e.orientation {
        Orientation::Horizontal => (DualSite::new(x, y), DualSite::new(x, y - 1)),
        Orientation::Vertical => (DualSite::new(x, y), DualSite::new(x - 1, y)),
    }
}

/// A finite set of sites described by its shape.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Region {
    /// `B(center, n)`.
    Box { center: Site, n: i32 },
    /// `Ann(center; m, n) = B(center, n) \ B(center, m)`.
    Annulus { center: Site, m: i32, n: i32 },
    /// `[x0, x1] × [y0, y1]`, inclusive.
    Rect { x0: i32, x1: i32, y0: i32, y1: i32 },
}

impl Region {
    pub fn ball(n: i32) -> Result<Self> {
        Self::box_at(Site::ORIGIN, n)
    }

    pub fn box_at(center: Site, n: i32) -> Result<Self> {
        if n < 0 {
            return Err(Error::Parameter(format!("box radius must be >= 0, got {n}")));
        }
        Ok(Region::Box { center, n })
    }

    pub fn annulus(m: i32, n: i32) -> Result<Self> {
        Self::annulus_at(Site::ORIGIN, m, n)
    }

    pub fn annulus_at(center: Site, m: i32, n: i32) -> Result<Self> {
        if m < 0 || m >= n {
            return Err(Error::Parameter(format!("annulus needs 0 <= m < n, got m={m}, n={n}")));
        }
        Ok(Region::Annulus { center, m, n })
    }

    pub fn rect(x0: i32, x1: i32, y0: i32, y1: i32) -> Result<Self> {
        if x0 > x1 || y0 > y1 {
            return Err(Error::Parameter(format!("empty rectangle [{x0},{x1}]x[{y0},{y1}]")));
        }
        Ok(Region::Rect { x0, x1, y0, y1 })
    }

    pub fn contains(&self, s: Site) -> bool {
        match *self {
            Region::Box { center, n } => s.dist(center) <= n,
            Region::Annulus { center, m, n } => {
                let d = s.dist(center);
                d > m && d <= n
            }
            Region::Rect { x0, x1, y0, y1 } => s.x >= x0 && s.x <= x1 && s.y >= y0 && s.y <= y1,
        }
    }

    /// An edge is in the region when both of its ends are.
    pub fn contains_edge(&self, e: Edge) -> bool {
        self.contains(e.a()) && self.contains(e.b())
    }

    /// Inclusive bounding rectangle `(x0, x1, y0, y1)`.
    pub fn bounds(&self) -> (i32, i32, i32, i32) {
        match *self {
            Region::Box { center, n } | Region::Annulus { center, n, .. } => {
                (center.x - n, center.x + n, center.y - n, center.y + n)
            }
            Region::Rect { x0, x1, y0, y1 } => (x0, x1, y0, y1),
        }
    }

    pub fn sites(&self) -> Vec<Site> {
        let (x0, x1, y0, y1) = self.bounds();
        let mut out = Vec::new();
        for y in y0..=y1 {
            for x in x0..=x1 {
                let s = Site::new(x, y);
                if self.contains(s) {
                    out.push(s);
                }
            }
        }
        out
    }

    /// Edges with both ends in the region, in canonical order.
    pub fn edges(&self) -> Vec<Edge> {
        let mut out = Vec::new();
        for s in self.sites() {
            for e in [Edge::horizontal(s), Edge::vertical(s)] {
                if self.contains(e.b()) {
                    out.push(e);
                }
            }
        }
        out.sort();
        out
    }
}

/// `∂B(center, n)`: sites at L∞ distance exactly `n`.
pub fn boundary(center: Site, n: i32) -> Result<Vec<Site>> {
    let b = Region::box_at(center, n)?;
    Ok(b.sites().into_iter().filter(|s| s.dist(center) == n).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn box_counts() {
        let b2 = Region::ball(2).unwrap();
        assert_eq!(b2.sites().len(), 25);
        assert_eq!(boundary(Site::ORIGIN, 2).unwrap().len(), 16);
        assert_eq!(Region::ball(1).unwrap().edges().len(), 12);
        for n in 1..12 {
            assert_eq!(Region::ball(n).unwrap().sites().len() as i32, (2 * n + 1).pow(2));
            assert_eq!(boundary(Site::ORIGIN, n).unwrap().len() as i32, 8 * n);
        }
    }

    #[test]
    fn annulus_is_set_difference() {
        let ann = Region::annulus(1, 2).unwrap().sites();
        let inner = Region::ball(1).unwrap();
        let outer = Region::ball(2).unwrap().sites();
        let diff: Vec<_> = outer.iter().copied().filter(|s| !inner.contains(*s)).collect();
        assert_eq!(ann, diff);
        assert_eq!(ann.len(), 16);
        for m in 0..5 {
            for n in (m + 1)..7 {
                let a = Region::annulus(m, n).unwrap();
                let bm = Region::ball(m).unwrap();
                for s in Region::ball(n).unwrap().sites() {
                    assert!(a.contains(s) ^ bm.contains(s));
                }
            }
        }
        assert!(Region::annulus(2, 2).is_err());
        assert!(Region::annulus(3, 1).is_err());
    }

    #[test]
    fn dual_of_unit_edge() {
        let e = Edge::between(Site::new(0, 0), Site::new(1, 0)).unwrap();
        let d = dual_edge(e);
        assert_eq!(d, DualEdge::vertical(DualSite::new(0, -1)));
        assert_eq!(dual_ends(e), (DualSite::new(0, 0), DualSite::new(0, -1)));
        assert_eq!(d.primal(), e);
    }

    fn crosses(e: Edge, d: DualEdge) -> bool {
        // Midpoints coincide for crossing edges; work in doubled coordinates.
        let (a, b) = e.endpoints();
        let pm = (a.x + b.x, a.y + b.y);
        let (c, q) = (d.a(), d.b());
        let dm = (c.i + q.i + 1, c.j + q.j + 1);
        let perpendicular = e.orientation != d.orientation;
        pm == dm && perpendicular
    }

    #[test]
    fn vertical_dual_matches_geometry() {
        let e = Edge::between(Site::new(3, 5), Site::new(3, 6)).unwrap();
        let d = dual_edge(e);
        let mut ends = [d.a(), d.b()];
        ends.sort();
        assert_eq!(ends, [DualSite::new(2, 5), DualSite::new(3, 5)]);
        // brute-force: exactly one dual edge near e crosses it
        let mut hits = Vec::new();
        for i in 0..7 {
            for j in 2..9 {
                for cand in [DualEdge::horizontal(DualSite::new(i, j)), DualEdge::vertical(DualSite::new(i, j))] {
                    if crosses(e, cand) {
                        hits.push(cand);
                    }
                }
            }
        }
        assert_eq!(hits, vec![d]);
    }

    #[test]
    fn between_rejects_non_neighbours() {
        assert!(Edge::between(Site::new(0, 0), Site::new(1, 1)).is_err());
        assert!(Edge::between(Site::new(0, 0), Site::new(0, 0)).is_err());
        assert_eq!(
            Edge::between(Site::new(1, 0), Site::new(0, 0)).unwrap(),
            Edge::between(Site::new(0, 0), Site::new(1, 0)).unwrap()
        );
    }

    #[test]
    fn incident_edges_agree_with_neighbors() {
        let s = Site::new(-3, 4);
        for (e, nb) in s.incident_edges().iter().zip(s.neighbors()) {
            assert_eq!(e.other(s), nb);
        }
        let d = DualSite::new(2, -1);
        for (e, nb) in d.incident_edges().iter().zip(d.neighbors()) {
            assert!(e.a() == nb || e.b() == nb);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]
        #[test]
        fn dual_round_trip(x in -1000i32..1000, y in -1000i32..1000, vert in any::<bool>()) {
            let e = if vert { Edge::vertical(Site::new(x, y)) } else { Edge::horizontal(Site::new(x, y)) };
            let d = dual_edge(e);
            prop_assert_eq!(d.primal(), e);
            prop_assert!(crosses(e, d));
            prop_assert_eq!(Edge::between(e.b(), e.a()).unwrap(), e);
        }

        #[test]
        fn edge_ids_are_injective(x in -500i32..500, y in -500i32..500, x2 in -500i32..500, y2 in -500i32..500) {
            let e1 = Edge::horizontal(Site::new(x, y));
            let e2 = Edge::vertical(Site::new(x2, y2));
            prop_assert_ne!(e1.id(), e2.id());
            let e3 = Edge::horizontal(Site::new(x2, y2));
            prop_assert_eq!(e1.id() == e3.id(), e1 == e3);
        }
    }
}
