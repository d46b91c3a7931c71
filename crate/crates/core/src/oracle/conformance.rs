//! Detector-versus-definition checks over every configuration of small
//! edge sets.

use std::collections::BTreeMap;
use std::fmt::Debug;

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use super::reference::{arm_certificates, two_source_certificates, MaskGraph};
use super::{ratio, tally_configs, EdgeSet, MaskConfig, OpenCounts};
use crate::connectivity::{
    clusters, defect_costs, four_arm_status, has_crossing, has_open_circuit_in_annulus, max_disjoint_arms,
    origin_connects, surrounding_closed_cluster,
};
use crate::error::Result;
use crate::lattice::{Edge, Orientation, Region, Site};
use crate::weights::{EdgeStatus, WeightField};

/// The probabilities at which exact values are compared.
pub fn levels() -> [(i64, i64); 3] {
    [(1, 4), (1, 2), (3, 4)]
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactValue {
    pub p: String,
    pub detector: String,
    pub reference: String,
}

/// Result of one detector/instance pair.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckResult {
    pub detector: String,
    pub instance: String,
    /// Name of the event whose probability is reported.
    pub event: String,
    /// Edges whose configurations were enumerated.
    pub edges: usize,
    pub configs: u64,
    pub mismatches: u64,
    /// False when only slices of the configuration space were enumerated;
    /// the probabilities are then conditional on the fixed edges.
    pub exhaustive: bool,
    pub values: Vec<ExactValue>,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.mismatches == 0 && self.values.iter().all(|v| v.detector == v.reference)
    }
}

fn event_counts<T: Ord>(tally: &BTreeMap<(T, T), OpenCounts>, edges: usize, pick: impl Fn(&(T, T)) -> bool) -> OpenCounts {
    let mut c = OpenCounts::zero(edges);
    for (k, v) in tally {
        if pick(k) {
            for (a, b) in c.counts.iter_mut().zip(&v.counts) {
                *a += b;
            }
        }
    }
    c
}

fn values(det: &OpenCounts, reference: &OpenCounts) -> Vec<ExactValue> {
    levels()
        .iter()
        .map(|&(a, b)| {
            let p = ratio(a, b);
            ExactValue { p: p.to_string(), detector: det.probability(&p).to_string(), reference: reference.probability(&p).to_string() }
        })
        .collect()
}

struct Case<'a> {
    detector: &'a str,
    instance: &'a str,
    event: &'a str,
}

/// Enumerates `free` bits of `set` over each base mask and compares the
/// detector with the reference on every configuration.
fn cross_check<T, D, R, E>(case: Case<'_>, set: &EdgeSet, bases: &[u64], free: &[usize], det: D, reference: R, event: E) -> Result<CheckResult>
where
    T: Ord + Copy + Send + Debug,
    D: Fn(&MaskConfig<'_>) -> T + Sync,
    R: Fn(u64) -> T + Sync,
    E: Fn(T) -> bool,
{
    let e = free.len();
    let mut det_counts = OpenCounts::zero(e);
    let mut ref_counts = OpenCounts::zero(e);
    let mut mismatches = 0;
    let mut configs = 0;
    for &base in bases {
        let tally = tally_configs(set, base, free, |c| (det(c), reference(c.open)))?;
        mismatches += tally.iter().filter(|(k, _)| k.0 != k.1).map(|(_, v)| v.total()).sum::<u64>();
        configs += tally.values().map(|v| v.total()).sum::<u64>();
        for (acc, pick) in [(&mut det_counts, 0), (&mut ref_counts, 1)] {
            let c = event_counts(&tally, e, |k| event(if pick == 0 { k.0 } else { k.1 }));
            for (a, b) in acc.counts.iter_mut().zip(&c.counts) {
                *a += b;
            }
        }
    }
    let exhaustive = bases.len() == 1 && free.len() == set.len();
    // conditional probabilities average over the slices
    let values = if bases.len() == 1 {
        values(&det_counts, &ref_counts)
    } else {
        Vec::new()
    };
    Ok(CheckResult {
        detector: case.detector.into(),
        instance: case.instance.into(),
        event: case.event.into(),
        edges: set.len(),
        configs,
        mismatches,
        exhaustive,
        values,
    })
}

fn all_bits(set: &EdgeSet) -> Vec<usize> {
    (0..set.len()).collect()
}

fn norm((x, y): (i32, i32)) -> i32 {
    x.abs().max(y.abs())
}

pub fn check_clusters_b1() -> Result<CheckResult> {
    let set = EdgeSet::ball(1)?;
    let g = MaskGraph::primal(&set, |_, _| true);
    let o = 1u64 << g.vertex(0, 0).unwrap();
    let region = Region::ball(1)?;
    cross_check(
        Case { detector: "clusters", instance: "B(1)", event: "|C(0)| >= 5" },
        &set,
        &[0],
        &all_bits(&set),
        |c| {
            let l = clusters(c, region);
            (l.cluster_of(Site::ORIGIN).unwrap().size as u32, l.len() as u32)
        },
        |open| (g.reach(open, o).count_ones(), g.components(open).len() as u32),
        |(size, _)| size >= 5,
    )
}

pub fn check_origin_connects(n: i32, set: EdgeSet, name: &str) -> Result<CheckResult> {
    let g = MaskGraph::primal(&set, |_, _| true);
    let o = 1u64 << g.vertex(0, 0).unwrap();
    let bd = g.vertex_mask(|x, y| norm((x, y)) == n);
    cross_check(
        Case { detector: "origin_connects", instance: name, event: "0 <-> dB(n)" },
        &set,
        &[0],
        &all_bits(&set),
        |c| origin_connects(c, n),
        |open| g.reach(open, o) & bd != 0,
        |v| v,
    )
}

pub fn check_crossing(rect: (i32, i32, i32, i32), orientation: Orientation, name: &str) -> Result<CheckResult> {
    let (x0, x1, y0, y1) = rect;
    let region = Region::rect(x0, x1, y0, y1)?;
    let set = EdgeSet::new(region.edges())?;
    let g = MaskGraph::primal(&set, |_, _| true);
    let (from, to) = match orientation {
        Orientation::Horizontal => (g.vertex_mask(|x, _| x == x0), g.vertex_mask(|x, _| x == x1)),
        Orientation::Vertical => (g.vertex_mask(|_, y| y == y0), g.vertex_mask(|_, y| y == y1)),
    };
    let event = match orientation {
        Orientation::Horizontal => "left-right crossing",
        Orientation::Vertical => "bottom-top crossing",
    };
    cross_check(
        Case { detector: "has_crossing", instance: name, event },
        &set,
        &[0],
        &all_bits(&set),
        |c| has_crossing(c, region, orientation).unwrap(),
        |open| g.reach(open, from) & to != 0,
        |v| v,
    )
}

/// Reference circuit search: an open circuit of `Ann(m, n)` surrounds the
/// origin iff some closed walk of open annulus edges crosses the ray
/// `{(t, ½) : t ≥ 0}` an odd number of times.
fn circuit_reference(set: &EdgeSet, m: i32, n: i32) -> (MaskGraph, u64) {
    let g = MaskGraph::primal(set, |x, y| {
        let d = norm((x, y));
        d > m && d <= n
    });
    let crossing = g.edge_bits(|a, b| a.0 == b.0 && a.0 >= 0 && a.1.min(b.1) == 0);
    (g, crossing)
}

pub fn check_circuit(m: i32, n: i32) -> Result<CheckResult> {
    let set = EdgeSet::annulus(m, n)?;
    let (g, crossing) = circuit_reference(&set, m, n);
    let name = format!("Ann({m},{n})");
    cross_check(
        Case { detector: "has_open_circuit_in_annulus", instance: &name, event: "open circuit" },
        &set,
        &[0],
        &all_bits(&set),
        |c| has_open_circuit_in_annulus(c, m, n).unwrap(),
        |open| g.odd_walk_vertices(open, crossing) != 0,
        |v| v,
    )
}

/// `Ann(0,2)` has 36 edges, beyond the enumeration limit. Every
/// configuration of 24 edges is enumerated for each of several fixings of
/// the remaining 12: the radial edges all open; twelve outer-ring edges all
/// open; the same twelve all closed.
pub fn check_circuit_ann02_slices() -> Result<CheckResult> {
    let set = EdgeSet::annulus(0, 2)?;
    let (g, crossing) = circuit_reference(&set, 0, 2);
    let radial = set.mask(|e| e.a().norm() != e.b().norm());
    let outer = set.mask(|e| e.a().norm() == 2 && e.b().norm() == 2);
    // one free edge per side of the outer ring: from the axis site towards
    // the increasing coordinate
    let outer_free = set.mask(|e| {
        let (a, b) = e.endpoints();
        a.norm() == 2 && b.norm() == 2 && ((a.x == 0 && b.x == 1) || (a.y == 0 && b.y == 1))
    });
    let outer_fixed = outer & !outer_free;
    let bits = |m: u64| (0..set.len()).filter(|b| m >> b & 1 == 1).collect::<Vec<_>>();
    let mut total: Option<CheckResult> = None;
    for (fixed, base) in [(radial, radial), (outer_fixed, outer_fixed), (outer_fixed, 0)] {
        let free = bits(set.full_mask() & !fixed);
        let r = cross_check(
            Case { detector: "has_open_circuit_in_annulus", instance: "Ann(0,2) slices", event: "open circuit" },
            &set,
            &[base],
            &free,
            |c| has_open_circuit_in_annulus(c, 0, 2).unwrap(),
            |open| g.odd_walk_vertices(open, crossing) != 0,
            |v| v,
        )?;
        total = Some(match total {
            None => r,
            Some(t) => CheckResult { configs: t.configs + r.configs, mismatches: t.mismatches + r.mismatches, ..t },
        });
    }
    let mut t = total.unwrap();
    t.exhaustive = false;
    t.values.clear();
    Ok(t)
}

/// Per-configuration agreement on uniformly drawn configurations of all 36
/// edges of `Ann(0,2)`.
pub fn check_circuit_ann02_sampled(samples: u64, seed: u64) -> Result<CheckResult> {
    let set = EdgeSet::annulus(0, 2)?;
    let (g, crossing) = circuit_reference(&set, 0, 2);
    let field = WeightField::new(seed, 0);
    let mut mismatches = 0;
    for i in 0..samples {
        let open = field.stream(i).hash(Edge::horizontal(Site::ORIGIN)) & set.full_mask();
        let c = set.config(open);
        if has_open_circuit_in_annulus(&c, 0, 2)? != (g.odd_walk_vertices(open, crossing) != 0) {
            mismatches += 1;
        }
    }
    Ok(CheckResult {
        detector: "has_open_circuit_in_annulus".into(),
        instance: "Ann(0,2) sampled".into(),
        event: "open circuit".into(),
        edges: set.len(),
        configs: samples,
        mismatches,
        exhaustive: false,
        values: Vec::new(),
    })
}

pub fn check_surrounding(n: i32, set: EdgeSet, name: &str) -> Result<CheckResult> {
    // dual sites of B(n): representatives i, j ∈ [-n, n-1]
    let g = MaskGraph::dual(&set, |i, j| (-n..n).contains(&i) && (-n..n).contains(&j));
    // dual edges crossing the ray {(0, t) : t > 0}
    let crossing = g.edge_bits(|a, b| a.1 == b.1 && a.0.min(b.0) == -1 && a.0.max(b.0) == 0 && a.1 >= 0);
    let full = set.full_mask();
    cross_check(
        Case { detector: "surrounding_closed_cluster", instance: name, event: "origin surrounded" },
        &set,
        &[0],
        &all_bits(&set),
        |c| surrounding_closed_cluster(c, n).unwrap().unwrap_or(-1),
        |open| {
            let odd = g.odd_walk_vertices(full & !open, crossing);
            (0..g.vertex_count())
                .filter(|v| odd >> v & 1 == 1)
                .map(|v| {
                    let (i, j) = g.coords(v);
                    (2 * i + 1).abs().max((2 * j + 1).abs()) / 2
                })
                .max()
                .unwrap_or(-1)
        },
        |v| v >= 0,
    )
}

pub fn check_arms(m: i32, n: i32, set: EdgeSet, name: &str) -> Result<CheckResult> {
    let g = MaskGraph::primal(&set, |_, _| true);
    let starts = g.vertex_mask(|x, y| norm((x, y)) <= m);
    let targets = g.vertex_mask(|x, y| norm((x, y)) == n);
    let through = g.vertex_mask(|x, y| norm((x, y)) > m && norm((x, y)) < n);
    let certs = arm_certificates(&g, starts, targets, through, 16);
    cross_check(
        Case { detector: "max_disjoint_arms", instance: name, event: "arms >= 2" },
        &set,
        &[0],
        &all_bits(&set),
        |c| max_disjoint_arms(c, m, n).unwrap(),
        |open| certs.max_k(open),
        |v| v >= 2,
    )
}

pub fn check_defects(n: i32, set: EdgeSet, name: &str) -> Result<CheckResult> {
    let g = MaskGraph::primal(&set, |_, _| true);
    let o = 1u64 << g.vertex(0, 0).unwrap();
    let rings: Vec<u64> = (1..=n).map(|r| g.vertex_mask(|x, y| norm((x, y)) == r)).collect();
    let k_max = n as u32;
    cross_check(
        Case { detector: "defect_costs", instance: name, event: "0 <->_(n-1) dB(n)" },
        &set,
        &[0],
        &all_bits(&set),
        |c| {
            let mut key = [u32::MAX; 4];
            for (i, v) in defect_costs(c, n, k_max).into_iter().enumerate() {
                key[i] = v.unwrap_or(u32::MAX);
            }
            key
        },
        |open| {
            // R_k: sites reachable with at most k closed edges
            let mut key = [u32::MAX; 4];
            let mut r = g.reach(open, o);
            for k in 0..=k_max {
                for (i, ring) in rings.iter().enumerate() {
                    if key[i] == u32::MAX && r & ring != 0 {
                        key[i] = k;
                    }
                }
                r = g.reach(open, g.grow(r));
            }
            key
        },
        |key| key[n as usize - 1] < n as u32,
    )
}

struct AllClosed;

impl EdgeStatus for AllClosed {
    fn is_open(&self, _: Edge) -> bool {
        false
    }
}

/// Open straight rays from `(0,0)` to `(−2,0)` and from `(1,0)` to `(2,0)`:
/// the open half of the four-arm event at `⟨(0,0),(1,0)⟩` for `n = 2`.
struct Rays;

impl EdgeStatus for Rays {
    fn is_open(&self, e: Edge) -> bool {
        e.orientation == Orientation::Horizontal && e.base.y == 0 && matches!(e.base.x, -2 | -1 | 1)
    }
}

/// Four-arm event at `⟨(0,0),(1,0)⟩` in `B(2)`. Its open half depends on
/// 23 primal edges and its closed half on 23 (overlapping) edges; the
/// event is their conjunction, so enumerating each half over all its
/// configurations, keyed by the shared edges, covers all `2^29`
/// configurations of the union exactly.
pub fn check_four_arm_b2() -> Result<CheckResult> {
    let n = 2;
    let e = Edge::horizontal(Site::ORIGIN);
    let all = Region::box_at(Site::ORIGIN, n + 1)?.edges();
    let primal: Vec<Edge> = all
        .iter()
        .copied()
        .filter(|f| *f != e && f.a().norm() <= n && f.b().norm() <= n && (f.a().norm() < n || f.b().norm() < n))
        .collect();
    let dual: Vec<Edge> = all
        .iter()
        .copied()
        .filter(|f| {
            let (p, q) = super::reference::dual_reps((f.a().x, f.a().y), (f.b().x, f.b().y));
            *f != e && norm(p) <= n && norm(q) <= n && (norm(p) < n || norm(q) < n)
        })
        .collect();
    let set_a = EdgeSet::new(primal)?;
    let set_b = EdgeSet::new(dual)?;
    let shared: Vec<Edge> = set_a.edges().iter().copied().filter(|f| set_b.index(*f).is_some()).collect();
    let key = |set: &EdgeSet, open: u64| -> u32 {
        shared.iter().enumerate().fold(0, |k, (i, f)| k | ((open >> set.index(*f).unwrap() & 1) as u32) << i)
    };

    let ga = MaskGraph::primal(&set_a, |x, y| norm((x, y)) <= n);
    let ca = two_source_certificates(
        &ga,
        ga.vertex(0, 0).unwrap(),
        ga.vertex(1, 0).unwrap(),
        ga.vertex_mask(|x, y| norm((x, y)) == n),
        ga.vertex_mask(|x, y| norm((x, y)) < n),
        u64::MAX,
    );
    let gb = MaskGraph::dual(&set_b, |i, j| norm((i, j)) <= n);
    let cb = two_source_certificates(
        &gb,
        gb.vertex(0, -1).unwrap(),
        gb.vertex(0, 0).unwrap(),
        gb.vertex_mask(|i, j| norm((i, j)) == n),
        gb.vertex_mask(|i, j| norm((i, j)) < n),
        u64::MAX,
    );
    let full_b = set_b.full_mask();

    let ta = tally_configs(&set_a, 0, &all_bits(&set_a), |c| {
        (four_arm_status(c, &AllClosed, e, n).unwrap(), ca.iter().any(|m| m & !c.open == 0), key(&set_a, c.open))
    })?;
    let tb = tally_configs(&set_b, 0, &all_bits(&set_b), |c| {
        let closed = full_b & !c.open;
        (four_arm_status(&Rays, c, e, n).unwrap(), cb.iter().any(|m| m & !closed == 0), key(&set_b, c.open))
    })?;
    let mismatches = ta.iter().chain(tb.iter()).filter(|(k, _)| k.0 != k.1).map(|(_, v)| v.total()).sum();
    let configs = ta.values().chain(tb.values()).map(|v| v.total()).sum();

    // joint counts over the union: convolve the halves per shared assignment
    let union = set_a.len() + set_b.len() - shared.len();
    let joint = |pick: usize| -> OpenCounts {
        let half = |t: &BTreeMap<(bool, bool, u32), OpenCounts>| {
            let mut m: FxHashMap<u32, OpenCounts> = FxHashMap::default();
            for ((d, r, k), v) in t {
                if [*d, *r][pick] {
                    let slot = m.entry(*k).or_insert_with(|| OpenCounts::zero(v.edges));
                    for (a, b) in slot.counts.iter_mut().zip(&v.counts) {
                        *a += b;
                    }
                }
            }
            m
        };
        let (ha, hb) = (half(&ta), half(&tb));
        let mut out = OpenCounts::zero(union);
        for (k, a) in &ha {
            let Some(b) = hb.get(k) else { continue };
            let s = k.count_ones() as usize;
            for (i, x) in a.counts.iter().enumerate() {
                for (j, y) in b.counts.iter().enumerate() {
                    if *x != 0 && *y != 0 {
                        // shared open edges are counted in both halves
                        out.counts[i + j - s] += x * y;
                    }
                }
            }
        }
        out
    };
    Ok(CheckResult {
        detector: "four_arm".into(),
        instance: "B(2), e = <(0,0),(1,0)>".into(),
        event: "A_2^{2,2}".into(),
        edges: union,
        configs,
        mismatches,
        exhaustive: true,
        values: values(&joint(0), &joint(1)),
    })
}

/// The full suite: every detector on `B(1)`, `B(2)` and `Ann(0,2)`.
pub fn run_all() -> Result<Vec<CheckResult>> {
    let mut out = vec![check_clusters_b1()?];
    out.push(check_origin_connects(1, EdgeSet::ball(1)?, "B(1)")?);
    out.push(check_origin_connects(2, EdgeSet::ball_interior(2)?, "B(2)")?);
    for o in [Orientation::Horizontal, Orientation::Vertical] {
        out.push(check_crossing((-1, 1, -1, 1), o, "B(1)")?);
        out.push(check_crossing((-2, 2, -1, 1), o, "[-2,2]x[-1,1] in B(2)")?);
    }
    out.push(check_crossing((0, 1, 0, 1), Orientation::Horizontal, "2x2 sites")?);
    out.push(check_crossing((0, 2, 0, 1), Orientation::Horizontal, "[0,2]x[0,1] self-dual")?);
    out.push(check_circuit(0, 1)?);
    out.push(check_circuit(1, 2)?);
    out.push(check_circuit_ann02_slices()?);
    out.push(check_circuit_ann02_sampled(1_000_000, 0x0a22)?);
    out.push(check_surrounding(1, EdgeSet::ball(1)?, "B(1)")?);
    out.push(check_surrounding(2, EdgeSet::ball_interior(2)?, "B(2)")?);
    out.push(check_arms(0, 1, EdgeSet::ball(1)?, "Ann(0,1)")?);
    out.push(check_arms(0, 2, EdgeSet::ball_interior(2)?, "Ann(0,2)")?);
    out.push(check_arms(1, 2, EdgeSet::ball_interior(2)?, "Ann(1,2)")?);
    out.push(check_four_arm_b2()?);
    out.push(check_defects(1, EdgeSet::ball(1)?, "B(1)")?);
    out.push(check_defects(2, EdgeSet::ball_interior(2)?, "B(2)")?);
    Ok(out)
}
