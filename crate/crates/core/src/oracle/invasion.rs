//! Invasion events by enumeration of weight orderings.
//!
//! On a finite graph the invasion and its pond decomposition depend only on
//! the relative order of the weights, so averaging over all `E!` orderings
//! gives exact probabilities for i.i.d. continuous weights.

use num::BigRational;
use rustc_hash::FxHashSet;
use serde::{Deserialize, Serialize};

use super::{TinyGraph, MAX_ORDERING_EDGES};
use crate::error::{Error, Result};
use crate::invasion::{decompose_ponds, run_invasion, PondCluster, PondDecomposition, StopRule};
use crate::lattice::{Edge, Site};
use crate::weights::{EdgeWeights, ExplicitWeights};

/// Invasion computed straight from the definition: at every step scan all
/// edges touching the invaded sites and take the lightest.
#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceInvasion {
    pub order: Vec<Edge>,
    pub weights: Vec<f64>,
    /// Each invaded site with the 1-based step that reached it (0 for the
    /// origin).
    pub reached: Vec<(Site, usize)>,
    /// 1-based steps `t_k` at which the outlets are invaded.
    pub outlet_steps: Vec<usize>,
    pub ponds: Vec<ReferencePond>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReferencePond {
    /// Sites sorted.
    pub sites: Vec<Site>,
    /// Edges sorted.
    pub edges: Vec<Edge>,
    pub hat_r: i32,
    pub bar_r: i32,
}

pub fn reference_invasion<W: EdgeWeights>(graph: &TinyGraph, weights: &W) -> ReferenceInvasion {
    let mut sites: FxHashSet<Site> = FxHashSet::default();
    sites.insert(graph.origin());
    let mut reached = vec![(graph.origin(), 0)];
    let mut taken: FxHashSet<Edge> = FxHashSet::default();
    let mut order = Vec::new();
    let mut ws = Vec::new();
    loop {
        let best = graph
            .edges()
            .iter()
            .filter(|e| !taken.contains(*e) && (sites.contains(&e.a()) || sites.contains(&e.b())))
            .filter(|e| weights.weight(**e).is_finite())
            .min_by(|a, b| weights.weight(**a).total_cmp(&weights.weight(**b)).then(a.cmp(b)));
        let Some(&e) = best else { break };
        taken.insert(e);
        order.push(e);
        ws.push(weights.weight(e));
        for s in [e.a(), e.b()] {
            if sites.insert(s) {
                reached.push((s, order.len()));
            }
        }
    }

    // outlet k: the heaviest edge invaded after outlet k − 1
    let mut outlet_steps = Vec::new();
    let mut start = 0;
    while start < ws.len() {
        let j = (start..ws.len()).max_by(|a, b| ws[*a].total_cmp(&ws[*b])).unwrap();
        outlet_steps.push(j + 1);
        start = j + 1;
    }

    let mut ponds = Vec::new();
    for (k, &t) in outlet_steps.iter().enumerate() {
        let prev = if k == 0 { None } else { Some(outlet_steps[k - 1]) };
        // V(G_{t−1}) minus V(G_{prev−1})
        let in_pond = |s: usize| s < t && prev.map_or(true, |p| s >= p);
        let mut ps: Vec<Site> = reached.iter().filter(|(_, s)| in_pond(*s)).map(|(x, _)| *x).collect();
        ps.sort();
        let mut pe: Vec<Edge> =
            (prev.unwrap_or(0) + 1..t).map(|step| order[step - 1]).collect();
        pe.sort();
        let hat_r = reached.iter().filter(|(_, s)| *s < t).map(|(x, _)| x.norm()).max().unwrap_or(0);
        let bar_r = if ps.is_empty() {
            0
        } else {
            let w = ps.iter().map(|s| s.x).max().unwrap() - ps.iter().map(|s| s.x).min().unwrap();
            let h = ps.iter().map(|s| s.y).max().unwrap() - ps.iter().map(|s| s.y).min().unwrap();
            w.max(h)
        };
        ponds.push(ReferencePond { sites: ps, edges: pe, hat_r, bar_r });
    }
    ReferenceInvasion { order, weights: ws, reached, outlet_steps, ponds }
}

/// p-open clusters of a reference pond: components of its edges with
/// weight below `p_ref`, as (size, diameter) sorted like
/// [`PondDecomposition::open_clusters`].
pub fn reference_pond_clusters(inv: &ReferenceInvasion, k: usize, p_ref: f64) -> Vec<PondCluster> {
    let pond = &inv.ponds[k - 1];
    let open: Vec<Edge> = pond
        .edges
        .iter()
        .copied()
        .filter(|e| inv.weights[inv.order.iter().position(|x| x == e).unwrap()] < p_ref)
        .collect();
    let mut left: FxHashSet<Site> = open.iter().flat_map(|e| [e.a(), e.b()]).collect();
    let mut out = Vec::new();
    while let Some(&s) = left.iter().next() {
        let mut comp = vec![s];
        left.remove(&s);
        let mut i = 0;
        while i < comp.len() {
            let v = comp[i];
            for e in &open {
                if e.a() == v || e.b() == v {
                    let w = e.other(v);
                    if left.remove(&w) {
                        comp.push(w);
                    }
                }
            }
            i += 1;
        }
        let w = comp.iter().map(|s| s.x).max().unwrap() - comp.iter().map(|s| s.x).min().unwrap();
        let h = comp.iter().map(|s| s.y).max().unwrap() - comp.iter().map(|s| s.y).min().unwrap();
        out.push(PondCluster { size: comp.len(), diameter: w.max(h) });
    }
    out.sort_by(|a, b| b.diameter.cmp(&a.diameter).then(b.size.cmp(&a.size)));
    out
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut cur: Vec<usize> = (0..n).collect();
    let mut out = vec![cur.clone()];
    loop {
        let Some(i) = (1..n).rev().find(|&i| cur[i - 1] < cur[i]) else { return out };
        let j = (i..n).rev().find(|&j| cur[j] > cur[i - 1]).unwrap();
        cur.swap(i - 1, j);
        cur[i..].reverse();
        out.push(cur.clone());
    }
}

/// Monotone embeddings of ranks `1..=E` into weights: spread over (0, 1),
/// all below 1/2, all above 1/2. An ordering-measurable predicate cannot
/// tell them apart.
pub fn rank_embeddings(e: usize) -> [Vec<f64>; 3] {
    let d = (e + 1) as f64;
    [
        (1..=e).map(|r| r as f64 / d).collect(),
        (1..=e).map(|r| r as f64 / (2.0 * d)).collect(),
        (1..=e).map(|r| 0.5 + r as f64 / (2.0 * d)).collect(),
    ]
}

/// Weights giving edge `i` of the graph rank `perm[i] + 1`.
pub fn ranked_weights(graph: &TinyGraph, perm: &[usize], embedding: &[f64]) -> Result<ExplicitWeights> {
    super::explicit_weights(graph, &graph.edges().iter().zip(perm).map(|(e, r)| (*e, embedding[*r])).collect::<Vec<_>>())
}

fn check_size(graph: &TinyGraph) -> Result<()> {
    if graph.edges().len() > MAX_ORDERING_EDGES {
        return Err(Error::TooLarge(format!(
            "{} edges, ordering enumeration is limited to {MAX_ORDERING_EDGES}",
            graph.edges().len()
        )));
    }
    Ok(())
}

/// Exact probability of a predicate of the pond decomposition of the
/// invasion run to exhaustion, with `p_ref = 1/2`. Predicates whose value
/// changes between monotone re-embeddings of the same ordering are rejected.
pub fn oracle_invasion_event<F>(graph: &TinyGraph, predicate: F) -> Result<BigRational>
where
    F: Fn(&PondDecomposition<'_>) -> bool,
{
    check_size(graph)?;
    let e = graph.edges().len();
    let emb = rank_embeddings(e);
    let perms = permutations(e);
    let mut hits = 0i64;
    for perm in &perms {
        let mut vals = Vec::with_capacity(3);
        for em in &emb {
            let w = ranked_weights(graph, perm, em)?;
            let trace = run_invasion(&w, StopRule::steps(e + 1))?;
            let d = decompose_ponds(&trace, 0.5)?;
            vals.push(predicate(&d));
        }
        if vals.iter().any(|v| *v != vals[0]) {
            return Err(Error::NotOrderingMeasurable);
        }
        hits += vals[0] as i64;
    }
    Ok(BigRational::new(hits.into(), (perms.len() as i64).into()))
}

/// Same enumeration with a predicate on the reference invasion.
pub fn oracle_reference_event<F>(graph: &TinyGraph, predicate: F) -> Result<BigRational>
where
    F: Fn(&ReferenceInvasion) -> bool,
{
    check_size(graph)?;
    let e = graph.edges().len();
    let emb = rank_embeddings(e);
    let perms = permutations(e);
    let mut hits = 0i64;
    for perm in &perms {
        let w = ranked_weights(graph, perm, &emb[0])?;
        hits += predicate(&reference_invasion(graph, &w)) as i64;
    }
    Ok(BigRational::new(hits.into(), (perms.len() as i64).into()))
}

/// Outcome of comparing `decompose_ponds` with the reference decomposition
/// on every ordering of a graph's weights.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderingCheck {
    pub graph: String,
    pub orderings: usize,
    pub mismatches: usize,
    pub first_mismatch: Option<Vec<usize>>,
}

fn agrees(graph: &TinyGraph, w: &ExplicitWeights, p_ref: f64) -> Result<bool> {
    let e = graph.edges().len();
    let trace = run_invasion(w, StopRule::steps(e + 1))?;
    let d = decompose_ponds(&trace, p_ref)?;
    let r = reference_invasion(graph, w);
    if trace.edges() != r.order.as_slice() {
        return Ok(false);
    }
    let steps: Vec<usize> = d.outlets().iter().map(|o| o.index + 1).collect();
    if steps != r.outlet_steps {
        return Ok(false);
    }
    for (k, pond) in r.ponds.iter().enumerate() {
        let mut sites = d.pond_sites(k + 1);
        sites.sort();
        let mut edges: Vec<Edge> = d.pond_edge_range(k + 1).map(|i| trace.edges()[i]).collect();
        edges.sort();
        if sites != pond.sites || edges != pond.edges || d.raw_radii()[k] != (pond.hat_r, pond.bar_r) {
            return Ok(false);
        }
        if d.open_clusters(k + 1, p_ref) != reference_pond_clusters(&r, k + 1, p_ref) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Runs the comparison over all `E!` orderings (spread embedding,
/// `p_ref = 1/2`).
pub fn pond_conformance(name: &str, graph: &TinyGraph) -> Result<OrderingCheck> {
    check_size(graph)?;
    let e = graph.edges().len();
    let emb = rank_embeddings(e);
    let perms = permutations(e);
    let mut mismatches = 0;
    let mut first = None;
    for perm in &perms {
        let w = ranked_weights(graph, perm, &emb[0])?;
        if !agrees(graph, &w, 0.5)? {
            mismatches += 1;
            first.get_or_insert_with(|| perm.clone());
        }
    }
    Ok(OrderingCheck { graph: name.to_string(), orderings: perms.len(), mismatches, first_mismatch: first })
}

/// The fixed five-edge graphs used for ordering conformance: a path, a
/// star with a tail, and a square with a pendant edge.
pub fn five_edge_graphs() -> Vec<(&'static str, TinyGraph)> {
    let h = |x, y| Edge::horizontal(Site::new(x, y));
    let v = |x, y| Edge::vertical(Site::new(x, y));
    let path = vec![h(0, 0), h(1, 0), h(2, 0), h(3, 0), h(4, 0)];
    let star = vec![h(0, 0), v(0, 0), h(-1, 0), v(0, -1), h(1, 0)];
    let square = vec![h(0, 0), v(1, 0), h(0, 1), v(0, 0), h(-1, 0)];
    [("path", path, Site::new(5, 0)), ("star", star, Site::new(2, 0)), ("square", square, Site::new(-1, 0))]
        .into_iter()
        .map(|(n, e, b)| (n, TinyGraph::new(e, Site::ORIGIN, vec![b]).unwrap()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::ratio;

    fn h(x: i32, y: i32) -> Edge {
        Edge::horizontal(Site::new(x, y))
    }

    #[test]
    fn permutation_count() {
        assert_eq!(permutations(5).len(), 120);
        let p = permutations(3);
        assert_eq!(p.first().unwrap(), &vec![0, 1, 2]);
        assert_eq!(p.last().unwrap(), &vec![2, 1, 0]);
    }

    #[test]
    fn c_before_a_on_a_path() {
        // a − 0 − b − c: c precedes a iff ⟨a,0⟩ is the heaviest of the three
        let g = TinyGraph::new(vec![h(-1, 0), h(0, 0), h(1, 0)], Site::ORIGIN, vec![]).unwrap();
        let (a, c) = (Site::new(-1, 0), Site::new(2, 0));
        let step = |r: &ReferenceInvasion, s: Site| r.reached.iter().find(|(x, _)| *x == s).unwrap().1;
        let by_reference = oracle_reference_event(&g, |r| step(r, c) < step(r, a)).unwrap();
        let by_trace = oracle_invasion_event(&g, |d| {
            let t = d.trace();
            let at = |s: Site| t.sites().iter().find(|(x, _)| *x == s).unwrap().1;
            at(c) < at(a)
        })
        .unwrap();
        assert_eq!(by_reference, ratio(1, 3));
        assert_eq!(by_trace, ratio(1, 3));
    }

    #[test]
    fn first_edge_is_lightest_at_origin() {
        for (_, g) in five_edge_graphs() {
            let p = oracle_invasion_event(&g, |d| {
                let t = d.trace();
                let first = t.edges()[0];
                Site::ORIGIN.incident_edges().iter().all(|e| t.taus()[0] <= {
                    t.edges().iter().position(|x| x == e).map_or(f64::INFINITY, |i| t.taus()[i])
                }) && (first.a() == Site::ORIGIN || first.b() == Site::ORIGIN)
            })
            .unwrap();
            assert_eq!(p, ratio(1, 1));
        }
    }

    #[test]
    fn value_dependent_predicates_are_refused() {
        let (_, g) = &five_edge_graphs()[0];
        let r = oracle_invasion_event(g, |d| d.outlets()[0].tau > 0.5);
        assert!(matches!(r, Err(Error::NotOrderingMeasurable)));
        let big = TinyGraph::new((0..9).map(|x| h(x, 0)).collect(), Site::ORIGIN, vec![]).unwrap();
        assert!(matches!(oracle_invasion_event(&big, |_| true), Err(Error::TooLarge(_))));
    }

    #[test]
    fn ponds_match_reference_on_all_orderings() {
        for (name, g) in five_edge_graphs() {
            let c = pond_conformance(name, &g).unwrap();
            assert_eq!(c.orderings, 120);
            assert_eq!(c.mismatches, 0, "{c:?}");
        }
    }

    #[test]
    fn explicit_weights_reject_foreign_edges_and_ties() {
        let (_, g) = &five_edge_graphs()[0];
        assert!(crate::oracle::explicit_weights(g, &[(h(9, 9), 0.1)]).is_err());
        assert!(crate::oracle::explicit_weights(g, &[(h(0, 0), 0.1), (h(1, 0), 0.1)]).is_err());
    }
}
