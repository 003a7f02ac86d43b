//! Reference searches used for comparison and as oracles.
//!
//! These share nothing with the main pipeline beyond the graph types and
//! `compute_support`: each has its own peeling and component code. The
//! binary search additionally leans on [`SortedEdgeArray`] for radius range
//! retrieval.

use std::collections::hash_map::Entry;
use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use crate::error::BaselineError;
use crate::graph::{Edge, GeoSocialGraph, GroupResult, Query, VertexId};
use crate::spatial::{Radius, SortedEdgeArray};
use crate::truss::compute_support;

/// Default vertex cap of [`brute_force_optimum`].
pub const BRUTE_FORCE_CAP: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BaselineKind {
    Incremental,
    Decremental,
    BinarySearch,
}

impl BaselineKind {
    pub const ALL: [BaselineKind; 3] = [
        BaselineKind::Incremental,
        BaselineKind::Decremental,
        BaselineKind::BinarySearch,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BaselineKind::Incremental => "inc",
            BaselineKind::Decremental => "dec",
            BaselineKind::BinarySearch => "bin",
        }
    }

    pub fn run(self, g: &GeoSocialGraph, q: &Query) -> Option<GroupResult> {
        self.run_from(&preprune(g, q), g, q)
    }

    pub fn run_from(self, p: &Prepruned, g: &GeoSocialGraph, q: &Query) -> Option<GroupResult> {
        match self {
            BaselineKind::Incremental => run_incremental_from(p, g, q),
            BaselineKind::Decremental => run_decremental_from(p, g, q),
            BaselineKind::BinarySearch => run_binary_search_from(p, g, q),
        }
    }
}

/// Removes edges below support `c - 2` with a work queue.
fn queue_peel(edges: &[Edge], c: usize) -> Vec<Edge> {
    let need = c.saturating_sub(2) as u32;
    let sup = compute_support(edges);
    let mut support: HashMap<Edge, u32> = sup.iter().collect();
    let mut adj: HashMap<VertexId, HashSet<VertexId>> = HashMap::new();
    for &(u, v) in edges {
        adj.entry(u).or_default().insert(v);
        adj.entry(v).or_default().insert(u);
    }
    let mut queue: VecDeque<Edge> = support
        .iter()
        .filter(|&(_, &s)| s < need)
        .map(|(&e, _)| e)
        .collect();
    let mut gone: HashSet<Edge> = HashSet::new();
    while let Some((u, v)) = queue.pop_front() {
        if !gone.insert((u, v)) {
            continue;
        }
        adj.get_mut(&u).unwrap().remove(&v);
        adj.get_mut(&v).unwrap().remove(&u);
        let common: Vec<VertexId> = adj[&u].intersection(&adj[&v]).copied().collect();
        for w in common {
            for e in [(u.min(w), u.max(w)), (v.min(w), v.max(w))] {
                let s = support.get_mut(&e).unwrap();
                *s -= 1;
                if *s < need {
                    queue.push_back(e);
                }
            }
        }
    }
    let mut out: Vec<Edge> = support.into_keys().filter(|e| !gone.contains(e)).collect();
    out.sort_unstable();
    out
}

/// Splits an edge set into connected components by depth-first search.
fn dfs_components(edges: &[Edge]) -> Vec<Vec<Edge>> {
    let mut adj: HashMap<VertexId, Vec<VertexId>> = HashMap::new();
    for &(u, v) in edges {
        adj.entry(u).or_default().push(v);
        adj.entry(v).or_default().push(u);
    }
    let mut label: HashMap<VertexId, usize> = HashMap::new();
    let mut starts: Vec<VertexId> = adj.keys().copied().collect();
    starts.sort_unstable();
    let mut count = 0;
    for s in starts {
        if label.contains_key(&s) {
            continue;
        }
        let mut stack = vec![s];
        label.insert(s, count);
        while let Some(x) = stack.pop() {
            for &y in &adj[&x] {
                if let Entry::Vacant(e) = label.entry(y) {
                    e.insert(count);
                    stack.push(y);
                }
            }
        }
        count += 1;
    }
    let mut out = vec![Vec::new(); count];
    for &(u, v) in edges {
        out[label[&u]].push((u, v));
    }
    out
}

fn meets_keywords(edges: &[Edge], g: &GeoSocialGraph, q: &Query) -> bool {
    let vs: BTreeSet<VertexId> = edges.iter().flat_map(|&(u, v)| [u, v]).collect();
    let mut counts = vec![0u32; q.phi().len()];
    for v in vs {
        if let Some(i) = q.slot(g.keyword(v)) {
            counts[i] += 1;
        }
    }
    q.satisfies(&counts)
}

/// Qualifying components of the c-truss of `edges`.
fn qualifying(edges: &[Edge], g: &GeoSocialGraph, q: &Query) -> Vec<Vec<Edge>> {
    dfs_components(&queue_peel(edges, q.c))
        .into_iter()
        .filter(|comp| meets_keywords(comp, g, q))
        .collect()
}

/// The qualifying component nearest to the query location.
fn best(comps: Vec<Vec<Edge>>, g: &GeoSocialGraph, q: &Query) -> Option<GroupResult> {
    comps
        .into_iter()
        .map(|comp| GroupResult::from_edges(comp, q, g))
        .min_by(|a, b| a.dist.total_cmp(&b.dist).then(a.vertices.cmp(&b.vertices)))
}

fn induced(g: &GeoSocialGraph, keep: &[bool]) -> Vec<Edge> {
    g.edges().filter(|&(u, v)| keep[u] && keep[v]).collect()
}

/// The baselines' own pruning: maximal (rho, c)-truss components and their
/// vertices nearest first.
#[derive(Clone, Debug, PartialEq)]
pub struct Prepruned {
    pub edges: Vec<Edge>,
    pub order: Vec<(f64, VertexId)>,
}

pub fn preprune(g: &GeoSocialGraph, q: &Query) -> Prepruned {
    let all: Vec<Edge> = g.edges().collect();
    let edges: Vec<Edge> = qualifying(&all, g, q).into_iter().flatten().collect();
    let vs: BTreeSet<VertexId> = edges.iter().flat_map(|&(u, v)| [u, v]).collect();
    let mut order: Vec<(f64, VertexId)> = vs.into_iter().map(|v| (q.sq_dist(g, v), v)).collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    Prepruned { edges, order }
}

pub fn run_incremental(g: &GeoSocialGraph, q: &Query) -> Option<GroupResult> {
    run_incremental_from(&preprune(g, q), g, q)
}

pub fn run_decremental(g: &GeoSocialGraph, q: &Query) -> Option<GroupResult> {
    run_decremental_from(&preprune(g, q), g, q)
}

pub fn run_binary_search(g: &GeoSocialGraph, q: &Query) -> Option<GroupResult> {
    run_binary_search_from(&preprune(g, q), g, q)
}

/// Adds vertices nearest first, rechecking from scratch after each one.
pub fn run_incremental_from(p: &Prepruned, g: &GeoSocialGraph, q: &Query) -> Option<GroupResult> {
    let mut keep = vec![false; g.n()];
    for &(_, v) in &p.order {
        keep[v] = true;
        let found = best(qualifying(&induced(g, &keep), g, q), g, q);
        if found.is_some() {
            return found;
        }
    }
    None
}

/// Deletes the farthest vertex until no qualifying truss is left and
/// returns the last one seen.
pub fn run_decremental_from(p: &Prepruned, g: &GeoSocialGraph, q: &Query) -> Option<GroupResult> {
    let mut last = best(qualifying(&p.edges, g, q), g, q)?;
    let mut keep = vec![false; g.n()];
    for &(_, v) in &p.order {
        keep[v] = true;
    }
    for &(_, v) in p.order.iter().rev() {
        keep[v] = false;
        match best(qualifying(&induced(g, &keep), g, q), g, q) {
            Some(r) => last = r,
            None => return Some(last),
        }
    }
    Some(last)
}

/// Binary search over the distinct vertex distances of the pre-pruned graph.
pub fn run_binary_search_from(
    p: &Prepruned,
    g: &GeoSocialGraph,
    q: &Query,
) -> Option<GroupResult> {
    let a = SortedEdgeArray::from_edges(&p.edges, g, q.lambda);
    let mut radii: Vec<f64> = p.order.iter().map(|&(sq, _)| sq).collect();
    radii.dedup();
    let probe = |i: usize| {
        let r = Radius::from_squared(radii[i]);
        let within: Vec<Edge> = a.entries()[..a.count_within(r)]
            .iter()
            .map(|e| e.edge)
            .collect();
        best(qualifying(&within, g, q), g, q)
    };
    // smallest index whose radius admits a group
    let (mut lo, mut hi) = (0, radii.len());
    let mut found = None;
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        match probe(mid) {
            Some(r) => {
                found = Some(r);
                hi = mid;
            }
            None => lo = mid + 1,
        }
    }
    found
}

/// Repeated full-recount peeling.
fn recount_peel(edges: &[Edge], c: usize) -> Vec<Edge> {
    let need = c.saturating_sub(2) as u32;
    let mut cur: Vec<Edge> = edges.to_vec();
    cur.sort_unstable();
    loop {
        let sup = compute_support(&cur);
        let next: Vec<Edge> = cur
            .iter()
            .copied()
            .filter(|&(u, v)| sup.get(u, v).unwrap_or(0) >= need)
            .collect();
        if next.len() == cur.len() {
            return next;
        }
        cur = next;
    }
}

/// Exact optimum by trying every vertex distance in ascending order on the
/// unpruned graph. Capped at `cap` vertices.
pub fn brute_force_optimum_capped(
    g: &GeoSocialGraph,
    q: &Query,
    cap: usize,
) -> Result<Option<GroupResult>, BaselineError> {
    if g.n() > cap {
        return Err(BaselineError::InstanceTooLarge { n: g.n(), cap });
    }
    let mut sq: Vec<f64> = (0..g.n()).map(|v| q.sq_dist(g, v)).collect();
    sq.sort_by(f64::total_cmp);
    sq.dedup();
    for r in sq {
        let keep: Vec<bool> = (0..g.n()).map(|v| q.sq_dist(g, v) <= r).collect();
        let truss = recount_peel(&induced(g, &keep), q.c);
        let comps: Vec<Vec<Edge>> = dfs_components(&truss)
            .into_iter()
            .filter(|comp| meets_keywords(comp, g, q))
            .collect();
        if let Some(found) = best(comps, g, q) {
            return Ok(Some(found));
        }
    }
    Ok(None)
}

pub fn brute_force_optimum(
    g: &GeoSocialGraph,
    q: &Query,
) -> Result<Option<GroupResult>, BaselineError> {
    brute_force_optimum_capped(g, q, BRUTE_FORCE_CAP)
}
