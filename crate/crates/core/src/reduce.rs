//! Reducing stage: peel the farthest vertices off the candidate truss while
//! the keyword-aware forest reports whether a qualifying component survives.
//!
//! The first deletion that leaves no qualifying component determines the
//! answer: only the component holding the deleted vertex can have been
//! destroyed, so that component, as it was just before the deletion, is the
//! result and its distance is the deleted vertex's distance.

use std::collections::{HashMap, HashSet, VecDeque};

use crate::error::ReduceError;
use crate::expand::Candidate;
use crate::forest::KeywordSpanningForest;
use crate::graph::{Edge, GeoSocialGraph, GroupResult, Query, VertexId};
use crate::truss::TrussState;

/// Knobs for the reducing stage.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ReduceConfig {
    /// Fault injection: delete vertices without the support cascade.
    pub skip_cascade: bool,
}

/// Runs the reducing stage on `candidate`.
pub fn run_reducing(
    candidate: &Candidate,
    g: &GeoSocialGraph,
    q: &Query,
) -> Result<GroupResult, ReduceError> {
    run_reducing_with(candidate, g, q, ReduceConfig::default())
}

pub fn run_reducing_with(
    candidate: &Candidate,
    g: &GeoSocialGraph,
    q: &Query,
    cfg: ReduceConfig,
) -> Result<GroupResult, ReduceError> {
    let mut truss = TrussState::new(&candidate.edges, q.c);
    if truss.peel(|_| {}) > 0 {
        return Err(ReduceError::InvalidCandidate(format!(
            "edges below support {}",
            q.min_support()
        )));
    }
    let mut vertices: Vec<VertexId> =
        candidate.edges.iter().flat_map(|&(u, v)| [u, v]).collect();
    vertices.sort_unstable();
    vertices.dedup();
    let mut forest = KeywordSpanningForest::for_query(&vertices, &candidate.edges, g, q);
    if !forest.has_satisfying() {
        return Err(ReduceError::InvalidCandidate(
            "no component meets the keyword constraint".into(),
        ));
    }

    // farthest first; ties broken by larger id so the order is total
    let mut order: Vec<(f64, VertexId)> = vertices.iter().map(|&v| (q.sq_dist(g, v), v)).collect();
    order.sort_by(|a, b| b.0.total_cmp(&a.0).then(b.1.cmp(&a.1)));

    let mut dead: HashSet<VertexId> = HashSet::new();
    let mut vertex_deletions = 0;
    let mut edge_deletions = 0;
    discard_pruned(&mut forest, &mut truss, &mut dead, &mut edge_deletions);

    for &(_, v) in &order {
        if dead.contains(&v) {
            continue;
        }
        let mut removed: Vec<Edge> = Vec::new();
        truss
            .delete_vertex_with(v, !cfg.skip_cascade, |e| {
                removed.push(e);
                forest
                    .delete_edge(e.0, e.1)
                    .expect("truss and forest track the same edges");
            })
            .expect("live vertex");
        dead.insert(v);
        vertex_deletions += 1;
        edge_deletions += removed.len();

        if !forest.has_satisfying() {
            let mut before = truss.edges();
            before.extend(removed);
            let mut out = GroupResult::from_edges(component_of(v, &before), q, g);
            let fs = forest.stats();
            out.stats.candidate_vertices = vertices.len();
            out.stats.candidate_edges = candidate.edges.len();
            out.stats.reduce_vertex_deletions = vertex_deletions;
            out.stats.reduce_edge_deletions = edge_deletions;
            out.stats.forest_cuts = fs.cuts;
            out.stats.forest_links = fs.links;
            out.stats.forest_max_level = fs.max_level;
            return Ok(out);
        }
        discard_pruned(&mut forest, &mut truss, &mut dead, &mut edge_deletions);
    }
    // every vertex gone yet something still qualifies: impossible, since a
    // qualifying component needs an edge
    Err(ReduceError::InvalidCandidate(
        "forest kept a qualifying component after all deletions".into(),
    ))
}

/// Drops vertices of pruned components from the truss state. Their edges
/// never reach the forest again; those components are already dead there.
fn discard_pruned(
    forest: &mut KeywordSpanningForest,
    truss: &mut TrussState,
    dead: &mut HashSet<VertexId>,
    edge_deletions: &mut usize,
) {
    for p in forest.take_pruned() {
        if dead.insert(p) {
            if let Ok(k) = truss.delete_vertex(p, |_| {}) {
                *edge_deletions += k;
            }
        }
    }
}

/// Edges of the component of `v` in `edges`.
fn component_of(v: VertexId, edges: &[Edge]) -> Vec<Edge> {
    let mut adj: HashMap<VertexId, Vec<VertexId>> = HashMap::new();
    for &(a, b) in edges {
        adj.entry(a).or_default().push(b);
        adj.entry(b).or_default().push(a);
    }
    let mut seen: HashSet<VertexId> = HashSet::from([v]);
    let mut queue = VecDeque::from([v]);
    while let Some(x) = queue.pop_front() {
        for &y in adj.get(&x).into_iter().flatten() {
            if seen.insert(y) {
                queue.push_back(y);
            }
        }
    }
    edges
        .iter()
        .copied()
        .filter(|(a, _)| seen.contains(a))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{validate_group, KeywordDict, Point, VertexAttr};

    fn graph(points: &[(f64, f64)], kws: &[&str], edges: &[Edge]) -> GeoSocialGraph {
        let mut dict = KeywordDict::new();
        let attrs = points
            .iter()
            .zip(kws)
            .map(|(&(x, y), k)| VertexAttr {
                pos: Point::new(x, y),
                keyword: dict.intern(k),
            })
            .collect();
        GeoSocialGraph::from_parts(attrs, edges.to_vec(), dict).0
    }

    fn clique(vs: &[VertexId]) -> Vec<Edge> {
        let mut out = Vec::new();
        for (i, &u) in vs.iter().enumerate() {
            for &v in &vs[i + 1..] {
                out.push((u, v));
            }
        }
        out
    }

    fn candidate(edges: Vec<Edge>) -> Candidate {
        let mut vertices: Vec<VertexId> = edges.iter().flat_map(|&(u, v)| [u, v]).collect();
        vertices.sort_unstable();
        vertices.dedup();
        Candidate { vertices, edges }
    }

    fn query(g: &GeoSocialGraph, kws: &[&str], rho: usize, c: usize) -> Query {
        let phi = kws.iter().map(|k| g.keywords().get(k).unwrap()).collect();
        Query::new(Point::new(0.0, 0.0), phi, rho, c, 2.0).unwrap()
    }

    #[test]
    fn minimal_equidistant_candidate_is_returned_whole() {
        let pts = [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)];
        let edges = clique(&[0, 1, 2, 3]);
        let g = graph(&pts, &["a", "b", "a", "b"], &edges);
        let q = query(&g, &["a", "b"], 2, 4);
        let r = run_reducing(&candidate(edges.clone()), &g, &q).unwrap();
        assert_eq!(r.edges, edges);
        assert_eq!(r.dist, 1.0);
        assert_eq!(r.stats.reduce_vertex_deletions, 1);
        assert!(validate_group(&r, &q, &g));
    }

    #[test]
    fn nearer_of_two_components_wins() {
        let pts = [
            (1.0, 0.0),
            (1.0, 1.0),
            (0.0, 1.0),
            (9.0, 0.0),
            (9.0, 1.0),
            (8.0, 1.0),
        ];
        let mut edges = clique(&[0, 1, 2]);
        edges.extend(clique(&[3, 4, 5]));
        let g = graph(&pts, &["a", "b", "a", "b", "a", "b"], &edges);
        let q = query(&g, &["a", "b"], 1, 3);
        let r = run_reducing(&candidate(edges), &g, &q).unwrap();
        assert_eq!(r.vertices, vec![0, 1, 2]);
        assert!((r.dist - 2f64.sqrt()).abs() < 1e-12);
        assert!(validate_group(&r, &q, &g));
    }

    #[test]
    fn peels_down_to_the_closest_truss() {
        // K5 where the farthest vertex can go: the remaining K4 still holds
        // both keywords twice
        let pts = [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0), (5.0, 0.0)];
        let edges = clique(&[0, 1, 2, 3, 4]);
        let g = graph(&pts, &["a", "b", "a", "b", "a"], &edges);
        let q = query(&g, &["a", "b"], 2, 4);
        let r = run_reducing(&candidate(edges), &g, &q).unwrap();
        assert_eq!(r.vertices, vec![0, 1, 2, 3]);
        assert_eq!(r.dist, 1.0);
    }

    #[test]
    fn rejects_non_truss_candidates() {
        let pts = [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0)];
        let g = graph(&pts, &["a", "b", "a"], &[(0, 1), (1, 2)]);
        let q = query(&g, &["a"], 1, 3);
        let err = run_reducing(&candidate(vec![(0, 1), (1, 2)]), &g, &q).unwrap_err();
        assert!(matches!(err, ReduceError::InvalidCandidate(_)));
        let q = query(&g, &["a"], 3, 2);
        assert!(run_reducing(&candidate(vec![(0, 1), (1, 2)]), &g, &q).is_err());
    }
}
