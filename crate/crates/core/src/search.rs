//! The full query pipeline: prune, expand, reduce, validate.

use crate::error::SearchError;
use crate::expand::{expansion_bound_factor, run_expanding, work_model_factor};
use crate::graph::{validate_group, GeoSocialGraph, GroupResult, Query, SearchStats};
use crate::reduce::{run_reducing_with, ReduceConfig};
use crate::spatial::SortedEdgeArray;
use crate::truss::{maximal_rhoc_truss, TrussSubgraph};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SearchConfig {
    pub reduce: ReduceConfig,
}

impl SearchConfig {
    /// A deliberately broken pipeline whose reducer skips support cascades.
    pub fn faulty() -> Self {
        Self {
            reduce: ReduceConfig { skip_cascade: true },
        }
    }
}

/// Answer of one search plus the counters gathered on the way. When a
/// group is found its `stats` equal `stats`.
#[derive(Clone, Debug, PartialEq)]
pub struct SearchOutcome {
    pub group: Option<GroupResult>,
    pub stats: SearchStats,
}

/// Maximal keyword-satisfying c-truss components of `g` for `q`.
pub fn prune(g: &GeoSocialGraph, q: &Query) -> Vec<TrussSubgraph> {
    maximal_rhoc_truss(g, q)
}

pub fn search(
    g: &GeoSocialGraph,
    q: &Query,
    cfg: &SearchConfig,
) -> Result<SearchOutcome, SearchError> {
    let h = prune(g, q);
    search_pruned(g, q, &h, cfg)
}

/// Runs the search on an already pruned graph `h`.
pub fn search_pruned(
    g: &GeoSocialGraph,
    q: &Query,
    h: &[TrussSubgraph],
    cfg: &SearchConfig,
) -> Result<SearchOutcome, SearchError> {
    let mut stats = SearchStats {
        graph_edges: g.m(),
        pruned_vertices: h.iter().map(|t| t.vertices.len()).sum(),
        pruned_edges: h.iter().map(|t| t.edges.len()).sum(),
        truss_components: h.len(),
        expansion_bound_factor: expansion_bound_factor(q.delta),
        work_model_factor: work_model_factor(q.delta),
        ..SearchStats::default()
    };
    let mut a = SortedEdgeArray::build(h, g, q.lambda);
    let out = run_expanding(&mut a, g, q);
    if let Some(lb) = &out.lower_bound {
        stats.lower_bound_radius = Some(lb.radius.distance());
        stats.lower_bound_edges_scanned = lb.edges.len();
    }
    stats.expansion_radii = out.steps.iter().map(|s| s.radius.distance()).collect();
    stats.expansion_edges = out.steps.iter().map(|s| s.edges).collect();
    stats.expansion_edge_sum = out.edge_sum();
    stats.potential_edges = out.potential_edges;
    stats.truss_potential_edges = out.steps.iter().map(|s| s.truss_potential_edges).sum();
    stats.admitted_truss_edges = out.admitted_edges;

    let Some(candidate) = out.candidate else {
        return Ok(SearchOutcome { group: None, stats });
    };
    let mut group = run_reducing_with(&candidate, g, q, cfg.reduce)?;
    let r = &group.stats;
    stats.candidate_vertices = r.candidate_vertices;
    stats.candidate_edges = r.candidate_edges;
    stats.reduce_vertex_deletions = r.reduce_vertex_deletions;
    stats.reduce_edge_deletions = r.reduce_edge_deletions;
    stats.forest_cuts = r.forest_cuts;
    stats.forest_links = r.forest_links;
    stats.forest_max_level = r.forest_max_level;
    group.stats = stats.clone();
    if !validate_group(&group, q, g) {
        return Err(SearchError::InvalidResult);
    }
    Ok(SearchOutcome {
        group: Some(group),
        stats,
    })
}
