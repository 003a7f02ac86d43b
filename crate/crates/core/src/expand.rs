//! Radius expansion around the query location until the bounded graph holds
//! a connected c-truss covering the query keywords.
//!
//! Each step ingests the edges between the previous and the new radius into
//! two keyword-aware union-finds: one over the bounded graph (its satisfied
//! sets are the potential subgraphs), one over edges already known to sit in
//! a c-truss. Truss peeling only runs on potential subgraphs touched by the
//! new edges, on their not-yet-admitted edges plus the edges closing
//! triangles with them. Admitted edges are anchored during that peel, so the
//! admitted set grows to exactly the c-truss edges of the potential
//! subgraphs.

use std::collections::{HashMap, HashSet};

use crate::dsu::{find_lower_bound_radius, KeywordDsu, LowerBound};
use crate::error::SpatialError;
use crate::graph::{edge, Edge, GeoSocialGraph, Query, VertexId};
use crate::spatial::{Radius, SortedEdgeArray};
use crate::truss::{extract_ctruss, extract_ctruss_anchored, keyword_counts};

/// Union of the keyword-satisfying truss sets found by expansion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Candidate {
    pub vertices: Vec<VertexId>,
    pub edges: Vec<Edge>,
}

/// What one expansion step saw.
#[derive(Clone, Debug, PartialEq)]
pub struct StepRecord {
    pub radius: Radius,
    /// Edges of the bounded graph after this step.
    pub edges: usize,
    /// Edges fed to truss peeling in this step.
    pub truss_potential_edges: usize,
    /// Admitted truss edges after this step.
    pub admitted: usize,
    pub found: bool,
}

/// Incremental state of the expanding stage for one query.
pub struct ExpandState<'a> {
    g: &'a GeoSocialGraph,
    q: &'a Query,
    adj: HashMap<VertexId, Vec<VertexId>>,
    present: HashSet<Edge>,
    uf: KeywordDsu,
    tuf: KeywordDsu,
    admitted: HashSet<Edge>,
    steps: Vec<StepRecord>,
}

impl<'a> ExpandState<'a> {
    pub fn new(g: &'a GeoSocialGraph, q: &'a Query) -> Self {
        Self {
            g,
            q,
            adj: HashMap::new(),
            present: HashSet::new(),
            uf: KeywordDsu::new(q),
            tuf: KeywordDsu::new(q),
            admitted: HashSet::new(),
            steps: Vec::new(),
        }
    }

    pub fn edge_count(&self) -> usize {
        self.present.len()
    }

    pub fn steps(&self) -> &[StepRecord] {
        &self.steps
    }

    pub fn admitted_edges(&self) -> usize {
        self.admitted.len()
    }

    /// Edges of the current bounded graph that lie in satisfied potential
    /// subgraphs.
    pub fn potential_edges(&self) -> usize {
        self.uf
            .satisfied_roots()
            .into_iter()
            .map(|r| {
                self.uf
                    .members(r)
                    .iter()
                    .map(|v| self.adj.get(v).map_or(0, Vec::len))
                    .sum::<usize>()
                    / 2
            })
            .sum()
    }

    /// Grows the bounded graph to radius `r` and reports a candidate if some
    /// admitted truss set now satisfies the keyword vertex constraint.
    pub fn step(
        &mut self,
        a: &mut SortedEdgeArray,
        r: Radius,
    ) -> Result<Option<Candidate>, SpatialError> {
        let slice: Vec<Edge> = a.edges_up_to(r)?.iter().map(|e| e.edge).collect();
        if slice.is_empty() {
            return Ok(None);
        }
        for &(u, v) in &slice {
            self.present.insert((u, v));
            self.adj.entry(u).or_default().push(v);
            self.adj.entry(v).or_default().push(u);
            self.uf.ensure_vertex(u, self.g.keyword(u));
            self.uf.ensure_vertex(v, self.g.keyword(v));
            self.uf.union(u, v).expect("both endpoints inserted");
        }

        // potential subgraphs that received new edges this step
        let mut dirty: Vec<VertexId> = Vec::new();
        for &(u, _) in &slice {
            let root = self.uf.find(u).expect("inserted");
            if self.uf.is_satisfied(root).expect("inserted") {
                dirty.push(root);
            }
        }
        dirty.sort_unstable();
        dirty.dedup();

        let mut tp: Vec<Edge> = Vec::new();
        for root in dirty {
            tp.extend(self.truss_potential(root));
        }
        tp.sort_unstable();
        tp.dedup();

        let survivors = extract_ctruss_anchored(&tp, self.q.c, |e| self.admitted.contains(&e));
        for &(u, v) in &survivors {
            self.admitted.insert((u, v));
            self.tuf.ensure_vertex(u, self.g.keyword(u));
            self.tuf.ensure_vertex(v, self.g.keyword(v));
            self.tuf.union(u, v).expect("both endpoints inserted");
        }

        let candidate = if self.tuf.has_satisfied() {
            self.candidate()
        } else {
            None
        };
        self.steps.push(StepRecord {
            radius: r,
            edges: self.present.len(),
            truss_potential_edges: tp.len(),
            admitted: self.admitted.len(),
            found: candidate.is_some(),
        });
        Ok(candidate)
    }

    /// Non-admitted edges of the potential subgraph rooted at `root`, plus
    /// every edge closing a triangle with one of them.
    fn truss_potential(&self, root: VertexId) -> Vec<Edge> {
        let mut out = Vec::new();
        for &x in self.uf.members(root) {
            let Some(nx) = self.adj.get(&x) else { continue };
            for &y in nx {
                if y < x || self.admitted.contains(&(x, y)) {
                    continue;
                }
                out.push((x, y));
                let ny = &self.adj[&y];
                let (small, other) = if nx.len() <= ny.len() { (nx, y) } else { (ny, x) };
                for &w in small {
                    if w != x && w != y && self.present.contains(&edge(other, w)) {
                        out.push(edge(x, w));
                        out.push(edge(y, w));
                    }
                }
            }
        }
        out
    }

    fn candidate(&mut self) -> Option<Candidate> {
        let mut edges = Vec::new();
        for root in self.tuf.satisfied_roots() {
            let set_edges = self.admitted_edges_of(root);
            if self.set_is_valid(&set_edges) {
                edges.extend(set_edges);
            } else {
                // re-split the set into its own truss components and keep the
                // qualifying ones
                for t in extract_ctruss(&set_edges, self.q.c) {
                    if self.q.satisfies(&keyword_counts(&t.vertices, self.g, self.q)) {
                        edges.extend(t.edges);
                    }
                }
            }
        }
        if edges.is_empty() {
            return None;
        }
        edges.sort_unstable();
        edges.dedup();
        let mut vertices: Vec<VertexId> = edges.iter().flat_map(|&(u, v)| [u, v]).collect();
        vertices.sort_unstable();
        vertices.dedup();
        Some(Candidate { vertices, edges })
    }

    fn admitted_edges_of(&self, root: VertexId) -> Vec<Edge> {
        let mut out = Vec::new();
        for &x in self.tuf.members(root) {
            for &y in &self.adj[&x] {
                if x < y && self.admitted.contains(&(x, y)) {
                    out.push((x, y));
                }
            }
        }
        out.sort_unstable();
        out
    }

    fn set_is_valid(&self, edges: &[Edge]) -> bool {
        let comps = extract_ctruss(edges, self.q.c);
        comps.len() == 1
            && comps[0].edges.len() == edges.len()
            && self.q.satisfies(&keyword_counts(&comps[0].vertices, self.g, self.q))
    }
}

/// Outcome of the expanding stage.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpandOutcome {
    pub candidate: Option<Candidate>,
    pub lower_bound: Option<LowerBound>,
    pub steps: Vec<StepRecord>,
    pub potential_edges: usize,
    pub admitted_edges: usize,
}

impl ExpandOutcome {
    /// Sum of bounded-graph edge counts over all evaluated radii.
    pub fn edge_sum(&self) -> usize {
        self.steps.iter().map(|s| s.edges).sum()
    }

    /// Edge count of the last evaluated bounded graph.
    pub fn last_edges(&self) -> usize {
        self.steps.last().map_or(0, |s| s.edges)
    }
}

/// Upper bound on `edge_sum / last_edges` for expansion ratio `delta`.
pub fn expansion_bound_factor(delta: f64) -> f64 {
    1.0 + delta / (delta - 1.0)
}

/// Work-model constant for an `|E|^1.5` checker.
pub fn work_model_factor(delta: f64) -> f64 {
    let p = delta.powf(1.5);
    1.0 + p + 1.0 / (p - 1.0)
}

/// Runs the expanding stage over the sorted search space: starts at the
/// lower-bound radius and multiplies the bounded graph's edge count by at
/// least `delta` per step until a candidate appears or the array runs out.
pub fn run_expanding(a: &mut SortedEdgeArray, g: &GeoSocialGraph, q: &Query) -> ExpandOutcome {
    let lower_bound = find_lower_bound_radius(a, g, q);
    let mut state = ExpandState::new(g, q);
    let mut candidate = None;
    if let Some(lb) = &lower_bound {
        let mut r = lb.radius;
        loop {
            candidate = state.step(a, r).expect("radii are non-decreasing");
            if candidate.is_some() || a.is_exhausted() {
                break;
            }
            let target = (q.delta * state.edge_count() as f64).ceil() as usize;
            r = a.radius_for_target_edges(target.max(state.edge_count() + 1));
        }
    }
    ExpandOutcome {
        candidate,
        lower_bound,
        potential_edges: state.potential_edges(),
        admitted_edges: state.admitted_edges(),
        steps: state.steps,
    }
}
