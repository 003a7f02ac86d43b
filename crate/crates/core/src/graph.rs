//! Attributed geo-social graph and the query/result vocabulary.

use std::collections::{HashMap, VecDeque};

use serde::Serialize;

use crate::error::{GraphError, QueryError};

/// Dense vertex index, contiguous in `0..n`.
pub type VertexId = usize;

/// Interned keyword identifier.
pub type KeywordId = u32;

/// Undirected edge stored as `(min, max)`.
pub type Edge = (VertexId, VertexId);

/// Normalises an endpoint pair so the smaller id comes first.
#[inline]
pub fn edge(u: VertexId, v: VertexId) -> Edge {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn squared_distance(&self, other: &Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VertexAttr {
    pub pos: Point,
    pub keyword: KeywordId,
}

/// Bidirectional keyword <-> id dictionary.
#[derive(Clone, Debug, Default)]
pub struct KeywordDict {
    names: Vec<String>,
    ids: HashMap<String, KeywordId>,
}

impl KeywordDict {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn intern(&mut self, name: &str) -> KeywordId {
        if let Some(&id) = self.ids.get(name) {
            return id;
        }
        let id = self.names.len() as KeywordId;
        self.names.push(name.to_owned());
        self.ids.insert(name.to_owned(), id);
        id
    }

    pub fn get(&self, name: &str) -> Option<KeywordId> {
        self.ids.get(name).copied()
    }

    pub fn name(&self, id: KeywordId) -> Option<&str> {
        self.names.get(id as usize).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

/// Counts of input records discarded while building a graph.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct BuildReport {
    pub self_loops: usize,
    pub duplicate_edges: usize,
}

/// Immutable undirected graph whose vertices carry a location and one keyword.
///
/// Neighbour lists are sorted ascending, symmetric, and free of self-loops
/// and parallel edges.
#[derive(Clone, Debug)]
pub struct GeoSocialGraph {
    adj: Vec<Vec<VertexId>>,
    attrs: Vec<VertexAttr>,
    keywords: KeywordDict,
    labels: Option<Vec<String>>,
    m: usize,
}

impl GeoSocialGraph {
    /// Builds a graph from vertex attributes and an edge list over dense ids.
    ///
    /// Self-loops and repeated edges are dropped and counted in the report.
    /// Panics if an endpoint is out of range.
    pub fn from_parts(
        attrs: Vec<VertexAttr>,
        edges: impl IntoIterator<Item = (VertexId, VertexId)>,
        keywords: KeywordDict,
    ) -> (Self, BuildReport) {
        let n = attrs.len();
        let mut report = BuildReport::default();
        let mut adj: Vec<Vec<VertexId>> = vec![Vec::new(); n];
        for (u, v) in edges {
            assert!(u < n && v < n, "edge ({u}, {v}) out of range for {n} vertices");
            if u == v {
                report.self_loops += 1;
                continue;
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        let mut m2 = 0;
        for list in &mut adj {
            let before = list.len();
            list.sort_unstable();
            list.dedup();
            report.duplicate_edges += before - list.len();
            m2 += list.len();
        }
        // each duplicate was counted once per endpoint
        report.duplicate_edges /= 2;
        let g = Self {
            adj,
            attrs,
            keywords,
            labels: None,
            m: m2 / 2,
        };
        debug_assert!(g.check_symmetric());
        (g, report)
    }

    /// Attaches external labels (one per vertex, in dense-id order).
    pub fn with_labels(mut self, labels: Vec<String>) -> Self {
        assert_eq!(labels.len(), self.n());
        self.labels = Some(labels);
        self
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.adj[v]
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.adj[v].len()
    }

    pub fn attr(&self, v: VertexId) -> &VertexAttr {
        &self.attrs[v]
    }

    pub fn pos(&self, v: VertexId) -> Point {
        self.attrs[v].pos
    }

    pub fn keyword(&self, v: VertexId) -> KeywordId {
        self.attrs[v].keyword
    }

    pub fn keywords(&self) -> &KeywordDict {
        &self.keywords
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        let (a, b) = if self.adj[u].len() <= self.adj[v].len() {
            (u, v)
        } else {
            (v, u)
        };
        self.adj[a].binary_search(&b).is_ok()
    }

    /// External label of `v`, or its dense id when the graph has no labels.
    pub fn label(&self, v: VertexId) -> String {
        match &self.labels {
            Some(l) => l[v].clone(),
            None => v.to_string(),
        }
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// All edges as `(u, v)` with `u < v`, in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    /// Smallest axis-aligned box containing every vertex, as (min, max).
    pub fn bounding_box(&self) -> Option<(Point, Point)> {
        let first = self.attrs.first()?.pos;
        let mut lo = first;
        let mut hi = first;
        for a in &self.attrs {
            lo.x = lo.x.min(a.pos.x);
            lo.y = lo.y.min(a.pos.y);
            hi.x = hi.x.max(a.pos.x);
            hi.y = hi.y.max(a.pos.y);
        }
        Some((lo, hi))
    }

    fn check_symmetric(&self) -> bool {
        self.adj.iter().enumerate().all(|(u, list)| {
            list.windows(2).all(|w| w[0] < w[1])
                && list
                    .iter()
                    .all(|&v| v != u && self.adj[v].binary_search(&u).is_ok())
        })
    }
}

/// Euclidean distance from `lambda` to vertex `v`.
pub fn distance(lambda: Point, v: VertexId, g: &GeoSocialGraph) -> f64 {
    lambda.squared_distance(&g.pos(v)).sqrt()
}

/// Largest member distance to `lambda`.
pub fn group_distance(
    lambda: Point,
    s: &[VertexId],
    g: &GeoSocialGraph,
) -> Result<f64, GraphError> {
    s.iter()
        .map(|&v| lambda.squared_distance(&g.pos(v)))
        .max_by(f64::total_cmp)
        .map(f64::sqrt)
        .ok_or(GraphError::EmptyGroup)
}

/// A validated group query.
#[derive(Clone, Debug, PartialEq)]
pub struct Query {
    pub lambda: Point,
    phi: Vec<KeywordId>,
    pub rho: usize,
    pub c: usize,
    pub delta: f64,
}

pub const DEFAULT_DELTA: f64 = 2.0;

impl Query {
    pub fn new(
        lambda: Point,
        mut phi: Vec<KeywordId>,
        rho: usize,
        c: usize,
        delta: f64,
    ) -> Result<Self, QueryError> {
        phi.sort_unstable();
        phi.dedup();
        if phi.is_empty() {
            return Err(QueryError::InvalidParameter {
                name: "keywords",
                value: "<empty>".into(),
            });
        }
        if rho < 1 {
            return Err(QueryError::InvalidParameter {
                name: "rho",
                value: rho.to_string(),
            });
        }
        if c < 2 {
            return Err(QueryError::InvalidParameter {
                name: "c",
                value: c.to_string(),
            });
        }
        if delta.is_nan() || delta <= 1.0 || delta.is_infinite() {
            return Err(QueryError::InvalidParameter {
                name: "delta",
                value: delta.to_string(),
            });
        }
        if !lambda.x.is_finite() || !lambda.y.is_finite() {
            return Err(QueryError::InvalidParameter {
                name: "lambda",
                value: format!("{},{}", lambda.x, lambda.y),
            });
        }
        Ok(Self {
            lambda,
            phi,
            rho,
            c,
            delta,
        })
    }

    /// Query keywords, sorted and distinct.
    pub fn phi(&self) -> &[KeywordId] {
        &self.phi
    }

    /// Position of `kw` within `phi`, if it is a query keyword.
    #[inline]
    pub fn slot(&self, kw: KeywordId) -> Option<usize> {
        // phi is tiny; a linear probe beats binary search here
        self.phi.iter().position(|&k| k == kw)
    }

    /// Minimum support an edge needs to stay in a c-truss.
    #[inline]
    pub fn min_support(&self) -> u32 {
        (self.c - 2) as u32
    }

    #[inline]
    pub fn satisfies(&self, counts: &[u32]) -> bool {
        counts.iter().all(|&k| k as usize >= self.rho)
    }

    pub fn sq_dist(&self, g: &GeoSocialGraph, v: VertexId) -> f64 {
        self.lambda.squared_distance(&g.pos(v))
    }
}

/// Instrumentation gathered along one search.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SearchStats {
    pub graph_edges: usize,
    pub pruned_vertices: usize,
    pub pruned_edges: usize,
    pub truss_components: usize,
    pub lower_bound_radius: Option<f64>,
    pub lower_bound_edges_scanned: usize,
    pub expansion_radii: Vec<f64>,
    pub expansion_edges: Vec<usize>,
    pub expansion_edge_sum: usize,
    pub expansion_bound_factor: f64,
    pub work_model_factor: f64,
    pub potential_edges: usize,
    pub truss_potential_edges: usize,
    pub admitted_truss_edges: usize,
    pub candidate_vertices: usize,
    pub candidate_edges: usize,
    pub reduce_vertex_deletions: usize,
    pub reduce_edge_deletions: usize,
    pub forest_cuts: usize,
    pub forest_links: usize,
    pub forest_max_level: usize,
}

/// A group returned by a search.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupResult {
    /// Sorted ascending.
    pub vertices: Vec<VertexId>,
    /// Sorted ascending, each `(u, v)` with `u < v`.
    pub edges: Vec<Edge>,
    pub dist: f64,
    pub stats: SearchStats,
}

impl GroupResult {
    /// Builds a result from an edge set; vertices are the edge endpoints.
    pub fn from_edges(mut edges: Vec<Edge>, q: &Query, g: &GeoSocialGraph) -> Self {
        edges.sort_unstable();
        edges.dedup();
        let mut vertices: Vec<VertexId> = edges.iter().flat_map(|&(u, v)| [u, v]).collect();
        vertices.sort_unstable();
        vertices.dedup();
        let dist = group_distance(q.lambda, &vertices, g).unwrap_or(0.0);
        Self {
            vertices,
            edges,
            dist,
            stats: SearchStats::default(),
        }
    }
}

/// Re-checks every constraint on a returned group against the base graph:
/// edges exist in `g`, vertex set equals the edge endpoints, the edge set is
/// connected, each edge lies in at least `c - 2` triangles of the edge set,
/// and every query keyword has at least `rho` members.
pub fn validate_group(s: &GroupResult, q: &Query, g: &GeoSocialGraph) -> bool {
    if s.edges.is_empty() || s.vertices.iter().any(|&v| v >= g.n()) {
        return false;
    }
    let mut local: HashMap<VertexId, usize> = HashMap::with_capacity(s.vertices.len());
    for (i, &v) in s.vertices.iter().enumerate() {
        if local.insert(v, i).is_some() {
            return false;
        }
    }
    let k = s.vertices.len();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); k];
    for &(u, v) in &s.edges {
        if u == v || !g.has_edge(u, v) {
            return false;
        }
        let (Some(&a), Some(&b)) = (local.get(&u), local.get(&v)) else {
            return false;
        };
        adj[a].push(b);
        adj[b].push(a);
    }
    for list in &mut adj {
        let before = list.len();
        list.sort_unstable();
        list.dedup();
        if list.len() != before || list.is_empty() {
            return false;
        }
    }

    let mut seen = vec![false; k];
    let mut queue = VecDeque::from([0usize]);
    seen[0] = true;
    let mut reached = 1;
    while let Some(x) = queue.pop_front() {
        for &y in &adj[x] {
            if !seen[y] {
                seen[y] = true;
                reached += 1;
                queue.push_back(y);
            }
        }
    }
    if reached != k {
        return false;
    }

    let need = q.min_support() as usize;
    for (a, list) in adj.iter().enumerate() {
        for &b in list.iter().filter(|&&b| b > a) {
            let common = sorted_intersection_len(list, &adj[b]);
            if common < need {
                return false;
            }
        }
    }

    let mut counts = vec![0u32; q.phi().len()];
    for &v in &s.vertices {
        if let Some(i) = q.slot(g.keyword(v)) {
            counts[i] += 1;
        }
    }
    if !q.satisfies(&counts) {
        return false;
    }

    match group_distance(q.lambda, &s.vertices, g) {
        Ok(d) => d == s.dist,
        Err(_) => false,
    }
}

pub(crate) fn sorted_intersection_len(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}
