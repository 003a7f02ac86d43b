//! Triangle support, fixed-`c` truss extraction and decremental truss
//! maintenance.
//!
//! Every routine works on an edge list over global vertex ids. Internally the
//! list is remapped to a compact local graph with an edge table keyed by
//! `(min, max)` so a support decrement is a hash lookup.

use std::collections::{HashMap, VecDeque};

use crate::error::TrussError;
use crate::graph::{Edge, GeoSocialGraph, Query, VertexId};

const NONE: u32 = u32::MAX;

/// Compact graph over the endpoints of an edge list.
#[derive(Clone, Debug)]
struct LocalGraph {
    verts: Vec<VertexId>,
    local: HashMap<VertexId, u32>,
    ends: Vec<(u32, u32)>,
    adj: Vec<Vec<(u32, u32)>>,
    index: HashMap<(u32, u32), u32>,
}

impl LocalGraph {
    fn new(edges: &[Edge]) -> Self {
        let mut verts: Vec<VertexId> = edges.iter().flat_map(|&(u, v)| [u, v]).collect();
        verts.sort_unstable();
        verts.dedup();
        let local: HashMap<VertexId, u32> = verts
            .iter()
            .enumerate()
            .map(|(i, &v)| (v, i as u32))
            .collect();
        let mut ends = Vec::with_capacity(edges.len());
        let mut index = HashMap::with_capacity(edges.len());
        let mut adj: Vec<Vec<(u32, u32)>> = vec![Vec::new(); verts.len()];
        for &(u, v) in edges {
            debug_assert_ne!(u, v);
            let (a, b) = (local[&u], local[&v]);
            let key = (a.min(b), a.max(b));
            if index.contains_key(&key) {
                continue;
            }
            let id = ends.len() as u32;
            index.insert(key, id);
            ends.push(key);
            adj[a as usize].push((b, id));
            adj[b as usize].push((a, id));
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        Self {
            verts,
            local,
            ends,
            adj,
            index,
        }
    }

    #[inline]
    fn lookup(&self, a: u32, b: u32) -> Option<u32> {
        self.index.get(&(a.min(b), a.max(b))).copied()
    }

    fn global(&self, e: u32) -> Edge {
        let (a, b) = self.ends[e as usize];
        let (u, v) = (self.verts[a as usize], self.verts[b as usize]);
        (u.min(v), u.max(v))
    }

    /// Per-edge triangle counts via degree-ordered enumeration, each triangle
    /// visited once.
    fn supports(&self) -> Vec<u32> {
        let n = self.verts.len();
        let rank = |x: u32| (self.adj[x as usize].len(), x);
        let out: Vec<Vec<(u32, u32)>> = (0..n as u32)
            .map(|x| {
                self.adj[x as usize]
                    .iter()
                    .copied()
                    .filter(|&(y, _)| rank(y) > rank(x))
                    .collect()
            })
            .collect();
        let mut sup = vec![0u32; self.ends.len()];
        let mut mark = vec![NONE; n];
        for x in 0..n {
            for &(y, e) in &out[x] {
                mark[y as usize] = e;
            }
            for &(y, exy) in &out[x] {
                for &(z, eyz) in &out[y as usize] {
                    let exz = mark[z as usize];
                    if exz != NONE {
                        sup[exy as usize] += 1;
                        sup[eyz as usize] += 1;
                        sup[exz as usize] += 1;
                    }
                }
            }
            for &(y, _) in &out[x] {
                mark[y as usize] = NONE;
            }
        }
        sup
    }
}

/// Triangle count of every edge of a subgraph.
#[derive(Clone, Debug)]
pub struct SupportMap {
    g: LocalGraph,
    sup: Vec<u32>,
}

impl SupportMap {
    pub fn get(&self, u: VertexId, v: VertexId) -> Option<u32> {
        let a = *self.g.local.get(&u)?;
        let b = *self.g.local.get(&v)?;
        self.g.lookup(a, b).map(|e| self.sup[e as usize])
    }

    pub fn len(&self) -> usize {
        self.sup.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sup.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Edge, u32)> + '_ {
        (0..self.sup.len()).map(|e| (self.g.global(e as u32), self.sup[e]))
    }
}

/// Support of every edge in `edges` counted inside `edges` only.
pub fn compute_support(edges: &[Edge]) -> SupportMap {
    let g = LocalGraph::new(edges);
    let sup = g.supports();
    SupportMap { g, sup }
}

/// A connected truss component.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrussSubgraph {
    pub vertices: Vec<VertexId>,
    pub edges: Vec<Edge>,
    pub c: usize,
}

/// Mutable truss state supporting edge peeling and vertex deletion with
/// support cascades.
#[derive(Clone, Debug)]
pub struct TrussState {
    g: LocalGraph,
    sup: Vec<u32>,
    alive: Vec<bool>,
    queued: Vec<bool>,
    anchored: Vec<bool>,
    deg: Vec<u32>,
    deleted: Vec<bool>,
    min_sup: u32,
    c: usize,
    alive_edges: usize,
    queue: VecDeque<u32>,
}

impl TrussState {
    /// Loads `edges` and computes supports. Nothing is peeled yet.
    pub fn new(edges: &[Edge], c: usize) -> Self {
        assert!(c >= 2, "trussness must be at least 2");
        let g = LocalGraph::new(edges);
        let sup = g.supports();
        let m = g.ends.len();
        let deg = g.adj.iter().map(|l| l.len() as u32).collect();
        let n = g.verts.len();
        Self {
            g,
            sup,
            alive: vec![true; m],
            queued: vec![false; m],
            anchored: Vec::new(),
            deg,
            deleted: vec![false; n],
            min_sup: (c - 2) as u32,
            c,
            alive_edges: m,
            queue: VecDeque::new(),
        }
    }

    /// Like [`TrussState::new`] but edges matching `is_anchor` are never
    /// peeled; they still contribute to the support of their triangle partners.
    pub fn with_anchors(edges: &[Edge], c: usize, is_anchor: impl Fn(Edge) -> bool) -> Self {
        let mut s = Self::new(edges, c);
        s.anchored = (0..s.g.ends.len())
            .map(|e| is_anchor(s.g.global(e as u32)))
            .collect();
        s
    }

    pub fn c(&self) -> usize {
        self.c
    }

    pub fn edge_count(&self) -> usize {
        self.alive_edges
    }

    pub fn contains_edge(&self, u: VertexId, v: VertexId) -> bool {
        self.edge_id(u, v).is_some_and(|e| self.alive[e as usize])
    }

    pub fn support(&self, u: VertexId, v: VertexId) -> Option<u32> {
        self.edge_id(u, v)
            .filter(|&e| self.alive[e as usize])
            .map(|e| self.sup[e as usize])
    }

    /// Number of live edges at `v` (0 for unknown vertices).
    pub fn degree(&self, v: VertexId) -> usize {
        self.g.local.get(&v).map_or(0, |&a| self.deg[a as usize] as usize)
    }

    fn edge_id(&self, u: VertexId, v: VertexId) -> Option<u32> {
        let a = *self.g.local.get(&u)?;
        let b = *self.g.local.get(&v)?;
        self.g.lookup(a, b)
    }

    fn is_anchor(&self, e: u32) -> bool {
        !self.anchored.is_empty() && self.anchored[e as usize]
    }

    fn enqueue(&mut self, e: u32) {
        if self.alive[e as usize] && !self.queued[e as usize] {
            self.queued[e as usize] = true;
            self.queue.push_back(e);
        }
    }

    fn violates(&self, e: u32) -> bool {
        self.sup[e as usize] < self.min_sup && !self.is_anchor(e)
    }

    /// Removes `e`, decrementing the support of both partner edges of every
    /// live triangle through it.
    fn remove_edge(&mut self, e: u32) {
        let (a, b) = self.g.ends[e as usize];
        let (x, y) = if self.deg[a as usize] <= self.deg[b as usize] {
            (a, b)
        } else {
            (b, a)
        };
        self.alive[e as usize] = false;
        for i in 0..self.g.adj[x as usize].len() {
            let (w, exw) = self.g.adj[x as usize][i];
            if w == y || !self.alive[exw as usize] {
                continue;
            }
            let Some(eyw) = self.g.lookup(y, w) else {
                continue;
            };
            if !self.alive[eyw as usize] {
                continue;
            }
            for f in [exw, eyw] {
                self.sup[f as usize] -= 1;
                if self.violates(f) {
                    self.enqueue(f);
                }
            }
        }
        self.deg[a as usize] -= 1;
        self.deg[b as usize] -= 1;
        self.alive_edges -= 1;
    }

    fn drain(&mut self, on_edge_removed: &mut impl FnMut(Edge)) -> usize {
        let mut removed = 0;
        while let Some(e) = self.queue.pop_front() {
            if !self.alive[e as usize] {
                continue;
            }
            self.remove_edge(e);
            removed += 1;
            on_edge_removed(self.g.global(e));
        }
        removed
    }

    /// Deletes every edge whose support is below `c - 2`, cascading until
    /// the remaining edges form a c-truss. Returns the number of removed edges.
    pub fn peel(&mut self, mut on_edge_removed: impl FnMut(Edge)) -> usize {
        for e in 0..self.g.ends.len() as u32 {
            if self.alive[e as usize] && self.violates(e) {
                self.enqueue(e);
            }
        }
        self.drain(&mut on_edge_removed)
    }

    #[cfg(test)]
    fn peel_shuffled(&mut self, seed: u64) -> usize {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut order: Vec<u32> = (0..self.g.ends.len() as u32).collect();
        order.shuffle(&mut rng);
        let mut removed = 0;
        loop {
            let mut any = false;
            for &e in &order {
                if self.alive[e as usize] && self.violates(e) {
                    self.remove_edge(e);
                    removed += 1;
                    any = true;
                }
            }
            if !any {
                return removed;
            }
        }
    }

    /// Deletes vertex `u`: drops its live edges, then cascades support
    /// violations. `on_edge_removed` sees every removed edge once, in removal
    /// order. Returns the number of removed edges.
    pub fn delete_vertex(
        &mut self,
        u: VertexId,
        on_edge_removed: impl FnMut(Edge),
    ) -> Result<usize, TrussError> {
        self.delete_vertex_with(u, true, on_edge_removed)
    }

    pub(crate) fn delete_vertex_with(
        &mut self,
        u: VertexId,
        cascade: bool,
        mut on_edge_removed: impl FnMut(Edge),
    ) -> Result<usize, TrussError> {
        let a = match self.g.local.get(&u) {
            Some(&a) if !self.deleted[a as usize] => a,
            _ => return Err(TrussError::VertexAbsent(u)),
        };
        self.deleted[a as usize] = true;
        let incident: Vec<u32> = self.g.adj[a as usize]
            .iter()
            .map(|&(_, e)| e)
            .filter(|&e| self.alive[e as usize])
            .collect();
        if !cascade {
            for &e in &incident {
                self.remove_edge(e);
                on_edge_removed(self.g.global(e));
            }
            self.queue.clear();
            self.queued.iter_mut().for_each(|q| *q = false);
            return Ok(incident.len());
        }
        // incident edges go first; the cascade re-queues below-threshold
        // partners behind them
        for &e in &incident {
            self.queued[e as usize] = true;
        }
        let mut q: VecDeque<u32> = incident.into_iter().collect();
        q.extend(self.queue.drain(..));
        self.queue = q;
        Ok(self.drain(&mut on_edge_removed))
    }

    /// Live edges, sorted.
    pub fn edges(&self) -> Vec<Edge> {
        let mut out: Vec<Edge> = (0..self.g.ends.len() as u32)
            .filter(|&e| self.alive[e as usize])
            .map(|e| self.g.global(e))
            .collect();
        out.sort_unstable();
        out
    }

    /// Edges incident to `v` that are still live.
    pub fn incident_edges(&self, v: VertexId) -> Vec<Edge> {
        let Some(&a) = self.g.local.get(&v) else {
            return Vec::new();
        };
        self.g.adj[a as usize]
            .iter()
            .filter(|&&(_, e)| self.alive[e as usize])
            .map(|&(_, e)| self.g.global(e))
            .collect()
    }

    /// Connected components of the live edges, ordered by smallest vertex.
    pub fn components(&self) -> Vec<TrussSubgraph> {
        let n = self.g.verts.len();
        let mut comp = vec![NONE; n];
        let mut out = Vec::new();
        for start in 0..n as u32 {
            if comp[start as usize] != NONE || self.deg[start as usize] == 0 {
                continue;
            }
            let id = out.len() as u32;
            comp[start as usize] = id;
            let mut stack = vec![start];
            let mut vertices = Vec::new();
            let mut edges = Vec::new();
            while let Some(x) = stack.pop() {
                vertices.push(self.g.verts[x as usize]);
                for &(y, e) in &self.g.adj[x as usize] {
                    if !self.alive[e as usize] {
                        continue;
                    }
                    if x < y {
                        edges.push(self.g.global(e));
                    }
                    if comp[y as usize] == NONE {
                        comp[y as usize] = id;
                        stack.push(y);
                    }
                }
            }
            vertices.sort_unstable();
            edges.sort_unstable();
            out.push(TrussSubgraph {
                vertices,
                edges,
                c: self.c,
            });
        }
        // local ids follow global order, so components are already sorted by
        // their smallest vertex
        out
    }
}

/// Maximal c-truss of `edges`, split into connected components.
pub fn extract_ctruss(edges: &[Edge], c: usize) -> Vec<TrussSubgraph> {
    let mut state = TrussState::new(edges, c);
    state.peel(|_| {});
    state.components()
}

/// Peels `edges` while treating anchored edges as permanent. Returns the
/// surviving non-anchored edges, sorted.
pub fn extract_ctruss_anchored(
    edges: &[Edge],
    c: usize,
    is_anchor: impl Fn(Edge) -> bool,
) -> Vec<Edge> {
    let mut state = TrussState::with_anchors(edges, c, is_anchor);
    state.peel(|_| {});
    let mut out: Vec<Edge> = (0..state.g.ends.len() as u32)
        .filter(|&e| state.alive[e as usize] && !state.is_anchor(e))
        .map(|e| state.g.global(e))
        .collect();
    out.sort_unstable();
    out
}

/// Per-keyword member counts of a vertex set over the query keywords.
pub fn keyword_counts(vertices: &[VertexId], g: &GeoSocialGraph, q: &Query) -> Vec<u32> {
    let mut counts = vec![0u32; q.phi().len()];
    for &v in vertices {
        if let Some(i) = q.slot(g.keyword(v)) {
            counts[i] += 1;
        }
    }
    counts
}

/// Connected c-truss components of `g` that satisfy the keyword vertex
/// constraint; the whole search runs inside these.
pub fn maximal_rhoc_truss(g: &GeoSocialGraph, q: &Query) -> Vec<TrussSubgraph> {
    let edges: Vec<Edge> = g.edges().collect();
    extract_ctruss(&edges, q.c)
        .into_iter()
        .filter(|t| q.satisfies(&keyword_counts(&t.vertices, g, q)))
        .collect()
}
