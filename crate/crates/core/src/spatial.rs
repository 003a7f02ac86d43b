//! Edges of the pruned search space ordered by distance to the query
//! location, with monotone radius retrieval.

use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, HashMap};

use crate::error::SpatialError;
use crate::graph::{Edge, GeoSocialGraph, Point, VertexId};
use crate::truss::TrussSubgraph;

/// A search radius, stored squared so comparisons never take a root.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Radius(f64);

impl Radius {
    pub const ZERO: Radius = Radius(0.0);
    pub const INFINITY: Radius = Radius(f64::INFINITY);

    pub fn from_distance(d: f64) -> Self {
        Radius(d * d)
    }

    pub fn from_squared(sq: f64) -> Self {
        Radius(sq)
    }

    pub fn squared(self) -> f64 {
        self.0
    }

    pub fn distance(self) -> f64 {
        self.0.sqrt()
    }
}

impl PartialOrd for Radius {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.0.total_cmp(&other.0))
    }
}

/// One edge with its squared distance, the larger of its endpoints'.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SortedEdge {
    pub edge: Edge,
    pub sq: f64,
}

impl SortedEdge {
    fn key(&self) -> SortKey {
        SortKey(self.sq, self.edge.0, self.edge.1)
    }

    pub fn radius(&self) -> Radius {
        Radius(self.sq)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct SortKey(f64, VertexId, VertexId);

impl Eq for SortKey {}

impl Ord for SortKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .total_cmp(&other.0)
            .then(self.1.cmp(&other.1))
            .then(self.2.cmp(&other.2))
    }
}

impl PartialOrd for SortKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Edges in non-decreasing `(distance, min id, max id)` order plus a forward
/// cursor.
#[derive(Clone, Debug)]
pub struct SortedEdgeArray {
    entries: Vec<SortedEdge>,
    vertex_sq: HashMap<VertexId, f64>,
    cursor: usize,
    last: Option<Radius>,
}

impl SortedEdgeArray {
    /// Sorts each component by vertex distance, places edges behind their
    /// farther endpoint, then merges the components.
    pub fn build(h: &[TrussSubgraph], g: &GeoSocialGraph, lambda: Point) -> Self {
        let mut vertex_sq = HashMap::new();
        let runs: Vec<Vec<SortedEdge>> = h
            .iter()
            .map(|t| sort_component(t, g, lambda, &mut vertex_sq))
            .collect();

        let total = runs.iter().map(Vec::len).sum();
        let mut entries = Vec::with_capacity(total);
        let mut heads: BinaryHeap<Reverse<(SortKey, usize)>> = runs
            .iter()
            .enumerate()
            .filter(|(_, r)| !r.is_empty())
            .map(|(i, r)| Reverse((r[0].key(), i)))
            .collect();
        let mut pos = vec![0usize; runs.len()];
        while let Some(Reverse((_, i))) = heads.pop() {
            entries.push(runs[i][pos[i]]);
            pos[i] += 1;
            if let Some(next) = runs[i].get(pos[i]) {
                heads.push(Reverse((next.key(), i)));
            }
        }
        Self {
            entries,
            vertex_sq,
            cursor: 0,
            last: None,
        }
    }

    /// Builds directly from an edge list (used by baselines and tests).
    pub fn from_edges(edges: &[Edge], g: &GeoSocialGraph, lambda: Point) -> Self {
        let mut vertex_sq = HashMap::new();
        let mut entries: Vec<SortedEdge> = edges
            .iter()
            .map(|&(u, v)| {
                let su = *vertex_sq
                    .entry(u)
                    .or_insert_with(|| lambda.squared_distance(&g.pos(u)));
                let sv = *vertex_sq
                    .entry(v)
                    .or_insert_with(|| lambda.squared_distance(&g.pos(v)));
                SortedEdge {
                    edge: (u.min(v), u.max(v)),
                    sq: su.max(sv),
                }
            })
            .collect();
        entries.sort_unstable_by_key(SortedEdge::key);
        Self {
            entries,
            vertex_sq,
            cursor: 0,
            last: None,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[SortedEdge] {
        &self.entries
    }

    pub fn cursor(&self) -> usize {
        self.cursor
    }

    pub fn is_exhausted(&self) -> bool {
        self.cursor == self.entries.len()
    }

    /// Cached squared distance of a vertex of the search space.
    pub fn vertex_sq(&self, v: VertexId) -> Option<f64> {
        self.vertex_sq.get(&v).copied()
    }

    /// Yields the not-yet-returned edges whose distance is within `r`.
    pub fn edges_up_to(&mut self, r: Radius) -> Result<&[SortedEdge], SpatialError> {
        if let Some(prev) = self.last {
            if r.squared().total_cmp(&prev.squared()) == Ordering::Less {
                return Err(SpatialError::NonMonotoneRadius {
                    previous: prev.distance(),
                    requested: r.distance(),
                });
            }
        }
        self.last = Some(r);
        let start = self.cursor;
        while self.cursor < self.entries.len() && self.entries[self.cursor].sq <= r.squared() {
            self.cursor += 1;
        }
        Ok(&self.entries[start..self.cursor])
    }

    /// Number of edges whose distance is within `r`.
    pub fn count_within(&self, r: Radius) -> usize {
        self.entries.partition_point(|e| e.sq <= r.squared())
    }

    /// Smallest radius holding at least `target` edges; the farthest edge's
    /// radius when `target` exceeds the array.
    pub fn radius_for_target_edges(&self, target: usize) -> Radius {
        let Some(last) = self.entries.last() else {
            return Radius::ZERO;
        };
        if target == 0 {
            return Radius::ZERO;
        }
        match self.entries.get(target - 1) {
            Some(e) => e.radius(),
            None => last.radius(),
        }
    }
}

fn sort_component(
    t: &TrussSubgraph,
    g: &GeoSocialGraph,
    lambda: Point,
    vertex_sq: &mut HashMap<VertexId, f64>,
) -> Vec<SortedEdge> {
    let mut order: Vec<(f64, VertexId)> = t
        .vertices
        .iter()
        .map(|&v| (lambda.squared_distance(&g.pos(v)), v))
        .collect();
    order.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let rank: HashMap<VertexId, usize> = order.iter().enumerate().map(|(i, &(_, v))| (v, i)).collect();
    for &(sq, v) in &order {
        vertex_sq.insert(v, sq);
    }

    let mut buckets: Vec<Vec<Edge>> = vec![Vec::new(); order.len()];
    for &(u, v) in &t.edges {
        let far = rank[&u].max(rank[&v]);
        buckets[far].push((u.min(v), u.max(v)));
    }

    let mut out = Vec::with_capacity(t.edges.len());
    let mut i = 0;
    while i < order.len() {
        // ranks sharing one distance form a tie block sorted by endpoints
        let sq = order[i].0;
        let mut j = i;
        let mut block = Vec::new();
        while j < order.len() && order[j].0 == sq {
            block.append(&mut buckets[j]);
            j += 1;
        }
        block.sort_unstable();
        out.extend(block.into_iter().map(|edge| SortedEdge { edge, sq }));
        i = j;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{KeywordDict, VertexAttr};
    use crate::truss::extract_ctruss;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn line_graph(xs: &[f64], edges: &[Edge]) -> GeoSocialGraph {
        let attrs = xs
            .iter()
            .map(|&x| VertexAttr {
                pos: Point::new(x, 0.0),
                keyword: 0,
            })
            .collect();
        GeoSocialGraph::from_parts(attrs, edges.iter().copied(), KeywordDict::new()).0
    }

    fn comp(edges: &[Edge]) -> TrussSubgraph {
        let mut vertices: Vec<VertexId> = edges.iter().flat_map(|&(u, v)| [u, v]).collect();
        vertices.sort_unstable();
        vertices.dedup();
        TrussSubgraph {
            vertices,
            edges: edges.to_vec(),
            c: 2,
        }
    }

    #[test]
    fn sorts_by_far_endpoint() {
        let g = line_graph(&[1.0, 3.0, 2.0, 5.0], &[(0, 1), (0, 2), (2, 3)]);
        let a = SortedEdgeArray::build(&[comp(&[(0, 1), (0, 2), (2, 3)])], &g, Point::new(0.0, 0.0));
        let got: Vec<Edge> = a.entries().iter().map(|e| e.edge).collect();
        assert_eq!(got, vec![(0, 2), (0, 1), (2, 3)]);
        assert_eq!(a.entries()[1].radius().distance(), 3.0);
    }

    #[test]
    fn merges_components_globally() {
        let g = line_graph(&[1.0, 4.0, 2.0, 3.0], &[(0, 1), (2, 3)]);
        let a = SortedEdgeArray::build(&[comp(&[(0, 1)]), comp(&[(2, 3)])], &g, Point::new(0.0, 0.0));
        let got: Vec<Edge> = a.entries().iter().map(|e| e.edge).collect();
        assert_eq!(got, vec![(2, 3), (0, 1)]);
    }

    #[test]
    fn retrieval_contracts() {
        let g = line_graph(&[1.0, 3.0, 2.0, 5.0], &[(0, 1), (0, 2), (2, 3)]);
        let mut a = SortedEdgeArray::build(&[comp(&[(0, 1), (0, 2), (2, 3)])], &g, Point::new(0.0, 0.0));
        assert!(a.edges_up_to(Radius::ZERO).unwrap().is_empty());
        assert_eq!(a.edges_up_to(Radius::from_distance(3.0)).unwrap().len(), 2);
        assert!(matches!(
            a.edges_up_to(Radius::from_distance(2.0)),
            Err(SpatialError::NonMonotoneRadius { .. })
        ));
        assert_eq!(a.edges_up_to(Radius::INFINITY).unwrap().len(), 1);
        assert!(a.is_exhausted());
        assert_eq!(a.radius_for_target_edges(1).distance(), 2.0);
        assert_eq!(a.radius_for_target_edges(3).distance(), 5.0);
        assert_eq!(a.radius_for_target_edges(99).distance(), 5.0);
    }

    #[test]
    fn equal_distances_take_everything_at_once() {
        let g = line_graph(&[1.0, -1.0, 1.0], &[(0, 1), (1, 2), (0, 2)]);
        let mut a = SortedEdgeArray::from_edges(&[(0, 1), (1, 2), (0, 2)], &g, Point::new(0.0, 0.0));
        let r = a.radius_for_target_edges(1);
        assert_eq!(a.edges_up_to(r).unwrap().len(), 3);
    }

    #[test]
    fn random_build_matches_resort_and_filters() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..30 {
            let n = 40;
            let attrs = (0..n)
                .map(|_| VertexAttr {
                    // coarse grid to force ties
                    pos: Point::new(rng.gen_range(0..8) as f64, rng.gen_range(0..8) as f64),
                    keyword: 0,
                })
                .collect();
            let mut edges = Vec::new();
            for u in 0..n {
                for v in u + 1..n {
                    if rng.gen_bool(0.3) {
                        edges.push((u, v));
                    }
                }
            }
            let (g, _) = GeoSocialGraph::from_parts(attrs, edges.clone(), KeywordDict::new());
            let lambda = Point::new(rng.gen_range(0.0..8.0), rng.gen_range(0.0..8.0));
            let h = extract_ctruss(&edges, 3);
            let all: Vec<Edge> = h.iter().flat_map(|t| t.edges.clone()).collect();
            let a = SortedEdgeArray::build(&h, &g, lambda);
            let b = SortedEdgeArray::from_edges(&all, &g, lambda);
            assert_eq!(a.entries(), b.entries());

            let mut a = a;
            let mut seen = Vec::new();
            let mut d = 0.0;
            let mut prev_max: f64 = -1.0;
            while !a.is_exhausted() {
                d += rng.gen_range(0.0..3.0);
                let batch: Vec<SortedEdge> = a.edges_up_to(Radius::from_distance(d)).unwrap().to_vec();
                if let Some(first) = batch.first() {
                    assert!(first.sq >= prev_max);
                    prev_max = batch.last().unwrap().sq;
                }
                seen.extend(batch.iter().map(|e| e.edge));
                let want: Vec<Edge> = b
                    .entries()
                    .iter()
                    .filter(|e| e.sq <= d * d)
                    .map(|e| e.edge)
                    .collect();
                assert_eq!(seen, want);
            }

            for target in 1..=b.len() {
                let r = b.radius_for_target_edges(target);
                let scan = b.entries().iter().filter(|e| e.sq <= r.squared()).count();
                assert!(scan >= target);
                let smaller = b
                    .entries()
                    .iter()
                    .map(|e| e.sq)
                    .filter(|&s| s < r.squared())
                    .fold(None, |m: Option<f64>, s| Some(m.map_or(s, |m| m.max(s))));
                if let Some(s) = smaller {
                    assert!(b.entries().iter().filter(|e| e.sq <= s).count() < target);
                }
            }
        }
    }
}
