//! Union-find over vertices where every set carries per-keyword member
//! counts, so keyword coverage of a component is known after each union.

use std::collections::{BTreeSet, HashMap};

use crate::error::DsuError;
use crate::graph::{Edge, GeoSocialGraph, KeywordId, Query, VertexId};
use crate::spatial::{Radius, SortedEdgeArray};

/// Result of merging the sets of two vertices.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UnionOutcome {
    /// Both vertices were already in one set.
    Same,
    Merged {
        root: VertexId,
        satisfied: bool,
        newly_satisfied: bool,
    },
}

/// Keyword-aware disjoint sets with union by rank and path compression.
///
/// Vertices are added lazily; storage grows with the number of inserted
/// vertices, not with the size of the whole graph.
#[derive(Clone, Debug)]
pub struct KeywordDsu {
    phi: Vec<KeywordId>,
    rho: u32,
    slot: HashMap<VertexId, u32>,
    verts: Vec<VertexId>,
    parent: Vec<u32>,
    rank: Vec<u8>,
    counts: Vec<u32>,
    members: Vec<Vec<VertexId>>,
    satisfied: BTreeSet<u32>,
    unions: usize,
}

impl KeywordDsu {
    pub fn new(q: &Query) -> Self {
        Self {
            phi: q.phi().to_vec(),
            rho: q.rho as u32,
            slot: HashMap::new(),
            verts: Vec::new(),
            parent: Vec::new(),
            rank: Vec::new(),
            counts: Vec::new(),
            members: Vec::new(),
            satisfied: BTreeSet::new(),
            unions: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.verts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.verts.is_empty()
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.slot.contains_key(&v)
    }

    /// Successful merges so far.
    pub fn unions(&self) -> usize {
        self.unions
    }

    fn k(&self) -> usize {
        self.phi.len()
    }

    fn counts_at(&self, s: u32) -> &[u32] {
        let k = self.k();
        &self.counts[s as usize * k..(s as usize + 1) * k]
    }

    fn is_sat(&self, s: u32) -> bool {
        self.counts_at(s).iter().all(|&c| c >= self.rho)
    }

    /// Adds `v` as a singleton set.
    pub fn insert_vertex(&mut self, v: VertexId, kw: KeywordId) -> Result<(), DsuError> {
        if self.slot.contains_key(&v) {
            return Err(DsuError::DoubleInsert(v));
        }
        let s = self.verts.len() as u32;
        self.slot.insert(v, s);
        self.verts.push(v);
        self.parent.push(s);
        self.rank.push(0);
        let k = self.k();
        self.counts.extend(std::iter::repeat_n(0, k));
        if let Some(i) = self.phi.iter().position(|&p| p == kw) {
            self.counts[s as usize * k + i] = 1;
        }
        self.members.push(vec![v]);
        if self.is_sat(s) {
            self.satisfied.insert(s);
        }
        Ok(())
    }

    /// Inserts `v` unless it is already present.
    pub fn ensure_vertex(&mut self, v: VertexId, kw: KeywordId) {
        if !self.contains(v) {
            let _ = self.insert_vertex(v, kw);
        }
    }

    fn find_slot(&mut self, s: u32) -> u32 {
        let mut root = s;
        while self.parent[root as usize] != root {
            root = self.parent[root as usize];
        }
        let mut x = s;
        while self.parent[x as usize] != root {
            let next = self.parent[x as usize];
            self.parent[x as usize] = root;
            x = next;
        }
        root
    }

    /// Representative vertex of `v`'s set.
    pub fn find(&mut self, v: VertexId) -> Result<VertexId, DsuError> {
        let s = *self.slot.get(&v).ok_or(DsuError::NotInserted(v))?;
        let r = self.find_slot(s);
        Ok(self.verts[r as usize])
    }

    /// Merges the sets of `u` and `v`, adding their keyword counts.
    pub fn union(&mut self, u: VertexId, v: VertexId) -> Result<UnionOutcome, DsuError> {
        let su = *self.slot.get(&u).ok_or(DsuError::NotInserted(u))?;
        let sv = *self.slot.get(&v).ok_or(DsuError::NotInserted(v))?;
        let (mut a, mut b) = (self.find_slot(su), self.find_slot(sv));
        if a == b {
            return Ok(UnionOutcome::Same);
        }
        if self.rank[a as usize] < self.rank[b as usize] {
            std::mem::swap(&mut a, &mut b);
        }
        // `a` becomes the root
        let was_sat = self.satisfied.remove(&a) | self.satisfied.remove(&b);
        self.parent[b as usize] = a;
        if self.rank[a as usize] == self.rank[b as usize] {
            self.rank[a as usize] += 1;
        }
        let k = self.k();
        for i in 0..k {
            self.counts[a as usize * k + i] += self.counts[b as usize * k + i];
        }
        let mut small = std::mem::take(&mut self.members[b as usize]);
        let big = &mut self.members[a as usize];
        if small.len() > big.len() {
            std::mem::swap(&mut small, big);
        }
        big.extend(small);
        self.unions += 1;

        let satisfied = self.is_sat(a);
        if satisfied {
            self.satisfied.insert(a);
        }
        Ok(UnionOutcome::Merged {
            root: self.verts[a as usize],
            satisfied,
            newly_satisfied: satisfied && !was_sat,
        })
    }

    /// Merges the endpoint sets; returns the root when the merged set has
    /// just become satisfied.
    pub fn union_edge(&mut self, u: VertexId, v: VertexId) -> Result<Option<VertexId>, DsuError> {
        Ok(match self.union(u, v)? {
            UnionOutcome::Merged {
                root,
                newly_satisfied: true,
                ..
            } => Some(root),
            _ => None,
        })
    }

    /// Keyword counts of the set containing `v`, aligned with the query's
    /// keyword order.
    pub fn counts(&mut self, v: VertexId) -> Result<Vec<u32>, DsuError> {
        let s = *self.slot.get(&v).ok_or(DsuError::NotInserted(v))?;
        let r = self.find_slot(s);
        Ok(self.counts_at(r).to_vec())
    }

    pub fn is_satisfied(&mut self, v: VertexId) -> Result<bool, DsuError> {
        let s = *self.slot.get(&v).ok_or(DsuError::NotInserted(v))?;
        let r = self.find_slot(s);
        Ok(self.satisfied.contains(&r))
    }

    pub fn has_satisfied(&self) -> bool {
        !self.satisfied.is_empty()
    }

    /// Root vertices of the satisfied sets.
    pub fn satisfied_roots(&self) -> Vec<VertexId> {
        self.satisfied.iter().map(|&s| self.verts[s as usize]).collect()
    }

    /// Members of the set whose root is `root`.
    pub fn members(&self, root: VertexId) -> &[VertexId] {
        match self.slot.get(&root) {
            Some(&s) => &self.members[s as usize],
            None => &[],
        }
    }

    /// Every satisfied set with its members sorted, ordered by root slot.
    pub fn satisfied_sets(&self) -> Vec<(VertexId, Vec<VertexId>)> {
        self.satisfied
            .iter()
            .map(|&s| {
                let mut m = self.members[s as usize].clone();
                m.sort_unstable();
                (self.verts[s as usize], m)
            })
            .collect()
    }
}

/// Result of the lower-bound scan.
#[derive(Clone, Debug, PartialEq)]
pub struct LowerBound {
    pub radius: Radius,
    /// Members of the first set to satisfy the keyword vertex constraint.
    pub vertices: Vec<VertexId>,
    /// Edges consumed up to and including the satisfying one.
    pub edges: Vec<Edge>,
}

/// Scans edges nearest-first, unioning endpoints, until a set covers every
/// query keyword `rho` times. Its edge's distance bounds the optimum from
/// below since connectivity plus keyword coverage relaxes the truss
/// requirement. `None` when the scan exhausts without a satisfied set.
pub fn find_lower_bound_radius(
    a: &SortedEdgeArray,
    g: &GeoSocialGraph,
    q: &Query,
) -> Option<LowerBound> {
    let mut dsu = KeywordDsu::new(q);
    let mut consumed = Vec::new();
    for e in a.entries() {
        let (u, v) = e.edge;
        consumed.push(e.edge);
        dsu.ensure_vertex(u, g.keyword(u));
        dsu.ensure_vertex(v, g.keyword(v));
        if let Ok(UnionOutcome::Merged {
            root,
            satisfied: true,
            ..
        }) = dsu.union(u, v)
        {
            let mut vertices = dsu.members(root).to_vec();
            vertices.sort_unstable();
            return Some(LowerBound {
                radius: e.radius(),
                vertices,
                edges: consumed,
            });
        }
    }
    None
}
