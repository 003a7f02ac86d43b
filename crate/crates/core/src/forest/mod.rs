//! Keyword-aware decremental spanning forest.
//!
//! Edges carry levels. `F_{>=i}` is a spanning forest of the edges with level
//! at least `i`, stored as an Euler-tour forest. Deleting a tree edge pushes
//! the smaller side's level-`i` edges up one level while looking for a
//! replacement, so each edge is promoted at most `log2 n` times. Every level-0
//! tree also carries keyword counts over the query keywords; a tree that
//! drops below `rho` for some keyword, or shrinks to one vertex, is pruned.

mod ett;

use std::collections::{HashMap, VecDeque};

use crate::error::ForestError;
use crate::graph::{Edge, GeoSocialGraph, Query, VertexId};

use ett::{EulerTourForest, NONTREE, TREE_AT_LEVEL};

const SEED: u64 = 0x5eed_f0e5;

#[derive(Clone, Debug)]
struct EdgeRec {
    u: u32,
    v: u32,
    level: usize,
    tree: bool,
    alive: bool,
    // positions in the non-tree lists of u and v at `level`
    pos_u: u32,
    pos_v: u32,
}

/// Operation counters of a forest.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ForestStats {
    /// Euler-tour cuts over all levels.
    pub cuts: usize,
    /// Euler-tour links over all levels, including the initial build.
    pub links: usize,
    /// Highest level any edge reached.
    pub max_level: usize,
}

/// A connected component as seen by the forest.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ForestComponent {
    pub vertices: Vec<VertexId>,
    pub counts: Vec<u32>,
    pub pruned: bool,
}

#[derive(Clone, Debug)]
pub struct KeywordSpanningForest {
    verts: Vec<VertexId>,
    local: HashMap<VertexId, u32>,
    slot: Vec<Option<usize>>,
    rho: u32,
    k: usize,
    levels: Vec<EulerTourForest>,
    nontree: Vec<Vec<Vec<u32>>>,
    edges: Vec<EdgeRec>,
    index: HashMap<(u32, u32), u32>,
    comp: Vec<usize>,
    counts: Vec<Vec<u32>>,
    pruned: Vec<bool>,
    live: usize,
    newly_pruned: Vec<VertexId>,
    stats: ForestStats,
}

impl KeywordSpanningForest {
    /// Builds a BFS spanning forest over `edges`. `slot` maps a vertex to the
    /// index of its keyword among the `k` tracked keywords.
    pub fn new(
        vertices: &[VertexId],
        edges: &[Edge],
        slot: impl Fn(VertexId) -> Option<usize>,
        k: usize,
        rho: u32,
    ) -> Self {
        let mut f = Self::empty(vertices, edges, slot, k, rho);
        let n = f.verts.len();
        let mut adj: Vec<Vec<u32>> = vec![Vec::new(); n];
        for e in &f.edges {
            adj[e.u as usize].push(e.v);
            adj[e.v as usize].push(e.u);
        }
        let mut seen = vec![false; n];
        let mut tree = Vec::new();
        for s in 0..n {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut queue = VecDeque::from([s as u32]);
            while let Some(x) = queue.pop_front() {
                for &y in &adj[x as usize] {
                    if !seen[y as usize] {
                        seen[y as usize] = true;
                        tree.push((x, y));
                        queue.push_back(y);
                    }
                }
            }
        }
        f.install(&tree);
        f
    }

    /// Builds the forest for a query over a subgraph of `g`.
    pub fn for_query(vertices: &[VertexId], edges: &[Edge], g: &GeoSocialGraph, q: &Query) -> Self {
        Self::new(
            vertices,
            edges,
            |v| q.slot(g.keyword(v)),
            q.phi().len(),
            q.rho as u32,
        )
    }

    /// Builds the forest with a caller-chosen spanning forest. `tree_edges`
    /// must be acyclic and span every component of `tree_edges ∪ other_edges`.
    pub fn from_spanning_forest(
        vertices: &[VertexId],
        tree_edges: &[Edge],
        other_edges: &[Edge],
        slot: impl Fn(VertexId) -> Option<usize>,
        k: usize,
        rho: u32,
    ) -> Self {
        let all: Vec<Edge> = tree_edges.iter().chain(other_edges).copied().collect();
        let mut f = Self::empty(vertices, &all, slot, k, rho);
        let tree: Vec<(u32, u32)> = tree_edges
            .iter()
            .map(|&(u, v)| (f.local[&u], f.local[&v]))
            .collect();
        f.install(&tree);
        f
    }

    fn empty(
        vertices: &[VertexId],
        edges: &[Edge],
        slot: impl Fn(VertexId) -> Option<usize>,
        k: usize,
        rho: u32,
    ) -> Self {
        let mut verts: Vec<VertexId> = vertices
            .iter()
            .copied()
            .chain(edges.iter().flat_map(|&(u, v)| [u, v]))
            .collect();
        verts.sort_unstable();
        verts.dedup();
        let local: HashMap<VertexId, u32> =
            verts.iter().enumerate().map(|(i, &v)| (v, i as u32)).collect();
        let mut recs = Vec::with_capacity(edges.len());
        let mut index = HashMap::with_capacity(edges.len());
        for &(a, b) in edges {
            let (u, v) = (local[&a], local[&b]);
            let key = (u.min(v), u.max(v));
            if u == v || index.contains_key(&key) {
                continue;
            }
            index.insert(key, recs.len() as u32);
            recs.push(EdgeRec {
                u: key.0,
                v: key.1,
                level: 0,
                tree: false,
                alive: true,
                pos_u: 0,
                pos_v: 0,
            });
        }
        let n = verts.len();
        Self {
            slot: verts.iter().map(|&v| slot(v).filter(|&s| s < k)).collect(),
            verts,
            local,
            rho,
            k,
            levels: vec![EulerTourForest::new(n, SEED)],
            nontree: vec![vec![Vec::new(); n]],
            edges: recs,
            index,
            comp: vec![usize::MAX; n],
            counts: Vec::new(),
            pruned: Vec::new(),
            live: 0,
            newly_pruned: Vec::new(),
            stats: ForestStats::default(),
        }
    }

    fn install(&mut self, tree: &[(u32, u32)]) {
        for &(a, b) in tree {
            let e = self.index[&(a.min(b), a.max(b))];
            self.edges[e as usize].tree = true;
            self.levels[0].link(a, b, TREE_AT_LEVEL);
            self.stats.links += 1;
        }
        for e in 0..self.edges.len() as u32 {
            if !self.edges[e as usize].tree {
                self.push_nontree(e);
            }
        }
        for x in 0..self.verts.len() as u32 {
            if self.comp[x as usize] != usize::MAX {
                continue;
            }
            let id = self.counts.len();
            let members = self.levels[0].tree_vertices(x);
            let mut counts = vec![0u32; self.k];
            for &y in &members {
                self.comp[y as usize] = id;
                if let Some(s) = self.slot[y as usize] {
                    counts[s] += 1;
                }
            }
            let pruned = !self.qualifies(&counts, members.len());
            self.counts.push(counts);
            self.pruned.push(pruned);
            if !pruned {
                self.live += 1;
            }
        }
    }

    fn qualifies(&self, counts: &[u32], size: usize) -> bool {
        size >= 2 && counts.iter().all(|&c| c >= self.rho)
    }

    fn ensure_level(&mut self, i: usize) {
        while self.levels.len() <= i {
            let n = self.verts.len();
            let seed = SEED + self.levels.len() as u64;
            self.levels.push(EulerTourForest::new(n, seed));
            self.nontree.push(vec![Vec::new(); n]);
        }
        self.stats.max_level = self.stats.max_level.max(i);
    }

    fn push_nontree(&mut self, e: u32) {
        let rec = &self.edges[e as usize];
        let (u, v, l) = (rec.u, rec.v, rec.level);
        self.ensure_level(l);
        let lists = &mut self.nontree[l];
        lists[u as usize].push(e);
        lists[v as usize].push(e);
        let (pu, pv) = (
            lists[u as usize].len() as u32 - 1,
            lists[v as usize].len() as u32 - 1,
        );
        let rec = &mut self.edges[e as usize];
        rec.pos_u = pu;
        rec.pos_v = pv;
        for x in [u, v] {
            if self.nontree[l][x as usize].len() == 1 {
                self.levels[l].set_vertex_flag(x, NONTREE, true);
            }
        }
    }

    fn pop_nontree(&mut self, e: u32) {
        let rec = self.edges[e as usize].clone();
        let l = rec.level;
        for (x, pos) in [(rec.u, rec.pos_u), (rec.v, rec.pos_v)] {
            let list = &mut self.nontree[l][x as usize];
            list.swap_remove(pos as usize);
            if let Some(&moved) = list.get(pos as usize) {
                let m = &mut self.edges[moved as usize];
                if m.u == x {
                    m.pos_u = pos;
                } else {
                    m.pos_v = pos;
                }
            }
            if list.is_empty() {
                self.levels[l].set_vertex_flag(x, NONTREE, false);
            }
        }
    }

    fn edge_id(&self, u: VertexId, v: VertexId) -> Option<u32> {
        let a = *self.local.get(&u)?;
        let b = *self.local.get(&v)?;
        self.index
            .get(&(a.min(b), a.max(b)))
            .copied()
            .filter(|&e| self.edges[e as usize].alive)
    }

    pub fn contains_edge(&self, u: VertexId, v: VertexId) -> bool {
        self.edge_id(u, v).is_some()
    }

    pub fn is_tree_edge(&self, u: VertexId, v: VertexId) -> bool {
        self.edge_id(u, v).is_some_and(|e| self.edges[e as usize].tree)
    }

    pub fn edge_level(&self, u: VertexId, v: VertexId) -> Option<usize> {
        self.edge_id(u, v).map(|e| self.edges[e as usize].level)
    }

    /// True while some component still satisfies the keyword constraint.
    pub fn has_satisfying(&self) -> bool {
        self.live > 0
    }

    pub fn satisfying_components(&self) -> usize {
        self.live
    }

    pub fn stats(&self) -> ForestStats {
        self.stats
    }

    pub fn vertex_count(&self) -> usize {
        self.verts.len()
    }

    fn comp_of(&self, v: VertexId) -> Option<usize> {
        self.local.get(&v).map(|&x| self.comp[x as usize])
    }

    /// Identifier of `v`'s component. Identifiers are stable until the
    /// component splits; the larger side keeps the old one.
    pub fn component_of(&self, v: VertexId) -> Option<usize> {
        self.comp_of(v)
    }

    pub fn is_pruned(&self, v: VertexId) -> bool {
        self.comp_of(v).is_none_or(|c| self.pruned[c])
    }

    pub fn component_counts(&self, v: VertexId) -> Option<&[u32]> {
        self.comp_of(v).map(|c| self.counts[c].as_slice())
    }

    /// Vertices whose component was pruned since the last call.
    pub fn take_pruned(&mut self) -> Vec<VertexId> {
        std::mem::take(&mut self.newly_pruned)
    }

    /// All components, each with sorted vertices, ordered by smallest vertex.
    pub fn components(&self) -> Vec<ForestComponent> {
        let mut by_id: HashMap<usize, Vec<VertexId>> = HashMap::new();
        for (x, &c) in self.comp.iter().enumerate() {
            by_id.entry(c).or_default().push(self.verts[x]);
        }
        let mut out: Vec<ForestComponent> = by_id
            .into_iter()
            .map(|(c, vertices)| ForestComponent {
                vertices,
                counts: self.counts[c].clone(),
                pruned: self.pruned[c],
            })
            .collect();
        out.sort_by_key(|c| c.vertices[0]);
        out
    }

    /// Deletes edge `(u, v)` and reports whether any satisfying component
    /// remains.
    pub fn delete_edge(&mut self, u: VertexId, v: VertexId) -> Result<bool, ForestError> {
        let e = self.edge_id(u, v).ok_or(ForestError::EdgeAbsent(u, v))?;
        let rec = self.edges[e as usize].clone();
        if !rec.tree {
            self.pop_nontree(e);
            self.edges[e as usize].alive = false;
            return Ok(self.has_satisfying());
        }
        self.edges[e as usize].alive = false;
        let (a, b, l) = (rec.u, rec.v, rec.level);
        for i in 0..=l {
            self.levels[i].cut(a, b);
            self.stats.cuts += 1;
        }
        for i in (0..=l).rev() {
            if self.replace_at(i, a, b) {
                return Ok(self.has_satisfying());
            }
        }
        self.split(a, b);
        Ok(self.has_satisfying())
    }

    /// Looks for a level-`i` replacement joining the trees of `a` and `b` in
    /// `F_{>=i}`. Relinks and returns true if one exists.
    fn replace_at(&mut self, i: usize, a: u32, b: u32) -> bool {
        let small = if self.levels[i].tree_size(a) <= self.levels[i].tree_size(b) {
            a
        } else {
            b
        };
        // the smaller side moves up a level
        while let Some((x, y)) = self.levels[i].find_flagged(small, TREE_AT_LEVEL) {
            self.levels[i].clear_arc_flag(x, y, TREE_AT_LEVEL);
            let e = self.index[&(x.min(y), x.max(y))];
            self.edges[e as usize].level = i + 1;
            self.ensure_level(i + 1);
            self.levels[i + 1].link(x, y, TREE_AT_LEVEL);
            self.stats.links += 1;
        }
        while let Some((x, _)) = self.levels[i].find_flagged(small, NONTREE) {
            while let Some(&e) = self.nontree[i][x as usize].last() {
                self.pop_nontree(e);
                let rec = &self.edges[e as usize];
                let y = if rec.u == x { rec.v } else { rec.u };
                if self.levels[i].connected(x, y) {
                    self.edges[e as usize].level = i + 1;
                    self.push_nontree(e);
                    continue;
                }
                let rec = &mut self.edges[e as usize];
                rec.tree = true;
                for j in 0..=i {
                    let flags = if j == i { TREE_AT_LEVEL } else { 0 };
                    self.levels[j].link(x, y, flags);
                    self.stats.links += 1;
                }
                return true;
            }
        }
        false
    }

    /// Records a genuine split of a level-0 tree into the trees of `a` and `b`.
    fn split(&mut self, a: u32, b: u32) {
        let f0 = &self.levels[0];
        let (small, big) = if f0.tree_size(a) <= f0.tree_size(b) {
            (a, b)
        } else {
            (b, a)
        };
        let old = self.comp[big as usize];
        let id = self.counts.len();
        let members = self.levels[0].tree_vertices(small);
        let mut counts = vec![0u32; self.k];
        for &x in &members {
            self.comp[x as usize] = id;
            if let Some(s) = self.slot[x as usize] {
                counts[s] += 1;
            }
        }
        for (o, c) in self.counts[old].iter_mut().zip(&counts) {
            *o -= c;
        }
        let was_pruned = self.pruned[old];
        let big_size = self.levels[0].tree_size(big) as usize;
        let small_ok = !was_pruned && self.qualifies(&counts, members.len());
        let big_ok = !was_pruned && self.qualifies(&self.counts[old], big_size);
        self.counts.push(counts);
        self.pruned.push(!small_ok);
        self.pruned[old] = !big_ok;
        if !was_pruned {
            self.live -= 1;
            if small_ok {
                self.live += 1;
            } else {
                self.newly_pruned
                    .extend(members.iter().map(|&x| self.verts[x as usize]));
            }
            if big_ok {
                self.live += 1;
            } else {
                let rest = self.levels[0].tree_vertices(big);
                self.newly_pruned
                    .extend(rest.iter().map(|&x| self.verts[x as usize]));
            }
        }
    }

    /// Checks the nesting, spanning and size invariants of every level
    /// against the live edges.
    pub fn check_structure(&self) -> Result<(), String> {
        let n = self.verts.len();
        for (i, f) in self.levels.iter().enumerate() {
            // union-find over live edges of level >= i
            let mut p: Vec<u32> = (0..n as u32).collect();
            fn find(p: &mut [u32], mut x: u32) -> u32 {
                while p[x as usize] != x {
                    p[x as usize] = p[p[x as usize] as usize];
                    x = p[x as usize];
                }
                x
            }
            for rec in self.edges.iter().filter(|r| r.alive && r.level >= i) {
                let (ra, rb) = (find(&mut p, rec.u), find(&mut p, rec.v));
                p[ra as usize] = rb;
                if rec.tree != f.has_arc(rec.u, rec.v) {
                    return Err(format!("level {i}: tree flag mismatch on edge ({}, {})", rec.u, rec.v));
                }
            }
            let mut rep: HashMap<u32, (u32, usize)> = HashMap::new();
            for x in 0..n as u32 {
                let r = find(&mut p, x);
                rep.entry(r).or_insert((x, 0)).1 += 1;
            }
            for x in 0..n as u32 {
                let size = f.tree_size(x) as usize;
                if size > (n >> i).max(1) {
                    return Err(format!("level {i}: tree of {x} has {size} vertices"));
                }
                let (r, class) = rep[&find(&mut p, x)];
                if !f.connected(x, r) || size != class {
                    return Err(format!("level {i}: tree of {x} does not match its component"));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn slot_mod(k: usize) -> impl Fn(VertexId) -> Option<usize> {
        move |v| Some(v % k)
    }

    fn k4() -> Vec<Edge> {
        vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
    }

    #[test]
    fn build_on_k4() {
        let f = KeywordSpanningForest::new(&[0, 1, 2, 3], &k4(), slot_mod(2), 2, 2);
        let tree = k4().iter().filter(|&&(u, v)| f.is_tree_edge(u, v)).count();
        assert_eq!(tree, 3);
        assert!(k4().iter().all(|&(u, v)| f.edge_level(u, v) == Some(0)));
        let comps = f.components();
        assert_eq!(comps.len(), 1);
        assert_eq!(comps[0].counts, vec![2, 2]);
        assert!(f.has_satisfying());
    }

    #[test]
    fn build_two_components() {
        let mut edges = k4();
        edges.extend([(4, 5), (4, 6), (5, 6)]);
        let f = KeywordSpanningForest::new(&[0, 1, 2, 3, 4, 5, 6], &edges, slot_mod(2), 2, 2);
        let comps = f.components();
        assert_eq!(comps.len(), 2);
        assert_eq!(comps[0].counts, vec![2, 2]);
        // 4, 5, 6 carry keywords 0, 1, 0
        assert_eq!(comps[1].counts, vec![2, 1]);
        assert!(comps[1].pruned);
        assert_eq!(f.satisfying_components(), 1);
    }

    // d e f g h i with keywords k1 k2 k3 k3 k1 k2
    const D: usize = 0;
    const E: usize = 1;
    const F: usize = 2;
    const G: usize = 3;
    const H: usize = 4;
    const I: usize = 5;

    fn example(rho: u32) -> KeywordSpanningForest {
        let kw = [0, 1, 2, 2, 0, 1];
        KeywordSpanningForest::from_spanning_forest(
            &[D, E, F, G, H, I],
            &[(F, H), (E, F), (G, H), (H, I), (D, H)],
            &[(F, I), (F, G), (E, H)],
            move |v| Some(kw[v]),
            3,
            rho,
        )
    }

    #[test]
    fn replacement_then_split() {
        for rho in [1, 2] {
            let mut f = example(rho);
            assert!(f.delete_edge(I, F).unwrap());
            f.delete_edge(G, F).unwrap();
            assert!(f.is_tree_edge(F, H));
            f.delete_edge(H, F).unwrap();
            // the cut-off side {e, f} reconnects through (h, e)
            assert!(f.is_tree_edge(E, H));
            assert_eq!(f.edge_level(E, F), Some(1));
            assert_eq!(f.components().len(), 1);
            let alive = f.delete_edge(E, F).unwrap();
            assert_eq!(f.component_counts(H), Some(&[2, 2, 1][..]));
            assert_eq!(f.component_counts(F), Some(&[0, 0, 1][..]));
            assert!(f.is_pruned(F));
            assert_eq!(alive, rho == 1);
            f.check_structure().unwrap();
        }
    }

    #[test]
    fn absent_edge_is_an_error() {
        let mut f = example(1);
        assert_eq!(f.delete_edge(D, E), Err(ForestError::EdgeAbsent(D, E)));
        f.delete_edge(D, H).unwrap();
        assert_eq!(f.delete_edge(H, D), Err(ForestError::EdgeAbsent(H, D)));
    }

    fn bfs_components(n: usize, edges: &[Edge]) -> Vec<Vec<VertexId>> {
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for s in 0..n {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut comp = vec![s];
            let mut i = 0;
            while i < comp.len() {
                for &y in &adj[comp[i]] {
                    if !seen[y] {
                        seen[y] = true;
                        comp.push(y);
                    }
                }
                i += 1;
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    #[test]
    fn deletion_streams_match_recount() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..60 {
            let n = rng.gen_range(2..40);
            let p = rng.gen_range(0.05..0.5);
            let k = rng.gen_range(1..4);
            let rho = rng.gen_range(1..3);
            let kw: Vec<usize> = (0..n).map(|_| rng.gen_range(0..k + 1)).collect();
            let mut edges = Vec::new();
            for u in 0..n {
                for v in u + 1..n {
                    if rng.gen_bool(p) {
                        edges.push((u, v));
                    }
                }
            }
            let vertices: Vec<VertexId> = (0..n).collect();
            let kw2 = kw.clone();
            let slot = move |v: VertexId| (kw2[v] < k).then_some(kw2[v]);
            let mut f = KeywordSpanningForest::new(&vertices, &edges, &slot, k, rho);
            let mut order = edges.clone();
            order.shuffle(&mut rng);
            let bound = (n as f64).log2().ceil() as usize;
            for (i, &(u, v)) in order.iter().enumerate() {
                let reported = f.delete_edge(u, v).unwrap();
                let rest = &order[i + 1..];
                let want = bfs_components(n, rest);
                let got = f.components();
                assert_eq!(got.len(), want.len());
                let mut any = false;
                for (c, w) in got.iter().zip(&want) {
                    assert_eq!(&c.vertices, w);
                    let mut counts = vec![0u32; k];
                    for &x in w {
                        if let Some(s) = slot(x) {
                            counts[s] += 1;
                        }
                    }
                    assert_eq!(c.counts, counts);
                    let ok = w.len() >= 2 && counts.iter().all(|&x| x >= rho);
                    assert_eq!(ok, !c.pruned);
                    any |= ok;
                }
                assert_eq!(reported, any);
                assert!(f.stats().max_level <= bound);
                f.check_structure().unwrap();
            }
        }
    }
}
