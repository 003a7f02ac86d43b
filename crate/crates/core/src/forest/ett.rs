//! Euler-tour trees stored in treaps keyed by implicit tour position.
//!
//! A tree's tour holds one node per vertex plus one node per directed tree
//! arc. Rerooting rotates the tour; link and cut are a constant number of
//! splits and merges. Nodes carry subtree size, vertex count and an OR of
//! per-node flag bits so flagged nodes can be found by descent.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub(crate) const NIL: u32 = u32::MAX;

/// Vertex node: the vertex has non-tree edges at this forest's level.
pub(crate) const NONTREE: u8 = 1;
/// Arc node: its tree edge has exactly this forest's level.
pub(crate) const TREE_AT_LEVEL: u8 = 2;

#[derive(Clone, Debug)]
struct Node {
    left: u32,
    right: u32,
    parent: u32,
    prio: u32,
    size: u32,
    verts: u32,
    own: u8,
    agg: u8,
    // arc endpoints; both equal the vertex for vertex nodes
    from: u32,
    to: u32,
}

#[derive(Clone, Debug)]
pub(crate) struct EulerTourForest {
    nodes: Vec<Node>,
    free: Vec<u32>,
    arcs: HashMap<(u32, u32), u32>,
    n: u32,
    rng: ChaCha8Rng,
}

impl EulerTourForest {
    pub(crate) fn new(n: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let nodes = (0..n as u32)
            .map(|v| Node {
                left: NIL,
                right: NIL,
                parent: NIL,
                prio: rng.gen(),
                size: 1,
                verts: 1,
                own: 0,
                agg: 0,
                from: v,
                to: v,
            })
            .collect();
        Self {
            nodes,
            free: Vec::new(),
            arcs: HashMap::new(),
            n: n as u32,
            rng,
        }
    }

    #[inline]
    fn size(&self, x: u32) -> u32 {
        if x == NIL {
            0
        } else {
            self.nodes[x as usize].size
        }
    }

    #[inline]
    fn verts_of(&self, x: u32) -> u32 {
        if x == NIL {
            0
        } else {
            self.nodes[x as usize].verts
        }
    }

    #[inline]
    fn agg_of(&self, x: u32) -> u8 {
        if x == NIL {
            0
        } else {
            self.nodes[x as usize].agg
        }
    }

    fn update(&mut self, x: u32) {
        let (l, r) = {
            let n = &self.nodes[x as usize];
            (n.left, n.right)
        };
        let is_vertex = (x < self.n) as u32;
        let size = self.size(l) + self.size(r) + 1;
        let verts = self.verts_of(l) + self.verts_of(r) + is_vertex;
        let agg = self.agg_of(l) | self.agg_of(r) | self.nodes[x as usize].own;
        let n = &mut self.nodes[x as usize];
        n.size = size;
        n.verts = verts;
        n.agg = agg;
    }

    fn set_parent(&mut self, child: u32, parent: u32) {
        if child != NIL {
            self.nodes[child as usize].parent = parent;
        }
    }

    fn alloc_arc(&mut self, from: u32, to: u32) -> u32 {
        let node = Node {
            left: NIL,
            right: NIL,
            parent: NIL,
            prio: self.rng.gen(),
            size: 1,
            verts: 0,
            own: 0,
            agg: 0,
            from,
            to,
        };
        let id = match self.free.pop() {
            Some(id) => {
                self.nodes[id as usize] = node;
                id
            }
            None => {
                self.nodes.push(node);
                (self.nodes.len() - 1) as u32
            }
        };
        self.arcs.insert((from, to), id);
        id
    }

    fn root(&self, mut x: u32) -> u32 {
        while self.nodes[x as usize].parent != NIL {
            x = self.nodes[x as usize].parent;
        }
        x
    }

    fn index_of(&self, x: u32) -> u32 {
        let mut pos = self.size(self.nodes[x as usize].left);
        let mut cur = x;
        loop {
            let p = self.nodes[cur as usize].parent;
            if p == NIL {
                return pos;
            }
            if self.nodes[p as usize].right == cur {
                pos += self.size(self.nodes[p as usize].left) + 1;
            }
            cur = p;
        }
    }

    fn merge(&mut self, a: u32, b: u32) -> u32 {
        if a == NIL {
            return b;
        }
        if b == NIL {
            return a;
        }
        if self.nodes[a as usize].prio > self.nodes[b as usize].prio {
            let ar = self.nodes[a as usize].right;
            let m = self.merge(ar, b);
            self.nodes[a as usize].right = m;
            self.set_parent(m, a);
            self.update(a);
            a
        } else {
            let bl = self.nodes[b as usize].left;
            let m = self.merge(a, bl);
            self.nodes[b as usize].left = m;
            self.set_parent(m, b);
            self.update(b);
            b
        }
    }

    /// Splits the treap rooted at `t` into its first `k` nodes and the rest.
    fn split(&mut self, t: u32, k: u32) -> (u32, u32) {
        if t == NIL {
            return (NIL, NIL);
        }
        let l = self.nodes[t as usize].left;
        let r = self.nodes[t as usize].right;
        if self.size(l) >= k {
            let (a, b) = self.split(l, k);
            self.nodes[t as usize].left = b;
            self.set_parent(b, t);
            self.set_parent(a, NIL);
            self.update(t);
            (a, t)
        } else {
            let (a, b) = self.split(r, k - self.size(l) - 1);
            self.nodes[t as usize].right = a;
            self.set_parent(a, t);
            self.set_parent(b, NIL);
            self.update(t);
            (t, b)
        }
    }

    fn detach(&mut self, root: u32) -> u32 {
        self.set_parent(root, NIL);
        root
    }

    /// Rotates `v`'s tour so it starts at `v`; returns the new treap root.
    fn reroot(&mut self, v: u32) -> u32 {
        let r = self.root(v);
        let k = self.index_of(v);
        let (a, b) = self.split(r, k);
        let (a, b) = (self.detach(a), self.detach(b));
        let m = self.merge(b, a);
        self.detach(m)
    }

    pub(crate) fn connected(&self, u: u32, v: u32) -> bool {
        self.root(u) == self.root(v)
    }

    /// Vertex count of the tree holding `v`.
    pub(crate) fn tree_size(&self, v: u32) -> u32 {
        self.nodes[self.root(v) as usize].verts
    }

    pub(crate) fn has_arc(&self, u: u32, v: u32) -> bool {
        self.arcs.contains_key(&(u, v))
    }

    /// Joins the trees of `u` and `v` with tree edge `(u, v)`. `flags` is set
    /// on the `(min, max)` arc.
    pub(crate) fn link(&mut self, u: u32, v: u32, flags: u8) {
        debug_assert!(!self.connected(u, v));
        let tu = self.reroot(u);
        let tv = self.reroot(v);
        let uv = self.alloc_arc(u, v);
        let vu = self.alloc_arc(v, u);
        let marked = if u < v { uv } else { vu };
        self.nodes[marked as usize].own = flags;
        self.nodes[marked as usize].agg = flags;
        let m = self.merge(tu, uv);
        let m = self.merge(m, tv);
        let m = self.merge(m, vu);
        self.detach(m);
    }

    /// Removes tree edge `(u, v)`, splitting its tree in two.
    pub(crate) fn cut(&mut self, u: u32, v: u32) {
        let a1 = self.arcs.remove(&(u, v)).expect("cut of a non-tree edge");
        let a2 = self.arcs.remove(&(v, u)).expect("cut of a non-tree edge");
        let r = self.root(a1);
        let (mut a1, mut a2) = (a1, a2);
        let (mut i1, mut i2) = (self.index_of(a1), self.index_of(a2));
        if i1 > i2 {
            std::mem::swap(&mut a1, &mut a2);
            std::mem::swap(&mut i1, &mut i2);
        }
        let (left, rest) = self.split(r, i1);
        let (_, rest) = self.split(rest, 1);
        let (middle, rest) = self.split(rest, i2 - i1 - 1);
        let (_, right) = self.split(rest, 1);
        self.detach(middle);
        let (left, right) = (self.detach(left), self.detach(right));
        let m = self.merge(left, right);
        self.detach(m);
        for a in [a1, a2] {
            self.nodes[a as usize].own = 0;
            self.free.push(a);
        }
    }

    fn refresh_path(&mut self, mut x: u32) {
        while x != NIL {
            self.update(x);
            x = self.nodes[x as usize].parent;
        }
    }

    /// Sets or clears flag bits on a vertex node.
    pub(crate) fn set_vertex_flag(&mut self, v: u32, flag: u8, on: bool) {
        let own = &mut self.nodes[v as usize].own;
        let next = if on { *own | flag } else { *own & !flag };
        if next != *own {
            *own = next;
            self.refresh_path(v);
        }
    }

    /// Clears flag bits on the marked arc of tree edge `(u, v)`.
    pub(crate) fn clear_arc_flag(&mut self, u: u32, v: u32, flag: u8) {
        let key = (u.min(v), u.max(v));
        if let Some(&a) = self.arcs.get(&key) {
            self.nodes[a as usize].own &= !flag;
            self.refresh_path(a);
        }
    }

    /// Some node carrying `flag` in the tree of `v`. For arc nodes the
    /// endpoints are returned, for vertex nodes `(v, v)`.
    pub(crate) fn find_flagged(&self, v: u32, flag: u8) -> Option<(u32, u32)> {
        let mut x = self.root(v);
        if self.agg_of(x) & flag == 0 {
            return None;
        }
        loop {
            let n = &self.nodes[x as usize];
            if self.agg_of(n.left) & flag != 0 {
                x = n.left;
            } else if n.own & flag != 0 {
                return Some((n.from, n.to));
            } else {
                x = n.right;
            }
        }
    }

    /// Vertices of the tree containing `v`, in tour order.
    pub(crate) fn tree_vertices(&self, v: u32) -> Vec<u32> {
        let mut out = Vec::new();
        let mut stack = Vec::new();
        let mut x = self.root(v);
        while x != NIL || !stack.is_empty() {
            while x != NIL {
                stack.push(x);
                x = self.nodes[x as usize].left;
            }
            let y = stack.pop().expect("non-empty");
            if y < self.n {
                out.push(y);
            }
            x = self.nodes[y as usize].right;
        }
        out
    }
}
