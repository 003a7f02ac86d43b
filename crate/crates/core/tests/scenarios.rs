//! Small hand-built scenarios with known intermediate states.

use geotruss::dsu::find_lower_bound_radius;
use geotruss::expand::ExpandState;
use geotruss::forest::KeywordSpanningForest;
use geotruss::io::{parse_graph, QuerySpec};
use geotruss::spatial::{Radius, SortedEdgeArray};
use geotruss::{search, validate_group, Edge, GeoSocialGraph, Query, SearchConfig};

fn load(vertices: &str, edges: &str) -> GeoSocialGraph {
    parse_graph(vertices, edges, ("vertices", "edges")).unwrap().0
}

fn id(g: &GeoSocialGraph, label: &str) -> usize {
    (0..g.n()).find(|&v| g.label(v) == label).unwrap()
}

fn query(g: &GeoSocialGraph, rho: usize, c: usize) -> Query {
    QuerySpec {
        lambda: [0.0, 0.0],
        keywords: vec!["k1".into(), "k2".into(), "k3".into()],
        rho,
        c,
        delta: 2.0,
    }
    .resolve(g)
    .unwrap()
}

fn clique(g: &GeoSocialGraph, labels: &[&str]) -> Vec<Edge> {
    let ids: Vec<usize> = labels.iter().map(|l| id(g, l)).collect();
    let mut out = Vec::new();
    for (i, &u) in ids.iter().enumerate() {
        for &v in &ids[i + 1..] {
            out.push((u.min(v), u.max(v)));
        }
    }
    out
}

// d, e, g, h, i sit close to the origin and carry k1, k2, k3, k1, k2; f
// carries k3 and is reachable only through h. Labels are chosen so that
// d < h < f < e < g < i in id order.
const SCAN_VERTICES: &str = "\
1d\t1\t0\tk1
2h\t0\t1\tk1
3f\t3\t0\tk3
4e\t-1\t0\tk2
5g\t0\t-1\tk3
6i\t1\t1\tk2
";
const SCAN_EDGES: &str = "\
2h\t1d
2h\t4e
2h\t5g
2h\t6i
4e\t6i
3f\t2h
";

#[test]
fn lower_bound_scan_stops_at_the_edge_completing_the_keywords() {
    let g = load(SCAN_VERTICES, SCAN_EDGES);
    let q = query(&g, 2, 2);
    let all: Vec<Edge> = g.edges().collect();
    let a = SortedEdgeArray::from_edges(&all, &g, q.lambda);
    let lb = find_lower_bound_radius(&a, &g, &q).unwrap();
    let (f, h) = (id(&g, "3f"), id(&g, "2h"));
    assert_eq!(*lb.edges.last().unwrap(), (h.min(f), h.max(f)));
    assert_eq!(lb.edges.len(), all.len());
    // the potential set is every vertex: d, e, f, g, h, i
    assert_eq!(lb.vertices, (0..6).collect::<Vec<_>>());
    assert_eq!(lb.radius, Radius::from_distance(3.0));
}

// K5 on d, e, g, h, i near the origin; x hangs off g; f later joins e, h, i.
const UNION_VERTICES: &str = "\
d\t1\t0\tk1
e\t0\t1\tk2
g\t-1\t0\tk3
h\t0\t-1\tk1
i\t1\t1\tk2
x\t-2\t0\tk3
f\t3\t0\tk3
";
const UNION_EDGES: &str = "\
d\te
d\tg
d\th
d\ti
e\tg
e\th
e\ti
g\th
g\ti
h\ti
x\tg
f\te
f\th
f\ti
";

#[test]
fn truss_union_absorbs_the_new_vertex() {
    let g = load(UNION_VERTICES, UNION_EDGES);
    let q = query(&g, 2, 4);
    let all: Vec<Edge> = g.edges().collect();
    let mut a = SortedEdgeArray::from_edges(&all, &g, q.lambda);
    let mut s = ExpandState::new(&g, &q);

    // K5 plus the pendant: the potential set holds k3 twice through x, the
    // truss only once through g
    assert!(s.step(&mut a, Radius::from_distance(2.0)).unwrap().is_none());
    assert_eq!(s.admitted_edges(), 10);

    let cand = s.step(&mut a, Radius::from_distance(3.0)).unwrap().unwrap();
    let step = s.steps().last().unwrap();
    // the three edges of f, the three e-h-i edges closing triangles with
    // them, and the still rejected pendant
    assert_eq!(step.truss_potential_edges, 7);
    assert_eq!(s.admitted_edges(), 13);
    let mut want = clique(&g, &["d", "e", "g", "h", "i"]);
    want.extend(
        [("f", "e"), ("f", "h"), ("f", "i")]
            .iter()
            .map(|(a, b)| {
                let (u, v) = (id(&g, a), id(&g, b));
                (u.min(v), u.max(v))
            }),
    );
    want.sort_unstable();
    assert_eq!(cand.edges, want);
    assert!(!cand.vertices.contains(&id(&g, "x")));

    let out = search(&g, &q, &SearchConfig::default()).unwrap();
    let group = out.group.unwrap();
    assert!(validate_group(&group, &q, &g));
    assert_eq!(group.dist, 3.0);
}

#[test]
fn deleting_a_vertex_through_the_forest() {
    // spanning tree h-f, e-f, h-g, h-i, h-d; other edges i-f, g-f, h-e
    let g = load(
        "d\t0\t0\tk1\ne\t0\t0\tk2\nf\t0\t0\tk3\ng\t0\t0\tk3\nh\t0\t0\tk1\ni\t0\t0\tk2\n",
        "",
    );
    let e = |a: &str, b: &str| {
        let (u, v) = (id(&g, a), id(&g, b));
        (u.min(v), u.max(v))
    };
    let q = query(&g, 1, 2);
    let slot = |v: usize| q.slot(g.keyword(v));
    let tree = [e("h", "f"), e("e", "f"), e("h", "g"), e("h", "i"), e("h", "d")];
    let other = [e("i", "f"), e("g", "f"), e("h", "e")];
    let vertices: Vec<usize> = (0..6).collect();
    let mut f = KeywordSpanningForest::from_spanning_forest(&vertices, &tree, &other, slot, 3, 1);

    let (fv, hv, ev) = (id(&g, "f"), id(&g, "h"), id(&g, "e"));
    for (a, b) in [("i", "f"), ("g", "f")] {
        let (u, v) = e(a, b);
        assert!(f.delete_edge(u, v).unwrap());
        assert_eq!(f.components().len(), 1);
    }
    assert!(f.delete_edge(hv, fv).unwrap());
    assert!(f.is_tree_edge(hv, ev));
    assert_eq!(f.edge_level(ev, fv), Some(1));
    assert!(f.delete_edge(ev, fv).unwrap());
    assert_eq!(f.component_counts(hv), Some(&[2, 2, 1][..]));
    assert!(f.is_pruned(fv));
    assert_eq!(f.satisfying_components(), 1);
}
