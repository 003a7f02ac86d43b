//! Parameter sweeps over random queries with per-algorithm timing and
//! pruning ratios.

use std::fmt::Write as _;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::baselines::{preprune, BaselineKind};
use crate::graph::{GeoSocialGraph, KeywordDict, Point, Query, VertexAttr, DEFAULT_DELTA};
use crate::search::{prune, search_pruned, SearchConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algo {
    Mkasg,
    Baseline(BaselineKind),
}

impl Algo {
    pub const ALL: [Algo; 4] = [
        Algo::Mkasg,
        Algo::Baseline(BaselineKind::Incremental),
        Algo::Baseline(BaselineKind::Decremental),
        Algo::Baseline(BaselineKind::BinarySearch),
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algo::Mkasg => "mkasg",
            Algo::Baseline(k) => k.name(),
        }
    }

    pub fn parse(s: &str) -> Option<Vec<Algo>> {
        match s {
            "all" => Some(Self::ALL.to_vec()),
            _ => Self::ALL.iter().copied().find(|a| a.name() == s).map(|a| vec![a]),
        }
    }
}

/// One grid cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Cell {
    pub c: usize,
    pub phi: usize,
    pub rho: usize,
}

impl Cell {
    pub const DEFAULT: Cell = Cell { c: 6, phi: 3, rho: 3 };
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchPlan {
    pub algos: Vec<Algo>,
    pub cells: Vec<Cell>,
    pub queries: usize,
    pub seed: u64,
    pub delta: f64,
    /// When false, time columns print `-` and the table is reproducible.
    pub timing: bool,
}

impl BenchPlan {
    /// Varies one parameter at a time around [`Cell::DEFAULT`].
    pub fn sweep() -> Vec<Cell> {
        let d = Cell::DEFAULT;
        let mut cells = vec![d];
        cells.extend((3..=8).map(|c| Cell { c, ..d }));
        cells.extend([1, 3, 5, 7, 9].map(|phi| Cell { phi, ..d }));
        cells.extend([1, 3, 5, 7, 9].map(|rho| Cell { rho, ..d }));
        let mut out: Vec<Cell> = Vec::new();
        for c in cells {
            if !out.contains(&c) {
                out.push(c);
            }
        }
        out
    }
}

impl Default for BenchPlan {
    fn default() -> Self {
        Self {
            algos: Algo::ALL.to_vec(),
            cells: Self::sweep(),
            queries: 10,
            seed: 1,
            delta: DEFAULT_DELTA,
            timing: true,
        }
    }
}

/// Mean pruning ratios of one cell, over the queries where each is defined.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PruningReport {
    /// Pruned-graph edges over graph edges.
    pub h_over_g: f64,
    /// Edges summed over all expansion radii, over pruned-graph edges.
    pub expansion_over_h: f64,
    /// Potential-subgraph edges over last bounded-graph edges.
    pub p_over_hd: f64,
    /// Admitted truss edges over potential-subgraph edges.
    pub c_over_p: f64,
    /// Largest observed edge sum over last bounded-graph edges.
    pub expansion_factor: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CellRow {
    pub cell: Cell,
    pub queries: usize,
    /// Queries with a result, per the first algorithm.
    pub found: usize,
    /// Mean milliseconds of pipeline pre-pruning.
    pub prune_ms: f64,
    /// Mean milliseconds per algorithm, pre-pruning excluded.
    pub ms: Vec<(Algo, f64)>,
    pub pruning: PruningReport,
    /// Whether every algorithm returned the same distance on every query.
    pub agree: bool,
}

struct QueryRun {
    dists: Vec<Option<f64>>,
    ms: Vec<f64>,
    prune_ms: f64,
    ratios: [Option<f64>; 5],
}

fn ms_since(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// Random query for a cell: location uniform over the bounding box,
/// keywords drawn without replacement from the dictionary.
pub fn random_query(g: &GeoSocialGraph, cell: Cell, delta: f64, rng: &mut impl Rng) -> Option<Query> {
    let (lo, hi) = g.bounding_box()?;
    let x = if hi.x > lo.x { rng.gen_range(lo.x..=hi.x) } else { lo.x };
    let y = if hi.y > lo.y { rng.gen_range(lo.y..=hi.y) } else { lo.y };
    let all: Vec<u32> = (0..g.keywords().len() as u32).collect();
    let phi: Vec<u32> = all.choose_multiple(rng, cell.phi.min(all.len())).copied().collect();
    Query::new(Point::new(x, y), phi, cell.rho, cell.c, delta).ok()
}

fn run_query(g: &GeoSocialGraph, q: &Query, algos: &[Algo]) -> QueryRun {
    let t = Instant::now();
    let h = prune(g, q);
    let prune_ms = ms_since(t);
    let pre = algos
        .iter()
        .any(|a| matches!(a, Algo::Baseline(_)))
        .then(|| preprune(g, q));
    let mut dists = Vec::new();
    let mut ms = Vec::new();
    let mut ratios = [None; 5];
    for &algo in algos {
        let t = Instant::now();
        let dist = match algo {
            Algo::Mkasg => {
                let out = search_pruned(g, q, &h, &SearchConfig::default())
                    .expect("pipeline result validates");
                let s = &out.stats;
                let last = s.expansion_edges.last().copied().unwrap_or(0);
                let frac = |a: usize, b: usize| (b > 0).then(|| a as f64 / b as f64);
                ratios = [
                    frac(s.pruned_edges, s.graph_edges),
                    frac(s.expansion_edge_sum, s.pruned_edges),
                    frac(s.potential_edges, last),
                    frac(s.admitted_truss_edges, s.potential_edges),
                    frac(s.expansion_edge_sum, last),
                ];
                out.group.map(|r| r.dist)
            }
            Algo::Baseline(k) => k
                .run_from(pre.as_ref().expect("computed above"), g, q)
                .map(|r| r.dist),
        };
        ms.push(ms_since(t));
        dists.push(dist);
    }
    QueryRun {
        dists,
        ms,
        prune_ms,
        ratios,
    }
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut n) = (0.0, 0usize);
    for x in xs {
        sum += x;
        n += 1;
    }
    if n == 0 {
        f64::NAN
    } else {
        sum / n as f64
    }
}

/// Runs every cell of `plan` on `g`. Queries of a cell run in parallel on
/// the current rayon pool; results are combined in query order.
pub fn run_bench(g: &GeoSocialGraph, plan: &BenchPlan) -> Vec<CellRow> {
    plan.cells
        .iter()
        .enumerate()
        .map(|(ci, &cell)| {
            let mut rng = ChaCha8Rng::seed_from_u64(plan.seed ^ ((ci as u64) << 32));
            let queries: Vec<Query> = (0..plan.queries)
                .filter_map(|_| random_query(g, cell, plan.delta, &mut rng))
                .collect();
            let runs: Vec<QueryRun> = queries
                .par_iter()
                .map(|q| run_query(g, q, &plan.algos))
                .collect();
            let ms = plan
                .algos
                .iter()
                .enumerate()
                .map(|(i, &a)| (a, mean(runs.iter().map(|r| r.ms[i]))))
                .collect();
            let ratio = |i: usize| mean(runs.iter().filter_map(|r| r.ratios[i]));
            let max_factor = runs
                .iter()
                .filter_map(|r| r.ratios[4])
                .fold(f64::NAN, f64::max);
            CellRow {
                cell,
                queries: runs.len(),
                found: runs.iter().filter(|r| r.dists.first().is_some_and(|d| d.is_some())).count(),
                prune_ms: mean(runs.iter().map(|r| r.prune_ms)),
                ms,
                pruning: PruningReport {
                    h_over_g: ratio(0),
                    expansion_over_h: ratio(1),
                    p_over_hd: ratio(2),
                    c_over_p: ratio(3),
                    expansion_factor: max_factor,
                },
                agree: runs.iter().all(|r| r.dists.windows(2).all(|w| w[0] == w[1])),
            }
        })
        .collect()
}

fn num(x: f64) -> String {
    if x.is_nan() {
        "-".into()
    } else {
        format!("{x:.4}")
    }
}

/// Tab-separated table of `rows`.
pub fn render_table(rows: &[CellRow], plan: &BenchPlan) -> String {
    let mut s = String::new();
    let mut header = vec!["c", "phi", "rho", "queries", "found", "prune_ms"];
    let algo_cols: Vec<String> = plan.algos.iter().map(|a| format!("{}_ms", a.name())).collect();
    header.extend(algo_cols.iter().map(String::as_str));
    header.extend([
        "h_over_g",
        "expansion_over_h",
        "p_over_hd",
        "c_over_p",
        "expansion_factor",
        "expansion_bound",
        "agree",
    ]);
    writeln!(s, "{}", header.join("\t")).unwrap();
    let bound = crate::expand::expansion_bound_factor(plan.delta);
    for r in rows {
        let time = |x: f64| if plan.timing { num(x) } else { "-".into() };
        let mut cols = vec![
            r.cell.c.to_string(),
            r.cell.phi.to_string(),
            r.cell.rho.to_string(),
            r.queries.to_string(),
            r.found.to_string(),
            time(r.prune_ms),
        ];
        cols.extend(r.ms.iter().map(|&(_, x)| time(x)));
        cols.extend([
            num(r.pruning.h_over_g),
            num(r.pruning.expansion_over_h),
            num(r.pruning.p_over_hd),
            num(r.pruning.c_over_p),
            num(r.pruning.expansion_factor),
            num(bound),
            r.agree.to_string(),
        ]);
        writeln!(s, "{}", cols.join("\t")).unwrap();
    }
    s
}

/// Random geometric graph: `n` points in a 100 x 100 square, each joined to
/// its `k` nearest others, keywords uniform over `keywords` names.
pub fn synthetic_graph(n: usize, k: usize, keywords: usize, seed: u64) -> GeoSocialGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dict = KeywordDict::new();
    let ids: Vec<u32> = (0..keywords.max(1))
        .map(|i| dict.intern(&format!("k{i}")))
        .collect();
    let attrs: Vec<VertexAttr> = (0..n)
        .map(|_| VertexAttr {
            pos: Point::new(rng.gen_range(0.0..100.0), rng.gen_range(0.0..100.0)),
            keyword: ids[rng.gen_range(0..ids.len())],
        })
        .collect();
    let mut edges = Vec::new();
    for u in 0..n {
        let mut near: Vec<(f64, usize)> = (0..n)
            .filter(|&v| v != u)
            .map(|v| (attrs[u].pos.squared_distance(&attrs[v].pos), v))
            .collect();
        let take = k.min(near.len());
        if take > 0 {
            near.select_nth_unstable_by(take - 1, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        }
        edges.extend(near[..take].iter().map(|&(_, v)| (u.min(v), u.max(v))));
    }
    let labels = (0..n).map(|v| format!("v{v:06}")).collect();
    GeoSocialGraph::from_parts(attrs, edges, dict).0.with_labels(labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_varies_one_parameter_at_a_time() {
        let cells = BenchPlan::sweep();
        assert_eq!(cells[0], Cell::DEFAULT);
        assert_eq!(cells.len(), 1 + 5 + 4 + 4);
        for c in &cells {
            let diffs = (c.c != 6) as u8 + (c.phi != 3) as u8 + (c.rho != 3) as u8;
            assert!(diffs <= 1);
        }
    }

    #[test]
    fn untimed_tables_repeat_and_respect_the_bound() {
        let g = synthetic_graph(150, 8, 4, 7);
        let plan = BenchPlan {
            cells: vec![
                Cell { c: 4, phi: 2, rho: 2 },
                Cell { c: 3, phi: 1, rho: 200 },
            ],
            queries: 3,
            timing: false,
            ..BenchPlan::default()
        };
        let rows = run_bench(&g, &plan);
        let a = render_table(&rows, &plan);
        assert_eq!(a, render_table(&run_bench(&g, &plan), &plan));
        assert!(rows.iter().all(|r| r.agree));
        assert_eq!(rows[1].found, 0);
        for r in &rows {
            let f = r.pruning.expansion_factor;
            assert!(f.is_nan() || f <= 3.0);
        }
    }
}
