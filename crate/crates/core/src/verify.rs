//! Randomized agreement suite and structure oracles.
//!
//! Every trial draws a small random instance, runs the pipeline, the three
//! baselines and the brute-force optimum, and compares distances. The
//! structure oracles recheck truss extraction, keyword union-find counters
//! and the spanning forest against plain recomputation on the same graph.
//! A failing trial carries a dump of its instance that loads back through
//! [`crate::io::parse_graph`].

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::baselines::{brute_force_optimum, BaselineKind};
use crate::dsu::KeywordDsu;
use crate::forest::KeywordSpanningForest;
use crate::graph::{validate_group, Edge, GeoSocialGraph, KeywordDict, Point, Query, VertexAttr};
use crate::io::{format_graph, QuerySpec};
use crate::search::{search, SearchConfig, SearchOutcome};
use crate::truss::{compute_support, extract_ctruss, TrussState};

/// Shape of the random instances.
#[derive(Clone, Debug, PartialEq)]
pub struct InstanceParams {
    pub max_n: usize,
    pub edge_prob: (f64, f64),
    pub keywords: (usize, usize),
    pub c: (usize, usize),
    pub rho: (usize, usize),
    pub delta: f64,
}

impl Default for InstanceParams {
    fn default() -> Self {
        Self {
            max_n: 40,
            edge_prob: (0.2, 0.4),
            keywords: (3, 5),
            c: (3, 4),
            rho: (1, 2),
            delta: 2.0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Instance {
    pub graph: GeoSocialGraph,
    pub query: Query,
}

impl Instance {
    /// Vertex file, edge file and query JSON of this instance.
    pub fn dump(&self) -> String {
        let (vt, et) = format_graph(&self.graph);
        let spec = QuerySpec::from_query(&self.query, &self.graph);
        format!(
            "--- vertices\n{vt}--- edges\n{et}--- query\n{}\n",
            serde_json::to_string(&spec).expect("plain struct")
        )
    }
}

/// Draws a random instance. Coordinates sit on a coarse integer grid so
/// that distance ties are common.
pub fn random_instance(rng: &mut impl Rng, p: &InstanceParams) -> Instance {
    let n = rng.gen_range(4..=p.max_n.max(4));
    let prob = rng.gen_range(p.edge_prob.0..=p.edge_prob.1);
    let k = rng.gen_range(p.keywords.0..=p.keywords.1);
    let mut dict = KeywordDict::new();
    let kws: Vec<u32> = (0..k).map(|i| dict.intern(&format!("k{i}"))).collect();
    let attrs: Vec<VertexAttr> = (0..n)
        .map(|_| VertexAttr {
            pos: Point::new(rng.gen_range(0..20) as f64, rng.gen_range(0..20) as f64),
            keyword: kws[rng.gen_range(0..k)],
        })
        .collect();
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(prob) {
                edges.push((u, v));
            }
        }
    }
    let (graph, _) = GeoSocialGraph::from_parts(attrs, edges, dict);
    let size = rng.gen_range(1..=k.min(3));
    let phi: Vec<u32> = kws.choose_multiple(rng, size).copied().collect();
    let lambda = Point::new(rng.gen_range(0.0..19.0), rng.gen_range(0.0..19.0));
    let query = Query::new(
        lambda,
        phi,
        rng.gen_range(p.rho.0..=p.rho.1),
        rng.gen_range(p.c.0..=p.c.1),
        p.delta,
    )
    .expect("parameters in range");
    Instance { graph, query }
}

/// What one trial established.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialReport {
    /// Brute-force optimum, if any.
    pub optimum: Option<f64>,
    pub outcome: SearchOutcome,
}

fn dist_of(r: &Option<crate::graph::GroupResult>) -> Option<f64> {
    r.as_ref().map(|r| r.dist)
}

/// Pipeline, baselines and brute force on one instance. `Err` explains the
/// first disagreement.
pub fn check_agreement(inst: &Instance, cfg: &SearchConfig) -> Result<TrialReport, String> {
    let (g, q) = (&inst.graph, &inst.query);
    let oracle = brute_force_optimum(g, q).map_err(|e| e.to_string())?;
    let optimum = dist_of(&oracle);
    let outcome = search(g, q, cfg).map_err(|e| format!("pipeline: {e}"))?;
    if dist_of(&outcome.group) != optimum {
        return Err(format!(
            "pipeline dist {:?} != optimum {:?}",
            dist_of(&outcome.group),
            optimum
        ));
    }
    for kind in BaselineKind::ALL {
        let r = kind.run(g, q);
        if dist_of(&r) != optimum {
            return Err(format!(
                "{} dist {:?} != optimum {:?}",
                kind.name(),
                dist_of(&r),
                optimum
            ));
        }
        if let Some(r) = &r {
            if !validate_group(r, q, g) {
                return Err(format!("{} returned an invalid group", kind.name()));
            }
        }
    }
    if let Some(r) = &oracle {
        if !validate_group(r, q, g) {
            return Err("brute force returned an invalid group".into());
        }
    }
    Ok(TrialReport { optimum, outcome })
}

/// Truss extraction against repeated full recount, and decremental
/// maintenance against re-extraction after every vertex deletion.
pub fn check_truss(g: &GeoSocialGraph, c: usize, rng: &mut impl Rng) -> Result<(), String> {
    let all: Vec<Edge> = g.edges().collect();
    let mut naive = all.clone();
    loop {
        let sup = compute_support(&naive);
        let next: Vec<Edge> = naive
            .iter()
            .copied()
            .filter(|&(u, v)| sup.get(u, v).unwrap_or(0) + 2 >= c as u32)
            .collect();
        if next.len() == naive.len() {
            break;
        }
        naive = next;
    }
    let mut got: Vec<Edge> = extract_ctruss(&all, c)
        .into_iter()
        .flat_map(|t| t.edges)
        .collect();
    got.sort_unstable();
    if got != naive {
        return Err(format!("c={c}: extraction differs from recount peeling"));
    }
    let mut state = TrussState::new(&all, c);
    state.peel(|_| {});
    let mut order: Vec<usize> = (0..g.n()).collect();
    order.shuffle(rng);
    let mut alive = vec![true; g.n()];
    for v in order {
        alive[v] = false;
        let _ = state.delete_vertex(v, |_| {});
        let rest: Vec<Edge> = all
            .iter()
            .copied()
            .filter(|&(a, b)| alive[a] && alive[b])
            .collect();
        let mut want: Vec<Edge> = extract_ctruss(&rest, c)
            .into_iter()
            .flat_map(|t| t.edges)
            .collect();
        want.sort_unstable();
        if state.edges() != want {
            return Err(format!("c={c}: decremental state differs after deleting {v}"));
        }
    }
    Ok(())
}

/// Union-find keyword counters against per-component recounts while edges
/// are added in random order.
pub fn check_dsu(g: &GeoSocialGraph, q: &Query, rng: &mut impl Rng) -> Result<(), String> {
    let mut edges: Vec<Edge> = g.edges().collect();
    edges.shuffle(rng);
    let mut dsu = KeywordDsu::new(q);
    for v in 0..g.n() {
        dsu.insert_vertex(v, g.keyword(v)).map_err(|e| e.to_string())?;
    }
    for (i, &(u, v)) in edges.iter().enumerate() {
        dsu.union(u, v).map_err(|e| e.to_string())?;
        if i % 7 != 0 && i + 1 != edges.len() {
            continue;
        }
        for (members, counts) in recount(g.n(), &edges[..=i], |x| q.slot(g.keyword(x)), q.phi().len()) {
            let got = dsu.counts(members[0]).map_err(|e| e.to_string())?;
            if got != counts {
                return Err(format!("union-find counts {got:?} != recount {counts:?}"));
            }
            if dsu.is_satisfied(members[0]).map_err(|e| e.to_string())? != q.satisfies(&counts) {
                return Err("union-find satisfied flag is stale".into());
            }
        }
    }
    Ok(())
}

/// Components of `edges` over `0..n` with keyword counts, by BFS.
fn recount(
    n: usize,
    edges: &[Edge],
    slot: impl Fn(usize) -> Option<usize>,
    k: usize,
) -> Vec<(Vec<usize>, Vec<u32>)> {
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
        let mut counts = vec![0u32; k];
        for &x in &comp {
            if let Some(s) = slot(x) {
                counts[s] += 1;
            }
        }
        out.push((comp, counts));
    }
    out
}

/// Deletes every edge of `g` in random order from a keyword-aware forest
/// and compares components, counters, the returned flag and the level bound
/// with BFS recomputation after each deletion.
pub fn check_forest(g: &GeoSocialGraph, q: &Query, rng: &mut impl Rng) -> Result<(), String> {
    let n = g.n();
    let vertices: Vec<usize> = (0..n).collect();
    let edges: Vec<Edge> = g.edges().collect();
    let slot = |x: usize| q.slot(g.keyword(x));
    let k = q.phi().len();
    let mut f = KeywordSpanningForest::for_query(&vertices, &edges, g, q);
    let mut order = edges.clone();
    order.shuffle(rng);
    let bound = (n as f64).log2().ceil() as usize;
    let mut alive: BTreeSet<Edge> = edges.iter().copied().collect();
    for (u, v) in order {
        let flag = f.delete_edge(u, v).map_err(|e| e.to_string())?;
        alive.remove(&(u, v));
        let rest: Vec<Edge> = alive.iter().copied().collect();
        let want = recount(n, &rest, slot, k);
        let got = f.components();
        if got.len() != want.len() {
            return Err(format!("forest has {} components, BFS {}", got.len(), want.len()));
        }
        let mut any = false;
        for (c, (members, counts)) in got.iter().zip(&want) {
            if &c.vertices != members || &c.counts != counts {
                return Err(format!("forest component {:?} != BFS {members:?}", c.vertices));
            }
            let ok = members.len() >= 2 && q.satisfies(counts);
            if ok == c.pruned {
                return Err(format!("pruned flag wrong for component {members:?}"));
            }
            any |= ok;
        }
        if flag != any {
            return Err("deletion reported the wrong satisfying flag".into());
        }
        if f.stats().max_level > bound {
            return Err(format!("edge level {} above {bound}", f.stats().max_level));
        }
    }
    f.check_structure()
}

/// Inputs of a verify run.
#[derive(Clone, Debug, PartialEq)]
pub struct VerifyPlan {
    pub trials: usize,
    pub seed: u64,
    pub params: InstanceParams,
    pub search: SearchConfig,
}

impl Default for VerifyPlan {
    fn default() -> Self {
        Self {
            trials: 1000,
            seed: 1,
            params: InstanceParams::default(),
            search: SearchConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Failure {
    pub trial: usize,
    pub check: &'static str,
    pub reason: String,
    pub dump: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyReport {
    pub trials: usize,
    pub found: usize,
    pub passed: HashMap<&'static str, usize>,
    pub failures: Vec<Failure>,
}

impl VerifyReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }

    /// Plain-text report; identical for identical plans.
    pub fn render(&self) -> String {
        let mut s = String::new();
        if self.trials == 0 {
            writeln!(s, "warning: no trials requested, nothing was checked").unwrap();
        }
        writeln!(s, "trials\t{}", self.trials).unwrap();
        writeln!(s, "found\t{}", self.found).unwrap();
        for check in CHECKS {
            writeln!(s, "{check}\t{}/{}", self.passed.get(check).unwrap_or(&0), self.trials)
                .unwrap();
        }
        for f in &self.failures {
            writeln!(s, "FAIL trial {} [{}]: {}", f.trial, f.check, f.reason).unwrap();
            s.push_str(&f.dump);
        }
        writeln!(s, "result\t{}", if self.ok() { "pass" } else { "fail" }).unwrap();
        s
    }
}

const CHECKS: [&str; 4] = ["agreement", "truss", "dsu", "forest"];

fn trial(i: usize, plan: &VerifyPlan) -> (bool, Vec<Result<(), Failure>>) {
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed.wrapping_mul(0x9e37_79b9).wrapping_add(i as u64));
    let inst = random_instance(&mut rng, &plan.params);
    let fail = |check: &'static str, reason: String| Failure {
        trial: i,
        check,
        reason,
        dump: inst.dump(),
    };
    let mut found = false;
    let agreement = match check_agreement(&inst, &plan.search) {
        Ok(r) => {
            found = r.optimum.is_some();
            Ok(())
        }
        Err(e) => Err(fail("agreement", e)),
    };
    let (g, q) = (&inst.graph, &inst.query);
    let truss = check_truss(g, q.c, &mut rng).map_err(|e| fail("truss", e));
    let dsu = check_dsu(g, q, &mut rng).map_err(|e| fail("dsu", e));
    let forest = check_forest(g, q, &mut rng).map_err(|e| fail("forest", e));
    (found, vec![agreement, truss, dsu, forest])
}

/// Runs every trial of `plan`. Trials run in parallel but the report is
/// assembled in trial order.
pub fn run_verify(plan: &VerifyPlan) -> VerifyReport {
    let results: Vec<(bool, Vec<Result<(), Failure>>)> =
        (0..plan.trials).into_par_iter().map(|i| trial(i, plan)).collect();
    let mut report = VerifyReport {
        trials: plan.trials,
        found: 0,
        passed: HashMap::new(),
        failures: Vec::new(),
    };
    for (found, checks) in results {
        report.found += found as usize;
        for (name, r) in CHECKS.iter().zip(checks) {
            match r {
                Ok(()) => *report.passed.entry(name).or_default() += 1,
                Err(f) => report.failures.push(f),
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::parse_graph;

    #[test]
    fn small_run_passes_and_is_deterministic() {
        let plan = VerifyPlan {
            trials: 40,
            seed: 3,
            ..VerifyPlan::default()
        };
        let a = run_verify(&plan);
        assert!(a.ok(), "{}", a.render());
        assert_eq!(a.render(), run_verify(&plan).render());
    }

    #[test]
    fn zero_trials_pass_with_a_warning() {
        let r = run_verify(&VerifyPlan {
            trials: 0,
            ..VerifyPlan::default()
        });
        assert!(r.ok());
        assert!(r.render().starts_with("warning"));
    }

    #[test]
    fn dumps_replay() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let inst = random_instance(&mut rng, &InstanceParams::default());
        let dump = inst.dump();
        let vt = dump.split("--- edges\n").next().unwrap().trim_start_matches("--- vertices\n");
        let rest = dump.split("--- edges\n").nth(1).unwrap();
        let et = rest.split("--- query\n").next().unwrap();
        let (g, _) = parse_graph(vt, et, ("v", "e")).unwrap();
        assert_eq!((g.n(), g.m()), (inst.graph.n(), inst.graph.m()));
    }
}
