//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::collections::BTreeSet;
use std::time::Instant;

use geotruss::baselines::{brute_force_optimum, BaselineKind};
use geotruss::bench::{render_table, run_bench, synthetic_graph, BenchPlan, Cell};
use geotruss::forest::KeywordSpanningForest;
use geotruss::truss::{extract_ctruss, TrussState};
use geotruss::verify::{random_instance, run_verify, InstanceParams, VerifyPlan};
use geotruss::{search, validate_group, Edge, SearchConfig};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

struct Outcome {
    id: usize,
    name: &'static str,
    pass: bool,
    detail: String,
}

fn report(id: usize, name: &'static str, violations: &[String], checked: String) -> Outcome {
    let detail = match violations.first() {
        None => checked,
        Some(first) => format!("{} violations, first: {first}", violations.len()),
    };
    Outcome {
        id,
        name,
        pass: violations.is_empty(),
        detail,
    }
}

// ---------------------------------------------------------------------------
// Criteria 1, 2, 5, 6, 7, 8 share one instance set.

#[derive(Default)]
struct InstanceFindings {
    found: bool,
    optimality: Option<String>,
    baselines: Option<String>,
    expansion: Option<String>,
    lower_bound: Option<String>,
    bracket: Option<String>,
    budget: Option<String>,
    bracket_checked: bool,
}

fn ceil_log2(x: usize) -> usize {
    (x.max(1) as f64).log2().ceil() as usize
}

fn run_instance(i: usize) -> InstanceFindings {
    let mut rng = ChaCha8Rng::seed_from_u64(10_000 + i as u64);
    let inst = random_instance(&mut rng, &InstanceParams::default());
    let (g, q) = (&inst.graph, &inst.query);
    let mut f = InstanceFindings::default();
    let oracle = brute_force_optimum(g, q).expect("instances stay under the cap");
    let want = oracle.as_ref().map(|r| r.dist);
    f.found = want.is_some();

    let out = match search(g, q, &SearchConfig::default()) {
        Ok(out) => out,
        Err(e) => {
            f.optimality = Some(format!("instance {i}: pipeline error {e}"));
            return f;
        }
    };
    let got = out.group.as_ref().map(|r| r.dist);
    if got != want {
        f.optimality = Some(format!("instance {i}: pipeline {got:?}, optimum {want:?}"));
    } else if let Some(r) = &out.group {
        if !validate_group(r, q, g) {
            f.optimality = Some(format!("instance {i}: invalid group"));
        }
    }

    for kind in BaselineKind::ALL {
        let b = kind.run(g, q);
        let bd = b.as_ref().map(|r| r.dist);
        let valid = b.as_ref().is_none_or(|r| validate_group(r, q, g));
        if bd != want || !valid {
            f.baselines = Some(format!("instance {i}: {} {bd:?}, optimum {want:?}", kind.name()));
            break;
        }
    }

    let s = &out.stats;
    if let Some(&last) = s.expansion_edges.last() {
        if s.expansion_edge_sum as f64 > 3.0 * last as f64 {
            f.expansion = Some(format!(
                "instance {i}: sum {} > 3 * {last}",
                s.expansion_edge_sum
            ));
        }
    }
    if let Some(d) = got {
        match s.lower_bound_radius {
            Some(lb) if lb <= d => {}
            lb => f.lower_bound = Some(format!("instance {i}: lower bound {lb:?}, dist {d}")),
        }
        if s.expansion_radii.len() >= 2 {
            f.bracket_checked = true;
            let pen = s.expansion_radii[s.expansion_radii.len() - 2];
            // a group inside the penultimate radius would put the optimum there
            if want.is_some_and(|w| w <= pen) {
                f.bracket = Some(format!("instance {i}: optimum {want:?} within penultimate {pen}"));
            }
        }
        let ops = s.forest_cuts + s.forest_links;
        let l = ceil_log2(s.candidate_vertices);
        let budget = 8 * s.candidate_edges * l * l;
        if ops > budget {
            f.budget = Some(format!("instance {i}: {ops} ops > budget {budget}"));
        }
    }
    f
}

fn shared_criteria(out: &mut Vec<Outcome>) {
    let n = 1000;
    let t = Instant::now();
    let findings: Vec<InstanceFindings> = (0..n).into_par_iter().map(run_instance).collect();
    let secs = t.elapsed().as_secs_f64();
    let found = findings.iter().filter(|f| f.found).count();
    let collect = |pick: fn(&InstanceFindings) -> &Option<String>| -> Vec<String> {
        findings.iter().filter_map(|f| pick(f).clone()).collect()
    };

    let mut v1 = collect(|f| &f.optimality);
    if secs >= 60.0 {
        v1.push(format!("suite took {secs:.1} s"));
    }
    out.push(report(
        1,
        "optimality agreement with brute force",
        &v1,
        format!("{n} instances, {found} with a result, {secs:.1} s"),
    ));
    out.push(report(
        2,
        "baseline agreement",
        &collect(|f| &f.baselines),
        format!("{n} instances x 3 baselines"),
    ));
    out.push(report(
        5,
        "expansion edge sum within 3x last radius",
        &collect(|f| &f.expansion),
        format!("{n} instances"),
    ));
    out.push(report(
        6,
        "lower bound below returned distance",
        &collect(|f| &f.lower_bound),
        format!("{found} results"),
    ));
    let bracketed = findings.iter().filter(|f| f.bracket_checked).count();
    out.push(report(
        7,
        "penultimate radius holds no group",
        &collect(|f| &f.bracket),
        format!("{bracketed} multi-step results"),
    ));
    out.push(report(
        8,
        "forest cut+link budget",
        &collect(|f| &f.budget),
        format!("{found} reducing runs"),
    ));
}

// ---------------------------------------------------------------------------
// Criterion 3: truss extraction against a cubic triangle oracle.

fn cubic_truss(n: usize, edges: &[Edge], c: usize) -> BTreeSet<Edge> {
    let mut adj = vec![vec![false; n]; n];
    for &(u, v) in edges {
        adj[u][v] = true;
        adj[v][u] = true;
    }
    loop {
        let mut drop = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if adj[u][v] {
                    let t = (0..n).filter(|&w| adj[u][w] && adj[v][w]).count();
                    if t + 2 < c {
                        drop.push((u, v));
                    }
                }
            }
        }
        if drop.is_empty() {
            break;
        }
        for (u, v) in drop {
            adj[u][v] = false;
            adj[v][u] = false;
        }
    }
    let mut out = BTreeSet::new();
    for u in 0..n {
        for v in u + 1..n {
            if adj[u][v] {
                out.insert((u, v));
            }
        }
    }
    out
}

fn truss_graph(i: usize) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(20_000 + i as u64);
    let n = rng.gen_range(3..=30);
    let p = rng.gen_range(0.1..0.7);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    let mut bad = Vec::new();
    for c in [3, 4, 5] {
        let got: BTreeSet<Edge> = extract_ctruss(&edges, c).into_iter().flat_map(|t| t.edges).collect();
        if got != cubic_truss(n, &edges, c) {
            bad.push(format!("graph {i}, c={c}: extraction differs"));
            continue;
        }
        let mut state = TrussState::new(&edges, c);
        state.peel(|_| {});
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        let mut alive = vec![true; n];
        for v in order {
            alive[v] = false;
            let _ = state.delete_vertex(v, |_| {});
            let rest: Vec<Edge> = edges.iter().copied().filter(|&(a, b)| alive[a] && alive[b]).collect();
            let want: Vec<Edge> = cubic_truss(n, &rest, c).into_iter().collect();
            if state.edges() != want {
                bad.push(format!("graph {i}, c={c}: decremental state wrong after deleting {v}"));
                break;
            }
        }
    }
    bad
}

fn truss_criterion(out: &mut Vec<Outcome>) {
    let n = 500;
    let bad: Vec<String> = (0..n).into_par_iter().flat_map(truss_graph).collect();
    out.push(report(
        3,
        "truss extraction and decremental maintenance",
        &bad,
        format!("{n} graphs x c in {{3,4,5}}"),
    ));
}

// ---------------------------------------------------------------------------
// Criterion 4: forest components and counters after every deletion.

fn forest_graph(i: usize) -> Option<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(30_000 + i as u64);
    let n = rng.gen_range(2..=60);
    let p = rng.gen_range(0.03..0.4);
    let k = rng.gen_range(1..=4);
    let rho = rng.gen_range(1..=3u32);
    let kw: Vec<usize> = (0..n).map(|_| rng.gen_range(0..=k)).collect();
    let slot = |v: usize| (kw[v] < k).then_some(kw[v]);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    let vertices: Vec<usize> = (0..n).collect();
    let mut f = KeywordSpanningForest::new(&vertices, &edges, slot, k, rho);
    let mut order = edges.clone();
    order.shuffle(&mut rng);
    let bound = ceil_log2(n);
    let mut alive: BTreeSet<Edge> = edges.iter().copied().collect();
    for (step, (u, v)) in order.into_iter().enumerate() {
        let flag = f.delete_edge(u, v).ok()?;
        alive.remove(&(u, v));
        // BFS recount
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in &alive {
            adj[a].push(b);
            adj[b].push(a);
        }
        let mut seen = vec![false; n];
        let mut want = Vec::new();
        for s in 0..n {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut comp = vec![s];
            let mut j = 0;
            while j < comp.len() {
                for &y in &adj[comp[j]] {
                    if !seen[y] {
                        seen[y] = true;
                        comp.push(y);
                    }
                }
                j += 1;
            }
            comp.sort_unstable();
            let mut counts = vec![0u32; k];
            for &x in &comp {
                if let Some(s) = slot(x) {
                    counts[s] += 1;
                }
            }
            want.push((comp, counts));
        }
        let got = f.components();
        let same = got.len() == want.len()
            && got
                .iter()
                .zip(&want)
                .all(|(c, (vs, counts))| &c.vertices == vs && &c.counts == counts);
        if !same {
            return Some(format!("graph {i}: components differ after deletion {step}"));
        }
        let any = want
            .iter()
            .any(|(vs, counts)| vs.len() >= 2 && counts.iter().all(|&x| x >= rho));
        if flag != any {
            return Some(format!("graph {i}: wrong satisfying flag after deletion {step}"));
        }
        if f.stats().max_level > bound {
            return Some(format!("graph {i}: level {} > {bound}", f.stats().max_level));
        }
    }
    None
}

fn forest_criterion(out: &mut Vec<Outcome>) {
    let n = 200;
    let bad: Vec<String> = (0..n).into_par_iter().filter_map(forest_graph).collect();
    out.push(report(
        4,
        "dynamic forest against BFS recount",
        &bad,
        format!("{n} graphs, full deletion streams"),
    ));
}

// ---------------------------------------------------------------------------
// Criterion 9: reports repeat byte for byte.

fn determinism_criterion(out: &mut Vec<Outcome>) {
    let mut bad = Vec::new();
    let plan = VerifyPlan {
        trials: 50,
        seed: 42,
        ..VerifyPlan::default()
    };
    let a = run_verify(&plan).render();
    if a != run_verify(&plan).render() {
        bad.push("verify reports differ".to_string());
    }
    let g = synthetic_graph(300, 8, 5, 42);
    let plan = BenchPlan {
        cells: vec![Cell { c: 4, phi: 2, rho: 2 }, Cell::DEFAULT],
        queries: 2,
        seed: 42,
        timing: false,
        ..BenchPlan::default()
    };
    let a = render_table(&run_bench(&g, &plan), &plan);
    if a != render_table(&run_bench(&g, &plan), &plan) {
        bad.push("bench tables differ".to_string());
    }
    out.push(report(
        9,
        "verify and bench determinism",
        &bad,
        "2 runs each with a fixed seed".into(),
    ));
}

fn main() {
    // `cargo test` passes harness flags; a name filter that excludes this
    // suite skips it
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.iter().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    if let Some(filter) = args.iter().find(|a| !a.starts_with('-')) {
        if !"acceptance".contains(filter.as_str()) {
            return;
        }
    }
    let mut out = Vec::new();
    shared_criteria(&mut out);
    truss_criterion(&mut out);
    forest_criterion(&mut out);
    determinism_criterion(&mut out);
    out.sort_by_key(|o| o.id);
    let mut failed = 0;
    for o in &out {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("{tag} criterion {}: {} ({})", o.id, o.name, o.detail);
        failed += !o.pass as usize;
    }
    println!("acceptance: {} passed, {failed} failed", out.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
