//! Graph and query loading, result emission.
//!
//! Vertex files hold `id<TAB>x<TAB>y<TAB>keyword` rows, edge files `u<TAB>v`
//! rows. Blank lines and lines starting with `#` are ignored. External ids
//! are mapped to dense ids in lexicographic order, so the loaded graph does
//! not depend on line order.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{IngestError, QueryError};
use crate::graph::{
    GeoSocialGraph, GroupResult, KeywordDict, Point, Query, SearchStats, VertexAttr,
    DEFAULT_DELTA,
};

/// What loading saw besides the graph itself.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct LoadReport {
    pub vertices: usize,
    pub edges: usize,
    pub self_loops: usize,
    pub duplicate_edges: usize,
}

fn rows(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            None
        } else {
            Some((i + 1, line.split('\t').map(str::trim).collect()))
        }
    })
}

fn parse_error(path: &str, line: usize, reason: impl Into<String>) -> IngestError {
    IngestError::Parse {
        path: path.to_owned(),
        line,
        reason: reason.into(),
    }
}

/// Parses vertex and edge file contents. `names` label the sources in
/// error messages.
pub fn parse_graph(
    vertex_text: &str,
    edge_text: &str,
    names: (&str, &str),
) -> Result<(GeoSocialGraph, LoadReport), IngestError> {
    let mut records: BTreeMap<String, (f64, f64, String)> = BTreeMap::new();
    for (line, f) in rows(vertex_text) {
        if f.len() != 4 {
            return Err(parse_error(
                names.0,
                line,
                format!("expected 4 tab-separated fields, found {}", f.len()),
            ));
        }
        let coord = |s: &str, axis: &str| {
            s.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| parse_error(names.0, line, format!("bad {axis} coordinate `{s}`")))
        };
        let (x, y) = (coord(f[1], "x")?, coord(f[2], "y")?);
        if f[0].is_empty() || f[3].is_empty() {
            return Err(parse_error(names.0, line, "empty id or keyword"));
        }
        if records
            .insert(f[0].to_owned(), (x, y, f[3].to_owned()))
            .is_some()
        {
            return Err(IngestError::DuplicateVertex(f[0].to_owned()));
        }
    }

    // keywords are interned in first-seen order of the sorted vertex list
    let mut dict = KeywordDict::new();
    let mut ids: HashMap<&str, usize> = HashMap::with_capacity(records.len());
    let mut attrs = Vec::with_capacity(records.len());
    let mut labels = Vec::with_capacity(records.len());
    for (i, (id, (x, y, kw))) in records.iter().enumerate() {
        ids.insert(id, i);
        attrs.push(VertexAttr {
            pos: Point::new(*x, *y),
            keyword: dict.intern(kw),
        });
        labels.push(id.clone());
    }

    let mut edges = Vec::new();
    for (line, f) in rows(edge_text) {
        if f.len() != 2 {
            return Err(parse_error(
                names.1,
                line,
                format!("expected 2 tab-separated fields, found {}", f.len()),
            ));
        }
        let lookup = |s: &str| {
            ids.get(s)
                .copied()
                .ok_or_else(|| IngestError::DanglingEdge(s.to_owned()))
        };
        edges.push((lookup(f[0])?, lookup(f[1])?));
    }

    let (g, build) = GeoSocialGraph::from_parts(attrs, edges, dict);
    let g = g.with_labels(labels);
    let report = LoadReport {
        vertices: g.n(),
        edges: g.m(),
        self_loops: build.self_loops,
        duplicate_edges: build.duplicate_edges,
    };
    Ok((g, report))
}

pub fn load_graph(
    vertex_path: &Path,
    edge_path: &Path,
) -> Result<(GeoSocialGraph, LoadReport), IngestError> {
    let vt = fs::read_to_string(vertex_path)?;
    let et = fs::read_to_string(edge_path)?;
    parse_graph(
        &vt,
        &et,
        (
            &vertex_path.display().to_string(),
            &edge_path.display().to_string(),
        ),
    )
}

/// Renders `g` in the vertex and edge file formats.
pub fn format_graph(g: &GeoSocialGraph) -> (String, String) {
    let mut vt = String::new();
    for v in 0..g.n() {
        let p = g.pos(v);
        let kw = g.keywords().name(g.keyword(v)).unwrap_or("?");
        writeln!(vt, "{}\t{}\t{}\t{}", g.label(v), p.x, p.y, kw).unwrap();
    }
    let mut et = String::new();
    for (u, v) in g.edges() {
        writeln!(et, "{}\t{}", g.label(u), g.label(v)).unwrap();
    }
    (vt, et)
}

pub fn write_graph(g: &GeoSocialGraph, vertex_path: &Path, edge_path: &Path) -> std::io::Result<()> {
    let (vt, et) = format_graph(g);
    fs::write(vertex_path, vt)?;
    fs::write(edge_path, et)
}

/// A query in external terms, as given on the command line or in a JSON
/// file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuerySpec {
    pub lambda: [f64; 2],
    pub keywords: Vec<String>,
    pub rho: usize,
    pub c: usize,
    #[serde(default = "default_delta")]
    pub delta: f64,
}

fn default_delta() -> f64 {
    DEFAULT_DELTA
}

impl QuerySpec {
    /// Interns the keywords against `g` and validates the parameters.
    pub fn resolve(&self, g: &GeoSocialGraph) -> Result<Query, QueryError> {
        let phi = self
            .keywords
            .iter()
            .map(|k| {
                g.keywords()
                    .get(k)
                    .ok_or_else(|| QueryError::UnknownKeyword(k.clone()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Query::new(
            Point::new(self.lambda[0], self.lambda[1]),
            phi,
            self.rho,
            self.c,
            self.delta,
        )
    }

    /// The external form of `q` over `g`.
    pub fn from_query(q: &Query, g: &GeoSocialGraph) -> Self {
        Self {
            lambda: [q.lambda.x, q.lambda.y],
            keywords: q
                .phi()
                .iter()
                .map(|&k| g.keywords().name(k).unwrap_or("?").to_owned())
                .collect(),
            rho: q.rho,
            c: q.c,
            delta: q.delta,
        }
    }
}

pub fn load_query(path: &Path, g: &GeoSocialGraph) -> Result<Query, IngestError> {
    let text = fs::read_to_string(path)?;
    let spec: QuerySpec = serde_json::from_str(&text).map_err(|e| IngestError::Parse {
        path: path.display().to_string(),
        line: e.line(),
        reason: e.to_string(),
    })?;
    Ok(spec.resolve(g)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Tsv,
}

#[derive(Serialize)]
struct Found<'a> {
    found: bool,
    dist: f64,
    vertices: Vec<String>,
    edges: Vec<[String; 2]>,
    stats: &'a SearchStats,
}

#[derive(Serialize)]
struct NotFound {
    found: bool,
}

/// Renders a result. Vertices are listed by dense id, which is also the
/// sorted order of their external ids.
pub fn emit_result(r: Option<&GroupResult>, g: &GeoSocialGraph, format: Format) -> String {
    match (format, r) {
        (Format::Json, None) => {
            serde_json::to_string(&NotFound { found: false }).expect("plain struct") + "\n"
        }
        (Format::Json, Some(r)) => {
            let out = Found {
                found: true,
                dist: r.dist,
                vertices: r.vertices.iter().map(|&v| g.label(v)).collect(),
                edges: r.edges.iter().map(|&(u, v)| [g.label(u), g.label(v)]).collect(),
                stats: &r.stats,
            };
            serde_json::to_string(&out).expect("plain struct") + "\n"
        }
        (Format::Tsv, None) => "found\tfalse\n".to_owned(),
        (Format::Tsv, Some(r)) => {
            let mut s = String::new();
            writeln!(s, "found\ttrue").unwrap();
            writeln!(s, "dist\t{}", r.dist).unwrap();
            for &v in &r.vertices {
                let p = g.pos(v);
                let kw = g.keywords().name(g.keyword(v)).unwrap_or("?");
                writeln!(s, "vertex\t{}\t{}\t{}\t{}", g.label(v), p.x, p.y, kw).unwrap();
            }
            for &(u, v) in &r.edges {
                writeln!(s, "edge\t{}\t{}", g.label(u), g.label(v)).unwrap();
            }
            let stats = serde_json::to_value(&r.stats).expect("plain struct");
            if let serde_json::Value::Object(map) = stats {
                for (k, v) in map {
                    writeln!(s, "stat\t{k}\t{v}").unwrap();
                }
            }
            s
        }
    }
}
