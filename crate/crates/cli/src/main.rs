use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use geotruss::baselines::BaselineKind;
use geotruss::bench::{render_table, run_bench, synthetic_graph, Algo, BenchPlan, Cell};
use geotruss::graph::DEFAULT_DELTA;
use geotruss::io::{emit_result, load_graph, load_query, Format, QuerySpec};
use geotruss::verify::{InstanceParams, VerifyPlan};
use geotruss::{search, GeoSocialGraph, GroupResult, Query, SearchConfig};

#[derive(Parser)]
#[command(name = "geotruss", version, about = "Geo-social group search over keyword-labelled graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Answer one query.
    Query(QueryArgs),
    /// Sweep parameters over random queries and print a TSV table.
    Bench(BenchArgs),
    /// Run the randomized agreement suite.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct GraphArgs {
    /// Vertex file: id, x, y, keyword per tab-separated line.
    #[arg(long)]
    vertices: Option<PathBuf>,
    /// Edge file: two vertex ids per tab-separated line.
    #[arg(long)]
    edges: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgoArg {
    Mkasg,
    Inc,
    Dec,
    Bin,
    All,
}

impl AlgoArg {
    fn algos(self) -> Vec<Algo> {
        match self {
            AlgoArg::Mkasg => vec![Algo::Mkasg],
            AlgoArg::Inc => vec![Algo::Baseline(BaselineKind::Incremental)],
            AlgoArg::Dec => vec![Algo::Baseline(BaselineKind::Decremental)],
            AlgoArg::Bin => vec![Algo::Baseline(BaselineKind::BinarySearch)],
            AlgoArg::All => Algo::ALL.to_vec(),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Tsv,
}

#[derive(Args)]
struct QueryArgs {
    #[command(flatten)]
    graph: GraphArgs,
    /// JSON query file; replaces the individual query flags.
    #[arg(long, conflicts_with_all = ["lambda", "keywords", "rho", "c", "delta"])]
    query: Option<PathBuf>,
    /// Query location as X,Y.
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    lambda: Option<[f64; 2]>,
    /// Comma-separated query keywords.
    #[arg(long, value_delimiter = ',')]
    keywords: Vec<String>,
    #[arg(long)]
    rho: Option<usize>,
    #[arg(long)]
    c: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_DELTA)]
    delta: f64,
    #[arg(long, value_enum, default_value = "mkasg")]
    algo: AlgoArg,
    #[arg(long, value_enum, default_value = "json")]
    format: FormatArg,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    graph: GraphArgs,
    /// Use a random geometric graph with this many vertices instead of files.
    #[arg(long, conflicts_with_all = ["vertices", "edges"])]
    synthetic: Option<usize>,
    /// Nearest neighbours joined per synthetic vertex.
    #[arg(long, default_value_t = 10)]
    synthetic_degree: usize,
    /// Keyword alphabet size of the synthetic graph.
    #[arg(long, default_value_t = 10)]
    synthetic_keywords: usize,
    #[arg(long, value_enum, default_value = "all")]
    algo: AlgoArg,
    /// Queries per grid cell.
    #[arg(long, default_value_t = 10)]
    queries: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_DELTA)]
    delta: f64,
    /// Restrict the sweep to a single cell; unset values take the defaults.
    #[arg(long)]
    c: Option<usize>,
    #[arg(long)]
    phi: Option<usize>,
    #[arg(long)]
    rho: Option<usize>,
    /// Print `-` for time columns so the table is reproducible.
    #[arg(long)]
    no_timing: bool,
    #[arg(long, value_enum, default_value = "tsv")]
    format: FormatArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum Fault {
    SkipCascade,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    /// Largest instance size.
    #[arg(long, default_value_t = 40)]
    max_n: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Run a deliberately broken pipeline.
    #[arg(long, value_enum)]
    inject_fault: Option<Fault>,
    /// Write the first counterexample as vertices.tsv, edges.tsv and
    /// query.json into this directory.
    #[arg(long)]
    dump_dir: Option<PathBuf>,
}

fn parse_point(s: &str) -> Result<[f64; 2], String> {
    let (x, y) = s
        .split_once(',')
        .ok_or_else(|| format!("expected X,Y, got `{s}`"))?;
    let p = |t: &str| {
        t.trim()
            .parse::<f64>()
            .map_err(|_| format!("bad coordinate `{t}`"))
    };
    Ok([p(x)?, p(y)?])
}

type CliResult = Result<ExitCode, String>;

fn load(args: &GraphArgs) -> Result<GeoSocialGraph, String> {
    let (Some(v), Some(e)) = (&args.vertices, &args.edges) else {
        return Err("both --vertices and --edges are required".into());
    };
    let (g, report) = load_graph(v, e).map_err(|e| e.to_string())?;
    if report.duplicate_edges > 0 || report.self_loops > 0 {
        eprintln!(
            "warning: dropped {} duplicate edges and {} self-loops",
            report.duplicate_edges, report.self_loops
        );
    }
    eprintln!("loaded {} vertices, {} edges", report.vertices, report.edges);
    Ok(g)
}

fn resolve_query(args: &QueryArgs, g: &GeoSocialGraph) -> Result<Query, String> {
    if let Some(path) = &args.query {
        return load_query(path, g).map_err(|e| e.to_string());
    }
    let missing = |name: &str| format!("missing --{name} (or pass --query FILE)");
    let spec = QuerySpec {
        lambda: args.lambda.ok_or_else(|| missing("lambda"))?,
        keywords: args.keywords.clone(),
        rho: args.rho.ok_or_else(|| missing("rho"))?,
        c: args.c.ok_or_else(|| missing("c"))?,
        delta: args.delta,
    };
    spec.resolve(g).map_err(|e| e.to_string())
}

fn format_of(f: FormatArg) -> Format {
    match f {
        FormatArg::Json => Format::Json,
        FormatArg::Tsv => Format::Tsv,
    }
}

fn run_algo(algo: Algo, g: &GeoSocialGraph, q: &Query) -> Result<Option<GroupResult>, String> {
    match algo {
        Algo::Mkasg => search(g, q, &SearchConfig::default())
            .map(|out| out.group)
            .map_err(|e| e.to_string()),
        Algo::Baseline(k) => Ok(k.run(g, q)),
    }
}

fn cmd_query(args: QueryArgs) -> CliResult {
    let g = load(&args.graph)?;
    let q = resolve_query(&args, &g)?;
    let format = format_of(args.format);
    let algos = args.algo.algos();
    for &algo in &algos {
        let r = run_algo(algo, &g, &q)?;
        if algos.len() > 1 {
            match format {
                Format::Json => print!("{{\"algo\":\"{}\",\"result\":", algo.name()),
                Format::Tsv => println!("algo\t{}", algo.name()),
            }
        }
        let text = emit_result(r.as_ref(), &g, format);
        if algos.len() > 1 && matches!(format, Format::Json) {
            println!("{}}}", text.trim_end());
        } else {
            print!("{text}");
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_bench(args: BenchArgs) -> CliResult {
    if !matches!(args.format, FormatArg::Tsv) {
        return Err("bench only writes tsv".into());
    }
    if args.queries == 0 {
        return Err("--queries must be at least 1".into());
    }
    if !(args.delta > 1.0 && args.delta.is_finite()) {
        return Err(format!("invalid value `{}` for parameter `delta`", args.delta));
    }
    let g = match args.synthetic {
        Some(n) => synthetic_graph(n, args.synthetic_degree, args.synthetic_keywords, args.seed),
        None => load(&args.graph)?,
    };
    let cells = if args.c.is_some() || args.phi.is_some() || args.rho.is_some() {
        let d = Cell::DEFAULT;
        vec![Cell {
            c: args.c.unwrap_or(d.c),
            phi: args.phi.unwrap_or(d.phi),
            rho: args.rho.unwrap_or(d.rho),
        }]
    } else {
        BenchPlan::sweep()
    };
    if cells.iter().any(|c| c.c < 2 || c.rho < 1 || c.phi < 1) {
        return Err("cells need c >= 2, rho >= 1 and phi >= 1".into());
    }
    let plan = BenchPlan {
        algos: args.algo.algos(),
        cells,
        queries: args.queries,
        seed: args.seed,
        delta: args.delta,
        timing: !args.no_timing,
    };
    print!("{}", render_table(&run_bench(&g, &plan), &plan));
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(args: VerifyArgs) -> CliResult {
    let plan = VerifyPlan {
        trials: args.trials,
        seed: args.seed,
        params: InstanceParams {
            max_n: args.max_n,
            ..InstanceParams::default()
        },
        search: match args.inject_fault {
            Some(Fault::SkipCascade) => SearchConfig::faulty(),
            None => SearchConfig::default(),
        },
    };
    let report = geotruss::verify::run_verify(&plan);
    print!("{}", report.render());
    if let (Some(dir), Some(f)) = (&args.dump_dir, report.failures.first()) {
        write_dump(dir, &f.dump).map_err(|e| e.to_string())?;
    }
    Ok(if report.ok() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn write_dump(dir: &PathBuf, dump: &str) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    let body = dump.trim_start_matches("--- vertices\n");
    let (vt, rest) = body.split_once("--- edges\n").unwrap_or((body, ""));
    let (et, query) = rest.split_once("--- query\n").unwrap_or((rest, ""));
    fs::write(dir.join("vertices.tsv"), vt)?;
    fs::write(dir.join("edges.tsv"), et)?;
    fs::write(dir.join("query.json"), query)
}

fn configure_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("GST_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("GST_THREADS must be a positive integer, got `{v}`"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| match cli.command {
        Command::Query(a) => cmd_query(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Verify(a) => cmd_verify(a),
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
