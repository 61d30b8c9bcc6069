use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use contactreach::bench::{
    argmin, run_bench, to_csv, tune_graph_depth, tune_graph_resolutions, tune_grid_spatial, tune_grid_temporal,
    BenchEngine, BenchError, BenchOptions, Indexes, Mismatch, TunePoint,
};
use contactreach::block_store::{DEFAULT_BUFFER_BLOCKS, DEFAULT_PAGE_SIZE};
use contactreach::contacts::ContactSet;
use contactreach::oracle::Oracle;
use contactreach::reachgraph::{
    Engine, GraphIndexParams, Placement, ReachGraph, ReachGraphIndex, DEFAULT_PARTITION_DEPTH, DEFAULT_RESOLUTIONS,
};
use contactreach::reachgrid::{build_grid, GridIndex, GridParams, DEFAULT_BUCKET_TICKS};
use contactreach::spj::SpjStore;
use contactreach::trajectory::TrajectorySet;
use contactreach::workload::{gen_queries, gen_road_grid, gen_rwp, QueryWorkload, RoadGridParams, RwpParams};
use contactreach::ReachabilityQuery;

#[derive(Parser)]
#[command(name = "contactreach", version, about = "Reachability queries over contact networks")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Global {
    /// Seed for every generator and random placement.
    #[arg(long, global = true, default_value_t = 7)]
    seed: u64,
    #[arg(long, global = true, default_value_t = DEFAULT_PAGE_SIZE)]
    page_size: usize,
    /// Buffer pool size per query, in blocks.
    #[arg(long, global = true, default_value_t = DEFAULT_BUFFER_BLOCKS)]
    buffer_blocks: usize,
    /// Output file (or manifest path for `build`); stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate trajectories or a query workload.
    Generate {
        #[command(subcommand)]
        what: Generate,
    },
    /// Extract the contact set of a trajectory file.
    Extract {
        #[arg(long)]
        trajectories: PathBuf,
    },
    /// Build an index and print construction statistics.
    Build {
        #[arg(value_enum)]
        kind: IndexKind,
        #[arg(long)]
        trajectories: PathBuf,
        #[command(flatten)]
        tuning: Tuning,
    },
    /// Answer one query against a built index.
    Query {
        /// Index manifest.
        #[arg(long)]
        index: PathBuf,
        /// Graph engine; ignored for a grid index.
        #[arg(long, default_value = "bm-bfs")]
        engine: String,
        #[arg(long)]
        source: u32,
        #[arg(long)]
        destination: u32,
        #[arg(long)]
        start: u32,
        #[arg(long)]
        end: u32,
    },
    /// Run engines over a workload and write per-query CSV.
    Bench {
        #[command(flatten)]
        inputs: BenchInputs,
        /// Also time each query against resident blocks (not reproducible).
        #[arg(long)]
        timing: bool,
    },
    /// Sweep one tuning parameter and write mean IO per setting as CSV.
    Tune {
        #[arg(value_enum)]
        sweep: Sweep,
        #[arg(long)]
        trajectories: PathBuf,
        #[arg(long)]
        queries: PathBuf,
        /// Values to sweep; defaults depend on the sweep.
        #[arg(long, value_delimiter = ',')]
        values: Vec<f64>,
        #[command(flatten)]
        tuning: Tuning,
    },
    /// Check every engine against the oracle on a workload.
    Verify {
        #[command(flatten)]
        inputs: BenchInputs,
    },
}

#[derive(Subcommand)]
enum Generate {
    /// Random-waypoint walkers.
    Rwp {
        #[arg(long, default_value_t = RwpParams::desk().n_objects)]
        objects: u32,
        #[arg(long, default_value_t = RwpParams::desk().duration_ticks)]
        ticks: u32,
        #[arg(long, default_value_t = RwpParams::desk().width)]
        width: f64,
        #[arg(long, default_value_t = RwpParams::desk().d_t)]
        d_t: f64,
    },
    /// Vehicles on a Manhattan road grid.
    Road {
        #[arg(long, default_value_t = RoadGridParams::desk().n_objects)]
        objects: u32,
        #[arg(long, default_value_t = RoadGridParams::desk().duration_ticks)]
        ticks: u32,
    },
    /// Random queries over the horizon of a trajectory file.
    Queries {
        #[arg(long)]
        trajectories: PathBuf,
        #[arg(long, default_value_t = 400)]
        count: usize,
        /// Interval length range as a fraction of the horizon.
        #[arg(long, default_value_t = 0.15)]
        min_len: f64,
        #[arg(long, default_value_t = 0.35)]
        max_len: f64,
    },
}

#[derive(Copy, Clone, ValueEnum)]
enum IndexKind {
    Reachgraph,
    Reachgrid,
}

#[derive(Copy, Clone, ValueEnum)]
enum Sweep {
    /// ReachGrid `R_S` with `R_T` fixed.
    GridSpatial,
    /// ReachGrid `R_T` with `R_S` fixed.
    GridTemporal,
    /// BM-BFS partition depth.
    GraphDepth,
    /// BM-BFS number of resolutions `2, 4, .., 2^k`.
    GraphResolutions,
}

#[derive(Args, Clone)]
struct Tuning {
    #[arg(long, default_value_t = DEFAULT_PARTITION_DEPTH)]
    d_p: u32,
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_RESOLUTIONS)]
    resolutions: Vec<u32>,
    /// `topological` or `random:<seed>`.
    #[arg(long, default_value = "topological")]
    placement: String,
    #[arg(long, default_value_t = DEFAULT_BUCKET_TICKS)]
    r_t: u32,
    /// Cell side; defaults to an eighth of the environment width.
    #[arg(long)]
    r_s: Option<f64>,
}

#[derive(Args)]
struct BenchInputs {
    #[arg(long)]
    trajectories: PathBuf,
    #[arg(long)]
    queries: PathBuf,
    /// ReachGraph manifest, needed by the graph engines.
    #[arg(long)]
    graph: Option<PathBuf>,
    /// ReachGrid manifest, needed by `reachgrid`.
    #[arg(long)]
    grid: Option<PathBuf>,
    /// Engines to run; all engines whose index is available by default.
    #[arg(long, value_delimiter = ',')]
    engines: Vec<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_set(path: &Path) -> Result<TrajectorySet<f64>> {
    TrajectorySet::read_file(path).with_context(|| format!("reading trajectories {}", path.display()))
}

fn load_queries(path: &Path) -> Result<QueryWorkload> {
    let text = fs::read_to_string(path).with_context(|| format!("reading queries {}", path.display()))?;
    Ok(QueryWorkload::parse(&text, &path.display().to_string())?)
}

fn graph_params(g: &Global, t: &Tuning) -> Result<GraphIndexParams> {
    let placement: Placement = t.placement.parse()?;
    Ok(GraphIndexParams { d_p: t.d_p, placement, page_size: g.page_size })
}

fn grid_params(g: &Global, t: &Tuning, set: &TrajectorySet<f64>) -> GridParams<f64> {
    let r_s = t.r_s.unwrap_or(set.config.environment.width / 8.0);
    GridParams { r_t: t.r_t, r_s, page_size: g.page_size }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let g = cli.global;
    match cli.command {
        Command::Generate { what } => generate(&g, what)?,
        Command::Extract { trajectories } => {
            let cs = ContactSet::from_trajectories(&load_set(&trajectories)?);
            eprintln!("{} contacts", cs.len());
            emit(&g.out, &cs.to_text())?;
        }
        Command::Build { kind, trajectories, tuning } => build(&g, kind, &trajectories, &tuning)?,
        Command::Query { index, engine, source, destination, start, end } => {
            let q = ReachabilityQuery::new(source, destination, start, end);
            let text = fs::read_to_string(&index).with_context(|| format!("reading {}", index.display()))?;
            let (reachable, io) = if text.lines().any(|l| l.trim() == "kind=reachgrid") {
                let grid = GridIndex::<f64>::open(&index)?;
                let mut reader = grid.store().reader(g.buffer_blocks);
                let a = grid.query(&q, &mut reader)?;
                (a.reachable, a.io)
            } else {
                let graph = ReachGraphIndex::open(&index)?;
                let engine: Engine = engine.parse()?;
                let a = graph.query_with_buffer(engine, &q, g.buffer_blocks)?;
                (a.reachable, a.io)
            };
            let verdict = if reachable { "reachable" } else { "not reachable" };
            let line = format!(
                "{q}: {verdict} (random {} sequential {} normalized {:.2})\n",
                io.random_reads, io.sequential_reads, io.normalized_cost
            );
            emit(&g.out, &line)?;
        }
        Command::Bench { inputs, timing } => return bench(&g, &inputs, timing, true),
        Command::Verify { inputs } => return bench(&g, &inputs, false, false),
        Command::Tune { sweep, trajectories, queries, values, tuning } => {
            tune(&g, sweep, &trajectories, &queries, &values, &tuning)?
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn generate(g: &Global, what: Generate) -> Result<()> {
    match what {
        Generate::Rwp { objects, ticks, width, d_t } => {
            let p = RwpParams {
                n_objects: objects,
                duration_ticks: ticks,
                width,
                height: width,
                d_t,
                seed: g.seed,
                ..RwpParams::desk()
            };
            emit(&g.out, &gen_rwp::<f64>(&p)?.to_text())
        }
        Generate::Road { objects, ticks } => {
            let p = RoadGridParams { n_objects: objects, duration_ticks: ticks, seed: g.seed, ..RoadGridParams::desk() };
            emit(&g.out, &gen_road_grid::<f64>(&p)?.to_text())
        }
        Generate::Queries { trajectories, count, min_len, max_len } => {
            let set = load_set(&trajectories)?;
            let n = set.n_ticks() as f64;
            let lo = ((min_len * n).round() as u32).max(1);
            let hi = ((max_len * n).round() as u32).max(lo);
            let w = gen_queries(set.horizon(), set.n_objects(), count, (lo, hi), g.seed)?;
            emit(&g.out, &w.to_text())
        }
    }
}

fn build(g: &Global, kind: IndexKind, trajectories: &Path, tuning: &Tuning) -> Result<()> {
    let set = load_set(trajectories)?;
    let Some(out) = &g.out else { bail!("build needs --out <manifest>") };
    match kind {
        IndexKind::Reachgraph => {
            let cs = ContactSet::from_trajectories(&set);
            let (ten, h) = ReachGraph::from_contacts(&cs, &tuning.resolutions)?;
            let index = ReachGraphIndex::build(&h, graph_params(g, tuning)?)?;
            index.save(out)?;
            let s = index.stats();
            let shrink = |after: u64, before: u64| 100.0 * (1.0 - after as f64 / before.max(1) as f64);
            println!("contacts {}", cs.len());
            println!("ten vertices {} edges {}", ten.vertex_count(), ten.edge_count());
            println!(
                "dag vertices {} ({:.1}% fewer) edges {} ({:.1}% fewer)",
                s.dag_vertices,
                shrink(s.dag_vertices as u64, ten.vertex_count()),
                s.dag_edges,
                shrink(s.dag_edges as u64, ten.edge_count())
            );
            println!("long edges {} partitions {} blocks {}", s.long_edges, s.partitions, s.blocks);
        }
        IndexKind::Reachgrid => {
            let grid = build_grid(&set, grid_params(g, tuning, &set))?;
            grid.save(out)?;
            let geo = grid.geometry();
            println!("buckets {} cells per bucket {} ({} x {})", grid.n_buckets(), geo.n_cells(), geo.cols, geo.rows);
            println!("blocks {}", grid.store().len());
        }
    }
    Ok(())
}

fn write_bundle(g: &Global, inputs: &BenchInputs, m: &Mismatch) -> Result<PathBuf> {
    let path = match &g.out {
        Some(p) => p.with_extension("mismatch"),
        None => PathBuf::from("contactreach.mismatch"),
    };
    let q = &m.query;
    let mut text = format!("# {m}\n");
    text.push_str(&format!("engine={}\nquery_id={}\n", m.engine, m.query_id));
    text.push_str(&format!("query={},{},{},{}\n", q.source.0, q.destination.0, q.t1(), q.t2()));
    text.push_str(&format!("expected={}\ngot={}\n", m.expected, m.got));
    text.push_str(&format!("trajectories={}\nqueries={}\n", inputs.trajectories.display(), inputs.queries.display()));
    for (k, v) in [("graph", &inputs.graph), ("grid", &inputs.grid)] {
        if let Some(p) = v {
            text.push_str(&format!("{k}={}\n", p.display()));
        }
    }
    text.push_str(&format!("seed={}\npage_size={}\nbuffer_blocks={}\n", g.seed, g.page_size, g.buffer_blocks));
    fs::write(&path, text)?;
    Ok(path)
}

fn bench(g: &Global, inputs: &BenchInputs, timing: bool, csv: bool) -> Result<ExitCode> {
    let set = load_set(&inputs.trajectories)?;
    let workload = load_queries(&inputs.queries)?;
    let oracle = Oracle::new(&ContactSet::from_trajectories(&set));
    let graph = inputs.graph.as_deref().map(ReachGraphIndex::open).transpose()?;
    let grid = inputs.grid.as_deref().map(GridIndex::<f64>::open).transpose()?;
    let spj = SpjStore::build(&set, g.page_size)?;
    let engines: Vec<BenchEngine> = if inputs.engines.is_empty() {
        BenchEngine::ALL
            .into_iter()
            .filter(|e| match e {
                BenchEngine::Spj => true,
                BenchEngine::ReachGrid => grid.is_some(),
                _ => graph.is_some(),
            })
            .collect()
    } else {
        inputs.engines.iter().map(|e| e.parse()).collect::<contactreach::Result<_>>()?
    };
    let indexes = Indexes { graph: graph.as_ref(), grid: grid.as_ref(), spj: Some(&spj) };
    let opts = BenchOptions { buffer_blocks: g.buffer_blocks, timing };
    match run_bench(&indexes, &oracle, &workload.queries, &engines, opts) {
        Ok(report) => {
            if csv {
                emit(&g.out, &report.records_csv()?)?;
                eprint!("{}", report.aggregates_csv()?);
            } else {
                for a in &report.aggregates {
                    println!("{}: {} queries agree with the oracle", a.engine, a.queries);
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Err(BenchError::Mismatch(m)) => {
            let bundle = write_bundle(g, inputs, &m)?;
            eprintln!("oracle mismatch: {m}");
            eprintln!("reproduction bundle written to {}", bundle.display());
            Ok(ExitCode::FAILURE)
        }
        Err(BenchError::Index(e)) => Err(e.into()),
    }
}

fn tune(g: &Global, sweep: Sweep, trajectories: &Path, queries: &Path, values: &[f64], tuning: &Tuning) -> Result<()> {
    let set = load_set(trajectories)?;
    let workload = load_queries(queries)?;
    let cs = ContactSet::from_trajectories(&set);
    let oracle = Oracle::new(&cs);
    let qs = &workload.queries;
    let (page, buf) = (g.page_size, g.buffer_blocks);
    let or = |defaults: Vec<f64>| if values.is_empty() { defaults } else { values.to_vec() };
    let ints = |v: Vec<f64>| v.into_iter().map(|x| x.round() as u32).collect::<Vec<_>>();
    let result = match sweep {
        Sweep::GridSpatial => {
            let w = set.config.environment.width;
            let rs = or([80.0, 40.0, 20.0, 10.0, 5.0, 2.5, 1.4, 1.0].iter().map(|d| w / d).collect());
            tune_grid_spatial(&set, &oracle, qs, tuning.r_t, &rs, page, buf)
        }
        Sweep::GridTemporal => {
            let r_s = grid_params(g, tuning, &set).r_s;
            let rt = ints(or(vec![1.0, 2.0, 5.0, 10.0, 20.0, 40.0, 80.0, 160.0]));
            tune_grid_temporal(&set, &oracle, qs, r_s, &rt, page, buf)
        }
        Sweep::GraphDepth => {
            let depths = ints(or(vec![1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0]));
            tune_graph_depth(&cs, &oracle, qs, &tuning.resolutions, &depths, page, buf)
        }
        Sweep::GraphResolutions => {
            let counts = ints(or(vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0]));
            tune_graph_resolutions(&cs, &oracle, qs, tuning.d_p, &counts, page, buf)
        }
    };
    let points: Vec<TunePoint> = match result {
        Ok(p) => p,
        Err(BenchError::Mismatch(m)) => bail!("oracle mismatch during tuning: {m}"),
        Err(BenchError::Index(e)) => return Err(e.into()),
    };
    emit(&g.out, &to_csv(&points)?)?;
    if let Some(i) = argmin(&points) {
        eprintln!("argmin {}={} mean normalized IO {:.2}", points[i].parameter, points[i].value, points[i].mean_io_normalized);
    }
    Ok(())
}
