//! Benchmark and tuning harness: runs engines over a query workload, checks
//! every answer against the oracle and reports per-query IO.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;

use crate::block_store::BlockStore;
use crate::contacts::ContactSet;
use crate::error::{Error, Result};
use crate::model::ReachabilityQuery;
use crate::oracle::Oracle;
use crate::reachgraph::{Engine, GraphIndexParams, ReachGraph, ReachGraphIndex};
use crate::reachgrid::{build_grid, GridIndex, GridParams};
use crate::scalar::Scalar;
use crate::spj::SpjStore;
use crate::trajectory::TrajectorySet;

pub const CSV_SCHEMA: &str = "# contactreach-bench v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BenchEngine {
    Spj,
    EDfs,
    BBfs,
    BmBfs,
    ReachGrid,
}

impl BenchEngine {
    pub const ALL: [BenchEngine; 5] =
        [BenchEngine::Spj, BenchEngine::EDfs, BenchEngine::BBfs, BenchEngine::BmBfs, BenchEngine::ReachGrid];

    pub fn name(self) -> &'static str {
        match self {
            BenchEngine::Spj => "spj",
            BenchEngine::EDfs => "e-dfs",
            BenchEngine::BBfs => "b-bfs",
            BenchEngine::BmBfs => "bm-bfs",
            BenchEngine::ReachGrid => "reachgrid",
        }
    }

    fn graph_engine(self) -> Option<Engine> {
        match self {
            BenchEngine::EDfs => Some(Engine::EDfs),
            BenchEngine::BBfs => Some(Engine::BBfs),
            BenchEngine::BmBfs => Some(Engine::BmBfs),
            _ => None,
        }
    }
}

impl fmt::Display for BenchEngine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BenchEngine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BenchEngine::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::InvalidParam(format!("unknown engine {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRecord {
    pub engine: String,
    pub query_id: usize,
    pub source: u32,
    pub destination: u32,
    pub start: u32,
    pub end: u32,
    pub result: bool,
    pub io_random: u64,
    pub io_sequential: u64,
    pub io_normalized: f64,
    /// Only filled when timing is requested; wall-clock is not reproducible.
    pub cpu_micros: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EngineAggregate {
    pub engine: String,
    pub queries: usize,
    pub reachable: usize,
    pub mean_io_random: f64,
    pub mean_io_sequential: f64,
    pub mean_io_normalized: f64,
    pub mean_cpu_micros: Option<f64>,
}

/// The indexes a bench run may draw on; engines without theirs are refused.
pub struct Indexes<'a, S> {
    pub graph: Option<&'a ReachGraphIndex>,
    pub grid: Option<&'a GridIndex<S>>,
    pub spj: Option<&'a SpjStore<S>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BenchOptions {
    pub buffer_blocks: usize,
    pub timing: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub records: Vec<BenchRecord>,
    pub aggregates: Vec<EngineAggregate>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mismatch {
    pub engine: BenchEngine,
    pub query_id: usize,
    pub query: ReachabilityQuery,
    pub expected: bool,
    pub got: bool,
}

impl fmt::Display for Mismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} answered {} for query #{} ({}), oracle says {}",
            self.engine, self.got, self.query_id, self.query, self.expected
        )
    }
}

#[derive(Debug)]
pub enum BenchError {
    Mismatch(Mismatch),
    Index(Error),
}

impl fmt::Display for BenchError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BenchError::Mismatch(m) => write!(f, "oracle mismatch: {m}"),
            BenchError::Index(e) => e.fmt(f),
        }
    }
}

impl std::error::Error for BenchError {}

impl From<Error> for BenchError {
    fn from(e: Error) -> Self {
        BenchError::Index(e)
    }
}

fn run_one<S: Scalar>(
    indexes: &Indexes<'_, S>,
    engine: BenchEngine,
    q: &ReachabilityQuery,
    store: &BlockStore,
    buffer_blocks: usize,
) -> Result<(bool, crate::block_store::IoReport)> {
    let mut reader = match buffer_blocks {
        usize::MAX => store.resident_reader(),
        n => store.reader(n),
    };
    let reader = &mut reader;
    Ok(match engine {
        BenchEngine::Spj => {
            let a = indexes.spj.expect("checked").query(q, reader)?;
            (a.reachable, a.io)
        }
        BenchEngine::ReachGrid => {
            let a = indexes.grid.expect("checked").query(q, reader)?;
            (a.reachable, a.io)
        }
        e => {
            let a = indexes.graph.expect("checked").query(e.graph_engine().expect("graph engine"), q, reader)?;
            (a.reachable, a.io)
        }
    })
}

impl<S: Scalar> Indexes<'_, S> {
    fn store(&self, engine: BenchEngine) -> Result<&BlockStore> {
        let store = match engine {
            BenchEngine::Spj => self.spj.map(|s| s.store()),
            BenchEngine::ReachGrid => self.grid.map(|g| g.store()),
            _ => self.graph.map(|g| g.store()),
        };
        store.ok_or_else(|| Error::InvalidParam(format!("engine {engine} needs an index that was not supplied")))
    }
}

/// Runs `engines` in order over `queries`, each query with a fresh buffer.
/// Stops at the first answer that disagrees with `oracle`.
pub fn run_bench<S: Scalar>(
    indexes: &Indexes<'_, S>,
    oracle: &Oracle,
    queries: &[ReachabilityQuery],
    engines: &[BenchEngine],
    opts: BenchOptions,
) -> std::result::Result<BenchReport, BenchError> {
    let expected: Vec<bool> = queries.iter().map(|q| oracle.reach(q).reachable).collect();
    let mut records = Vec::with_capacity(queries.len() * engines.len());
    let mut aggregates = Vec::new();
    for &engine in engines {
        let store = indexes.store(engine)?;
        let start = records.len();
        for (id, q) in queries.iter().enumerate() {
            let (got, io) = run_one(indexes, engine, q, store, opts.buffer_blocks)?;
            if got != expected[id] {
                return Err(BenchError::Mismatch(Mismatch { engine, query_id: id, query: *q, expected: expected[id], got }));
            }
            let cpu_micros = if opts.timing {
                let t0 = Instant::now();
                run_one(indexes, engine, q, store, usize::MAX)?;
                Some(t0.elapsed().as_micros() as u64)
            } else {
                None
            };
            records.push(BenchRecord {
                engine: engine.name().to_string(),
                query_id: id,
                source: q.source.0,
                destination: q.destination.0,
                start: q.t1(),
                end: q.t2(),
                result: got,
                io_random: io.random_reads,
                io_sequential: io.sequential_reads,
                io_normalized: io.normalized_cost,
                cpu_micros,
            });
        }
        aggregates.push(aggregate(engine, &records[start..]));
    }
    Ok(BenchReport { records, aggregates })
}

fn aggregate(engine: BenchEngine, rows: &[BenchRecord]) -> EngineAggregate {
    let n = rows.len().max(1) as f64;
    let mean = |f: &dyn Fn(&BenchRecord) -> f64| rows.iter().map(f).sum::<f64>() / n;
    EngineAggregate {
        engine: engine.name().to_string(),
        queries: rows.len(),
        reachable: rows.iter().filter(|r| r.result).count(),
        mean_io_random: mean(&|r| r.io_random as f64),
        mean_io_sequential: mean(&|r| r.io_sequential as f64),
        mean_io_normalized: mean(&|r| r.io_normalized),
        mean_cpu_micros: rows
            .iter()
            .map(|r| r.cpu_micros)
            .sum::<Option<u64>>()
            .filter(|_| !rows.is_empty())
            .map(|s| s as f64 / n),
    }
}

impl BenchReport {
    pub fn aggregate(&self, engine: BenchEngine) -> Option<&EngineAggregate> {
        self.aggregates.iter().find(|a| a.engine == engine.name())
    }

    pub fn records_csv(&self) -> Result<String> {
        to_csv(&self.records)
    }

    pub fn aggregates_csv(&self) -> Result<String> {
        to_csv(&self.aggregates)
    }
}

/// Serializes rows under the schema comment line.
pub fn to_csv<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::InvalidParam(e.to_string()))?;
    }
    let body = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(format!("{CSV_SCHEMA}\n{}", String::from_utf8(body).expect("csv output is utf-8")))
}

/// One point of a tuning sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TunePoint {
    pub parameter: String,
    pub value: f64,
    pub mean_io_normalized: f64,
}

fn mean_io<S: Scalar>(
    indexes: &Indexes<'_, S>,
    oracle: &Oracle,
    queries: &[ReachabilityQuery],
    engine: BenchEngine,
    buffer_blocks: usize,
) -> std::result::Result<f64, BenchError> {
    let opts = BenchOptions { buffer_blocks, timing: false };
    let report = run_bench(indexes, oracle, queries, &[engine], opts)?;
    Ok(report.aggregates[0].mean_io_normalized)
}

/// ReachGrid cost over `R_S` values with `R_T` fixed.
pub fn tune_grid_spatial<S: Scalar>(
    set: &TrajectorySet<S>,
    oracle: &Oracle,
    queries: &[ReachabilityQuery],
    r_t: u32,
    r_s_values: &[f64],
    page_size: usize,
    buffer_blocks: usize,
) -> std::result::Result<Vec<TunePoint>, BenchError> {
    r_s_values
        .iter()
        .map(|&r_s| {
            let grid = build_grid(set, GridParams { r_t, r_s: S::of(r_s), page_size })?;
            let idx = Indexes { graph: None, grid: Some(&grid), spj: None };
            let io = mean_io(&idx, oracle, queries, BenchEngine::ReachGrid, buffer_blocks)?;
            Ok(TunePoint { parameter: "r_s".into(), value: r_s, mean_io_normalized: io })
        })
        .collect()
}

/// ReachGrid cost over `R_T` values with `R_S` fixed.
pub fn tune_grid_temporal<S: Scalar>(
    set: &TrajectorySet<S>,
    oracle: &Oracle,
    queries: &[ReachabilityQuery],
    r_s: f64,
    r_t_values: &[u32],
    page_size: usize,
    buffer_blocks: usize,
) -> std::result::Result<Vec<TunePoint>, BenchError> {
    r_t_values
        .iter()
        .map(|&r_t| {
            let grid = build_grid(set, GridParams { r_t, r_s: S::of(r_s), page_size })?;
            let idx = Indexes { graph: None, grid: Some(&grid), spj: None };
            let io = mean_io(&idx, oracle, queries, BenchEngine::ReachGrid, buffer_blocks)?;
            Ok(TunePoint { parameter: "r_t".into(), value: r_t as f64, mean_io_normalized: io })
        })
        .collect()
}

/// BM-BFS cost over partition depths `d_p`.
pub fn tune_graph_depth(
    contacts: &ContactSet,
    oracle: &Oracle,
    queries: &[ReachabilityQuery],
    resolutions: &[u32],
    depths: &[u32],
    page_size: usize,
    buffer_blocks: usize,
) -> std::result::Result<Vec<TunePoint>, BenchError> {
    let (_, h) = ReachGraph::from_contacts(contacts, resolutions)?;
    depths
        .iter()
        .map(|&d_p| {
            let params = GraphIndexParams { d_p, page_size, ..GraphIndexParams::default() };
            let graph = ReachGraphIndex::build(&h, params)?;
            let idx: Indexes<'_, f64> = Indexes { graph: Some(&graph), grid: None, spj: None };
            let io = mean_io(&idx, oracle, queries, BenchEngine::BmBfs, buffer_blocks)?;
            Ok(TunePoint { parameter: "d_p".into(), value: d_p as f64, mean_io_normalized: io })
        })
        .collect()
}

/// BM-BFS cost with resolutions `2, 4, .., 2^k` for each `k` in `counts`.
pub fn tune_graph_resolutions(
    contacts: &ContactSet,
    oracle: &Oracle,
    queries: &[ReachabilityQuery],
    d_p: u32,
    counts: &[u32],
    page_size: usize,
    buffer_blocks: usize,
) -> std::result::Result<Vec<TunePoint>, BenchError> {
    counts
        .iter()
        .map(|&k| {
            let res: Vec<u32> = (1..=k).map(|i| 1 << i).collect();
            let (_, h) = ReachGraph::from_contacts(contacts, &res)?;
            let params = GraphIndexParams { d_p, page_size, ..GraphIndexParams::default() };
            let graph = ReachGraphIndex::build(&h, params)?;
            let idx: Indexes<'_, f64> = Indexes { graph: Some(&graph), grid: None, spj: None };
            let io = mean_io(&idx, oracle, queries, BenchEngine::BmBfs, buffer_blocks)?;
            Ok(TunePoint { parameter: "resolutions".into(), value: k as f64, mean_io_normalized: io })
        })
        .collect()
}

/// Index of the cheapest point; the first one on ties.
pub fn argmin(points: &[TunePoint]) -> Option<usize> {
    (0..points.len()).min_by(|&a, &b| points[a].mean_io_normalized.total_cmp(&points[b].mean_io_normalized))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixture::{self, O1, O2, O4};
    use crate::reachgraph::DEFAULT_RESOLUTIONS;
    use crate::testutil::rwp_set;
    use crate::workload::gen_queries;

    struct Built {
        graph: ReachGraphIndex,
        grid: GridIndex<f64>,
        spj: SpjStore<f64>,
        oracle: Oracle,
    }

    fn build(set: &TrajectorySet<f64>, r_s: f64) -> Built {
        let cs = ContactSet::from_trajectories(set);
        let (_, h) = ReachGraph::from_contacts(&cs, &DEFAULT_RESOLUTIONS).unwrap();
        let params = GraphIndexParams { page_size: 256, ..GraphIndexParams::default() };
        Built {
            graph: ReachGraphIndex::build(&h, params).unwrap(),
            grid: build_grid(set, GridParams { r_t: 2, r_s, page_size: 256 }).unwrap(),
            spj: SpjStore::build(set, 256).unwrap(),
            oracle: Oracle::new(&cs),
        }
    }

    impl Built {
        fn indexes(&self) -> Indexes<'_, f64> {
            Indexes { graph: Some(&self.graph), grid: Some(&self.grid), spj: Some(&self.spj) }
        }
    }

    #[test]
    fn engine_names_round_trip() {
        for e in BenchEngine::ALL {
            assert_eq!(e.name().parse::<BenchEngine>().unwrap(), e);
        }
        assert!("dijkstra".parse::<BenchEngine>().is_err());
    }

    #[test]
    fn figure_one_all_engines_agree() {
        let b = build(&fixture::figure_one(), 2.5);
        let queries = [
            ReachabilityQuery::new(O1.0, O4.0, 0, 1),
            ReachabilityQuery::new(O4.0, O1.0, 0, 1),
            ReachabilityQuery::new(O1.0, O2.0, 2, 3),
        ];
        let opts = BenchOptions { buffer_blocks: 8, timing: true };
        let r = run_bench(&b.indexes(), &b.oracle, &queries, &BenchEngine::ALL, opts).unwrap();
        assert_eq!(r.records.len(), 15);
        assert!(r.records.iter().all(|x| x.cpu_micros.is_some()));
        for a in &r.aggregates {
            assert_eq!((a.queries, a.reachable), (3, 2));
        }
        let csv = r.records_csv().unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(CSV_SCHEMA));
        assert!(lines.next().unwrap().starts_with("engine,query_id,source,destination"));
        assert_eq!(lines.count(), 15);
    }

    #[test]
    fn missing_index_is_refused() {
        let b = build(&fixture::figure_one(), 2.5);
        let idx: Indexes<'_, f64> = Indexes { graph: Some(&b.graph), grid: None, spj: None };
        let q = [ReachabilityQuery::new(0, 1, 0, 1)];
        let opts = BenchOptions { buffer_blocks: 8, timing: false };
        assert!(matches!(
            run_bench(&idx, &b.oracle, &q, &[BenchEngine::ReachGrid], opts),
            Err(BenchError::Index(Error::InvalidParam(_)))
        ));
    }

    #[test]
    fn wrong_oracle_is_a_mismatch() {
        let b = build(&fixture::figure_one(), 2.5);
        let empty = Oracle::from_pairs(4, vec![Vec::new(); 4]);
        let q = [ReachabilityQuery::new(O1.0, O4.0, 0, 1)];
        let opts = BenchOptions { buffer_blocks: 8, timing: false };
        match run_bench(&b.indexes(), &empty, &q, &[BenchEngine::BmBfs], opts) {
            Err(BenchError::Mismatch(m)) => assert_eq!((m.query_id, m.expected, m.got), (0, false, true)),
            other => panic!("expected a mismatch, got {other:?}"),
        }
    }

    #[test]
    fn untimed_runs_are_deterministic() {
        let set = rwp_set(5, 25, 80);
        let b = build(&set, 30.0);
        let w = gen_queries(set.horizon(), 25, 30, (12, 28), 9).unwrap();
        let opts = BenchOptions { buffer_blocks: 16, timing: false };
        let a = run_bench(&b.indexes(), &b.oracle, &w.queries, &BenchEngine::ALL, opts).unwrap();
        let c = run_bench(&b.indexes(), &b.oracle, &w.queries, &BenchEngine::ALL, opts).unwrap();
        assert_eq!(a.records_csv().unwrap(), c.records_csv().unwrap());
        assert!(a.records.iter().all(|r| r.cpu_micros.is_none()));
        assert!(a.aggregate(BenchEngine::Spj).unwrap().mean_io_normalized > 0.0);
    }

    #[test]
    fn tune_sweeps_report_every_setting() {
        let set = rwp_set(8, 20, 60);
        let cs = ContactSet::from_trajectories(&set);
        let oracle = Oracle::new(&cs);
        let w = gen_queries(set.horizon(), 20, 10, (10, 20), 1).unwrap();
        let pts = tune_grid_spatial(&set, &oracle, &w.queries, 10, &[10.0, 150.0], 256, 16).unwrap();
        assert_eq!(pts.len(), 2);
        let pts = tune_grid_temporal(&set, &oracle, &w.queries, 30.0, &[1, 5, 60], 256, 16).unwrap();
        assert_eq!(pts.iter().map(|p| p.value).collect::<Vec<_>>(), vec![1.0, 5.0, 60.0]);
        let pts = tune_graph_depth(&cs, &oracle, &w.queries, &[2, 4], &[1, 8], 256, 16).unwrap();
        assert!(pts.iter().all(|p| p.parameter == "d_p"));
        let pts = tune_graph_resolutions(&cs, &oracle, &w.queries, 8, &[0, 3], 256, 16).unwrap();
        assert!(argmin(&pts).is_some());
        assert!(to_csv(&pts).unwrap().contains("parameter,value,mean_io_normalized"));
    }
}
