//! Traversal engines over a placed [`ReachGraphIndex`].
//!
//! Every vertex access reads the blocks of the vertex's partition through
//! the caller's [`BlockReader`], so IO is whatever the buffer pool lets
//! through.

use std::collections::{HashMap, HashSet, VecDeque};

use super::layout::{ReachGraphIndex, VertexRecord, VertexRef};
use crate::block_store::{BlockReader, IoReport};
use crate::error::{Error, Result};
use crate::model::{ObjectId, ReachabilityQuery, TimeInterval};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Engine {
    BmBfs,
    BBfs,
    EDfs,
}

impl Engine {
    pub const ALL: [Engine; 3] = [Engine::BmBfs, Engine::BBfs, Engine::EDfs];

    pub fn name(self) -> &'static str {
        match self {
            Engine::BmBfs => "bm-bfs",
            Engine::BBfs => "b-bfs",
            Engine::EDfs => "e-dfs",
        }
    }
}

impl std::str::FromStr for Engine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Engine::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::InvalidParam(format!("unknown graph engine {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

/// One popped vertex. `resolution` is the edge length used to expand it:
/// 1 for base edges, `L` for a long-edge layer, 0 when not expanded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceStep {
    pub direction: Direction,
    pub vertex: u32,
    pub entry: u32,
    pub t_end: u32,
    pub resolution: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphAnswer {
    pub reachable: bool,
    pub io: IoReport,
    pub trace: Vec<TraceStep>,
    /// Object seen by both directions when a bidirectional search met.
    pub meet: Option<ObjectId>,
    /// `O_F` and `O_B` at termination (bidirectional engines only).
    pub forward_objects: Vec<ObjectId>,
    pub backward_objects: Vec<ObjectId>,
}

struct Ctx<'i, 'r, 's> {
    idx: &'i ReachGraphIndex,
    reader: &'r mut BlockReader<'s>,
    cache: HashMap<u32, std::rc::Rc<VertexRecord>>,
}

impl Ctx<'_, '_, '_> {
    fn vertex(&mut self, r: VertexRef) -> Result<std::rc::Rc<VertexRecord>> {
        if let Some(rec) = self.cache.get(&r.vertex) {
            // Decoding is cached, the disk access is not.
            for id in self.idx.partition_range(r.partition)?.ids() {
                self.reader.read(id)?;
            }
            return Ok(rec.clone());
        }
        let rec = std::rc::Rc::new(self.idx.read_vertex(self.reader, r)?);
        self.cache.insert(r.vertex, rec.clone());
        Ok(rec)
    }
}

impl ReachGraphIndex {
    fn check_query(&self, q: &ReachabilityQuery) -> Result<()> {
        if q.t2() >= self.n_ticks() {
            return Err(Error::IntervalOutsideHorizon { interval: q.interval, horizon: TimeInterval::horizon(self.n_ticks()) });
        }
        for o in [q.source, q.destination] {
            if o.0 >= self.n_objects() {
                return Err(Error::UnknownObject(o));
            }
        }
        Ok(())
    }

    pub fn query(&self, engine: Engine, q: &ReachabilityQuery, reader: &mut BlockReader<'_>) -> Result<GraphAnswer> {
        self.check_query(q)?;
        let before = reader.report();
        let mut ctx = Ctx { idx: self, reader, cache: HashMap::new() };
        let mut answer = match engine {
            Engine::BmBfs => bidirectional(&mut ctx, q, true)?,
            Engine::BBfs => bidirectional(&mut ctx, q, false)?,
            Engine::EDfs => external_dfs(&mut ctx, q)?,
        };
        answer.io = ctx.reader.report() - before;
        Ok(answer)
    }

    /// Runs `engine` with a fresh buffer of `buffer_blocks`.
    pub fn query_with_buffer(&self, engine: Engine, q: &ReachabilityQuery, buffer_blocks: usize) -> Result<GraphAnswer> {
        let mut reader = self.store().reader(buffer_blocks);
        self.query(engine, q, &mut reader)
    }

    pub fn bm_bfs(&self, q: &ReachabilityQuery) -> Result<bool> {
        Ok(self.query_with_buffer(Engine::BmBfs, q, crate::block_store::DEFAULT_BUFFER_BLOCKS)?.reachable)
    }

    pub fn b_bfs(&self, q: &ReachabilityQuery) -> Result<bool> {
        Ok(self.query_with_buffer(Engine::BBfs, q, crate::block_store::DEFAULT_BUFFER_BLOCKS)?.reachable)
    }

    pub fn e_dfs(&self, q: &ReachabilityQuery) -> Result<bool> {
        Ok(self.query_with_buffer(Engine::EDfs, q, crate::block_store::DEFAULT_BUFFER_BLOCKS)?.reachable)
    }
}

/// Largest resolution `L` whose aligned boundary `t_a <= t_end` is not
/// before the entry tick and whose target tick stays within `limit`.
pub(crate) fn pick_resolution(resolutions: &[u32], entry: u32, t_end: u32, limit: u32) -> Option<(u32, u32)> {
    resolutions.iter().rev().find_map(|&l| {
        let t_a = t_end / l * l;
        (t_a >= entry && t_a + l <= limit).then_some((l, t_a))
    })
}

fn objects(mask: &[bool]) -> Vec<ObjectId> {
    mask.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| ObjectId(i as u32)).collect()
}

fn bidirectional(ctx: &mut Ctx<'_, '_, '_>, q: &ReachabilityQuery, long_edges: bool) -> Result<GraphAnswer> {
    let n = ctx.idx.n_objects() as usize;
    let resolutions: Vec<u32> = if long_edges { ctx.idx.resolutions().to_vec() } else { Vec::new() };
    let v1 = ctx.idx.find_vertex(ctx.reader, q.source, q.t1())?;
    let v2 = ctx.idx.find_vertex(ctx.reader, q.destination, q.t2())?;
    let mid = q.midpoint();
    let mut o_f = vec![false; n];
    let mut o_b = vec![false; n];
    let mut seen_f = HashSet::new();
    let mut seen_b = HashSet::new();
    let mut q_f = VecDeque::from([(v1, q.t1())]);
    let mut q_b = VecDeque::from([(v2, q.t2())]);
    let mut trace = Vec::new();
    let mut meet = None;

    'search: while !q_f.is_empty() || !q_b.is_empty() {
        if let Some((r, entry)) = q_f.pop_front() {
            if seen_f.insert(r.vertex) {
                let rec = ctx.vertex(r)?;
                if let Some(&o) = rec.members.iter().find(|o| o_b[o.index()]) {
                    trace.push(TraceStep { direction: Direction::Forward, vertex: r.vertex, entry, t_end: rec.t_end, resolution: 0 });
                    meet = Some(o);
                    break 'search;
                }
                for o in &rec.members {
                    o_f[o.index()] = true;
                }
                let mut used = 0;
                if rec.t_end < mid {
                    let long = pick_resolution(&resolutions, entry, rec.t_end, mid)
                        .and_then(|(l, t_a)| rec.long_targets(l, t_a).map(|ts| (l, t_a, ts)));
                    if let Some((l, t_a, targets)) = long {
                        used = l;
                        q_f.extend(targets.iter().filter(|t| !seen_f.contains(&t.vertex)).map(|&t| (t, t_a + l)));
                    } else {
                        used = 1;
                        q_f.extend(
                            rec.children.iter().filter(|(c, _)| !seen_f.contains(&c.vertex)).map(|&(c, _)| (c, rec.t_end + 1)),
                        );
                    }
                }
                trace.push(TraceStep { direction: Direction::Forward, vertex: r.vertex, entry, t_end: rec.t_end, resolution: used });
            }
        }
        if let Some((r, entry)) = q_b.pop_front() {
            if seen_b.insert(r.vertex) {
                let rec = ctx.vertex(r)?;
                if let Some(&o) = rec.members.iter().find(|o| o_f[o.index()]) {
                    trace.push(TraceStep { direction: Direction::Backward, vertex: r.vertex, entry, t_end: rec.t_end, resolution: 0 });
                    meet = Some(o);
                    break 'search;
                }
                for o in &rec.members {
                    o_b[o.index()] = true;
                }
                // Parents end at t_start - 1 and must not end before the midpoint.
                let expand = rec.t_start > mid;
                if expand {
                    q_b.extend(rec.parents.iter().filter(|p| !seen_b.contains(&p.vertex)).map(|&p| (p, rec.t_start - 1)));
                }
                trace.push(TraceStep {
                    direction: Direction::Backward,
                    vertex: r.vertex,
                    entry,
                    t_end: rec.t_end,
                    resolution: u32::from(expand),
                });
            }
        }
    }
    Ok(GraphAnswer {
        reachable: meet.is_some(),
        io: IoReport::default(),
        trace,
        meet,
        forward_objects: objects(&o_f),
        backward_objects: objects(&o_b),
    })
}

fn external_dfs(ctx: &mut Ctx<'_, '_, '_>, q: &ReachabilityQuery) -> Result<GraphAnswer> {
    let v1 = ctx.idx.find_vertex(ctx.reader, q.source, q.t1())?;
    let v2 = ctx.idx.find_vertex(ctx.reader, q.destination, q.t2())?;
    let mut stack = vec![(v1, q.t1())];
    let mut seen = HashSet::from([v1.vertex]);
    let mut trace = Vec::new();
    let mut reachable = false;
    while let Some((r, entry)) = stack.pop() {
        if r.vertex == v2.vertex {
            reachable = true;
            break;
        }
        let rec = ctx.vertex(r)?;
        let expand = rec.t_end < q.t2();
        if expand {
            for &(c, _) in rec.children.iter().rev() {
                if seen.insert(c.vertex) {
                    stack.push((c, rec.t_end + 1));
                }
            }
        }
        trace.push(TraceStep { direction: Direction::Forward, vertex: r.vertex, entry, t_end: rec.t_end, resolution: u32::from(expand) });
    }
    Ok(GraphAnswer {
        reachable,
        io: IoReport::default(),
        trace,
        meet: None,
        forward_objects: Vec::new(),
        backward_objects: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contacts::ContactSet;
    use crate::fixture::{self, O1, O2, O3, O4};
    use crate::oracle::Oracle;
    use crate::reachgraph::{GraphIndexParams, Placement, ReachGraph, DEFAULT_RESOLUTIONS};
    use crate::testutil::rwp_contacts;
    use proptest::prelude::*;

    fn index_for(cs: &ContactSet, d_p: u32, page_size: usize) -> ReachGraphIndex {
        let h = ReachGraph::from_contacts(cs, &DEFAULT_RESOLUTIONS).unwrap().1;
        ReachGraphIndex::build(&h, GraphIndexParams { d_p, placement: Placement::Topological, page_size }).unwrap()
    }

    #[test]
    fn figure_one_golden() {
        let idx = index_for(&ContactSet::from_trajectories(&fixture::figure_one()), 32, 4096);
        for engine in Engine::ALL {
            let r = |s: ObjectId, d: ObjectId, a, b| {
                idx.query_with_buffer(engine, &ReachabilityQuery::new(s.0, d.0, a, b), 8).unwrap().reachable
            };
            assert!(r(O1, O4, 0, 1), "{}", engine.name());
            assert!(!r(O4, O1, 0, 1), "{}", engine.name());
            assert!(r(O1, O2, 2, 3), "{}", engine.name());
            assert!(r(O3, O3, 1, 1), "{}", engine.name());
        }
        assert!(idx.bm_bfs(&ReachabilityQuery::new(0, 3, 0, 1)).unwrap());
        assert!(!idx.b_bfs(&ReachabilityQuery::new(3, 0, 0, 1)).unwrap());
        assert!(idx.e_dfs(&ReachabilityQuery::new(0, 1, 2, 3)).unwrap());
    }

    #[test]
    fn out_of_horizon_and_unknown_objects() {
        let idx = index_for(&ContactSet::from_trajectories(&fixture::figure_one()), 32, 4096);
        assert!(matches!(idx.bm_bfs(&ReachabilityQuery::new(0, 1, 0, 4)), Err(Error::IntervalOutsideHorizon { .. })));
        assert!(matches!(idx.e_dfs(&ReachabilityQuery::new(0, 7, 0, 1)), Err(Error::UnknownObject(_))));
    }

    #[test]
    fn unreachable_dfs_visits_everything_reachable() {
        let cs = rwp_contacts(21, 12, 60);
        let idx = index_for(&cs, 4, 512);
        let h = ReachGraph::from_contacts(&cs, &[]).unwrap().1;
        let oracle = Oracle::new(&cs);
        for s in 0..12 {
            for d in 0..12 {
                let q = ReachabilityQuery::new(s, d, 0, 59);
                if oracle.reach(&q).reachable {
                    continue;
                }
                let a = idx.query_with_buffer(Engine::EDfs, &q, 16).unwrap();
                assert!(!a.reachable);
                let v1 = h.base.vertex_of(q.source, 0);
                let expected = (0..h.base.vertex_count() as u32).filter(|&v| h.base.path_exists(v1, v)).count();
                assert_eq!(a.trace.len(), expected, "{q}");
            }
        }
    }

    #[test]
    fn meet_is_in_both_object_sets() {
        let cs = rwp_contacts(8, 20, 80);
        let idx = index_for(&cs, 8, 1024);
        for s in 0..20 {
            for d in 0..20 {
                let q = ReachabilityQuery::new(s, d, 5, 70);
                let a = idx.query_with_buffer(Engine::BmBfs, &q, 32).unwrap();
                if let Some(o) = a.meet {
                    let last = a.trace.last().unwrap();
                    let other = match last.direction {
                        Direction::Forward => &a.backward_objects,
                        Direction::Backward => &a.forward_objects,
                    };
                    assert!(other.contains(&o));
                }
            }
        }
    }

    #[test]
    fn forward_steps_prefer_the_longest_edge() {
        let cs = rwp_contacts(13, 25, 120);
        let idx = index_for(&cs, 8, 1024);
        let mut long_steps = 0;
        for s in 0..25 {
            let q = ReachabilityQuery::new(s, (s + 7) % 25, 3, 117);
            let mid = q.midpoint();
            let a = idx.query_with_buffer(Engine::BmBfs, &q, 64).unwrap();
            for step in a.trace.iter().filter(|st| st.direction == Direction::Forward && st.resolution > 0) {
                assert!(step.entry <= mid);
                let best = pick_resolution(idx.resolutions(), step.entry, step.t_end, mid).map_or(1, |(l, _)| l);
                assert_eq!(step.resolution, best, "{q} {step:?}");
                if best > 1 {
                    long_steps += 1;
                }
            }
            for step in a.trace.iter().filter(|st| st.direction == Direction::Backward) {
                assert!(step.t_end >= mid);
            }
        }
        assert!(long_steps > 0);
    }

    #[test]
    fn resolution_choice() {
        let res = [2, 4, 8, 16, 32];
        assert_eq!(pick_resolution(&res, 0, 0, 40), Some((32, 0)));
        assert_eq!(pick_resolution(&res, 0, 0, 20), Some((16, 0)));
        assert_eq!(pick_resolution(&res, 3, 5, 40), Some((4, 4)));
        assert_eq!(pick_resolution(&res, 5, 5, 40), None);
        assert_eq!(pick_resolution(&res, 0, 9, 10), Some((2, 8)));
        assert_eq!(pick_resolution(&res, 0, 9, 9), None);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(6))]

        #[test]
        fn engines_agree_with_oracle(seed in any::<u64>(), d_p in 1u32..40) {
            let cs = rwp_contacts(seed, 16, 70);
            let oracle = Oracle::new(&cs);
            let idx = index_for(&cs, d_p, 512);
            let mut reader = idx.store().reader(16);
            for s in 0..16 {
                for d in 0..16 {
                    for (a, b) in [(0, 69), (7, 40), (33, 33), (12, 13), (50, 69)] {
                        let q = ReachabilityQuery::new(s, d, a, b);
                        let truth = oracle.reach(&q).reachable;
                        for engine in Engine::ALL {
                            prop_assert_eq!(idx.query(engine, &q, &mut reader).unwrap().reachable, truth, "{} {}", engine.name(), q);
                        }
                    }
                }
            }
        }
    }
}
