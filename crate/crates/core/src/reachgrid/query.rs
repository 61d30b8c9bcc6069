//! Seed-set sweep over a [`GridIndex`].
//!
//! Per bucket the buffer starts empty. Every seed's cell at the window start
//! is looked up in the locator and its piece chain is followed to the bucket
//! end; the cells meeting the `d_T`-inflated bounding box of that path are
//! read. The window is then swept tick by tick: at each tick the smallest
//! new object within `d_T` of a seed joins the seed set, its own cells are
//! read, and the same tick is checked again until nothing new is found.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::rc::Rc;

use super::{CellRecord, GridIndex};
use crate::block_store::{BlockReader, IoReport, DEFAULT_BUFFER_BLOCKS};
use crate::error::{Error, Result};
use crate::model::{ObjectId, Point, ReachabilityQuery, TimeInterval};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct GridAnswer {
    pub reachable: bool,
    pub io: IoReport,
    /// Seeds in the order they joined, with the tick they were reached.
    pub seeds: Vec<(ObjectId, u32)>,
    /// Every `(bucket, cell)` whose blocks were requested, in request order.
    pub cells_read: Vec<(u32, u32)>,
    pub buckets: Vec<u32>,
}

struct Bucket<S> {
    id: u32,
    w_start: u32,
    /// `frames[t - w_start]`: positions seen in the loaded cells at tick `t`.
    frames: Vec<HashMap<u32, Point<S>>>,
    loaded: HashSet<u32>,
    decoded: HashMap<u32, Rc<Vec<CellRecord<S>>>>,
    /// Seed path from its entry tick to the bucket end.
    paths: HashMap<u32, (u32, Vec<Point<S>>)>,
}

/// Seed positions at one tick hashed on a `d_T` grid.
struct SeedHash<S> {
    d_t: S,
    cells: HashMap<(i64, i64), Vec<Point<S>>>,
}

impl<S: Scalar> SeedHash<S> {
    fn key(&self, p: &Point<S>) -> (i64, i64) {
        ((p.x / self.d_t).floor().to_i64().unwrap_or(0), (p.y / self.d_t).floor().to_i64().unwrap_or(0))
    }

    fn insert(&mut self, p: Point<S>) {
        let k = self.key(&p);
        self.cells.entry(k).or_default().push(p);
    }

    fn near(&self, p: &Point<S>) -> bool {
        let (kx, ky) = self.key(p);
        (-1..=1).any(|dx| {
            (-1..=1).any(|dy| {
                self.cells.get(&(kx + dx, ky + dy)).is_some_and(|v| v.iter().any(|s| s.within(p, self.d_t)))
            })
        })
    }
}

/// Scratch state of one query: the reader and what has been read so far.
struct GridQueryContext<'g, 'r, 's, S> {
    index: &'g GridIndex<S>,
    reader: &'r mut BlockReader<'s>,
    cells_read: Vec<(u32, u32)>,
}

impl<S: Scalar> GridQueryContext<'_, '_, '_, S> {
    fn cell(&mut self, bucket: &mut Bucket<S>, cell: u32) -> Result<Rc<Vec<CellRecord<S>>>> {
        self.cells_read.push((bucket.id, cell));
        if let Some(recs) = bucket.decoded.get(&cell) {
            if let Some(range) = self.index.cell_range(bucket.id, cell) {
                for id in range.ids() {
                    self.reader.read(id)?;
                }
            }
            return Ok(recs.clone());
        }
        let recs = Rc::new(self.index.read_cell(self.reader, bucket.id, cell)?);
        bucket.decoded.insert(cell, recs.clone());
        if bucket.loaded.insert(cell) {
            let end = bucket.w_start + bucket.frames.len() as u32;
            for r in recs.iter().filter(|r| r.tick >= bucket.w_start && r.tick < end) {
                bucket.frames[(r.tick - bucket.w_start) as usize].insert(r.object.0, r.pos);
            }
        }
        Ok(recs)
    }

    /// Positions of `o` over `[from, bucket end]`, starting in `cell`.
    fn follow(&mut self, bucket: &mut Bucket<S>, o: ObjectId, mut cell: u32, from: u32) -> Result<Vec<Point<S>>> {
        let want = bucket.w_start + bucket.frames.len() as u32 - from;
        let geometry = self.index.geometry();
        let mut out: Vec<Point<S>> = Vec::with_capacity(want as usize);
        let mut t = from;
        loop {
            let recs = self.cell(bucket, cell)?;
            for r in recs.iter().filter(|r| r.object == o) {
                if r.tick < t {
                    continue;
                }
                if r.tick != t {
                    break;
                }
                out.push(r.pos);
                t += 1;
            }
            if out.len() as u32 == want {
                return Ok(out);
            }
            // The last sample of a piece is the first sample of the next one.
            let next = out.last().map(|p| geometry.cell_of(p));
            match next {
                Some(next) if next != cell => {
                    out.pop();
                    t -= 1;
                    cell = next;
                }
                _ => {
                    return Err(Error::Corrupt(format!(
                        "object {o} has no sample at tick {t} in cell {cell} of bucket {}",
                        bucket.id
                    )))
                }
            }
        }
    }

    /// Follows a new seed and reads the cells around its path.
    fn add_seed(&mut self, bucket: &mut Bucket<S>, o: ObjectId, cell: u32, from: u32) -> Result<()> {
        let path = self.follow(bucket, o, cell, from)?;
        let cells: BTreeSet<u32> = self.index.neighbor_cells(&path).into_iter().collect();
        bucket.paths.insert(o.0, (from, path));
        for c in cells {
            self.cell(bucket, c)?;
        }
        Ok(())
    }
}

impl<S: Scalar> GridIndex<S> {
    pub fn query(&self, q: &ReachabilityQuery, reader: &mut BlockReader<'_>) -> Result<GridAnswer> {
        if q.t2() >= self.n_ticks() {
            return Err(Error::IntervalOutsideHorizon { interval: q.interval, horizon: TimeInterval::horizon(self.n_ticks()) });
        }
        for o in [q.source, q.destination] {
            if o.0 >= self.n_objects() {
                return Err(Error::UnknownObject(o));
            }
        }
        let before = reader.report();
        let mut ctx = GridQueryContext { index: self, reader, cells_read: Vec::new() };
        let mut is_seed = vec![false; self.n_objects() as usize];
        is_seed[q.source.index()] = true;
        let mut seeds = vec![(q.source, q.t1())];
        let mut buckets = Vec::new();
        let mut reachable = q.source == q.destination;

        'buckets: for b in self.bucket_of(q.t1())..=self.bucket_of(q.t2()) {
            if reachable {
                break;
            }
            ctx.reader.flush_buffer();
            buckets.push(b);
            let span = self.bucket_interval(b);
            let w_start = q.t1().max(span.start.0);
            let sweep_end = q.t2().min(span.end.0);
            let mut bucket = Bucket {
                id: b,
                w_start,
                frames: vec![HashMap::new(); (span.end.0 - w_start + 1) as usize],
                loaded: HashSet::new(),
                decoded: HashMap::new(),
                paths: HashMap::new(),
            };
            let current: Vec<ObjectId> = seeds.iter().map(|&(o, _)| o).collect();
            let mut wanted = BTreeSet::new();
            for &s in &current {
                let cell = self.locate(ctx.reader, s, w_start)?;
                let path = ctx.follow(&mut bucket, s, cell, w_start)?;
                wanted.extend(self.neighbor_cells(&path));
                bucket.paths.insert(s.0, (w_start, path));
            }
            for c in wanted {
                ctx.cell(&mut bucket, c)?;
            }
            for t in w_start..=sweep_end {
                let mut hash = SeedHash { d_t: self.d_t(), cells: HashMap::new() };
                for (from, path) in bucket.paths.values() {
                    if *from <= t {
                        hash.insert(path[(t - from) as usize]);
                    }
                }
                loop {
                    let frame = &bucket.frames[(t - w_start) as usize];
                    let next = frame
                        .iter()
                        .filter(|(&o, p)| !is_seed[o as usize] && hash.near(p))
                        .map(|(&o, &p)| (o, p))
                        .min_by_key(|&(o, _)| o);
                    let Some((o, pos)) = next else { break };
                    let o = ObjectId(o);
                    is_seed[o.index()] = true;
                    seeds.push((o, t));
                    if o == q.destination {
                        reachable = true;
                        break 'buckets;
                    }
                    hash.insert(pos);
                    ctx.add_seed(&mut bucket, o, self.geometry().cell_of(&pos), t)?;
                }
            }
        }
        let cells_read = ctx.cells_read;
        Ok(GridAnswer { reachable, io: reader.report() - before, seeds, cells_read, buckets })
    }

    pub fn grid_query(&self, q: &ReachabilityQuery) -> Result<bool> {
        let mut reader = self.store().reader(DEFAULT_BUFFER_BLOCKS);
        Ok(self.query(q, &mut reader)?.reachable)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contacts::ContactSet;
    use crate::fixture::{self, O1, O2, O3, O4};
    use crate::oracle::Oracle;
    use crate::reachgrid::{build_grid, GridParams};
    use crate::testutil::rwp_set;
    use crate::trajectory::TrajectorySet;
    use proptest::prelude::*;

    fn grid<S: Scalar>(set: &TrajectorySet<S>, r_t: u32, r_s: f64) -> GridIndex<S> {
        build_grid(set, GridParams { r_t, r_s: S::of(r_s), page_size: 256 }).unwrap()
    }

    #[test]
    fn figure_one_golden() {
        let g = grid(&fixture::figure_one(), 2, 2.5);
        assert!(g.grid_query(&ReachabilityQuery::new(O1.0, O4.0, 0, 1)).unwrap());
        assert!(!g.grid_query(&ReachabilityQuery::new(O4.0, O1.0, 0, 1)).unwrap());
        assert!(g.grid_query(&ReachabilityQuery::new(O1.0, O2.0, 2, 3)).unwrap());
    }

    #[test]
    fn figure_one_skips_the_second_bucket() {
        let g = grid(&fixture::figure_one(), 2, 2.5);
        let mut reader = g.store().reader(16);
        let a = g.query(&ReachabilityQuery::new(O1.0, O4.0, 0, 3), &mut reader).unwrap();
        assert!(a.reachable);
        assert_eq!(a.buckets, vec![0]);
        assert!(a.cells_read.iter().all(|&(b, _)| b == 0));
        assert_eq!(a.seeds, vec![(O1, 0), (O2, 0), (O4, 1)]);
    }

    #[test]
    fn figure_one_ignores_the_far_pair() {
        let set = fixture::figure_one();
        let g = grid(&set, 2, 2.5);
        let mut reader = g.store().reader(16);
        let a = g.query(&ReachabilityQuery::new(O1.0, O2.0, 2, 3), &mut reader).unwrap();
        assert!(a.reachable);
        let far_only: Vec<u32> = g
            .cells_of_bucket(1)
            .into_iter()
            .filter(|&c| {
                let recs = super::super::decode_cell::<f64>(&g.store().blob(g.cell_range(1, c).unwrap()).unwrap()).unwrap();
                recs.iter().all(|r| r.object == O3 || r.object == O4)
            })
            .collect();
        assert!(!far_only.is_empty());
        assert!(a.cells_read.iter().all(|(_, c)| !far_only.contains(c)));
    }

    #[test]
    fn reflexive_and_single_tick() {
        let g = grid(&fixture::figure_one(), 3, 4.0);
        let mut reader = g.store().reader(4);
        let a = g.query(&ReachabilityQuery::new(2, 2, 1, 3), &mut reader).unwrap();
        assert!(a.reachable && a.io.total_reads() == 0);
        assert!(g.grid_query(&ReachabilityQuery::new(O3.0, O4.0, 1, 1)).unwrap());
        assert!(!g.grid_query(&ReachabilityQuery::new(O1.0, O4.0, 0, 0)).unwrap());
        assert!(g.grid_query(&ReachabilityQuery::new(O1.0, O4.0, 4, 4)).is_err());
    }

    #[test]
    fn one_cell_grid_still_answers() {
        let set = rwp_set(17, 15, 60);
        let oracle = Oracle::new(&ContactSet::from_trajectories(&set));
        let g = grid(&set, 20, 150.0);
        assert_eq!(g.geometry().n_cells(), 1);
        for s in 0..15 {
            let q = ReachabilityQuery::new(s, (s + 4) % 15, 3, 59);
            assert_eq!(g.grid_query(&q).unwrap(), oracle.reach(&q).reachable);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(8))]

        #[test]
        fn agrees_with_oracle_and_orders_seeds(seed in any::<u64>(), r_t in 1u32..30, r_s in 5.0f64..80.0) {
            let set = rwp_set(seed, 15, 60);
            let oracle = Oracle::new(&ContactSet::from_trajectories(&set));
            let g = grid(&set, r_t, r_s);
            let mut reader = g.store().reader(8);
            for s in 0..15 {
                for d in 0..15 {
                    for (a, b) in [(0, 59), (9, 31), (40, 40), (22, 23)] {
                        let q = ReachabilityQuery::new(s, d, a, b);
                        let ans = g.query(&q, &mut reader).unwrap();
                        prop_assert_eq!(ans.reachable, oracle.reach(&q).reachable, "{}", q);
                        let times = oracle.reach_times(q.source, q.interval);
                        for w in ans.seeds.windows(2) {
                            prop_assert!(w[0].1 <= w[1].1);
                        }
                        for &(o, t) in &ans.seeds {
                            prop_assert_eq!(times[o.index()].map(|x| x.0), Some(t), "{} {}", q, o);
                        }
                    }
                }
            }
        }

        /// Any object within d_T of a seed lies in a cell that was read.
        #[test]
        fn candidate_cells_cover_all_contacts(seed in any::<u64>(), r_s in 5.0f64..60.0) {
            let set = rwp_set(seed, 20, 40);
            let g = grid(&set, 10, r_s);
            let mut reader = g.store().reader(64);
            let q = ReachabilityQuery::new(0, 19, 0, 39);
            let ans = g.query(&q, &mut reader).unwrap();
            // A reached destination ends the sweep and is never expanded.
            let (stop, expanded) = match ans.reachable {
                true => (ans.seeds.last().unwrap().1, &ans.seeds[..ans.seeds.len() - 1]),
                false => (39, &ans.seeds[..]),
            };
            for &(s, from) in expanded {
                for t in from..=stop {
                    if !ans.buckets.contains(&g.bucket_of(t)) {
                        continue;
                    }
                    for o in set.objects() {
                        if set.position(s, t).within(&set.position(o, t), set.d_t()) {
                            let c = g.geometry().cell_of(&set.position(o, t));
                            prop_assert!(ans.cells_read.contains(&(g.bucket_of(t), c)));
                        }
                    }
                }
            }
        }
    }
}
