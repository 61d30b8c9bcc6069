//! SPJ baseline: read every trajectory over the query interval, join it into
//! the contact network of that interval, then propagate labels.
//!
//! Samples are stored object-major, `(x, y)` per tick, one object after the
//! other, so an object's segment is a run of consecutive blocks.

use crate::block_store::{BlockId, BlockReader, BlockStore, IoReport, DEFAULT_BUFFER_BLOCKS};
use crate::contacts::tick_pairs;
use crate::error::{Error, Result};
use crate::model::{ObjectId, Point, ReachabilityQuery, TimeInterval};
use crate::oracle::Oracle;
use crate::scalar::Scalar;
use crate::trajectory::TrajectorySet;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpjAnswer {
    pub reachable: bool,
    pub io: IoReport,
}

#[derive(Debug)]
pub struct SpjStore<S> {
    store: BlockStore,
    n_objects: u32,
    n_ticks: u32,
    d_t: S,
}

impl<S: Scalar> SpjStore<S> {
    pub fn build(set: &TrajectorySet<S>, page_size: usize) -> Result<Self> {
        if page_size < 64 {
            return Err(Error::InvalidParam(format!("page size {page_size} is below the 64-byte minimum")));
        }
        let mut bytes = Vec::with_capacity(set.n_objects() as usize * set.n_ticks() as usize * 2 * S::BYTES);
        for o in set.objects() {
            for t in 0..set.n_ticks() {
                let p = set.position(o, t);
                p.x.write_le(&mut bytes);
                p.y.write_le(&mut bytes);
            }
        }
        let mut store = BlockStore::new(page_size);
        store.append_blob(&bytes);
        Ok(SpjStore { store, n_objects: set.n_objects(), n_ticks: set.n_ticks(), d_t: set.d_t() })
    }

    pub fn store(&self) -> &BlockStore {
        &self.store
    }

    fn sample_offset(&self, o: u32, t: u32) -> usize {
        (o as usize * self.n_ticks as usize + t as usize) * 2 * S::BYTES
    }

    /// Positions of `o` over `window`, read through `reader`.
    fn segment(&self, reader: &mut BlockReader<'_>, o: u32, window: TimeInterval) -> Result<Vec<Point<S>>> {
        let page = self.store.page_size();
        let lo = self.sample_offset(o, window.start.0);
        let hi = self.sample_offset(o, window.end.0 + 1);
        let (first, last) = (lo / page, (hi - 1) / page);
        let mut bytes = Vec::with_capacity((last - first + 1) * page);
        for b in first..=last {
            bytes.extend_from_slice(reader.read(BlockId(b as u32))?);
        }
        let base = lo - first * page;
        Ok(bytes[base..base + (hi - lo)]
            .chunks_exact(2 * S::BYTES)
            .map(|c| Point::new(S::read_le(c), S::read_le(&c[S::BYTES..])))
            .collect())
    }

    pub fn query(&self, q: &ReachabilityQuery, reader: &mut BlockReader<'_>) -> Result<SpjAnswer> {
        if q.t2() >= self.n_ticks {
            return Err(Error::IntervalOutsideHorizon { interval: q.interval, horizon: TimeInterval::horizon(self.n_ticks) });
        }
        for o in [q.source, q.destination] {
            if o.0 >= self.n_objects {
                return Err(Error::UnknownObject(o));
            }
        }
        let before = reader.report();
        let mut segments = Vec::with_capacity(self.n_objects as usize);
        for o in 0..self.n_objects {
            segments.push(self.segment(reader, o, q.interval)?);
        }
        let mut pairs = vec![Vec::new(); q.t2() as usize + 1];
        let mut frame = Vec::with_capacity(self.n_objects as usize);
        for t in q.interval.ticks() {
            frame.clear();
            let i = (t - q.t1()) as usize;
            frame.extend(segments.iter().enumerate().map(|(o, s)| (ObjectId(o as u32), s[i])));
            pairs[t as usize] = tick_pairs(&frame, self.d_t);
        }
        let reachable = Oracle::from_pairs(self.n_objects, pairs).reach(q).reachable;
        Ok(SpjAnswer { reachable, io: reader.report() - before })
    }

    pub fn spj_query(&self, q: &ReachabilityQuery) -> Result<bool> {
        let mut reader = self.store.reader(DEFAULT_BUFFER_BLOCKS);
        Ok(self.query(q, &mut reader)?.reachable)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contacts::ContactSet;
    use crate::fixture::{self, O1, O2, O4};
    use crate::testutil::rwp_set;
    use proptest::prelude::*;

    #[test]
    fn figure_one_golden() {
        let spj = SpjStore::build(&fixture::figure_one(), 64).unwrap();
        assert!(spj.spj_query(&ReachabilityQuery::new(O1.0, O4.0, 0, 1)).unwrap());
        assert!(!spj.spj_query(&ReachabilityQuery::new(O4.0, O1.0, 0, 1)).unwrap());
        assert!(spj.spj_query(&ReachabilityQuery::new(O1.0, O2.0, 2, 3)).unwrap());
        assert!(spj.spj_query(&ReachabilityQuery::new(O1.0, O1.0, 1, 2)).unwrap());
        assert!(spj.spj_query(&ReachabilityQuery::new(O1.0, O4.0, 0, 4)).is_err());
    }

    #[test]
    fn reads_every_segment_block() {
        // 4 objects x 4 ticks x 16 bytes: one 64-byte page per object.
        let spj = SpjStore::build(&fixture::figure_one(), 64).unwrap();
        assert_eq!(spj.store().len(), 4);
        let mut reader = spj.store().reader(0);
        let a = spj.query(&ReachabilityQuery::new(O1.0, O4.0, 0, 3), &mut reader).unwrap();
        assert_eq!((a.io.random_reads, a.io.sequential_reads), (1, 3));
        let a = spj.query(&ReachabilityQuery::new(O1.0, O4.0, 2, 2), &mut reader).unwrap();
        assert_eq!(a.io.total_reads(), 4);
        assert!(SpjStore::build(&fixture::figure_one(), 32).is_err());
    }

    #[test]
    fn f32_samples() {
        let set = TrajectorySet::<f32>::parse_str(&fixture::figure_one().to_text()).unwrap();
        let spj = SpjStore::build(&set, 64).unwrap();
        assert!(spj.spj_query(&ReachabilityQuery::new(O1.0, O4.0, 0, 1)).unwrap());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(8))]

        #[test]
        fn agrees_with_oracle(seed in any::<u64>()) {
            let set = rwp_set(seed, 12, 50);
            let oracle = Oracle::new(&ContactSet::from_trajectories(&set));
            let spj = SpjStore::build(&set, 128).unwrap();
            let mut reader = spj.store().reader(4);
            for s in 0..12 {
                for d in 0..12 {
                    for (a, b) in [(0, 49), (7, 20), (30, 30)] {
                        let q = ReachabilityQuery::new(s, d, a, b);
                        prop_assert_eq!(spj.query(&q, &mut reader).unwrap().reachable, oracle.reach(&q).reachable);
                    }
                }
            }
        }
    }
}
