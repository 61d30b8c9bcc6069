//! Brute-force reachability by time-ordered label propagation.
//!
//! Starting from `{source}` at `t1`, each tick's contacts are grouped into
//! connected components and every component touching a reached object is
//! reached entirely. This is the ground truth every index is checked against.

use crate::contacts::ContactSet;
use crate::model::{ObjectId, ReachabilityQuery, TimeInstant, TimeInterval};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReachResult {
    pub reachable: bool,
    /// Smallest `t` with the destination reachable during `[t1, t]`.
    pub earliest_reach: Option<TimeInstant>,
}

impl ReachResult {
    /// `T'_p = [t1, earliest_reach]`, or the whole interval when unreachable.
    pub fn effective_interval(&self, q: &ReachabilityQuery) -> TimeInterval {
        match self.earliest_reach {
            Some(t) => TimeInterval { start: q.interval.start, end: t },
            None => q.interval,
        }
    }
}

/// Contacts indexed by tick for repeated oracle calls.
#[derive(Debug, Clone)]
pub struct Oracle {
    n_objects: u32,
    pairs: Vec<Vec<(ObjectId, ObjectId)>>,
}

struct Dsu {
    parent: Vec<u32>,
}

impl Dsu {
    fn find(&mut self, x: u32) -> u32 {
        let mut root = x;
        while self.parent[root as usize] != root {
            root = self.parent[root as usize];
        }
        let mut cur = x;
        while self.parent[cur as usize] != root {
            let next = self.parent[cur as usize];
            self.parent[cur as usize] = root;
            cur = next;
        }
        root
    }
}

impl Oracle {
    pub fn new(contacts: &ContactSet) -> Self {
        Oracle { n_objects: contacts.n_objects, pairs: contacts.pairs_by_tick() }
    }

    /// From per-tick contact pairs, `pairs[t]` listing the pairs active at `t`.
    pub fn from_pairs(n_objects: u32, pairs: Vec<Vec<(ObjectId, ObjectId)>>) -> Self {
        Oracle { n_objects, pairs }
    }

    pub fn n_ticks(&self) -> u32 {
        self.pairs.len() as u32
    }

    /// Earliest tick at which each object holds an item started by `source`
    /// at `interval.start`, propagating until `interval.end`.
    pub fn reach_times(&self, source: ObjectId, interval: TimeInterval) -> Vec<Option<TimeInstant>> {
        let n = self.n_objects as usize;
        let mut reached: Vec<Option<TimeInstant>> = vec![None; n];
        reached[source.index()] = Some(interval.start);
        let mut dsu = Dsu { parent: (0..self.n_objects).collect() };
        let mut touched = Vec::new();
        for t in interval.ticks() {
            let pairs = &self.pairs[t as usize];
            if pairs.is_empty() {
                continue;
            }
            for &(a, b) in pairs {
                let (ra, rb) = (dsu.find(a.0), dsu.find(b.0));
                if ra != rb {
                    dsu.parent[ra as usize] = rb;
                }
                touched.push(a.0);
                touched.push(b.0);
            }
            let mut hot_roots = Vec::new();
            for &o in &touched {
                if reached[o as usize].is_some() {
                    hot_roots.push(dsu.find(o));
                }
            }
            for &o in &touched {
                if reached[o as usize].is_none() && hot_roots.contains(&dsu.find(o)) {
                    reached[o as usize] = Some(TimeInstant(t));
                }
            }
            for &o in &touched {
                dsu.parent[o as usize] = o;
            }
            touched.clear();
        }
        reached
    }

    pub fn reach(&self, q: &ReachabilityQuery) -> ReachResult {
        let earliest = self.reach_times(q.source, q.interval)[q.destination.index()];
        ReachResult { reachable: earliest.is_some(), earliest_reach: earliest }
    }
}

pub fn oracle_reach(contacts: &ContactSet, q: &ReachabilityQuery) -> ReachResult {
    Oracle::new(contacts).reach(q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixture::{self, O1, O2, O3, O4};
    use crate::ten::{build_ten, ten_reachable};
    use crate::workload::{gen_rwp, RwpParams};
    use proptest::prelude::*;

    fn fig() -> ContactSet {
        ContactSet::from_trajectories(&fixture::figure_one())
    }

    #[test]
    fn figure_one_answers() {
        let cs = fig();
        let r = oracle_reach(&cs, &ReachabilityQuery::new(O1.0, O4.0, 0, 3));
        assert_eq!(r, ReachResult { reachable: true, earliest_reach: Some(TimeInstant(1)) });
        assert!(!oracle_reach(&cs, &ReachabilityQuery::new(O4.0, O1.0, 0, 1)).reachable);
        let own = oracle_reach(&cs, &ReachabilityQuery::new(O3.0, O3.0, 2, 3));
        assert_eq!(own.earliest_reach, Some(TimeInstant(2)));
        assert!(oracle_reach(&cs, &ReachabilityQuery::new(O1.0, O2.0, 2, 3)).reachable);
        let q = ReachabilityQuery::new(O1.0, O4.0, 0, 3);
        assert_eq!(r.effective_interval(&q), TimeInterval::new(0, 1));
    }

    fn instance(seed: u64, n: u32, ticks: u32) -> ContactSet {
        let p = RwpParams {
            n_objects: n,
            width: 120.0,
            height: 120.0,
            mean_speed: 1.5,
            tick_seconds: 4.0,
            duration_ticks: ticks,
            d_t: 10.0,
            seed,
        };
        ContactSet::from_trajectories(&gen_rwp::<f64>(&p).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        #[test]
        fn agrees_with_ten_exhaustively(seed in any::<u64>()) {
            let cs = instance(seed, 12, 30);
            let g = build_ten(&cs, 12, cs.horizon).unwrap();
            let oracle = Oracle::new(&cs);
            for s in 0..12 {
                for d in 0..12 {
                    for (a, b) in [(0, 29), (3, 17), (10, 10), (20, 29)] {
                        let q = ReachabilityQuery::new(s, d, a, b);
                        prop_assert_eq!(oracle.reach(&q).reachable, ten_reachable(&g, &q).unwrap(), "{}", q);
                    }
                }
            }
        }

        #[test]
        fn earliest_reach_is_minimal(seed in any::<u64>(), s in 0u32..15, d in 0u32..15, a in 0u32..40) {
            let cs = instance(seed, 15, 60);
            let oracle = Oracle::new(&cs);
            let q = ReachabilityQuery::new(s, d, a, 59);
            let r = oracle.reach(&q);
            if let Some(t) = r.earliest_reach {
                prop_assert!(oracle.reach(&ReachabilityQuery::new(s, d, a, t.0)).reachable);
                if t.0 > a {
                    prop_assert!(!oracle.reach(&ReachabilityQuery::new(s, d, a, t.0 - 1)).reachable);
                }
            }
        }

        #[test]
        fn monotone_in_interval(seed in any::<u64>(), s in 0u32..15, d in 0u32..15, a in 0u32..30, len in 0u32..20, pad in 0u32..10) {
            let cs = instance(seed, 15, 60);
            let oracle = Oracle::new(&cs);
            let inner = ReachabilityQuery::new(s, d, a, a + len);
            let outer = ReachabilityQuery::new(s, d, a.saturating_sub(pad), (a + len + pad).min(59));
            if oracle.reach(&inner).reachable {
                prop_assert!(oracle.reach(&outer).reachable);
            }
        }
    }
}
