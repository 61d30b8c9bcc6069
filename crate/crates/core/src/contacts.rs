//! Spatiotemporal self-join producing the contact set.
//!
//! Each tick is joined with a uniform hash grid of side `d_T`: an object is
//! compared only against objects in its own and the eight surrounding cells.
//! Per-tick pairs are then folded into maximal runs, one [`Contact`] per run.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{Config, Contact, ObjectId, Point, TimeInstant, TimeInterval};
use crate::scalar::Scalar;
use crate::trajectory::{parse_header, TrajectorySegment, TrajectorySet};

/// All contacts of a population over a horizon, sorted by `(start, a, b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContactSet {
    pub contacts: Vec<Contact>,
    pub horizon: TimeInterval,
    pub n_objects: u32,
    pub d_t: f64,
}

/// Pairs `(a, b)` with `a < b` whose points lie within `d_t`, sorted.
pub fn tick_pairs<S: Scalar>(points: &[(ObjectId, Point<S>)], d_t: S) -> Vec<(ObjectId, ObjectId)> {
    let key = |p: &Point<S>| -> (i64, i64) {
        let kx = (p.x / d_t).floor().to_i64().unwrap_or(i64::MAX);
        let ky = (p.y / d_t).floor().to_i64().unwrap_or(i64::MAX);
        (kx, ky)
    };
    let mut cells: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for (i, (_, p)) in points.iter().enumerate() {
        cells.entry(key(p)).or_default().push(i);
    }
    let mut out = Vec::new();
    for (oi, pi) in points.iter() {
        let (kx, ky) = key(pi);
        for dx in -1..=1 {
            for dy in -1..=1 {
                let Some(bucket) = cells.get(&(kx.wrapping_add(dx), ky.wrapping_add(dy))) else {
                    continue;
                };
                for &j in bucket {
                    let (oj, pj) = &points[j];
                    if oi < oj && pi.within(pj, d_t) {
                        out.push((*oi, *oj));
                    }
                }
            }
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// Folds per-tick pair lists (fed in increasing tick order) into maximal runs.
#[derive(Debug, Default)]
pub(crate) struct RunBuilder {
    open: HashMap<(ObjectId, ObjectId), (u32, u32)>,
    done: Vec<Contact>,
}

impl RunBuilder {
    pub(crate) fn push_tick(&mut self, t: u32, pairs: &[(ObjectId, ObjectId)]) {
        for &pair in pairs {
            let run = self.open.entry(pair).or_insert((t, t));
            if run.1 + 1 == t {
                run.1 = t;
            }
        }
        let done = &mut self.done;
        self.open.retain(|&(a, b), &mut (start, last)| {
            if last < t {
                done.push(Contact::new(a, b, TimeInterval::new(start, last)));
                false
            } else {
                true
            }
        });
    }

    pub(crate) fn finish(mut self) -> Vec<Contact> {
        let mut done = std::mem::take(&mut self.done);
        done.extend(
            self.open
                .into_iter()
                .map(|((a, b), (start, last))| Contact::new(a, b, TimeInterval::new(start, last))),
        );
        done.sort_unstable_by_key(|c| (c.validity.start, c.a, c.b));
        done
    }
}

/// Window trajectory join: every pair within `d_t` at some tick of `w`, with
/// the maximal sub-intervals of `w` during which they stay within range.
pub fn window_join<S: Scalar>(
    segments: &[TrajectorySegment<S>],
    d_t: S,
    w: TimeInterval,
) -> Vec<(ObjectId, ObjectId, TimeInterval)> {
    let mut runs = RunBuilder::default();
    let mut points = Vec::with_capacity(segments.len());
    for t in w.ticks() {
        points.clear();
        points.extend(segments.iter().filter_map(|s| s.position_at(TimeInstant(t)).map(|p| (s.object, p))));
        runs.push_tick(t, &tick_pairs(&points, d_t));
    }
    runs.finish().into_iter().map(|c| (c.a, c.b, c.validity)).collect()
}

/// Contacts of the whole population over `config.horizon`.
pub fn extract_contacts<S: Scalar>(trajectories: &TrajectorySet<S>, config: &Config<S>) -> Result<ContactSet> {
    if config.horizon != trajectories.horizon() {
        return Err(Error::HorizonMismatch(format!(
            "config horizon {} differs from trajectory horizon {}",
            config.horizon,
            trajectories.horizon()
        )));
    }
    let mut runs = RunBuilder::default();
    let mut points = Vec::with_capacity(trajectories.n_objects() as usize);
    for t in config.horizon.ticks() {
        points.clear();
        points.extend(trajectories.frame(t).iter().enumerate().map(|(o, p)| (ObjectId(o as u32), *p)));
        runs.push_tick(t, &tick_pairs(&points, config.d_t));
    }
    Ok(ContactSet {
        contacts: runs.finish(),
        horizon: config.horizon,
        n_objects: trajectories.n_objects(),
        d_t: config.d_t.as_f64(),
    })
}

impl ContactSet {
    pub fn from_trajectories<S: Scalar>(trajectories: &TrajectorySet<S>) -> ContactSet {
        extract_contacts(trajectories, &trajectories.config).expect("own config matches own horizon")
    }

    pub fn n_ticks(&self) -> u32 {
        self.horizon.len()
    }

    pub fn len(&self) -> usize {
        self.contacts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.contacts.is_empty()
    }

    /// For each tick, the pairs in contact at that tick.
    pub fn pairs_by_tick(&self) -> Vec<Vec<(ObjectId, ObjectId)>> {
        let mut by_tick = vec![Vec::new(); self.n_ticks() as usize];
        for c in &self.contacts {
            for t in c.validity.ticks() {
                by_tick[t as usize].push((c.a, c.b));
            }
        }
        by_tick
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("#objects={} #ticks={} d_T={}\n", self.n_objects, self.n_ticks(), self.d_t);
        for c in &self.contacts {
            writeln!(out, "{},{},{},{}", c.a.0, c.b.0, c.validity.start, c.validity.end).unwrap();
        }
        out
    }

    pub fn write_file(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn read_file(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::parse(BufReader::new(f), &path.display().to_string())
    }

    pub fn parse<R: BufRead>(reader: R, source: &str) -> Result<Self> {
        let err = |line: usize, msg: String| Error::Parse { path: source.to_string(), line, msg };
        let mut lines = reader.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| err(1, "missing header".into()))?;
        let fields = parse_header(&header?).map_err(|m| err(1, m))?;
        let get = |k: &str| {
            fields
                .iter()
                .find(|(key, _)| key == k)
                .map(|(_, v)| v.clone())
                .ok_or_else(|| err(1, format!("header lacks `{k}`")))
        };
        let n_objects: u32 = get("objects")?.parse().map_err(|_| err(1, "bad #objects".into()))?;
        let n_ticks: u32 = get("ticks")?.parse().map_err(|_| err(1, "bad #ticks".into()))?;
        let d_t: f64 = get("d_T")?.parse().map_err(|_| err(1, "bad d_T".into()))?;
        if n_ticks == 0 {
            return Err(err(1, "empty horizon".into()));
        }
        let horizon = TimeInterval::horizon(n_ticks);
        let mut contacts = Vec::new();
        for (i, line) in lines {
            let line = line?;
            let lineno = i + 1;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let nums: Vec<u32> = line
                .split(',')
                .map(|s| s.trim().parse::<u32>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| err(lineno, "expected a,b,start,end".into()))?;
            let [a, b, start, end] = nums[..] else {
                return Err(err(lineno, "expected a,b,start,end".into()));
            };
            if a >= b || a >= n_objects || b >= n_objects {
                return Err(err(lineno, format!("bad object pair ({a},{b})")));
            }
            let validity = TimeInterval::try_new(start, end)
                .filter(|v| horizon.contains_interval(v))
                .ok_or_else(|| err(lineno, format!("bad validity [{start},{end}]")))?;
            contacts.push(Contact::new(ObjectId(a), ObjectId(b), validity));
        }
        contacts.sort_unstable_by_key(|c| (c.validity.start, c.a, c.b));
        Ok(ContactSet { contacts, horizon, n_objects, d_t })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixture::{self, O1, O2, O3, O4};
    use crate::model::EnvironmentBounds;
    use crate::workload::{gen_rwp, RwpParams};
    use proptest::prelude::*;

    fn iv(a: u32, b: u32) -> TimeInterval {
        TimeInterval::new(a, b)
    }

    /// Independent all-pairs check at every tick.
    fn brute_force<S: Scalar>(set: &TrajectorySet<S>) -> Vec<Contact> {
        let mut runs = Vec::new();
        let n = set.n_objects();
        for a in 0..n {
            for b in a + 1..n {
                let mut start = None;
                for t in 0..=set.n_ticks() {
                    let close = t < set.n_ticks()
                        && set.position(ObjectId(a), t).dist(&set.position(ObjectId(b), t)) <= set.d_t();
                    match (close, start) {
                        (true, None) => start = Some(t),
                        (false, Some(s)) => {
                            runs.push(Contact::new(ObjectId(a), ObjectId(b), iv(s, t - 1)));
                            start = None;
                        }
                        _ => {}
                    }
                }
            }
        }
        runs.sort_unstable_by_key(|c| (c.validity.start, c.a, c.b));
        runs
    }

    #[test]
    fn figure_one_join() {
        let set = fixture::figure_one();
        let segs: Vec<_> = set.objects().map(|o| set.segment(o, iv(0, 3))).collect();
        let joined = window_join(&segs, 1.0, iv(0, 3));
        assert_eq!(joined, vec![(O1, O2, iv(0, 0)), (O2, O4, iv(1, 1)), (O3, O4, iv(1, 2)), (O1, O2, iv(2, 3))]);

        let contacts = ContactSet::from_trajectories(&set);
        assert_eq!(contacts.len(), 4);
        assert_eq!(contacts.contacts, brute_force(&set));
    }

    #[test]
    fn single_object_and_boundary_distance() {
        let cfg = Config::new(2.0, EnvironmentBounds::new(10.0, 10.0), TimeInterval::horizon(6));
        let one = TrajectorySet::from_objects(cfg, &[vec![Point::new(1.0, 1.0); 6]]).unwrap();
        let segs = vec![one.segment(ObjectId(0), iv(0, 5))];
        assert!(window_join(&segs, 2.0, iv(0, 5)).is_empty());

        let two = TrajectorySet::from_objects(cfg, &[vec![Point::new(1.0, 1.0); 6], vec![Point::new(3.0, 1.0); 6]])
            .unwrap();
        let segs: Vec<_> = two.objects().map(|o| two.segment(o, iv(0, 5))).collect();
        assert_eq!(window_join(&segs, 2.0, iv(0, 5)), vec![(ObjectId(0), ObjectId(1), iv(0, 5))]);
    }

    #[test]
    fn far_apart_population_has_no_contacts() {
        let cfg = Config::new(1.0, EnvironmentBounds::new(100.0, 100.0), TimeInterval::horizon(3));
        let per: Vec<_> = (0..5).map(|i| vec![Point::new(i as f64 * 10.0, 50.0); 3]).collect();
        let set = TrajectorySet::from_objects(cfg, &per).unwrap();
        assert!(ContactSet::from_trajectories(&set).is_empty());
    }

    #[test]
    fn horizon_mismatch_is_an_error() {
        let set = fixture::figure_one();
        let mut cfg = set.config;
        cfg.horizon = iv(0, 9);
        assert!(matches!(extract_contacts(&set, &cfg), Err(Error::HorizonMismatch(_))));
    }

    #[test]
    fn contact_file_roundtrip() {
        let set = fixture::figure_one();
        let contacts = ContactSet::from_trajectories(&set);
        let text = contacts.to_text();
        assert!(text.starts_with("#objects=4 #ticks=4 d_T=1\n0,1,0,0\n"));
        let back = ContactSet::parse(text.as_bytes(), "mem").unwrap();
        assert_eq!(back, contacts);
        assert!(ContactSet::parse("#objects=2 #ticks=2 d_T=1\n1,0,0,0\n".as_bytes(), "mem").is_err());
        assert!(ContactSet::parse("#objects=2 #ticks=2 d_T=1\n0,1,0,5\n".as_bytes(), "mem").is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn grid_join_matches_all_pairs(seed in any::<u64>(), n in 2u32..200, ticks in 1u32..200) {
            let params = RwpParams {
                n_objects: n,
                width: 300.0,
                height: 300.0,
                mean_speed: 2.0,
                tick_seconds: 3.0,
                duration_ticks: ticks,
                d_t: 12.0,
                seed,
            };
            let set = gen_rwp::<f64>(&params).unwrap();
            let fast = ContactSet::from_trajectories(&set);
            prop_assert_eq!(&fast.contacts, &brute_force(&set));
            for c in &fast.contacts {
                if c.validity.start.0 > 0 {
                    let t = c.validity.start.0 - 1;
                    prop_assert!(set.position(c.a, t).dist(&set.position(c.b, t)) > set.d_t());
                }
                if c.validity.end.0 + 1 < ticks {
                    let t = c.validity.end.0 + 1;
                    prop_assert!(set.position(c.a, t).dist(&set.position(c.b, t)) > set.d_t());
                }
            }
        }

        #[test]
        fn join_is_symmetric_in_input_order(seed in any::<u64>()) {
            let params = RwpParams { n_objects: 30, width: 100.0, height: 100.0, mean_speed: 1.5,
                tick_seconds: 2.0, duration_ticks: 40, d_t: 10.0, seed };
            let set = gen_rwp::<f64>(&params).unwrap();
            let w = set.horizon();
            let mut segs: Vec<_> = set.objects().map(|o| set.segment(o, w)).collect();
            let forward = window_join(&segs, 10.0, w);
            segs.reverse();
            prop_assert_eq!(forward, window_join(&segs, 10.0, w));
        }
    }
}
