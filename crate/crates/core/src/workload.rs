//! Deterministic synthetic workloads: random-waypoint walkers, vehicles on a
//! Manhattan road grid, and random reachability queries.
//!
//! All generators use ChaCha8 (`rand_chacha::ChaCha8Rng`) seeded with
//! `seed_from_u64(seed)`. Trajectory generators give object `o` its own
//! stream (`set_stream(o)`), so objects are independent of each other and of
//! the population size. Motion is computed in `f64` and converted to the
//! target scalar at the end.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{Config, EnvironmentBounds, Point, ReachabilityQuery, TimeInterval};
use crate::scalar::Scalar;
use crate::trajectory::TrajectorySet;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RwpParams {
    pub n_objects: u32,
    pub width: f64,
    pub height: f64,
    /// Meters per second; per-leg speeds are uniform in `[0.5, 1.5] x mean`.
    pub mean_speed: f64,
    pub tick_seconds: f64,
    pub duration_ticks: u32,
    pub d_t: f64,
    pub seed: u64,
}

impl RwpParams {
    /// 500 walkers over 2,000 ticks at the density of 10k people in 100 km^2,
    /// 2 m/s mean speed, 6 s sampling and a 25 m contact range.
    pub fn desk() -> Self {
        RwpParams {
            n_objects: 500,
            width: 2236.0,
            height: 2236.0,
            mean_speed: 2.0,
            tick_seconds: 6.0,
            duration_ticks: 2000,
            d_t: 25.0,
            seed: 7,
        }
    }

    pub fn max_speed(&self) -> f64 {
        1.5 * self.mean_speed
    }

    fn validate(&self) -> Result<()> {
        let ok = self.n_objects > 0
            && self.duration_ticks > 0
            && self.width > 0.0
            && self.height > 0.0
            && self.mean_speed >= 0.0
            && self.tick_seconds > 0.0
            && self.d_t > 0.0;
        ok.then_some(()).ok_or_else(|| Error::InvalidParam(format!("invalid random-waypoint parameters {self:?}")))
    }
}

fn object_rng(seed: u64, object: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(object as u64);
    rng
}

fn to_set<S: Scalar>(
    d_t: f64,
    width: f64,
    height: f64,
    ticks: u32,
    per_object: Vec<Vec<(f64, f64)>>,
) -> Result<TrajectorySet<S>> {
    let env = EnvironmentBounds::new(S::of(width), S::of(height));
    let config = Config::new(S::of(d_t), env, TimeInterval::horizon(ticks));
    let per: Vec<Vec<Point<S>>> = per_object
        .into_iter()
        .map(|v| v.into_iter().map(|(x, y)| env.clamp(Point::new(S::of(x), S::of(y)))).collect())
        .collect();
    TrajectorySet::from_objects(config, &per)
}

/// Random waypoint: walk straight to a uniform destination at a uniform
/// speed, then pick the next destination and speed.
pub fn gen_rwp<S: Scalar>(p: &RwpParams) -> Result<TrajectorySet<S>> {
    p.validate()?;
    let mut per_object = Vec::with_capacity(p.n_objects as usize);
    for o in 0..p.n_objects {
        let mut rng = object_rng(p.seed, o);
        let pick_leg = |rng: &mut ChaCha8Rng| {
            let dest = (rng.gen_range(0.0..=p.width), rng.gen_range(0.0..=p.height));
            let speed = if p.mean_speed > 0.0 {
                rng.gen_range(0.5 * p.mean_speed..=1.5 * p.mean_speed)
            } else {
                0.0
            };
            (dest, speed)
        };
        let mut pos = (rng.gen_range(0.0..=p.width), rng.gen_range(0.0..=p.height));
        let (mut dest, mut speed) = pick_leg(&mut rng);
        let mut samples = Vec::with_capacity(p.duration_ticks as usize);
        samples.push(pos);
        for _ in 1..p.duration_ticks {
            let step = speed * p.tick_seconds;
            let (dx, dy) = (dest.0 - pos.0, dest.1 - pos.1);
            let remaining = (dx * dx + dy * dy).sqrt();
            if remaining <= step {
                pos = dest;
                (dest, speed) = pick_leg(&mut rng);
            } else {
                pos = (pos.0 + dx / remaining * step, pos.1 + dy / remaining * step);
            }
            samples.push(pos);
        }
        per_object.push(samples);
    }
    to_set(p.d_t, p.width, p.height, p.duration_ticks, per_object)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoadGridParams {
    pub n_objects: u32,
    pub width: f64,
    pub height: f64,
    /// Distance between parallel roads.
    pub road_spacing: f64,
    /// Roads per axis; the network is a centred `(lines-1) x (lines-1)` block grid.
    pub road_lines: u32,
    pub min_speed: f64,
    pub max_speed: f64,
    pub tick_seconds: f64,
    pub duration_ticks: u32,
    pub d_t: f64,
    pub seed: u64,
}

impl RoadGridParams {
    /// 300 vehicles on an 8 x 8 road grid with 300 m spacing that covers about
    /// 12% of a 6 km x 6 km environment.
    pub fn desk() -> Self {
        RoadGridParams {
            n_objects: 300,
            width: 6000.0,
            height: 6000.0,
            road_spacing: 300.0,
            road_lines: 8,
            min_speed: 5.0,
            max_speed: 15.0,
            tick_seconds: 5.0,
            duration_ticks: 2000,
            d_t: 60.0,
            seed: 11,
        }
    }

    /// Lower-left intersection of the network.
    pub fn origin(&self) -> (f64, f64) {
        let span = self.road_spacing * (self.road_lines - 1) as f64;
        ((self.width - span) / 2.0, (self.height - span) / 2.0)
    }

    fn validate(&self) -> Result<()> {
        let span = self.road_spacing * self.road_lines.saturating_sub(1) as f64;
        let ok = self.n_objects > 0
            && self.duration_ticks > 0
            && self.road_lines >= 2
            && self.road_spacing > 0.0
            && span <= self.width
            && span <= self.height
            && self.min_speed >= 0.0
            && self.max_speed >= self.min_speed
            && self.tick_seconds > 0.0
            && self.d_t > 0.0;
        ok.then_some(()).ok_or_else(|| Error::InvalidParam(format!("invalid road-grid parameters {self:?}")))
    }
}

const DIRECTIONS: [(i32, i32); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];

/// Vehicles driving along a Manhattan grid, choosing uniformly among the
/// available directions at every intersection.
pub fn gen_road_grid<S: Scalar>(p: &RoadGridParams) -> Result<TrajectorySet<S>> {
    p.validate()?;
    let (x0, y0) = p.origin();
    let lines = p.road_lines as i32;
    let valid = |i: i32, j: i32| (0..lines).contains(&i) && (0..lines).contains(&j);
    let mut per_object = Vec::with_capacity(p.n_objects as usize);
    for o in 0..p.n_objects {
        let mut rng = object_rng(p.seed, o);
        let pick_dir = |rng: &mut ChaCha8Rng, i: i32, j: i32| -> (i32, i32) {
            let options: Vec<_> = DIRECTIONS.iter().copied().filter(|(dx, dy)| valid(i + dx, j + dy)).collect();
            options[rng.gen_range(0..options.len())]
        };
        let speed = |rng: &mut ChaCha8Rng| {
            if p.max_speed > p.min_speed {
                rng.gen_range(p.min_speed..=p.max_speed)
            } else {
                p.min_speed
            }
        };
        let (mut i, mut j) = (rng.gen_range(0..lines), rng.gen_range(0..lines));
        let mut dir = pick_dir(&mut rng, i, j);
        let mut along = rng.gen_range(0.0..p.road_spacing);
        let mut v = speed(&mut rng);
        let position = |i: i32, j: i32, dir: (i32, i32), along: f64| {
            (
                x0 + i as f64 * p.road_spacing + dir.0 as f64 * along,
                y0 + j as f64 * p.road_spacing + dir.1 as f64 * along,
            )
        };
        let mut samples = Vec::with_capacity(p.duration_ticks as usize);
        samples.push(position(i, j, dir, along));
        for _ in 1..p.duration_ticks {
            let mut travel = v * p.tick_seconds;
            while travel > 0.0 {
                let left = p.road_spacing - along;
                if travel < left {
                    along += travel;
                    travel = 0.0;
                } else {
                    travel -= left;
                    i += dir.0;
                    j += dir.1;
                    along = 0.0;
                    dir = pick_dir(&mut rng, i, j);
                    v = speed(&mut rng);
                }
            }
            samples.push(position(i, j, dir, along));
        }
        per_object.push(samples);
    }
    to_set(p.d_t, p.width, p.height, p.duration_ticks, per_object)
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueryWorkload {
    pub queries: Vec<ReachabilityQuery>,
    pub seed: u64,
}

/// `n` queries with distinct uniform endpoints, interval length (in ticks)
/// uniform in `len_range`, placed uniformly inside `horizon`.
pub fn gen_queries(
    horizon: TimeInterval,
    n_objects: u32,
    n: usize,
    len_range: (u32, u32),
    seed: u64,
) -> Result<QueryWorkload> {
    let (lo, hi) = len_range;
    if lo == 0 || lo > hi || hi > horizon.len() {
        return Err(Error::InvalidParam(format!(
            "query length range [{lo},{hi}] does not fit the horizon {horizon}"
        )));
    }
    if n_objects < 2 && n > 0 {
        return Err(Error::InvalidParam("queries need at least two objects".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let queries = (0..n)
        .map(|_| {
            let source = rng.gen_range(0..n_objects);
            let mut destination = rng.gen_range(0..n_objects - 1);
            if destination >= source {
                destination += 1;
            }
            let len = rng.gen_range(lo..=hi);
            let start = horizon.start.0 + rng.gen_range(0..=horizon.len() - len);
            ReachabilityQuery::new(source, destination, start, start + len - 1)
        })
        .collect();
    Ok(QueryWorkload { queries, seed })
}

impl QueryWorkload {
    /// `source,destination,start,end` per line.
    pub fn to_text(&self) -> String {
        let mut out = String::from("#source,destination,start,end\n");
        for q in &self.queries {
            out.push_str(&format!("{},{},{},{}\n", q.source.0, q.destination.0, q.t1(), q.t2()));
        }
        out
    }

    pub fn parse(text: &str, source: &str) -> Result<Self> {
        let mut queries = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let err = || Error::Parse {
                path: source.to_string(),
                line: i + 1,
                msg: "expected source,destination,start,end".into(),
            };
            let nums: Vec<u32> = line
                .split(',')
                .map(|s| s.trim().parse::<u32>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| err())?;
            let [s, d, a, b] = nums[..] else { return Err(err()) };
            if a > b {
                return Err(err());
            }
            queries.push(ReachabilityQuery::new(s, d, a, b));
        }
        Ok(QueryWorkload { queries, seed: 0 })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ObjectId;

    fn small_rwp(seed: u64) -> RwpParams {
        RwpParams {
            n_objects: 40,
            width: 500.0,
            height: 400.0,
            mean_speed: 2.0,
            tick_seconds: 6.0,
            duration_ticks: 300,
            d_t: 25.0,
            seed,
        }
    }

    #[test]
    fn rwp_is_deterministic() {
        let a = gen_rwp::<f64>(&small_rwp(3)).unwrap().to_text();
        let b = gen_rwp::<f64>(&small_rwp(3)).unwrap().to_text();
        assert_eq!(a, b);
        assert_ne!(a, gen_rwp::<f64>(&small_rwp(4)).unwrap().to_text());
    }

    #[test]
    fn zero_speed_is_stationary() {
        let p = RwpParams { mean_speed: 0.0, ..small_rwp(1) };
        let set = gen_rwp::<f64>(&p).unwrap();
        for o in set.objects() {
            assert!((1..set.n_ticks()).all(|t| set.position(o, t) == set.position(o, 0)));
        }
    }

    #[test]
    fn rwp_displacement_is_bounded() {
        let p = small_rwp(9);
        let bound = p.max_speed() * p.tick_seconds + 1e-9;
        for set in [gen_rwp::<f64>(&p).unwrap()] {
            for o in set.objects() {
                for t in 1..set.n_ticks() {
                    assert!(set.position(o, t).dist(&set.position(o, t - 1)) <= bound);
                }
            }
        }
        let set32 = gen_rwp::<f32>(&p).unwrap();
        for o in set32.objects() {
            for t in 1..set32.n_ticks() {
                let d = set32.position(o, t).dist(&set32.position(o, t - 1)) as f64;
                assert!(d <= bound + 1e-3);
            }
        }
    }

    fn small_road(seed: u64) -> RoadGridParams {
        RoadGridParams { n_objects: 50, duration_ticks: 400, seed, ..RoadGridParams::desk() }
    }

    #[test]
    fn road_grid_is_deterministic_and_on_roads() {
        let p = small_road(5);
        let set = gen_road_grid::<f64>(&p).unwrap();
        assert_eq!(set.to_text(), gen_road_grid::<f64>(&p).unwrap().to_text());
        let (x0, y0) = p.origin();
        let on_line = |v: f64, origin: f64| {
            let k = ((v - origin) / p.road_spacing).round();
            (v - origin - k * p.road_spacing).abs() < 1e-6 && (0.0..p.road_lines as f64).contains(&k)
        };
        for o in set.objects() {
            for t in 0..set.n_ticks() {
                let q = set.position(o, t);
                assert!(on_line(q.x, x0) || on_line(q.y, y0), "{o} at {t}: {q:?}");
            }
        }
    }

    #[test]
    fn road_grid_occupies_few_cells() {
        // Cells one road spacing wide.
        let p = small_road(2);
        let set = gen_road_grid::<f64>(&p).unwrap();
        let cols = (p.width / p.road_spacing).ceil() as usize;
        let rows = (p.height / p.road_spacing).ceil() as usize;
        let mut hit = vec![false; cols * rows];
        for t in 0..set.n_ticks() {
            for q in set.frame(t) {
                let c = ((q.x / p.road_spacing) as usize).min(cols - 1);
                let r = ((q.y / p.road_spacing) as usize).min(rows - 1);
                hit[r * cols + c] = true;
            }
        }
        let fraction = hit.iter().filter(|&&h| h).count() as f64 / hit.len() as f64;
        assert!(fraction < 0.20, "occupancy {fraction}");
    }

    #[test]
    fn queries_respect_ranges() {
        let h = TimeInterval::horizon(1000);
        assert!(gen_queries(h, 10, 0, (10, 20), 1).unwrap().queries.is_empty());
        let w = gen_queries(h, 10, 500, (150, 350), 42).unwrap();
        assert_eq!(w, gen_queries(h, 10, 500, (150, 350), 42).unwrap());
        for q in &w.queries {
            assert_ne!(q.source, q.destination);
            assert!((150..=350).contains(&q.interval.len()));
            assert!(h.contains_interval(&q.interval));
            assert!(q.source < ObjectId(10) && q.destination < ObjectId(10));
        }
        assert!(gen_queries(h, 10, 5, (10, 1001), 1).is_err());
        let parsed = QueryWorkload::parse(&w.to_text(), "mem").unwrap();
        assert_eq!(parsed.queries, w.queries);
    }
}
