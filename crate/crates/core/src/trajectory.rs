//! Trajectory storage and the plain-text trajectory file format.
//!
//! ```text
//! #objects=N #ticks=M width=W height=H d_T=D
//! object_id,tick,x,y
//! ```
//!
//! Records are sorted by `(tick, object_id)` and every object has exactly one
//! sample per tick.

use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{Config, EnvironmentBounds, ObjectId, Point, Sample, TimeInstant, TimeInterval};
use crate::scalar::Scalar;

/// Positions of a constant population over the horizon, stored tick-major.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySet<S> {
    pub config: Config<S>,
    n_objects: u32,
    positions: Vec<Point<S>>,
}

/// One object's full trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<S> {
    pub object: ObjectId,
    pub samples: Vec<Sample<S>>,
}

/// The samples of one trajectory that fall inside `window`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySegment<S> {
    pub object: ObjectId,
    pub window: TimeInterval,
    pub samples: Vec<Sample<S>>,
}

impl<S: Scalar> TrajectorySegment<S> {
    pub fn position_at(&self, t: TimeInstant) -> Option<Point<S>> {
        let offset = t.0.checked_sub(self.samples.first()?.t.0)? as usize;
        self.samples.get(offset).filter(|s| s.t == t).map(|s| s.pos)
    }
}

impl<S: Scalar> TrajectorySet<S> {
    /// Builds from tick-major positions (`positions[t * n_objects + o]`).
    pub fn from_tick_major(config: Config<S>, n_objects: u32, positions: Vec<Point<S>>) -> Result<Self> {
        if n_objects == 0 {
            return Err(Error::InvalidParam("trajectory set needs at least one object".into()));
        }
        if config.horizon.start.0 != 0 {
            return Err(Error::HorizonMismatch(format!("horizon must start at tick 0, got {}", config.horizon)));
        }
        let expected = n_objects as usize * config.horizon.len() as usize;
        if positions.len() != expected {
            return Err(Error::InvalidParam(format!(
                "expected {expected} positions for {n_objects} objects over {} ticks, got {}",
                config.horizon.len(),
                positions.len()
            )));
        }
        if let Some(i) = positions.iter().position(|p| !config.environment.contains(p)) {
            return Err(Error::InvalidParam(format!(
                "sample of object {} at tick {} lies outside the environment",
                i % n_objects as usize,
                i / n_objects as usize
            )));
        }
        Ok(TrajectorySet { config, n_objects, positions })
    }

    /// Builds from per-object position sequences (`per_object[o][t]`).
    pub fn from_objects(config: Config<S>, per_object: &[Vec<Point<S>>]) -> Result<Self> {
        let ticks = config.horizon.len() as usize;
        if let Some((o, _)) = per_object.iter().enumerate().find(|(_, v)| v.len() != ticks) {
            return Err(Error::InvalidParam(format!("object {o} does not cover every tick of the horizon")));
        }
        let n = per_object.len();
        let mut positions = Vec::with_capacity(n * ticks);
        for t in 0..ticks {
            positions.extend(per_object.iter().map(|v| v[t]));
        }
        Self::from_tick_major(config, n as u32, positions)
    }

    pub fn n_objects(&self) -> u32 {
        self.n_objects
    }

    pub fn n_ticks(&self) -> u32 {
        self.config.horizon.len()
    }

    pub fn horizon(&self) -> TimeInterval {
        self.config.horizon
    }

    pub fn d_t(&self) -> S {
        self.config.d_t
    }

    pub fn position(&self, o: ObjectId, t: u32) -> Point<S> {
        self.positions[t as usize * self.n_objects as usize + o.index()]
    }

    /// All positions at tick `t`, indexed by object.
    pub fn frame(&self, t: u32) -> &[Point<S>] {
        let n = self.n_objects as usize;
        &self.positions[t as usize * n..(t as usize + 1) * n]
    }

    pub fn objects(&self) -> impl Iterator<Item = ObjectId> {
        (0..self.n_objects).map(ObjectId)
    }

    pub fn trajectory(&self, o: ObjectId) -> Trajectory<S> {
        Trajectory { object: o, samples: self.segment(o, self.horizon()).samples }
    }

    /// `r_o(window)`; the window is clipped to the horizon.
    pub fn segment(&self, o: ObjectId, window: TimeInterval) -> TrajectorySegment<S> {
        let samples = window
            .ticks()
            .filter(|&t| t < self.n_ticks())
            .map(|t| Sample { object: o, t: TimeInstant(t), pos: self.position(o, t) })
            .collect();
        TrajectorySegment { object: o, window, samples }
    }

    pub fn header(&self) -> String {
        format!(
            "#objects={} #ticks={} width={} height={} d_T={}",
            self.n_objects,
            self.n_ticks(),
            self.config.environment.width,
            self.config.environment.height,
            self.config.d_t
        )
    }

    pub fn to_text(&self) -> String {
        let mut out = self.header();
        out.push('\n');
        for t in 0..self.n_ticks() {
            for (o, p) in self.frame(t).iter().enumerate() {
                writeln!(out, "{o},{t},{},{}", p.x, p.y).unwrap();
            }
        }
        out
    }

    pub fn write_file(&self, path: &Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        f.write_all(self.to_text().as_bytes())?;
        f.flush()?;
        Ok(())
    }

    pub fn read_file(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::parse(BufReader::new(f), &path.display().to_string())
    }

    pub fn parse_str(text: &str) -> Result<Self> {
        Self::parse(text.as_bytes(), "<memory>")
    }

    pub fn parse<R: BufRead>(reader: R, source: &str) -> Result<Self> {
        let err = |line: usize, msg: String| Error::Parse { path: source.to_string(), line, msg };
        let mut lines = reader.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| err(1, "missing header".into()))?;
        let header = header?;
        let fields = parse_header(&header).map_err(|m| err(1, m))?;
        let get = |k: &str| fields.iter().find(|(key, _)| key == k).map(|(_, v)| v.as_str());
        let need = |k: &str| get(k).ok_or_else(|| err(1, format!("header lacks `{k}`")));
        let n_objects: u32 = need("objects")?.parse().map_err(|_| err(1, "bad #objects".into()))?;
        let n_ticks: u32 = need("ticks")?.parse().map_err(|_| err(1, "bad #ticks".into()))?;
        let width: S = need("width")?.parse().map_err(|_| err(1, "bad width".into()))?;
        let height: S = need("height")?.parse().map_err(|_| err(1, "bad height".into()))?;
        let d_t: S = need("d_T")?.parse().map_err(|_| err(1, "bad d_T".into()))?;
        if n_objects == 0 || n_ticks == 0 {
            return Err(err(1, "empty population or horizon".into()));
        }
        if !(width > S::zero() && height > S::zero() && d_t > S::zero()) {
            return Err(err(1, "width, height and d_T must be positive".into()));
        }
        let config = Config::new(d_t, EnvironmentBounds::new(width, height), TimeInterval::horizon(n_ticks));

        let total = n_objects as usize * n_ticks as usize;
        let mut positions = Vec::with_capacity(total);
        for (i, line) in lines {
            let line = line?;
            let lineno = i + 1;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split(',').map(str::trim);
            let mut next = |what: &str| parts.next().ok_or_else(|| err(lineno, format!("missing {what}")));
            let o: u32 = next("object_id")?.parse().map_err(|_| err(lineno, "bad object_id".into()))?;
            let t: u32 = next("tick")?.parse().map_err(|_| err(lineno, "bad tick".into()))?;
            let x: S = next("x")?.parse().map_err(|_| err(lineno, "bad x".into()))?;
            let y: S = next("y")?.parse().map_err(|_| err(lineno, "bad y".into()))?;
            let idx = positions.len();
            if idx >= total {
                return Err(err(lineno, "more records than #objects x #ticks".into()));
            }
            let (want_t, want_o) = ((idx / n_objects as usize) as u32, (idx % n_objects as usize) as u32);
            if (t, o) != (want_t, want_o) {
                return Err(err(
                    lineno,
                    format!("expected record for object {want_o} at tick {want_t}, found object {o} at tick {t}"),
                ));
            }
            let p = Point::new(x, y);
            if !config.environment.contains(&p) {
                return Err(err(lineno, "position outside the environment".into()));
            }
            positions.push(p);
        }
        if positions.len() != total {
            return Err(err(0, format!("expected {total} records, found {}", positions.len())));
        }
        Self::from_tick_major(config, n_objects, positions)
    }
}

/// Splits `#key=value #key=value key=value` into pairs.
pub(crate) fn parse_header(line: &str) -> std::result::Result<Vec<(String, String)>, String> {
    if !line.starts_with('#') {
        return Err("header must start with '#'".into());
    }
    line.split_whitespace()
        .map(|tok| {
            let tok = tok.trim_start_matches('#');
            tok.split_once('=')
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .ok_or_else(|| format!("malformed header field `{tok}`"))
        })
        .collect()
}
