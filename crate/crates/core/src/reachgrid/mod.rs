//! ReachGrid: temporal buckets of `R_T` ticks, each with a uniform spatial
//! grid of side `R_S`. A cell holds the trajectory pieces that pass through
//! it during the bucket.
//!
//! Store layout: cells in `(bucket, cell)` order, each a block range holding
//! `count, (object, tick, x, y) * count` sorted by `(tick, object)`; then the
//! cell directory; then the object locator, `|O|` cell ids per tick.
//!
//! A piece that leaves its cell at tick `t + 1` also carries the sample of
//! `t + 1`, so a reader can always tell which cell the object moved to.

mod query;

pub use query::GridAnswer;

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::block_store::{BlockId, BlockRange, BlockReader, BlockStore};
use crate::codec::{Decoder, Encoder};
use crate::error::{Error, Result};
use crate::model::{ObjectId, Point, TimeInterval};
use crate::scalar::Scalar;
use crate::trajectory::TrajectorySet;

pub const DEFAULT_BUCKET_TICKS: u32 = 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridParams<S> {
    pub r_t: u32,
    pub r_s: S,
    pub page_size: usize,
}

/// Uniform grid over the environment; cell id is `row * cols + col`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridGeometry<S> {
    pub r_s: S,
    pub cols: u32,
    pub rows: u32,
}

impl<S: Scalar> GridGeometry<S> {
    pub fn new(r_s: S, width: S, height: S) -> Self {
        let count = |extent: S| (extent / r_s).ceil().to_u32().unwrap_or(1).max(1);
        GridGeometry { r_s, cols: count(width), rows: count(height) }
    }

    pub fn n_cells(&self) -> u32 {
        self.cols * self.rows
    }

    fn axis(&self, v: S, n: u32) -> u32 {
        let k = (v / self.r_s).floor();
        if k <= S::zero() {
            0
        } else {
            k.to_u32().unwrap_or(u32::MAX).min(n - 1)
        }
    }

    pub fn cell_of(&self, p: &Point<S>) -> u32 {
        self.axis(p.y, self.rows) * self.cols + self.axis(p.x, self.cols)
    }

    /// Cells intersecting the rectangle `[lo, hi]`, ascending.
    pub fn cells_in_rect(&self, lo: Point<S>, hi: Point<S>) -> Vec<u32> {
        let (c0, c1) = (self.axis(lo.x, self.cols), self.axis(hi.x, self.cols));
        let (r0, r1) = (self.axis(lo.y, self.rows), self.axis(hi.y, self.rows));
        (r0..=r1).flat_map(|r| (c0..=c1).map(move |c| r * self.cols + c)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellRecord<S> {
    pub object: ObjectId,
    pub tick: u32,
    pub pos: Point<S>,
}

#[derive(Debug)]
pub struct GridIndex<S> {
    store: BlockStore,
    geometry: GridGeometry<S>,
    r_t: u32,
    d_t: S,
    width: S,
    height: S,
    n_objects: u32,
    n_ticks: u32,
    cells: HashMap<(u32, u32), BlockRange>,
    directory_range: BlockRange,
    locator_first: u32,
}

fn record_len<S: Scalar>() -> usize {
    8 + 2 * S::BYTES
}

pub fn build_grid<S: Scalar>(set: &TrajectorySet<S>, params: GridParams<S>) -> Result<GridIndex<S>> {
    if params.r_t == 0 || params.r_s.partial_cmp(&S::zero()) != Some(std::cmp::Ordering::Greater) {
        return Err(Error::InvalidParam(format!("R_T must be >= 1 and R_S > 0, got {} and {}", params.r_t, params.r_s)));
    }
    let env = set.config.environment;
    let geometry = GridGeometry::new(params.r_s, env.width, env.height);
    let n = set.n_objects();
    let n_ticks = set.n_ticks();
    let mut store = BlockStore::new(params.page_size);
    let mut cells = HashMap::new();
    let mut directory = Encoder::new();
    let mut n_dir = 0u32;
    for b in 0..n_ticks.div_ceil(params.r_t) {
        let (bs, be) = (b * params.r_t, ((b + 1) * params.r_t).min(n_ticks) - 1);
        let mut pieces: HashMap<u32, Vec<CellRecord<S>>> = HashMap::new();
        for o in set.objects() {
            for t in bs..=be {
                let pos = set.position(o, t);
                let c = geometry.cell_of(&pos);
                pieces.entry(c).or_default().push(CellRecord { object: o, tick: t, pos });
                if t < be {
                    let next = set.position(o, t + 1);
                    if geometry.cell_of(&next) != c {
                        pieces.entry(c).or_default().push(CellRecord { object: o, tick: t + 1, pos: next });
                    }
                }
            }
        }
        let mut ids: Vec<u32> = pieces.keys().copied().collect();
        ids.sort_unstable();
        for c in ids {
            let mut recs = pieces.remove(&c).unwrap();
            recs.sort_by_key(|r| (r.tick, r.object));
            let mut e = Encoder::new();
            e.u32(recs.len() as u32);
            for r in &recs {
                e.u32(r.object.0).u32(r.tick).scalar(r.pos.x).scalar(r.pos.y);
            }
            let range = store.append_blob(&e.buf);
            cells.insert((b, c), range);
            directory.u32(b).u32(c).u32(range.first.0).u32(range.count);
            n_dir += 1;
        }
    }
    let mut dir = Encoder::new();
    dir.u32(n_dir);
    dir.buf.extend_from_slice(&directory.buf);
    let directory_range = store.append_blob(&dir.buf);

    let locator_first = store.len();
    let mut loc = Encoder::new();
    for t in 0..n_ticks {
        for p in set.frame(t) {
            loc.u32(geometry.cell_of(p));
        }
    }
    for chunk in loc.buf.chunks(params.page_size) {
        store.append(chunk)?;
    }
    Ok(GridIndex {
        store,
        geometry,
        r_t: params.r_t,
        d_t: set.d_t(),
        width: env.width,
        height: env.height,
        n_objects: n,
        n_ticks,
        cells,
        directory_range,
        locator_first,
    })
}

impl<S: Scalar> GridIndex<S> {
    pub fn store(&self) -> &BlockStore {
        &self.store
    }

    pub fn geometry(&self) -> GridGeometry<S> {
        self.geometry
    }

    pub fn r_t(&self) -> u32 {
        self.r_t
    }

    pub fn d_t(&self) -> S {
        self.d_t
    }

    pub fn n_objects(&self) -> u32 {
        self.n_objects
    }

    pub fn n_ticks(&self) -> u32 {
        self.n_ticks
    }

    pub fn n_buckets(&self) -> u32 {
        self.n_ticks.div_ceil(self.r_t)
    }

    pub fn bucket_interval(&self, b: u32) -> TimeInterval {
        TimeInterval::new(b * self.r_t, ((b + 1) * self.r_t).min(self.n_ticks) - 1)
    }

    pub fn bucket_of(&self, t: u32) -> u32 {
        t / self.r_t
    }

    pub fn cell_range(&self, bucket: u32, cell: u32) -> Option<BlockRange> {
        self.cells.get(&(bucket, cell)).copied()
    }

    /// Non-empty cells of a bucket, ascending.
    pub fn cells_of_bucket(&self, bucket: u32) -> Vec<u32> {
        let mut v: Vec<u32> = self.cells.keys().filter(|(b, _)| *b == bucket).map(|&(_, c)| c).collect();
        v.sort_unstable();
        v
    }

    /// Reads and decodes a cell; empty cells cost nothing.
    pub fn read_cell(&self, reader: &mut BlockReader<'_>, bucket: u32, cell: u32) -> Result<Vec<CellRecord<S>>> {
        match self.cell_range(bucket, cell) {
            None => Ok(Vec::new()),
            Some(range) => decode_cell(&reader.read_range(range)?),
        }
    }

    /// The cell holding `o` at tick `t`, one locator block read.
    pub fn locate(&self, reader: &mut BlockReader<'_>, o: ObjectId, t: u32) -> Result<u32> {
        if o.0 >= self.n_objects {
            return Err(Error::UnknownObject(o));
        }
        if t >= self.n_ticks {
            return Err(Error::IntervalOutsideHorizon { interval: TimeInterval::new(t, t), horizon: TimeInterval::horizon(self.n_ticks) });
        }
        let byte = (t as usize * self.n_objects as usize + o.index()) * 4;
        let page = self.store.page_size();
        let data = reader.read(BlockId(self.locator_first + (byte / page) as u32))?;
        Decoder::at(data, byte % page).u32()
    }

    /// `find_cells`: distinct cells holding `seeds` at `t`, ascending.
    pub fn find_cells(&self, reader: &mut BlockReader<'_>, seeds: &[ObjectId], t: u32) -> Result<Vec<u32>> {
        let mut out = seeds.iter().map(|&o| self.locate(reader, o, t)).collect::<Result<Vec<_>>>()?;
        out.sort_unstable();
        out.dedup();
        Ok(out)
    }

    /// `neighbor_cells`: cells meeting the `d_T`-inflated bounding box of the
    /// given positions.
    pub fn neighbor_cells(&self, positions: &[Point<S>]) -> Vec<u32> {
        let Some(first) = positions.first() else { return Vec::new() };
        let (mut lo, mut hi) = (*first, *first);
        for p in positions {
            lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        let d = self.d_t;
        self.geometry.cells_in_rect(Point::new(lo.x - d, lo.y - d), Point::new(hi.x + d, hi.y + d))
    }

    pub fn manifest(&self) -> String {
        let mut m = String::new();
        writeln!(m, "kind=reachgrid").unwrap();
        writeln!(m, "scalar=f{}", S::BYTES * 8).unwrap();
        writeln!(m, "objects={}", self.n_objects).unwrap();
        writeln!(m, "ticks={}", self.n_ticks).unwrap();
        writeln!(m, "width={}", self.width).unwrap();
        writeln!(m, "height={}", self.height).unwrap();
        writeln!(m, "d_T={}", self.d_t).unwrap();
        writeln!(m, "R_T={}", self.r_t).unwrap();
        writeln!(m, "R_S={}", self.geometry.r_s).unwrap();
        writeln!(m, "page_size={}", self.store.page_size()).unwrap();
        writeln!(m, "blocks={}", self.store.len()).unwrap();
        writeln!(m, "cells={}", self.cells.len()).unwrap();
        writeln!(m, "directory={},{}", self.directory_range.first.0, self.directory_range.count).unwrap();
        writeln!(m, "locator={}", self.locator_first).unwrap();
        m
    }

    pub fn blocks_path(manifest: &Path) -> PathBuf {
        manifest.with_extension("blocks")
    }

    pub fn save(&self, manifest: &Path) -> Result<()> {
        std::fs::write(manifest, self.manifest())?;
        self.store.save(&Self::blocks_path(manifest))
    }

    pub fn open(manifest: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(manifest)?;
        let kv = crate::codec::parse_manifest(&text, manifest)?;
        let get = |k: &str| kv.get(k).ok_or_else(|| Error::Corrupt(format!("{}: missing key {k}", manifest.display())));
        let bad = |k: &str| Error::Corrupt(format!("{}: bad value for {k}", manifest.display()));
        let num = |k: &str| -> Result<u64> { get(k)?.parse().map_err(|_| bad(k)) };
        let scalar = |k: &str| -> Result<S> { get(k)?.parse().map_err(|_| bad(k)) };
        if get("kind")? != "reachgrid" {
            return Err(Error::Corrupt(format!("{} is not a reachgrid manifest", manifest.display())));
        }
        if get("scalar")? != &format!("f{}", S::BYTES * 8) {
            return Err(Error::Corrupt(format!("{}: scalar type mismatch", manifest.display())));
        }
        let page_size = num("page_size")? as usize;
        let store = BlockStore::load(&Self::blocks_path(manifest), page_size, num("blocks")? as u32)?;
        let (a, b) = get("directory")?.split_once(',').ok_or_else(|| bad("directory"))?;
        let directory_range = BlockRange {
            first: BlockId(a.parse().map_err(|_| bad("directory"))?),
            count: b.parse().map_err(|_| bad("directory"))?,
        };
        let bytes = store.blob(directory_range)?;
        let mut d = Decoder::new(&bytes);
        let mut cells = HashMap::new();
        for _ in 0..d.u32()? {
            let (bucket, cell, first, count) = (d.u32()?, d.u32()?, d.u32()?, d.u32()?);
            cells.insert((bucket, cell), BlockRange { first: BlockId(first), count });
        }
        let (width, height) = (scalar("width")?, scalar("height")?);
        Ok(GridIndex {
            store,
            geometry: GridGeometry::new(scalar("R_S")?, width, height),
            r_t: num("R_T")? as u32,
            d_t: scalar("d_T")?,
            width,
            height,
            n_objects: num("objects")? as u32,
            n_ticks: num("ticks")? as u32,
            cells,
            directory_range,
            locator_first: num("locator")? as u32,
        })
    }
}

pub(crate) fn decode_cell<S: Scalar>(bytes: &[u8]) -> Result<Vec<CellRecord<S>>> {
    let mut d = Decoder::new(bytes);
    let count = d.u32()? as usize;
    if bytes.len() < 4 + count * record_len::<S>() {
        return Err(Error::Corrupt("cell shorter than its record count".into()));
    }
    (0..count)
        .map(|_| Ok(CellRecord { object: ObjectId(d.u32()?), tick: d.u32()?, pos: Point::new(d.scalar()?, d.scalar()?) }))
        .collect()
}
