//! Partitioning of `H_N` and its placement on the block store.
//!
//! Store layout, in block order:
//! 1. partitions, each a contiguous block range holding a header
//!    `count, (vertex, offset) * count` followed by vertex records;
//! 2. the partition directory `(first, count)` per partition;
//! 3. the time index: for every tick, `(vertex, partition)` per object,
//!    each tick starting on a fresh block.

use std::collections::{BTreeMap, HashSet, VecDeque};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::ReachGraph;
use crate::block_store::{BlockId, BlockRange, BlockReader, BlockStore};
use crate::codec::{Decoder, Encoder};
use crate::error::{Error, Result};
use crate::model::ObjectId;

pub const DEFAULT_PARTITION_DEPTH: u32 = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Placement {
    /// Breadth-first partitions of depth `d_p` in topological order.
    Topological,
    /// Shuffled vertices packed greedily into single blocks.
    Random { seed: u64 },
}

impl std::fmt::Display for Placement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Placement::Topological => write!(f, "topological"),
            Placement::Random { seed } => write!(f, "random:{seed}"),
        }
    }
}

impl std::str::FromStr for Placement {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.split_once(':') {
            None if s == "topological" => Ok(Placement::Topological),
            Some(("random", seed)) => seed
                .parse()
                .map(|seed| Placement::Random { seed })
                .map_err(|_| Error::InvalidParam(format!("bad placement seed in {s:?}"))),
            _ => Err(Error::InvalidParam(format!("unknown placement {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphIndexParams {
    pub d_p: u32,
    pub placement: Placement,
    pub page_size: usize,
}

impl Default for GraphIndexParams {
    fn default() -> Self {
        GraphIndexParams {
            d_p: DEFAULT_PARTITION_DEPTH,
            placement: Placement::Topological,
            page_size: crate::block_store::DEFAULT_PAGE_SIZE,
        }
    }
}

/// A vertex reference as stored on disk: the partition lets a traversal
/// fetch the target without any further lookup.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexRef {
    pub vertex: u32,
    pub partition: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LongRef {
    pub resolution: u32,
    pub t_a: u32,
    pub targets: Vec<VertexRef>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexRecord {
    pub id: u32,
    pub t_start: u32,
    pub t_end: u32,
    pub members: Vec<ObjectId>,
    /// Base out-edges with weight.
    pub children: Vec<(VertexRef, u32)>,
    /// Reverse base edges.
    pub parents: Vec<VertexRef>,
    pub long: Vec<LongRef>,
}

impl VertexRecord {
    pub fn long_targets(&self, resolution: u32, t_a: u32) -> Option<&[VertexRef]> {
        self.long
            .iter()
            .find(|l| l.resolution == resolution && l.t_a == t_a)
            .map(|l| l.targets.as_slice())
    }

    fn encode(&self, e: &mut Encoder) {
        e.u32(self.id).u32(self.t_start).u32(self.t_end).u32(self.members.len() as u32);
        for m in &self.members {
            e.u32(m.0);
        }
        e.u32(self.children.len() as u32);
        for (r, w) in &self.children {
            e.u32(r.vertex).u32(r.partition).u32(*w);
        }
        e.u32(self.parents.len() as u32);
        for r in &self.parents {
            e.u32(r.vertex).u32(r.partition);
        }
        e.u32(self.long.len() as u32);
        for l in &self.long {
            e.u32(l.resolution).u32(l.t_a).u32(l.targets.len() as u32);
            for r in &l.targets {
                e.u32(r.vertex).u32(r.partition);
            }
        }
    }

    fn decode(d: &mut Decoder<'_>) -> Result<Self> {
        let (id, t_start, t_end) = (d.u32()?, d.u32()?, d.u32()?);
        let members = (0..d.u32()?).map(|_| d.u32().map(ObjectId)).collect::<Result<_>>()?;
        let children = (0..d.u32()?)
            .map(|_| Ok((VertexRef { vertex: d.u32()?, partition: d.u32()? }, d.u32()?)))
            .collect::<Result<_>>()?;
        let parents = (0..d.u32()?)
            .map(|_| Ok(VertexRef { vertex: d.u32()?, partition: d.u32()? }))
            .collect::<Result<_>>()?;
        let long = (0..d.u32()?)
            .map(|_| {
                let (resolution, t_a) = (d.u32()?, d.u32()?);
                let targets = (0..d.u32()?)
                    .map(|_| Ok(VertexRef { vertex: d.u32()?, partition: d.u32()? }))
                    .collect::<Result<_>>()?;
                Ok(LongRef { resolution, t_a, targets })
            })
            .collect::<Result<_>>()?;
        Ok(VertexRecord { id, t_start, t_end, members, children, parents, long })
    }

    fn encoded_len(&self) -> usize {
        let longs: usize = self.long.iter().map(|l| 3 + 2 * l.targets.len()).sum();
        4 * (4 + self.members.len() + 1 + 3 * self.children.len() + 1 + 2 * self.parents.len() + 1 + longs)
    }
}

/// Visits vertices by `(t_end, id)`; each unassigned vertex roots a partition
/// holding the unassigned vertices within base-edge depth `d_p` of it.
/// Long edges are ignored.
pub fn partition_topological(h: &ReachGraph, d_p: u32) -> Vec<Vec<u32>> {
    let dag = &h.base;
    let mut order: Vec<u32> = (0..dag.vertex_count() as u32).collect();
    order.sort_by_key(|&v| (dag.vertex(v).t_end, v));
    let mut assigned = vec![false; dag.vertex_count()];
    let mut partitions = Vec::new();
    for root in order {
        if assigned[root as usize] {
            continue;
        }
        assigned[root as usize] = true;
        let mut members = vec![root];
        let mut queue = VecDeque::from([(root, 0u32)]);
        while let Some((v, depth)) = queue.pop_front() {
            if depth == d_p {
                continue;
            }
            for &(w, _) in dag.children(v) {
                if !assigned[w as usize] {
                    assigned[w as usize] = true;
                    members.push(w);
                    queue.push_back((w, depth + 1));
                }
            }
        }
        partitions.push(members);
    }
    partitions
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BuildStats {
    pub dag_vertices: u64,
    pub dag_edges: u64,
    pub long_edges: u64,
    pub partitions: u64,
    pub blocks: u64,
}

/// A placed, disk-resident ReachGraph.
#[derive(Debug)]
pub struct ReachGraphIndex {
    store: BlockStore,
    n_objects: u32,
    n_ticks: u32,
    resolutions: Vec<u32>,
    params: GraphIndexParams,
    directory_range: BlockRange,
    directory: Vec<BlockRange>,
    ti_first: u32,
    ti_blocks_per_tick: u32,
    stats: BuildStats,
}

const TI_ENTRY: usize = 8;

impl ReachGraphIndex {
    pub fn build(h: &ReachGraph, params: GraphIndexParams) -> Result<Self> {
        if params.d_p == 0 {
            return Err(Error::InvalidParam("partition depth must be >= 1".into()));
        }
        let dag = &h.base;
        let nv = dag.vertex_count();
        let mut long_by_vertex: Vec<BTreeMap<(u32, u32), Vec<u32>>> = vec![BTreeMap::new(); nv];
        for layer in &h.layers {
            for e in &layer.edges {
                long_by_vertex[e.from as usize].entry((layer.resolution, e.t_a)).or_default().push(e.to);
            }
        }
        // Records are built with placeholder partitions first, so that the
        // random packer can size them; sizes do not depend on the values.
        let record = |v: u32, part: &dyn Fn(u32) -> u32| {
            let cv = dag.vertex(v);
            let r = |w: u32| VertexRef { vertex: w, partition: part(w) };
            VertexRecord {
                id: v,
                t_start: cv.t_start,
                t_end: cv.t_end,
                members: cv.members.clone(),
                children: dag.children(v).iter().map(|&(w, wt)| (r(w), wt)).collect(),
                parents: dag.parents(v).iter().map(|&p| r(p)).collect(),
                long: long_by_vertex[v as usize]
                    .iter()
                    .map(|(&(resolution, t_a), ts)| LongRef { resolution, t_a, targets: ts.iter().map(|&w| r(w)).collect() })
                    .collect(),
            }
        };
        let partitions = match params.placement {
            Placement::Topological => partition_topological(h, params.d_p),
            Placement::Random { seed } => {
                let mut order: Vec<u32> = (0..nv as u32).collect();
                order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
                let mut parts: Vec<Vec<u32>> = Vec::new();
                let mut used = params.page_size;
                for v in order {
                    let len = record(v, &|_| 0).encoded_len() + TI_ENTRY;
                    if used + len > params.page_size {
                        parts.push(Vec::new());
                        used = 4;
                    }
                    parts.last_mut().unwrap().push(v);
                    used += len;
                }
                parts
            }
        };
        let mut part_of = vec![0u32; nv];
        for (p, members) in partitions.iter().enumerate() {
            for &v in members {
                part_of[v as usize] = p as u32;
            }
        }

        let mut store = BlockStore::new(params.page_size);
        let mut directory = Vec::with_capacity(partitions.len());
        for members in &partitions {
            let records: Vec<VertexRecord> = members.iter().map(|&v| record(v, &|w| part_of[w as usize])).collect();
            let mut header = Encoder::new();
            let mut body = Encoder::new();
            let base = 4 + TI_ENTRY * records.len();
            header.u32(records.len() as u32);
            for r in &records {
                header.u32(r.id).u32((base + body.len()) as u32);
                r.encode(&mut body);
            }
            let mut blob = header.into_bytes();
            blob.extend_from_slice(&body.buf);
            directory.push(store.append_blob(&blob));
        }
        let mut dir = Encoder::new();
        for r in &directory {
            dir.u32(r.first.0).u32(r.count);
        }
        let directory_range = store.append_blob(&dir.buf);

        let n = dag.n_objects;
        let per_block = params.page_size / TI_ENTRY;
        let ti_blocks_per_tick = (n as usize).div_ceil(per_block).max(1) as u32;
        let ti_first = store.len();
        for t in 0..dag.n_ticks {
            let mut e = Encoder::new();
            for o in 0..n {
                let v = dag.vertex_of(ObjectId(o), t);
                e.u32(v).u32(part_of[v as usize]);
            }
            let mut chunks = e.buf.chunks(per_block * TI_ENTRY);
            for _ in 0..ti_blocks_per_tick {
                store.append(chunks.next().unwrap_or(&[]))?;
            }
        }
        let stats = BuildStats {
            dag_vertices: nv as u64,
            dag_edges: dag.edge_count() as u64,
            long_edges: h.long_edge_count() as u64,
            partitions: partitions.len() as u64,
            blocks: store.len() as u64,
        };
        Ok(ReachGraphIndex {
            store,
            n_objects: n,
            n_ticks: dag.n_ticks,
            resolutions: h.resolutions(),
            params,
            directory_range,
            directory,
            ti_first,
            ti_blocks_per_tick,
            stats,
        })
    }

    pub fn store(&self) -> &BlockStore {
        &self.store
    }

    pub fn n_objects(&self) -> u32 {
        self.n_objects
    }

    pub fn n_ticks(&self) -> u32 {
        self.n_ticks
    }

    pub fn resolutions(&self) -> &[u32] {
        &self.resolutions
    }

    pub fn params(&self) -> GraphIndexParams {
        self.params
    }

    pub fn stats(&self) -> BuildStats {
        self.stats
    }

    pub fn partition_count(&self) -> usize {
        self.directory.len()
    }

    pub fn partition_range(&self, p: u32) -> Result<BlockRange> {
        self.directory
            .get(p as usize)
            .copied()
            .ok_or_else(|| Error::Corrupt(format!("partition {p} not in directory")))
    }

    /// Object `o` at tick `t` -> `(vertex, partition)`, one block read.
    pub fn find_vertex(&self, reader: &mut BlockReader<'_>, o: ObjectId, t: u32) -> Result<VertexRef> {
        if o.0 >= self.n_objects {
            return Err(Error::UnknownObject(o));
        }
        if t >= self.n_ticks {
            return Err(Error::IntervalOutsideHorizon {
                interval: crate::TimeInterval::new(t, t),
                horizon: crate::TimeInterval::horizon(self.n_ticks),
            });
        }
        let per_block = self.store.page_size() / TI_ENTRY;
        let block = self.ti_first + t * self.ti_blocks_per_tick + o.0 / per_block as u32;
        let data = reader.read(BlockId(block))?;
        let mut d = Decoder::at(data, (o.0 as usize % per_block) * TI_ENTRY);
        Ok(VertexRef { vertex: d.u32()?, partition: d.u32()? })
    }

    /// Every block of the partition is read; the record is then decoded
    /// from the partition bytes.
    pub fn read_vertex(&self, reader: &mut BlockReader<'_>, r: VertexRef) -> Result<VertexRecord> {
        let range = self.partition_range(r.partition)?;
        let bytes = reader.read_range(range)?;
        decode_from_partition(&bytes, r.vertex)
    }

    /// All member ids of partition `p`, uncounted.
    pub fn partition_members(&self, p: u32) -> Result<Vec<u32>> {
        let bytes = self.store.blob(self.partition_range(p)?)?;
        let mut d = Decoder::new(&bytes);
        let count = d.u32()?;
        (0..count)
            .map(|_| {
                let v = d.u32()?;
                d.u32()?;
                Ok(v)
            })
            .collect()
    }

    pub fn manifest(&self) -> String {
        let mut m = String::new();
        let p = &self.params;
        let s = &self.stats;
        let res: Vec<String> = self.resolutions.iter().map(u32::to_string).collect();
        writeln!(m, "kind=reachgraph").unwrap();
        writeln!(m, "objects={}", self.n_objects).unwrap();
        writeln!(m, "ticks={}", self.n_ticks).unwrap();
        writeln!(m, "page_size={}", p.page_size).unwrap();
        writeln!(m, "blocks={}", self.store.len()).unwrap();
        writeln!(m, "resolutions={}", res.join(",")).unwrap();
        writeln!(m, "d_p={}", p.d_p).unwrap();
        writeln!(m, "placement={}", p.placement).unwrap();
        writeln!(m, "partitions={}", self.directory.len()).unwrap();
        writeln!(m, "directory={},{}", self.directory_range.first.0, self.directory_range.count).unwrap();
        writeln!(m, "time_index={},{}", self.ti_first, self.ti_blocks_per_tick).unwrap();
        writeln!(m, "dag_vertices={}", s.dag_vertices).unwrap();
        writeln!(m, "dag_edges={}", s.dag_edges).unwrap();
        writeln!(m, "long_edges={}", s.long_edges).unwrap();
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
        let num = |k: &str| -> Result<u64> {
            get(k)?.parse().map_err(|_| Error::Corrupt(format!("{}: bad value for {k}", manifest.display())))
        };
        let pair = |k: &str| -> Result<(u32, u32)> {
            let v = get(k)?;
            let (a, b) = v.split_once(',').ok_or_else(|| Error::Corrupt(format!("bad {k}={v}")))?;
            Ok((a.parse().map_err(|_| Error::Corrupt(format!("bad {k}")))?, b.parse().map_err(|_| Error::Corrupt(format!("bad {k}")))?))
        };
        if get("kind")? != "reachgraph" {
            return Err(Error::Corrupt(format!("{} is not a reachgraph manifest", manifest.display())));
        }
        let page_size = num("page_size")? as usize;
        let store = BlockStore::load(&Self::blocks_path(manifest), page_size, num("blocks")? as u32)?;
        let resolutions = get("resolutions")?
            .split(',')
            .filter(|s| !s.is_empty())
            .map(|s| s.parse().map_err(|_| Error::Corrupt(format!("bad resolution {s:?}"))))
            .collect::<Result<Vec<u32>>>()?;
        let (dir_first, dir_count) = pair("directory")?;
        let directory_range = BlockRange { first: BlockId(dir_first), count: dir_count };
        let dir_bytes = store.blob(directory_range)?;
        let mut d = Decoder::new(&dir_bytes);
        let directory = (0..num("partitions")?)
            .map(|_| Ok(BlockRange { first: BlockId(d.u32()?), count: d.u32()? }))
            .collect::<Result<Vec<_>>>()?;
        let (ti_first, ti_blocks_per_tick) = pair("time_index")?;
        let stats = BuildStats {
            dag_vertices: num("dag_vertices")?,
            dag_edges: num("dag_edges")?,
            long_edges: num("long_edges")?,
            partitions: directory.len() as u64,
            blocks: store.len() as u64,
        };
        Ok(ReachGraphIndex {
            store,
            n_objects: num("objects")? as u32,
            n_ticks: num("ticks")? as u32,
            resolutions,
            params: GraphIndexParams { d_p: num("d_p")? as u32, placement: get("placement")?.parse()?, page_size },
            directory_range,
            directory,
            ti_first,
            ti_blocks_per_tick,
            stats,
        })
    }

    /// Decodes every vertex record, uncounted. Used by checks and dumps.
    pub fn all_records(&self) -> Result<Vec<(u32, VertexRecord)>> {
        let mut out = Vec::new();
        let mut seen = HashSet::new();
        for p in 0..self.directory.len() as u32 {
            let bytes = self.store.blob(self.directory[p as usize])?;
            for v in self.partition_members(p)? {
                if !seen.insert(v) {
                    return Err(Error::Corrupt(format!("vertex {v} stored twice")));
                }
                out.push((p, decode_from_partition(&bytes, v)?));
            }
        }
        out.sort_by_key(|(_, r)| r.id);
        Ok(out)
    }
}

fn decode_from_partition(bytes: &[u8], vertex: u32) -> Result<VertexRecord> {
    let mut d = Decoder::new(bytes);
    let count = d.u32()?;
    for _ in 0..count {
        let (v, offset) = (d.u32()?, d.u32()?);
        if v == vertex {
            return VertexRecord::decode(&mut Decoder::at(bytes, offset as usize));
        }
    }
    Err(Error::Corrupt(format!("vertex {vertex} missing from its partition")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contacts::ContactSet;
    use crate::fixture::{self, O1, O2, O3, O4};
    use crate::reachgraph::DEFAULT_RESOLUTIONS;

    fn fig_graph() -> ReachGraph {
        let cs = ContactSet::from_trajectories(&fixture::figure_one());
        ReachGraph::from_contacts(&cs, &DEFAULT_RESOLUTIONS).unwrap().1
    }

    fn labels(h: &ReachGraph, part: &[u32]) -> Vec<(u32, Vec<ObjectId>)> {
        let mut out: Vec<_> = part.iter().map(|&v| (h.base.vertex(v).t_end, h.base.vertex(v).members.clone())).collect();
        out.sort();
        out
    }

    #[test]
    fn figure_one_partitions() {
        let h = fig_graph();
        let parts = partition_topological(&h, 1);
        let got: Vec<_> = parts.iter().map(|p| labels(&h, p)).collect();
        let expected = vec![
            // {c0, c3, c4}
            vec![(0, vec![O1, O2]), (1, vec![O1]), (1, vec![O2, O3, O4])],
            vec![(0, vec![O3])],
            vec![(0, vec![O4])],
            // {c6, c8, c9}
            vec![(2, vec![O3, O4]), (3, vec![O3]), (3, vec![O4])],
            // {c7}
            vec![(3, vec![O1, O2])],
        ];
        assert_eq!(got, expected);
    }

    #[test]
    fn depth_one_is_root_plus_free_children() {
        let cs = crate::testutil::rwp_contacts(5, 15, 30);
        let h = ReachGraph::from_contacts(&cs, &[2, 4]).unwrap().1;
        let parts = partition_topological(&h, 1);
        for p in &parts {
            for &v in &p[1..] {
                assert!(h.base.parents(v).contains(&p[0]));
            }
        }
    }

    #[test]
    fn partitions_are_total_and_disjoint() {
        let cs = crate::testutil::rwp_contacts(9, 20, 60);
        let h = ReachGraph::from_contacts(&cs, &DEFAULT_RESOLUTIONS).unwrap().1;
        for d_p in [1, 3, 32] {
            let mut all: Vec<u32> = partition_topological(&h, d_p).concat();
            all.sort_unstable();
            assert_eq!(all, (0..h.base.vertex_count() as u32).collect::<Vec<_>>());
        }
    }

    #[test]
    fn find_vertex_and_records_on_fixture() {
        let h = fig_graph();
        let idx = ReachGraphIndex::build(&h, GraphIndexParams::default()).unwrap();
        let mut reader = idx.store().reader(4);
        let r = idx.find_vertex(&mut reader, O2, 1).unwrap();
        assert_eq!(reader.report().total_reads(), 1);
        let rec = idx.read_vertex(&mut reader, r).unwrap();
        assert_eq!(rec.members, vec![O2, O3, O4]);
        let r0 = idx.find_vertex(&mut reader, O1, 0).unwrap();
        assert_eq!(idx.read_vertex(&mut reader, r0).unwrap().members, vec![O1, O2]);
        // merged run: both ticks map to the surviving vertex
        assert_eq!(idx.find_vertex(&mut reader, O1, 2).unwrap(), idx.find_vertex(&mut reader, O2, 3).unwrap());
        assert!(matches!(idx.find_vertex(&mut reader, ObjectId(9), 0), Err(Error::UnknownObject(_))));
    }

    #[test]
    fn records_mirror_the_graph() {
        let cs = crate::testutil::rwp_contacts(2, 20, 50);
        let h = ReachGraph::from_contacts(&cs, &DEFAULT_RESOLUTIONS).unwrap().1;
        for placement in [Placement::Topological, Placement::Random { seed: 4 }] {
            let idx = ReachGraphIndex::build(&h, GraphIndexParams { d_p: 4, placement, page_size: 512 }).unwrap();
            let records = idx.all_records().unwrap();
            assert_eq!(records.len(), h.base.vertex_count());
            let part_of: Vec<u32> = records.iter().map(|(p, _)| *p).collect();
            for (_, r) in &records {
                let v = h.base.vertex(r.id);
                assert_eq!((r.t_start, r.t_end, &r.members), (v.t_start, v.t_end, &v.members));
                let kids: Vec<(u32, u32)> = r.children.iter().map(|(c, w)| (c.vertex, *w)).collect();
                assert_eq!(kids, h.base.children(r.id));
                let parents: Vec<u32> = r.parents.iter().map(|c| c.vertex).collect();
                assert_eq!(parents, h.base.parents(r.id));
                for c in r.children.iter().map(|(c, _)| c).chain(&r.parents) {
                    assert_eq!(c.partition, part_of[c.vertex as usize]);
                }
            }
            let stored: usize = records.iter().map(|(_, r)| r.long.iter().map(|l| l.targets.len()).sum::<usize>()).sum();
            assert_eq!(stored, h.long_edge_count());
        }
    }

    #[test]
    fn save_open_round_trip() {
        let h = fig_graph();
        let idx = ReachGraphIndex::build(&h, GraphIndexParams::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.manifest");
        idx.save(&path).unwrap();
        let back = ReachGraphIndex::open(&path).unwrap();
        assert_eq!(back.manifest(), idx.manifest());
        assert_eq!(back.all_records().unwrap(), idx.all_records().unwrap());
        let other = ReachGraphIndex::build(&h, GraphIndexParams::default()).unwrap();
        assert_eq!(other.manifest(), idx.manifest());
    }

    #[test]
    fn placement_parses() {
        assert_eq!("topological".parse::<Placement>().unwrap(), Placement::Topological);
        assert_eq!("random:5".parse::<Placement>().unwrap(), Placement::Random { seed: 5 });
        assert!("random:x".parse::<Placement>().is_err());
    }

    #[test]
    fn time_index_blocks_are_per_tick() {
        let cs = crate::testutil::rwp_contacts(1, 40, 10);
        let h = ReachGraph::from_contacts(&cs, &[2]).unwrap().1;
        let idx = ReachGraphIndex::build(&h, GraphIndexParams { d_p: 2, placement: Placement::Topological, page_size: 128 })
            .unwrap();
        // 40 objects * 8 bytes over 128-byte pages: 3 blocks per tick.
        assert_eq!(idx.ti_blocks_per_tick, 3);
        let mut reader = idx.store().reader(0);
        for t in 0..10 {
            for o in 0..40 {
                let r = idx.find_vertex(&mut reader, ObjectId(o), t).unwrap();
                assert_eq!(r.vertex, h.base.vertex_of(ObjectId(o), t));
            }
        }
    }
}
