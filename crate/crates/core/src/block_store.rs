//! Simulated disk: fixed-size blocks, an IO counter that tells random from
//! sequential reads, and an LRU buffer pool.
//!
//! A [`BlockStore`] owns the blocks and is append-only while an index is
//! being laid out. Queries read through a [`BlockReader`], which carries its
//! own buffer pool and counters, so any number of readers may share one store.
//!
//! A read is sequential when its block immediately follows the previously
//! requested block, random otherwise. Buffer hits cost nothing.

use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

pub const DEFAULT_PAGE_SIZE: usize = 4096;
pub const DEFAULT_BUFFER_BLOCKS: usize = 1024;
/// One random access costs as much as this many sequential ones.
pub const SEQUENTIAL_PER_RANDOM: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct BlockId(pub u32);

/// `count` consecutive blocks starting at `first`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BlockRange {
    pub first: BlockId,
    pub count: u32,
}

impl BlockRange {
    pub fn ids(&self) -> impl Iterator<Item = BlockId> {
        (self.first.0..self.first.0 + self.count).map(BlockId)
    }

    pub fn end(&self) -> u32 {
        self.first.0 + self.count
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct IoReport {
    pub random_reads: u64,
    pub sequential_reads: u64,
    pub writes: u64,
    pub normalized_cost: f64,
}

impl IoReport {
    pub fn new(random_reads: u64, sequential_reads: u64, writes: u64) -> Self {
        IoReport {
            random_reads,
            sequential_reads,
            writes,
            normalized_cost: random_reads as f64 + sequential_reads as f64 / SEQUENTIAL_PER_RANDOM,
        }
    }

    pub fn total_reads(&self) -> u64 {
        self.random_reads + self.sequential_reads
    }
}

impl std::ops::Sub for IoReport {
    type Output = IoReport;

    fn sub(self, rhs: IoReport) -> IoReport {
        IoReport::new(
            self.random_reads - rhs.random_reads,
            self.sequential_reads - rhs.sequential_reads,
            self.writes - rhs.writes,
        )
    }
}

pub struct BlockStore {
    page_size: usize,
    blocks: Vec<Box<[u8]>>,
    writes: u64,
}

impl std::fmt::Debug for BlockStore {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BlockStore")
            .field("page_size", &self.page_size)
            .field("blocks", &self.blocks.len())
            .field("writes", &self.writes)
            .finish()
    }
}

impl Default for BlockStore {
    fn default() -> Self {
        BlockStore::new(DEFAULT_PAGE_SIZE)
    }
}

impl BlockStore {
    pub fn new(page_size: usize) -> Self {
        assert!(page_size >= 64, "page size {page_size} is too small");
        BlockStore { page_size, blocks: Vec::new(), writes: 0 }
    }

    pub fn page_size(&self) -> usize {
        self.page_size
    }

    pub fn len(&self) -> u32 {
        self.blocks.len() as u32
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Allocates the next block, zero-padding `payload` to a full page.
    pub fn append(&mut self, payload: &[u8]) -> Result<BlockId> {
        if payload.len() > self.page_size {
            return Err(Error::PayloadTooLarge { len: payload.len(), page_size: self.page_size });
        }
        let mut block = vec![0u8; self.page_size].into_boxed_slice();
        block[..payload.len()].copy_from_slice(payload);
        self.blocks.push(block);
        self.writes += 1;
        Ok(BlockId(self.blocks.len() as u32 - 1))
    }

    /// Spreads `bytes` over as many consecutive blocks as needed (at least one).
    pub fn append_blob(&mut self, bytes: &[u8]) -> BlockRange {
        let first = BlockId(self.len());
        let mut count = 0;
        for chunk in bytes.chunks(self.page_size) {
            self.append(chunk).expect("chunk fits a page");
            count += 1;
        }
        if count == 0 {
            self.append(&[]).expect("empty payload fits");
            count = 1;
        }
        BlockRange { first, count }
    }

    /// Raw access without IO accounting; for loading in-memory directories.
    pub fn block(&self, id: BlockId) -> Result<&[u8]> {
        self.blocks
            .get(id.0 as usize)
            .map(|b| &b[..])
            .ok_or(Error::BlockOutOfRange { block: id.0, allocated: self.len() })
    }

    /// Concatenated payload of `range`, without IO accounting.
    pub fn blob(&self, range: BlockRange) -> Result<Vec<u8>> {
        let mut out = Vec::with_capacity(range.count as usize * self.page_size);
        for id in range.ids() {
            out.extend_from_slice(self.block(id)?);
        }
        Ok(out)
    }

    /// Write counter for the layout phase.
    pub fn report(&self) -> IoReport {
        IoReport::new(0, 0, self.writes)
    }

    pub fn reader(&self, buffer_blocks: usize) -> BlockReader<'_> {
        BlockReader::new(self, buffer_blocks)
    }

    /// A reader whose every access is a free buffer hit, for timing CPU work
    /// without disk cost.
    pub fn resident_reader(&self) -> BlockReader<'_> {
        let mut r = BlockReader::new(self, 0);
        r.resident = true;
        r
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        for b in &self.blocks {
            f.write_all(b)?;
        }
        f.flush()?;
        Ok(())
    }

    pub fn load(path: &Path, page_size: usize, blocks: u32) -> Result<Self> {
        let mut bytes = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut bytes)?;
        if bytes.len() != page_size * blocks as usize {
            return Err(Error::Corrupt(format!(
                "{} holds {} bytes, manifest promises {blocks} blocks of {page_size}",
                path.display(),
                bytes.len()
            )));
        }
        let blocks = bytes.chunks(page_size).map(|c| c.to_vec().into_boxed_slice()).collect();
        Ok(BlockStore { page_size, blocks, writes: 0 })
    }
}

/// Least-recently-used set of resident blocks.
#[derive(Debug, Clone, Default)]
pub struct BufferPool {
    capacity: usize,
    clock: u64,
    stamps: HashMap<u32, u64>,
    order: BTreeMap<u64, u32>,
}

impl BufferPool {
    pub fn new(capacity: usize) -> Self {
        BufferPool { capacity, ..Default::default() }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.stamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stamps.is_empty()
    }

    pub fn contains(&self, id: BlockId) -> bool {
        self.stamps.contains_key(&id.0)
    }

    /// Refreshes recency; returns whether `id` was resident.
    pub fn touch(&mut self, id: BlockId) -> bool {
        let Some(old) = self.stamps.get(&id.0).copied() else {
            return false;
        };
        self.clock += 1;
        self.order.remove(&old);
        self.order.insert(self.clock, id.0);
        self.stamps.insert(id.0, self.clock);
        true
    }

    /// Makes `id` resident, evicting the least recently used block when full.
    pub fn insert(&mut self, id: BlockId) {
        if self.capacity == 0 || self.touch(id) {
            return;
        }
        if self.stamps.len() == self.capacity {
            let (&stamp, &victim) = self.order.iter().next().expect("full pool is non-empty");
            self.order.remove(&stamp);
            self.stamps.remove(&victim);
        }
        self.clock += 1;
        self.order.insert(self.clock, id.0);
        self.stamps.insert(id.0, self.clock);
    }

    pub fn clear(&mut self) {
        self.stamps.clear();
        self.order.clear();
    }
}

/// A query's view of a store: private buffer pool plus read counters.
pub struct BlockReader<'a> {
    store: &'a BlockStore,
    pool: BufferPool,
    random: u64,
    sequential: u64,
    last_request: Option<u32>,
    resident: bool,
}

impl<'a> BlockReader<'a> {
    fn new(store: &'a BlockStore, buffer_blocks: usize) -> Self {
        BlockReader {
            store,
            pool: BufferPool::new(buffer_blocks),
            random: 0,
            sequential: 0,
            last_request: None,
            resident: false,
        }
    }

    pub fn store(&self) -> &'a BlockStore {
        self.store
    }

    pub fn page_size(&self) -> usize {
        self.store.page_size
    }

    pub fn read(&mut self, id: BlockId) -> Result<&'a [u8]> {
        let data = self.store.block(id)?;
        if self.resident {
            return Ok(data);
        }
        let sequential = self.last_request.is_some_and(|last| id.0 == last.wrapping_add(1));
        self.last_request = Some(id.0);
        if !self.pool.touch(id) {
            if sequential {
                self.sequential += 1;
            } else {
                self.random += 1;
            }
            self.pool.insert(id);
        }
        Ok(data)
    }

    /// Reads every block of `range` in order and concatenates the payloads.
    pub fn read_range(&mut self, range: BlockRange) -> Result<Vec<u8>> {
        let mut out = Vec::with_capacity(range.count as usize * self.store.page_size);
        for id in range.ids() {
            out.extend_from_slice(self.read(id)?);
        }
        Ok(out)
    }

    /// Drops every buffered block; counters are untouched.
    pub fn flush_buffer(&mut self) {
        self.pool.clear();
    }

    pub fn is_buffered(&self, id: BlockId) -> bool {
        self.resident || self.pool.contains(id)
    }

    pub fn report(&self) -> IoReport {
        IoReport::new(self.random, self.sequential, 0)
    }

    /// Zeroes the counters and empties the buffer, returning the final report.
    pub fn reset(&mut self) -> IoReport {
        let report = self.report();
        self.random = 0;
        self.sequential = 0;
        self.last_request = None;
        self.pool.clear();
        report
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn store_with(n: u32) -> BlockStore {
        let mut s = BlockStore::new(64);
        for i in 0..n {
            s.append(&[i as u8]).unwrap();
        }
        s
    }

    fn replay(store: &BlockStore, capacity: usize, seq: &[u32]) -> IoReport {
        let mut r = store.reader(capacity);
        for &b in seq {
            r.read(BlockId(b)).unwrap();
        }
        r.report()
    }

    #[test]
    fn adjacency_rule() {
        let s = store_with(16);
        let rep = replay(&s, 8, &[5, 6, 7]);
        assert_eq!((rep.random_reads, rep.sequential_reads), (1, 2));
        let rep = replay(&s, 8, &[5, 5]);
        assert_eq!((rep.random_reads, rep.sequential_reads), (1, 0));
        let rep = replay(&s, 8, &[5, 9, 6]);
        assert_eq!((rep.random_reads, rep.sequential_reads), (3, 0));
    }

    #[test]
    fn append_allocates_densely() {
        let mut s = BlockStore::new(64);
        assert_eq!(s.append(b"a").unwrap(), BlockId(0));
        assert_eq!(s.append(b"b").unwrap(), BlockId(1));
        let e = s.append(&[0u8; 65]).unwrap_err();
        assert!(matches!(e, Error::PayloadTooLarge { len: 65, page_size: 64 }));
        assert_eq!(s.append(&[7u8; 64]).unwrap(), BlockId(2));
        assert_eq!(s.report().writes, 3);
    }

    #[test]
    fn out_of_range_read() {
        let s = store_with(2);
        let mut r = s.reader(4);
        let e = r.read(BlockId(2)).unwrap_err();
        assert!(e.to_string().contains("block out of range"));
    }

    #[test]
    fn report_and_reset() {
        assert_eq!(IoReport::new(3, 40, 0).normalized_cost, 5.0);
        let s = store_with(50);
        let mut r = s.reader(0);
        assert_eq!(r.report(), IoReport::default());
        for b in 0..10 {
            r.read(BlockId(b)).unwrap();
        }
        r.reset();
        r.read(BlockId(1)).unwrap();
        assert_eq!(r.report().random_reads, 1);
    }

    #[test]
    fn lru_evicts_oldest() {
        let s = store_with(8);
        // capacity 2: 0,1 resident; touching 0 makes 1 the victim when 2 arrives.
        let rep = replay(&s, 2, &[0, 1, 0, 2, 1]);
        assert_eq!(rep.total_reads(), 4);
        let rep = replay(&s, 2, &[0, 1, 0, 2, 0]);
        assert_eq!(rep.total_reads(), 3);
    }

    #[test]
    fn blob_spans_consecutive_blocks() {
        let mut s = BlockStore::new(64);
        s.append(b"x").unwrap();
        let bytes: Vec<u8> = (0..150u8).collect();
        let range = s.append_blob(&bytes);
        assert_eq!(range, BlockRange { first: BlockId(1), count: 3 });
        let mut r = s.reader(8);
        let back = r.read_range(range).unwrap();
        assert_eq!(&back[..150], &bytes[..]);
        assert!(back[150..].iter().all(|&b| b == 0));
        assert_eq!((r.report().random_reads, r.report().sequential_reads), (1, 2));
    }

    #[test]
    fn resident_reader_is_free() {
        let s = store_with(4);
        let mut r = s.resident_reader();
        r.read(BlockId(3)).unwrap();
        assert_eq!(r.report(), IoReport::default());
    }

    #[test]
    fn save_load_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let s = store_with(5);
        let path = dir.path().join("x.blocks");
        s.save(&path).unwrap();
        let back = BlockStore::load(&path, 64, 5).unwrap();
        assert_eq!(back.block(BlockId(4)).unwrap()[0], 4);
        assert!(BlockStore::load(&path, 64, 6).is_err());
    }

    proptest! {
        #[test]
        fn content_roundtrip(payload in proptest::collection::vec(any::<u8>(), 0..=64)) {
            let mut s = BlockStore::new(64);
            let id = s.append(&payload).unwrap();
            let mut r = s.reader(1);
            let back = r.read(id).unwrap();
            prop_assert_eq!(&back[..payload.len()], &payload[..]);
            prop_assert!(back[payload.len()..].iter().all(|&b| b == 0));
        }

        #[test]
        fn deterministic_and_monotone_in_capacity(
            seq in proptest::collection::vec(0u32..24, 0..200),
            small in 0usize..8,
            extra in 0usize..16,
        ) {
            let s = store_with(24);
            let a = replay(&s, small, &seq);
            prop_assert_eq!(a, replay(&s, small, &seq));
            let b = replay(&s, small + extra, &seq);
            prop_assert!(b.normalized_cost <= a.normalized_cost + 1e-12);
        }
    }
}
