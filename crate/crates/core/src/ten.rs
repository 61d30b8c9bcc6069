//! Time-expanded network: one vertex per `(object, tick)`, bidirectional
//! contact edges inside a tick and directed hold edges `o(t) -> o(t+1)`.
//!
//! This is an in-memory reference structure and the input of the component
//! reduction; queries never run against it on disk.

use std::collections::VecDeque;

use crate::contacts::ContactSet;
use crate::error::{Error, Result};
use crate::model::{ObjectId, ReachabilityQuery, TimeInstant, TimeInterval};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TenVertex {
    pub object: ObjectId,
    pub t: TimeInstant,
}

/// The induced sub-graph at one tick.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot<'a> {
    pub t: TimeInstant,
    pub n_objects: u32,
    pub edges: &'a [(ObjectId, ObjectId)],
}

#[derive(Debug, Clone)]
pub struct TenGraph {
    n_objects: u32,
    n_ticks: u32,
    /// Contact edges per tick, `a < b`, sorted.
    edges: Vec<Vec<(ObjectId, ObjectId)>>,
    /// CSR adjacency per tick: `offsets[t][o]..offsets[t][o+1]` into `neighbors[t]`.
    offsets: Vec<Vec<u32>>,
    neighbors: Vec<Vec<ObjectId>>,
}

pub fn build_ten(contacts: &ContactSet, n_objects: u32, horizon: TimeInterval) -> Result<TenGraph> {
    if horizon.start.0 != 0 {
        return Err(Error::HorizonMismatch(format!("TEN horizon must start at 0, got {horizon}")));
    }
    let n_ticks = horizon.len();
    let mut edges = vec![Vec::new(); n_ticks as usize];
    for c in &contacts.contacts {
        if c.b.0 >= n_objects {
            return Err(Error::UnknownObject(c.b));
        }
        if !horizon.contains_interval(&c.validity) {
            return Err(Error::HorizonMismatch(format!("contact {c} lies outside {horizon}")));
        }
        for t in c.validity.ticks() {
            edges[t as usize].push((c.a, c.b));
        }
    }
    let mut offsets = Vec::with_capacity(n_ticks as usize);
    let mut neighbors = Vec::with_capacity(n_ticks as usize);
    for tick_edges in edges.iter_mut() {
        tick_edges.sort_unstable();
        tick_edges.dedup();
        let mut degree = vec![0u32; n_objects as usize + 1];
        for &(a, b) in tick_edges.iter() {
            degree[a.index() + 1] += 1;
            degree[b.index() + 1] += 1;
        }
        for i in 1..degree.len() {
            degree[i] += degree[i - 1];
        }
        let mut fill = degree.clone();
        let mut adj = vec![ObjectId(0); tick_edges.len() * 2];
        for &(a, b) in tick_edges.iter() {
            adj[fill[a.index()] as usize] = b;
            fill[a.index()] += 1;
            adj[fill[b.index()] as usize] = a;
            fill[b.index()] += 1;
        }
        offsets.push(degree);
        neighbors.push(adj);
    }
    Ok(TenGraph { n_objects, n_ticks, edges, offsets, neighbors })
}

impl TenGraph {
    pub fn n_objects(&self) -> u32 {
        self.n_objects
    }

    pub fn n_ticks(&self) -> u32 {
        self.n_ticks
    }

    pub fn vertex_count(&self) -> u64 {
        self.n_objects as u64 * self.n_ticks as u64
    }

    pub fn hold_edge_count(&self) -> u64 {
        self.n_objects as u64 * (self.n_ticks as u64 - 1)
    }

    pub fn contact_edge_count(&self) -> u64 {
        self.edges.iter().map(|e| e.len() as u64).sum()
    }

    pub fn edge_count(&self) -> u64 {
        self.hold_edge_count() + self.contact_edge_count()
    }

    pub fn snapshot(&self, t: u32) -> Snapshot<'_> {
        Snapshot { t: TimeInstant(t), n_objects: self.n_objects, edges: &self.edges[t as usize] }
    }

    /// Contact partners of `o` at tick `t`.
    pub fn contact_neighbors(&self, o: ObjectId, t: u32) -> &[ObjectId] {
        let off = &self.offsets[t as usize];
        &self.neighbors[t as usize][off[o.index()] as usize..off[o.index() + 1] as usize]
    }

    pub fn has_contact_edge(&self, a: ObjectId, b: ObjectId, t: u32) -> bool {
        self.contact_neighbors(a, t).contains(&b)
    }

    /// Out-neighbours of a vertex: contact partners at the same tick plus the
    /// hold edge to the next tick.
    pub fn successors(&self, v: TenVertex) -> impl Iterator<Item = TenVertex> + '_ {
        let t = v.t.0;
        let same_tick = self.contact_neighbors(v.object, t).iter().map(move |&o| TenVertex { object: o, t: v.t });
        let hold = (t + 1 < self.n_ticks).then_some(TenVertex { object: v.object, t: TimeInstant(t + 1) });
        same_tick.chain(hold)
    }

    /// Is there a directed path `source(t1) -> destination(t2)`?
    pub fn path_exists(&self, from: TenVertex, to: TenVertex) -> bool {
        if to.t < from.t {
            return false;
        }
        let n = self.n_objects as usize;
        let base = from.t.0 as usize;
        let span = (to.t.0 - from.t.0 + 1) as usize;
        let mut seen = vec![false; n * span];
        let idx = |v: &TenVertex| (v.t.0 as usize - base) * n + v.object.index();
        let mut queue = VecDeque::from([from]);
        seen[idx(&from)] = true;
        while let Some(v) = queue.pop_front() {
            if v == to {
                return true;
            }
            for w in self.successors(v) {
                if w.t <= to.t && !seen[idx(&w)] {
                    seen[idx(&w)] = true;
                    queue.push_back(w);
                }
            }
        }
        false
    }

    /// Debug dump: `u_object,u_tick,v_object,v_tick,kind` per directed edge.
    pub fn dump_edges(&self) -> String {
        let mut out = String::new();
        for t in 0..self.n_ticks {
            for &(a, b) in &self.edges[t as usize] {
                out.push_str(&format!("{},{t},{},{t},contact\n", a.0, b.0));
            }
            if t + 1 < self.n_ticks {
                for o in 0..self.n_objects {
                    out.push_str(&format!("{o},{t},{o},{},hold\n", t + 1));
                }
            }
        }
        out
    }
}

/// Reference semantics: directed path from `source(t1)` to `destination(t2)`.
pub fn ten_reachable(g: &TenGraph, q: &ReachabilityQuery) -> Result<bool> {
    if q.t2() >= g.n_ticks {
        return Err(Error::IntervalOutsideHorizon { interval: q.interval, horizon: TimeInterval::horizon(g.n_ticks) });
    }
    for o in [q.source, q.destination] {
        if o.0 >= g.n_objects {
            return Err(Error::UnknownObject(o));
        }
    }
    Ok(g.path_exists(
        TenVertex { object: q.source, t: q.interval.start },
        TenVertex { object: q.destination, t: q.interval.end },
    ))
}
