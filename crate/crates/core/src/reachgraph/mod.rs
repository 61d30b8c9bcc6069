//! ReachGraph: the component DAG of the contact network, augmented with
//! long edges at several time resolutions, partitioned and laid out on blocks.

mod dag;
mod layout;
mod query;

pub use dag::{merge_runs, reduce_components, ComponentDag, ComponentVertex, DagEdge};
pub use layout::{
    partition_topological, BuildStats, GraphIndexParams, LongRef, Placement, ReachGraphIndex, VertexRecord, VertexRef,
    DEFAULT_PARTITION_DEPTH,
};
pub use query::{Direction, Engine, GraphAnswer, TraceStep};

use crate::contacts::ContactSet;
use crate::error::Result;
use crate::ten::{build_ten, TenGraph};

pub const DEFAULT_RESOLUTIONS: [u32; 5] = [2, 4, 8, 16, 32];

/// Long edge `from@t_a -> to@(t_a + L)`: `to` spans `t_a + L` and is reachable
/// from `from`, which spans the aligned tick `t_a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct LongEdge {
    pub from: u32,
    pub to: u32,
    pub t_a: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LongEdgeLayer {
    pub resolution: u32,
    /// Sorted by `(from, to, t_a)`.
    pub edges: Vec<LongEdge>,
}

/// `H_N`: the base DAG plus one long-edge layer per resolution.
#[derive(Debug, Clone)]
pub struct ReachGraph {
    pub base: ComponentDag,
    pub layers: Vec<LongEdgeLayer>,
}

impl ReachGraph {
    /// Contacts -> TEN -> reduced and merged DAG -> augmented graph.
    pub fn from_contacts(contacts: &ContactSet, resolutions: &[u32]) -> Result<(TenGraph, ReachGraph)> {
        let ten = build_ten(contacts, contacts.n_objects, contacts.horizon)?;
        let dag = merge_runs(&reduce_components(&ten));
        let h = augment(dag, resolutions)?;
        Ok((ten, h))
    }

    pub fn resolutions(&self) -> Vec<u32> {
        self.layers.iter().map(|l| l.resolution).collect()
    }

    pub fn long_edge_count(&self) -> usize {
        self.layers.iter().map(|l| l.edges.len()).sum()
    }
}

/// Builds every layer by a forward sweep per aligned interval `[kL, (k+1)L]`
/// that propagates source bitsets through the base DAG.
pub fn augment(base: ComponentDag, resolutions: &[u32]) -> Result<ReachGraph> {
    if resolutions.iter().any(|&l| l < 2) || resolutions.windows(2).any(|w| w[0] >= w[1]) {
        return Err(crate::Error::InvalidParam(format!(
            "resolutions must be strictly ascending and >= 2, got {resolutions:?}"
        )));
    }
    // Vertices sorted by t_end form a topological order.
    let mut by_end: Vec<u32> = (0..base.vertex_count() as u32).collect();
    by_end.sort_by_key(|&v| (base.vertex(v).t_end, v));
    let ends: Vec<u32> = by_end.iter().map(|&v| base.vertex(v).t_end).collect();

    let mut layers = Vec::new();
    for &l in resolutions {
        let mut edges = Vec::new();
        let mut t_a = 0;
        while t_a + l < base.n_ticks {
            sweep_interval(&base, &by_end, &ends, t_a, t_a + l, &mut edges);
            t_a += l;
        }
        edges.sort_unstable();
        layers.push(LongEdgeLayer { resolution: l, edges });
    }
    Ok(ReachGraph { base, layers })
}

fn sweep_interval(dag: &ComponentDag, by_end: &[u32], ends: &[u32], t_a: u32, t_b: u32, out: &mut Vec<LongEdge>) {
    let sources = dag.vertices_at(t_a);
    let words = sources.len().div_ceil(64);
    let mut labels: std::collections::HashMap<u32, Vec<u64>> = std::collections::HashMap::new();
    for (i, &s) in sources.iter().enumerate() {
        labels.entry(s).or_insert_with(|| vec![0; words])[i / 64] |= 1 << (i % 64);
    }
    // Only vertices ending inside [t_a, t_b) push labels forward.
    let lo = ends.partition_point(|&e| e < t_a);
    let hi = ends.partition_point(|&e| e < t_b);
    for &v in &by_end[lo..hi] {
        let Some(bits) = labels.get(&v).cloned() else { continue };
        for &(w, _) in dag.children(v) {
            if dag.vertex(w).t_start > t_b {
                continue;
            }
            let slot = labels.entry(w).or_insert_with(|| vec![0; words]);
            for (a, b) in slot.iter_mut().zip(&bits) {
                *a |= b;
            }
        }
    }
    for target in dag.vertices_at(t_b) {
        let Some(bits) = labels.get(&target) else { continue };
        for (i, &s) in sources.iter().enumerate() {
            if bits[i / 64] >> (i % 64) & 1 == 1 && s != target {
                out.push(LongEdge { from: s, to: target, t_a });
            }
        }
    }
}
