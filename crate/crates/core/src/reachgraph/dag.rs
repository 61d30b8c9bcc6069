//! Component DAG `D_N`: per-tick connected components of the TEN, with runs of
//! identical components collapsed into one vertex spanning several ticks.

use std::collections::VecDeque;

use crate::model::{ObjectId, ReachabilityQuery};
use crate::ten::TenGraph;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentVertex {
    pub id: u32,
    pub t_start: u32,
    pub t_end: u32,
    /// Sorted, non-empty.
    pub members: Vec<ObjectId>,
}

impl ComponentVertex {
    pub fn spans(&self, t: u32) -> bool {
        self.t_start <= t && t <= self.t_end
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct DagEdge {
    pub from: u32,
    pub to: u32,
    /// Ticks advanced along the edge: `to.t_end - from.t_end`.
    pub weight: u32,
}

/// Vertices are numbered in time order; every edge `u -> v` satisfies
/// `v.t_start == u.t_end + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentDag {
    pub n_objects: u32,
    pub n_ticks: u32,
    pub vertices: Vec<ComponentVertex>,
    out: Vec<Vec<(u32, u32)>>,
    inn: Vec<Vec<u32>>,
    /// `locator[t * n_objects + o]` is the vertex holding `o(t)`.
    locator: Vec<u32>,
}

struct Dsu(Vec<u32>);

impl Dsu {
    fn find(&mut self, x: u32) -> u32 {
        let mut r = x;
        while self.0[r as usize] != r {
            r = self.0[r as usize];
        }
        let mut c = x;
        while self.0[c as usize] != r {
            let next = self.0[c as usize];
            self.0[c as usize] = r;
            c = next;
        }
        r
    }

    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // Smaller root wins so labels do not depend on edge order.
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.0[hi as usize] = lo;
        }
    }
}

/// One vertex per connected component of each snapshot, weight-1 edges
/// between components sharing an object on consecutive ticks.
pub fn reduce_components(ten: &TenGraph) -> ComponentDag {
    let n = ten.n_objects();
    let n_ticks = ten.n_ticks();
    let mut vertices = Vec::new();
    let mut locator = vec![0u32; n as usize * n_ticks as usize];
    let mut dsu = Dsu((0..n).collect());
    let mut label = vec![u32::MAX; n as usize];
    for t in 0..n_ticks {
        for &(a, b) in ten.snapshot(t).edges {
            dsu.union(a.0, b.0);
        }
        for o in 0..n {
            let root = dsu.find(o);
            if label[root as usize] == u32::MAX {
                label[root as usize] = vertices.len() as u32;
                vertices.push(ComponentVertex { id: vertices.len() as u32, t_start: t, t_end: t, members: vec![] });
            }
            let v = label[root as usize];
            vertices[v as usize].members.push(ObjectId(o));
            locator[(t * n + o) as usize] = v;
        }
        for o in 0..n {
            label[o as usize] = u32::MAX;
            dsu.0[o as usize] = o;
        }
    }
    let mut edges = Vec::new();
    for t in 0..n_ticks.saturating_sub(1) {
        for o in 0..n {
            let from = locator[(t * n + o) as usize];
            let to = locator[((t + 1) * n + o) as usize];
            edges.push((from, to));
        }
    }
    ComponentDag::assemble(n, n_ticks, vertices, edges, locator)
}

/// Collapses every run `c_t, ..., c_{t+k}` of identical components linked
/// only by their identity edges into its last snapshot, which then spans the
/// whole run. Parents of `c_t` become parents of the survivor through an
/// aggregated edge.
pub fn merge_runs(dag: &ComponentDag) -> ComponentDag {
    let nv = dag.vertices.len();
    // head[v]: first vertex of v's run. Vertices are in time order, so the
    // parent of a run continuation is always settled first.
    let mut head: Vec<u32> = (0..nv as u32).collect();
    let mut last_of = vec![u32::MAX; nv];
    for v in 0..nv {
        if let [u] = dag.inn[v][..] {
            let uu = u as usize;
            if dag.out[uu].len() == 1 && dag.vertices[uu].members == dag.vertices[v].members {
                head[v] = head[uu];
            }
        }
        last_of[head[v] as usize] = v as u32;
    }
    // Survivors are the run tails, renumbered densely in original order.
    let mut new_id = vec![u32::MAX; nv];
    let mut vertices = Vec::new();
    for v in 0..nv {
        let h = head[v] as usize;
        if last_of[h] == v as u32 {
            new_id[v] = vertices.len() as u32;
            let old = &dag.vertices[v];
            vertices.push(ComponentVertex {
                id: vertices.len() as u32,
                t_start: dag.vertices[h].t_start,
                t_end: old.t_end,
                members: old.members.clone(),
            });
        }
    }
    let survivor = |v: usize| new_id[last_of[head[v] as usize] as usize];
    let mut edges = Vec::new();
    for v in 0..nv {
        for &(w, _) in &dag.out[v] {
            let (a, b) = (survivor(v), survivor(w as usize));
            if a != b {
                edges.push((a, b));
            }
        }
    }
    let locator = dag.locator.iter().map(|&v| survivor(v as usize)).collect();
    ComponentDag::assemble(dag.n_objects, dag.n_ticks, vertices, edges, locator)
}

impl ComponentDag {
    fn assemble(
        n_objects: u32,
        n_ticks: u32,
        vertices: Vec<ComponentVertex>,
        mut edges: Vec<(u32, u32)>,
        locator: Vec<u32>,
    ) -> Self {
        edges.sort_unstable();
        edges.dedup();
        let mut out = vec![Vec::new(); vertices.len()];
        let mut inn = vec![Vec::new(); vertices.len()];
        for (a, b) in edges {
            let w = vertices[b as usize].t_end - vertices[a as usize].t_end;
            out[a as usize].push((b, w));
            inn[b as usize].push(a);
        }
        ComponentDag { n_objects, n_ticks, vertices, out, inn, locator }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.out.iter().map(Vec::len).sum()
    }

    /// Out-edges `(target, weight)` sorted by target.
    pub fn children(&self, v: u32) -> &[(u32, u32)] {
        &self.out[v as usize]
    }

    /// Reverse base edges: sources of edges into `v`, sorted.
    pub fn parents(&self, v: u32) -> &[u32] {
        &self.inn[v as usize]
    }

    pub fn edges(&self) -> impl Iterator<Item = DagEdge> + '_ {
        self.out
            .iter()
            .enumerate()
            .flat_map(|(a, es)| es.iter().map(move |&(b, weight)| DagEdge { from: a as u32, to: b, weight }))
    }

    pub fn vertex_of(&self, o: ObjectId, t: u32) -> u32 {
        self.locator[(t * self.n_objects + o.0) as usize]
    }

    pub fn vertex(&self, v: u32) -> &ComponentVertex {
        &self.vertices[v as usize]
    }

    /// Distinct vertices alive at tick `t`, ascending.
    pub fn vertices_at(&self, t: u32) -> Vec<u32> {
        let n = self.n_objects as usize;
        let mut vs = self.locator[t as usize * n..(t as usize + 1) * n].to_vec();
        vs.sort_unstable();
        vs.dedup();
        vs
    }

    /// Is `to` reachable from `from` by base edges (or equal)?
    pub fn path_exists(&self, from: u32, to: u32) -> bool {
        let limit = self.vertices[to as usize].t_start;
        let mut seen = vec![false; self.vertices.len()];
        let mut queue = VecDeque::from([from]);
        seen[from as usize] = true;
        while let Some(v) = queue.pop_front() {
            if v == to {
                return true;
            }
            for &(w, _) in &self.out[v as usize] {
                if !seen[w as usize] && self.vertices[w as usize].t_start <= limit {
                    seen[w as usize] = true;
                    queue.push_back(w);
                }
            }
        }
        false
    }

    /// In-memory reachability through the DAG.
    pub fn reachable(&self, q: &ReachabilityQuery) -> bool {
        self.path_exists(self.vertex_of(q.source, q.t1()), self.vertex_of(q.destination, q.t2()))
    }
}
