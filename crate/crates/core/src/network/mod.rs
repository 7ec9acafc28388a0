//! Finite weighted networks and the infinite families they are cut from.

mod exhaustion;
mod family;
mod io;

pub use exhaustion::{CollapsedBall, Exhaustion};
pub use family::{BirthDeathRule, Family, Site};
pub use io::{load_network, parse_network, save_network, write_network};

use std::collections::VecDeque;
use std::fmt;

use thiserror::Error;

/// Vertex label. Labels are dense: a network with `n` vertices uses
/// `VertexId(0)..VertexId(n - 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexId(pub u32);

impl VertexId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn from_index(i: usize) -> Self {
        VertexId(u32::try_from(i).expect("vertex index exceeds u32 range"))
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Undirected edge in canonical orientation (`a < b`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub a: VertexId,
    pub b: VertexId,
    pub conductance: f64,
}

impl Edge {
    pub fn resistance(&self) -> f64 {
        1.0 / self.conductance
    }

    pub fn other(&self, x: VertexId) -> VertexId {
        if x == self.a {
            self.b
        } else {
            self.a
        }
    }
}

#[derive(Debug, Error)]
pub enum NetworkError {
    #[error("edge ({a}, {b}) has non-positive or non-finite conductance {c}")]
    NonPositiveConductance { a: u32, b: u32, c: f64 },
    #[error("self-loop at vertex {0}")]
    SelfLoop(u32),
    #[error("edge ({0}, {1}) listed twice")]
    DuplicateEdge(u32, u32),
    #[error("root {0} is not incident to any edge")]
    RootIsolated(u32),
    #[error("edges exist outside the connected component of the root")]
    RootDisconnected,
    #[error("vertex {0} is not part of the network")]
    UnknownVertex(u32),
    #[error("exhaustion radius {0} leaves no interior to collapse")]
    EmptyInterior(u32),
    #[error("invalid family: {0}")]
    InvalidFamily(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A finite network with symmetric, strictly positive conductances and a
/// distinguished root.
///
/// Adjacency is stored in compressed rows sorted by neighbour label, which is
/// the canonical neighbour ordering used by the walk sampler. Every edge lies
/// in the connected component of the root; other labels (if any) are isolated.
#[derive(Clone, Debug, PartialEq)]
pub struct Network {
    root: VertexId,
    offsets: Vec<usize>,
    adjacent: Vec<VertexId>,
    slot_conductance: Vec<f64>,
    slot_edge: Vec<usize>,
    edges: Vec<Edge>,
}

impl Network {
    /// Builds a network from an edge list. Rejects non-positive conductances,
    /// self-loops, repeated pairs, an isolated root and edges that cannot be
    /// reached from the root.
    pub fn build_finite<I>(edges: I, root: VertexId) -> Result<Network, NetworkError>
    where
        I: IntoIterator<Item = (VertexId, VertexId, f64)>,
    {
        Self::with_vertex_count(edges, root, 0)
    }

    /// Like [`Network::build_finite`] but reserves at least `min_vertices`
    /// labels, so trailing isolated labels survive.
    pub fn with_vertex_count<I>(edges: I, root: VertexId, min_vertices: usize) -> Result<Network, NetworkError>
    where
        I: IntoIterator<Item = (VertexId, VertexId, f64)>,
    {
        let mut list = Vec::new();
        for (x, y, c) in edges {
            if !(c.is_finite() && c > 0.0) {
                return Err(NetworkError::NonPositiveConductance { a: x.0, b: y.0, c });
            }
            if x == y {
                return Err(NetworkError::SelfLoop(x.0));
            }
            let (a, b) = if x < y { (x, y) } else { (y, x) };
            list.push(Edge { a, b, conductance: c });
        }
        list.sort_by_key(|e| (e.a, e.b));
        for w in list.windows(2) {
            if w[0].a == w[1].a && w[0].b == w[1].b {
                return Err(NetworkError::DuplicateEdge(w[0].a.0, w[0].b.0));
            }
        }
        let n = list.iter().map(|e| e.b.index() + 1).max().unwrap_or(0).max(root.index() + 1).max(min_vertices);
        let net = Self::assemble(n, list, root);
        if net.degree(root) == 0 {
            return Err(NetworkError::RootIsolated(root.0));
        }
        let reached = net.component_of(root);
        if net.edges.iter().any(|e| !reached[e.a.index()]) {
            return Err(NetworkError::RootDisconnected);
        }
        Ok(net)
    }

    /// Builds a network keeping only the edges in the root's component.
    /// Used by surgeries that can legitimately split off pieces.
    pub(crate) fn root_component<I>(edges: I, root: VertexId, n: usize) -> Result<Network, NetworkError>
    where
        I: IntoIterator<Item = Edge>,
    {
        let mut list: Vec<Edge> =
            edges.into_iter().map(|e| if e.a < e.b { e } else { Edge { a: e.b, b: e.a, ..e } }).collect();
        list.sort_by_key(|e| (e.a, e.b));
        let full = Self::assemble(n.max(root.index() + 1), list, root);
        if full.degree(root) == 0 {
            return Err(NetworkError::RootIsolated(root.0));
        }
        let reached = full.component_of(root);
        if full.edges.iter().all(|e| reached[e.a.index()]) {
            return Ok(full);
        }
        let kept = full.edges.iter().filter(|e| reached[e.a.index()]).copied().collect();
        Ok(Self::assemble(full.vertex_count(), kept, root))
    }

    /// `edges` must be canonical, sorted and duplicate-free.
    fn assemble(n: usize, edges: Vec<Edge>, root: VertexId) -> Network {
        let mut degree = vec![0usize; n];
        for e in &edges {
            degree[e.a.index()] += 1;
            degree[e.b.index()] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let m2 = *offsets.last().unwrap();
        let mut adjacent = vec![VertexId(0); m2];
        let mut slot_conductance = vec![0.0; m2];
        let mut slot_edge = vec![0; m2];
        let mut fill = offsets[..n].to_vec();
        // Edges are sorted by (a, b): for a fixed vertex, neighbours smaller
        // than it arrive (as `a`) in increasing order, then larger ones (as
        // `b`) in increasing order. Two passes keep every row sorted.
        for (k, e) in edges.iter().enumerate() {
            let s = fill[e.b.index()];
            adjacent[s] = e.a;
            slot_conductance[s] = e.conductance;
            slot_edge[s] = k;
            fill[e.b.index()] += 1;
        }
        for (k, e) in edges.iter().enumerate() {
            let s = fill[e.a.index()];
            adjacent[s] = e.b;
            slot_conductance[s] = e.conductance;
            slot_edge[s] = k;
            fill[e.a.index()] += 1;
        }
        Network { root, offsets, adjacent, slot_conductance, slot_edge, edges }
    }

    fn component_of(&self, start: VertexId) -> Vec<bool> {
        let mut seen = vec![false; self.vertex_count()];
        let mut queue = VecDeque::from([start]);
        seen[start.index()] = true;
        while let Some(x) = queue.pop_front() {
            for (y, _) in self.neighbors(x) {
                if !seen[y.index()] {
                    seen[y.index()] = true;
                    queue.push_back(y);
                }
            }
        }
        seen
    }

    pub fn root(&self) -> VertexId {
        self.root
    }

    /// Same network with a different root; the new root must carry an edge.
    pub fn with_root(&self, root: VertexId) -> Result<Network, NetworkError> {
        self.check_vertex(root)?;
        if self.degree(root) == 0 {
            return Err(NetworkError::RootIsolated(root.0));
        }
        Ok(Network { root, ..self.clone() })
    }

    pub fn vertex_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.vertex_count()).map(VertexId::from_index)
    }

    pub fn contains(&self, x: VertexId) -> bool {
        x.index() < self.vertex_count()
    }

    pub(crate) fn check_vertex(&self, x: VertexId) -> Result<(), NetworkError> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(NetworkError::UnknownVertex(x.0))
        }
    }

    /// Edges in ascending `(min, max)` order.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn degree(&self, x: VertexId) -> usize {
        self.offsets[x.index() + 1] - self.offsets[x.index()]
    }

    /// Neighbours of `x` with their conductances, in ascending label order.
    pub fn neighbors(&self, x: VertexId) -> impl Iterator<Item = (VertexId, f64)> + '_ {
        let r = self.offsets[x.index()]..self.offsets[x.index() + 1];
        self.adjacent[r.clone()].iter().copied().zip(self.slot_conductance[r].iter().copied())
    }

    /// Adjacency row of `x`: neighbours, conductances and edge indices.
    pub(crate) fn row(&self, x: VertexId) -> (&[VertexId], &[f64], &[usize]) {
        let r = self.offsets[x.index()]..self.offsets[x.index() + 1];
        (&self.adjacent[r.clone()], &self.slot_conductance[r.clone()], &self.slot_edge[r])
    }

    /// Neighbours of `x` with conductance and edge index.
    pub(crate) fn incident(&self, x: VertexId) -> impl Iterator<Item = (VertexId, f64, usize)> + '_ {
        let r = self.offsets[x.index()]..self.offsets[x.index() + 1];
        self.adjacent[r.clone()]
            .iter()
            .copied()
            .zip(self.slot_conductance[r.clone()].iter().copied())
            .zip(self.slot_edge[r].iter().copied())
            .map(|((y, c), e)| (y, c, e))
    }

    /// Index into [`Network::edges`] of the edge `{x, y}`, if present.
    pub fn edge_index(&self, x: VertexId, y: VertexId) -> Option<usize> {
        if !self.contains(x) || !self.contains(y) {
            return None;
        }
        let r = self.offsets[x.index()]..self.offsets[x.index() + 1];
        self.adjacent[r.clone()].binary_search(&y).ok().map(|k| self.slot_edge[r.start + k])
    }

    pub fn conductance(&self, x: VertexId, y: VertexId) -> Option<f64> {
        self.edge_index(x, y).map(|k| self.edges[k].conductance)
    }

    /// π(x), the total conductance at `x`.
    pub fn pi(&self, x: VertexId) -> f64 {
        self.slot_conductance[self.offsets[x.index()]..self.offsets[x.index() + 1]].iter().sum()
    }

    /// Transition probability `c(x, y) / π(x)`.
    pub fn transition(&self, x: VertexId, y: VertexId) -> f64 {
        self.conductance(x, y).map_or(0.0, |c| c / self.pi(x))
    }

    pub fn total_conductance(&self) -> f64 {
        self.edges.iter().map(|e| e.conductance).sum()
    }

    /// Same graph, new conductances computed per edge. Edges mapped to a
    /// non-positive value are dropped, along with anything that falls out
    /// of the root's component.
    pub fn reweighted<F>(&self, mut f: F) -> Result<Network, NetworkError>
    where
        F: FnMut(usize, &Edge) -> f64,
    {
        let mut bad = None;
        let edges: Vec<Edge> = self
            .edges
            .iter()
            .enumerate()
            .filter_map(|(k, e)| {
                let c = f(k, e);
                if c.is_nan() || c.is_infinite() {
                    bad.get_or_insert((e.a.0, e.b.0, c));
                }
                (c > 0.0).then_some(Edge { conductance: c, ..*e })
            })
            .collect();
        if let Some((a, b, c)) = bad {
            return Err(NetworkError::NonPositiveConductance { a, b, c });
        }
        Self::root_component(edges, self.root, self.vertex_count())
    }

    /// Subnetwork induced on the vertices where `keep` is true, rooted at
    /// `root`. Only the root's component is retained.
    pub fn induced<F>(&self, root: VertexId, keep: F) -> Result<Network, NetworkError>
    where
        F: Fn(VertexId) -> bool,
    {
        self.check_vertex(root)?;
        let edges: Vec<Edge> = self.edges.iter().filter(|e| keep(e.a) && keep(e.b)).copied().collect();
        Self::root_component(edges, root, self.vertex_count())
    }

    /// Identifies `group` to a single vertex (the smallest label in the
    /// group). Internal edges vanish; parallel edges created by the merge are
    /// summed. Returns the merged network and the representative.
    pub fn identify(&self, group: &[VertexId]) -> Result<(Network, VertexId), NetworkError> {
        let rep = *group.iter().min().ok_or(NetworkError::UnknownVertex(u32::MAX))?;
        let mut member = vec![false; self.vertex_count()];
        for &g in group {
            self.check_vertex(g)?;
            member[g.index()] = true;
        }
        let map = |x: VertexId| if member[x.index()] { rep } else { x };
        let mut merged: Vec<Edge> = Vec::with_capacity(self.edges.len());
        for e in &self.edges {
            let (a, b) = (map(e.a), map(e.b));
            if a == b {
                continue;
            }
            let (a, b) = if a < b { (a, b) } else { (b, a) };
            merged.push(Edge { a, b, conductance: e.conductance });
        }
        merged.sort_by_key(|e| (e.a, e.b));
        let mut summed: Vec<Edge> = Vec::with_capacity(merged.len());
        for e in merged {
            match summed.last_mut() {
                Some(last) if last.a == e.a && last.b == e.b => last.conductance += e.conductance,
                _ => summed.push(e),
            }
        }
        let root = map(self.root);
        Ok((Self::root_component(summed, root, self.vertex_count())?, rep))
    }

    /// Vertices reachable from the root (including the root).
    pub fn root_component_mask(&self) -> Vec<bool> {
        self.component_of(self.root)
    }

    /// True if removing `cut` (edge indices) separates `x` from `y`.
    pub(crate) fn separates(&self, cut: &[usize], x: VertexId, y: VertexId) -> bool {
        let mut removed = vec![false; self.edges.len()];
        for &k in cut {
            removed[k] = true;
        }
        let mut seen = vec![false; self.vertex_count()];
        let mut queue = VecDeque::from([x]);
        seen[x.index()] = true;
        while let Some(u) = queue.pop_front() {
            if u == y {
                return false;
            }
            for (w, _, k) in self.incident(u) {
                if !removed[k] && !seen[w.index()] {
                    seen[w.index()] = true;
                    queue.push_back(w);
                }
            }
        }
        true
    }

    /// Hop distances from `x` (`usize::MAX` when unreachable).
    pub fn hop_distances(&self, x: VertexId) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.vertex_count()];
        let mut queue = VecDeque::from([x]);
        dist[x.index()] = 0;
        while let Some(u) = queue.pop_front() {
            for (w, _) in self.neighbors(u) {
                if dist[w.index()] == usize::MAX {
                    dist[w.index()] = dist[u.index()] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }
}
