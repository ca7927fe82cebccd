//! Graph substrate: a compact undirected simple graph, BFS and diameter
//! primitives, instance generators, and vertex partitions.

mod bfs;
mod diameter;
mod generate;
pub mod io;
mod partition;

pub use bfs::{bfs, BfsResult};
pub use diameter::{
    diameter, diameter_all_sources, diameter_two_approx, eccentricity, DiameterEstimate,
};
pub use generate::{generate_graph, GeneratorSpec};
pub use partition::{
    generate_partition, validate_partition, PartLabel, Partition, PartitionSpec, Violation,
};

use crate::error::{Error, Result};

pub type VertexId = usize;
/// Index of an undirected edge in [`Graph::edges`].
pub type EdgeId = usize;
/// Index of a directed edge slot in the CSR adjacency; slot `s` of vertex `u`
/// is the arc `u -> neighbors[s]`.
pub type SlotId = usize;

/// Undirected simple graph in CSR form with sorted adjacency lists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<usize>,
    targets: Vec<VertexId>,
    slot_edge: Vec<EdgeId>,
    edges: Vec<(VertexId, VertexId)>,
    weights: Option<Vec<u64>>,
}

impl Graph {
    /// Builds a graph from an undirected edge list, rejecting self-loops,
    /// duplicates and out-of-range endpoints.
    pub fn from_edges(n: usize, edges: &[(VertexId, VertexId)]) -> Result<Self> {
        let mut norm = Vec::with_capacity(edges.len());
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge ({u}, {v}) out of range for n = {n}"
                )));
            }
            if u == v {
                return Err(Error::InvalidGraph(format!("self-loop at {u}")));
            }
            norm.push((u.min(v), u.max(v)));
        }
        norm.sort_unstable();
        if let Some(w) = norm.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidGraph(format!(
                "duplicate edge ({}, {})",
                w[0].0, w[0].1
            )));
        }
        Ok(Self::from_sorted_unique(n, norm))
    }

    /// Like [`Graph::from_edges`] but attaches one positive weight per input edge.
    pub fn from_weighted_edges(n: usize, edges: &[(VertexId, VertexId, u64)]) -> Result<Self> {
        if let Some(&(u, v, _)) = edges.iter().find(|e| e.2 == 0) {
            return Err(Error::InvalidGraph(format!("edge ({u}, {v}) has weight 0")));
        }
        let plain: Vec<_> = edges.iter().map(|&(u, v, _)| (u, v)).collect();
        let mut graph = Self::from_edges(n, &plain)?;
        let mut weights = vec![0u64; graph.m()];
        for &(u, v, w) in edges {
            let e = graph.edge_id(u, v).expect("edge was just inserted");
            weights[e] = w;
        }
        graph.weights = Some(weights);
        Ok(graph)
    }

    /// `edges` must be normalized (`u < v`), sorted and duplicate free.
    pub(crate) fn from_sorted_unique(n: usize, edges: Vec<(VertexId, VertexId)>) -> Self {
        let mut degree = vec![0usize; n];
        for &(u, v) in &edges {
            degree[u] += 1;
            degree[v] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut fill = offsets[..n].to_vec();
        let mut targets = vec![0; 2 * edges.len()];
        let mut slot_edge = vec![0; 2 * edges.len()];
        // Edges are sorted by (u, v), so appending in order keeps every
        // adjacency list sorted: for fixed x, neighbors smaller than x arrive
        // (as the `v` side) before neighbors larger than x (as the `u` side).
        for (e, &(u, v)) in edges.iter().enumerate() {
            targets[fill[u]] = v;
            slot_edge[fill[u]] = e;
            fill[u] += 1;
            targets[fill[v]] = u;
            slot_edge[fill[v]] = e;
            fill[v] += 1;
        }
        let mut graph = Self {
            offsets,
            targets,
            slot_edge,
            edges,
            weights: None,
        };
        graph.sort_adjacency();
        graph
    }

    fn sort_adjacency(&mut self) {
        for v in 0..self.n() {
            let (a, b) = (self.offsets[v], self.offsets[v + 1]);
            if self.targets[a..b].windows(2).all(|w| w[0] < w[1]) {
                continue;
            }
            let mut pairs: Vec<_> = (a..b)
                .map(|s| (self.targets[s], self.slot_edge[s]))
                .collect();
            pairs.sort_unstable();
            for (i, (t, e)) in pairs.into_iter().enumerate() {
                self.targets[a + i] = t;
                self.slot_edge[a + i] = e;
            }
        }
    }

    pub fn n(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    /// Directed slots owned by `v` (arcs with tail `v`).
    pub fn slots(&self, v: VertexId) -> std::ops::Range<SlotId> {
        self.offsets[v]..self.offsets[v + 1]
    }

    pub fn slot_target(&self, slot: SlotId) -> VertexId {
        self.targets[slot]
    }

    pub fn slot_edge(&self, slot: SlotId) -> EdgeId {
        self.slot_edge[slot]
    }

    /// Number of directed slots (2m).
    pub fn slot_count(&self) -> usize {
        self.targets.len()
    }

    /// Tail vertex of a slot (binary search over offsets).
    pub fn slot_tail(&self, slot: SlotId) -> VertexId {
        self.offsets.partition_point(|&o| o <= slot) - 1
    }

    /// Slot of the arc `u -> v`, if the edge exists.
    pub fn slot_of(&self, u: VertexId, v: VertexId) -> Option<SlotId> {
        self.neighbors(u)
            .binary_search(&v)
            .ok()
            .map(|i| self.offsets[u] + i)
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        u < self.n() && v < self.n() && self.slot_of(u, v).is_some()
    }

    pub fn edge_id(&self, u: VertexId, v: VertexId) -> Option<EdgeId> {
        self.slot_of(u, v).map(|s| self.slot_edge[s])
    }

    /// Endpoints `(u, v)` with `u < v`.
    pub fn edge(&self, e: EdgeId) -> (VertexId, VertexId) {
        self.edges[e]
    }

    pub fn edges(&self) -> &[(VertexId, VertexId)] {
        &self.edges
    }

    pub fn weights(&self) -> Option<&[u64]> {
        self.weights.as_deref()
    }

    pub fn weight(&self, e: EdgeId) -> Option<u64> {
        self.weights.as_ref().map(|w| w[e])
    }

    pub fn with_weights(mut self, weights: Vec<u64>) -> Result<Self> {
        if weights.len() != self.m() {
            return Err(Error::InvalidGraph(format!(
                "expected {} weights, got {}",
                self.m(),
                weights.len()
            )));
        }
        if weights.contains(&0) {
            return Err(Error::InvalidGraph("weights must be positive".into()));
        }
        self.weights = Some(weights);
        Ok(self)
    }

    /// Subgraph on the given undirected edges, re-indexed to `0..k` over the
    /// vertices those edges (and `extra`) touch. Returns the subgraph and the
    /// local-to-global vertex map.
    pub fn edge_subgraph(
        &self,
        edge_ids: impl IntoIterator<Item = EdgeId>,
        extra: &[VertexId],
    ) -> (Graph, Vec<VertexId>) {
        let mut local: Vec<(VertexId, VertexId)> = Vec::new();
        let mut verts: Vec<VertexId> = extra.to_vec();
        for e in edge_ids {
            let (u, v) = self.edges[e];
            verts.push(u);
            verts.push(v);
            local.push((u, v));
        }
        verts.sort_unstable();
        verts.dedup();
        let index = |x: VertexId| verts.binary_search(&x).unwrap();
        let mut mapped: Vec<_> = local
            .into_iter()
            .map(|(u, v)| {
                let (a, b) = (index(u), index(v));
                (a.min(b), a.max(b))
            })
            .collect();
        mapped.sort_unstable();
        mapped.dedup();
        (Graph::from_sorted_unique(verts.len(), mapped), verts)
    }

    /// Induced subgraph `G[S]`; `set` must be sorted and duplicate free.
    pub fn induced(&self, set: &[VertexId]) -> (Graph, Vec<VertexId>) {
        let mut edges = Vec::new();
        for (a, &u) in set.iter().enumerate() {
            for &v in self.neighbors(u) {
                if v > u {
                    if let Ok(b) = set.binary_search(&v) {
                        edges.push((a, b));
                    }
                }
            }
        }
        edges.sort_unstable();
        (Graph::from_sorted_unique(set.len(), edges), set.to_vec())
    }

    /// Connected component of `root` in the spanning subgraph whose edges
    /// satisfy `keep`. Local IDs follow BFS order; returns the component and
    /// the local-to-global vertex map.
    pub fn component(&self, root: VertexId, keep: impl Fn(EdgeId) -> bool) -> (Graph, Vec<VertexId>) {
        const UNSEEN: u32 = u32::MAX;
        let mut local = vec![UNSEEN; self.n()];
        let mut order = vec![root];
        local[root] = 0;
        let mut head = 0;
        while head < order.len() {
            let u = order[head];
            head += 1;
            for slot in self.slots(u) {
                let v = self.targets[slot];
                if local[v] == UNSEEN && keep(self.slot_edge[slot]) {
                    local[v] = order.len() as u32;
                    order.push(v);
                }
            }
        }
        let mut edges = Vec::new();
        let mut group = Vec::new();
        for (a, &u) in order.iter().enumerate() {
            group.clear();
            group.extend(self.slots(u).filter_map(|slot| {
                let b = local[self.targets[slot]] as usize;
                (b > a && b != UNSEEN as usize && keep(self.slot_edge[slot])).then_some(b)
            }));
            group.sort_unstable();
            edges.extend(group.iter().map(|&b| (a, b)));
        }
        (Graph::from_sorted_unique(order.len(), edges), order)
    }

    /// Relabels vertex `v` to `perm[v]`.
    pub fn permuted(&self, perm: &[VertexId]) -> Graph {
        let edges: Vec<_> = self
            .edges
            .iter()
            .map(|&(u, v)| (perm[u], perm[v]))
            .collect();
        Graph::from_edges(self.n(), &edges).expect("a permutation preserves simplicity")
    }

    pub fn is_connected(&self) -> bool {
        self.n() == 0 || bfs(self, 0, None).reached() == self.n()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn adjacency_is_sorted_and_symmetric() {
        let g = Graph::from_edges(5, &[(3, 1), (0, 4), (1, 0), (2, 1), (4, 3)]).unwrap();
        for v in 0..g.n() {
            assert!(g.neighbors(v).windows(2).all(|w| w[0] < w[1]));
            for &u in g.neighbors(v) {
                assert!(g.has_edge(u, v));
            }
        }
        assert_eq!(g.neighbors(1), &[0, 2, 3]);
        assert_eq!(g.m(), 5);
    }

    #[test]
    fn slots_map_back_to_edges() {
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (0, 3)]).unwrap();
        for s in 0..g.slot_count() {
            let tail = g.slot_tail(s);
            let head = g.slot_target(s);
            let (a, b) = g.edge(g.slot_edge(s));
            assert_eq!((a, b), (tail.min(head), tail.max(head)));
            assert_eq!(g.slot_of(tail, head), Some(s));
        }
    }

    #[test]
    fn rejects_self_loops_and_duplicates() {
        assert!(Graph::from_edges(3, &[(1, 1)]).is_err());
        assert!(Graph::from_edges(3, &[(0, 1), (1, 0)]).is_err());
        assert!(Graph::from_edges(3, &[(0, 3)]).is_err());
        assert!(Graph::from_weighted_edges(2, &[(0, 1, 0)]).is_err());
    }

    #[test]
    fn component_follows_kept_edges() {
        let g = Graph::from_edges(6, &[(0, 1), (1, 2), (2, 3), (3, 0), (4, 5)]).unwrap();
        let cut = g.edge_id(1, 2).unwrap();
        let (c, map) = g.component(2, |e| e != cut);
        assert_eq!(map, vec![2, 3, 0, 1]);
        assert_eq!(c.m(), 3);
        assert!(c.has_edge(0, 1) && c.has_edge(1, 2) && c.has_edge(2, 3));
        let (c, map) = g.component(5, |_| true);
        assert_eq!((c.n(), map), (2, vec![5, 4]));
    }

    #[test]
    fn induced_subgraph_keeps_internal_edges() {
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (0, 3)]).unwrap();
        let (h, map) = g.induced(&[0, 1, 3]);
        assert_eq!(map, vec![0, 1, 3]);
        assert_eq!(h.m(), 2);
        assert!(h.has_edge(0, 1) && h.has_edge(0, 2));
    }
}
