use crate::error::{Error, Result};
use crate::graph::{Graph, VertexId};

/// Node of a layered graph, numbered level by level.
pub type NodeId = usize;

/// Layered auxiliary graph `G_{P,Q,ℓ}` with levels `1..=ℓ+2`:
/// level 1 holds the path `P`, levels `2..=ℓ` hold a copy of every vertex,
/// level `ℓ+1` holds `Q` and level `ℓ+2` the root `r`. Consecutive levels
/// are joined by self-copy edges and by copies of `G`-edges. Edges are
/// implicit and derived from `G` on demand.
#[derive(Clone, Debug)]
pub struct LayeredGraph<'g> {
    graph: &'g Graph,
    path: Vec<VertexId>,
    q: Vec<VertexId>,
    span: usize,
    /// `starts[l]` = first node ID of level `l`; index 0 unused, plus a sentinel.
    starts: Vec<usize>,
    /// Path position of each vertex, `u32::MAX` if not on `P`.
    path_pos: Vec<u32>,
}

impl<'g> LayeredGraph<'g> {
    pub fn graph(&self) -> &'g Graph {
        self.graph
    }

    pub fn path(&self) -> &[VertexId] {
        &self.path
    }

    pub fn q(&self) -> &[VertexId] {
        &self.q
    }

    /// `ℓ`.
    pub fn span(&self) -> usize {
        self.span
    }

    pub fn levels(&self) -> usize {
        self.span + 2
    }

    pub fn node_count(&self) -> usize {
        *self.starts.last().unwrap()
    }

    pub fn root(&self) -> NodeId {
        self.node_count() - 1
    }

    /// Node `p_i` for 0-based path position `i`.
    pub fn leaf(&self, i: usize) -> NodeId {
        assert!(i < self.path.len());
        i
    }

    pub fn level_of(&self, x: NodeId) -> usize {
        self.starts.partition_point(|&s| s <= x) - 1
    }

    pub fn level_range(&self, level: usize) -> std::ops::Range<NodeId> {
        self.starts[level]..self.starts[level + 1]
    }

    /// `G`-vertex a node copies; `None` for the root.
    pub fn vertex_of(&self, x: NodeId) -> Option<VertexId> {
        let level = self.level_of(x);
        let idx = x - self.starts[level];
        if level == 1 {
            Some(self.path[idx])
        } else if level <= self.span {
            Some(idx)
        } else if level == self.span + 1 {
            Some(self.q[idx])
        } else {
            None
        }
    }

    /// The copy of `v` in `level`, if that level contains one.
    pub fn node(&self, level: usize, v: VertexId) -> Option<NodeId> {
        let base = self.starts[level];
        if level == 1 {
            let pos = self.path_pos[v];
            (pos != u32::MAX).then_some(base + pos as usize)
        } else if level <= self.span {
            Some(base + v)
        } else if level == self.span + 1 {
            self.q.binary_search(&v).ok().map(|i| base + i)
        } else {
            None
        }
    }

    /// Neighbors of `x` one level up: its own copy first (if present), then
    /// copies of its `G`-neighbors in increasing order.
    pub fn up_neighbors(&self, x: NodeId) -> Vec<NodeId> {
        let level = self.level_of(x);
        match self.vertex_of(x) {
            None => vec![],
            Some(_) if level == self.span + 1 => vec![self.root()],
            Some(v) => {
                let next = level + 1;
                self.node(next, v)
                    .into_iter()
                    .chain(self.graph.neighbors(v).iter().filter_map(|&w| self.node(next, w)))
                    .collect()
            }
        }
    }

    /// Number of edges, counted by enumeration.
    pub fn edge_count(&self) -> usize {
        (0..self.node_count()).map(|x| self.up_neighbors(x).len()).sum()
    }
}

/// Builds `G_{P,Q,ℓ}`. `P` must be a simple path in `G`, `Q` non-empty, and
/// every path vertex within `ℓ` hops of `Q`.
pub fn build_layered<'g>(
    graph: &'g Graph,
    path: &[VertexId],
    q: &[VertexId],
    span: usize,
) -> Result<LayeredGraph<'g>> {
    let n = graph.n();
    if path.is_empty() || q.is_empty() || span == 0 {
        return Err(Error::InvalidParameter(
            "P and Q must be non-empty and the span positive".into(),
        ));
    }
    if let Some(&v) = path.iter().chain(q).find(|&&v| v >= n) {
        return Err(Error::InvalidParameter(format!("vertex {v} out of range")));
    }
    let mut path_pos = vec![u32::MAX; n];
    for (i, &v) in path.iter().enumerate() {
        if path_pos[v] != u32::MAX {
            return Err(Error::InvalidParameter(format!("P repeats vertex {v}")));
        }
        path_pos[v] = i as u32;
    }
    if let Some(w) = path.windows(2).find(|w| !graph.has_edge(w[0], w[1])) {
        return Err(Error::InvalidParameter(format!(
            "P is not a path: ({}, {}) is not an edge",
            w[0], w[1]
        )));
    }
    let mut q = q.to_vec();
    q.sort_unstable();
    q.dedup();

    let actual = distance_to_set(graph, &q, path);
    if actual > span as u32 {
        return Err(Error::SpanTooSmall {
            actual,
            span: span as u32,
        });
    }

    let mut sizes = vec![0, path.len()];
    sizes.extend(std::iter::repeat_n(n, span - 1));
    sizes.push(q.len());
    sizes.push(1);
    let mut starts = vec![0usize; 1];
    let mut acc = 0;
    for &s in &sizes[1..] {
        starts.push(acc);
        acc += s;
    }
    starts.push(acc);
    Ok(LayeredGraph {
        graph,
        path: path.to_vec(),
        q,
        span,
        starts,
        path_pos,
    })
}

/// `max_{u in targets} dist_G(u, sources)`, `u32::MAX` if some target is
/// unreachable.
fn distance_to_set(graph: &Graph, sources: &[VertexId], targets: &[VertexId]) -> u32 {
    let mut dist = vec![u32::MAX; graph.n()];
    let mut queue: Vec<VertexId> = sources.to_vec();
    for &s in sources {
        dist[s] = 0;
    }
    let mut head = 0;
    while head < queue.len() {
        let u = queue[head];
        head += 1;
        for &v in graph.neighbors(u) {
            if dist[v] == u32::MAX {
                dist[v] = dist[u] + 1;
                queue.push(v);
            }
        }
    }
    targets.iter().map(|&t| dist[t]).max().unwrap_or(0)
}
