use std::collections::VecDeque;

use super::{Graph, VertexId};

/// Hop-distance BFS tree. `dist[v] == None` means unreached (either
/// disconnected or beyond the depth limit).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BfsResult {
    pub root: VertexId,
    pub parent: Vec<Option<VertexId>>,
    pub dist: Vec<Option<u32>>,
    pub depth_limit: Option<u32>,
}

impl BfsResult {
    pub fn reached(&self) -> usize {
        self.dist.iter().filter(|d| d.is_some()).count()
    }

    /// Largest distance of any reached vertex.
    pub fn depth(&self) -> u32 {
        self.dist.iter().flatten().copied().max().unwrap_or(0)
    }

    /// Vertices on the tree path from `v` up to the root, `v` first.
    pub fn path_to_root(&self, v: VertexId) -> Option<Vec<VertexId>> {
        self.dist[v]?;
        let mut path = vec![v];
        let mut cur = v;
        while let Some(p) = self.parent[cur] {
            path.push(p);
            cur = p;
        }
        Some(path)
    }
}

/// Breadth-first search from `root`, optionally truncated at `depth_limit`
/// hops. Every reached non-root vertex takes as parent its smallest-ID
/// neighbor one level closer to the root.
pub fn bfs(graph: &Graph, root: VertexId, depth_limit: Option<u32>) -> BfsResult {
    let n = graph.n();
    assert!(root < n, "bfs root {root} out of range (n = {n})");
    let mut dist = vec![None; n];
    let mut order = Vec::with_capacity(n);
    let mut queue = VecDeque::new();
    dist[root] = Some(0);
    queue.push_back(root);
    while let Some(u) = queue.pop_front() {
        order.push(u);
        let du = dist[u].unwrap();
        if depth_limit.is_some_and(|lim| du >= lim) {
            continue;
        }
        for &v in graph.neighbors(u) {
            if dist[v].is_none() {
                dist[v] = Some(du + 1);
                queue.push_back(v);
            }
        }
    }
    let mut parent = vec![None; n];
    for &v in &order[1..] {
        let dv = dist[v].unwrap();
        // adjacency is sorted, so the first hit is the smallest ID
        parent[v] = graph
            .neighbors(v)
            .iter()
            .copied()
            .find(|&u| dist[u] == Some(dv - 1));
    }
    BfsResult {
        root,
        parent,
        dist,
        depth_limit,
    }
}

/// Distance-only BFS into a reusable buffer; returns (eccentricity, reached).
pub(crate) fn bfs_distances(graph: &Graph, root: VertexId, dist: &mut Vec<u32>) -> (u32, usize) {
    const UNSEEN: u32 = u32::MAX;
    dist.clear();
    dist.resize(graph.n(), UNSEEN);
    let mut queue = Vec::with_capacity(graph.n());
    dist[root] = 0;
    queue.push(root);
    let mut head = 0;
    let mut ecc = 0;
    while head < queue.len() {
        let u = queue[head];
        head += 1;
        let du = dist[u];
        ecc = du;
        for &v in graph.neighbors(u) {
            if dist[v] == UNSEEN {
                dist[v] = du + 1;
                queue.push(v);
            }
        }
    }
    (ecc, queue.len())
}
