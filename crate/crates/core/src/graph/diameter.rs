use super::bfs::bfs_distances;
use super::{Graph, VertexId};
use crate::error::{Error, Result};

/// Result of the single-BFS estimate: `eccentricity <= D <= upper`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DiameterEstimate {
    pub root: VertexId,
    pub eccentricity: u32,
    pub upper: u32,
}

/// Eccentricity of `v`, or an error if some vertex is unreachable.
pub fn eccentricity(graph: &Graph, v: VertexId) -> Result<u32> {
    let mut dist = Vec::new();
    let (ecc, reached) = bfs_distances(graph, v, &mut dist);
    if reached != graph.n() {
        return Err(Error::Disconnected);
    }
    Ok(ecc)
}

/// Brute-force exact diameter: one BFS per vertex, O(nm).
pub fn diameter_all_sources(graph: &Graph) -> Result<u32> {
    let mut dist = Vec::new();
    let mut best = 0;
    for v in 0..graph.n() {
        let (ecc, reached) = bfs_distances(graph, v, &mut dist);
        if reached != graph.n() {
            return Err(Error::Disconnected);
        }
        best = best.max(ecc);
    }
    Ok(best)
}

/// 2-approximation from one BFS: `ecc(root) <= D <= 2 ecc(root)`.
pub fn diameter_two_approx(graph: &Graph, root: VertexId) -> Result<DiameterEstimate> {
    let ecc = eccentricity(graph, root)?;
    Ok(DiameterEstimate {
        root,
        eccentricity: ecc,
        upper: 2 * ecc,
    })
}

/// Exact unweighted diameter.
///
/// Two phases. First, eccentricity bounding: every BFS from `v` tightens,
/// for all `w`, `max(ecc(v) - d(v,w), d(v,w)) <= ecc(w) <= ecc(v) + d(v,w)`.
/// On small-diameter graphs many vertices keep `hi = lo + 1` and each would
/// need its own BFS, so after a few sweeps the vertices whose upper bound
/// still exceeds the best lower bound get exact eccentricities from
/// 64-source bit-parallel BFS. Worst case O(nm / 64 * D).
/// [`diameter_all_sources`] is the reference implementation.
pub fn diameter(graph: &Graph) -> Result<u32> {
    const SINGLE_SWEEPS: usize = 8;
    let n = graph.n();
    if n <= 1 {
        return Ok(0);
    }
    let mut lo = vec![0u32; n];
    let mut hi = vec![u32::MAX; n];
    let mut candidates: Vec<VertexId> = (0..n).collect();
    let mut dist = Vec::new();
    let (mut d_lo, mut d_hi) = (0u32, u32::MAX);
    let mut pick_high = true;

    // a maximum-degree vertex is a good upper-bound seed
    let mut v = (0..n).max_by_key(|&x| (graph.degree(x), std::cmp::Reverse(x))).unwrap();
    for _ in 0..SINGLE_SWEEPS {
        let (ecc, reached) = bfs_distances(graph, v, &mut dist);
        if reached != n {
            return Err(Error::Disconnected);
        }
        d_lo = d_lo.max(ecc);
        d_hi = d_hi.min(ecc.saturating_mul(2));
        for &w in &candidates {
            let d = dist[w];
            lo[w] = lo[w].max((ecc - d).max(d));
            hi[w] = hi[w].min(ecc + d);
            d_lo = d_lo.max(lo[w]);
        }
        let max_hi = candidates.iter().map(|&w| hi[w]).max().unwrap_or(0);
        d_hi = d_hi.min(max_hi.max(d_lo));
        if d_lo >= d_hi {
            return Ok(d_lo);
        }
        candidates.retain(|&w| {
            let settled = lo[w] == hi[w];
            let useless = hi[w] <= d_lo && 2 * lo[w] >= d_hi;
            !(settled || useless) && w != v
        });
        if candidates.is_empty() {
            return Ok(d_lo);
        }
        v = if pick_high {
            *candidates
                .iter()
                .max_by_key(|&&w| (hi[w], graph.degree(w), std::cmp::Reverse(w)))
                .unwrap()
        } else {
            *candidates
                .iter()
                .min_by_key(|&&w| (lo[w], std::cmp::Reverse(graph.degree(w)), w))
                .unwrap()
        };
        pick_high = !pick_high;
    }

    // only vertices that could still beat d_lo matter now
    let mut open: Vec<VertexId> = candidates.into_iter().filter(|&w| hi[w] > d_lo).collect();
    open.sort_by_key(|&w| (std::cmp::Reverse(hi[w]), w));
    let mut batch = BitBfs::new(n);
    for chunk in open.chunks(64) {
        d_lo = d_lo.max(batch.max_eccentricity(graph, chunk));
    }
    Ok(d_lo)
}

/// Multi-source BFS carrying one bit per source.
struct BitBfs {
    visited: Vec<u64>,
    frontier: Vec<u64>,
    next: Vec<u64>,
}

impl BitBfs {
    fn new(n: usize) -> Self {
        Self {
            visited: vec![0; n],
            frontier: vec![0; n],
            next: vec![0; n],
        }
    }

    /// Largest eccentricity among `sources` (at most 64) in a connected graph.
    fn max_eccentricity(&mut self, graph: &Graph, sources: &[VertexId]) -> u32 {
        debug_assert!(sources.len() <= 64);
        self.visited.fill(0);
        self.frontier.fill(0);
        for (j, &s) in sources.iter().enumerate() {
            self.visited[s] |= 1 << j;
            self.frontier[s] |= 1 << j;
        }
        let mut level = 0;
        loop {
            let mut any = 0u64;
            for v in 0..graph.n() {
                let seen = self.visited[v];
                let mut acc = 0u64;
                for &u in graph.neighbors(v) {
                    acc |= self.frontier[u];
                }
                let new = acc & !seen;
                self.next[v] = new;
                self.visited[v] = seen | new;
                any |= new;
            }
            if any == 0 {
                return level;
            }
            level += 1;
            std::mem::swap(&mut self.frontier, &mut self.next);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn complete(n: usize) -> Graph {
        let mut e = vec![];
        for u in 0..n {
            for v in u + 1..n {
                e.push((u, v));
            }
        }
        Graph::from_edges(n, &e).unwrap()
    }

    #[test]
    fn small_families() {
        assert_eq!(diameter(&complete(5)).unwrap(), 1);
        let path: Vec<_> = (1..7).map(|i| (i - 1, i)).collect();
        assert_eq!(diameter(&Graph::from_edges(7, &path).unwrap()).unwrap(), 6);
        let star = Graph::from_edges(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]).unwrap();
        assert_eq!(diameter(&star).unwrap(), 2);
        assert_eq!(diameter_all_sources(&star).unwrap(), 2);
    }

    #[test]
    fn disconnected_is_an_error() {
        let g = Graph::from_edges(4, &[(0, 1), (2, 3)]).unwrap();
        assert_eq!(diameter(&g), Err(Error::Disconnected));
        assert_eq!(diameter_all_sources(&g), Err(Error::Disconnected));
    }

    #[test]
    fn two_approx_brackets_diameter() {
        let path: Vec<_> = (1..9).map(|i| (i - 1, i)).collect();
        let g = Graph::from_edges(9, &path).unwrap();
        let est = diameter_two_approx(&g, 4).unwrap();
        assert_eq!(est.eccentricity, 4);
        assert!(est.eccentricity <= 8 && 8 <= est.upper);
    }

    fn arb_connected() -> impl Strategy<Value = Graph> {
        (2usize..=48).prop_flat_map(|n| {
            (
                proptest::collection::vec(any::<u32>(), n - 1),
                proptest::collection::vec((0..n, 0..n), 0..n),
            )
                .prop_map(move |(parents, extra)| {
                    let mut edges: Vec<_> = (1..n)
                        .map(|v| ((parents[v - 1] as usize) % v, v))
                        .collect();
                    edges.extend(
                        extra
                            .into_iter()
                            .filter(|(a, b)| a != b)
                            .map(|(a, b)| (a.min(b), a.max(b))),
                    );
                    edges.sort_unstable();
                    edges.dedup();
                    Graph::from_edges(n, &edges).unwrap()
                })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(96))]

        #[test]
        fn bounding_matches_all_sources(g in arb_connected()) {
            prop_assert_eq!(diameter(&g).unwrap(), diameter_all_sources(&g).unwrap());
        }

        #[test]
        fn batched_phase_matches_all_sources(layers in 2usize..6, width in 2usize..30, seed in any::<u64>()) {
            // complete layered bipartite-ish graphs leave many vertices with
            // hi = lo + 1, forcing the bit-parallel phase
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let n = 1 + layers * width;
            let mut edges = vec![];
            for j in 0..width {
                edges.push((0, 1 + j));
            }
            for l in 1..layers {
                for j in 0..width {
                    let v = 1 + l * width + j;
                    let parent = 1 + (l - 1) * width + rng.random_range(0..width);
                    edges.push((parent, v));
                    for k in 0..width {
                        let u = 1 + (l - 1) * width + k;
                        if u != parent && rng.random_bool(0.2) {
                            edges.push((u, v));
                        }
                    }
                }
            }
            let g = Graph::from_edges(n, &edges).unwrap();
            prop_assert_eq!(diameter(&g).unwrap(), diameter_all_sources(&g).unwrap());
        }

        #[test]
        fn invariant_under_relabeling(g in arb_connected(), seed in any::<u64>()) {
            use rand::{seq::SliceRandom, SeedableRng};
            let mut perm: Vec<usize> = (0..g.n()).collect();
            perm.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            prop_assert_eq!(diameter(&g.permuted(&perm)).unwrap(), diameter(&g).unwrap());
        }
    }
}
