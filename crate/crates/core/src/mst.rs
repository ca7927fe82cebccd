//! Borůvka MST driven by shortcuts, with a Kruskal oracle.
//!
//! Edge order is `(w, min endpoint, max endpoint)`, which makes every
//! weight unique and the MST unique. Graphs without weights use weight 1.

use petgraph::unionfind::UnionFind;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::congest::{run_with_guessing, PartTree, SimConfig};
use crate::error::{Error, Result};
use crate::graph::{bfs, diameter, validate_partition, EdgeId, Graph, PartLabel, Partition, VertexId};
use crate::par::{self, Execution};
use crate::shortcut::sampling::mix;
use crate::shortcut::{build_with, classify_parts, compute_params, BuildOptions, ShortcutParams, ShortcutSet};

pub const MST_CSV_HEADER: &str = "n,D,phases,rounds";

type EdgeKey = (u64, VertexId, VertexId);

fn key(graph: &Graph, e: EdgeId) -> EdgeKey {
    let (u, v) = graph.edge(e);
    (graph.weight(e).unwrap_or(1), u.min(v), u.max(v))
}

/// Sort-and-union MST; edge IDs ascending.
pub fn kruskal_oracle(graph: &Graph) -> Result<Vec<EdgeId>> {
    let mut order: Vec<EdgeId> = (0..graph.m()).collect();
    order.sort_unstable_by_key(|&e| key(graph, e));
    let mut dsu = UnionFind::<usize>::new(graph.n());
    let mut tree: Vec<EdgeId> = order
        .into_iter()
        .filter(|&e| {
            let (u, v) = graph.edge(e);
            dsu.union(u, v)
        })
        .collect();
    if tree.len() + 1 != graph.n().max(1) {
        return Err(Error::Disconnected);
    }
    tree.sort_unstable();
    Ok(tree)
}

/// Where each phase's shortcuts come from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ShortcutSource {
    /// `build` on the fragment partition. The construction is charged as
    /// `max congestion + max tree depth * ceil(log2 n)` rounds, the
    /// random-delay schedule length of the fragment BFS runs.
    Centralized,
    /// The CONGEST simulator with diameter guessing; its rounds are charged.
    Simulated(SimConfig),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MstConfig {
    pub c_p: f64,
    pub source: ShortcutSource,
    pub exec: Execution,
}

impl Default for MstConfig {
    fn default() -> Self {
        Self {
            c_p: 1.0,
            source: ShortcutSource::Centralized,
            exec: Execution::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhaseRecord {
    pub fragments: usize,
    pub large_fragments: usize,
    pub construction_rounds: u64,
    /// Deepest aggregation tree over all fragments.
    pub max_depth: u32,
    pub rounds: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MstResult {
    /// Edge IDs, ascending.
    pub edges: Vec<EdgeId>,
    pub weight: u64,
    pub phases: u32,
    pub rounds: u64,
    pub phase_log: Vec<PhaseRecord>,
}

impl MstResult {
    /// One row under [`MST_CSV_HEADER`].
    pub fn csv_row(&self, n: usize, d: u32) -> String {
        format!("{n},{d},{},{}", self.phases, self.rounds)
    }
}

/// Uniform random weights in `1..=max_weight`.
pub fn random_weights(graph: Graph, max_weight: u64, seed: u64) -> Result<Graph> {
    if max_weight == 0 {
        return Err(Error::InvalidParameter("max_weight must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = (0..graph.m()).map(|_| rng.random_range(1..=max_weight)).collect();
    graph.with_weights(w)
}

/// Depth of the BFS tree from the leader in `G[S] ∪ H`, or in `G[S]` when
/// the part has no shortcut.
fn fragment_depth(graph: &Graph, part: &[VertexId], leader: VertexId, h: Option<&crate::shortcut::PartShortcut>) -> u32 {
    match h {
        Some(h) => {
            let inside = |e: EdgeId| {
                let (u, v) = graph.edge(e);
                part.binary_search(&u).is_ok() && part.binary_search(&v).is_ok()
            };
            let (sub, _) = graph.component(leader, |e| h.contains(e) || inside(e));
            bfs(&sub, 0, None).depth()
        }
        None => {
            let (sub, _) = graph.induced(part);
            let root = part.binary_search(&leader).unwrap();
            bfs(&sub, root, None).depth()
        }
    }
}

fn max_congestion(graph: &Graph, partition: &Partition, shortcuts: &ShortcutSet) -> u32 {
    let mut load = vec![0u32; graph.m()];
    for h in shortcuts.parts() {
        for e in h.edge_ids() {
            load[e] += 1;
        }
    }
    for (i, part) in partition.parts().iter().enumerate() {
        if partition.label(i) == PartLabel::Small {
            for &u in part {
                for &v in graph.neighbors(u) {
                    if u < v && part.binary_search(&v).is_ok() {
                        load[graph.edge_id(u, v).unwrap()] += 1;
                    }
                }
            }
        }
    }
    load.into_iter().max().unwrap_or(0)
}

/// Borůvka phases over shortcut-augmented fragments. Each phase treats the
/// current fragments as the partition, builds shortcuts, lets every
/// fragment find its minimum outgoing edge by a convergecast and broadcast
/// over its tree (`2 * depth` rounds) and merges along those edges.
pub fn mst_via_shortcuts(graph: &Graph, config: &MstConfig, seed: u64) -> Result<MstResult> {
    let n = graph.n();
    let diam = diameter(graph)?;
    let params: ShortcutParams = compute_params(n.max(2), diam.max(3), config.c_p)?;
    let mut dsu = UnionFind::<usize>::new(n);
    let mut edges = Vec::new();
    let mut log = Vec::new();
    let mut rounds = 0u64;
    let log_n = (n.max(2) as f64).log2().ceil() as u64;

    loop {
        let mut members: Vec<Vec<VertexId>> = vec![Vec::new(); n];
        for v in 0..n {
            let r = dsu.find_mut(v);
            members[r].push(v);
        }
        let parts: Vec<Vec<VertexId>> = members.into_iter().filter(|p| !p.is_empty()).collect();
        if parts.len() <= 1 {
            break;
        }
        let fragments = Partition::new(n, parts)?;
        if let Some(v) = validate_partition(graph, &fragments).first() {
            return Err(Error::InvalidPartition(format!("fragment invariant broken: {v}")));
        }
        let phase_seed = mix(seed ^ (log.len() as u64 + 1).rotate_left(40));
        let classified = classify_parts(&fragments, &params);
        let large = classified.large_parts();

        let (construction, max_depth) = match config.source {
            ShortcutSource::Centralized => {
                let options = BuildOptions {
                    exec: config.exec,
                    skip_rounds: true,
                    ..BuildOptions::default()
                };
                let shortcuts = build_with(graph, &classified, &params, phase_seed, &options)?;
                let ids: Vec<usize> = (0..classified.len()).collect();
                let depths = par::map_collect(config.exec, &ids, |&i| {
                    fragment_depth(graph, classified.part(i), classified.leader(i), shortcuts.for_part(i))
                });
                let depth = depths.into_iter().max().unwrap_or(0);
                let c = max_congestion(graph, &classified, &shortcuts) as u64;
                (c + depth as u64 * log_n, depth)
            }
            ShortcutSource::Simulated(sim) => {
                let sim = SimConfig {
                    seed: phase_seed,
                    c_p: config.c_p,
                    ..sim
                };
                let result = run_with_guessing(graph, &fragments, sim)?;
                let large_depth = result.trees.iter().map(PartTree::depth).max().unwrap_or(0);
                let small_depth = (0..classified.len())
                    .filter(|i| !large.contains(i))
                    .map(|i| fragment_depth(graph, classified.part(i), classified.leader(i), None))
                    .max()
                    .unwrap_or(0);
                (result.rounds, large_depth.max(small_depth))
            }
        };

        // minimum outgoing edge per fragment
        let ids: Vec<usize> = (0..fragments.len()).collect();
        let chosen: Vec<Option<EdgeId>> = {
            let roots = dsu.clone().into_labeling();
            par::map_collect(config.exec, &ids, |&i| {
                fragments
                    .part(i)
                    .iter()
                    .flat_map(|&u| graph.neighbors(u).iter().map(move |&v| (u, v)))
                    .filter(|&(u, v)| roots[u] != roots[v])
                    .map(|(u, v)| graph.edge_id(u, v).unwrap())
                    .min_by_key(|&e| key(graph, e))
            })
        };
        for e in chosen {
            let e = e.ok_or(Error::Disconnected)?;
            let (u, v) = graph.edge(e);
            if dsu.union(u, v) {
                edges.push(e);
            }
        }
        let phase_rounds = construction + 2 * max_depth as u64;
        rounds += phase_rounds;
        log.push(PhaseRecord {
            fragments: fragments.len(),
            large_fragments: large.len(),
            construction_rounds: construction,
            max_depth,
            rounds: phase_rounds,
        });
    }
    if n > 0 && edges.len() + 1 != n {
        return Err(Error::Disconnected);
    }
    edges.sort_unstable();
    let weight = edges.iter().map(|&e| graph.weight(e).unwrap_or(1)).sum();
    Ok(MstResult {
        edges,
        weight,
        phases: log.len() as u32,
        rounds,
        phase_log: log,
    })
}
