use std::fmt::Write as _;

use super::params::ShortcutParams;
use super::sampling::{slot_keys, Sampler};
use crate::error::{Error, Result};
use crate::graph::{EdgeId, Graph, PartLabel, Partition, SlotId, VertexId};
use crate::par::{self, Execution};

/// Why an edge belongs to `H_i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Provenance {
    /// Incident to `S_i`.
    Step1,
    /// First successful trial: repetition `rep` (1-based) by endpoint `tail`.
    Sampled { rep: u32, tail: VertexId },
}

impl std::fmt::Display for Provenance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Provenance::Step1 => f.write_str("step1"),
            Provenance::Sampled { rep, tail } => write!(f, "k:{rep}:{tail}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BuildMode {
    /// Sample every arc with probability `p`.
    Direct,
    /// Subdivide every edge and sample both halves with probability `sqrt(p)`.
    Subdivided,
}

/// Shortcut subgraph of one large part.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartShortcut {
    pub part: usize,
    pub large_index: u32,
    pub leader: VertexId,
    pub size: usize,
    edges: Vec<(EdgeId, Provenance)>,
    /// `E_1..E_D` restricted to this part, as sorted slot lists.
    rounds: Vec<Vec<u32>>,
}

impl PartShortcut {
    /// A shortcut without recorded rounds; `edges` must be sorted by edge ID.
    pub(crate) fn from_edges(
        part: usize,
        large_index: u32,
        leader: VertexId,
        size: usize,
        edges: Vec<(EdgeId, Provenance)>,
    ) -> Self {
        debug_assert!(edges.windows(2).all(|w| w[0].0 < w[1].0));
        Self {
            part,
            large_index,
            leader,
            size,
            edges,
            rounds: Vec::new(),
        }
    }

    /// Edges of `H_i`, sorted by edge ID.
    pub fn edges(&self) -> &[(EdgeId, Provenance)] {
        &self.edges
    }

    pub fn edge_ids(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.edges.iter().map(|&(e, _)| e)
    }

    pub fn provenance(&self, e: EdgeId) -> Option<Provenance> {
        self.edges
            .binary_search_by_key(&e, |&(x, _)| x)
            .ok()
            .map(|i| self.edges[i].1)
    }

    pub fn contains(&self, e: EdgeId) -> bool {
        self.provenance(e).is_some()
    }

    pub fn repetitions(&self) -> usize {
        self.rounds.len()
    }

    /// Arcs sampled for this part in repetition `k` (1-based).
    pub fn round(&self, k: usize) -> impl Iterator<Item = SlotId> + '_ {
        self.rounds[k - 1].iter().map(|&s| s as SlotId)
    }

    pub fn round_contains(&self, k: usize, slot: SlotId) -> bool {
        self.rounds[k - 1].binary_search(&(slot as u32)).is_ok()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ShortcutSet {
    pub params: ShortcutParams,
    pub seed: u64,
    pub mode: BuildMode,
    parts: Vec<PartShortcut>,
}

impl ShortcutSet {
    pub(crate) fn from_parts(params: ShortcutParams, seed: u64, mode: BuildMode, parts: Vec<PartShortcut>) -> Self {
        Self {
            params,
            seed,
            mode,
            parts,
        }
    }

    /// Large parts in large-index order.
    pub fn parts(&self) -> &[PartShortcut] {
        &self.parts
    }

    /// Shortcut of partition part `part`, if it is large.
    pub fn for_part(&self, part: usize) -> Option<&PartShortcut> {
        self.parts.iter().find(|p| p.part == part)
    }

    /// Text dump: per part a header `part i leader v size s`, then one line
    /// `u v provenance` per edge.
    pub fn dump(&self, graph: &Graph) -> String {
        let mut s = String::new();
        for p in &self.parts {
            writeln!(s, "part {} leader {} size {}", p.large_index, p.leader, p.size).unwrap();
            for &(e, prov) in &p.edges {
                let (u, v) = graph.edge(e);
                writeln!(s, "{u} {v} {prov}").unwrap();
            }
        }
        s
    }
}

/// Options for [`build_with`].
#[derive(Clone, Debug, Default)]
pub struct BuildOptions {
    pub exec: Execution,
    /// Restrict construction to these partition part indices (large ones
    /// only are built). Keyed sampling makes each part independent, so a
    /// restricted build equals the matching slice of a full build.
    pub only_parts: Option<Vec<usize>>,
    /// Skip recording `E_1..E_D` (saves memory on large instances).
    pub skip_rounds: bool,
}

pub(crate) struct Sampling<'a> {
    pub graph: &'a Graph,
    pub partition: &'a Partition,
    pub params: ShortcutParams,
    /// Part index of each vertex, `u32::MAX` if none.
    owner: Vec<u32>,
    keys: Vec<u64>,
    sampler: Sampler,
}

impl<'a> Sampling<'a> {
    pub(crate) fn new(
        graph: &'a Graph,
        partition: &'a Partition,
        params: &ShortcutParams,
        seed: u64,
        mode: BuildMode,
    ) -> Result<Self> {
        check_inputs(graph, partition, params)?;
        let mut owner = vec![u32::MAX; graph.n()];
        for (i, s) in partition.parts().iter().enumerate() {
            for &v in s {
                owner[v] = i as u32;
            }
        }
        Ok(Self {
            graph,
            partition,
            params: *params,
            owner,
            keys: slot_keys(graph),
            sampler: Sampler::new(seed, params.p, mode == BuildMode::Direct),
        })
    }

    /// Builds `H_i` for partition part `part` with large index `large_index`.
    pub(crate) fn part(&self, part: usize, large_index: u32, record_rounds: bool) -> PartShortcut {
        let g = self.graph;
        let s = self.partition.part(part);
        // first provenance per edge; repetitions ascend in the outer loop and
        // tails ascend in the inner one, so the first write is the smallest
        // (rep, tail)
        const UNSET: (u32, u32) = (u32::MAX, u32::MAX);
        let mut first = vec![UNSET; g.m()];
        for &v in s {
            for slot in g.slots(v) {
                first[g.slot_edge(slot)] = (0, 0);
            }
        }
        let mut rounds = Vec::new();
        for rep in 1..=self.params.d {
            let streams = self.sampler.streams(large_index, rep);
            let mut round = Vec::new();
            for u in 0..g.n() {
                if self.owner[u] == part as u32 {
                    continue;
                }
                let range = g.slots(u);
                for (slot, &key) in range.clone().zip(&self.keys[range]) {
                    if self.sampler.keep(streams, key) {
                        let f = &mut first[g.slot_edge(slot)];
                        if *f == UNSET {
                            *f = (rep, u as u32);
                        }
                        if record_rounds {
                            round.push(slot as u32);
                        }
                    }
                }
            }
            if record_rounds {
                rounds.push(round);
            }
        }
        let edges = first
            .into_iter()
            .enumerate()
            .filter(|&(_, f)| f != UNSET)
            .map(|(e, (rep, tail))| {
                let prov = if rep == 0 {
                    Provenance::Step1
                } else {
                    Provenance::Sampled {
                        rep,
                        tail: tail as VertexId,
                    }
                };
                (e, prov)
            })
            .collect();
        PartShortcut {
            part,
            large_index,
            leader: self.partition.leader(part),
            size: s.len(),
            edges,
            rounds,
        }
    }

    /// `(part index, large index)` of every large part, by large index.
    pub(crate) fn large(&self) -> Vec<(usize, u32)> {
        self.partition
            .large_parts()
            .into_iter()
            .map(|i| match self.partition.label(i) {
                PartLabel::Large(li) => (i, li),
                _ => unreachable!(),
            })
            .collect()
    }
}

fn check_inputs(graph: &Graph, partition: &Partition, params: &ShortcutParams) -> Result<()> {
    if partition.n() != graph.n() || params.n != graph.n() {
        return Err(Error::InvalidParameter(format!(
            "size mismatch: graph n = {}, partition n = {}, params n = {}",
            graph.n(),
            partition.n(),
            params.n
        )));
    }
    if partition.labels().contains(&PartLabel::Unclassified) {
        return Err(Error::InvalidPartition(
            "parts are unclassified; run classify_parts first".into(),
        ));
    }
    Ok(())
}

/// Even-diameter construction: Step 1 adds every edge incident to `S_i`;
/// Step 2 samples every arc `(u, v)` with `u` outside `S_i`, `D` times with
/// probability `p`.
pub fn build_centralized(
    graph: &Graph,
    partition: &Partition,
    params: &ShortcutParams,
    seed: u64,
) -> Result<ShortcutSet> {
    if !params.is_even() {
        return Err(Error::Parity("odd diameter: use build_odd"));
    }
    build_with(graph, partition, params, seed, &BuildOptions::default())
}

/// Odd-diameter construction on the subdivided graph: edge `{u, v}` gets a
/// dummy midpoint `x_e`; arc `(u, v)` is kept in a repetition iff `u`
/// samples `(u, x_e)` and `x_e` samples `(x_e, v)` in that repetition, each
/// with probability `sqrt(p)`. The dummy's trial for `(x_e, v)` is keyed by
/// the original arc `(u, v)`, which identifies it uniquely.
pub fn build_odd(
    graph: &Graph,
    partition: &Partition,
    params: &ShortcutParams,
    seed: u64,
) -> Result<ShortcutSet> {
    if params.is_even() {
        return Err(Error::Parity("even diameter: use build_centralized"));
    }
    build_with(graph, partition, params, seed, &BuildOptions::default())
}

/// Dispatches on the parity of `params.d`.
pub fn build(
    graph: &Graph,
    partition: &Partition,
    params: &ShortcutParams,
    seed: u64,
) -> Result<ShortcutSet> {
    build_with(graph, partition, params, seed, &BuildOptions::default())
}

pub fn build_with(
    graph: &Graph,
    partition: &Partition,
    params: &ShortcutParams,
    seed: u64,
    options: &BuildOptions,
) -> Result<ShortcutSet> {
    let mode = mode_for(params);
    let ctx = Sampling::new(graph, partition, params, seed, mode)?;
    let mut large = ctx.large();
    if let Some(only) = &options.only_parts {
        large.retain(|(i, _)| only.contains(i));
    }
    let parts = par::map_collect(options.exec, &large, |&(i, li)| {
        ctx.part(i, li, !options.skip_rounds)
    });
    Ok(ShortcutSet {
        params: *params,
        seed,
        mode,
        parts,
    })
}

pub(crate) fn mode_for(params: &ShortcutParams) -> BuildMode {
    if params.is_even() {
        BuildMode::Direct
    } else {
        BuildMode::Subdivided
    }
}
