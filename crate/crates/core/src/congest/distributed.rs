//! The distributed construction driven round by round.
//!
//! Each step runs one node program on the engine; what a node learns in one
//! step is carried to the next in its own [`NodeState`]. Nodes know `n`,
//! their own leader and their neighbors' IDs.

use std::fmt::Write as _;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::engine::{Engine, EngineConfig, NodeProgram};
use super::protocols::{
    Aggregate, Broadcast, BroadcastState, Convergecast, ConvergecastState, Election, ElectionState, Exchange,
    ExchangeState, ListExchange, ListExchangeState, Merge, MergeState, PartBfs, PartBfsState, ScheduleState,
    ScheduledBfs, TreePorts, MAX_WORDS,
};
use crate::error::{Error, Result};
use crate::graph::{Graph, Partition, VertexId};
use crate::par::{self, Execution};
use crate::shortcut::sampling::{arc_key, mix, Sampler};
use crate::shortcut::{compute_params, mode_for, PartShortcut, Provenance, ShortcutParams, ShortcutSet};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimConfig {
    /// Per-edge, per-round capacity in `O(log n)`-bit words.
    pub message_words: usize,
    /// Phase length is `ceil(c_phase * log2 n)` rounds.
    pub c_phase: f64,
    pub round_cap_factor: f64,
    pub c_p: f64,
    /// Congestion and depth cap: `c_cong * k_D * log2 n`.
    pub c_cong: f64,
    pub seed: u64,
    /// Charge the random-delay scheduler's `O(d log^2 n)` precomputation,
    /// with `d` the depth cap, as a flat round cost.
    pub charge_precomputation: bool,
    pub exec: Execution,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            message_words: 2,
            c_phase: 1.0,
            round_cap_factor: 64.0,
            c_p: 1.0,
            c_cong: 4.0,
            seed: 0,
            charge_precomputation: false,
            exec: Execution::default(),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(1..=MAX_WORDS).contains(&self.message_words) {
            return Err(Error::Config(format!(
                "message_words must be in 1..={MAX_WORDS}, got {}",
                self.message_words
            )));
        }
        for (name, v) in [
            ("c_phase", self.c_phase),
            ("round_cap_factor", self.round_cap_factor),
            ("c_cong", self.c_cong),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.c_p.is_finite() && self.c_p >= 0.0) {
            return Err(Error::Config(format!("c_p must be non-negative, got {}", self.c_p)));
        }
        Ok(())
    }

    pub fn phase_length(&self, n: usize) -> u64 {
        ((self.c_phase * log2(n)).ceil() as u64).max(1)
    }

    pub fn congestion_cap(&self, params: &ShortcutParams) -> f64 {
        self.c_cong * params.k_d * params.log2_n
    }

    pub fn depth_cap(&self, params: &ShortcutParams) -> u32 {
        self.congestion_cap(params).ceil() as u32
    }

    /// `round_cap_factor * k_D * log2(n)^2`.
    pub fn round_budget(&self, params: &ShortcutParams) -> f64 {
        self.round_cap_factor * params.k_d * params.log2_n * params.log2_n
    }
}

fn log2(n: usize) -> f64 {
    (n.max(2) as f64).log2()
}

/// What one node keeps between protocol steps.
#[derive(Clone, Debug, Default)]
pub struct NodeState {
    pub leader: Option<VertexId>,
    pub neighbor_leaders: Vec<Option<VertexId>>,
    /// Port view of the global BFS tree.
    pub tree: TreePorts,
    pub diameter_estimate: Option<u32>,
    /// Per port: own successful trials packed as `large_index << 8 | first rep`.
    pub samples: Vec<Vec<u32>>,
    /// Per port: large indices whose augmented subgraph contains the edge.
    pub membership: Vec<Vec<u32>>,
}

/// Large-part leaders in ascending ID order; index `li - 1` holds the
/// leader of large index `li`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Numbering {
    pub leaders: Vec<VertexId>,
}

impl Numbering {
    pub fn len(&self) -> usize {
        self.leaders.len()
    }

    pub fn is_empty(&self) -> bool {
        self.leaders.is_empty()
    }

    pub fn index_of(&self, leader: VertexId) -> Option<u32> {
        self.leaders.binary_search(&leader).ok().map(|i| i as u32 + 1)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GuessFailure {
    Congestion { observed: u32, cap: u32 },
    Overflow,
    Truncated { unreached: usize },
}

impl std::fmt::Display for GuessFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GuessFailure::Congestion { observed, cap } => write!(f, "congestion {observed} over cap {cap}"),
            GuessFailure::Overflow => f.write_str("scheduling overflow"),
            GuessFailure::Truncated { unreached } => write!(f, "{unreached} part members outside their tree"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GuessRecord {
    pub guess: u32,
    pub accepted: bool,
    pub rounds: u64,
    pub max_congestion_observed: u32,
    pub max_tree_depth: u32,
    pub failure: Option<GuessFailure>,
}

/// BFS tree of one large part: `(vertex, parent, depth)` sorted by vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartTree {
    pub large_index: u32,
    pub leader: VertexId,
    pub nodes: Vec<(VertexId, Option<VertexId>, u32)>,
}

impl PartTree {
    pub fn depth(&self) -> u32 {
        self.nodes.iter().map(|n| n.2).max().unwrap_or(0)
    }
}

#[derive(Clone, Debug)]
pub struct DistributedResult {
    /// `D'`: twice the elected root's eccentricity.
    pub diameter_estimate: u32,
    pub accepted: Option<u32>,
    /// Rounds over all steps and guesses.
    pub rounds: u64,
    pub guesses: Vec<GuessRecord>,
    /// Parameters of the accepted guess.
    pub params: Option<ShortcutParams>,
    pub numbering: Numbering,
    /// Memberships of the accepted guess.
    pub shortcuts: Option<ShortcutSet>,
    pub trees: Vec<PartTree>,
    /// Hash of every message sent, in order.
    pub fingerprint: u64,
}

impl DistributedResult {
    /// `guess,accepted,rounds,max_congestion_observed,max_tree_depth`.
    pub fn summary_csv(&self) -> String {
        let mut s = String::from("guess,accepted,rounds,max_congestion_observed,max_tree_depth\n");
        for g in &self.guesses {
            writeln!(
                s,
                "{},{},{},{},{}",
                g.guess, g.accepted, g.rounds, g.max_congestion_observed, g.max_tree_depth
            )
            .unwrap();
        }
        s
    }
}

/// Outcome of one scheduled BFS.
#[derive(Clone, Debug)]
pub struct BfsOutcome {
    pub trees: Vec<PartTree>,
    pub overflow: bool,
    /// Members of large parts their own tree missed.
    pub unreached: usize,
    pub rounds: u64,
}

pub struct Simulator<'g> {
    graph: &'g Graph,
    partition: &'g Partition,
    engine: Engine<'g>,
    config: SimConfig,
    nodes: Vec<NodeState>,
    rounds: u64,
    fingerprint: u64,
}

impl<'g> Simulator<'g> {
    /// `partition` supplies each node's leader; its labels are ignored.
    pub fn new(graph: &'g Graph, partition: &'g Partition, config: SimConfig) -> Result<Self> {
        config.validate()?;
        if partition.n() != graph.n() {
            return Err(Error::InvalidParameter("partition and graph sizes differ".into()));
        }
        if !graph.is_connected() {
            return Err(Error::Disconnected);
        }
        let mut nodes = vec![NodeState::default(); graph.n()];
        for (i, part) in partition.parts().iter().enumerate() {
            for &v in part {
                nodes[v].leader = Some(partition.leader(i));
            }
        }
        let engine = Engine::new(
            graph,
            EngineConfig {
                message_words: config.message_words,
                ..EngineConfig::default()
            },
        );
        Ok(Self {
            graph,
            partition,
            engine,
            config,
            nodes,
            rounds: 0,
            fingerprint: 0,
        })
    }

    pub fn rounds(&self) -> u64 {
        self.rounds
    }

    pub fn nodes(&self) -> &[NodeState] {
        &self.nodes
    }

    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    fn run<P: NodeProgram>(&mut self, program: &P, states: &mut [P::State]) -> Result<u64> {
        let trace = self.engine.run(program, states)?;
        self.rounds += trace.rounds;
        self.fingerprint = mix(self.fingerprint ^ trace.fingerprint ^ trace.rounds.rotate_left(32));
        Ok(trace.rounds)
    }

    fn root(&self) -> VertexId {
        (0..self.graph.n())
            .find(|&v| self.nodes[v].tree.parent.is_none())
            .expect("tree has a root")
    }

    /// Broadcasts `data` from the tree root; returns every node's copy.
    fn broadcast(&mut self, data: Vec<u64>) -> Result<Vec<u64>> {
        let root = self.root();
        let mut states: Vec<BroadcastState> = self
            .nodes
            .iter()
            .enumerate()
            .map(|(v, s)| BroadcastState::new(s.tree.clone(), if v == root { data.clone() } else { Vec::new() }))
            .collect();
        self.run(
            &Broadcast {
                words: self.config.message_words,
            },
            &mut states,
        )?;
        assert!(states.iter().all(|s| s.complete() && s.data == data));
        Ok(data)
    }

    /// Aggregates one value per node at the root and broadcasts the result.
    fn aggregate(&mut self, values: Vec<u64>, op: Aggregate) -> Result<u64> {
        let mut states: Vec<ConvergecastState> = self
            .nodes
            .iter()
            .zip(values)
            .map(|(s, v)| ConvergecastState::new(s.tree.clone(), v))
            .collect();
        self.run(&Convergecast(op), &mut states)?;
        let value = states[self.root()].value;
        self.broadcast(vec![value])?;
        Ok(value)
    }

    /// Elects the maximum-ID node, builds a BFS tree from it and spreads
    /// `D' = 2 ecc(root)`. Returns `D'`.
    pub fn elect(&mut self) -> Result<u32> {
        let mut states = vec![ElectionState::default(); self.graph.n()];
        self.run(&Election, &mut states)?;
        let ecc = states
            .iter()
            .find_map(|s| s.root_height)
            .expect("the maximum ID completes its echo");
        for (node, s) in self.nodes.iter_mut().zip(states) {
            node.tree = s.tree;
        }
        let estimate = 2 * ecc;
        self.broadcast(vec![estimate as u64])?;
        for node in &mut self.nodes {
            node.diameter_estimate = Some(estimate);
        }
        Ok(estimate)
    }

    /// One round: every node tells its neighbors its leader.
    pub fn exchange_leaders(&mut self) -> Result<()> {
        let mut states: Vec<ExchangeState> = self
            .nodes
            .iter()
            .map(|s| ExchangeState {
                mine: s.leader.map_or(0, |l| l as u64 + 1),
                theirs: Vec::new(),
            })
            .collect();
        self.run(&Exchange, &mut states)?;
        for (node, s) in self.nodes.iter_mut().zip(states) {
            node.neighbor_leaders = s.theirs.iter().map(|&w| w.checked_sub(1).map(|l| l as VertexId)).collect();
        }
        Ok(())
    }

    /// Truncated BFS inside every part to depth `ceil(k_D)`, then numbering
    /// of large leaders over the global tree.
    pub fn identify_large_parts(&mut self, params: &ShortcutParams) -> Result<Numbering> {
        let mut states: Vec<PartBfsState> = self
            .nodes
            .iter()
            .enumerate()
            .map(|(v, s)| {
                let same: Vec<usize> = match s.leader {
                    None => Vec::new(),
                    Some(l) => (0..s.neighbor_leaders.len())
                        .filter(|&p| s.neighbor_leaders[p] == Some(l))
                        .collect(),
                };
                PartBfsState::new(s.leader == Some(v), same)
            })
            .collect();
        self.run(
            &PartBfs {
                depth_limit: params.k_ceil(),
            },
            &mut states,
        )?;
        let own: Vec<Vec<u64>> = states
            .iter()
            .enumerate()
            .map(|(v, s)| match s.outcome {
                Some((count, truncated)) if truncated || count as f64 > params.k_d => vec![v as u64],
                _ => Vec::new(),
            })
            .collect();
        let mut merge: Vec<MergeState> = self
            .nodes
            .iter()
            .zip(own)
            .map(|(s, own)| MergeState::new(s.tree.clone(), own))
            .collect();
        self.run(
            &Merge {
                words: self.config.message_words,
            },
            &mut merge,
        )?;
        let list = std::mem::take(&mut merge[self.root()].merged);
        let list = self.broadcast(list)?;
        Ok(Numbering {
            leaders: list.into_iter().map(|v| v as VertexId).collect(),
        })
    }

    /// Every node evaluates its own trials; no communication.
    pub fn local_sampling(&mut self, params: &ShortcutParams, numbering: &Numbering) {
        let sampler = Sampler::new(self.config.seed, params.p, params.is_even());
        let g = self.graph;
        let ids: Vec<VertexId> = (0..g.n()).collect();
        let leaders: Vec<Option<VertexId>> = self.nodes.iter().map(|s| s.leader).collect();
        let samples = par::map_collect(self.config.exec, &ids, |&u| {
            sample_node(g, u, leaders[u], numbering, &sampler, params.d)
        });
        for (node, s) in self.nodes.iter_mut().zip(samples) {
            node.samples = s;
        }
    }

    /// Sends each neighbor the parts that sampled the shared edge, forms
    /// the full memberships and returns the network-wide maximum edge
    /// congestion.
    pub fn exchange_memberships(&mut self, numbering: &Numbering) -> Result<u32> {
        let mut states: Vec<ListExchangeState> = self
            .nodes
            .iter()
            .map(|s| ListExchangeState::new(s.samples.iter().map(|l| l.iter().map(|&x| x >> 8).collect()).collect()))
            .collect();
        self.run(
            &ListExchange {
                words: self.config.message_words,
            },
            &mut states,
        )?;
        let mut local_max = Vec::with_capacity(self.graph.n());
        for (node, s) in self.nodes.iter_mut().zip(states) {
            let own_li = node.leader.and_then(|l| numbering.index_of(l));
            let mut worst = 0u32;
            node.membership = s
                .outgoing
                .into_iter()
                .zip(s.incoming)
                .zip(&node.neighbor_leaders)
                .map(|((mut list, incoming), nl)| {
                    list.extend(incoming);
                    list.extend(own_li);
                    list.extend(nl.and_then(|l| numbering.index_of(l)));
                    list.sort_unstable();
                    list.dedup();
                    worst = worst.max(list.len() as u32);
                    list
                })
                .collect();
            local_max.push(worst as u64);
        }
        Ok(self.aggregate(local_max, Aggregate::Max)? as u32)
    }

    /// The root draws `ceil(log2 n)` random words and broadcasts them; every
    /// node derives the start phase `1..=ceil(k_D)` of every large part.
    pub fn distribute_delays(&mut self, params: &ShortcutParams, numbering: &Numbering, guess: u32) -> Result<Vec<u32>> {
        let mut rng = ChaCha8Rng::seed_from_u64(mix(self.config.seed ^ 0x5352_0000 ^ guess as u64));
        let words = log2(self.graph.n()).ceil() as usize;
        let sr: Vec<u64> = (0..words).map(|_| rng.next_u64()).collect();
        let sr = self.broadcast(sr)?;
        let k = params.k_ceil().max(1) as u64;
        let mut delays = vec![0u32; numbering.len() + 1];
        for (li, d) in delays.iter_mut().enumerate().skip(1) {
            let h = sr.iter().fold(mix(li as u64), |h, &w| mix(h ^ w));
            *d = 1 + (h % k) as u32;
        }
        Ok(delays)
    }

    /// Random-delay BFS in every large part's augmented subgraph. Nodes wait
    /// out the schedule bound `(ceil(k_D) + depth cap)` phases, which is
    /// charged in full.
    pub fn scheduled_bfs(&mut self, params: &ShortcutParams, numbering: &Numbering, delays: &[u32]) -> Result<BfsOutcome> {
        let phase_length = self.config.phase_length(self.graph.n());
        let depth_cap = self.config.depth_cap(params);
        let mut states: Vec<ScheduleState> = self
            .nodes
            .iter()
            .enumerate()
            .map(|(v, s)| {
                let mut pairs: Vec<(u32, u32)> = s
                    .membership
                    .iter()
                    .enumerate()
                    .flat_map(|(p, l)| l.iter().map(move |&li| (li, p as u32)))
                    .collect();
                pairs.sort_unstable();
                let mut lis = Vec::new();
                let mut li_ports: Vec<Vec<u32>> = Vec::new();
                for (li, p) in pairs {
                    if lis.last() != Some(&li) {
                        lis.push(li);
                        li_ports.push(Vec::new());
                    }
                    li_ports.last_mut().unwrap().push(p);
                }
                let leads = (s.leader == Some(v)).then(|| numbering.index_of(v)).flatten();
                ScheduleState::new(lis, li_ports, leads)
            })
            .collect();
        let program = ScheduledBfs {
            words: self.config.message_words,
            phase_length,
            depth_cap,
            delays: delays.to_vec(),
        };
        let trace = self.engine.run(&program, &mut states)?;
        let bound = (params.k_ceil() as u64 + depth_cap as u64) * phase_length;
        let rounds = trace.rounds.max(bound);
        self.rounds += rounds;
        self.fingerprint = mix(self.fingerprint ^ trace.fingerprint ^ rounds.rotate_left(32));

        let mut trees: Vec<PartTree> = numbering
            .leaders
            .iter()
            .enumerate()
            .map(|(i, &leader)| PartTree {
                large_index: i as u32 + 1,
                leader,
                nodes: Vec::new(),
            })
            .collect();
        let mut overflow = false;
        let mut unreached = 0;
        for (v, s) in states.iter().enumerate() {
            overflow |= s.overflow;
            for (i, &li) in s.lis.iter().enumerate() {
                if s.depth[i] != u32::MAX {
                    trees[li as usize - 1].nodes.push((v, s.parent[i], s.depth[i]));
                }
            }
            let own = self.nodes[v].leader.and_then(|l| numbering.index_of(l));
            if own.is_some_and(|li| s.depth_in(li).is_none()) {
                unreached += 1;
            }
        }
        Ok(BfsOutcome {
            trees,
            overflow,
            unreached,
            rounds,
        })
    }

    /// Global OR of per-node failure flags, known to every node afterwards.
    pub fn verify(&mut self, failed: Vec<bool>) -> Result<bool> {
        let any = self.aggregate(failed.into_iter().map(u64::from).collect(), Aggregate::Or)?;
        Ok(any == 0)
    }

    fn flags(&self, outcome: &BfsOutcome, numbering: &Numbering) -> Vec<bool> {
        let mut failed = vec![outcome.overflow; self.graph.n()];
        for t in &outcome.trees {
            let part = self.part_of(t.leader);
            for &v in self.partition.part(part) {
                if t.nodes.binary_search_by_key(&v, |n| n.0).is_err() {
                    failed[v] = true;
                }
            }
        }
        debug_assert_eq!(numbering.len(), outcome.trees.len());
        failed
    }

    fn part_of(&self, leader: VertexId) -> usize {
        self.partition
            .leaders()
            .iter()
            .position(|&l| l == leader)
            .expect("leaders come from the partition")
    }

    /// One guess `D''`: identification, sampling, congestion check, delays,
    /// scheduled BFS and verification.
    pub fn run_guess(&mut self, guess: u32) -> Result<(GuessRecord, Option<Accepted>)> {
        let n = self.graph.n();
        let params = compute_params(n, guess, self.config.c_p)?;
        let start = self.rounds;
        let numbering = self.identify_large_parts(&params)?;
        self.local_sampling(&params, &numbering);
        let observed = self.exchange_memberships(&numbering)?;
        let cap = self.config.congestion_cap(&params);
        let mut record = GuessRecord {
            guess,
            accepted: false,
            rounds: 0,
            max_congestion_observed: observed,
            max_tree_depth: 0,
            failure: None,
        };
        if observed as f64 > cap {
            record.failure = Some(GuessFailure::Congestion {
                observed,
                cap: cap.floor() as u32,
            });
            record.rounds = self.rounds - start;
            return Ok((record, None));
        }
        let delays = self.distribute_delays(&params, &numbering, guess)?;
        if self.config.charge_precomputation {
            let l = params.log2_n;
            self.rounds += (self.config.depth_cap(&params) as f64 * l * l).ceil() as u64;
        }
        let outcome = self.scheduled_bfs(&params, &numbering, &delays)?;
        let flags = self.flags(&outcome, &numbering);
        let ok = self.verify(flags)?;
        record.max_tree_depth = outcome.trees.iter().map(PartTree::depth).max().unwrap_or(0);
        record.rounds = self.rounds - start;
        if !ok {
            record.failure = Some(if outcome.overflow {
                GuessFailure::Overflow
            } else {
                GuessFailure::Truncated {
                    unreached: outcome.unreached,
                }
            });
            return Ok((record, None));
        }
        record.accepted = true;
        let shortcuts = self.shortcut_set(&params, &numbering);
        Ok((
            record,
            Some(Accepted {
                params,
                numbering,
                shortcuts,
                trees: outcome.trees,
            }),
        ))
    }

    /// Assembles the memberships into a [`ShortcutSet`]. Provenance joins
    /// both endpoints' local records: Step 1 if either endpoint is in the
    /// part, else the smallest `(rep, tail)` trial.
    pub fn shortcut_set(&self, params: &ShortcutParams, numbering: &Numbering) -> ShortcutSet {
        let g = self.graph;
        let mut per_li: Vec<Vec<(usize, Provenance)>> = vec![Vec::new(); numbering.len()];
        let first_rep = |u: VertexId, port: usize, li: u32| -> Option<u32> {
            let list = &self.nodes[u].samples[port];
            list.binary_search_by_key(&li, |&x| x >> 8).ok().map(|i| list[i] & 0xff)
        };
        for u in 0..g.n() {
            for (port, slot) in g.slots(u).enumerate() {
                let v = g.slot_target(slot);
                if v < u {
                    continue;
                }
                let back = g.neighbors(v).binary_search(&u).unwrap();
                debug_assert_eq!(self.nodes[u].membership[port], self.nodes[v].membership[back]);
                for &li in &self.nodes[u].membership[port] {
                    let leader = numbering.leaders[li as usize - 1];
                    let prov = if self.nodes[u].leader == Some(leader) || self.nodes[v].leader == Some(leader) {
                        Provenance::Step1
                    } else {
                        let a = first_rep(u, port, li).map(|r| (r, u));
                        let b = first_rep(v, back, li).map(|r| (r, v));
                        let (rep, tail) = a.into_iter().chain(b).min().expect("sampled by an endpoint");
                        Provenance::Sampled { rep, tail }
                    };
                    per_li[li as usize - 1].push((g.slot_edge(slot), prov));
                }
            }
        }
        let parts = per_li
            .into_iter()
            .enumerate()
            .map(|(i, mut edges)| {
                edges.sort_unstable_by_key(|&(e, _)| e);
                let leader = numbering.leaders[i];
                let part = self.part_of(leader);
                PartShortcut::from_edges(part, i as u32 + 1, leader, self.partition.part(part).len(), edges)
            })
            .collect();
        ShortcutSet::from_parts(*params, self.config.seed, mode_for(params), parts)
    }
}

/// Products of an accepted guess.
#[derive(Clone, Debug)]
pub struct Accepted {
    pub params: ShortcutParams,
    pub numbering: Numbering,
    pub shortcuts: ShortcutSet,
    pub trees: Vec<PartTree>,
}

/// Node `u`'s trials: for every large part it is not in, every incident
/// arc, the first successful repetition.
fn sample_node(
    graph: &Graph,
    u: VertexId,
    leader: Option<VertexId>,
    numbering: &Numbering,
    sampler: &Sampler,
    d: u32,
) -> Vec<Vec<u32>> {
    let own = leader.and_then(|l| numbering.index_of(l));
    let keys: Vec<u64> = graph.neighbors(u).iter().map(|&v| arc_key(u, v)).collect();
    let mut lists = vec![Vec::new(); keys.len()];
    let mut hit = vec![false; keys.len()];
    for li in 1..=numbering.len() as u32 {
        if Some(li) == own {
            continue;
        }
        hit.fill(false);
        for rep in 1..=d {
            let streams = sampler.streams(li, rep);
            for (p, &key) in keys.iter().enumerate() {
                if !hit[p] && sampler.keep(streams, key) {
                    hit[p] = true;
                    lists[p].push(li << 8 | rep);
                }
            }
        }
    }
    lists
}

/// Elects a root, exchanges leaders and identifies large parts for `params`.
pub fn identify_large_parts(
    graph: &Graph,
    partition: &Partition,
    params: &ShortcutParams,
    config: SimConfig,
) -> Result<(Numbering, u64)> {
    let mut sim = Simulator::new(graph, partition, config)?;
    sim.elect()?;
    sim.exchange_leaders()?;
    let numbering = sim.identify_large_parts(params)?;
    Ok((numbering, sim.rounds()))
}

/// Distributed memberships for a known diameter, without the BFS phase:
/// identification, local sampling and the membership exchange.
pub fn local_sampling(graph: &Graph, partition: &Partition, params: &ShortcutParams, config: SimConfig) -> Result<ShortcutSet> {
    let mut sim = Simulator::new(graph, partition, config)?;
    sim.elect()?;
    sim.exchange_leaders()?;
    let numbering = sim.identify_large_parts(params)?;
    sim.local_sampling(params, &numbering);
    sim.exchange_memberships(&numbering)?;
    Ok(sim.shortcut_set(params, &numbering))
}

fn simulate(graph: &Graph, partition: &Partition, config: SimConfig, guesses: Option<Vec<u32>>) -> Result<DistributedResult> {
    let mut sim = Simulator::new(graph, partition, config)?;
    let estimate = sim.elect()?;
    sim.exchange_leaders()?;
    let guesses = guesses.unwrap_or_else(|| {
        let lo = estimate.div_ceil(2).max(3);
        (lo..=estimate.max(lo)).collect()
    });
    let mut result = DistributedResult {
        diameter_estimate: estimate,
        accepted: None,
        rounds: 0,
        guesses: Vec::new(),
        params: None,
        numbering: Numbering::default(),
        shortcuts: None,
        trees: Vec::new(),
        fingerprint: 0,
    };
    for guess in guesses {
        let (record, accepted) = sim.run_guess(guess)?;
        result.guesses.push(record);
        if let Some(a) = accepted {
            result.accepted = Some(guess);
            result.params = Some(a.params);
            result.numbering = a.numbering;
            result.shortcuts = Some(a.shortcuts);
            result.trees = a.trees;
            break;
        }
    }
    result.rounds = sim.rounds();
    result.fingerprint = sim.fingerprint();
    Ok(result)
}

/// The full algorithm for nodes that do not know `D`: guesses
/// `ceil(D'/2), ..., D'` (at least 3) until one verifies.
pub fn run_with_guessing(graph: &Graph, partition: &Partition, config: SimConfig) -> Result<DistributedResult> {
    let result = simulate(graph, partition, config, None)?;
    match result.accepted {
        Some(_) => Ok(result),
        None => Err(Error::GuessingExhausted(result.diameter_estimate.max(3))),
    }
}

/// A single guess `d`; the result may be unaccepted.
pub fn run_known_diameter(graph: &Graph, partition: &Partition, d: u32, config: SimConfig) -> Result<DistributedResult> {
    simulate(graph, partition, config, Some(vec![d]))
}
