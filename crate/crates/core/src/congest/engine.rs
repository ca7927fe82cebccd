//! Synchronous round engine.
//!
//! A node program only sees its own state, its incident ports and the
//! messages delivered to it; it cannot reach other nodes' states. Messages
//! sent in round `r` are delivered at the start of round `r + 1`. Only nodes
//! with mail or a pending timer are stepped, so idle rounds cost nothing to
//! simulate but still count.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::graph::{Graph, SlotId, VertexId};

/// A message: its size in `O(log n)`-bit words and a tag for traces.
pub trait Payload: Clone {
    fn words(&self) -> usize;
    fn tag(&self) -> &'static str;
}

/// A delivered message with the sender and the receiving port.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Envelope<M> {
    pub from: VertexId,
    pub port: usize,
    pub msg: M,
}

/// What a node may touch during a step.
pub struct Ctx<'a, M> {
    id: VertexId,
    round: u64,
    neighbors: &'a [VertexId],
    out: &'a mut Vec<(usize, M)>,
    wake: &'a mut Option<u64>,
}

impl<M> Ctx<'_, M> {
    pub fn id(&self) -> VertexId {
        self.id
    }

    pub fn round(&self) -> u64 {
        self.round
    }

    /// Neighbor IDs, indexed by port.
    pub fn neighbors(&self) -> &[VertexId] {
        self.neighbors
    }

    pub fn degree(&self) -> usize {
        self.neighbors.len()
    }

    pub fn port_of(&self, neighbor: VertexId) -> Option<usize> {
        self.neighbors.binary_search(&neighbor).ok()
    }

    /// Queues a message on `port` for this round.
    pub fn send(&mut self, port: usize, msg: M) {
        self.out.push((port, msg));
    }

    /// Requests a step at `round` (the earliest request wins).
    pub fn wake_at(&mut self, round: u64) {
        debug_assert!(round > self.round);
        *self.wake = Some(self.wake.map_or(round, |w| w.min(round)));
    }
}

pub trait NodeProgram: Sync {
    type State;
    type Msg: Payload;

    /// Round 1, every node.
    fn start(&self, state: &mut Self::State, ctx: &mut Ctx<'_, Self::Msg>);

    /// Later rounds, for nodes with mail or a due timer.
    fn step(&self, state: &mut Self::State, inbox: &[Envelope<Self::Msg>], ctx: &mut Ctx<'_, Self::Msg>);
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EngineConfig {
    pub message_words: usize,
    pub round_limit: Option<u64>,
    pub record_trace: bool,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            message_words: 2,
            round_limit: None,
            record_trace: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceEntry {
    pub round: u64,
    pub from: VertexId,
    pub to: VertexId,
    pub words: usize,
    pub tag: &'static str,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Trace {
    /// Last round in which a message was sent.
    pub rounds: u64,
    pub messages: u64,
    pub words: u64,
    /// Order-sensitive hash of every send.
    pub fingerprint: u64,
    pub entries: Option<Vec<TraceEntry>>,
}

impl Trace {
    /// Replays recorded entries against the model: every send uses an edge,
    /// fits `message_words`, and no directed edge carries two messages in
    /// one round.
    pub fn audit(&self, graph: &Graph, message_words: usize) -> std::result::Result<(), String> {
        let entries = self.entries.as_ref().ok_or("trace was not recorded")?;
        let mut seen = std::collections::HashSet::new();
        for e in entries {
            if !graph.has_edge(e.from, e.to) {
                return Err(format!("round {}: {} -> {} is not an edge", e.round, e.from, e.to));
            }
            if e.words == 0 || e.words > message_words {
                return Err(format!("round {}: {} words on {} -> {}", e.round, e.words, e.from, e.to));
            }
            if !seen.insert((e.round, e.from, e.to)) {
                return Err(format!("round {}: two messages on {} -> {}", e.round, e.from, e.to));
            }
        }
        Ok(())
    }
}

fn fold(h: u64, x: u64) -> u64 {
    crate::shortcut::sampling::mix(h ^ x.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

fn tag_hash(tag: &str) -> u64 {
    tag.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x100_0000_01b3))
}

pub struct Engine<'g> {
    graph: &'g Graph,
    config: EngineConfig,
}

impl<'g> Engine<'g> {
    pub fn new(graph: &'g Graph, config: EngineConfig) -> Self {
        assert!(config.message_words >= 1);
        Self { graph, config }
    }

    pub fn graph(&self) -> &'g Graph {
        self.graph
    }

    pub fn config(&self) -> EngineConfig {
        self.config
    }

    /// Runs `program` until no message is in flight and no timer is due.
    pub fn run<P: NodeProgram>(&self, program: &P, states: &mut [P::State]) -> Result<Trace> {
        let g = self.graph;
        let n = g.n();
        assert_eq!(states.len(), n, "one state per node");
        let mut trace = Trace {
            entries: self.config.record_trace.then(Vec::new),
            ..Trace::default()
        };
        // messages sent in round r are read in round r + 1
        let mut inbox: Vec<Vec<Envelope<P::Msg>>> = (0..n).map(|_| Vec::new()).collect();
        let mut arriving: Vec<Vec<Envelope<P::Msg>>> = (0..n).map(|_| Vec::new()).collect();
        let mut last_send = vec![0u64; g.slot_count()];
        let mut timers: BinaryHeap<Reverse<(u64, VertexId)>> = BinaryHeap::new();
        let mut out = Vec::new();
        let mut mail = Vec::new();
        let mut active: Vec<VertexId> = (0..n).collect();
        let mut round = 1u64;
        loop {
            if let Some(limit) = self.config.round_limit {
                if round > limit {
                    return Err(Error::RoundLimit(limit));
                }
            }
            let mut next: Vec<VertexId> = Vec::new();
            for &v in &active {
                let mut wake = None;
                let mut ctx = Ctx {
                    id: v,
                    round,
                    neighbors: g.neighbors(v),
                    out: &mut out,
                    wake: &mut wake,
                };
                if round == 1 {
                    program.start(&mut states[v], &mut ctx);
                } else {
                    std::mem::swap(&mut mail, &mut inbox[v]);
                    program.step(&mut states[v], &mail, &mut ctx);
                    mail.clear();
                }
                if let Some(w) = wake {
                    timers.push(Reverse((w, v)));
                }
                let base = g.slots(v).start;
                for (port, msg) in out.drain(..) {
                    self.deliver(v, base + port, round, msg, &mut last_send, &mut trace, &mut arriving, &mut next)?;
                }
            }
            std::mem::swap(&mut inbox, &mut arriving);
            if next.is_empty() {
                match timers.peek() {
                    None => break,
                    Some(&Reverse((w, _))) => round = w,
                }
            } else {
                round += 1;
            }
            while let Some(&Reverse((w, v))) = timers.peek() {
                if w > round {
                    break;
                }
                timers.pop();
                next.push(v);
            }
            next.sort_unstable();
            next.dedup();
            active = next;
        }
        Ok(trace)
    }

    #[allow(clippy::too_many_arguments)]
    fn deliver<M: Payload>(
        &self,
        from: VertexId,
        slot: SlotId,
        round: u64,
        msg: M,
        last_send: &mut [u64],
        trace: &mut Trace,
        inbox: &mut [Vec<Envelope<M>>],
        next: &mut Vec<VertexId>,
    ) -> Result<()> {
        let g = self.graph;
        let to = g.slot_target(slot);
        let words = msg.words();
        if words == 0 || words > self.config.message_words {
            return Err(Error::Capacity {
                round,
                node: from,
                neighbor: to,
                detail: format!("{} message of {words} words exceeds {}", msg.tag(), self.config.message_words),
            });
        }
        if last_send[slot] == round {
            return Err(Error::Capacity {
                round,
                node: from,
                neighbor: to,
                detail: format!("second message ({}) on the edge in one round", msg.tag()),
            });
        }
        last_send[slot] = round;
        trace.rounds = round;
        trace.messages += 1;
        trace.words += words as u64;
        trace.fingerprint = fold(
            fold(fold(trace.fingerprint, round), slot as u64),
            tag_hash(msg.tag()) ^ words as u64,
        );
        if let Some(entries) = trace.entries.as_mut() {
            entries.push(TraceEntry {
                round,
                from,
                to,
                words,
                tag: msg.tag(),
            });
        }
        let port = g.neighbors(to).binary_search(&from).expect("symmetric adjacency");
        if inbox[to].is_empty() {
            next.push(to);
        }
        inbox[to].push(Envelope { from, port, msg });
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate_graph, GeneratorSpec};

    #[derive(Clone, Debug)]
    struct Token;

    impl Payload for Token {
        fn words(&self) -> usize {
            1
        }
        fn tag(&self) -> &'static str {
            "token"
        }
    }

    /// Node 0 floods a token; everybody forwards once, not back to senders.
    struct Flood;

    impl NodeProgram for Flood {
        type State = bool;
        type Msg = Token;

        fn start(&self, seen: &mut bool, ctx: &mut Ctx<'_, Token>) {
            if ctx.id() == 0 {
                *seen = true;
                for p in 0..ctx.degree() {
                    ctx.send(p, Token);
                }
            }
        }

        fn step(&self, seen: &mut bool, inbox: &[Envelope<Token>], ctx: &mut Ctx<'_, Token>) {
            if !*seen {
                *seen = true;
                for p in 0..ctx.degree() {
                    if inbox.iter().all(|e| e.port != p) {
                        ctx.send(p, Token);
                    }
                }
            }
        }
    }

    #[test]
    fn broadcast_on_path_takes_length_rounds() {
        for len in [1usize, 5, 17] {
            let g = generate_graph(&GeneratorSpec::Path(len + 1), 0).unwrap();
            let mut states = vec![false; len + 1];
            let trace = Engine::new(&g, EngineConfig::default()).run(&Flood, &mut states).unwrap();
            assert_eq!(trace.rounds, len as u64);
            assert!(states.iter().all(|&s| s));
        }
    }

    /// Sends `per_round` messages on port 0 in round 1.
    struct Burst {
        per_round: usize,
        words: usize,
    }

    #[derive(Clone, Debug)]
    struct Wide(usize);

    impl Payload for Wide {
        fn words(&self) -> usize {
            self.0
        }
        fn tag(&self) -> &'static str {
            "wide"
        }
    }

    impl NodeProgram for Burst {
        type State = ();
        type Msg = Wide;

        fn start(&self, _: &mut (), ctx: &mut Ctx<'_, Wide>) {
            for _ in 0..self.per_round {
                ctx.send(0, Wide(self.words));
            }
        }

        fn step(&self, _: &mut (), _: &[Envelope<Wide>], _: &mut Ctx<'_, Wide>) {}
    }

    #[test]
    fn capacity_is_enforced() {
        let g = Graph::from_edges(2, &[(0, 1)]).unwrap();
        let config = EngineConfig {
            message_words: 1,
            ..EngineConfig::default()
        };
        let engine = Engine::new(&g, config);
        let ok = engine.run(&Burst { per_round: 1, words: 1 }, &mut [(), ()]).unwrap();
        assert_eq!((ok.rounds, ok.messages), (1, 2));
        let twice = engine.run(&Burst { per_round: 2, words: 1 }, &mut [(), ()]);
        assert!(matches!(twice, Err(Error::Capacity { round: 1, node: 0, neighbor: 1, .. })));
        let wide = engine.run(&Burst { per_round: 1, words: 2 }, &mut [(), ()]);
        assert!(matches!(wide, Err(Error::Capacity { .. })));
    }

    /// Wakes up at a fixed round and pings node 0.
    struct Sleeper(u64);

    impl NodeProgram for Sleeper {
        type State = ();
        type Msg = Token;

        fn start(&self, _: &mut (), ctx: &mut Ctx<'_, Token>) {
            if ctx.id() == 1 {
                ctx.wake_at(self.0);
            }
        }

        fn step(&self, _: &mut (), inbox: &[Envelope<Token>], ctx: &mut Ctx<'_, Token>) {
            if ctx.id() == 1 && inbox.is_empty() {
                ctx.send(0, Token);
            }
        }
    }

    #[test]
    fn idle_rounds_are_counted() {
        let g = Graph::from_edges(2, &[(0, 1)]).unwrap();
        let trace = Engine::new(&g, EngineConfig::default()).run(&Sleeper(1000), &mut [(), ()]).unwrap();
        assert_eq!(trace.rounds, 1000);
        let limited = EngineConfig {
            round_limit: Some(10),
            ..EngineConfig::default()
        };
        assert_eq!(
            Engine::new(&g, limited).run(&Sleeper(1000), &mut [(), ()]),
            Err(Error::RoundLimit(10))
        );
    }

    #[test]
    fn traces_are_deterministic_and_audit_cleanly() {
        let g = generate_graph(&GeneratorSpec::layered_with_degree(300, 5, 5.0), 4).unwrap();
        let config = EngineConfig {
            record_trace: true,
            ..EngineConfig::default()
        };
        let run = || {
            let mut states = vec![false; g.n()];
            Engine::new(&g, config).run(&Flood, &mut states).unwrap()
        };
        let (a, b) = (run(), run());
        assert_eq!(a, b);
        a.audit(&g, 1).unwrap();
        // tree edges carry one message, other edges at most two
        assert!(a.messages >= g.n() as u64 - 1 && a.messages <= 2 * g.m() as u64);
        assert_eq!(a.messages, a.entries.as_ref().unwrap().len() as u64);
    }
}
