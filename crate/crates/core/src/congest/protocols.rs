//! Node programs used by the distributed construction.

use std::collections::VecDeque;

use super::engine::{Ctx, Envelope, NodeProgram, Payload};
use crate::graph::VertexId;

/// Largest `message_words` supported by the batched messages.
pub const MAX_WORDS: usize = 8;

/// Up to `MAX_WORDS` items plus an end-of-stream bit (packed into a word).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Batch {
    len: u8,
    pub last: bool,
    items: [u64; MAX_WORDS],
}

impl Batch {
    fn new(items: &[u64], last: bool) -> Self {
        let mut b = Batch {
            len: items.len() as u8,
            last,
            items: [0; MAX_WORDS],
        };
        b.items[..items.len()].copy_from_slice(items);
        b
    }

    pub fn items(&self) -> &[u64] {
        &self.items[..self.len as usize]
    }
}

/// Rooted spanning tree known locally: parent and child ports.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TreePorts {
    pub parent: Option<usize>,
    pub children: Vec<usize>,
}

// ---------------------------------------------------------------- election

#[derive(Clone, Copy, Debug)]
pub enum ElectionMsg {
    Flood(VertexId),
    /// Child acknowledgement with the child's subtree height.
    Ack(VertexId, u32),
}

impl Payload for ElectionMsg {
    fn words(&self) -> usize {
        match self {
            ElectionMsg::Flood(_) => 1,
            ElectionMsg::Ack(..) => 2,
        }
    }
    fn tag(&self) -> &'static str {
        match self {
            ElectionMsg::Flood(_) => "elect",
            ElectionMsg::Ack(..) => "elect-ack",
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct ElectionState {
    best: VertexId,
    pending: usize,
    height: u32,
    acked: bool,
    pub tree: TreePorts,
    /// Set at the elected root: its eccentricity.
    pub root_height: Option<u32>,
}

/// Maximum-ID flooding with echo. The flood of the maximum ID is never
/// overtaken, so parents form a BFS tree from the maximum-ID node; the echo
/// completes only for that node, which learns its eccentricity.
pub struct Election;

impl Election {
    fn finish(&self, s: &mut ElectionState, ctx: &mut Ctx<'_, ElectionMsg>) {
        if s.pending == 0 && !s.acked {
            s.acked = true;
            match s.tree.parent {
                Some(p) => ctx.send(p, ElectionMsg::Ack(s.best, s.height)),
                None => s.root_height = Some(s.height),
            }
        }
    }
}

impl NodeProgram for Election {
    type State = ElectionState;
    type Msg = ElectionMsg;

    fn start(&self, s: &mut ElectionState, ctx: &mut Ctx<'_, ElectionMsg>) {
        *s = ElectionState {
            best: ctx.id(),
            pending: ctx.degree(),
            ..ElectionState::default()
        };
        for p in 0..ctx.degree() {
            ctx.send(p, ElectionMsg::Flood(ctx.id()));
        }
        self.finish(s, ctx);
    }

    fn step(&self, s: &mut ElectionState, inbox: &[Envelope<ElectionMsg>], ctx: &mut Ctx<'_, ElectionMsg>) {
        let top = inbox
            .iter()
            .filter_map(|e| match e.msg {
                ElectionMsg::Flood(x) => Some((x, std::cmp::Reverse(e.from), e.port)),
                _ => None,
            })
            .max();
        if let Some((m, _, port)) = top.filter(|t| t.0 > s.best) {
            s.best = m;
            s.tree = TreePorts {
                parent: Some(port),
                children: Vec::new(),
            };
            s.pending = ctx.degree() - 1;
            s.height = 0;
            s.acked = false;
            for p in (0..ctx.degree()).filter(|&p| p != port) {
                ctx.send(p, ElectionMsg::Flood(m));
            }
        }
        for e in inbox {
            match e.msg {
                ElectionMsg::Flood(x) if x == s.best && Some(e.port) != s.tree.parent => s.pending -= 1,
                ElectionMsg::Ack(x, h) if x == s.best => {
                    s.pending -= 1;
                    s.height = s.height.max(h + 1);
                    s.tree.children.push(e.port);
                }
                _ => {}
            }
        }
        self.finish(s, ctx);
    }
}

// ------------------------------------------------------- tree broadcast

#[derive(Clone, Debug, Default)]
pub struct BroadcastState {
    pub tree: TreePorts,
    /// Root: the words to send. Others: the words received.
    pub data: Vec<u64>,
    sent: usize,
    expected: Option<usize>,
}

impl BroadcastState {
    pub fn new(tree: TreePorts, data: Vec<u64>) -> Self {
        Self {
            tree,
            data,
            ..Self::default()
        }
    }

    pub fn complete(&self) -> bool {
        self.expected == Some(self.data.len())
    }
}

impl Payload for Batch {
    fn words(&self) -> usize {
        (self.len as usize).max(1)
    }
    fn tag(&self) -> &'static str {
        "batch"
    }
}

/// Pipelined broadcast of a word stream from the root down a tree, preceded
/// by its length.
pub struct Broadcast {
    pub words: usize,
}

impl Broadcast {
    fn push_root(&self, s: &mut BroadcastState, ctx: &mut Ctx<'_, Batch>) {
        // stream = [len, data...]; `sent` counts stream positions
        let total = s.data.len() + 1;
        let end = (s.sent + self.words).min(total);
        let chunk: Vec<u64> = (s.sent..end)
            .map(|i| if i == 0 { s.data.len() as u64 } else { s.data[i - 1] })
            .collect();
        s.sent = end;
        let batch = Batch::new(&chunk, end == total);
        for &c in &s.tree.children {
            ctx.send(c, batch);
        }
        if end < total {
            ctx.wake_at(ctx.round() + 1);
        } else {
            s.expected = Some(s.data.len());
        }
    }
}

impl NodeProgram for Broadcast {
    type State = BroadcastState;
    type Msg = Batch;

    fn start(&self, s: &mut BroadcastState, ctx: &mut Ctx<'_, Batch>) {
        if s.tree.parent.is_none() {
            self.push_root(s, ctx);
        } else {
            s.data.clear();
        }
    }

    fn step(&self, s: &mut BroadcastState, inbox: &[Envelope<Batch>], ctx: &mut Ctx<'_, Batch>) {
        if s.tree.parent.is_none() {
            self.push_root(s, ctx);
            return;
        }
        for e in inbox {
            let mut items = e.msg.items();
            if s.expected.is_none() {
                s.expected = Some(items[0] as usize);
                items = &items[1..];
            }
            s.data.extend_from_slice(items);
            for &c in &s.tree.children {
                ctx.send(c, e.msg);
            }
        }
    }
}

// ------------------------------------------------------------ convergecast

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Aggregate {
    Max,
    Or,
}

impl Aggregate {
    fn apply(self, a: u64, b: u64) -> u64 {
        match self {
            Aggregate::Max => a.max(b),
            Aggregate::Or => a | b,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Value(pub u64);

impl Payload for Value {
    fn words(&self) -> usize {
        1
    }
    fn tag(&self) -> &'static str {
        "value"
    }
}

#[derive(Clone, Debug, Default)]
pub struct ConvergecastState {
    pub tree: TreePorts,
    pub value: u64,
    heard: usize,
}

impl ConvergecastState {
    pub fn new(tree: TreePorts, value: u64) -> Self {
        Self { tree, value, heard: 0 }
    }
}

/// Aggregates one word per node up a tree; the root ends with the result.
pub struct Convergecast(pub Aggregate);

impl Convergecast {
    fn maybe_send(s: &ConvergecastState, ctx: &mut Ctx<'_, Value>) {
        if s.heard == s.tree.children.len() {
            if let Some(p) = s.tree.parent {
                ctx.send(p, Value(s.value));
            }
        }
    }
}

impl NodeProgram for Convergecast {
    type State = ConvergecastState;
    type Msg = Value;

    fn start(&self, s: &mut ConvergecastState, ctx: &mut Ctx<'_, Value>) {
        Self::maybe_send(s, ctx);
    }

    fn step(&self, s: &mut ConvergecastState, inbox: &[Envelope<Value>], ctx: &mut Ctx<'_, Value>) {
        for e in inbox {
            s.value = self.0.apply(s.value, e.msg.0);
            s.heard += 1;
        }
        Self::maybe_send(s, ctx);
    }
}

// -------------------------------------------------------- neighbor exchange

#[derive(Clone, Copy, Debug)]
pub struct Word(pub u64);

impl Payload for Word {
    fn words(&self) -> usize {
        1
    }
    fn tag(&self) -> &'static str {
        "word"
    }
}

#[derive(Clone, Debug, Default)]
pub struct ExchangeState {
    pub mine: u64,
    /// Neighbor words by port.
    pub theirs: Vec<u64>,
}

/// Every node sends one word to every neighbor.
pub struct Exchange;

impl NodeProgram for Exchange {
    type State = ExchangeState;
    type Msg = Word;

    fn start(&self, s: &mut ExchangeState, ctx: &mut Ctx<'_, Word>) {
        s.theirs = vec![0; ctx.degree()];
        for p in 0..ctx.degree() {
            ctx.send(p, Word(s.mine));
        }
    }

    fn step(&self, s: &mut ExchangeState, inbox: &[Envelope<Word>], _: &mut Ctx<'_, Word>) {
        for e in inbox {
            s.theirs[e.port] = e.msg.0;
        }
    }
}

// ------------------------------------------------------ truncated part BFS

#[derive(Clone, Copy, Debug)]
pub enum PartBfsMsg {
    Token,
    Probe,
    Overflow,
    Ack { count: u32, truncated: bool },
}

impl Payload for PartBfsMsg {
    fn words(&self) -> usize {
        match self {
            PartBfsMsg::Ack { .. } => 2,
            _ => 1,
        }
    }
    fn tag(&self) -> &'static str {
        match self {
            PartBfsMsg::Token => "part-token",
            PartBfsMsg::Probe => "part-probe",
            PartBfsMsg::Overflow => "part-overflow",
            PartBfsMsg::Ack { .. } => "part-ack",
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct PartBfsState {
    pub is_leader: bool,
    /// Ports leading to the same part.
    pub same_part: Vec<usize>,
    visited: bool,
    depth: u32,
    parent: Option<usize>,
    pending: usize,
    count: u32,
    truncated: bool,
    acked: bool,
    /// Leader only: (size counted, truncation seen).
    pub outcome: Option<(u32, bool)>,
}

impl PartBfsState {
    pub fn new(is_leader: bool, same_part: Vec<usize>) -> Self {
        Self {
            is_leader,
            same_part,
            ..Self::default()
        }
    }
}

/// BFS inside each part from its leader, truncated at `depth_limit`, with
/// an echo carrying the spanned size and whether anything lay beyond.
pub struct PartBfs {
    pub depth_limit: u32,
}

impl PartBfs {
    fn expand(&self, s: &mut PartBfsState, ctx: &mut Ctx<'_, PartBfsMsg>) {
        let msg = if s.depth < self.depth_limit {
            PartBfsMsg::Token
        } else {
            PartBfsMsg::Probe
        };
        let mut targets = 0;
        for &p in s.same_part.iter().filter(|&&p| Some(p) != s.parent) {
            ctx.send(p, msg);
            targets += 1;
        }
        s.pending = targets;
        s.count = 1;
    }

    fn finish(&self, s: &mut PartBfsState, ctx: &mut Ctx<'_, PartBfsMsg>) {
        if s.visited && s.pending == 0 && !s.acked {
            s.acked = true;
            match s.parent {
                Some(p) => ctx.send(
                    p,
                    PartBfsMsg::Ack {
                        count: s.count,
                        truncated: s.truncated,
                    },
                ),
                None => s.outcome = Some((s.count, s.truncated)),
            }
        }
    }
}

impl NodeProgram for PartBfs {
    type State = PartBfsState;
    type Msg = PartBfsMsg;

    fn start(&self, s: &mut PartBfsState, ctx: &mut Ctx<'_, PartBfsMsg>) {
        if s.is_leader {
            s.visited = true;
            self.expand(s, ctx);
            self.finish(s, ctx);
        }
    }

    fn step(&self, s: &mut PartBfsState, inbox: &[Envelope<PartBfsMsg>], ctx: &mut Ctx<'_, PartBfsMsg>) {
        let mut joined_via = None;
        if !s.visited {
            if let Some(e) = inbox.iter().find(|e| matches!(e.msg, PartBfsMsg::Token)) {
                s.visited = true;
                s.parent = Some(e.port);
                // the leader sends in round 1, so depth = round - 1; later
                // tokens only reach visited nodes and act as answers
                s.depth = (ctx.round() - 1) as u32;
                joined_via = Some(e.port);
                self.expand(s, ctx);
            }
        }
        for e in inbox {
            if Some(e.port) == joined_via {
                continue;
            }
            match e.msg {
                PartBfsMsg::Token if s.visited => s.pending -= 1,
                PartBfsMsg::Probe if s.visited => s.pending -= 1,
                PartBfsMsg::Probe => ctx.send(e.port, PartBfsMsg::Overflow),
                PartBfsMsg::Overflow => {
                    s.pending -= 1;
                    s.truncated = true;
                }
                PartBfsMsg::Ack { count, truncated } => {
                    s.pending -= 1;
                    s.count += count;
                    s.truncated |= truncated;
                }
                PartBfsMsg::Token => unreachable!("an unvisited node joins on its first token"),
            }
        }
        self.finish(s, ctx);
    }
}

// ------------------------------------------------------ merge convergecast

#[derive(Clone, Debug, Default)]
pub struct MergeState {
    pub tree: TreePorts,
    /// Own contribution, ascending.
    pub own: VecDeque<u64>,
    queues: Vec<VecDeque<u64>>,
    ended: Vec<bool>,
    done: bool,
    /// Root: the merged stream.
    pub merged: Vec<u64>,
}

impl MergeState {
    pub fn new(tree: TreePorts, own: Vec<u64>) -> Self {
        Self {
            tree,
            own: own.into(),
            ..Self::default()
        }
    }
}

/// Pipelined merge of ascending streams up a tree.
pub struct Merge {
    pub words: usize,
}

impl Merge {
    /// Pops the next value if every source can vouch for its head.
    fn pop_min(s: &mut MergeState) -> Option<u64> {
        let mut best: Option<(u64, Option<usize>)> = s.own.front().map(|&v| (v, None));
        for (i, q) in s.queues.iter().enumerate() {
            match q.front() {
                Some(&v) if best.is_none_or(|(b, _)| v < b) => best = Some((v, Some(i))),
                Some(_) => {}
                None if !s.ended[i] => return None,
                None => {}
            }
        }
        let (v, src) = best?;
        match src {
            None => s.own.pop_front(),
            Some(i) => s.queues[i].pop_front(),
        };
        Some(v)
    }

    fn exhausted(s: &MergeState) -> bool {
        s.own.is_empty() && s.queues.iter().zip(&s.ended).all(|(q, &e)| e && q.is_empty())
    }

    fn advance(&self, s: &mut MergeState, ctx: &mut Ctx<'_, Batch>) {
        if s.done {
            return;
        }
        match s.tree.parent {
            None => {
                while let Some(v) = Self::pop_min(s) {
                    s.merged.push(v);
                }
                s.done = Self::exhausted(s);
            }
            Some(p) => {
                let mut chunk = Vec::with_capacity(self.words);
                while chunk.len() < self.words {
                    match Self::pop_min(s) {
                        Some(v) => chunk.push(v),
                        None => break,
                    }
                }
                let last = Self::exhausted(s);
                if !chunk.is_empty() || last {
                    ctx.send(p, Batch::new(&chunk, last));
                }
                s.done = last;
                if !last && Self::pop_ready(s) {
                    ctx.wake_at(ctx.round() + 1);
                }
            }
        }
    }

    /// Whether a value could be emitted right now.
    fn pop_ready(s: &MergeState) -> bool {
        let blocked = s.queues.iter().zip(&s.ended).any(|(q, &e)| q.is_empty() && !e);
        !blocked && !Self::exhausted(s)
    }
}

impl NodeProgram for Merge {
    type State = MergeState;
    type Msg = Batch;

    fn start(&self, s: &mut MergeState, ctx: &mut Ctx<'_, Batch>) {
        let k = s.tree.children.len();
        s.queues = vec![VecDeque::new(); k];
        s.ended = vec![false; k];
        self.advance(s, ctx);
    }

    fn step(&self, s: &mut MergeState, inbox: &[Envelope<Batch>], ctx: &mut Ctx<'_, Batch>) {
        for e in inbox {
            let i = s.tree.children.iter().position(|&c| c == e.port).expect("only children send");
            s.queues[i].extend(e.msg.items());
            s.ended[i] |= e.msg.last;
        }
        self.advance(s, ctx);
    }
}

// ------------------------------------------------------ list exchange

#[derive(Clone, Debug, Default)]
pub struct ListExchangeState {
    /// Outgoing list per port.
    pub outgoing: Vec<Vec<u32>>,
    cursor: Vec<usize>,
    /// Incoming list per port.
    pub incoming: Vec<Vec<u32>>,
}

impl ListExchangeState {
    pub fn new(outgoing: Vec<Vec<u32>>) -> Self {
        Self {
            outgoing,
            ..Self::default()
        }
    }
}

/// Each node streams one list per incident edge to the neighbor, `words`
/// items per round.
pub struct ListExchange {
    pub words: usize,
}

impl ListExchange {
    fn push(&self, s: &mut ListExchangeState, ctx: &mut Ctx<'_, Batch>) {
        let mut more = false;
        let mut buf = [0u64; MAX_WORDS];
        for (p, list) in s.outgoing.iter().enumerate() {
            let at = s.cursor[p];
            if at > list.len() {
                continue;
            }
            let end = (at + self.words).min(list.len());
            for (slot, &v) in buf.iter_mut().zip(&list[at..end]) {
                *slot = v as u64;
            }
            let last = end == list.len();
            ctx.send(p, Batch::new(&buf[..end - at], last));
            // past-the-end marks a finished port
            s.cursor[p] = if last { list.len() + 1 } else { end };
            more |= !last;
        }
        if more {
            ctx.wake_at(ctx.round() + 1);
        }
    }
}

impl NodeProgram for ListExchange {
    type State = ListExchangeState;
    type Msg = Batch;

    fn start(&self, s: &mut ListExchangeState, ctx: &mut Ctx<'_, Batch>) {
        s.cursor = vec![0; ctx.degree()];
        s.incoming = vec![Vec::new(); ctx.degree()];
        self.push(s, ctx);
    }

    fn step(&self, s: &mut ListExchangeState, inbox: &[Envelope<Batch>], ctx: &mut Ctx<'_, Batch>) {
        for e in inbox {
            s.incoming[e.port].extend(e.msg.items().iter().map(|&v| v as u32));
        }
        if s.cursor.iter().zip(&s.outgoing).any(|(&c, l)| c <= l.len()) {
            self.push(s, ctx);
        }
    }
}

// --------------------------------------------------------- scheduled BFS

#[derive(Clone, Debug, Default)]
pub struct ScheduleState {
    /// Large indices this node's incident edges belong to, ascending.
    pub lis: Vec<u32>,
    /// Member ports per entry of `lis`.
    pub li_ports: Vec<Vec<u32>>,
    /// Large index of the part this node leads, if any.
    pub leads: Option<u32>,
    /// Depth in each part's tree (`u32::MAX` = not reached), aligned with `lis`.
    pub depth: Vec<u32>,
    /// Parent vertex in each part's tree, aligned with `lis`.
    pub parent: Vec<Option<VertexId>>,
    /// (entry, sender port, sender) heard in the current phase, not yet joined.
    pending: Vec<(u32, u32, VertexId)>,
    queues: Vec<VecDeque<u32>>,
    /// A phase ended with tokens still queued.
    pub overflow: bool,
}

impl ScheduleState {
    pub fn new(lis: Vec<u32>, li_ports: Vec<Vec<u32>>, leads: Option<u32>) -> Self {
        let k = lis.len();
        Self {
            lis,
            li_ports,
            leads,
            depth: vec![u32::MAX; k],
            parent: vec![None; k],
            ..Self::default()
        }
    }

    fn entry(&self, li: u32) -> Option<usize> {
        self.lis.binary_search(&li).ok()
    }

    pub fn depth_in(&self, li: u32) -> Option<u32> {
        self.entry(li).map(|i| self.depth[i]).filter(|&d| d != u32::MAX)
    }
}

/// Random-delay BFS of every large part over its augmented subgraph. Time is
/// cut into phases of `phase_length` rounds; part `li` starts at phase
/// `delays[li]` and grows one hop per phase. Within a phase, tokens queued
/// on a directed edge leave FIFO in ascending part order, `words` per round.
pub struct ScheduledBfs {
    pub words: usize,
    pub phase_length: u64,
    pub depth_cap: u32,
    /// 1-based start phase of each large index (entry 0 unused).
    pub delays: Vec<u32>,
}

impl ScheduledBfs {
    fn phase(&self, round: u64) -> u64 {
        (round - 1) / self.phase_length + 1
    }

    fn phase_start(&self, phase: u64) -> u64 {
        (phase - 1) * self.phase_length + 1
    }

    fn act(&self, s: &mut ScheduleState, ctx: &mut Ctx<'_, Batch>) {
        let round = ctx.round();
        let phase = self.phase(round);
        if round == self.phase_start(phase) {
            if s.queues.iter().any(|q| !q.is_empty()) {
                s.overflow = true;
            }
            // tokens heard in the previous phase settle now: smallest sender
            // is the parent, all senders are skipped when forwarding
            let mut fresh: Vec<(u32, Vec<u32>)> = Vec::new();
            s.pending.sort_unstable_by_key(|&(i, _, from)| (i, from));
            for (i, port, from) in std::mem::take(&mut s.pending) {
                let i = i as usize;
                if s.depth[i] == u32::MAX {
                    let li = s.lis[i];
                    s.depth[i] = (phase - self.delays[li as usize] as u64) as u32;
                    s.parent[i] = Some(from);
                    fresh.push((i as u32, vec![port]));
                } else if let Some(f) = fresh.last_mut().filter(|f| f.0 == i as u32) {
                    f.1.push(port);
                }
            }
            if let Some(li) = s.leads.filter(|&li| self.delays[li as usize] as u64 == phase) {
                let i = s.entry(li).expect("a leader's edges belong to its part");
                s.depth[i] = 0;
                fresh.push((i as u32, Vec::new()));
                fresh.sort_unstable_by_key(|f| f.0);
            }
            for (i, skip) in fresh {
                let i = i as usize;
                if s.depth[i] >= self.depth_cap {
                    continue;
                }
                for &p in &s.li_ports[i] {
                    if !skip.contains(&p) {
                        s.queues[p as usize].push_back(s.lis[i]);
                    }
                }
            }
        }
        let mut busy = false;
        let mut buf = [0u64; MAX_WORDS];
        for (p, q) in s.queues.iter_mut().enumerate() {
            if q.is_empty() {
                continue;
            }
            let take = q.len().min(self.words);
            for slot in buf.iter_mut().take(take) {
                *slot = q.pop_front().unwrap() as u64;
            }
            ctx.send(p, Batch::new(&buf[..take], false));
            busy |= !q.is_empty();
        }
        if busy {
            ctx.wake_at(round + 1);
        }
        if !s.pending.is_empty() {
            ctx.wake_at(self.phase_start(phase + 1));
        }
        if let Some(li) = s.leads {
            let start = self.delays[li as usize] as u64;
            if start > phase {
                ctx.wake_at(self.phase_start(start));
            }
        }
    }
}

impl NodeProgram for ScheduledBfs {
    type State = ScheduleState;
    type Msg = Batch;

    fn start(&self, s: &mut ScheduleState, ctx: &mut Ctx<'_, Batch>) {
        s.queues = vec![VecDeque::new(); ctx.degree()];
        self.act(s, ctx);
    }

    fn step(&self, s: &mut ScheduleState, inbox: &[Envelope<Batch>], ctx: &mut Ctx<'_, Batch>) {
        for e in inbox {
            for &li in e.msg.items() {
                let i = s.entry(li as u32).expect("tokens only cross member edges");
                if s.depth[i] == u32::MAX {
                    s.pending.push((i as u32, e.port as u32, e.from));
                }
            }
        }
        self.act(s, ctx);
    }
}
