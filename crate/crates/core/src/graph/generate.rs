//! Test-bed graph families. `LayeredRandom` and `HubAugmented` manufacture
//! graphs of diameter exactly `D`; the target is verified after generation
//! and resampled up to [`RETRY_CAP`] times.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use super::{diameter, Graph, VertexId};
use crate::error::{Error, Result};

pub const RETRY_CAP: usize = 100;

#[derive(Clone, Debug, PartialEq)]
pub enum GeneratorSpec {
    Complete(usize),
    Path(usize),
    /// Star on `n` vertices, center 0.
    Star(usize),
    /// A core (one hub for even `D`, two adjacent hubs for odd `D`) with
    /// rings of vertices at hop distance `1..=D/2` from it. Ring 1 holds
    /// `width` vertices, deeper rings share the rest. Every ring vertex gets
    /// one random parent in the previous ring, then every pair of vertices
    /// in the same or adjacent rings is joined with probability `edge_prob`.
    /// A spine of `D + 1` vertices through the core, whose inner vertices
    /// get no random edges, pins the diameter at exactly `D`.
    LayeredRandom {
        n: usize,
        d: u32,
        width: usize,
        edge_prob: f64,
    },
    /// Sparse Erdos-Renyi base graph of average degree `base_degree`, plus
    /// repair edges ("hub paths") pulling every vertex within `D/2` hops of
    /// the core, plus the same diameter-pinning spine.
    HubAugmented { n: usize, d: u32, base_degree: f64 },
}

impl GeneratorSpec {
    /// Layered family with equal rings and `edge_prob` tuned so the random
    /// part contributes roughly `avg_degree` to every vertex.
    pub fn layered_with_degree(n: usize, d: u32, avg_degree: f64) -> Self {
        let h = (d / 2).max(1) as usize;
        let rest = n.saturating_sub(d as usize + 1);
        let width = (rest / h).max(1);
        // a ring vertex sees its own ring and up to two neighbor rings
        let edge_prob = (avg_degree / (3.0 * width as f64)).min(1.0);
        GeneratorSpec::LayeredRandom {
            n,
            d,
            width,
            edge_prob,
        }
    }

    pub fn target_diameter(&self) -> Option<u32> {
        match *self {
            GeneratorSpec::Complete(n) => Some(u32::from(n > 1)),
            GeneratorSpec::Path(n) => Some(n.saturating_sub(1) as u32),
            GeneratorSpec::Star(n) => Some((n.min(3) as u32).saturating_sub(1)),
            GeneratorSpec::LayeredRandom { d, .. } | GeneratorSpec::HubAugmented { d, .. } => {
                Some(d)
            }
        }
    }

    pub fn n(&self) -> usize {
        match *self {
            GeneratorSpec::Complete(n) | GeneratorSpec::Path(n) | GeneratorSpec::Star(n) => n,
            GeneratorSpec::LayeredRandom { n, .. } | GeneratorSpec::HubAugmented { n, .. } => n,
        }
    }
}

pub fn generate_graph(spec: &GeneratorSpec, seed: u64) -> Result<Graph> {
    match *spec {
        GeneratorSpec::Complete(n) => {
            let mut edges = Vec::with_capacity(n * n.saturating_sub(1) / 2);
            for u in 0..n {
                for v in u + 1..n {
                    edges.push((u, v));
                }
            }
            Ok(Graph::from_sorted_unique(n, edges))
        }
        GeneratorSpec::Path(n) => Ok(Graph::from_sorted_unique(
            n,
            (1..n).map(|v| (v - 1, v)).collect(),
        )),
        GeneratorSpec::Star(n) => Ok(Graph::from_sorted_unique(
            n,
            (1..n).map(|v| (0, v)).collect(),
        )),
        GeneratorSpec::LayeredRandom {
            n,
            d,
            width,
            edge_prob,
        } => {
            check_target(n, d)?;
            if !(0.0..=1.0).contains(&edge_prob) || width == 0 {
                return Err(Error::InvalidParameter(
                    "layered generator needs width >= 1 and edge_prob in [0, 1]".into(),
                ));
            }
            with_retries(d, seed, |rng| layered(n, d, width, edge_prob, rng))
        }
        GeneratorSpec::HubAugmented { n, d, base_degree } => {
            check_target(n, d)?;
            if base_degree < 0.0 {
                return Err(Error::InvalidParameter("base_degree must be >= 0".into()));
            }
            with_retries(d, seed, |rng| hub_augmented(n, d, base_degree, rng))
        }
    }
}

fn check_target(n: usize, d: u32) -> Result<()> {
    if d < 2 {
        return Err(Error::DiameterUnattainable(format!(
            "D = {d}: use Complete or Star for D < 2"
        )));
    }
    if n < d as usize + 2 {
        return Err(Error::DiameterUnattainable(format!(
            "n = {n} is too small for D = {d}"
        )));
    }
    Ok(())
}

fn with_retries(
    d: u32,
    seed: u64,
    mut build: impl FnMut(&mut ChaCha8Rng) -> Graph,
) -> Result<Graph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..RETRY_CAP {
        let g = build(&mut rng);
        if let Ok(diam) = diameter(&g) {
            if diam == d {
                return Ok(g);
            }
        }
    }
    Err(Error::DiameterUnattainable(format!(
        "no sample with diameter {d} after {RETRY_CAP} attempts"
    )))
}

/// Core vertices and the spine. Vertex ids: core first, then the two spine
/// arms, then everything else. Returns (edges, core, first free id).
fn core_and_spine(d: u32) -> (Vec<(VertexId, VertexId)>, Vec<VertexId>, usize) {
    let h = (d / 2) as usize;
    let core: Vec<VertexId> = if d.is_multiple_of(2) { vec![0] } else { vec![0, 1] };
    let mut edges = Vec::new();
    if core.len() == 2 {
        edges.push((0, 1));
    }
    let mut next = core.len();
    for arm in 0..2 {
        let mut prev = core[arm.min(core.len() - 1)];
        for _ in 0..h {
            edges.push((prev, next));
            prev = next;
            next += 1;
        }
    }
    (edges, core, next)
}

fn finish(n: usize, edges: Vec<(VertexId, VertexId)>) -> Graph {
    let mut norm: Vec<_> = edges
        .into_iter()
        .map(|(u, v)| (u.min(v), u.max(v)))
        .collect();
    norm.sort_unstable();
    norm.dedup();
    Graph::from_sorted_unique(n, norm)
}

/// Adds each unordered pair from `a x b` (or pairs within `a` when
/// `same` is set) independently with probability `p`.
fn random_pairs(
    a: &[VertexId],
    b: &[VertexId],
    same: bool,
    p: f64,
    rng: &mut ChaCha8Rng,
    out: &mut Vec<(VertexId, VertexId)>,
) {
    if p <= 0.0 || a.is_empty() || b.is_empty() {
        return;
    }
    let total = if same {
        (a.len() * (a.len() - 1) / 2) as u64
    } else {
        (a.len() * b.len()) as u64
    };
    if total == 0 {
        return;
    }
    if p >= 1.0 || total < 64 {
        for (i, &x) in a.iter().enumerate() {
            let others = if same { &a[i + 1..] } else { b };
            for &y in others {
                if rng.random::<f64>() < p {
                    out.push((x, y));
                }
            }
        }
        return;
    }
    let count = Binomial::new(total, p).unwrap().sample(rng);
    let mut seen = HashSet::with_capacity(count as usize);
    while (seen.len() as u64) < count {
        let x = a[rng.random_range(0..a.len())];
        let y = b[rng.random_range(0..b.len())];
        if x == y {
            continue;
        }
        let key = (x.min(y), x.max(y));
        if seen.insert(key) {
            out.push(key);
        }
    }
}

fn layered(n: usize, d: u32, width: usize, edge_prob: f64, rng: &mut ChaCha8Rng) -> Graph {
    let h = (d / 2) as usize;
    let (mut edges, core, first) = core_and_spine(d);
    let rest = n - first;
    let mut sizes = vec![0usize; h];
    if h == 1 {
        sizes[0] = rest;
    } else {
        sizes[0] = width.min(rest);
        let deeper = rest - sizes[0];
        for (j, s) in sizes.iter_mut().enumerate().skip(1) {
            *s = deeper / (h - 1) + usize::from(j - 1 < deeper % (h - 1));
        }
    }
    let mut rings: Vec<Vec<VertexId>> = vec![core.clone()];
    let mut next = first;
    for &s in &sizes {
        rings.push((next..next + s).collect());
        next += s;
    }
    for j in 1..rings.len() {
        let (prev, cur) = (&rings[j - 1], &rings[j]);
        if prev.is_empty() {
            // degenerate split: hang the ring on the core
            for &v in cur {
                edges.push((core[rng.random_range(0..core.len())], v));
            }
            continue;
        }
        for &v in cur {
            edges.push((prev[rng.random_range(0..prev.len())], v));
        }
    }
    for j in 1..rings.len() {
        random_pairs(&rings[j], &rings[j], true, edge_prob, rng, &mut edges);
        random_pairs(&rings[j - 1], &rings[j], false, edge_prob, rng, &mut edges);
    }
    finish(n, edges)
}

fn hub_augmented(n: usize, d: u32, base_degree: f64, rng: &mut ChaCha8Rng) -> Graph {
    let h = (d / 2) as usize;
    let (mut edges, core, first) = core_and_spine(d);
    let free: Vec<VertexId> = (first..n).collect();
    let p = if free.len() > 1 {
        (base_degree / (free.len() - 1) as f64).min(1.0)
    } else {
        0.0
    };
    random_pairs(&free, &free, true, p, rng, &mut edges);

    // hub paths: repair vertices farther than h from the core
    let mut adj: Vec<Vec<VertexId>> = vec![Vec::new(); n];
    for &(u, v) in &edges {
        adj[u].push(v);
        adj[v].push(u);
    }
    let mut state = Reach {
        dist: vec![usize::MAX; n],
        anchors: if h == 1 { core.clone() } else { Vec::new() },
        anchor_level: h.saturating_sub(1),
        queue: std::collections::VecDeque::new(),
    };
    for &c in &core {
        state.dist[c] = 0;
        state.queue.push_back(c);
    }
    state.relax(&adj, first);
    let mut order = free;
    order.shuffle(rng);
    for &v in &order {
        if state.dist[v] <= h {
            continue;
        }
        let anchor = if state.anchors.is_empty() {
            core[rng.random_range(0..core.len())]
        } else {
            state.anchors[rng.random_range(0..state.anchors.len())]
        };
        edges.push((anchor, v));
        adj[anchor].push(v);
        adj[v].push(anchor);
        state.dist[v] = state.dist[anchor] + 1;
        state.note(v, first);
        state.queue.push_back(v);
        state.relax(&adj, first);
    }
    finish(n, edges)
}

struct Reach {
    dist: Vec<usize>,
    /// Free vertices that have been within `anchor_level` hops of the core.
    anchors: Vec<VertexId>,
    anchor_level: usize,
    queue: std::collections::VecDeque<VertexId>,
}

impl Reach {
    fn note(&mut self, v: VertexId, first_free: usize) {
        if v >= first_free && self.dist[v] == self.anchor_level && self.anchor_level > 0 {
            self.anchors.push(v);
        }
    }

    fn relax(&mut self, adj: &[Vec<VertexId>], first_free: usize) {
        while let Some(u) = self.queue.pop_front() {
            for &v in &adj[u] {
                if self.dist[v] > self.dist[u] + 1 {
                    let was_above = self.dist[v] > self.anchor_level;
                    self.dist[v] = self.dist[u] + 1;
                    if was_above && self.dist[v] <= self.anchor_level && v >= first_free && self.anchor_level > 0 {
                        self.anchors.push(v);
                    }
                    self.queue.push_back(v);
                }
            }
        }
    }
}
