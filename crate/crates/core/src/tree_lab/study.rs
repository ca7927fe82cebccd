use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::layered::build_layered;
use super::tree::{build_tree, sample_tree, Rounds};
use super::walk::project_walk;
use crate::error::{Error, Result};
use crate::graph::{bfs, Graph, Partition, VertexId};
use crate::par::{self, Execution};
use crate::shortcut::{build_with, BuildOptions, ShortcutParams};

/// `ℓ_k = (c_walk · N / k_D)^(k-2)`.
pub fn walk_length_bound(params: &ShortcutParams, c_walk: f64, k: usize) -> f64 {
    (c_walk * params.big_n as f64 / params.k_d).powi(k as i32 - 2)
}

#[derive(Clone, Debug, PartialEq)]
pub struct WalkRow {
    pub k: usize,
    pub ell_k: f64,
    pub trials: usize,
    pub successes: usize,
    pub median_length: usize,
    pub p95_length: usize,
    /// Walks failing [`SampledTree::check_walk`](super::SampledTree::check_walk).
    pub invariant_failures: usize,
    /// Walks whose projection errors or is longer than the walk.
    pub projection_failures: usize,
}

impl WalkRow {
    pub fn success_rate(&self) -> f64 {
        self.successes as f64 / self.trials.max(1) as f64
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WalkStudy {
    pub rows: Vec<WalkRow>,
}

impl WalkStudy {
    pub fn row(&self, k: usize) -> Option<&WalkRow> {
        self.rows.iter().find(|r| r.k == k)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("k,ell_k,trials,successes,median_length,p95_length\n");
        for r in &self.rows {
            writeln!(
                s,
                "{},{},{},{},{},{}",
                r.k, r.ell_k, r.trials, r.successes, r.median_length, r.p95_length
            )
            .unwrap();
        }
        s
    }
}

/// One outcome per level: (walk length, invariants hold, projection sound).
type TrialOutcome = Vec<(usize, bool, bool)>;

/// Monte-Carlo check of walk lengths in the first phase of the half-path
/// setup. Each seed is one trial: a random large part `S_j`, random `s != t`
/// in it, a shortest `s`-`t` path in `G[S_j]` split in halves, `P` = the
/// reversed second half, `Q` = one random vertex of the first half, `ℓ = D`.
/// The trial's seed also keys the shortcut sampling. For every level
/// `k = 2..=D/2+1` the greedy walk from the first node of `P` is recorded;
/// a success is a walk no longer than `ℓ_k`.
pub fn empirical_walk_study(
    graph: &Graph,
    partition: &Partition,
    params: &ShortcutParams,
    seeds: &[u64],
    c_walk: f64,
    exec: Execution,
) -> Result<WalkStudy> {
    if !params.is_even() {
        return Err(Error::Parity("the walk study needs an even diameter"));
    }
    let large = partition.large_parts();
    if large.is_empty() {
        return Err(Error::InvalidPartition("no large parts to sample from".into()));
    }
    let d = params.d as usize;
    let levels: Vec<usize> = (2..=d / 2 + 1).collect();
    let outcomes = par::map_collect(exec, seeds, |&seed| {
        trial(graph, partition, params, &large, &levels, seed)
    })
    .into_iter()
    .collect::<Result<Vec<TrialOutcome>>>()?;

    let rows = levels
        .iter()
        .enumerate()
        .map(|(j, &k)| {
            let ell_k = walk_length_bound(params, c_walk, k);
            let mut lengths: Vec<usize> = outcomes.iter().map(|o| o[j].0).collect();
            lengths.sort_unstable();
            WalkRow {
                k,
                ell_k,
                trials: lengths.len(),
                successes: lengths.iter().filter(|&&len| len as f64 <= ell_k).count(),
                median_length: nearest_rank(&lengths, 0.5),
                p95_length: nearest_rank(&lengths, 0.95),
                invariant_failures: outcomes.iter().filter(|o| !o[j].1).count(),
                projection_failures: outcomes.iter().filter(|o| !o[j].2).count(),
            }
        })
        .collect();
    Ok(WalkStudy { rows })
}

fn nearest_rank(sorted: &[usize], q: f64) -> usize {
    if sorted.is_empty() {
        return 0;
    }
    let rank = (q * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

fn trial(
    graph: &Graph,
    partition: &Partition,
    params: &ShortcutParams,
    large: &[usize],
    levels: &[usize],
    seed: u64,
) -> Result<TrialOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let part = large[rng.random_range(0..large.len())];
    let members = partition.part(part);
    let s = rng.random_range(0..members.len());
    let t = (s + rng.random_range(1..members.len())) % members.len();
    let (sub, map) = graph.induced(members);
    let mut path: Vec<VertexId> = bfs(&sub, s, None)
        .path_to_root(t)
        .ok_or(Error::InvalidPartition(format!("part {part} is disconnected")))?
        .into_iter()
        .rev()
        .map(|v| map[v])
        .collect();
    let half = path.len().div_ceil(2);
    let q = path[rng.random_range(0..half)];
    let p = path.split_off(half);
    let p: Vec<VertexId> = p.into_iter().rev().collect();

    let options = BuildOptions {
        exec: Execution::Sequential,
        only_parts: Some(vec![part]),
        skip_rounds: false,
    };
    let shortcuts = build_with(graph, partition, params, seed, &options)?;
    let rounds = Rounds::from_part(shortcuts.for_part(part).expect("part is large"));
    let d = params.d as usize;
    let tree = build_tree(build_layered(graph, &p, &[q], d)?)?;
    let sampled = sample_tree(tree, &rounds, 0)?;
    Ok(levels
        .iter()
        .map(|&k| {
            let walk = sampled.find_walk(0, k, None).expect("unbounded walks always end");
            let invariants = sampled.check_walk(&walk).is_ok();
            let projected = project_walk(&walk, &sampled, &shortcuts, part)
                .is_ok_and(|g_path| g_path.len() - 1 <= walk.length());
            (walk.length(), invariants, projected)
        })
        .collect())
}
