use super::layered::{LayeredGraph, NodeId};
use crate::error::{Error, Result};
use crate::graph::{Graph, SlotId};
use crate::shortcut::PartShortcut;

const NONE: usize = usize::MAX;

/// BFS tree `T` of a layered graph, rooted at `r`.
///
/// Only level-monotone edges are used: a node at level `l` takes its parent
/// at level `l + 1`, preferring its own copy and otherwise the smallest node
/// ID. Nodes without a monotone route to `r` are left out, so every leaf on
/// `P` sits at depth `ℓ + 1`.
#[derive(Clone, Debug)]
pub struct ShortcutTree<'g> {
    layered: LayeredGraph<'g>,
    parent: Vec<NodeId>,
}

impl<'g> ShortcutTree<'g> {
    pub fn layered(&self) -> &LayeredGraph<'g> {
        &self.layered
    }

    pub fn parent(&self, x: NodeId) -> Option<NodeId> {
        let p = self.parent[x];
        (p != NONE).then_some(p)
    }

    pub fn contains(&self, x: NodeId) -> bool {
        x == self.layered.root() || self.parent[x] != NONE
    }

    /// Tree edge from `x` to its parent copies the same vertex.
    pub fn is_self_edge(&self, x: NodeId) -> bool {
        self.parent(x).is_some_and(|p| {
            let l = &self.layered;
            l.vertex_of(p).is_some() && l.vertex_of(p) == l.vertex_of(x)
        })
    }

    /// Depth of `x` below the root.
    pub fn depth(&self, x: NodeId) -> usize {
        self.layered.levels() - self.layered.level_of(x)
    }

    pub fn size(&self) -> usize {
        (0..self.layered.node_count()).filter(|&x| self.contains(x)).count()
    }
}

pub fn build_tree(layered: LayeredGraph<'_>) -> Result<ShortcutTree<'_>> {
    let mut parent = vec![NONE; layered.node_count()];
    let root = layered.root();
    for level in (1..layered.levels()).rev() {
        for x in layered.level_range(level) {
            let up = layered.up_neighbors(x);
            let in_tree = |y: NodeId| y == root || parent[y] != NONE;
            // up_neighbors lists the self copy first, then by increasing ID
            let self_copy = up
                .first()
                .copied()
                .filter(|&y| layered.vertex_of(y).is_some() && layered.vertex_of(y) == layered.vertex_of(x));
            parent[x] = match self_copy.filter(|&y| in_tree(y)) {
                Some(y) => y,
                None => up.iter().copied().filter(|&y| in_tree(y)).min().unwrap_or(NONE),
            };
        }
    }
    if let Some(i) = (0..layered.path().len()).find(|&i| parent[layered.leaf(i)] == NONE) {
        return Err(Error::UnreachableLeaf(i));
    }
    Ok(ShortcutTree { layered, parent })
}

/// Sampled arc sets `E_1..E_D`, each a sorted list of slots.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rounds {
    sets: Vec<Vec<SlotId>>,
}

impl Rounds {
    pub fn new(mut sets: Vec<Vec<SlotId>>) -> Self {
        for s in &mut sets {
            s.sort_unstable();
            s.dedup();
        }
        Self { sets }
    }

    pub fn empty(d: usize) -> Self {
        Self { sets: vec![vec![]; d] }
    }

    /// Every arc in every round.
    pub fn full(graph: &Graph, d: usize) -> Self {
        Self {
            sets: vec![(0..graph.slot_count()).collect(); d],
        }
    }

    pub fn from_part(shortcut: &PartShortcut) -> Self {
        Self::new(
            (1..=shortcut.repetitions())
                .map(|k| shortcut.round(k).collect())
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    /// Whether arc `slot` is in `E_k` (1-based).
    pub fn contains(&self, k: usize, slot: SlotId) -> bool {
        self.sets[k - 1].binary_search(&slot).is_ok()
    }
}

/// `T[p]` plus the path edges `E(P)`, i.e. `T*`.
#[derive(Clone, Debug)]
pub struct SampledTree<'g> {
    tree: ShortcutTree<'g>,
    offset: usize,
    /// Whether the tree edge from each node to its parent survives.
    kept: Vec<bool>,
    /// Largest path index below each node in `T*`, `NONE` if none.
    rightmost: Vec<usize>,
}

/// Keeps the tree edges into level 2 and into `r`, all self-copy edges, and
/// a non-self edge from level `l` to `l + 1` iff its arc is in
/// `E_{l - 1 + offset}`.
pub fn sample_tree<'g>(tree: ShortcutTree<'g>, rounds: &Rounds, offset: usize) -> Result<SampledTree<'g>> {
    let l = &tree.layered;
    let span = l.span();
    let needed = span - 1 + offset;
    if span >= 2 && needed > rounds.len() {
        return Err(Error::InsufficientRounds {
            needed,
            available: rounds.len(),
        });
    }
    let graph = l.graph();
    let kept: Vec<bool> = (0..l.node_count())
        .map(|x| {
            let Some(p) = tree.parent(x) else {
                return false;
            };
            let level = l.level_of(x);
            if level == 1 || level == span + 1 || tree.is_self_edge(x) {
                return true;
            }
            let (a, b) = (l.vertex_of(x).unwrap(), l.vertex_of(p).unwrap());
            let slot = graph.slot_of(a, b).expect("tree edges copy graph edges");
            rounds.contains(level - 1 + offset, slot)
        })
        .collect();
    let mut rightmost = vec![NONE; l.node_count()];
    for i in 0..l.path().len() {
        let mut x = l.leaf(i);
        loop {
            rightmost[x] = i;
            if !kept[x] {
                break;
            }
            x = tree.parent[x];
        }
    }
    Ok(SampledTree {
        tree,
        offset,
        kept,
        rightmost,
    })
}

impl<'g> SampledTree<'g> {
    pub fn tree(&self) -> &ShortcutTree<'g> {
        &self.tree
    }

    pub fn layered(&self) -> &LayeredGraph<'g> {
        &self.tree.layered
    }

    pub fn offset(&self) -> usize {
        self.offset
    }

    /// Whether the tree edge above `x` is in `T[p]`.
    pub fn kept(&self, x: NodeId) -> bool {
        self.kept[x]
    }

    pub(crate) fn rightmost(&self, x: NodeId) -> Option<usize> {
        let r = self.rightmost[x];
        (r != NONE).then_some(r)
    }

    /// Whether `{x, y}` is an edge of `T*`.
    pub fn has_edge(&self, x: NodeId, y: NodeId) -> bool {
        let l = self.layered();
        let path_len = l.path().len();
        if x < path_len && y < path_len && x.abs_diff(y) == 1 {
            return true;
        }
        (self.tree.parent(x) == Some(y) && self.kept[x]) || (self.tree.parent(y) == Some(x) && self.kept[y])
    }

    pub fn kept_count(&self) -> usize {
        self.kept.iter().filter(|&&k| k).count()
    }
}
