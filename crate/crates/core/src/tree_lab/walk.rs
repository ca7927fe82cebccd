use std::collections::HashSet;

use super::layered::NodeId;
use super::tree::SampledTree;
use crate::error::{Error, Result};
use crate::graph::VertexId;
use crate::shortcut::ShortcutSet;

/// How a walk ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WalkEnd {
    /// Reached the last path node `t`.
    Target,
    /// Reached the given node at the target level.
    Level(NodeId),
}

/// Climb from `P[start]` to `top`, then (unless the walk ended at `top`'s
/// parent) descent to `P[end]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Unit {
    pub start: usize,
    pub top: NodeId,
    pub end: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WalkRecord {
    /// 0-based path position the walk starts from.
    pub start: usize,
    pub level: usize,
    pub nodes: Vec<NodeId>,
    pub units: Vec<Unit>,
    pub end: WalkEnd,
}

impl WalkRecord {
    pub fn length(&self) -> usize {
        self.nodes.len() - 1
    }
}

impl SampledTree<'_> {
    /// Greedy walk in `T*` from `P[start]` to level `level` or to `t`.
    ///
    /// Units climb from the current path node while the parent edge is kept
    /// and stays below `level`. If a unit's top sits at `level - 1` with its
    /// parent edge kept, the walk takes that edge and stops. Otherwise it
    /// descends to the right-most path node under the top and steps right
    /// along `P`. Returns `None` if the walk grows beyond `budget` edges.
    pub fn find_walk(&self, start: usize, level: usize, budget: Option<usize>) -> Option<WalkRecord> {
        let l = self.layered();
        let last = l.path().len() - 1;
        assert!(start <= last, "start {start} beyond path end {last}");
        assert!(
            (2..=l.span() + 1).contains(&level),
            "level {level} outside 2..={}",
            l.span() + 1
        );
        let tree = self.tree();
        let cap = level - 1;
        let over = |nodes: &Vec<NodeId>| budget.is_some_and(|b| nodes.len() - 1 > b);
        let mut nodes = vec![l.leaf(start)];
        let mut units = Vec::new();
        let mut cur = start;
        loop {
            let mut x = l.leaf(cur);
            while l.level_of(x) < cap && self.kept(x) {
                x = tree.parent(x).unwrap();
                nodes.push(x);
            }
            let top = x;
            if l.level_of(top) == cap && self.kept(top) {
                let up = tree.parent(top).unwrap();
                nodes.push(up);
                units.push(Unit { start: cur, top, end: None });
                return (!over(&nodes)).then_some(WalkRecord {
                    start,
                    level,
                    nodes,
                    units,
                    end: WalkEnd::Level(up),
                });
            }
            let end = self.rightmost(top).expect("a unit top lies above its start");
            let mut down = Vec::new();
            let mut y = l.leaf(end);
            while y != top {
                down.push(y);
                y = tree.parent(y).unwrap();
            }
            nodes.extend(down.into_iter().rev());
            units.push(Unit {
                start: cur,
                top,
                end: Some(end),
            });
            if over(&nodes) {
                return None;
            }
            if end == last {
                return Some(WalkRecord {
                    start,
                    level,
                    nodes,
                    units,
                    end: WalkEnd::Target,
                });
            }
            cur = end + 1;
            nodes.push(l.leaf(cur));
            if over(&nodes) {
                return None;
            }
        }
    }

    /// Structural checks on a walk: consecutive nodes adjacent in `T*`,
    /// units moving strictly right, level-`(k-1)` unit tops distinct, and at
    /// most one node on level `k`.
    pub fn check_walk(&self, walk: &WalkRecord) -> std::result::Result<(), String> {
        let l = self.layered();
        if let Some(w) = walk.nodes.windows(2).find(|w| !self.has_edge(w[0], w[1])) {
            return Err(format!("nodes {} and {} are not adjacent in T*", w[0], w[1]));
        }
        let mut next = walk.start;
        for (j, u) in walk.units.iter().enumerate() {
            if u.start != next {
                return Err(format!("unit {j} starts at {}, expected {next}", u.start));
            }
            match u.end {
                Some(e) if e < u.start => return Err(format!("unit {j} moves left")),
                Some(e) => next = e + 1,
                None if j + 1 != walk.units.len() => return Err(format!("unit {j} ends early")),
                None => {}
            }
        }
        let tops: Vec<NodeId> = walk
            .nodes
            .iter()
            .copied()
            .filter(|&x| l.level_of(x) == walk.level - 1)
            .collect();
        if tops.iter().collect::<HashSet<_>>().len() != tops.len() {
            return Err(format!("repeated level-{} node", walk.level - 1));
        }
        let on_level = walk.nodes.iter().filter(|&&x| l.level_of(x) == walk.level).count();
        if on_level > 1 {
            return Err(format!("{on_level} nodes on level {}", walk.level));
        }
        let leaves: Vec<NodeId> = walk.nodes.iter().copied().filter(|&x| l.level_of(x) == 1).collect();
        if leaves.windows(2).any(|w| w[1] < w[0]) {
            return Err("path nodes visited out of order".into());
        }
        Ok(())
    }
}

/// Maps a walk to `G`, dropping self-copy steps, and checks that every
/// edge used lies in `H_part` (which contains `G[S_part]`'s edges).
pub fn project_walk(
    walk: &WalkRecord,
    tree: &SampledTree<'_>,
    shortcuts: &ShortcutSet,
    part: usize,
) -> Result<Vec<VertexId>> {
    let shortcut = shortcuts
        .for_part(part)
        .ok_or_else(|| Error::InvalidParameter(format!("part {part} has no shortcut")))?;
    let l = tree.layered();
    let graph = l.graph();
    let mut out: Vec<VertexId> = Vec::with_capacity(walk.nodes.len());
    for &x in &walk.nodes {
        let v = l
            .vertex_of(x)
            .ok_or_else(|| Error::InvalidParameter("walk passes through the root".into()))?;
        match out.last() {
            Some(&u) if u == v => {}
            Some(&u) => {
                let e = graph.edge_id(u, v).ok_or(Error::ProvenanceMismatch(u, v))?;
                if !shortcut.contains(e) {
                    return Err(Error::ProvenanceMismatch(u, v));
                }
                out.push(v);
            }
            None => out.push(v),
        }
    }
    Ok(out)
}
