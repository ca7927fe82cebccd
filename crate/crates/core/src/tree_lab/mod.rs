//! Layered auxiliary graphs, their BFS trees, sampled trees and unit walks,
//! used to check the dilation argument empirically.

mod layered;
mod study;
mod tree;
mod walk;

pub use layered::{build_layered, LayeredGraph, NodeId};
pub use study::{empirical_walk_study, walk_length_bound, WalkRow, WalkStudy};
pub use tree::{build_tree, sample_tree, Rounds, SampledTree, ShortcutTree};
pub use walk::{project_walk, Unit, WalkEnd, WalkRecord};

#[cfg(test)]
mod tests;
