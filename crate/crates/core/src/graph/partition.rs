use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Graph, VertexId};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PartLabel {
    Unclassified,
    Small,
    /// Large part with its 1-based index among large parts.
    Large(u32),
}

/// Vertex-disjoint connected parts `S_1..S_l`, each identified by its
/// maximum-ID vertex (the leader).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    n: usize,
    parts: Vec<Vec<VertexId>>,
    leaders: Vec<VertexId>,
    labels: Vec<PartLabel>,
}

impl Partition {
    /// Parts are sorted internally; leaders are recomputed. Empty parts are
    /// rejected, overlap and connectivity are checked by [`validate_partition`].
    pub fn new(n: usize, parts: Vec<Vec<VertexId>>) -> Result<Self> {
        let mut parts = parts;
        for p in &mut parts {
            p.sort_unstable();
            p.dedup();
            match p.last() {
                None => return Err(Error::InvalidPartition("empty part".into())),
                Some(&v) if v >= n => {
                    return Err(Error::InvalidPartition(format!(
                        "vertex {v} out of range for n = {n}"
                    )))
                }
                _ => {}
            }
        }
        let leaders = parts.iter().map(|p| *p.last().unwrap()).collect();
        let labels = vec![PartLabel::Unclassified; parts.len()];
        Ok(Self {
            n,
            parts,
            leaders,
            labels,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn parts(&self) -> &[Vec<VertexId>] {
        &self.parts
    }

    pub fn part(&self, i: usize) -> &[VertexId] {
        &self.parts[i]
    }

    pub fn leader(&self, i: usize) -> VertexId {
        self.leaders[i]
    }

    pub fn leaders(&self) -> &[VertexId] {
        &self.leaders
    }

    pub fn label(&self, i: usize) -> PartLabel {
        self.labels[i]
    }

    pub fn labels(&self) -> &[PartLabel] {
        &self.labels
    }

    pub(crate) fn set_labels(&mut self, labels: Vec<PartLabel>) {
        assert_eq!(labels.len(), self.parts.len());
        self.labels = labels;
    }

    /// Part index owning each vertex (first owner if parts overlap).
    pub fn owner_map(&self) -> Vec<Option<usize>> {
        let mut owner = vec![None; self.n];
        for (i, p) in self.parts.iter().enumerate() {
            for &v in p {
                owner[v].get_or_insert(i);
            }
        }
        owner
    }

    /// Indices of parts labeled large, ordered by their large index.
    pub fn large_parts(&self) -> Vec<usize> {
        let mut large: Vec<(u32, usize)> = self
            .labels
            .iter()
            .enumerate()
            .filter_map(|(i, l)| match l {
                PartLabel::Large(idx) => Some((*idx, i)),
                _ => None,
            })
            .collect();
        large.sort_unstable();
        large.into_iter().map(|(_, i)| i).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    Overlap { vertex: VertexId, parts: (usize, usize) },
    Disconnected { part: usize },
    WrongLeader { part: usize, expected: VertexId, found: VertexId },
    SizeMismatch { expected_n: usize, graph_n: usize },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::Overlap { vertex, parts } => {
                write!(f, "overlap: vertex {vertex} in parts {} and {}", parts.0, parts.1)
            }
            Violation::Disconnected { part } => write!(f, "disconnected part {part}"),
            Violation::WrongLeader {
                part,
                expected,
                found,
            } => write!(f, "wrong leader for part {part}: expected {expected}, found {found}"),
            Violation::SizeMismatch { expected_n, graph_n } => {
                write!(f, "partition is over {expected_n} vertices, graph has {graph_n}")
            }
        }
    }
}

/// Checks disjointness, connectivity of every `G[S_i]` and leader
/// correctness; returns every violation found.
pub fn validate_partition(graph: &Graph, partition: &Partition) -> Vec<Violation> {
    let mut out = Vec::new();
    if partition.n() != graph.n() {
        out.push(Violation::SizeMismatch {
            expected_n: partition.n(),
            graph_n: graph.n(),
        });
        return out;
    }
    let mut owner: Vec<Option<usize>> = vec![None; graph.n()];
    for (i, part) in partition.parts().iter().enumerate() {
        for &v in part {
            match owner[v] {
                Some(j) => out.push(Violation::Overlap {
                    vertex: v,
                    parts: (j, i),
                }),
                None => owner[v] = Some(i),
            }
        }
    }
    for (i, part) in partition.parts().iter().enumerate() {
        let max = *part.iter().max().unwrap();
        if partition.leader(i) != max {
            out.push(Violation::WrongLeader {
                part: i,
                expected: max,
                found: partition.leader(i),
            });
        }
        if !induced_connected(graph, part) {
            out.push(Violation::Disconnected { part: i });
        }
    }
    out
}

fn induced_connected(graph: &Graph, part: &[VertexId]) -> bool {
    let mut seen = vec![false; part.len()];
    let mut stack = vec![0usize];
    seen[0] = true;
    let mut count = 1;
    while let Some(a) = stack.pop() {
        for &v in graph.neighbors(part[a]) {
            if let Ok(b) = part.binary_search(&v) {
                if !seen[b] {
                    seen[b] = true;
                    count += 1;
                    stack.push(b);
                }
            }
        }
    }
    count == part.len()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PartitionSpec {
    pub count: usize,
    pub min_size: usize,
    pub max_size: usize,
}

/// Grows `spec.count` random vertex-disjoint connected parts by randomized
/// BFS from random distinct roots. A part that cannot reach `min_size` is
/// released and its root is not retried.
pub fn generate_partition(graph: &Graph, spec: PartitionSpec, seed: u64) -> Result<Partition> {
    let PartitionSpec {
        count,
        min_size,
        max_size,
    } = spec;
    if min_size == 0 || min_size > max_size {
        return Err(Error::InvalidParameter(format!(
            "size range ({min_size}, {max_size}) is empty"
        )));
    }
    if count.saturating_mul(min_size) > graph.n() {
        return Err(Error::PartitionPlacement {
            placed: 0,
            requested: count,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut roots: Vec<VertexId> = (0..graph.n()).collect();
    roots.shuffle(&mut rng);
    let mut taken = vec![false; graph.n()];
    let mut parts = Vec::with_capacity(count);
    let mut queue = VecDeque::new();
    let mut scratch = Vec::new();
    for &root in &roots {
        if parts.len() == count {
            break;
        }
        if taken[root] {
            continue;
        }
        let target = rng.random_range(min_size..=max_size);
        let mut part = vec![root];
        taken[root] = true;
        queue.clear();
        queue.push_back(root);
        'grow: while let Some(u) = queue.pop_front() {
            scratch.clear();
            scratch.extend(graph.neighbors(u).iter().copied().filter(|&v| !taken[v]));
            scratch.shuffle(&mut rng);
            for &v in &scratch {
                if part.len() == target {
                    break 'grow;
                }
                taken[v] = true;
                part.push(v);
                queue.push_back(v);
            }
        }
        if part.len() < min_size {
            for &v in &part {
                taken[v] = false;
            }
            // the root stays excluded from future parts' roots only
            continue;
        }
        parts.push(part);
    }
    if parts.len() < count {
        return Err(Error::PartitionPlacement {
            placed: parts.len(),
            requested: count,
        });
    }
    Partition::new(graph.n(), parts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate_graph, GeneratorSpec};
    use proptest::prelude::*;

    fn path(n: usize) -> Graph {
        generate_graph(&GeneratorSpec::Path(n), 0).unwrap()
    }

    #[test]
    fn path_two_triples() {
        let g = path(10);
        let spec = PartitionSpec {
            count: 2,
            min_size: 3,
            max_size: 3,
        };
        let p = generate_partition(&g, spec, 1).unwrap();
        assert_eq!(p.len(), 2);
        assert!(p.parts().iter().all(|s| s.len() == 3));
        assert!(validate_partition(&g, &p).is_empty());
    }

    #[test]
    fn single_part_covers_everything() {
        let g = generate_graph(&GeneratorSpec::layered_with_degree(200, 4, 5.0), 2).unwrap();
        let spec = PartitionSpec {
            count: 1,
            min_size: 200,
            max_size: 200,
        };
        let p = generate_partition(&g, spec, 9).unwrap();
        assert_eq!(p.part(0), (0..200).collect::<Vec<_>>().as_slice());
        assert_eq!(p.leader(0), 199);
    }

    #[test]
    fn complete_graph_singletons() {
        let g = generate_graph(&GeneratorSpec::Complete(5), 0).unwrap();
        let spec = PartitionSpec {
            count: 5,
            min_size: 1,
            max_size: 1,
        };
        let p = generate_partition(&g, spec, 4).unwrap();
        assert_eq!(p.len(), 5);
        assert!(validate_partition(&g, &p).is_empty());
    }

    #[test]
    fn reports_overlap_disconnection_and_leader() {
        let g = path(3);
        let overlap = Partition::new(3, vec![vec![0, 1], vec![1, 2]]).unwrap();
        assert!(validate_partition(&g, &overlap)
            .iter()
            .any(|v| matches!(v, Violation::Overlap { vertex: 1, .. })));
        let split = Partition::new(3, vec![vec![0, 2]]).unwrap();
        assert_eq!(
            validate_partition(&g, &split),
            vec![Violation::Disconnected { part: 0 }]
        );
        assert_eq!(split.leader(0), 2);
    }

    #[test]
    fn placement_failure_reports_count() {
        let g = path(10);
        let spec = PartitionSpec {
            count: 4,
            min_size: 3,
            max_size: 3,
        };
        // 4 * 3 > 10
        assert_eq!(
            generate_partition(&g, spec, 0),
            Err(Error::PartitionPlacement {
                placed: 0,
                requested: 4
            })
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn generated_partitions_are_valid_and_reproducible(seed in any::<u64>(), count in 1usize..20) {
            let g = generate_graph(&GeneratorSpec::layered_with_degree(400, 4, 6.0), seed % 7).unwrap();
            let spec = PartitionSpec { count, min_size: 2, max_size: 12 };
            let p = generate_partition(&g, spec, seed).unwrap();
            prop_assert!(validate_partition(&g, &p).is_empty());
            prop_assert_eq!(p, generate_partition(&g, spec, seed).unwrap());
        }
    }
}
