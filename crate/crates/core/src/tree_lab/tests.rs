use super::*;
use crate::graph::{bfs, generate_graph, generate_partition, GeneratorSpec, Graph, Partition, PartitionSpec};
use crate::par::Execution;
use crate::shortcut::{build, classify_parts, compute_params, ShortcutParams, ShortcutSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Instance {
    graph: Graph,
    partition: Partition,
    params: ShortcutParams,
    shortcuts: ShortcutSet,
}

fn instance(n: usize, c_p: f64, seed: u64) -> Instance {
    let graph = generate_graph(&GeneratorSpec::layered_with_degree(n, 4, 6.0), seed).unwrap();
    let params = compute_params(n, 4, c_p).unwrap();
    let k = params.k_d.floor() as usize;
    let spec = PartitionSpec {
        count: params.big_n / 4,
        min_size: k + 1,
        max_size: 2 * k + 2,
    };
    let partition = classify_parts(&generate_partition(&graph, spec, seed).unwrap(), &params);
    let shortcuts = build(&graph, &partition, &params, seed).unwrap();
    Instance {
        graph,
        partition,
        params,
        shortcuts,
    }
}

/// Half-path setup inside a large part: (part, P, q).
fn half_path(inst: &Instance, rng: &mut ChaCha8Rng) -> (usize, Vec<usize>, usize) {
    let large = inst.partition.large_parts();
    let part = large[rng.random_range(0..large.len())];
    let members = inst.partition.part(part);
    let (sub, map) = inst.graph.induced(members);
    let s = rng.random_range(0..members.len());
    let t = (s + 1 + rng.random_range(0..members.len() - 1)) % members.len();
    let path: Vec<usize> = bfs(&sub, t, None).path_to_root(s).unwrap().into_iter().map(|v| map[v]).collect();
    let half = path.len().div_ceil(2);
    let q = path[rng.random_range(0..half)];
    (part, path[half..].iter().rev().copied().collect(), q)
}

fn rounds_of(inst: &Instance, part: usize) -> Rounds {
    Rounds::from_part(inst.shortcuts.for_part(part).unwrap())
}

#[test]
fn q_equal_to_p_reaches_root_through_own_copies() {
    let g = generate_graph(&GeneratorSpec::Path(6), 0).unwrap();
    let p = [1, 2, 3];
    let t = build_tree(build_layered(&g, &p, &p, 1).unwrap()).unwrap();
    let l = t.layered();
    for i in 0..p.len() {
        let up = t.parent(l.leaf(i)).unwrap();
        assert_eq!(l.vertex_of(up), Some(p[i]));
        assert_eq!(t.parent(up), Some(l.root()));
    }
}

#[test]
fn level_two_walks_are_single_mandatory_edges() {
    let inst = instance(1024, 1.0, 5);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..20 {
        let (part, p, q) = half_path(&inst, &mut rng);
        let tree = build_tree(build_layered(&inst.graph, &p, &[q], 4).unwrap()).unwrap();
        let sampled = sample_tree(tree, &rounds_of(&inst, part), 0).unwrap();
        for i in 0..p.len() {
            let w = sampled.find_walk(i, 2, None).unwrap();
            assert_eq!(w.length(), 1);
            assert!(matches!(w.end, WalkEnd::Level(_)));
            let g_path = project_walk(&w, &sampled, &inst.shortcuts, part).unwrap();
            assert!(g_path.len() <= 2);
        }
    }
}

#[test]
fn full_sampling_climbs_straight_up() {
    let inst = instance(1024, 1.0, 6);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (_, p, q) = half_path(&inst, &mut rng);
    let span = 4;
    let tree = build_tree(build_layered(&inst.graph, &p, &[q], span).unwrap()).unwrap();
    let sampled = sample_tree(tree, &Rounds::full(&inst.graph, span), 0).unwrap();
    for i in 0..p.len() {
        for k in 2..=span + 1 {
            let w = sampled.find_walk(i, k, None).unwrap();
            assert_eq!(w.length(), k - 1);
            assert_eq!(w.units.len(), 1);
            sampled.check_walk(&w).unwrap();
        }
    }
}

#[test]
fn empty_rounds_leave_only_mandatory_routes() {
    // every step of 0 -> 4 is tight, so the only way up from L2 is a
    // sampled non-self edge
    let g = generate_graph(&GeneratorSpec::Path(6), 0).unwrap();
    let tree = build_tree(build_layered(&g, &[0, 1], &[4], 4).unwrap()).unwrap();
    let sampled = sample_tree(tree, &Rounds::empty(4), 0).unwrap();
    assert_eq!(sampled.find_walk(0, 3, Some(1)), None);
    let w = sampled.find_walk(0, 3, None).unwrap();
    assert_eq!(w.end, WalkEnd::Target);
    assert_eq!(w.length(), 2);
    sampled.check_walk(&w).unwrap();
}

#[test]
fn self_copy_steps_collapse_under_projection() {
    let inst = instance(1024, 1.0, 7);
    let part = inst.partition.large_parts()[0];
    let a = inst.partition.part(part)[0];
    let tree = build_tree(build_layered(&inst.graph, &[a], &[a], 3).unwrap()).unwrap();
    let sampled = sample_tree(tree, &rounds_of(&inst, part), 0).unwrap();
    let w = sampled.find_walk(0, 4, None).unwrap();
    assert_eq!(w.length(), 3);
    let g_path = project_walk(&w, &sampled, &inst.shortcuts, part).unwrap();
    assert_eq!(g_path, vec![a]);
}

#[test]
fn single_step_one_edge_projects_to_one_edge() {
    let inst = instance(1024, 1.0, 8);
    let part = inst.partition.large_parts()[0];
    let members = inst.partition.part(part);
    let (a, b) = members
        .iter()
        .flat_map(|&u| inst.graph.neighbors(u).iter().map(move |&v| (u, v)))
        .find(|&(u, v)| u != v && members.binary_search(&v).is_ok())
        .unwrap();
    // Q = {b} forces p_1 = a up through b's copy
    let tree = build_tree(build_layered(&inst.graph, &[a], &[b], 1).unwrap()).unwrap();
    let sampled = sample_tree(tree, &rounds_of(&inst, part), 0).unwrap();
    let w = sampled.find_walk(0, 2, None).unwrap();
    assert_eq!(project_walk(&w, &sampled, &inst.shortcuts, part).unwrap(), vec![a, b]);
}

#[test]
fn sampled_edges_agree_with_rounds() {
    let inst = instance(1024, 1.0, 9);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for offset in [0, 2] {
        let (part, p, q) = half_path(&inst, &mut rng);
        let span = 4 - offset;
        let shortcut = inst.shortcuts.for_part(part).unwrap();
        let tree = build_tree(build_layered(&inst.graph, &p, &[q], span).unwrap()).unwrap();
        let sampled = sample_tree(tree, &rounds_of(&inst, part), offset).unwrap();
        let t = sampled.tree();
        let l = sampled.layered();
        for x in 0..l.node_count() {
            let Some(parent) = t.parent(x) else { continue };
            let level = l.level_of(x);
            let (a, b) = (l.vertex_of(x).unwrap(), l.vertex_of(parent));
            let expected = match b {
                None => true,
                Some(b) if level == 1 || a == b => true,
                Some(b) => shortcut.round_contains(level - 1 + offset, inst.graph.slot_of(a, b).unwrap()),
            };
            assert_eq!(sampled.kept(x), expected, "node {x} level {level}");
        }
    }
}

#[test]
fn random_walks_respect_invariants_and_project_soundly() {
    let inst = instance(2048, 1.0, 10);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut checked = 0;
    while checked < 1000 {
        let (part, p, q) = half_path(&inst, &mut rng);
        let tree = build_tree(build_layered(&inst.graph, &p, &[q], 4).unwrap()).unwrap();
        let sampled = sample_tree(tree, &rounds_of(&inst, part), 0).unwrap();
        for _ in 0..20 {
            let i = rng.random_range(0..p.len());
            let k = rng.random_range(2..=5);
            let w = sampled.find_walk(i, k, None).unwrap();
            sampled.check_walk(&w).unwrap();
            let g_path = project_walk(&w, &sampled, &inst.shortcuts, part).unwrap();
            assert!(g_path.len() - 1 <= w.length());
            assert_eq!(g_path[0], p[i]);
            checked += 1;
        }
    }
}

#[test]
fn study_rows_and_csv() {
    let inst = instance(1024, 1.0, 11);
    let seeds: Vec<u64> = (0..24).collect();
    let study = empirical_walk_study(&inst.graph, &inst.partition, &inst.params, &seeds, 8.0, Execution::Parallel).unwrap();
    assert_eq!(study.rows.len(), 2);
    let k2 = study.row(2).unwrap();
    assert_eq!((k2.trials, k2.successes, k2.median_length), (24, 24, 1));
    assert!(study.rows.iter().all(|r| r.invariant_failures == 0 && r.projection_failures == 0));
    let csv = study.to_csv();
    assert!(csv.starts_with("k,ell_k,trials,successes,median_length,p95_length\n2,1,24,24,1,1\n"));
    let sequential =
        empirical_walk_study(&inst.graph, &inst.partition, &inst.params, &seeds, 8.0, Execution::Sequential).unwrap();
    assert_eq!(study, sequential);
}

#[test]
fn study_needs_even_diameter() {
    let inst = instance(1024, 1.0, 12);
    let odd = compute_params(1024, 5, 1.0).unwrap();
    assert!(matches!(
        empirical_walk_study(&inst.graph, &inst.partition, &odd, &[1], 8.0, Execution::Sequential),
        Err(crate::Error::Parity(_))
    ));
}

#[test]
fn length_bound_formula() {
    let params = compute_params(4096, 4, 1.0).unwrap();
    assert_eq!(walk_length_bound(&params, 8.0, 2), 1.0);
    // k_D = 16, N = 256
    assert!((walk_length_bound(&params, 8.0, 3) - 128.0).abs() < 1e-9);
}
