use std::collections::{HashSet, VecDeque};

use fpaut_core::domains_geometry::{
    edge_type, geodesic_edges, height, height_delta, junction_correction, lambda_count, subpath_delta,
    retype_to_a, tree_distance, EdgeType, LambdaPattern,
};
use fpaut_core::factor_systems::{FactorGroup, FactorSystem, GWord};
use fpaut_core::splittings::{DomainKey, PureAut};
use fpaut_core::whitehead_moves::{move_to_aut, random_domain, random_move, type_a_moves, MultiMove};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, PartialEq, Eq, Hash)]
enum Vertex {
    Centre(GWord),
    Leaf(usize, GWord),
}

/// Breadth-first distance in the tree whose centres are elements of G and
/// whose leaves are cosets H_k g, with H_k = G_k^{c_k}.
fn bfs_distance(fs: &FactorSystem, key: &DomainKey, i: usize, j: usize, radius: usize) -> Option<usize> {
    let c = key.conjugators();
    let leaf = |k: usize, g: &GWord| {
        let rep = fs.mul(&fs.inv(&c[k]), &fs.strip_leading(k, &fs.mul(&c[k], g)));
        Vertex::Leaf(k, rep)
    };
    let start = leaf(i, &fs.inv(&c[i]));
    let goal = leaf(j, &fs.inv(&c[j]));
    let mut seen = HashSet::from([start.clone()]);
    let mut queue = VecDeque::from([(start, 0)]);
    while let Some((v, d)) = queue.pop_front() {
        if v == goal {
            return Some(d);
        }
        if d == radius {
            continue;
        }
        let next: Vec<Vertex> = match &v {
            Vertex::Centre(g) => (0..fs.n()).map(|k| leaf(k, g)).collect(),
            Vertex::Leaf(k, g) => fs
                .factor(*k)
                .elements()
                .unwrap()
                .into_iter()
                .map(|s| {
                    let h = fs.mul_all([&fs.inv(&c[*k]), &GWord::letter(*k, s), &c[*k]]);
                    Vertex::Centre(fs.mul(&h, g))
                })
                .collect(),
        };
        for w in next {
            if seen.insert(w.clone()) {
                queue.push_back((w, d + 1));
            }
        }
    }
    None
}

fn system(orders: &[u32]) -> FactorSystem {
    FactorSystem::cyclic(orders).unwrap()
}

fn with_s3(n: usize) -> FactorSystem {
    let mut f = vec![FactorGroup::s3()];
    f.extend((1..n).map(|k| FactorGroup::cyclic(2 + (k as u32 % 2)).unwrap()));
    FactorSystem::new(f).unwrap()
}

#[test]
fn distance_matches_breadth_first_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let systems = [system(&[2, 2, 2]), system(&[2, 3, 2]), system(&[2, 2, 2, 2]), with_s3(3)];
    let mut checked = 0;
    for case in 0..240 {
        let fs = &systems[case % systems.len()];
        let key = { let steps = rng.gen_range(0..=3); random_domain(fs, &mut rng, steps) };
        let i = rng.gen_range(0..fs.n());
        let j = (i + rng.gen_range(1..fs.n())) % fs.n();
        let d = tree_distance(fs, &key, i, j).unwrap();
        let oracle = bfs_distance(fs, &key, i, j, d + 2);
        assert_eq!(oracle, Some(d), "key {:?} pair {i},{j}", key);
        checked += 1;
    }
    assert!(checked >= 200);
}

#[test]
fn fixture_single_twist() {
    let fs = system(&[2, 2, 2]);
    let a = GWord::letter(0, 1);
    let key = DomainKey::canonicalize(&fs, &[GWord::identity(), a, GWord::identity()]).unwrap();
    assert_eq!(bfs_distance(&fs, &key, 0, 2, 10), Some(2));
    assert_eq!(bfs_distance(&fs, &key, 0, 1, 10), Some(2));
    assert_eq!(bfs_distance(&fs, &key, 1, 2, 10), Some(4));
    assert_eq!(height(&fs, &key).unwrap(), 2);
}

#[test]
fn height_zero_only_at_base() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let fs = system(&[2, 3, 2, 2, 3]);
    assert_eq!(height(&fs, &DomainKey::base(5)).unwrap(), 0);
    for _ in 0..500 {
        let key = { let steps = rng.gen_range(1..=4); random_domain(&fs, &mut rng, steps) };
        assert_eq!(height(&fs, &key).unwrap() == 0, key.is_base());
    }
}

#[test]
fn delta_matches_recomputation() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for fs in [system(&[2, 3, 4]), with_s3(4), system(&[2, 2, 3, 2, 2]), with_s3(5)] {
        for _ in 0..500 {
            let key = { let steps = rng.gen_range(0..=3); random_domain(&fs, &mut rng, steps) };
            let m = random_move(&fs, &mut rng, &key, 3);
            let after = height(&fs, &m.apply(&fs)).unwrap() as i64;
            let before = height(&fs, &key).unwrap() as i64;
            assert_eq!(height_delta(&fs, &key, &m).unwrap(), after - before, "{m:?}");
        }
    }
}

#[test]
fn geodesics_are_reduced_paths_of_the_right_length() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let fs = with_s3(4);
    for _ in 0..200 {
        let key = { let steps = rng.gen_range(0..=4); random_domain(&fs, &mut rng, steps) };
        for i in 0..4 {
            for j in 0..4 {
                if i == j {
                    continue;
                }
                let w = geodesic_edges(&fs, &key, i, j).unwrap();
                w.validate(&fs, &key).unwrap();
                assert_eq!(w.len(), tree_distance(&fs, &key, i, j).unwrap());
                assert_eq!(tree_distance(&fs, &key, j, i).unwrap(), w.len());
                let edges: usize = (0..4).map(|a| lambda_count(&fs, &w, &LambdaPattern::Edge { a })).sum();
                assert_eq!(edges, w.len());
            }
        }
    }
}

fn pure(fs: &FactorSystem, words: &[(usize, Vec<usize>, usize, i64)]) -> PureAut {
    // (op, leaves, op, element): product of block twists by letters of G_op.
    let auts: Vec<PureAut> = words
        .iter()
        .map(|(op, leaves, _, e)| {
            PureAut::conjugating(fs, &leaves.iter().copied().collect(), &GWord::letter(*op, *e))
        })
        .collect();
    PureAut::product(fs, &auts)
}

#[test]
fn type_b_edges_retype() {
    let fs = system(&[2, 3, 2, 2, 3]);
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..20 {
        let a1 = { let steps = rng.gen_range(0..=2); random_domain(&fs, &mut rng, steps) };
        // i-block on {j, k} followed by a twist of k by G_j.
        let chi = pure(&fs, &[(0, vec![1, 2], 0, 1), (1, vec![2], 1, 1)]);
        let a2 = chi.then(&fs, &a1.to_aut(&fs)).domain(&fs);
        let kind = edge_type(&fs, &a1, &a2).unwrap();
        let EdgeType::B(_) = kind else { panic!("expected Type B, got {kind}") };
        let path = retype_to_a(&fs, &a1, &a2, &kind).unwrap();
        assert_eq!(path.len(), 3);
        for w in path.windows(2) {
            assert!(!type_a_moves(&fs, &w[0], &w[1]).is_empty());
        }
    }
}

#[test]
fn subpath_count_misses_shared_junctions() {
    // Geodesic ē1 e3 ē3 e2 with both G_1 and G_2 moved by the operating factor G_3.
    let fs = system(&[3, 3, 3]);
    let key = DomainKey::canonicalize(&fs, &[GWord::identity(), GWord::letter(2, 1), GWord::identity()]).unwrap();
    let m = MultiMove::single(&fs, key.clone(), 2, [0, 1], GWord::letter(2, 2)).unwrap();
    assert_eq!(m.apply(&fs), key);
    assert_eq!(subpath_delta(&fs, &key, &m).unwrap(), -2);
    assert_eq!(junction_correction(&fs, &key, &m).unwrap(), 2);
    assert_eq!(height_delta(&fs, &key, &m).unwrap(), 0);
}

#[test]
fn type_c_edges_retype() {
    let fs = system(&[3, 3, 2, 2, 3]);
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..10 {
        let steps = rng.gen_range(0..=2);
        let a1 = random_domain(&fs, &mut rng, steps);
        let chi = pure(&fs, &[(0, vec![1, 2], 0, 1), (0, vec![3, 4], 0, 2), (1, vec![2], 1, 1), (3, vec![4], 3, 1)]);
        let psi1 = a1.to_aut(&fs);
        let a2 = chi.then(&fs, &psi1).domain(&fs);
        let kind = edge_type(&fs, &a1, &a2).unwrap();
        let EdgeType::C(_) = kind else { panic!("expected Type C, got {kind}") };
        let path = retype_to_a(&fs, &a1, &a2, &kind).unwrap();
        assert_eq!(path.len(), 4);
        // Composing the Type A moves carries a1 to a2.
        let mut aut = psi1;
        for w in path.windows(2) {
            let m = type_a_moves(&fs, &w[0], &w[1]).remove(0);
            aut = aut.then(&fs, &move_to_aut(&fs, &m).unwrap());
            assert_eq!(aut.domain(&fs), w[1]);
        }
        assert_eq!(aut.domain(&fs), a2);
    }
}

#[test]
fn retyping_rejects_type_a_edges() {
    let fs = system(&[2, 2, 2, 2]);
    let base = DomainKey::base(4);
    let m = MultiMove::single(&fs, base.clone(), 0, [1], GWord::letter(0, 1)).unwrap();
    assert!(retype_to_a(&fs, &base, &m.apply(&fs), &EdgeType::B([0, 1, 2])).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn distances_are_even_and_symmetric(seed in any::<u64>(), steps in 0usize..4) {
        let fs = system(&[2, 3, 2, 4]);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let key = random_domain(&fs, &mut rng, steps);
        for i in 0..4 {
            for j in i + 1..4 {
                let d = tree_distance(&fs, &key, i, j).unwrap();
                prop_assert!(d >= 2 && d.is_multiple_of(2));
                prop_assert_eq!(d, tree_distance(&fs, &key, j, i).unwrap());
            }
        }
    }
}
