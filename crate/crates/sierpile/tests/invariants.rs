use std::sync::Arc;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sierpile::expectations::Sink;
use sierpile::gasket::{build_graph, contract_sinks, ContractedGraph, Sym};
use sierpile::heights::{desc_to_height, DescDist};
use sierpile::oracle::{self, loop_erase};
use sierpile::rat::{q, qi, Q};
use sierpile::sandpile::{self, SandpileConfig};

fn dist(max: usize) -> impl Strategy<Value = DescDist> {
    prop::collection::vec(0i64..20, max + 1)
        .prop_filter("nonzero", |w| w.iter().any(|&x| x > 0))
        .prop_map(|w| {
            let t: i64 = w.iter().sum();
            DescDist::from_slice(&w.iter().map(|&x| q(x, t)).collect::<Vec<_>>())
        })
}

fn graph(level: u32, sink: Sink) -> Arc<ContractedGraph> {
    Arc::new(contract_sinks(
        Arc::new(build_graph(level).unwrap()),
        sink.spec(),
    ))
}

fn sink() -> impl Strategy<Value = Sink> {
    prop_oneof![Just(Sink::One), Just(Sink::Two), Just(Sink::Three)]
}

/// A recurrent configuration reached by random additions from the maximal one.
fn recurrent(g: &Arc<ContractedGraph>, seed: u64, steps: usize) -> SandpileConfig {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = SandpileConfig::max_stable(g.clone());
    for _ in 0..steps {
        c = sandpile::markov_step(&c, &mut rng);
    }
    c
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn convolution_is_commutative_and_keeps_mass(a in dist(2), b in dist(2)) {
        let ab = a.convolve(&b);
        prop_assert_eq!(&ab, &b.convolve(&a));
        prop_assert!(ab.is_valid());
        prop_assert_eq!(ab.mean(), a.mean() + b.mean());
    }

    #[test]
    fn height_law_from_descendants(d in dist(3), extra in 0usize..2) {
        let degree = 4 + extra;
        let h = desc_to_height(&d, degree).unwrap();
        prop_assert_eq!(h.0.len(), degree);
        prop_assert_eq!(h.total(), qi(1));
        let want: Q = d.0.iter().enumerate().map(|(j, p)| p * q((j + degree - 1) as i64, 2)).sum();
        prop_assert_eq!(h.mean(), want);
    }

    #[test]
    fn stabilization_is_abelian(s in sink(), seed in any::<u64>(), level in 1u32..3) {
        let g = graph(level, s);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let chips: Vec<u64> = (0..g.len()).map(|v| rng.gen_range(0..3 * g.degree(v) as u64)).collect();
        let c = SandpileConfig::new(g.clone(), chips).unwrap();
        let (a, odo_a) = sandpile::stabilize(&c);
        let mut order: Vec<usize> = (0..g.len()).collect();
        order.reverse();
        let (b, odo_b) = sandpile::stabilize_ordered(&c, &order);
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(&odo_a.counts, &odo_b.counts);
        prop_assert!(a.is_stable());
        prop_assert!(sandpile::laplacian_identity(&c, &odo_a, &a));
    }

    #[test]
    fn sandpile_group_laws(s in sink(), x in any::<u64>(), y in any::<u64>()) {
        let g = graph(1, s);
        let (a, b) = (recurrent(&g, x, 40), recurrent(&g, y, 40));
        prop_assert!(sandpile::is_recurrent(&a));
        let e = sandpile::identity_element(g.clone());
        prop_assert_eq!(&sandpile::group_add(&a, &e).unwrap(), &a);
        prop_assert_eq!(sandpile::group_add(&a, &b).unwrap(), sandpile::group_add(&b, &a).unwrap());
    }

    #[test]
    fn burning_bijection_round_trips(seed in any::<u64>()) {
        let g = graph(2, Sink::One);
        let c = recurrent(&g, seed, 200);
        let t = sandpile::sandpile_to_tree(&c).unwrap();
        t.validate(&g).unwrap();
        prop_assert_eq!(sandpile::tree_to_sandpile(&t, g).unwrap(), c);
    }

    #[test]
    fn loop_erasure_is_simple(walk in prop::collection::vec(0usize..8, 1..60)) {
        let path = loop_erase(&walk);
        let mut seen = path.clone();
        seen.sort_unstable();
        seen.dedup();
        prop_assert_eq!(seen.len(), path.len());
        prop_assert_eq!(path[0], walk[0]);
        prop_assert_eq!(path.last(), walk.last());
    }

    #[test]
    fn lerw_paths_follow_edges(seed in any::<u64>(), start in 0usize..15) {
        let g = build_graph(2).unwrap();
        let targets = g.corners();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = oracle::lerw(&g, start, &targets, &mut rng);
        prop_assert!(targets.contains(s.path.last().unwrap()));
        for w in s.path.windows(2) {
            prop_assert!(g.neighbors(w[0]).contains(&w[1]));
        }
    }

    #[test]
    fn wilson_spans_with_given_roots(seed in any::<u64>(), k in 1usize..4) {
        let g = build_graph(2).unwrap();
        let roots = &g.corners()[..k];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = oracle::wilson_sample(&g, roots, &mut rng);
        prop_assert_eq!(f.edges().len(), g.len() - k);
        for v in 0..g.len() {
            let r = f.root_of(v);
            prop_assert!(roots.contains(&r));
            if let Some(p) = f.parent[v] {
                prop_assert!(g.neighbors(v).contains(&p));
            }
        }
    }

    #[test]
    fn symmetries_are_automorphisms(level in 0u32..4, which in 0usize..6) {
        let g = build_graph(level).unwrap();
        let perms = [[0, 1, 2], [2, 0, 1], [1, 2, 0], [0, 2, 1], [1, 0, 2], [2, 1, 0]];
        let s = Sym(perms[which]);
        let p = g.perm(s);
        for (a, b) in g.edges() {
            prop_assert!(g.neighbors(p[a]).contains(&p[b]));
        }
    }
}
