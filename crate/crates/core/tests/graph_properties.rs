use netcause_core::graph::{generate_sbm_graph, random_walk_sample, Graph, SamplerConfig, WalkSampler};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn edge_lists() -> impl Strategy<Value = (usize, Vec<(usize, usize)>)> {
    (2usize..40).prop_flat_map(|n| (Just(n), prop::collection::vec((0..n, 0..n), 1..120)))
}

proptest! {
    #[test]
    fn construction_is_symmetric_simple_and_stable((n, edges) in edge_lists()) {
        let (g, _) = Graph::from_edges(n, edges.iter().copied()).unwrap();
        for v in 0..n {
            let nbrs = g.neighbors(v);
            prop_assert!(nbrs.windows(2).all(|w| w[0] < w[1]));
            prop_assert!(!nbrs.contains(&v));
            prop_assert_eq!(g.degree(v), nbrs.len());
            for &u in nbrs {
                prop_assert!(g.neighbors(u).contains(&v));
            }
        }
        let (again, stats) = Graph::from_edges(n, g.edges()).unwrap();
        prop_assert_eq!(&again, &g);
        prop_assert_eq!(stats.duplicates + stats.self_loops, 0);
    }

    #[test]
    fn sample_labels_agree_with_adjacency(seed in any::<u64>(), walk in 1usize..30, negs in 1usize..6) {
        let (g, _) = generate_sbm_graph(&[15, 15], 0.4, 0.05, seed % 7).unwrap();
        let s = random_walk_sample(&g, walk, negs, seed).unwrap();
        prop_assert_eq!(s.positive_pairs.len(), walk);
        prop_assert_eq!(s.negative_pairs.len(), walk * negs);
        for &(i, j) in &s.positive_pairs {
            prop_assert!(g.has_edge(i, j));
        }
        for &(i, j) in &s.negative_pairs {
            prop_assert!(i != j && !g.has_edge(i, j));
        }
        let mut ends: Vec<usize> = s.positive_pairs.iter().chain(&s.negative_pairs).flat_map(|&(i, j)| [i, j]).collect();
        ends.sort_unstable();
        ends.dedup();
        prop_assert_eq!(&s.touched_nodes, &ends);
    }
}

#[test]
fn fixed_seed_replays_identically() {
    let (g, _) = generate_sbm_graph(&[50, 50], 0.2, 0.02, 3).unwrap();
    let a = random_walk_sample(&g, 40, 5, 11).unwrap();
    let b = random_walk_sample(&g, 40, 5, 11).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, random_walk_sample(&g, 40, 5, 12).unwrap());
}

#[test]
fn walk_visits_a_regular_graph_uniformly() {
    // Complete graph on 30 nodes: 29-regular and fast-mixing, so visit counts
    // over a long walk behave like a multinomial sample.
    let n = 30;
    let edges = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j)));
    let (g, _) = Graph::from_edges(n, edges).unwrap();
    let steps = 100_000;
    let cfg = SamplerConfig { walk_edges: steps, ..SamplerConfig::default() };
    let sampler = WalkSampler::new(&g, cfg).unwrap();
    let walk = sampler.walk(&mut ChaCha8Rng::seed_from_u64(5));
    let mut visits = vec![0usize; n];
    for &(_, to) in &walk {
        visits[to] += 1;
    }
    let expected = steps as f64 / n as f64;
    let chi2: f64 = visits.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    // Upper 1% point of chi-square with 29 degrees of freedom.
    assert!(chi2 < 49.59, "chi-square {chi2}");
}
