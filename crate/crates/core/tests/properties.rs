use proptest::prelude::*;

use degen_universal::analysis::{wilson_interval, Z_95};
use degen_universal::block_model::{at_most_threshold, derive_params, sample_host, Overrides};
use degen_universal::embedder::{embed, CandidateChoice, EmbedOptions, EmbedOutcome};
use degen_universal::generators::{
    gen_bounded_degree_degenerate, gen_random_degenerate, BackDegreeMode,
};
use degen_universal::graph::{
    degeneracy_order, degree_profile_check, read_edge_list, verify_embedding, write_edge_list,
    EmbeddingMap, Graph,
};

/// Max over non-empty vertex subsets of the minimum induced degree.
fn brute_degeneracy(g: &Graph) -> usize {
    let n = g.vertex_count();
    let mut best = 0;
    for mask in 1u32..(1 << n) {
        let min = (0..n)
            .filter(|&v| mask >> v & 1 == 1)
            .map(|v| {
                g.neighbors(v)
                    .iter()
                    .filter(|&&u| mask >> u & 1 == 1)
                    .count()
            })
            .min()
            .unwrap();
        best = best.max(min);
    }
    best
}

fn arb_graph(max_n: usize) -> impl Strategy<Value = Graph> {
    (1..=max_n).prop_flat_map(|n| {
        let pairs = n * (n - 1) / 2;
        proptest::collection::vec(any::<bool>(), pairs).prop_map(move |bits| {
            let mut edges = Vec::new();
            let mut idx = 0;
            for u in 0..n {
                for v in u + 1..n {
                    if bits[idx] {
                        edges.push((u, v));
                    }
                    idx += 1;
                }
            }
            Graph::from_edges(n, edges).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn degeneracy_matches_brute_force(g in arb_graph(10)) {
        let r = degeneracy_order(&g);
        prop_assert_eq!(r.degeneracy, brute_degeneracy(&g));
        prop_assert!(g.max_back_degree(&r.order) <= r.degeneracy);
        let mut sorted = r.order.clone();
        sorted.sort_unstable();
        prop_assert_eq!(sorted, (0..g.vertex_count()).collect::<Vec<_>>());
    }

    #[test]
    fn edge_list_round_trip(g in arb_graph(14)) {
        let text = write_edge_list(&g);
        prop_assert_eq!(read_edge_list(&text).unwrap(), g);
    }

    #[test]
    fn degenerate_graphs_pass_degree_profile(g in arb_graph(12)) {
        let d = degeneracy_order(&g).degeneracy;
        prop_assert!(degree_profile_check(&g, d).passed());
    }

    #[test]
    fn random_degenerate_invariants(n in 1usize..120, d in 1usize..5, seed: u64, varied: bool) {
        let mode = if varied { BackDegreeMode::Varied } else { BackDegreeMode::Full };
        let g = gen_random_degenerate(n, d, seed, mode);
        let natural: Vec<usize> = (0..n).collect();
        prop_assert!(g.max_back_degree(&natural) <= d);
        prop_assert!(degeneracy_order(&g).degeneracy <= d);
        if !varied {
            let expect: usize = (1..n).map(|i| i.min(d)).sum();
            prop_assert_eq!(g.edge_count(), expect);
        }
        prop_assert_eq!(g, gen_random_degenerate(n, d, seed, mode));
    }

    #[test]
    fn bounded_degree_invariants(n in 2usize..200, d in 1usize..4, seed: u64) {
        let g = gen_bounded_degree_degenerate(n, d, seed);
        let natural: Vec<usize> = (0..n).collect();
        prop_assert!(g.is_connected());
        prop_assert!(g.max_degree() <= 2 * d + 1);
        prop_assert!(g.max_back_degree(&natural) <= d);
    }

    #[test]
    fn threshold_test_matches_float_comparison(x in 1usize..5000, n in 16usize..2_000_000, level in 0usize..3) {
        let d = 2usize;
        let delta = (n as f64).powf((d as f64).powi(-(level as i32)));
        // skip values within rounding distance of the boundary
        prop_assume!((x as f64 - delta).abs() > 1e-6 * delta);
        prop_assert_eq!(at_most_threshold(x, n, d, level), (x as f64) <= delta);
    }

    #[test]
    fn params_partition_and_probabilities(n in 16usize..200_000, d in 2usize..5, c in 1.0f64..50.0) {
        let ov = Overrides { block_constant: Some(c), ..Default::default() };
        let Ok(p) = derive_params(n, d, &ov) else { return Ok(()); };
        prop_assert_eq!(p.delta.len(), p.levels + 1);
        for k in 0..p.levels {
            prop_assert_eq!(p.subblock_sizes[k].iter().sum::<usize>(), p.block_sizes[k]);
            prop_assert!(p.subblock_sizes[k][0] >= p.block_sizes[k] / 2);
            for i in 0..p.levels {
                prop_assert_eq!(p.prob[i][k], p.prob[k][i]);
                prop_assert!((0.0..=1.0).contains(&p.prob[i][k]));
            }
            prop_assert_eq!(p.prob[0][k], 1.0);
        }
        for w in p.delta.windows(2) {
            prop_assert!(w[0] > w[1]);
        }
    }

    #[test]
    fn wilson_contains_point_estimate(trials in 1usize..5000, frac in 0.0f64..=1.0) {
        let s = ((trials as f64) * frac).floor() as usize;
        let (lo, hi) = wilson_interval(s, trials, Z_95);
        let p = s as f64 / trials as f64;
        prop_assert!(0.0 <= lo && lo <= p + 1e-12 && p <= hi + 1e-12 && hi <= 1.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn every_success_verifies(guest_seed: u64, host_seed in 0u64..4, gn in 1usize..400, seeded: bool) {
        let ov = Overrides {
            block_constant: Some(4.0),
            prob_boost: Some(0.6),
            ..Default::default()
        };
        let p = derive_params(2000, 2, &ov).unwrap();
        let host = sample_host(&p, host_seed).unwrap();
        let h = gen_random_degenerate(gn, 2, guest_seed, BackDegreeMode::Varied);
        let order = degeneracy_order(&h);
        let choice = if seeded {
            CandidateChoice::Seeded { seed: guest_seed }
        } else {
            CandidateChoice::LowestIndex
        };
        let out = embed(&h, &order, &host, &EmbedOptions { choice }).unwrap();
        match out {
            EmbedOutcome::Success(s) => {
                prop_assert!(verify_embedding(&h, &host.graph, &s.embedding).is_ok());
                let text = s.embedding.to_text();
                let back = EmbeddingMap::from_text(&text, gn).unwrap();
                prop_assert!(verify_embedding(&h, &host.graph, &back).is_ok());
                prop_assert_eq!(s.trace.steps.len(), gn);
            }
            EmbedOutcome::Failure(f) => {
                prop_assert_eq!(f.trace.steps.len() + 1, f.step);
            }
        }
    }
}
