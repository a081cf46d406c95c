mod common;

use std::net::Ipv4Addr;

use innet::deploy::{
    brkga_solve, colored_shortest_path, shortest_path, stretch_overhead, BrkgaParams, DeploymentPlan, Mode,
    NetworkGraph, PlacementRule,
};
use innet::ensemble::{build_decomposed_ensemble, EnsembleParams, LabeledDataset, MALICIOUS};
use innet::flow::{extract_features, project_features, FeatureRegistry, FlowKey, PacketRecord};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn packets(seed: u64, count: usize) -> Vec<PacketRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let key = FlowKey {
        src_ip: Ipv4Addr::new(10, 0, 0, 1),
        dst_ip: Ipv4Addr::new(10, 0, 0, 2),
        src_port: 1024,
        dst_port: 80,
        protocol: 6,
    };
    let mut t = 0.0;
    (0..count)
        .map(|_| {
            t += rng.random_range(0.0..0.01);
            PacketRecord {
                timestamp: t,
                key,
                size: rng.random_range(68..=1500),
                label: 0,
            }
        })
        .collect()
}

fn random_data(seed: u64, rows: usize, f: usize) -> LabeledDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = (0..rows)
        .map(|_| {
            let x: Vec<f64> = (0..f).map(|_| f64::from(rng.random_range(0..8u8))).collect();
            let label = u8::from(x[0] + x[f - 1] > 7.0);
            (x, label)
        })
        .collect();
    LabeledDataset::from_rows(f, rows).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn windows_are_prefix_statistics(seed in any::<u64>(), extra in 0usize..30) {
        let pkts = packets(seed, 100 + extra);
        let reg = FeatureRegistry::default();
        let full = extract_features(&pkts, &reg).unwrap();
        prop_assert_eq!(full.len(), 72);
        for (k, &w) in reg.windows().iter().enumerate() {
            let alone = extract_features(&pkts[..w], &FeatureRegistry::single(w).unwrap()).unwrap();
            prop_assert_eq!(&full[k * 12..(k + 1) * 12], &alone[..]);
            prop_assert_eq!(alone[0], w as f64);
            let bytes: u64 = pkts[..w].iter().map(|p| u64::from(p.size)).sum();
            prop_assert_eq!(alone[1], bytes as f64);
        }
    }

    #[test]
    fn projections_compose(
        x in prop::collection::vec(-1e3f64..1e3, 20),
        a in prop::collection::vec(0usize..20, 1..10),
        b_raw in prop::collection::vec(any::<prop::sample::Index>(), 1..10),
    ) {
        let b: Vec<usize> = b_raw.iter().map(|i| i.index(a.len())).collect();
        let composed: Vec<usize> = b.iter().map(|&j| a[j]).collect();
        let twice = project_features(&project_features(&x, &a).unwrap(), &b).unwrap();
        prop_assert_eq!(twice, project_features(&x, &composed).unwrap());
    }

    #[test]
    fn ensemble_votes_by_projection(seed in any::<u64>(), n in 1usize..6) {
        let data = random_data(seed, 120, 12);
        let sl = build_decomposed_ensemble(&data, &EnsembleParams { n_learners: n, subsample_ratio: 0.5, max_depth: 4, seed }).unwrap();
        for (x, _) in data.iter().take(40) {
            let votes = sl
                .learners
                .iter()
                .filter(|l| {
                    let local: Vec<f64> = l.feature_subset.iter().map(|&i| x[i]).collect();
                    l.tree.predict(&local).unwrap() == MALICIOUS
                })
                .count();
            let expected = u8::from(2 * votes >= n);
            prop_assert_eq!(sl.predict_majority(x).unwrap(), expected);
        }
    }

    #[test]
    fn label_setting_matches_walk_dp(seed in any::<u64>(), n in 2usize..9, colours in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let edges = common::random_connected(&mut rng, n, n, 4);
        let g = NetworkGraph::from_edges(n, &edges).unwrap();
        let adj = common::adjacency(n, &edges);
        let p = common::random_placement(&mut rng, n, colours);
        let (s, t) = (rng.random_range(0..n), rng.random_range(0..n));
        let got = colored_shortest_path(&g, &p.colors, colours, s, t).map(|r| r.cost);
        prop_assert_eq!(got, common::walk_dp(&adj, &p.colors, colours, s, t));
        let plain = shortest_path(&g, s, t).unwrap().cost;
        prop_assert_eq!(Some(plain), common::floyd(&adj, s, t));
        prop_assert!(got.unwrap() >= plain);
    }

    #[test]
    fn more_replicas_never_cost_more(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.random_range(3..8);
        let edges = common::random_connected(&mut rng, n, 2, 3);
        let g = common::graph_of(n, &edges);
        let comms = g.commodities(&common::random_commodities(&mut rng, n, 3)).unwrap();
        let mut p = common::random_placement(&mut rng, n, 3);
        let before = DeploymentPlan::build(&g, p.clone(), &comms);
        let extra = rng.random_range(0..n);
        p.colors[extra] |= 1 << rng.random_range(0..3);
        let after = DeploymentPlan::build(&g, p, &comms);
        prop_assert!(after.objective <= before.objective);
        prop_assert!(stretch_overhead(&after).unwrap() >= 0.0);
    }
}

#[test]
fn brkga_is_deterministic_per_seed() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let edges = common::random_connected(&mut rng, 8, 4, 3);
    let g = common::graph_of(8, &edges);
    let comms = g.commodities(&common::random_commodities(&mut rng, 8, 4)).unwrap();
    let params = BrkgaParams {
        generations: 30,
        seed: 5,
        ..Default::default()
    };
    let solve = || brkga_solve(&g, &comms, 3, Mode::Wl, PlacementRule::Shared, &params).unwrap();
    let (a, b) = (solve(), solve());
    assert_eq!(a.history, b.history);
    assert_eq!(a.plan.placement, b.plan.placement);
    assert!(a.history.windows(2).all(|w| w[1] <= w[0]));
}
