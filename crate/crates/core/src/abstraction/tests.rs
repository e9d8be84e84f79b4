use super::*;
use crate::cfr::{extract_ev, Solver, StrategyProfile};
use crate::game::{GameKind, PublicTree, TreeConfig, BASE_SEED};
use crate::reference;
use rand::Rng;

fn points_1d(v: &[f64]) -> FeatureMatrix {
    FeatureMatrix::from_rows(v.len(), 1, v.to_vec())
}

fn random_points(n: usize, dim: usize, seed: u64) -> FeatureMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..n * dim).map(|_| rng.gen::<f64>()).collect();
    FeatureMatrix::from_rows(n, dim, data)
}

/// Minimum within-cluster cost over every assignment of `points` to at
/// most `k` labelled groups.
fn exhaustive_cost(points: &FeatureMatrix, k: usize) -> f64 {
    let n = points.rows();
    let mut best = f64::INFINITY;
    let total = k.pow(n as u32);
    for code in 0..total {
        let mut c = code;
        let assign: Vec<u32> = (0..n)
            .map(|_| {
                let a = c % k;
                c /= k;
                a as u32
            })
            .collect();
        let (centers, _) = kmeans::tests_support::centroids(points, &assign, k);
        let cost: f64 = (0..n)
            .map(|i| {
                points
                    .row(i)
                    .iter()
                    .zip(centers.row(assign[i] as usize))
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
            })
            .sum();
        best = best.min(cost);
    }
    best
}

#[test]
fn four_point_example_every_seed() {
    let pts = points_1d(&[0.0, 0.1, 0.9, 1.0]);
    for seed in 0..200 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = kmeans_pp(&pts, 2, &mut rng, DEFAULT_MAX_ITERS).unwrap();
        let a = &r.assignment;
        assert_eq!(a[0], a[1], "seed {seed}");
        assert_eq!(a[2], a[3], "seed {seed}");
        assert_ne!(a[0], a[2], "seed {seed}");
        assert!((r.cost - exhaustive_cost(&pts, 2)).abs() < 1e-12);
    }
}

#[test]
fn cost_never_increases() {
    for seed in 0..20 {
        let pts = random_points(300, 3, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = kmeans_pp(&pts, 12, &mut rng, DEFAULT_MAX_ITERS).unwrap();
        for w in r.cost_history.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "{:?}", r.cost_history);
        }
        assert!(r.cost <= *r.cost_history.last().unwrap() + 1e-12);
        assert!(r.iterations <= DEFAULT_MAX_ITERS);
    }
}

#[test]
fn deterministic_under_seed() {
    let pts = random_points(200, 4, 1);
    let run = |s| kmeans_pp(&pts, 9, &mut ChaCha8Rng::seed_from_u64(s), DEFAULT_MAX_ITERS).unwrap();
    assert_eq!(run(5), run(5));
    let a = player_rng(42, Player::P1).gen::<u64>();
    let b = player_rng(42, Player::P2).gen::<u64>();
    assert_ne!(a, b);
    assert_eq!(a, player_rng(42, Player::P1).gen::<u64>());
}

#[test]
fn k_equals_n_and_k_one() {
    let pts = random_points(30, 2, 3);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let r = kmeans_pp(&pts, 30, &mut rng, DEFAULT_MAX_ITERS).unwrap();
    let mut seen = r.assignment.clone();
    seen.sort_unstable();
    seen.dedup();
    assert_eq!(seen.len(), 30);
    assert_eq!(r.cost, 0.0);

    let r = kmeans_pp(&pts, 1, &mut rng, DEFAULT_MAX_ITERS).unwrap();
    assert!(r.assignment.iter().all(|&a| a == 0));
    for d in 0..2 {
        let mean = pts.column(d).iter().sum::<f64>() / 30.0;
        assert!((r.centers.get(0, d) - mean).abs() < 1e-12);
    }
}

#[test]
fn no_empty_bucket_with_enough_distinct_rows() {
    // tight clusters with a few outliers tend to strand seeds
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for trial in 0..30 {
        let n = 60;
        let mut data = Vec::new();
        for i in 0..n {
            let base = if i < 50 { 0.0 } else { 10.0 + i as f64 };
            data.push(base + rng.gen::<f64>() * 1e-3);
        }
        let pts = points_1d(&data);
        for k in [2, 5, 17, 40, 60] {
            let r = kmeans_pp(&pts, k, &mut ChaCha8Rng::seed_from_u64(trial), DEFAULT_MAX_ITERS).unwrap();
            assert_eq!(r.empty_clusters, 0, "trial {trial} k {k}");
            let mut used = r.assignment.clone();
            used.sort_unstable();
            used.dedup();
            assert_eq!(used.len(), k);
        }
    }
}

#[test]
fn repair_moves_farthest_point() {
    let pts = points_1d(&[0.0, 1.0, 5.0, 9.0]);
    let mut assignment = vec![0, 0, 0, 1];
    let mut centers = points_1d(&[2.0, 9.0, 100.0]);
    let mut count = vec![3, 1, 0];
    let left = kmeans::tests_support::repair(&pts, &mut assignment, &mut centers, &mut count);
    assert_eq!(left, 0);
    // 5.0 is farthest from centroid 2.0 in the only splittable cluster
    assert_eq!(assignment, vec![0, 0, 2, 1]);
    assert_eq!(centers.get(2, 0), 5.0);
}

#[test]
fn too_few_distinct_rows_warns_not_errors() {
    let pts = points_1d(&[1.0, 1.0, 1.0, 2.0, 2.0]);
    let r = kmeans_pp(&pts, 4, &mut ChaCha8Rng::seed_from_u64(0), DEFAULT_MAX_ITERS).unwrap();
    assert_eq!(r.empty_clusters, 2);
    assert_eq!(r.cost, 0.0);
    assert!(kmeans_pp(&pts, 0, &mut ChaCha8Rng::seed_from_u64(0), 8).is_err());
    assert!(kmeans_pp(&FeatureMatrix::zeros(0, 1), 1, &mut ChaCha8Rng::seed_from_u64(0), 8).is_err());
}

#[test]
fn permutation_keeps_optimal_cost() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut rows = Vec::new();
    for c in 0..3 {
        for _ in 0..4 {
            rows.push(vec![c as f64 * 5.0 + rng.gen::<f64>(), rng.gen::<f64>()]);
        }
    }
    let pts = FeatureMatrix::from_rows(12, 2, rows.concat());
    let opt = exhaustive_cost(&pts, 3);
    let mut perm: Vec<usize> = (0..12).collect();
    perm.reverse();
    perm.swap(0, 5);
    let permuted = FeatureMatrix::from_rows(12, 2, perm.iter().flat_map(|&i| rows[i].clone()).collect());
    for seed in 0..10 {
        let a = kmeans_pp(&pts, 3, &mut ChaCha8Rng::seed_from_u64(seed), 8).unwrap();
        let b = kmeans_pp(&permuted, 3, &mut ChaCha8Rng::seed_from_u64(seed), 8).unwrap();
        assert!((a.cost - opt).abs() < 1e-9 && (b.cost - opt).abs() < 1e-9);
    }
}

#[test]
fn overhead_formula() {
    assert!((overhead(10, 2000, 200, 1081) - 0.027025).abs() < 1e-15);
    assert!((overhead(500, 2000, 20, 861) - 10.7625).abs() < 1e-12);
    assert_eq!(overhead(700, 700, 1081, 1081), 1.0);
}

#[test]
fn depth_weights() {
    let w = DepthWeights::default();
    assert_eq!(w.get(0), 5.0);
    assert_eq!(w.get(7), 0.05);
    assert!((w.get(8) - 0.035).abs() < 1e-15);
    assert!((w.get(10) - 0.05 * 0.7f64.powi(3)).abs() < 1e-15);
    assert!(DepthWeights::new(vec![1.0, 2.0]).is_err());
    assert!(DepthWeights::new(vec![5.0, 1.0, 2.0]).is_err());
    assert!(DepthWeights::new(vec![-1.0]).is_err());
    assert!(DepthWeights::new(vec![1.0, 0.0, 0.0]).is_ok());
}

#[test]
fn quantile_buckets_are_contiguous() {
    let v = [0.5, 0.1, 0.9, 0.3, 0.3, 0.7, 0.2];
    let b = quantile_buckets(&v, 3).unwrap();
    // sizes ceil(7/3) = 3: {0.1,0.2,0.3(idx3)}, {0.3(idx4),0.5,0.7}, {0.9}
    assert_eq!(b, vec![1, 0, 2, 0, 1, 1, 0]);
    assert!(quantile_buckets(&v, 0).is_err());
    assert_eq!(quantile_buckets(&v, 10).unwrap().iter().max(), Some(&6));
}

#[test]
fn mapping_validation_and_csv() {
    assert!(BucketMapping::new(2, vec![0, 2], vec![0, 1]).is_err());
    assert!(BucketMapping::new(2, vec![0, 1], vec![0]).is_err());
    let g = reference::reduced_game(GameKind::HunlRiver, 0, 12, &TreeConfig::default()).unwrap();
    let phi: Vec<u32> = (0..12).map(|i| (i % 4) as u32).collect();
    let rev: Vec<u32> = phi.iter().rev().copied().collect();
    let m = BucketMapping::new(4, phi.clone(), rev.clone()).unwrap();
    assert_eq!(m.bucket_sizes(Player::P1), vec![3, 3, 3, 3]);
    let f = FeatureMatrix::from_columns(&[(0..12).map(|i| i as f64 * 0.5).collect()]);
    let mut buf = Vec::new();
    m.write_csv(&mut buf, Player::P2, &g.hands, Some(&f)).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    assert!(text.starts_with("hand,bucket_id,f0\n"));
    assert_eq!(BucketMapping::read_csv(&buf[..], &g.hands).unwrap(), rev);
}

#[test]
fn method_names() {
    for m in Method::ALL {
        assert_eq!(m.name().parse::<Method>().unwrap(), m);
    }
    assert!("potential".parse::<Method>().is_err());
    assert!(!Method::Rank.supports(GameKind::Random));
    assert!(!Method::Rank2d.supports(GameKind::HunlRiver));
    assert!(Method::Rank2d.supports(GameKind::DoubleBoard));
    assert!(Method::Equity.supports(GameKind::Random));
}

#[test]
fn ev_features() {
    let g = reference::reduced_game(GameKind::HunlRiver, 1, 40, &TreeConfig::default()).unwrap();
    let (_, ev) = crate::cfr::warmup(&g, Variant::PcfrPlus, 10, EvNodes::Own).unwrap();
    let root = feature_ev_root(&ev[0]);
    assert_eq!(root.column(0), ev[0].values.column(0));
    let nd = feature_ev_nd(&ev[1], &DepthWeights::default()).unwrap();
    assert_eq!(nd.cols(), g.tree.decision_nodes(Player::P2).len());
    assert_eq!(nd.cols(), 121);
    for (c, &d) in ev[1].depths.iter().enumerate() {
        for r in 0..40 {
            assert_eq!(nd.get(r, c), DepthWeights::default().get(d) * ev[1].values.get(r, c));
        }
    }
    // a positive affine map keeps the ordering of root features
    let x = root.column(0);
    let y: Vec<f64> = x.iter().map(|v| 3.0 * v - 1.0).collect();
    let mut ox: Vec<usize> = (0..40).collect();
    let mut oy = ox.clone();
    ox.sort_by(|&a, &b| x[a].total_cmp(&x[b]).then(a.cmp(&b)));
    oy.sort_by(|&a, &b| y[a].total_cmp(&y[b]).then(a.cmp(&b)));
    assert_eq!(ox, oy);
}

#[test]
fn ev_nd_single_node_is_scaled_root() {
    let tree = TreeConfig {
        bet_fractions: vec![],
        max_aggressive_actions: 0,
        depth_limit: 8,
    };
    let g = Game::new(
        GameKind::HunlRiver,
        crate::game::board_for_id(GameKind::HunlRiver, 2, BASE_SEED),
        PublicTree::build(&tree).unwrap(),
    )
    .unwrap();
    let ev = extract_ev(&g, &StrategyProfile::uniform(&g.tree, g.n_hands()), EvNodes::Own).unwrap();
    let nd = feature_ev_nd(&ev[0], &DepthWeights::default()).unwrap();
    let root = feature_ev_root(&ev[0]);
    assert_eq!(nd.cols(), 1);
    for r in 0..g.n_hands() {
        assert_eq!(nd.get(r, 0), 5.0 * root.get(r, 0));
    }
}

#[test]
fn identical_rows_share_bucket() {
    let mut data = random_points(50, 3, 2).data().to_vec();
    let copy = data[3 * 7..3 * 8].to_vec();
    data[3 * 20..3 * 21].copy_from_slice(&copy);
    let pts = FeatureMatrix::from_rows(50, 3, data);
    for seed in 0..10 {
        for k in [2, 7, 30] {
            let r = kmeans_pp(&pts, k, &mut ChaCha8Rng::seed_from_u64(seed), 8).unwrap();
            assert_eq!(r.assignment[7], r.assignment[20]);
        }
    }
}

#[test]
fn baseline_guards() {
    let hunl = reference::reduced_game(GameKind::HunlRiver, 0, 20, &TreeConfig::default()).unwrap();
    let random = reference::reduced_game(GameKind::Random, 0, 20, &TreeConfig::default()).unwrap();
    assert!(feature_baseline(Method::Rank2d, &hunl).is_err());
    assert!(feature_baseline(Method::Rank, &random).is_err());
    assert!(feature_baseline(Method::EvNd, &hunl).is_err());
    let eq = feature_baseline(Method::Equity, &random).unwrap();
    assert_eq!(eq.column(0), random.oracle.equity());
    let mut cfg = AbstractionConfig::new(Method::Rank, Variant::PcfrPlus, 1, 4, 1);
    assert!(build_mapping(&random, &cfg).is_err());
    cfg.method = Method::Rank;
    let (m, _, _) = build_mapping(&hunl, &cfg).unwrap();
    assert_eq!(m.bucket_sizes(Player::P1), vec![5, 5, 5, 5]);
}

#[test]
fn full_resolution_buckets_match_unabstracted() {
    let g = reference::reduced_game(GameKind::Random, 5, 40, &TreeConfig::default()).unwrap();
    let mut cfg = AbstractionConfig::new(Method::EvNd, Variant::PcfrPlus, 30, 40, 30);
    cfg.checkpoints = vec![];
    let out = weva_abstract(&g, &cfg).unwrap();
    for p in Player::BOTH {
        assert_eq!(out.mapping.non_empty(p), 40);
    }
    let mut plain = Solver::new(&g, Variant::PcfrPlus);
    plain.run(30).unwrap();
    assert_eq!(out.profile, plain.average_strategy());
}

#[test]
fn pipeline_records_timings_and_log() {
    let g = reference::reduced_game(GameKind::Random, 0, 60, &TreeConfig::default()).unwrap();
    let cfg = AbstractionConfig::new(Method::EvRoot, Variant::dcfr(), 5, 6, 20);
    let out = weva_abstract(&g, &cfg).unwrap();
    assert_eq!(out.log.iter().map(|r| r.iteration).collect::<Vec<_>>(), vec![1, 2, 5, 10, 20]);
    assert!(out.timings.warmup_ms > 0.0 && out.timings.solve_ms > 0.0);
    assert_eq!(out.features[0].cols(), 1);
    assert!(out.mapping.non_empty(Player::P1) <= 6);
    let none = weva_abstract(&g, &AbstractionConfig::new(Method::None, Variant::dcfr(), 5, 6, 20)).unwrap();
    assert_eq!(none.mapping, BucketMapping::identity(60));
    assert!(weva_abstract(&g, &AbstractionConfig::new(Method::EvRoot, Variant::dcfr(), 0, 6, 20)).is_err());
}

#[test]
fn shared_warmup_gives_same_mapping() {
    let g = reference::reduced_game(GameKind::DoubleBoard, 1, 50, &TreeConfig::default()).unwrap();
    let cfg = AbstractionConfig::new(Method::EvNd, Variant::PcfrPlus, 12, 8, 10);
    let warm = WarmupEvs::compute(&g, Variant::PcfrPlus, 12, EvNodes::Own).unwrap();
    let (a, fa, _) = build_mapping(&g, &cfg).unwrap();
    let (b, fb, t) = build_mapping_with(&g, &cfg, Some(&warm)).unwrap();
    assert_eq!((a, fa), (b, fb));
    assert_eq!(t.warmup_ms, warm.ms);
    // a mismatched warm-up is ignored, not misused
    let other = WarmupEvs::compute(&g, Variant::PcfrPlus, 3, EvNodes::Own).unwrap();
    let (c, _, _) = build_mapping_with(&g, &cfg, Some(&other)).unwrap();
    assert_eq!(c, build_mapping(&g, &cfg).unwrap().0);
}
