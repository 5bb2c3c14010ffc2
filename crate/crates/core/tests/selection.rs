use delta_core::graph::{khop, Graph};
use delta_core::numerics::DenseMatrix;
use delta_core::select::{
    baseline_select, candidates, domain_discrepancy, inconsistency, kmeans, rank_top_k, select,
    topo_uncertainty, weighted_khop_logits, BaselineInputs, BaselineKind, SelectConfig,
};
use delta_core::subnet::DualLogits;
use delta_core::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_matrix(rows: usize, cols: usize, scale: f64, rng: &mut ChaCha8Rng) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols, |_, _| scale * (2.0 * rng.random::<f64>() - 1.0))
}

fn random_graph(n: usize, p: f64, features: DenseMatrix, labeled: Vec<bool>, rng: &mut ChaCha8Rng) -> Graph {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < p {
                edges.push((i, j));
            }
        }
    }
    let labels = labeled.iter().enumerate().map(|(i, &l)| l.then_some(i % 3)).collect();
    Graph::from_edges(&edges, features, labels, labeled, 3).unwrap()
}

struct Fixture {
    source: Graph,
    target: Graph,
    dual: DualLogits,
}

fn fixture(seed: u64, n: usize) -> Fixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xs = random_matrix(12, 4, 1.0, &mut rng);
    let source_mask = (0..12).map(|i| i % 2 == 0).collect();
    let source = random_graph(12, 0.3, xs, source_mask, &mut rng);
    let xt = random_matrix(n, 4, 1.5, &mut rng);
    let target_mask = (0..n).map(|i| i % 7 == 3).collect();
    let target = random_graph(n, 0.2, xt, target_mask, &mut rng);
    let dual = DualLogits::new(random_matrix(n, 3, 2.0, &mut rng), random_matrix(n, 3, 2.0, &mut rng)).unwrap();
    Fixture { source, target, dual }
}

fn entropy_oracle(v: &[f64]) -> f64 {
    let z: f64 = v.iter().map(|x| x.exp()).sum();
    -v.iter().map(|x| x.exp() / z).map(|p| if p > 0.0 { p * p.ln() } else { 0.0 }).sum::<f64>()
}

fn unlabeled_path3() -> Graph {
    Graph::from_edges(&[(0, 1), (1, 2)], DenseMatrix::zeros(3, 2), vec![None; 3], vec![false; 3], 5).unwrap()
}

#[test]
fn inconsistency_hand_values() {
    let a = DenseMatrix::from_rows(&[[1.0, 0.0, 0.0, 0.0, 0.0], [0.3, 0.2, 0.1, 0.0, 0.0]]).unwrap();
    let b = DenseMatrix::from_rows(&[[0.0, 1.0, 0.0, 0.0, 0.0], [0.3, 0.2, 0.1, 0.0, 0.0]]).unwrap();
    let d = inconsistency(&DualLogits::new(a, b).unwrap());
    assert!((d[0] - 2f64.sqrt()).abs() < 1e-15);
    assert_eq!(d[1], 0.0);
}

#[test]
fn inconsistency_matches_row_norm_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (a, b) = (random_matrix(10, 5, 1.0, &mut rng), random_matrix(10, 5, 1.0, &mut rng));
    let d = inconsistency(&DualLogits::new(a.clone(), b.clone()).unwrap());
    for j in 0..10 {
        let mut sq = 0.0;
        for c in 0..5 {
            sq += (a.get(j, c) - b.get(j, c)).powi(2);
        }
        assert!((d[j] - sq.sqrt()).abs() < 1e-14);
    }
}

#[test]
fn dual_logits_reject_shape_mismatch() {
    assert!(DualLogits::new(DenseMatrix::zeros(3, 2), DenseMatrix::zeros(3, 3)).is_err());
}

#[test]
fn candidate_threshold_is_strict() {
    let set = candidates(&[0.1, 0.3, 0.31, 2.0], 0.3, &[true; 4]).unwrap();
    assert_eq!(set.nodes, vec![2, 3]);
    assert_eq!(set.distances, vec![0.31, 2.0]);
    assert!(candidates(&[0.1, 0.3, 0.31, 2.0], 2.0, &[true; 4]).unwrap().is_empty());
    let all = candidates(&[0.1, 0.3, 0.31, 2.0], 0.0, &[true, false, true, true]).unwrap();
    assert_eq!(all.nodes, vec![0, 2, 3]);
    assert!(candidates(&[0.1], -1.0, &[true]).is_err());
}

#[test]
fn weighted_khop_hand_values() {
    let g = unlabeled_path3();
    let v = [1.0, -2.0, 0.5, 3.0, 0.0];
    let logits = DenseMatrix::from_rows(&[v, v, v]).unwrap();
    let s = weighted_khop_logits(&g, &logits, 1, 1).unwrap();
    for (x, y) in s.iter().zip(v) {
        assert!((x - 2.5 * y).abs() < 1e-15);
    }
    let iso = Graph::from_edges(&[], DenseMatrix::zeros(1, 1), vec![None], vec![false], 5).unwrap();
    let l = DenseMatrix::from_rows(&[v]).unwrap();
    assert_eq!(weighted_khop_logits(&iso, &l, 0, 2).unwrap(), v.to_vec());
}

#[test]
fn weighted_khop_matches_explicit_sum() {
    let f = fixture(2, 30);
    let g = &f.target;
    for center in 0..g.num_nodes() {
        let members = khop(g, center, 2).unwrap().members;
        let mut expected = [0.0; 3];
        for m in members {
            let w = 1.0 / (g.neighbors(m).len().max(1) as f64);
            for c in 0..3 {
                expected[c] += w * f.dual.edge().get(m, c);
            }
        }
        let got = weighted_khop_logits(g, f.dual.edge(), center, 2).unwrap();
        for c in 0..3 {
            assert!((got[c] - expected[c]).abs() < 1e-12);
        }
    }
}

#[test]
fn uniform_logits_reach_maximum_uncertainty() {
    let g = unlabeled_path3();
    let dual = DualLogits::new(DenseMatrix::filled(3, 5, 0.4), DenseMatrix::filled(3, 5, -1.0)).unwrap();
    let u = topo_uncertainty(&g, &dual, &[0, 1, 2], 2).unwrap();
    for x in u {
        assert!((x - 2.0 * 5f64.ln()).abs() < 1e-12);
        assert!((x - 3.2189).abs() < 1e-4);
    }
}

#[test]
fn peaked_logits_have_negligible_uncertainty() {
    let g = Graph::from_edges(&[], DenseMatrix::zeros(1, 1), vec![None], vec![false], 5).unwrap();
    let peaked = DenseMatrix::from_rows(&[[50.0, 0.0, 0.0, 0.0, 0.0]]).unwrap();
    let dual = DualLogits::new(peaked.clone(), peaked).unwrap();
    assert!(topo_uncertainty(&g, &dual, &[0], 2).unwrap()[0] < 1e-6);
}

#[test]
fn uncertainty_matches_entropy_oracle() {
    let f = fixture(3, 25);
    let nodes: Vec<usize> = f.target.unlabeled_nodes();
    let u = topo_uncertainty(&f.target, &f.dual, &nodes, 2).unwrap();
    for (i, &j) in nodes.iter().enumerate() {
        let e = weighted_khop_logits(&f.target, f.dual.edge(), j, 2).unwrap();
        let p = weighted_khop_logits(&f.target, f.dual.path(), j, 2).unwrap();
        assert!((u[i] - entropy_oracle(&e) - entropy_oracle(&p)).abs() < 1e-12);
    }
}

#[test]
fn discrepancy_hand_value() {
    let xs = DenseMatrix::from_rows(&[[0.0, 0.0], [9.0, 9.0], [7.0, 7.0]]).unwrap();
    let source =
        Graph::from_edges(&[(0, 1), (0, 2)], xs, vec![Some(0), None, None], vec![true, false, false], 2).unwrap();
    let xt = DenseMatrix::from_rows(&[[3.0, 4.0], [0.0, 0.0]]).unwrap();
    let target = Graph::from_edges(&[], xt, vec![None; 2], vec![false; 2], 2).unwrap();
    assert_eq!(domain_discrepancy(&source, &target, &[0, 1]).unwrap(), vec![10.0, 0.0]);
    assert_eq!(
        domain_discrepancy(&source.without_supervision(), &target, &[0]).unwrap_err(),
        Error::NoLabeledSource
    );
}

#[test]
fn discrepancy_matches_double_loop() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let xs = random_matrix(14, 3, 1.0, &mut rng);
    let mask: Vec<bool> = (0..14).map(|i| i < 7).collect();
    let source = random_graph(14, 0.3, xs, mask, &mut rng);
    assert_eq!(source.labeled_nodes().len(), 7);
    let xt = random_matrix(9, 3, 2.0, &mut rng);
    let target = random_graph(9, 0.3, xt, vec![false; 9], &mut rng);
    let nodes: Vec<usize> = (0..9).collect();
    let d = domain_discrepancy(&source, &target, &nodes).unwrap();
    for j in 0..9 {
        let mut total = 0.0;
        for i in 0..7 {
            let mut sq = 0.0;
            for c in 0..3 {
                sq += (target.features().get(j, c) - source.features().get(i, c)).powi(2);
            }
            total += source.neighbors(i).len() as f64 * sq.sqrt();
        }
        assert!((d[j] - total / 7.0).abs() < 1e-12);
    }
}

#[test]
fn selection_matches_exhaustive_sort() {
    for seed in 0..4 {
        let f = fixture(10 + seed, 20);
        for normalize in [false, true] {
            let cfg = SelectConfig { gamma: 1.5, budget: 6, normalize, ..SelectConfig::default() };
            let sel = select(&f.source, &f.target, &f.dual, &cfg).unwrap();
            let unlabeled = f.target.unlabeled_mask();
            let dist = inconsistency(&f.dual);
            let pool: Vec<usize> = (0..20).filter(|&j| unlabeled[j] && dist[j] > 1.5).collect();
            let u = topo_uncertainty(&f.target, &f.dual, &pool, 2).unwrap();
            let d = domain_discrepancy(&f.source, &f.target, &pool).unwrap();
            let (u, d) = if normalize { (min_max(&u), min_max(&d)) } else { (u, d) };
            let mut table: Vec<(usize, f64)> = pool.iter().enumerate().map(|(i, &j)| (j, u[i] + d[i])).collect();
            table.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
            let expected: Vec<usize> = table.iter().take(6).map(|e| e.0).collect();
            if pool.len() >= 6 {
                assert_eq!(sel.selected, expected);
            } else {
                assert_eq!(&sel.selected[..pool.len()], &expected[..]);
            }
            assert_eq!(sel.candidate_count, pool.len());
            for row in sel.table.rows.iter().filter(|r| r.candidate && !normalize) {
                assert_eq!(row.composite, row.uncertainty + row.discrepancy);
            }
        }
    }
}

fn min_max(v: &[f64]) -> Vec<f64> {
    let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    v.iter().map(|x| if hi > lo { (x - lo) / (hi - lo) } else { 0.0 }).collect()
}

#[test]
fn budget_equal_to_candidate_count_returns_candidates() {
    let f = fixture(20, 20);
    let dist = inconsistency(&f.dual);
    let set = candidates(&dist, 1.0, &f.target.unlabeled_mask()).unwrap();
    let cfg = SelectConfig { gamma: 1.0, budget: set.len(), ..SelectConfig::default() };
    let mut got = select(&f.source, &f.target, &f.dual, &cfg).unwrap().selected;
    got.sort_unstable();
    assert_eq!(got, set.nodes);
}

#[test]
fn fallback_fills_budget_from_remaining_pool() {
    let f = fixture(21, 20);
    let cfg = SelectConfig { gamma: 1e9, budget: 5, ..SelectConfig::default() };
    let sel = select(&f.source, &f.target, &f.dual, &cfg).unwrap();
    assert_eq!(sel.candidate_count, 0);
    assert_eq!(sel.selected.len(), 5);
    assert!(sel.table.rows.iter().all(|r| !r.candidate));
}

#[test]
fn budget_beyond_pool_is_rejected() {
    let f = fixture(22, 20);
    let pool = f.target.unlabeled_nodes().len();
    let cfg = SelectConfig { budget: pool + 1, ..SelectConfig::default() };
    assert_eq!(
        select(&f.source, &f.target, &f.dual, &cfg).unwrap_err(),
        Error::BudgetExceedsPool { budget: pool + 1, pool }
    );
    let inputs = BaselineInputs { target: &f.target, edge_logits: None, edge_embeddings: None };
    assert!(baseline_select(BaselineKind::Random, inputs, pool + 1, 0).is_err());
}

#[test]
fn equal_scores_break_ties_by_node_id() {
    assert_eq!(rank_top_k(&[(5, 1.0), (2, 1.0), (9, 1.0), (1, 1.0)], 3), vec![1, 2, 5]);
    assert_eq!(rank_top_k(&[(5, 1.0), (2, 3.0), (9, 2.0)], 2), vec![2, 9]);
}

#[test]
fn baseline_hand_cases() {
    let g = unlabeled_path3();
    let inputs = BaselineInputs { target: &g, edge_logits: None, edge_embeddings: None };
    assert_eq!(baseline_select(BaselineKind::Degree, inputs, 1, 0).unwrap(), vec![1]);
    let a = baseline_select(BaselineKind::Random, inputs, 2, 7).unwrap();
    assert_eq!(a, baseline_select(BaselineKind::Random, inputs, 2, 7).unwrap());
    assert_eq!(a.len(), 2);
    assert_ne!(a[0], a[1]);
    assert!(baseline_select(BaselineKind::Uncertainty, inputs, 1, 0).is_err());
}

#[test]
fn uncertainty_baseline_matches_entropy_argmax() {
    let f = fixture(30, 20);
    let logits = f.dual.edge();
    let inputs = BaselineInputs { target: &f.target, edge_logits: Some(logits), edge_embeddings: None };
    let top = baseline_select(BaselineKind::Uncertainty, inputs, 1, 0).unwrap()[0];
    let best = f
        .target
        .unlabeled_nodes()
        .into_iter()
        .max_by(|&a, &b| entropy_oracle(logits.row(a)).partial_cmp(&entropy_oracle(logits.row(b))).unwrap())
        .unwrap();
    assert_eq!(top, best);
}

#[test]
fn density_baseline_prefers_points_near_centroids() {
    let emb = DenseMatrix::from_rows(&[[0.0, 0.0], [0.1, 0.0], [-0.1, 0.0], [10.0, 10.0], [10.0, 10.1], [3.0, 3.0]])
        .unwrap();
    let g = Graph::from_edges(&[], DenseMatrix::zeros(6, 1), vec![None; 6], vec![false; 6], 2).unwrap();
    let inputs = BaselineInputs { target: &g, edge_logits: None, edge_embeddings: Some(&emb) };
    let picked = baseline_select(BaselineKind::Density, inputs, 5, 1).unwrap();
    assert!(!picked.contains(&5), "{picked:?}");
    let km = kmeans(&emb, 2, 50, 1).unwrap();
    assert_eq!(km.assignments[0], km.assignments[1]);
    assert_ne!(km.assignments[0], km.assignments[3]);
}

fn arb_fixture() -> impl Strategy<Value = (u64, usize)> {
    (any::<u64>(), 8usize..30)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn budget_exactness((seed, n) in arb_fixture(), gamma in 0.0f64..4.0, k in 1usize..8) {
        let f = fixture(seed, n);
        let pool = f.target.unlabeled_nodes();
        let k = k.min(pool.len());
        let cfg = SelectConfig { gamma, budget: k, ..SelectConfig::default() };
        let sel = select(&f.source, &f.target, &f.dual, &cfg).unwrap();
        let mut ids = sel.selected.clone();
        ids.sort_unstable();
        ids.dedup();
        prop_assert_eq!(ids.len(), k);
        prop_assert!(ids.iter().all(|j| pool.contains(j)));
        prop_assert_eq!(&sel, &select(&f.source, &f.target, &f.dual, &cfg).unwrap());
    }

    #[test]
    fn threshold_monotonicity(d in prop::collection::vec(0.0f64..3.0, 1..40), a in 0.0f64..3.0, b in 0.0f64..3.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let mask = vec![true; d.len()];
        let wide = candidates(&d, lo, &mask).unwrap();
        let narrow = candidates(&d, hi, &mask).unwrap();
        prop_assert!(narrow.nodes.iter().all(|&j| wide.contains(j)));
    }

    #[test]
    fn uncertainty_is_bounded((seed, n) in arb_fixture(), hops in 0usize..4) {
        let f = fixture(seed, n);
        let nodes = f.target.unlabeled_nodes();
        for u in topo_uncertainty(&f.target, &f.dual, &nodes, hops).unwrap() {
            prop_assert!(u >= -1e-9 && u <= 2.0 * 3f64.ln() + 1e-9);
        }
    }

    #[test]
    fn discrepancy_scales_with_features((seed, n) in arb_fixture(), c in 0.01f64..100.0) {
        let f = fixture(seed, n);
        let scale = |g: &Graph| {
            let x = g.features().scale(c);
            Graph::new(g.adjacency().clone(), x, g.labels().to_vec(), g.labeled_mask().to_vec(), g.num_classes()).unwrap()
        };
        let nodes: Vec<usize> = (0..n).collect();
        let base = domain_discrepancy(&f.source, &f.target, &nodes).unwrap();
        let scaled = domain_discrepancy(&scale(&f.source), &scale(&f.target), &nodes).unwrap();
        for (x, y) in base.iter().zip(&scaled) {
            prop_assert!((c * x - y).abs() <= 1e-12 * y.abs().max(1.0));
        }
        let rank = |v: &[f64]| rank_top_k(&v.iter().copied().enumerate().collect::<Vec<_>>(), n);
        prop_assert_eq!(rank(&base), rank(&scaled));
    }

    #[test]
    fn selection_is_permutation_equivariant((seed, n) in arb_fixture(), rot in 1usize..7) {
        let f = fixture(seed, n);
        let perm: Vec<usize> = (0..n).map(|i| (i * (2 * rot + 1) + rot) % n).collect();
        prop_assume!({ let mut p = perm.clone(); p.sort_unstable(); p.dedup(); p.len() == n });
        let k = 4.min(f.target.unlabeled_nodes().len());
        let cfg = SelectConfig { gamma: 0.5, budget: k, ..SelectConfig::default() };
        let base = select(&f.source, &f.target, &f.dual, &cfg).unwrap();
        let moved = select(&f.source, &f.target.permuted(&perm).unwrap(), &f.dual.permuted(&perm), &cfg).unwrap();
        let mapped: Vec<usize> = base.selected.iter().map(|&j| perm[j]).collect();
        prop_assert_eq!(mapped, moved.selected);
    }
}
