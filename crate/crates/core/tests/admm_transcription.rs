mod common;

use common::*;
use nalgebra::{DMatrix, DVector};
use subgroup_fusion::admm::{self, residuals, AdmmConfig, AdmmState};
use subgroup_fusion::structure::extract_structure;
use subgroup_fusion::tuning::{lambda1_max, lambda2_max};
use subgroup_fusion::{Admm, Dataset, LossSpec, PenaltyKind};

struct Dense {
    beta: DVector<f64>,
    mu: DVector<f64>,
    z: DVector<f64>,
    s: DVector<f64>,
    w: DVector<f64>,
    q1: DVector<f64>,
    q2: DVector<f64>,
    q3: DVector<f64>,
}

impl Dense {
    fn from_state(st: &AdmmState) -> Self {
        Self {
            beta: st.beta.clone(),
            mu: st.mu.clone(),
            z: st.z.clone(),
            s: DVector::from_column_slice(&st.s),
            w: st.w.clone(),
            q1: st.q1.clone(),
            q2: DVector::from_column_slice(&st.q2),
            q3: st.q3.clone(),
        }
    }

    /// One sweep written with explicit matrices and inverses.
    fn step(&mut self, data: &Dataset, cfg: &AdmmConfig) {
        let (r1, r2, r3) = (cfg.r1, cfg.r2, cfg.r3);
        let (x, y) = (data.x(), data.y());
        let (n, p) = (data.n(), data.p());
        let d = dense_d(n);

        let a_beta = x.transpose() * x * r1 + DMatrix::identity(p, p) * r3;
        let b_beta = x.transpose() * ((y - &self.mu - &self.z) * r1 + &self.q1) + &self.w * r3 - &self.q3;
        self.beta = a_beta.try_inverse().unwrap() * b_beta;

        let a_mu = DMatrix::identity(n, n) * r1 + d.transpose() * &d * r2;
        let b_mu = (y - x * &self.beta - &self.z) * r1 + &self.q1 + d.transpose() * (&self.s * r2 - &self.q2);
        self.mu = a_mu.try_inverse().unwrap() * b_mu;

        let v = y - &self.mu - x * &self.beta + &self.q1 / r1;
        self.z = v.map(|e| cfg.loss.prox_z(e, n, r1));

        let u = &d * &self.mu + &self.q2 / r2;
        self.s = u.map(|e| cfg.fusion_penalty.prox(e, r2).unwrap());

        let u = &self.beta + &self.q3 / r3;
        self.w = u.map(|e| cfg.coef_penalty.prox(e, r3).unwrap());

        self.q1 += (y - &self.mu - x * &self.beta - &self.z) * r1;
        self.q2 += (&d * &self.mu - &self.s) * r2;
        self.q3 += (&self.beta - &self.w) * r3;
    }

    fn max_gap(&self, st: &AdmmState) -> f64 {
        let pairs = [
            (self.beta.as_slice(), st.beta.as_slice()),
            (self.mu.as_slice(), st.mu.as_slice()),
            (self.z.as_slice(), st.z.as_slice()),
            (self.s.as_slice(), st.s.as_slice()),
            (self.w.as_slice(), st.w.as_slice()),
            (self.q1.as_slice(), st.q1.as_slice()),
            (self.q2.as_slice(), st.q2.as_slice()),
            (self.q3.as_slice(), st.q3.as_slice()),
        ];
        pairs
            .iter()
            .flat_map(|(a, b)| a.iter().zip(b.iter()).map(|(u, v)| (u - v).abs()))
            .fold(0.0, f64::max)
    }
}

fn check_transcription(seed: u64, n: usize, p: usize, loss: LossSpec, pen: PenaltyKind) {
    let mut rng = rng(seed);
    let data = random_dataset(&mut rng, n, p);
    let l1 = lambda1_max(&data, &loss).unwrap() * 0.2;
    let l2 = lambda2_max(&data, &loss).unwrap() * 0.2;
    let cfg = AdmmConfig::converged(loss, pen).with_lambdas(l1, l2);
    let solver = Admm::new(&data, cfg).unwrap();
    let mut st = solver.init(None).unwrap();
    let mut dense = Dense::from_state(&st);
    for it in 0..60 {
        let next = solver.step(&st).unwrap();
        dense.step(&data, &cfg);
        let gap = dense.max_gap(&next);
        assert!(gap < 1e-10, "seed {seed} {loss:?} {pen:?} iter {it}: gap {gap:e}");
        let (pr, du) = residuals(&st, &next, &data, &cfg).unwrap();
        assert!((pr - next.primal_norm).abs() < 1e-10 && (du - next.dual_norm).abs() < 1e-10);
        st = next;
    }
}

#[test]
fn structured_sweep_matches_dense_reference() {
    for (seed, n, p) in [(1, 8, 3), (2, 10, 12)] {
        for loss in [LossSpec::l1(), LossSpec::l2(), LossSpec::huber(1.345)] {
            for pen in [PenaltyKind::Scad, PenaltyKind::Mcp, PenaltyKind::Lasso] {
                check_transcription(seed, n, p, loss, pen);
            }
        }
    }
}

#[test]
fn cold_start_has_no_split_gaps() {
    let mut rng = rng(3);
    let data = random_dataset(&mut rng, 9, 4);
    let cfg = AdmmConfig::path(LossSpec::l1(), PenaltyKind::Scad).with_lambdas(0.01, 0.01);
    let st = admm::init_state(&data, &cfg, None).unwrap();
    let dmu = subgroup_fusion::fusion::d_apply(st.mu.as_slice()).unwrap();
    assert!(dmu.iter().zip(&st.s).all(|(a, b)| a == b));
    assert_eq!(st.beta, st.w);
}

#[test]
fn converged_fit_improves_on_cold_start_objective() {
    let mut rng = rng(4);
    for loss in [LossSpec::l1(), LossSpec::l2(), LossSpec::huber(1.345)] {
        let data = random_dataset(&mut rng, 30, 4);
        let l1 = lambda1_max(&data, &loss).unwrap() * 0.05;
        let l2 = lambda2_max(&data, &loss).unwrap() * 0.05;
        let cfg = AdmmConfig::converged(loss, PenaltyKind::Scad).with_lambdas(l1, l2);
        let cold = admm::init_state(&data, &cfg, None).unwrap();
        let st = admm::fit(&data, &cfg, None).unwrap();
        let structure = extract_structure(&st, 10).unwrap();
        let before = admm::objective(&data, &cfg, cold.mu.as_slice(), cold.beta.as_slice());
        let after = admm::objective(&data, &cfg, &structure.fitted_mu(), st.w.as_slice());
        assert!(after <= before + 1e-12, "{loss:?}: {after} > {before}");
    }
}

#[test]
fn warm_started_path_stays_finite() {
    let mut rng = rng(5);
    let data = random_dataset(&mut rng, 40, 6);
    let loss = LossSpec::huber(1.345);
    let l1 = lambda1_max(&data, &loss).unwrap();
    let l2 = lambda2_max(&data, &loss).unwrap();
    let mut warm: Option<AdmmState> = None;
    for k in 0..15 {
        let f = 10f64.powf(-(k as f64) / 5.0);
        let cfg = AdmmConfig::path(loss, PenaltyKind::Mcp).with_lambdas(l1 * f, l2 * f);
        let st = admm::fit(&data, &cfg, warm.as_ref()).unwrap();
        assert!(st.mu.iter().chain(st.beta.iter()).chain(st.q2.iter()).all(|v| v.is_finite()));
        warm = Some(st);
    }
}
