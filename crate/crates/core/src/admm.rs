//! ADMM for the fused, penalized M-regression
//!
//! ```text
//! min (1/n) Σ ρ(z_i) + Σ_{i<j} P_λ1(s_ij) + Σ_j P_λ2(w_j)
//! s.t. z = y − μ − Xβ,  s = Dμ,  w = β
//! ```
//!
//! Each sweep updates `β → μ → z → s → w` and then the three multipliers
//! `(q1, q2, q3)`. All pairwise quantities are handled through
//! [`crate::fusion`] so `D` is never stored.

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::fusion::{self, pair_count, BetaSolver};
use crate::losses::LossSpec;
use crate::penalties::{PenaltyKind, PenaltySpec};

const PAR_CHUNK: usize = 1 << 14;

/// Default fusion augmentation constant. Intercept differences relax at a
/// rate of order `1/(n²·r2)` per sweep, so this sits just above the smallest
/// value the default SCAD and MCP proxes allow (`1/(γ−1)` and `1/γ`).
pub const DEFAULT_R2: f64 = 0.4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdmmConfig {
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
    pub max_iter: usize,
    pub tol: f64,
    pub loss: LossSpec,
    /// Penalty on pairwise intercept differences (`λ1`, `γ1`).
    pub fusion_penalty: PenaltySpec,
    /// Penalty on covariate coefficients (`λ2`, `γ2`).
    pub coef_penalty: PenaltySpec,
}

impl AdmmConfig {
    /// Loose early-stopped settings used along a tuning path.
    pub fn path(loss: LossSpec, penalty: PenaltyKind) -> Self {
        Self {
            r1: 1.0,
            r2: DEFAULT_R2,
            r3: 1.0,
            max_iter: 50,
            tol: 1e-3,
            loss,
            fusion_penalty: PenaltySpec::with_default_gamma(penalty, 0.0),
            coef_penalty: PenaltySpec::with_default_gamma(penalty, 0.0),
        }
    }

    /// Settings for a fit that is run to (near) convergence.
    pub fn converged(loss: LossSpec, penalty: PenaltyKind) -> Self {
        Self {
            max_iter: 1000,
            tol: 1e-5,
            ..Self::path(loss, penalty)
        }
    }

    pub fn with_lambdas(mut self, lambda1: f64, lambda2: f64) -> Self {
        self.fusion_penalty.lambda = lambda1;
        self.coef_penalty.lambda = lambda2;
        self
    }

    pub fn lambda1(&self) -> f64 {
        self.fusion_penalty.lambda
    }

    pub fn lambda2(&self) -> f64 {
        self.coef_penalty.lambda
    }

    pub fn validate(&self) -> Result<()> {
        for (name, r) in [("r1", self.r1), ("r2", self.r2), ("r3", self.r3)] {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive, got {r}"
                )));
            }
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter("max_iter must be ≥ 1".into()));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "tol must be positive, got {}",
                self.tol
            )));
        }
        self.loss.validate()?;
        self.fusion_penalty.check_prox(self.r2)?;
        self.coef_penalty.check_prox(self.r3)?;
        Ok(())
    }
}

/// Primal and dual residual norms after one sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualRecord {
    pub primal: f64,
    pub dual: f64,
}

/// All ADMM iterates.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmmState {
    pub beta: DVector<f64>,
    pub mu: DVector<f64>,
    pub z: DVector<f64>,
    /// Pairwise differences, lexicographic order.
    pub s: Vec<f64>,
    pub w: DVector<f64>,
    pub q1: DVector<f64>,
    pub q2: Vec<f64>,
    pub q3: DVector<f64>,
    pub iter: usize,
    pub primal_norm: f64,
    pub dual_norm: f64,
    pub history: Vec<ResidualRecord>,
}

impl AdmmState {
    pub fn n(&self) -> usize {
        self.mu.len()
    }

    pub fn p(&self) -> usize {
        self.beta.len()
    }

    fn check_dims(&self, data: &Dataset) -> Result<()> {
        let (n, p) = (data.n(), data.p());
        let m = pair_count(n);
        let ok = self.mu.len() == n
            && self.z.len() == n
            && self.q1.len() == n
            && self.beta.len() == p
            && self.w.len() == p
            && self.q3.len() == p
            && self.s.len() == m
            && self.q2.len() == m;
        if ok {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(format!(
                "state sized for (n = {}, p = {}) but data has (n = {n}, p = {p})",
                self.mu.len(),
                self.beta.len()
            )))
        }
    }

    /// `max(primal/√len_primal, dual/√len_dual)`, the quantity compared against `tol`.
    pub fn scaled_residual(&self) -> f64 {
        scaled_residual(self.primal_norm, self.dual_norm, self.n(), self.p())
    }
}

/// Residual norms divided by the square root of the stacked residual lengths.
pub fn scaled_residual(primal: f64, dual: f64, n: usize, p: usize) -> f64 {
    let primal_len = (n + pair_count(n) + p).max(1) as f64;
    let dual_len = (n + p).max(1) as f64;
    (primal / primal_len.sqrt()).max(dual / dual_len.sqrt())
}

/// Initial iterates: a copy of `warm`, or the homogeneous start
/// `μ = c·1, β = 0, z = y − μ, s = 0, w = 0, q = 0`.
pub fn init_state(data: &Dataset, cfg: &AdmmConfig, warm: Option<&AdmmState>) -> Result<AdmmState> {
    if let Some(w) = warm {
        w.check_dims(data)?;
        return Ok(w.clone());
    }
    let n = data.n();
    let p = data.p();
    let m = pair_count(n);
    let c = cfg.loss.center(data.y().as_slice())?;
    let mu = DVector::from_element(n, c);
    let z = data.y() - &mu;
    Ok(AdmmState {
        beta: DVector::zeros(p),
        mu,
        z,
        s: vec![0.0; m],
        w: DVector::zeros(p),
        q1: DVector::zeros(n),
        q2: vec![0.0; m],
        q3: DVector::zeros(p),
        iter: 0,
        primal_norm: 0.0,
        dual_norm: 0.0,
        history: Vec::new(),
    })
}

/// ADMM driver bound to one dataset and configuration.
///
/// Holds the factorized coefficient system and pair-sized scratch space.
#[derive(Debug)]
pub struct Admm<'a> {
    data: &'a Dataset,
    cfg: AdmmConfig,
    beta_solver: BetaSolver,
}

#[derive(Debug, Default)]
struct Scratch {
    pair_a: Vec<f64>,
    pair_b: Vec<f64>,
    n_buf: Vec<f64>,
}

impl<'a> Admm<'a> {
    pub fn new(data: &'a Dataset, cfg: AdmmConfig) -> Result<Self> {
        cfg.validate()?;
        let beta_solver = BetaSolver::new(data.x(), cfg.r1, cfg.r3)?;
        Ok(Self {
            data,
            cfg,
            beta_solver,
        })
    }

    pub fn config(&self) -> &AdmmConfig {
        &self.cfg
    }

    pub fn init(&self, warm: Option<&AdmmState>) -> Result<AdmmState> {
        init_state(self.data, &self.cfg, warm)
    }

    /// One full sweep, returning the next state.
    pub fn step(&self, state: &AdmmState) -> Result<AdmmState> {
        state.check_dims(self.data)?;
        let mut next = state.clone();
        let mut scratch = Scratch::default();
        let rec = self.step_in_place(&mut next, &mut scratch)?;
        next.history.push(rec);
        Ok(next)
    }

    fn step_in_place(&self, st: &mut AdmmState, scratch: &mut Scratch) -> Result<ResidualRecord> {
        let cfg = &self.cfg;
        let (r1, r2, r3) = (cfg.r1, cfg.r2, cfg.r3);
        let data = self.data;
        let x = data.x();
        let y = data.y();
        let n = data.n();
        let m = pair_count(n);
        scratch.pair_a.resize(m, 0.0);
        scratch.pair_b.resize(m, 0.0);
        scratch.n_buf.resize(n, 0.0);
        let iter = st.iter + 1;
        let diverged = |what: &str| Error::Divergence {
            iter,
            detail: format!("non-finite {what}"),
        };

        // β-update
        let target = y - &st.mu - &st.z;
        st.beta = self
            .beta_solver
            .solve(x, &target, &st.w, &st.q1, &st.q3)
            .map_err(|_| diverged("coefficient update operands"))?;
        let xb = x * &st.beta;

        // μ-update: rhs = r1(y − Xβ − z) + q1 + Dᵀ(r2·s − q2)
        {
            let tmp = &mut scratch.pair_a;
            for ((t, s), q) in tmp.iter_mut().zip(&st.s).zip(&st.q2) {
                *t = r2 * s - q;
            }
            fusion::d_transpose_apply_into(tmp, &mut scratch.n_buf);
        }
        for i in 0..n {
            st.mu[i] = r1 * (y[i] - xb[i] - st.z[i]) + st.q1[i] + scratch.n_buf[i];
        }
        fusion::mu_solve_in_place(st.mu.as_mut_slice(), r1, r2);

        // z-update; keep Δz for the dual residual
        let mut dz = DVector::zeros(n);
        for i in 0..n {
            let v = y[i] - st.mu[i] - xb[i] + st.q1[i] / r1;
            let znew = cfg.loss.prox_z(v, n, r1);
            dz[i] = znew - st.z[i];
            st.z[i] = znew;
        }

        // s-update on u = Dμ + q2/r2; pair_a ← Dμ, pair_b ← Δs
        fusion::d_apply_into(st.mu.as_slice(), &mut scratch.pair_a);
        let fusion_pen = cfg.fusion_penalty;
        let update_s = |((s, ds), (dmu, q)): ((&mut f64, &mut f64), (&f64, &f64))| {
            let snew = fusion_pen.prox_unchecked(dmu + q / r2, r2);
            *ds = snew - *s;
            *s = snew;
        };
        if m >= 2 * PAR_CHUNK {
            st.s
                .par_iter_mut()
                .zip(scratch.pair_b.par_iter_mut())
                .zip(scratch.pair_a.par_iter().zip(st.q2.par_iter()))
                .with_min_len(PAR_CHUNK)
                .for_each(update_s);
        } else {
            st.s.iter_mut()
                .zip(scratch.pair_b.iter_mut())
                .zip(scratch.pair_a.iter().zip(st.q2.iter()))
                .for_each(update_s);
        }

        // w-update
        let p = data.p();
        let mut dw = DVector::zeros(p);
        for j in 0..p {
            let wnew = cfg
                .coef_penalty
                .prox_unchecked(st.beta[j] + st.q3[j] / r3, r3);
            dw[j] = wnew - st.w[j];
            st.w[j] = wnew;
        }

        // multipliers and primal residual
        let mut primal_sq = 0.0;
        for i in 0..n {
            let r = y[i] - st.mu[i] - xb[i] - st.z[i];
            primal_sq += r * r;
            st.q1[i] += r1 * r;
        }
        let mut pair_sq = 0.0;
        for ((q, dmu), s) in st.q2.iter_mut().zip(&scratch.pair_a).zip(&st.s) {
            let r = dmu - s;
            pair_sq += r * r;
            *q += r2 * r;
        }
        primal_sq += pair_sq;
        for j in 0..p {
            let r = st.beta[j] - st.w[j];
            primal_sq += r * r;
            st.q3[j] += r3 * r;
        }

        // dual residual: [r1Δz − r2·DᵀΔs ; r1·XᵀΔz − r3·Δw]
        fusion::d_transpose_apply_into(&scratch.pair_b, &mut scratch.n_buf);
        let mut dual_sq: f64 = (0..n)
            .map(|i| (r1 * dz[i] - r2 * scratch.n_buf[i]).powi(2))
            .sum();
        if p > 0 {
            let xt_dz = x.tr_mul(&dz);
            dual_sq += (0..p).map(|j| (r1 * xt_dz[j] - r3 * dw[j]).powi(2)).sum::<f64>();
        }

        let rec = ResidualRecord {
            primal: primal_sq.sqrt(),
            dual: dual_sq.sqrt(),
        };
        let q2_total: f64 = st.q2.iter().sum();
        if !(rec.primal.is_finite()
            && rec.dual.is_finite()
            && q2_total.is_finite()
            && st.q1.iter().all(|v| v.is_finite())
            && st.q3.iter().all(|v| v.is_finite()))
        {
            return Err(diverged("iterate"));
        }
        st.iter = iter;
        st.primal_norm = rec.primal;
        st.dual_norm = rec.dual;
        Ok(rec)
    }

    /// Runs sweeps until the scaled residual drops to `tol` or `max_iter` is reached.
    ///
    /// At least one sweep is always performed. The returned state's `iter` and
    /// `history` count only this call's sweeps.
    pub fn fit(&self, warm: Option<&AdmmState>) -> Result<AdmmState> {
        let mut st = self.init(warm)?;
        st.iter = 0;
        st.history.clear();
        let mut scratch = Scratch::default();
        let (n, p) = (self.data.n(), self.data.p());
        while st.iter < self.cfg.max_iter {
            let rec = self.step_in_place(&mut st, &mut scratch)?;
            st.history.push(rec);
            if scaled_residual(rec.primal, rec.dual, n, p) <= self.cfg.tol {
                break;
            }
        }
        Ok(st)
    }
}

/// One ADMM sweep; see [`Admm::step`].
pub fn admm_step(state: &AdmmState, data: &Dataset, cfg: &AdmmConfig) -> Result<AdmmState> {
    Admm::new(data, *cfg)?.step(state)
}

/// Runs ADMM from `warm` (or the homogeneous start); see [`Admm::fit`].
pub fn fit(data: &Dataset, cfg: &AdmmConfig, warm: Option<&AdmmState>) -> Result<AdmmState> {
    Admm::new(data, *cfg)?.fit(warm)
}

/// Residual norms between two consecutive states, evaluated from scratch.
///
/// The primal block is `[y − μ − Xβ − z ; Dμ − s ; β − w]` at `next`; the dual
/// block is `[r1Δz − r2·DᵀΔs ; r1·XᵀΔz − r3·Δw]`.
pub fn residuals(
    prev: &AdmmState,
    next: &AdmmState,
    data: &Dataset,
    cfg: &AdmmConfig,
) -> Result<(f64, f64)> {
    prev.check_dims(data)?;
    next.check_dims(data)?;
    let n = data.n();
    let r_fit = data.y() - &next.mu - data.x() * &next.beta - &next.z;
    let mut dmu = vec![0.0; pair_count(n)];
    fusion::d_apply_into(next.mu.as_slice(), &mut dmu);
    let pair_sq: f64 = dmu
        .iter()
        .zip(&next.s)
        .map(|(a, b)| (a - b).powi(2))
        .sum();
    let primal = (r_fit.norm_squared() + pair_sq + (&next.beta - &next.w).norm_squared()).sqrt();

    let dz = &next.z - &prev.z;
    let ds: Vec<f64> = next.s.iter().zip(&prev.s).map(|(a, b)| a - b).collect();
    let dts = fusion::d_transpose_apply(&ds, n)?;
    let top: f64 = (0..n)
        .map(|i| (cfg.r1 * dz[i] - cfg.r2 * dts[i]).powi(2))
        .sum();
    let bottom = data.x().tr_mul(&dz) * cfg.r1 - (&next.w - &prev.w) * cfg.r3;
    Ok((primal, (top + bottom.norm_squared()).sqrt()))
}

/// The penalized objective `(1/n)Σρ(y − μ − Xβ) + Σ_{i<j} P_λ1(μ_i − μ_j) + Σ_j P_λ2(β_j)`.
pub fn objective(data: &Dataset, cfg: &AdmmConfig, mu: &[f64], beta: &[f64]) -> f64 {
    let n = data.n();
    let xb = data.x() * DVector::from_column_slice(beta);
    let loss: f64 = (0..n)
        .map(|i| cfg.loss.rho(data.y()[i] - mu[i] - xb[i]))
        .sum::<f64>()
        / n as f64;
    let mut fusion_pen = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            fusion_pen += cfg.fusion_penalty.value_unchecked(mu[i] - mu[j]);
        }
    }
    let coef_pen: f64 = beta
        .iter()
        .map(|&b| cfg.coef_penalty.value_unchecked(b))
        .sum();
    loss + fusion_pen + coef_pen
}
