//! Tuning-parameter search: the `(λ1, λ2)` upper bounds, log-spaced grids,
//! the modified BIC and the warm-started grid search.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::admm::{Admm, AdmmConfig, AdmmState, ResidualRecord};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::losses::{LossKind, LossSpec};
use crate::penalties::PenaltyKind;
use crate::structure::{self, SubgroupStructure};

/// Smallest value allowed inside the BIC logarithm.
pub const LOSS_FLOOR: f64 = 1e-12;
/// Grid value used when an upper bound is not positive.
pub const GRID_FLOOR: f64 = 1e-8;

pub fn log_floor(mean_loss: f64) -> f64 {
    mean_loss.max(LOSS_FLOOR).ln()
}

/// Modified BIC constant: `φ_n = c·log(n)·log(log(n + p))/n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BicSpec {
    pub const_c: f64,
}

impl BicSpec {
    pub fn new(const_c: f64) -> Self {
        Self { const_c }
    }

    /// 10 for L2, 5 for L1 and Huber.
    pub fn for_loss(loss: &LossSpec) -> Self {
        match loss.kind {
            LossKind::L2 => Self::new(10.0),
            LossKind::L1 | LossKind::Huber => Self::new(5.0),
        }
    }

    pub fn phi_n(&self, n: usize, p: usize) -> f64 {
        let nf = n as f64;
        self.const_c * nf.ln() * ((n + p) as f64).ln().ln() / nf
    }
}

fn centered_scores(data: &Dataset, loss: &LossSpec) -> Result<Vec<f64>> {
    let y = data.y().as_slice();
    let c = loss.center(y)?;
    Ok(y.iter().map(|&v| loss.psi(v - c)).collect())
}

/// Smallest fusion level that keeps the homogeneous solution:
/// `(1/n)‖D(DᵀD)⁻ψ‖_∞ = max_{i<j}|ψ_i − ψ_j| / n²`.
pub fn lambda1_max(data: &Dataset, loss: &LossSpec) -> Result<f64> {
    let n = data.n();
    if n < 2 {
        return Err(Error::TooFewObservations);
    }
    let psi = centered_scores(data, loss)?;
    let (lo, hi) = psi
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    Ok((hi - lo) / (n as f64 * n as f64))
}

/// `(1/n)‖Σ_i ψ(y_i − c)·x_i‖_∞`; 0 when there are no covariates.
pub fn lambda2_max(data: &Dataset, loss: &LossSpec) -> Result<f64> {
    let psi = centered_scores(data, loss)?;
    let n = data.n() as f64;
    let x = data.x();
    Ok((0..data.p())
        .map(|j| {
            x.column(j)
                .iter()
                .zip(&psi)
                .map(|(a, b)| a * b)
                .sum::<f64>()
                .abs()
        })
        .fold(0.0, f64::max)
        / n)
}

/// Descending `λ1` and `λ2` sequences for the grid search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaGrid {
    pub lambda1_values: Vec<f64>,
    pub lambda2_values: Vec<f64>,
    /// Leading points of each `λ2` path that are fitted but never selected.
    pub n_burn: usize,
    /// Set when an upper bound was not positive and replaced by [`GRID_FLOOR`].
    pub degenerate: bool,
}

pub const DEFAULT_GRID_POINTS: usize = 20;
pub const DEFAULT_DECADES: f64 = 3.0;
pub const DEFAULT_BURN: usize = 2;

fn log_grid(max: f64, points: usize, decades: f64) -> Vec<f64> {
    (0..points)
        .map(|t| max * 10f64.powf(-decades * t as f64 / (points - 1) as f64))
        .collect()
}

impl LambdaGrid {
    /// A single `(λ1, λ2)` point.
    pub fn single(lambda1: f64, lambda2: f64) -> Self {
        Self {
            lambda1_values: vec![lambda1],
            lambda2_values: vec![lambda2],
            n_burn: 0,
            degenerate: false,
        }
    }

    pub fn len(&self) -> usize {
        self.lambda1_values.len() * self.lambda2_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Flat position of `(a, b)` in traversal order (outer `λ1`, inner `λ2`).
    pub fn flat_index(&self, a: usize, b: usize) -> usize {
        a * self.lambda2_values.len() + b
    }
}

/// Log-spaced descending grids from each maximum down to `max·10^(−decades)`.
///
/// A nonpositive maximum yields a single-point grid at [`GRID_FLOOR`] for that
/// axis and sets the `degenerate` flag.
pub fn make_grid(l1_max: f64, l2_max: f64, n1: usize, n2: usize, decades: f64) -> Result<LambdaGrid> {
    if n1 < 2 || n2 < 2 {
        return Err(Error::InvalidParameter("grids need at least 2 points".into()));
    }
    if decades.is_nan() || decades <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "decades must be positive, got {decades}"
        )));
    }
    let mut degenerate = false;
    let mut axis = |max: f64, points: usize| {
        if max > 0.0 && max.is_finite() {
            log_grid(max, points, decades)
        } else {
            degenerate = true;
            vec![GRID_FLOOR]
        }
    };
    let lambda1_values = axis(l1_max, n1);
    let lambda2_values = axis(l2_max, n2);
    Ok(LambdaGrid {
        lambda1_values,
        lambda2_values,
        n_burn: DEFAULT_BURN,
        degenerate,
    })
}

/// Modified BIC `log((1/n) Σ ρ(y_i − μ̂_i − x_iᵀβ̂)) + (K̂ + ‖β̂‖₀)·φ_n`.
pub fn mbic(
    data: &Dataset,
    loss: &LossSpec,
    fitted_mu: &[f64],
    fitted_beta: &[f64],
    structure: &SubgroupStructure,
    spec: &BicSpec,
) -> Result<f64> {
    let n = data.n();
    let p = data.p();
    if fitted_mu.len() != n || fitted_beta.len() != p {
        return Err(Error::DimensionMismatch(
            "fitted values do not match the data".into(),
        ));
    }
    let x = data.x();
    let y = data.y();
    let total: f64 = (0..n)
        .map(|i| {
            let xb: f64 = (0..p).map(|j| x[(i, j)] * fitted_beta[j]).sum();
            loss.rho(y[i] - fitted_mu[i] - xb)
        })
        .sum();
    let nonzero = fitted_beta.iter().filter(|&&b| b != 0.0).count();
    Ok(log_floor(total / n as f64) + (structure.k() + nonzero) as f64 * spec.phi_n(n, p))
}

/// One fitted grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub lambda1: f64,
    pub lambda2: f64,
    /// Raw ADMM intercepts.
    pub mu: Vec<f64>,
    /// Raw ADMM coefficients.
    pub beta: Vec<f64>,
    /// Thresholded coefficients; zero pattern defines the active set.
    pub w: Vec<f64>,
    pub structure: SubgroupStructure,
    /// Post-processed intercepts (group centers).
    pub fitted_mu: Vec<f64>,
    pub mbic: f64,
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    /// Residual norms of every sweep in this fit.
    pub history: Vec<ResidualRecord>,
    /// Warm-up point excluded from selection.
    pub burn_in: bool,
}

impl FitReport {
    pub fn k_hat(&self) -> usize {
        self.structure.k()
    }

    pub fn q_hat(&self) -> usize {
        self.structure.q()
    }
}

/// Post-processes a fitted state and scores it.
pub fn report_for_state(
    data: &Dataset,
    cfg: &AdmmConfig,
    state: &AdmmState,
    spec: &BicSpec,
    k_max: usize,
) -> Result<FitReport> {
    let structure = structure::extract_structure(state, k_max)?;
    let fitted_mu = structure.fitted_mu();
    let w: Vec<f64> = state.w.iter().copied().collect();
    let mbic = mbic(data, &cfg.loss, &fitted_mu, &w, &structure, spec)?;
    Ok(FitReport {
        lambda1: cfg.lambda1(),
        lambda2: cfg.lambda2(),
        mu: state.mu.iter().copied().collect(),
        beta: state.beta.iter().copied().collect(),
        w,
        structure,
        fitted_mu,
        mbic,
        iterations: state.iter,
        primal_residual: state.primal_norm,
        dual_residual: state.dual_norm,
        history: state.history.clone(),
        burn_in: false,
    })
}

/// Options for [`grid_search`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchOptions {
    pub bic: BicSpec,
    pub k_max: usize,
    /// Warm-start along each `λ2` path; when off every point starts cold.
    pub warm_start: bool,
}

impl SearchOptions {
    pub fn for_loss(loss: &LossSpec) -> Self {
        Self {
            bic: BicSpec::for_loss(loss),
            k_max: structure::DEFAULT_K_MAX,
            warm_start: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSearch {
    /// Reports in traversal order (outer `λ1`, inner `λ2`, both descending).
    pub reports: Vec<FitReport>,
    pub best: usize,
}

impl GridSearch {
    pub fn best_report(&self) -> &FitReport {
        &self.reports[self.best]
    }
}

fn fit_point(
    data: &Dataset,
    template: &AdmmConfig,
    (lambda1, lambda2): (f64, f64),
    warm: Option<&AdmmState>,
    opts: &SearchOptions,
) -> Result<(AdmmState, FitReport)> {
    let cfg = template.with_lambdas(lambda1, lambda2);
    let annotate = |e: Error| Error::GridPoint {
        lambda1,
        lambda2,
        source: Box::new(e),
    };
    let state = Admm::new(data, cfg)
        .and_then(|admm| admm.fit(warm))
        .map_err(annotate)?;
    let report = report_for_state(data, &cfg, &state, &opts.bic, opts.k_max).map_err(annotate)?;
    Ok((state, report))
}

/// Fits every grid point and selects the one with the smallest modified BIC.
///
/// Points are visited with `λ1` outer and `λ2` inner, both descending. In
/// warm-start mode every fit starts from the previous fit in that order, the
/// first one from the homogeneous state; otherwise all points start cold and
/// run in parallel. The first `n_burn` points of each `λ2` sweep are skipped
/// during selection unless nothing else is available. Ties go to the larger
/// `λ1`, then the larger `λ2`.
pub fn grid_search(
    data: &Dataset,
    template: &AdmmConfig,
    grid: &LambdaGrid,
    opts: &SearchOptions,
) -> Result<GridSearch> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("empty λ grid".into()));
    }
    template.validate()?;
    let points: Vec<(usize, (f64, f64))> = grid
        .lambda1_values
        .iter()
        .flat_map(|&l1| {
            grid.lambda2_values
                .iter()
                .enumerate()
                .map(move |(b, &l2)| (b, (l1, l2)))
        })
        .collect();
    let mut reports = if opts.warm_start {
        let mut warm: Option<AdmmState> = None;
        let mut out = Vec::with_capacity(points.len());
        for &(_, lambdas) in &points {
            let (state, report) = fit_point(data, template, lambdas, warm.as_ref(), opts)?;
            out.push(report);
            warm = Some(state);
        }
        out
    } else {
        points
            .par_iter()
            .map(|&(_, lambdas)| fit_point(data, template, lambdas, None, opts).map(|r| r.1))
            .collect::<Result<Vec<_>>>()?
    };
    for (report, &(b, _)) in reports.iter_mut().zip(&points) {
        report.burn_in = b < grid.n_burn;
    }
    let best = select_best(&reports);
    Ok(GridSearch { reports, best })
}

/// Index of the smallest modified BIC among non-burn-in reports; the first
/// in traversal order wins ties.
pub fn select_best(reports: &[FitReport]) -> usize {
    let pick = |allow_burn: bool| {
        reports
            .iter()
            .enumerate()
            .filter(|(_, r)| allow_burn || !r.burn_in)
            .fold(None::<(usize, f64)>, |acc, (i, r)| match acc {
                Some((_, v)) if r.mbic >= v => acc,
                _ => Some((i, r.mbic)),
            })
            .map(|(i, _)| i)
    };
    pick(false).or_else(|| pick(true)).unwrap_or(0)
}

/// Everything needed to tune a dataset from scratch: solver template, grid
/// shape and selection options.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TuneConfig {
    pub admm: AdmmConfig,
    pub grid_n1: usize,
    pub grid_n2: usize,
    pub decades: f64,
    pub n_burn: usize,
    pub search: SearchOptions,
}

impl TuneConfig {
    /// Early-stopped path settings with a 20×20 grid over three decades.
    pub fn new(loss: LossSpec, penalty: PenaltyKind) -> Self {
        Self {
            admm: AdmmConfig::path(loss, penalty),
            grid_n1: DEFAULT_GRID_POINTS,
            grid_n2: DEFAULT_GRID_POINTS,
            decades: DEFAULT_DECADES,
            n_burn: DEFAULT_BURN,
            search: SearchOptions::for_loss(&loss),
        }
    }

    /// Grid spanned from the data-driven upper bounds.
    pub fn grid_for(&self, data: &Dataset) -> Result<LambdaGrid> {
        let l1 = lambda1_max(data, &self.admm.loss)?;
        let l2 = lambda2_max(data, &self.admm.loss)?;
        let mut grid = make_grid(l1, l2, self.grid_n1, self.grid_n2, self.decades)?;
        grid.n_burn = self.n_burn;
        Ok(grid)
    }
}

/// Builds the grid for `data` and runs [`grid_search`] over it.
pub fn tune(data: &Dataset, cfg: &TuneConfig) -> Result<(LambdaGrid, GridSearch)> {
    let grid = cfg.grid_for(data)?;
    let search = grid_search(data, &cfg.admm, &grid, &cfg.search)?;
    Ok((grid, search))
}
