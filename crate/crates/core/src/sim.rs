//! Simulation scenarios and the Monte-Carlo benchmark harness.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, StudentT};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::structure::MetricsReport;
use crate::tuning::{tune, TuneConfig};

/// Probability of the wide component in the contaminated-normal errors.
pub const MIXTURE_WEIGHT: f64 = 0.05;
/// Standard deviation of the wide component.
pub const MIXTURE_WIDE_SD: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorKind {
    Gauss,
    T5,
    Mixture,
}

impl ErrorKind {
    /// One standardized error draw and whether it came from the wide
    /// mixture component.
    pub fn draw<R: Rng + ?Sized>(self, rng: &mut R) -> (f64, bool) {
        match self {
            ErrorKind::Gauss => (rng.sample(StandardNormal), false),
            ErrorKind::T5 => (StudentT::new(5.0).expect("valid dof").sample(rng), false),
            ErrorKind::Mixture => {
                let wide = rng.random_bool(MIXTURE_WEIGHT);
                let z: f64 = rng.sample(StandardNormal);
                if wide {
                    (MIXTURE_WIDE_SD * z, true)
                } else {
                    (z, false)
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimScenario {
    pub n: usize,
    pub p: usize,
    pub q: usize,
    pub centers: Vec<f64>,
    pub beta_active: Vec<f64>,
    pub error_kind: ErrorKind,
    pub error_scale: f64,
    pub seed: u64,
}

impl SimScenario {
    /// Unit active coefficients and error scale 0.5.
    pub fn new(n: usize, p: usize, q: usize, centers: Vec<f64>, error_kind: ErrorKind, seed: u64) -> Self {
        Self {
            n,
            p,
            q,
            centers,
            beta_active: vec![1.0; q],
            error_kind,
            error_scale: 0.5,
            seed,
        }
    }

    /// Two groups at `{−1, 1}` with `p = q = 5`.
    pub fn two_groups(n: usize, error_kind: ErrorKind, seed: u64) -> Self {
        Self::new(n, 5, 5, vec![-1.0, 1.0], error_kind, seed)
    }

    /// Three groups at `{−2, 0, 2}` with `p = q = 5`.
    pub fn three_groups(n: usize, error_kind: ErrorKind, seed: u64) -> Self {
        Self::new(n, 5, 5, vec![-2.0, 0.0, 2.0], error_kind, seed)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::TooFewObservations);
        }
        if self.q > self.p {
            return Err(Error::InvalidParameter(format!(
                "q = {} exceeds p = {}",
                self.q, self.p
            )));
        }
        if self.beta_active.len() != self.q {
            return Err(Error::DimensionMismatch(format!(
                "{} active coefficients for q = {}",
                self.beta_active.len(),
                self.q
            )));
        }
        if self.centers.is_empty() {
            return Err(Error::InvalidParameter("no group centers".into()));
        }
        let mut sorted = self.centers.clone();
        sorted.sort_by(f64::total_cmp);
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidParameter("group centers must be distinct".into()));
        }
        if self
            .centers
            .iter()
            .chain(&self.beta_active)
            .any(|v| !v.is_finite())
        {
            return Err(Error::NonFinite("scenario parameters".into()));
        }
        if !(self.error_scale >= 0.0 && self.error_scale.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "error scale must be nonnegative, got {}",
                self.error_scale
            )));
        }
        Ok(())
    }

    /// Full coefficient vector `(beta_active, 0)`.
    pub fn beta(&self) -> Vec<f64> {
        let mut b = self.beta_active.clone();
        b.resize(self.p, 0.0);
        b
    }
}

/// Data-generating truth for one simulated dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimTruth {
    pub mu: Vec<f64>,
    pub beta: Vec<f64>,
    pub assignment: Vec<usize>,
    /// Which errors came from the wide mixture component.
    pub wide_error: Vec<bool>,
}

/// Random stream for replicate `rep`; depends only on `(seed, rep)`.
pub fn rep_rng(seed: u64, rep: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(rep);
    rng
}

/// Replicate 0 of the scenario.
pub fn simulate(s: &SimScenario) -> Result<(Dataset, SimTruth)> {
    simulate_rep(s, 0)
}

pub fn simulate_rep(s: &SimScenario, rep: u64) -> Result<(Dataset, SimTruth)> {
    s.validate()?;
    let mut rng = rep_rng(s.seed, rep);
    let (n, p) = (s.n, s.p);
    let beta = s.beta();
    let mut x = DMatrix::zeros(n, p);
    let mut y = DVector::zeros(n);
    let mut mu = Vec::with_capacity(n);
    let mut assignment = Vec::with_capacity(n);
    let mut wide_error = Vec::with_capacity(n);
    for i in 0..n {
        let g = rng.random_range(0..s.centers.len());
        let mut lin = s.centers[g];
        for j in 0..p {
            let v: f64 = rng.sample(StandardNormal);
            x[(i, j)] = v;
            lin += v * beta[j];
        }
        let (e, wide) = s.error_kind.draw(&mut rng);
        y[i] = lin + s.error_scale * e;
        mu.push(s.centers[g]);
        assignment.push(g);
        wide_error.push(wide);
    }
    let data = Dataset::new(y, x)?;
    Ok((
        data,
        SimTruth {
            mu,
            beta,
            assignment,
            wide_error,
        },
    ))
}

/// Metrics for one replicate, or the error that stopped it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepOutcome {
    pub rep: u64,
    pub metrics: Option<MetricsReport>,
    pub error: Option<String>,
}

/// Simulate, tune and score replicate `rep`.
pub fn run_rep(s: &SimScenario, rep: u64, method: &TuneConfig) -> Result<MetricsReport> {
    let (data, truth) = simulate_rep(s, rep)?;
    let (_, search) = tune(&data, method)?;
    let best = search.best_report();
    MetricsReport::evaluate(
        &best.structure,
        &best.fitted_mu,
        &best.w,
        &truth.mu,
        &truth.beta,
        &truth.assignment,
    )
}

/// `mean(sd)` of one metric across successful replicates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean: f64,
    pub sd: f64,
    pub median: f64,
}

impl Moments {
    /// Sample standard deviation (divisor `len − 1`, 0 for a single value).
    pub fn of(values: &[f64]) -> Self {
        if values.is_empty() {
            return Self {
                mean: f64::NAN,
                sd: f64::NAN,
                median: f64::NAN,
            };
        }
        let len = values.len() as f64;
        let mean = values.iter().sum::<f64>() / len;
        let sd = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (len - 1.0)).sqrt()
        } else {
            0.0
        };
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let mid = sorted.len() / 2;
        let median = if sorted.len() % 2 == 1 {
            sorted[mid]
        } else {
            0.5 * (sorted[mid - 1] + sorted[mid])
        };
        Self { mean, sd, median }
    }
}

/// One row of a benchmark table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub label: String,
    pub reps: usize,
    pub failures: usize,
    pub mae_mu: Moments,
    pub mae_beta: Moments,
    pub k_hat: Moments,
    pub q_hat: Moments,
    pub rand_index: Moments,
    pub outcomes: Vec<RepOutcome>,
}

impl SummaryRow {
    pub fn from_outcomes(label: impl Into<String>, outcomes: Vec<RepOutcome>) -> Self {
        let ok: Vec<&MetricsReport> = outcomes.iter().filter_map(|o| o.metrics.as_ref()).collect();
        let col = |f: &dyn Fn(&MetricsReport) -> f64| Moments::of(&ok.iter().map(|m| f(m)).collect::<Vec<_>>());
        Self {
            label: label.into(),
            reps: outcomes.len(),
            failures: outcomes.len() - ok.len(),
            mae_mu: col(&|m| m.mae_mu),
            mae_beta: col(&|m| m.mae_beta),
            k_hat: col(&|m| m.k_hat as f64),
            q_hat: col(&|m| m.q_hat as f64),
            rand_index: col(&|m| m.rand_index),
            outcomes,
        }
    }

    pub fn header() -> &'static str {
        "Method | MAE_mu | MAE_beta | K_mean | K_med | q_mean | q_med | RI_mean | RI_med | failures"
    }
}

fn cell(m: &Moments) -> String {
    format!("{:.3}({:.3})", m.mean, m.sd)
}

fn short(v: f64) -> String {
    if v.fract() == 0.0 {
        format!("{v:.0}")
    } else {
        format!("{v:.3}")
    }
}

impl fmt::Display for SummaryRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} | {} | {} | {} | {} | {} | {} | {} | {:.3} | {}",
            self.label,
            cell(&self.mae_mu),
            cell(&self.mae_beta),
            cell(&self.k_hat),
            short(self.k_hat.median),
            cell(&self.q_hat),
            short(self.q_hat.median),
            cell(&self.rand_index),
            self.rand_index.median,
            self.failures
        )
    }
}

/// Runs `reps` replicates in parallel and merges them by replicate index.
/// Failed replicates are counted, not fatal.
pub fn run_monte_carlo(s: &SimScenario, reps: usize, method: &TuneConfig) -> Result<SummaryRow> {
    if reps == 0 {
        return Err(Error::InvalidParameter("reps must be ≥ 1".into()));
    }
    s.validate()?;
    method.admm.validate()?;
    let outcomes: Vec<RepOutcome> = (0..reps as u64)
        .into_par_iter()
        .map(|rep| match run_rep(s, rep, method) {
            Ok(m) => RepOutcome {
                rep,
                metrics: Some(m),
                error: None,
            },
            Err(e) => RepOutcome {
                rep,
                metrics: None,
                error: Some(e.to_string()),
            },
        })
        .collect();
    let label = format!("{:?}", method.admm.loss.kind);
    Ok(SummaryRow::from_outcomes(label, outcomes))
}
