//! Discrete subgroup structure: post-clustering of fitted intercepts,
//! oracle refits under a fixed structure, and evaluation metrics.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::admm::AdmmState;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::losses::{LossKind, LossSpec};
use crate::tuning::{log_floor, BicSpec};

pub const DEFAULT_K_MAX: usize = 10;
const KMEANS_RESTARTS: usize = 20;
const KMEANS_MAX_ITER: usize = 100;

/// Group labels, group intercepts and active covariates.
///
/// Labels are `0..k` and ordered so that `centers` is strictly increasing.
/// `active_set` holds sorted 0-based column indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubgroupStructure {
    pub assignment: Vec<usize>,
    pub centers: Vec<f64>,
    pub active_set: Vec<usize>,
}

impl SubgroupStructure {
    pub fn k(&self) -> usize {
        self.centers.len()
    }

    pub fn q(&self) -> usize {
        self.active_set.len()
    }

    /// `|S| = K + q`.
    pub fn size(&self) -> usize {
        self.k() + self.q()
    }

    /// Per-observation intercepts implied by the group centers.
    pub fn fitted_mu(&self) -> Vec<f64> {
        self.assignment.iter().map(|&g| self.centers[g]).collect()
    }

    /// Builds a structure from labels alone, taking group means of `values`
    /// as centers and relabeling groups in increasing center order.
    pub fn from_labels(labels: &[usize], values: &[f64], active_set: Vec<usize>) -> Result<Self> {
        if labels.len() != values.len() {
            return Err(Error::DimensionMismatch(
                "labels and values differ in length".into(),
            ));
        }
        let k = labels.iter().max().map_or(0, |m| m + 1);
        let mut sums = vec![0.0; k];
        let mut counts = vec![0usize; k];
        for (&g, &v) in labels.iter().zip(values) {
            sums[g] += v;
            counts[g] += 1;
        }
        let used: Vec<usize> = (0..k).filter(|&g| counts[g] > 0).collect();
        let mut order: Vec<(f64, usize)> = used
            .iter()
            .map(|&g| (sums[g] / counts[g] as f64, g))
            .collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut relabel = vec![usize::MAX; k];
        for (new, &(_, old)) in order.iter().enumerate() {
            relabel[old] = new;
        }
        let mut active_set = active_set;
        active_set.sort_unstable();
        active_set.dedup();
        Ok(Self {
            assignment: labels.iter().map(|&g| relabel[g]).collect(),
            centers: order.iter().map(|c| c.0).collect(),
            active_set,
        })
    }

    pub fn validate(&self, n: usize, p: usize) -> Result<()> {
        if self.assignment.len() != n {
            return Err(Error::InvalidStructure(format!(
                "assignment has length {}, expected {n}",
                self.assignment.len()
            )));
        }
        let k = self.k();
        let mut seen = vec![false; k];
        for &g in &self.assignment {
            if g >= k {
                return Err(Error::InvalidStructure(format!("label {g} ≥ K = {k}")));
            }
            seen[g] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidStructure("empty group".into()));
        }
        if self.active_set.windows(2).any(|w| w[0] >= w[1])
            || self.active_set.last().is_some_and(|&j| j >= p)
        {
            return Err(Error::InvalidStructure(
                "active set must be sorted, unique and < p".into(),
            ));
        }
        Ok(())
    }
}

/// Result of 1-D K-means with a fixed number of clusters.
#[derive(Debug, Clone, PartialEq)]
pub struct KMeansFit {
    pub labels: Vec<usize>,
    pub centers: Vec<f64>,
    pub sse: f64,
}

fn lloyd(points: &[f64], mut centers: Vec<f64>) -> KMeansFit {
    let n = points.len();
    let k = centers.len();
    let mut labels = vec![usize::MAX; n];
    for _ in 0..KMEANS_MAX_ITER {
        let mut changed = false;
        for (i, &x) in points.iter().enumerate() {
            let mut best = 0;
            for c in 1..k {
                if (x - centers[c]).abs() < (x - centers[best]).abs() {
                    best = c;
                }
            }
            if labels[i] != best {
                labels[i] = best;
                changed = true;
            }
        }
        let mut sums = vec![0.0; k];
        let mut counts = vec![0usize; k];
        for (&g, &x) in labels.iter().zip(points) {
            sums[g] += x;
            counts[g] += 1;
        }
        for c in 0..k {
            if counts[c] > 0 {
                centers[c] = sums[c] / counts[c] as f64;
            } else {
                // reseed an empty cluster at the worst-fit point
                let far = (0..n)
                    .max_by(|&a, &b| {
                        let da = (points[a] - centers[labels[a]]).abs();
                        let db = (points[b] - centers[labels[b]]).abs();
                        da.total_cmp(&db).then(b.cmp(&a))
                    })
                    .expect("nonempty points");
                centers[c] = points[far];
                labels[far] = c;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let sse = labels
        .iter()
        .zip(points)
        .map(|(&g, &x)| (x - centers[g]).powi(2))
        .sum();
    KMeansFit {
        labels,
        centers,
        sse,
    }
}

fn plus_plus_init(points: &[f64], k: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let n = points.len();
    let mut centers = vec![points[rng.random_range(0..n)]];
    let mut d2: Vec<f64> = points.iter().map(|x| (x - centers[0]).powi(2)).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut t = rng.random::<f64>() * total;
            let mut idx = n - 1;
            for (i, &d) in d2.iter().enumerate() {
                if t < d {
                    idx = i;
                    break;
                }
                t -= d;
            }
            idx
        } else {
            rng.random_range(0..n)
        };
        let c = points[pick];
        centers.push(c);
        for (d, x) in d2.iter_mut().zip(points) {
            *d = d.min((x - c).powi(2));
        }
    }
    centers
}

/// 1-D K-means: one quantile-seeded run plus seeded k-means++ restarts;
/// the lowest SSE wins, ties going to the earliest restart.
///
/// Works on the sorted values, so the result does not depend on input order.
pub fn kmeans_1d(points: &[f64], k: usize) -> Result<KMeansFit> {
    if points.is_empty() {
        return Err(Error::EmptySample);
    }
    if k == 0 || k > points.len() {
        return Err(Error::InvalidParameter(format!(
            "k = {k} invalid for {} points",
            points.len()
        )));
    }
    let order = sort_order(points);
    let sorted: Vec<f64> = order.iter().map(|&i| points[i]).collect();
    let fit = kmeans_sorted(&sorted, k);
    let mut labels = vec![0; points.len()];
    for (pos, &i) in order.iter().enumerate() {
        labels[i] = fit.labels[pos];
    }
    Ok(KMeansFit { labels, ..fit })
}

fn sort_order(points: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| points[a].total_cmp(&points[b]));
    order
}

fn kmeans_sorted(sorted: &[f64], k: usize) -> KMeansFit {
    let n = sorted.len();
    let runs: Vec<KMeansFit> = (0..KMEANS_RESTARTS)
        .into_par_iter()
        .map(|r| {
            let init = if r == 0 {
                (0..k).map(|t| sorted[((2 * t + 1) * n) / (2 * k)]).collect()
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(r as u64);
                plus_plus_init(sorted, k, &mut rng)
            };
            lloyd(sorted, init)
        })
        .collect();
    runs.into_iter()
        .reduce(|best, cand| if cand.sse < best.sse { cand } else { best })
        .expect("at least one restart")
}

/// Average silhouette width in one dimension.
///
/// `a` is the mean distance to the rest of the point's own cluster, `b` the
/// smallest mean distance to another cluster, and each point scores
/// `(b − a)/max(a, b)`; points in singleton clusters score 0.
pub fn silhouette_width(points: &[f64], labels: &[usize]) -> Result<f64> {
    if points.len() != labels.len() {
        return Err(Error::DimensionMismatch(
            "points and labels differ in length".into(),
        ));
    }
    let k = labels.iter().max().map_or(0, |m| m + 1);
    let mut counts = vec![0usize; k];
    for &g in labels {
        counts[g] += 1;
    }
    if counts.iter().filter(|&&c| c > 0).count() < 2 {
        return Err(Error::SilhouetteSingleCluster);
    }
    if counts.contains(&0) {
        return Err(Error::InvalidParameter("labels must be contiguous".into()));
    }
    let mut total = 0.0;
    let mut sums = vec![0.0; k];
    for (i, &xi) in points.iter().enumerate() {
        let own = labels[i];
        if counts[own] == 1 {
            continue;
        }
        sums.iter_mut().for_each(|s| *s = 0.0);
        for (j, &xj) in points.iter().enumerate() {
            if j != i {
                sums[labels[j]] += (xi - xj).abs();
            }
        }
        let a = sums[own] / (counts[own] - 1) as f64;
        let b = (0..k)
            .filter(|&g| g != own)
            .map(|g| sums[g] / counts[g] as f64)
            .fold(f64::INFINITY, f64::min);
        let denom = a.max(b);
        if denom > 0.0 {
            total += (b - a) / denom;
        }
    }
    Ok(total / points.len() as f64)
}

/// Range threshold below which fitted intercepts count as a single group.
pub fn homogeneity_threshold(mu: &[f64]) -> f64 {
    let c = mu.iter().sum::<f64>() / mu.len() as f64;
    1e-3 * (1.0 + c.abs())
}

/// Groups fitted intercepts: one group when their range is below
/// [`homogeneity_threshold`], otherwise K-means with `k ∈ 2..=k_max` chosen by
/// the largest average silhouette width (ties: lower SSE, then lower `k`).
pub fn cluster_intercepts(mu: &[f64], k_max: usize) -> Result<(Vec<usize>, Vec<f64>)> {
    if k_max < 1 {
        return Err(Error::InvalidParameter("k_max must be ≥ 1".into()));
    }
    if mu.is_empty() {
        return Err(Error::EmptySample);
    }
    let (lo, hi) = mu
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let mut distinct = mu.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    let k_top = k_max.min(distinct.len());
    if hi - lo <= homogeneity_threshold(mu) || k_top < 2 {
        let mean = mu.iter().sum::<f64>() / mu.len() as f64;
        return Ok((vec![0; mu.len()], vec![mean]));
    }
    let order = sort_order(mu);
    let sorted: Vec<f64> = order.iter().map(|&i| mu[i]).collect();
    let mut best: Option<(f64, f64, KMeansFit)> = None;
    for k in 2..=k_top {
        let km = kmeans_sorted(&sorted, k);
        let asw = silhouette_width(&sorted, &km.labels)?;
        let better = match &best {
            None => true,
            Some((b_asw, b_sse, _)) => asw > *b_asw || (asw == *b_asw && km.sse < *b_sse),
        };
        if better {
            best = Some((asw, km.sse, km));
        }
    }
    let km = best.expect("k_top ≥ 2").2;
    let mut labels = vec![0; mu.len()];
    for (pos, &i) in order.iter().enumerate() {
        labels[i] = km.labels[pos];
    }
    Ok((labels, km.centers))
}

/// Post-processes an ADMM state into a [`SubgroupStructure`].
///
/// The active set is read from the exactly sparse `w`.
pub fn extract_structure(state: &AdmmState, k_max: usize) -> Result<SubgroupStructure> {
    extract_structure_from(state.mu.as_slice(), state.w.as_slice(), k_max)
}

pub fn extract_structure_from(mu: &[f64], w: &[f64], k_max: usize) -> Result<SubgroupStructure> {
    if mu.iter().chain(w).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("fitted state".into()));
    }
    let (labels, _) = cluster_intercepts(mu, k_max)?;
    let active: Vec<usize> = (0..w.len()).filter(|&j| w[j] != 0.0).collect();
    SubgroupStructure::from_labels(&labels, mu, active)
}

/// Unpenalized M-estimate under a fixed structure.
#[derive(Debug, Clone, PartialEq)]
pub struct Refit {
    pub alpha: Vec<f64>,
    pub beta_active: Vec<f64>,
    /// `(1/n) Σ ρ(residual)` at the solution.
    pub loss_value: f64,
}

impl Refit {
    /// Coefficients expanded to all `p` covariates.
    pub fn beta_full(&self, structure: &SubgroupStructure, p: usize) -> Vec<f64> {
        let mut b = vec![0.0; p];
        for (&j, &v) in structure.active_set.iter().zip(&self.beta_active) {
            b[j] = v;
        }
        b
    }
}

fn structure_design(data: &Dataset, structure: &SubgroupStructure) -> DMatrix<f64> {
    let n = data.n();
    let k = structure.k();
    let q = structure.q();
    DMatrix::from_fn(n, k + q, |i, c| {
        if c < k {
            if structure.assignment[i] == c {
                1.0
            } else {
                0.0
            }
        } else {
            data.x()[(i, structure.active_set[c - k])]
        }
    })
}

fn weighted_ls(design: &DMatrix<f64>, y: &DVector<f64>, weights: &[f64]) -> Result<DVector<f64>> {
    let cols = design.ncols();
    let mut gram = DMatrix::zeros(cols, cols);
    let mut rhs = DVector::zeros(cols);
    for (i, &wi) in weights.iter().enumerate() {
        let row = design.row(i);
        for a in 0..cols {
            let ra = row[a] * wi;
            if ra == 0.0 {
                continue;
            }
            rhs[a] += ra * y[i];
            for b in a..cols {
                gram[(a, b)] += ra * row[b];
            }
        }
    }
    for a in 0..cols {
        for b in 0..a {
            gram[(a, b)] = gram[(b, a)];
        }
    }
    let chol = gram
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Unidentifiable("design is rank deficient".into()))?;
    let diag = chol.l_dirty().diagonal();
    let (dmin, dmax) = diag
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(a, b): (f64, f64), &v: &f64| (a.min(v.abs()), b.max(v.abs())));
    if dmin * dmin < 1e-12 * dmax * dmax {
        return Err(Error::Unidentifiable("design is numerically rank deficient".into()));
    }
    Ok(chol.solve(&rhs))
}

fn mean_loss(loss: &LossSpec, design: &DMatrix<f64>, y: &DVector<f64>, theta: &DVector<f64>) -> f64 {
    let r = y - design * theta;
    r.iter().map(|&v| loss.rho(v)).sum::<f64>() / y.len() as f64
}

/// Minimizes `(1/n) Σ ρ(y_i − z_{S,i}ᵀα − x_{S,i}ᵀβ)` for a fixed structure.
///
/// L2 solves the normal equations. L1 runs IRLS on the smoothed absolute value
/// `√(r² + ε²)` with `ε` decreasing from `1e−2` to `1e−8`; Huber runs plain
/// IRLS with weights `ψ(r)/r`.
pub fn refit(data: &Dataset, loss: &LossSpec, structure: &SubgroupStructure) -> Result<Refit> {
    let n = data.n();
    structure.validate(n, data.p())?;
    let (k, q) = (structure.k(), structure.q());
    if k + q > n {
        return Err(Error::Unidentifiable(format!(
            "K + q = {} exceeds n = {n}",
            k + q
        )));
    }
    let design = structure_design(data, structure);
    let y = data.y();
    let mut theta = weighted_ls(&design, y, &vec![1.0; n])?;
    let mut best = (mean_loss(loss, &design, y, &theta), theta.clone());

    let mut irls = |weight: &dyn Fn(f64) -> f64, max_iter: usize, theta: &mut DVector<f64>| -> Result<()> {
        for _ in 0..max_iter {
            let r = y - &design * &*theta;
            let wts: Vec<f64> = r.iter().map(|&v| weight(v)).collect();
            let next = weighted_ls(&design, y, &wts)?;
            let change = (&next - &*theta).amax();
            *theta = next;
            let obj = mean_loss(loss, &design, y, theta);
            if obj < best.0 {
                best = (obj, theta.clone());
            }
            if change <= 1e-8 {
                break;
            }
        }
        Ok(())
    };
    match loss.kind {
        LossKind::L2 => {}
        LossKind::L1 => {
            for e in 2..=8 {
                let eps = 10f64.powi(-e);
                irls(&|r: f64| 1.0 / (r * r + eps * eps).sqrt(), 200, &mut theta)?;
            }
        }
        LossKind::Huber => {
            let c = loss.huber_c;
            irls(&|r: f64| if r.abs() <= c { 1.0 } else { c / r.abs() }, 500, &mut theta)?;
        }
    }
    let (loss_value, theta) = best;
    Ok(Refit {
        alpha: theta.rows(0, k).iter().copied().collect(),
        beta_active: theta.rows(k, q).iter().copied().collect(),
        loss_value,
    })
}

/// `log((1/n) Σ ρ) + (K + q)·φ_n` evaluated at the refit for `structure`.
pub fn refit_bic(
    data: &Dataset,
    loss: &LossSpec,
    structure: &SubgroupStructure,
    spec: &BicSpec,
) -> Result<f64> {
    let fit = refit(data, loss, structure)?;
    Ok(log_floor(fit.loss_value) + structure.size() as f64 * spec.phi_n(data.n(), data.p()))
}

/// Fraction of observation pairs on which two partitions agree.
pub fn rand_index(a: &[usize], b: &[usize]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch(format!(
            "partitions have lengths {} and {}",
            a.len(),
            b.len()
        )));
    }
    let n = a.len();
    if n < 2 {
        return Err(Error::TooFewObservations);
    }
    let mut agree: u64 = 0;
    for i in 0..n {
        for j in i + 1..n {
            if (a[i] == a[j]) == (b[i] == b[j]) {
                agree += 1;
            }
        }
    }
    Ok(agree as f64 / (n * (n - 1) / 2) as f64)
}

/// `(mean |μ̂ − μ|, mean |β̂ − β|)`; the coefficient term is 0 when `p = 0`.
pub fn mae_metrics(
    fitted_mu: &[f64],
    fitted_beta: &[f64],
    true_mu: &[f64],
    true_beta: &[f64],
) -> Result<(f64, f64)> {
    if fitted_mu.len() != true_mu.len() || fitted_beta.len() != true_beta.len() {
        return Err(Error::DimensionMismatch(
            "fitted and true parameters differ in length".into(),
        ));
    }
    let mae = |a: &[f64], b: &[f64]| {
        if a.is_empty() {
            0.0
        } else {
            a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() / a.len() as f64
        }
    };
    Ok((mae(fitted_mu, true_mu), mae(fitted_beta, true_beta)))
}

/// Per-fit evaluation against a known truth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub mae_mu: f64,
    pub mae_beta: f64,
    pub k_hat: usize,
    pub q_hat: usize,
    pub rand_index: f64,
}

impl MetricsReport {
    pub fn evaluate(
        structure: &SubgroupStructure,
        fitted_mu: &[f64],
        fitted_beta: &[f64],
        true_mu: &[f64],
        true_beta: &[f64],
        true_assignment: &[usize],
    ) -> Result<Self> {
        let (mae_mu, mae_beta) = mae_metrics(fitted_mu, fitted_beta, true_mu, true_beta)?;
        Ok(Self {
            mae_mu,
            mae_beta,
            k_hat: structure.k(),
            q_hat: structure.q(),
            rand_index: rand_index(&structure.assignment, true_assignment)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_two_groups() {
        let s = extract_structure_from(&[-1.0, -1.0, 1.0, 1.0], &[0.0, 2.0], 10).unwrap();
        assert_eq!(s.k(), 2);
        assert_eq!(s.centers, vec![-1.0, 1.0]);
        assert_eq!(s.assignment, vec![0, 0, 1, 1]);
        assert_eq!(s.active_set, vec![1]);
    }

    #[test]
    fn equal_intercepts_are_homogeneous() {
        let s = extract_structure_from(&[0.3; 7], &[], 10).unwrap();
        assert_eq!(s.k(), 1);
        assert_eq!(s.centers, vec![0.3]);
        assert!(matches!(
            extract_structure_from(&[0.3; 7], &[], 0),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn silhouette_examples() {
        assert_eq!(silhouette_width(&[0.0, 1.0], &[0, 1]).unwrap(), 0.0);
        let v = silhouette_width(&[0.0, 0.0, 10.0, 10.0], &[0, 0, 1, 1]).unwrap();
        assert!(v > 0.9 && v <= 1.0);
        assert_eq!(
            silhouette_width(&[0.0, 1.0, 2.0], &[0, 0, 0]),
            Err(Error::SilhouetteSingleCluster)
        );
    }

    #[test]
    fn rand_index_examples() {
        assert_eq!(rand_index(&[0, 0, 1, 2], &[5, 5, 3, 1]).unwrap(), 1.0);
        assert!((rand_index(&[1, 1, 2], &[1, 2, 2]).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(rand_index(&[0, 1, 2], &[0, 0, 0]).unwrap(), 0.0);
        assert!(matches!(
            rand_index(&[0, 1], &[0, 1, 1]),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn mae_examples() {
        assert_eq!(
            mae_metrics(&[1.0, 2.0], &[3.0], &[1.0, 2.0], &[3.0]).unwrap(),
            (0.0, 0.0)
        );
        let (m, _) = mae_metrics(&[1.0, -1.0, 1.0, -1.0], &[], &[0.0; 4], &[]).unwrap();
        assert_eq!(m, 1.0);
        assert!(mae_metrics(&[1.0], &[], &[1.0, 2.0], &[]).is_err());
    }

    #[test]
    fn refit_single_group() {
        let data = Dataset::intercept_only(DVector::from_vec(vec![1.0, 2.0, 9.0, 4.0, 3.0])).unwrap();
        let s = SubgroupStructure {
            assignment: vec![0; 5],
            centers: vec![0.0],
            active_set: vec![],
        };
        let l2 = refit(&data, &LossSpec::l2(), &s).unwrap();
        assert!((l2.alpha[0] - 3.8).abs() < 1e-12);
        let l1 = refit(&data, &LossSpec::l1(), &s).unwrap();
        assert!((l1.alpha[0] - 3.0).abs() < 1e-6);
    }

    #[test]
    fn refit_rejects_rank_deficiency() {
        let data = Dataset::from_rows(&[1.0, 2.0, 3.0], &[vec![1.0], vec![1.0], vec![1.0]]).unwrap();
        let s = SubgroupStructure {
            assignment: vec![0; 3],
            centers: vec![0.0],
            active_set: vec![0],
        };
        assert!(matches!(
            refit(&data, &LossSpec::l2(), &s),
            Err(Error::Unidentifiable(_))
        ));
    }

    use proptest::prelude::*;

    fn same_partition(a: &[usize], b: &[usize]) -> bool {
        (0..a.len()).all(|i| (0..a.len()).all(|j| (a[i] == a[j]) == (b[i] == b[j])))
    }

    proptest! {
        #[test]
        fn rand_index_symmetry_and_relabeling(
            pairs in prop::collection::vec((0usize..4, 0usize..4), 2..50),
            shift in 1usize..4,
        ) {
            let a: Vec<usize> = pairs.iter().map(|p| p.0).collect();
            let b: Vec<usize> = pairs.iter().map(|p| p.1).collect();
            let ab = rand_index(&a, &b).unwrap();
            prop_assert_eq!(ab, rand_index(&b, &a).unwrap());
            let relabeled: Vec<usize> = a.iter().map(|g| (g + shift) % 4).collect();
            prop_assert_eq!(ab, rand_index(&relabeled, &b).unwrap());
            prop_assert_eq!(ab == 1.0, same_partition(&a, &b));
        }

        #[test]
        fn silhouette_matches_double_loop(
            pts in prop::collection::vec((-5.0f64..5.0, 0usize..3), 3..120),
        ) {
            let points: Vec<f64> = pts.iter().map(|p| p.0).collect();
            let labels: Vec<usize> = pts.iter().map(|p| p.1).collect();
            let k = labels.iter().max().unwrap() + 1;
            prop_assume!((0..k).all(|g| labels.contains(&g)) && k >= 2);
            let got = silhouette_width(&points, &labels).unwrap();
            let n = points.len();
            let mut total = 0.0;
            for i in 0..n {
                let mut sums = vec![0.0; k];
                let mut counts = vec![0usize; k];
                for j in 0..n {
                    if j != i {
                        sums[labels[j]] += (points[i] - points[j]).abs();
                        counts[labels[j]] += 1;
                    }
                }
                let own = labels[i];
                if counts[own] == 0 {
                    continue;
                }
                let a = sums[own] / counts[own] as f64;
                let b = (0..k).filter(|&g| g != own).map(|g| sums[g] / counts[g] as f64).fold(f64::INFINITY, f64::min);
                let m = a.max(b);
                total += if m > 0.0 { (b - a) / m } else { 0.0 };
            }
            prop_assert!((got - total / n as f64).abs() < 1e-12);
        }
    }
}
