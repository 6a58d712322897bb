//! Linear algebra around the pairwise difference operator `D`.
//!
//! `D` is the `n(n−1)/2 × n` matrix with `(Dμ)_{ij} = μ_i − μ_j` for `i < j`.
//! It is never materialized: pairs are addressed lexicographically and the
//! normal matrix uses `DᵀD = nI − 11ᵀ`.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Below this many pairs the pair loops stay sequential.
const PAR_MIN_PAIRS: usize = 1 << 15;

/// Lexicographic bijection between pairs `(i, j)`, `i < j`, and flat indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairIndex {
    n: usize,
}

impl PairIndex {
    pub fn new(n: usize) -> Self {
        Self { n }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        pair_count(self.n)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Flat index of pair `(i, j)`; requires `i < j < n`.
    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < j && j < self.n);
        self.row_offset(i) + (j - i - 1)
    }

    /// Flat index of the first pair in row `i`.
    #[inline]
    pub fn row_offset(&self, i: usize) -> usize {
        i * self.n - i * (i + 1) / 2
    }

    /// Inverse of [`index`](Self::index).
    pub fn pair(&self, k: usize) -> (usize, usize) {
        assert!(k < self.len(), "pair index {k} out of range");
        // smallest i whose row extends past k
        let (mut lo, mut hi) = (0usize, self.n - 1);
        while lo + 1 < hi {
            let mid = (lo + hi) / 2;
            if self.row_offset(mid) <= k {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let i = if self.row_offset(hi) <= k { hi } else { lo };
        (i, i + 1 + (k - self.row_offset(i)))
    }

    /// All pairs in traversal order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.n;
        (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j)))
    }
}

pub fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Splits a pair-length buffer into one mutable slice per row `i`.
fn rows_mut(out: &mut [f64], n: usize) -> Vec<&mut [f64]> {
    let mut rows = Vec::with_capacity(n);
    let mut rest = out;
    for i in 0..n {
        let (row, tail) = rest.split_at_mut(n - i - 1);
        rows.push(row);
        rest = tail;
    }
    rows
}

/// Writes `Dμ` into `out`.
pub fn d_apply_into(mu: &[f64], out: &mut [f64]) {
    let n = mu.len();
    assert_eq!(out.len(), pair_count(n), "output length must be n(n-1)/2");
    let fill = |(i, row): (usize, &mut [f64])| {
        let mi = mu[i];
        for (slot, mj) in row.iter_mut().zip(&mu[i + 1..]) {
            *slot = mi - mj;
        }
    };
    let rows = rows_mut(out, n);
    if out_is_large(n) {
        rows.into_par_iter().enumerate().for_each(fill);
    } else {
        rows.into_iter().enumerate().for_each(fill);
    }
}

fn out_is_large(n: usize) -> bool {
    pair_count(n) >= PAR_MIN_PAIRS
}

/// `Dμ` for `μ` of length `n ≥ 2`.
pub fn d_apply(mu: &[f64]) -> Result<Vec<f64>> {
    if mu.len() < 2 {
        return Err(Error::TooFewObservations);
    }
    let mut out = vec![0.0; pair_count(mu.len())];
    d_apply_into(mu, &mut out);
    Ok(out)
}

/// `Dᵀv` written into `out` (length `n`).
///
/// Each output entry is summed in a fixed order, so the result does not
/// depend on how many threads run it.
pub fn d_transpose_apply_into(v: &[f64], out: &mut [f64]) {
    let n = out.len();
    assert_eq!(v.len(), pair_count(n), "input length must be n(n-1)/2");
    let idx = PairIndex::new(n);
    let entry = |i: usize| {
        let off = idx.row_offset(i);
        let mut acc: f64 = v[off..off + (n - i - 1)].iter().sum();
        for j in 0..i {
            acc -= v[idx.index(j, i)];
        }
        acc
    };
    if out_is_large(n) {
        out.par_iter_mut().enumerate().for_each(|(i, o)| *o = entry(i));
    } else {
        out.iter_mut().enumerate().for_each(|(i, o)| *o = entry(i));
    }
}

/// `Dᵀv` for a pair vector `v` over `n` observations.
pub fn d_transpose_apply(v: &[f64], n: usize) -> Result<Vec<f64>> {
    if v.len() != pair_count(n) {
        return Err(Error::DimensionMismatch(format!(
            "pair vector has length {}, expected {} for n = {n}",
            v.len(),
            pair_count(n)
        )));
    }
    let mut out = vec![0.0; n];
    d_transpose_apply_into(v, &mut out);
    Ok(out)
}

/// Solves `(r1·I + r2·DᵀD) μ = rhs` in `O(n)`.
///
/// Uses `(r1·I + r2·DᵀD)⁻¹ = (I + (r2/r1)·11ᵀ) / (r1 + n·r2)`.
pub fn mu_solve(rhs: &[f64], r1: f64, r2: f64) -> Vec<f64> {
    let mut out = rhs.to_vec();
    mu_solve_in_place(&mut out, r1, r2);
    out
}

pub fn mu_solve_in_place(rhs: &mut [f64], r1: f64, r2: f64) {
    let n = rhs.len() as f64;
    let total: f64 = rhs.iter().sum();
    let shift = r2 / r1 * total;
    let scale = 1.0 / (r1 + n * r2);
    for v in rhs.iter_mut() {
        *v = (*v + shift) * scale;
    }
}

/// Which system the coefficient update factorizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BetaBranch {
    /// `(r1·XᵀX + r3·I_p)`, used when `p ≤ n`.
    Primal,
    /// `(r1·XXᵀ + r3·I_n)` through the push-through identity, used when `p > n`.
    Dual,
}

/// Factorized coefficient update
/// `β = (r1·XᵀX + r3·I)⁻¹ {r1·Xᵀ(y − μ − z) + r3·w + Xᵀq1 − q3}`.
///
/// The factorization depends only on `X`, `r1` and `r3`, so it is built once
/// per fit and reused across iterations.
#[derive(Clone)]
pub struct BetaSolver {
    r1: f64,
    r3: f64,
    branch: BetaBranch,
    chol: Option<Cholesky<f64, Dyn>>,
}

impl std::fmt::Debug for BetaSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BetaSolver")
            .field("r1", &self.r1)
            .field("r3", &self.r3)
            .field("branch", &self.branch)
            .finish()
    }
}

impl BetaSolver {
    /// Picks the branch that factorizes a `min(n, p)`-sized matrix.
    pub fn new(x: &DMatrix<f64>, r1: f64, r3: f64) -> Result<Self> {
        let branch = if x.ncols() <= x.nrows() {
            BetaBranch::Primal
        } else {
            BetaBranch::Dual
        };
        Self::with_branch(x, r1, r3, branch)
    }

    pub fn with_branch(x: &DMatrix<f64>, r1: f64, r3: f64, branch: BetaBranch) -> Result<Self> {
        if !(r1 > 0.0 && r3 > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "r1 and r3 must be positive (r1 = {r1}, r3 = {r3})"
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("covariate matrix".into()));
        }
        let chol = if x.ncols() == 0 {
            None
        } else {
            let mut m = match branch {
                BetaBranch::Primal => x.tr_mul(x),
                BetaBranch::Dual => x * x.transpose(),
            };
            m *= r1;
            for d in 0..m.nrows() {
                m[(d, d)] += r3;
            }
            Some(Cholesky::new(m).ok_or_else(|| {
                Error::Unidentifiable("coefficient system is not positive definite".into())
            })?)
        };
        Ok(Self {
            r1,
            r3,
            branch,
            chol,
        })
    }

    pub fn branch(&self) -> BetaBranch {
        self.branch
    }

    /// Solves the update for `target = y − μ − z`.
    pub fn solve(
        &self,
        x: &DMatrix<f64>,
        target: &DVector<f64>,
        w: &DVector<f64>,
        q1: &DVector<f64>,
        q3: &DVector<f64>,
    ) -> Result<DVector<f64>> {
        let p = x.ncols();
        if target.len() != x.nrows() || q1.len() != x.nrows() || w.len() != p || q3.len() != p {
            return Err(Error::DimensionMismatch(
                "coefficient update operands do not match X".into(),
            ));
        }
        let finite = |v: &DVector<f64>| v.iter().all(|e| e.is_finite());
        if !(finite(target) && finite(w) && finite(q1) && finite(q3)) {
            return Err(Error::NonFinite("coefficient update operands".into()));
        }
        let Some(chol) = &self.chol else {
            return Ok(DVector::zeros(0));
        };
        // b = Xᵀ(r1·target + q1) + r3·w − q3
        let mut b = x.tr_mul(&(target * self.r1 + q1));
        b += w * self.r3;
        b -= q3;
        Ok(match self.branch {
            BetaBranch::Primal => chol.solve(&b),
            BetaBranch::Dual => {
                let inner = chol.solve(&(x * &b));
                let correction = x.tr_mul(&inner) * self.r1;
                (b - correction) / self.r3
            }
        })
    }
}

/// One-shot coefficient update; see [`BetaSolver`].
#[allow(clippy::too_many_arguments)]
pub fn beta_solve(
    x: &DMatrix<f64>,
    target: &DVector<f64>,
    w: &DVector<f64>,
    q1: &DVector<f64>,
    q3: &DVector<f64>,
    r1: f64,
    r3: f64,
) -> Result<DVector<f64>> {
    BetaSolver::new(x, r1, r3)?.solve(x, target, w, q1, q3)
}
