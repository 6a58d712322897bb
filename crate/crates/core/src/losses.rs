//! M-estimation losses, their scores, the homogeneous center and the
//! proximal map used by the residual (`z`) update.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_HUBER_C: f64 = 1.345;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossKind {
    L1,
    L2,
    Huber,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossSpec {
    pub kind: LossKind,
    /// Huber transition point; ignored for the other losses.
    pub huber_c: f64,
}

impl Default for LossSpec {
    fn default() -> Self {
        Self::l1()
    }
}

/// Soft-thresholding `S(x, t)`.
#[inline]
pub fn soft_threshold(x: f64, t: f64) -> f64 {
    if x > t {
        x - t
    } else if x < -t {
        x + t
    } else {
        0.0
    }
}

#[inline]
fn sign(u: f64) -> f64 {
    if u > 0.0 {
        1.0
    } else if u < 0.0 {
        -1.0
    } else {
        0.0
    }
}

impl LossSpec {
    pub fn l1() -> Self {
        Self {
            kind: LossKind::L1,
            huber_c: DEFAULT_HUBER_C,
        }
    }

    pub fn l2() -> Self {
        Self {
            kind: LossKind::L2,
            huber_c: DEFAULT_HUBER_C,
        }
    }

    pub fn huber(c: f64) -> Self {
        Self {
            kind: LossKind::Huber,
            huber_c: c,
        }
    }

    pub fn new(kind: LossKind) -> Self {
        Self {
            kind,
            huber_c: DEFAULT_HUBER_C,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind == LossKind::Huber && !(self.huber_c > 0.0 && self.huber_c.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "huber_c must be positive, got {}",
                self.huber_c
            )));
        }
        Ok(())
    }

    /// The loss `ρ(u)`.
    pub fn rho(&self, u: f64) -> f64 {
        match self.kind {
            LossKind::L1 => u.abs(),
            LossKind::L2 => u * u,
            LossKind::Huber => {
                let c = self.huber_c;
                let a = u.abs();
                if a <= c {
                    0.5 * u * u
                } else {
                    c * a - 0.5 * c * c
                }
            }
        }
    }

    /// The score `ψ = ρ'`, with `ψ_L1(0) = 0`.
    pub fn psi(&self, u: f64) -> f64 {
        match self.kind {
            LossKind::L1 => sign(u),
            LossKind::L2 => 2.0 * u,
            LossKind::Huber => u.clamp(-self.huber_c, self.huber_c),
        }
    }

    /// The constant `c = argmin_c Σ ρ(y_i − c)`.
    pub fn center(&self, y: &[f64]) -> Result<f64> {
        if y.is_empty() {
            return Err(Error::EmptySample);
        }
        let n = y.len() as f64;
        match self.kind {
            LossKind::L2 => Ok(y.iter().sum::<f64>() / n),
            LossKind::L1 => Ok(median(y)),
            LossKind::Huber => {
                // Σψ(y_i − c) is nonincreasing in c; bracket with the data range.
                let score = |c: f64| y.iter().map(|&v| self.psi(v - c)).sum::<f64>();
                let (mut lo, mut hi) = y
                    .iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
                        (a.min(v), b.max(v))
                    });
                let tol = 1e-10 * n;
                let mut mid = 0.5 * (lo + hi);
                for _ in 0..200 {
                    mid = 0.5 * (lo + hi);
                    let s = score(mid);
                    if s.abs() <= tol {
                        break;
                    }
                    if s > 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                    if hi - lo <= f64::EPSILON * hi.abs().max(lo.abs()).max(1.0) {
                        break;
                    }
                }
                Ok(mid)
            }
        }
    }

    /// Solves `min_z (1/n)ρ(z) + (r1/2)(z − v)²`.
    pub fn prox_z(&self, v: f64, n: usize, r1: f64) -> f64 {
        let nf = n as f64;
        match self.kind {
            LossKind::L1 => soft_threshold(v, 1.0 / (nf * r1)),
            LossKind::L2 => nf * r1 * v / (2.0 + nf * r1),
            LossKind::Huber => {
                let z = r1 * v / (1.0 / nf + r1);
                if z.abs() <= self.huber_c {
                    z
                } else {
                    soft_threshold(v, self.huber_c / (nf * r1))
                }
            }
        }
    }
}

/// Median with the two middle order statistics averaged for even lengths.
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len();
    if m % 2 == 1 {
        v[m / 2]
    } else {
        0.5 * (v[m / 2 - 1] + v[m / 2])
    }
}
