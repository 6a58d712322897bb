//! Lasso, SCAD and MCP penalties and their scalar proximal maps.
//!
//! The proximal map `argmin_s P(s) + (r/2)(s − u)²` drives both the pairwise
//! difference update (`s`, with `r = r2`) and the coefficient update (`w`,
//! with `r = r3`). For the concave penalties the subproblem is strictly convex
//! only when `r(γ − 1) > 1` (SCAD) or `rγ > 1` (MCP).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::losses::soft_threshold;

pub const DEFAULT_SCAD_GAMMA: f64 = 3.7;
pub const DEFAULT_MCP_GAMMA: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PenaltyKind {
    Lasso,
    Scad,
    Mcp,
}

impl PenaltyKind {
    pub fn default_gamma(self) -> f64 {
        match self {
            PenaltyKind::Lasso => 0.0,
            PenaltyKind::Scad => DEFAULT_SCAD_GAMMA,
            PenaltyKind::Mcp => DEFAULT_MCP_GAMMA,
        }
    }

    fn name(self) -> &'static str {
        match self {
            PenaltyKind::Lasso => "lasso",
            PenaltyKind::Scad => "scad",
            PenaltyKind::Mcp => "mcp",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenaltySpec {
    pub kind: PenaltyKind,
    pub lambda: f64,
    /// Concavity; ignored by the lasso.
    pub gamma: f64,
}

impl PenaltySpec {
    pub fn new(kind: PenaltyKind, lambda: f64, gamma: f64) -> Result<Self> {
        let p = Self {
            kind,
            lambda,
            gamma,
        };
        p.validate()?;
        Ok(p)
    }

    /// Penalty with the default concavity for its kind.
    pub fn with_default_gamma(kind: PenaltyKind, lambda: f64) -> Self {
        Self {
            kind,
            lambda,
            gamma: kind.default_gamma(),
        }
    }

    pub fn lasso(lambda: f64) -> Self {
        Self::with_default_gamma(PenaltyKind::Lasso, lambda)
    }

    pub fn scad(lambda: f64, gamma: f64) -> Self {
        Self {
            kind: PenaltyKind::Scad,
            lambda,
            gamma,
        }
    }

    pub fn mcp(lambda: f64, gamma: f64) -> Self {
        Self {
            kind: PenaltyKind::Mcp,
            lambda,
            gamma,
        }
    }

    pub fn with_lambda(self, lambda: f64) -> Self {
        Self { lambda, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "lambda must be a nonnegative finite value, got {}",
                self.lambda
            )));
        }
        let bound = match self.kind {
            PenaltyKind::Lasso => return Ok(()),
            PenaltyKind::Scad => 2.0,
            PenaltyKind::Mcp => 1.0,
        };
        if self.gamma > bound && self.gamma.is_finite() {
            Ok(())
        } else {
            Err(Error::GammaOutOfRange {
                kind: self.kind.name(),
                bound,
                gamma: self.gamma,
            })
        }
    }

    /// Checks that the scalar prox with augmentation `r` has a unique minimizer.
    pub fn check_prox(&self, r: f64) -> Result<()> {
        self.validate()?;
        let ok = match self.kind {
            PenaltyKind::Lasso => r > 0.0,
            PenaltyKind::Scad => r * (self.gamma - 1.0) > 1.0,
            PenaltyKind::Mcp => r * self.gamma > 1.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::ProxNotUnique {
                kind: self.kind.name(),
                r,
                gamma: self.gamma,
            })
        }
    }

    /// `P(t)`, obtained by integrating the derivative from 0; even in `t`.
    pub fn value(&self, t: f64) -> Result<f64> {
        self.validate()?;
        Ok(self.value_unchecked(t))
    }

    pub(crate) fn value_unchecked(&self, t: f64) -> f64 {
        let a = t.abs();
        let lam = self.lambda;
        let g = self.gamma;
        match self.kind {
            PenaltyKind::Lasso => lam * a,
            PenaltyKind::Scad => {
                if a <= lam {
                    lam * a
                } else if a <= g * lam {
                    (2.0 * g * lam * a - a * a - lam * lam) / (2.0 * (g - 1.0))
                } else {
                    lam * lam * (g + 1.0) / 2.0
                }
            }
            PenaltyKind::Mcp => {
                if a <= g * lam {
                    lam * a - a * a / (2.0 * g)
                } else {
                    g * lam * lam / 2.0
                }
            }
        }
    }

    /// `argmin_s P(s) + (r/2)(s − u)²`.
    pub fn prox(&self, u: f64, r: f64) -> Result<f64> {
        self.check_prox(r)?;
        Ok(self.prox_unchecked(u, r))
    }

    /// Same as [`prox`](Self::prox) without the precondition check; callers
    /// must have run [`check_prox`](Self::check_prox) for this `r`.
    #[inline]
    pub fn prox_unchecked(&self, u: f64, r: f64) -> f64 {
        let lam = self.lambda;
        let g = self.gamma;
        let a = u.abs();
        match self.kind {
            PenaltyKind::Lasso => soft_threshold(u, lam / r),
            PenaltyKind::Scad => {
                if a <= (1.0 + 1.0 / r) * lam {
                    soft_threshold(u, lam / r)
                } else if a <= g * lam {
                    let shrink = 1.0 - 1.0 / (r * (g - 1.0));
                    soft_threshold(u, g * lam / (r * (g - 1.0))) / shrink
                } else {
                    u
                }
            }
            PenaltyKind::Mcp => {
                if a <= g * lam {
                    soft_threshold(u, lam / r) / (1.0 - 1.0 / (r * g))
                } else {
                    u
                }
            }
        }
    }
}
