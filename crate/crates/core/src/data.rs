//! The immutable regression input: a response vector and an `n × p` covariate matrix.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    y: DVector<f64>,
    x: DMatrix<f64>,
}

impl Dataset {
    /// Builds a dataset, rejecting empty input, shape mismatches and non-finite values.
    pub fn new(y: DVector<f64>, x: DMatrix<f64>) -> Result<Self> {
        if y.is_empty() {
            return Err(Error::EmptySample);
        }
        if x.nrows() != y.len() {
            return Err(Error::DimensionMismatch(format!(
                "response has {} rows but covariates have {}",
                y.len(),
                x.nrows()
            )));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("response".into()));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("covariates".into()));
        }
        Ok(Self { y, x })
    }

    /// Dataset without covariates.
    pub fn intercept_only(y: DVector<f64>) -> Result<Self> {
        let n = y.len();
        Self::new(y, DMatrix::zeros(n, 0))
    }

    pub fn from_rows(y: &[f64], rows: &[Vec<f64>]) -> Result<Self> {
        let n = y.len();
        let p = rows.first().map_or(0, Vec::len);
        if rows.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{} responses but {} covariate rows",
                n,
                rows.len()
            )));
        }
        if let Some(bad) = rows.iter().position(|r| r.len() != p) {
            return Err(Error::DimensionMismatch(format!(
                "row {bad} has {} covariates, expected {p}",
                rows[bad].len()
            )));
        }
        let x = DMatrix::from_fn(n, p, |i, j| rows[i][j]);
        Self::new(DVector::from_column_slice(y), x)
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn y(&self) -> &DVector<f64> {
        &self.y
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    /// Centers every covariate column and scales it to unit (population) variance.
    ///
    /// Constant columns are centered but left unscaled.
    pub fn standardized(&self) -> (Dataset, Standardization) {
        let n = self.n() as f64;
        let p = self.p();
        let mut means = Vec::with_capacity(p);
        let mut scales = Vec::with_capacity(p);
        let mut x = self.x.clone();
        for j in 0..p {
            let mut col = x.column_mut(j);
            let mean = col.sum() / n;
            let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
            let sd = if var > 0.0 { var.sqrt() } else { 1.0 };
            for v in col.iter_mut() {
                *v = (*v - mean) / sd;
            }
            means.push(mean);
            scales.push(sd);
        }
        (
            Dataset {
                y: self.y.clone(),
                x,
            },
            Standardization { means, scales },
        )
    }
}

/// Column transform applied by [`Dataset::standardized`].
#[derive(Debug, Clone, PartialEq)]
pub struct Standardization {
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
}

impl Standardization {
    /// Maps coefficients fitted on standardized covariates back to the original scale.
    pub fn coefficients(&self, beta_std: &[f64]) -> Vec<f64> {
        beta_std
            .iter()
            .zip(&self.scales)
            .map(|(b, s)| b / s)
            .collect()
    }

    /// Intercept shift `-Σ_j β_j·mean_j / sd_j` induced by centering.
    pub fn intercept_shift(&self, beta_std: &[f64]) -> f64 {
        -beta_std
            .iter()
            .zip(self.means.iter().zip(&self.scales))
            .map(|(b, (m, s))| b * m / s)
            .sum::<f64>()
    }
}
