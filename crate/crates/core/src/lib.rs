//! Penalized M-regression with pairwise fusion of per-observation intercepts.
//!
//! Each observation gets its own intercept `μ_i`; a concave penalty on every
//! difference `μ_i − μ_j` fuses observations into latent subgroups while a
//! second penalty on the coefficients selects covariates. The problem is
//! solved by ADMM ([`admm`]), tuned over a `(λ1, λ2)` grid with a modified
//! BIC ([`tuning`]), and post-processed into a discrete subgroup structure
//! ([`structure`]). [`sim`] reproduces the Monte-Carlo benchmark scenarios.

pub mod admm;
pub mod cli;
pub mod data;
pub mod error;
pub mod fusion;
pub mod losses;
pub mod penalties;
pub mod sim;
pub mod structure;
pub mod tuning;

pub use admm::{Admm, AdmmConfig, AdmmState};
pub use data::Dataset;
pub use error::{Error, Result};
pub use losses::{LossKind, LossSpec};
pub use penalties::{PenaltyKind, PenaltySpec};
pub use structure::SubgroupStructure;
pub use tuning::{grid_search, make_grid, BicSpec, FitReport, LambdaGrid};
