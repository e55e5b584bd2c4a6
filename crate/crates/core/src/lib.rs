//! The ν-Birnbaum–Saunders family of lifetime distributions.
//!
//! `T ~ ν-BS(α, β, ν)` when `[(T/β)^ν − (β/T)^ν]/α` is standard normal.
//! The crate covers the univariate model, its bivariate and m-variate
//! Gaussian-copula extensions, maximum-likelihood fitting, and
//! Kolmogorov–Smirnov goodness of fit, plus the `nubs` command line.

pub mod classic;
pub mod cli;
pub mod dataset;
pub mod error;
pub mod estimation;
pub mod gof;
pub mod multivariate;
pub mod normal;
pub mod optim;
pub mod par;
pub mod quadrature;
pub mod report;
pub mod univariate;

pub use error::{Error, Result};
pub use univariate::NuBsParams;
