//! Method of trimmed moments (MTM) with separate trimming proportions for the
//! first and second moments.
//!
//! Supported families are the normal, lognormal and Fréchet (location zero)
//! distributions. The crate provides the estimators, their asymptotic
//! covariance and efficiency relative to maximum likelihood, a Monte Carlo
//! harness for finite-sample behaviour and goodness-of-fit summaries.

pub mod asymptotics;
pub mod error;
pub mod estimators;
pub mod gof;
pub mod matrix;
pub mod models;
pub mod moments;
pub mod quadrature;
mod roots;
pub mod simulation;
pub mod special;

pub use error::{MtmError, Result};
pub use estimators::{fit_mle, fit_mtm, Branch, MtmEstimator, MtmFit};
pub use models::{Family, Model};
pub use moments::{Scheme, SchemeClass};
