//! Marginal structural models with stabilized inverse-probability-of-treatment
//! weights for a continuous, time-varying treatment and a count outcome, plus
//! the tooling around them: GLM fitting with sandwich errors, a Monte Carlo
//! harness, a wells/catalog to panel pipeline, and seismogenic-index baselines.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod cli;
pub mod error;
pub mod estimators;
pub mod format;
pub mod geo;
pub mod glm;
pub mod iptw;
pub mod panel;
pub mod simulate;

pub use error::{Error, Result};
