//! Bayes-factor bounds for binomial A/B tests.
//!
//! Two groups of `r` Bernoulli trials each are compared under a null
//! hypothesis of equal success rates. The best Bayes factor any equal-rate
//! null can achieve against its least favorable alternative is
//! `exp(-2r * JS(theta1, theta2))`, where `JS` is the Jensen-Shannon
//! divergence of the observed rates. This crate provides:
//!
//! - [`divergences`]: entropy, cross-entropy, KL and JS for Bernoulli rates (nats).
//! - [`model`]: unnormalized binomial likelihoods under finitely supported
//!   priors and exact Bayes factors between them.
//! - [`bounds`]: closed-form bounds, the Welch statistic and sample-size rules.
//! - [`oracle`]: brute-force verification of the max-min identity and
//!   region maps for the quadratic inequalities used around it.

pub mod bounds;
pub mod divergences;
mod error;
pub mod model;
pub mod oracle;

pub use bounds::SampleBoundResult;
pub use divergences::Proportion;
pub use error::{Error, Result};
pub use model::{DiscretePrior, ExperimentData, ParameterPoint};
pub use oracle::{GridSpec, MaxMinResult, RegionReport, RegionRow};
