//! Binomial likelihoods for two-group count data.
//!
//! Likelihoods are kept in log scale and are unnormalized: the binomial
//! coefficients (equivalently the Beta-function constant) are dropped
//! because every quantity exposed here is a ratio in which they cancel.

use std::fmt;

use crate::divergences::Proportion;
use crate::error::{Error, Result};

/// Observed successes `k1`, `k2` out of `r` trials in each of two groups.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ExperimentData {
    r: u64,
    k1: u64,
    k2: u64,
}

impl ExperimentData {
    pub fn new(r: u64, k1: u64, k2: u64) -> Result<Self> {
        if r == 0 || k1 > r || k2 > r {
            return Err(Error::InvalidCounts { r, k1, k2 });
        }
        Ok(ExperimentData { r, k1, k2 })
    }

    pub fn trials(&self) -> u64 {
        self.r
    }

    pub fn successes(&self) -> (u64, u64) {
        (self.k1, self.k2)
    }

    /// Empirical rate `k1 / r` of the first group.
    pub fn theta1(&self) -> Proportion {
        ratio(self.k1, self.r)
    }

    /// Empirical rate `k2 / r` of the second group.
    pub fn theta2(&self) -> Proportion {
        ratio(self.k2, self.r)
    }

    /// `(k1 + k2) / (2r)`, rounded once from the exact rational.
    pub fn midpoint_rate(&self) -> Proportion {
        ratio(self.k1 + self.k2, 2 * self.r)
    }
}

fn ratio(num: u64, den: u64) -> Proportion {
    Proportion::new(num as f64 / den as f64).expect("count ratio lies in [0, 1]")
}

/// A pair of success rates `(p, q)` for groups 1 and 2.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct ParameterPoint {
    pub p: Proportion,
    pub q: Proportion,
}

impl ParameterPoint {
    pub fn new(p: Proportion, q: Proportion) -> Self {
        ParameterPoint { p, q }
    }

    pub fn from_rates(p: f64, q: f64) -> Result<Self> {
        Ok(ParameterPoint {
            p: Proportion::new(p)?,
            q: Proportion::new(q)?,
        })
    }

    /// The equal-rate point `(x, x)`.
    pub fn diagonal(x: Proportion) -> Self {
        ParameterPoint { p: x, q: x }
    }

    pub fn is_diagonal(&self) -> bool {
        self.p == self.q
    }
}

impl fmt::Display for ParameterPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.p, self.q)
    }
}

/// Tolerance on the total prior weight.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-12;

/// A prior over rate pairs with finite support.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretePrior {
    support: Vec<ParameterPoint>,
    weights: Vec<f64>,
}

impl DiscretePrior {
    /// Validates that weights are nonnegative, sum to one and that support
    /// points are distinct.
    pub fn new(support: Vec<ParameterPoint>, weights: Vec<f64>) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::InvalidPrior("empty support".into()));
        }
        if support.len() != weights.len() {
            return Err(Error::InvalidPrior(format!(
                "{} support points but {} weights",
                support.len(),
                weights.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidPrior(format!(
                "weight {w} is not a nonnegative real"
            )));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(Error::InvalidPrior(format!(
                "weights sum to {total}, not 1"
            )));
        }
        for (i, a) in support.iter().enumerate() {
            if support[..i].contains(a) {
                return Err(Error::InvalidPrior(format!("duplicate support point {a}")));
            }
        }
        Ok(DiscretePrior { support, weights })
    }

    pub fn unit_mass(point: ParameterPoint) -> Self {
        DiscretePrior {
            support: vec![point],
            weights: vec![1.0],
        }
    }

    /// Equal weight on each point.
    pub fn uniform(support: Vec<ParameterPoint>) -> Result<Self> {
        let n = support.len();
        DiscretePrior::new(support, vec![1.0 / n as f64; n])
    }

    /// The prior `lambda * a + (1 - lambda) * b`; shared points are merged.
    pub fn mixture(a: &DiscretePrior, b: &DiscretePrior, lambda: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::InvalidPrior(format!(
                "mixture weight {lambda} outside [0, 1]"
            )));
        }
        let mut support = a.support.clone();
        let mut weights: Vec<f64> = a.weights.iter().map(|w| lambda * w).collect();
        for (point, w) in b.iter() {
            let w = (1.0 - lambda) * w;
            match support.iter().position(|s| *s == point) {
                Some(i) => weights[i] += w,
                None => {
                    support.push(point);
                    weights.push(w);
                }
            }
        }
        DiscretePrior::new(support, weights)
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn support(&self) -> &[ParameterPoint] {
        &self.support
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn iter(&self) -> impl Iterator<Item = (ParameterPoint, f64)> + '_ {
        self.support
            .iter()
            .copied()
            .zip(self.weights.iter().copied())
    }
}

/// `ln(sum exp(x_i))`, shifted by the maximum; empty or all `-inf` input gives `-inf`.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    let sum: f64 = values.iter().map(|v| (v - max).exp()).sum();
    max + sum.ln()
}

// k ln p + (r - k) ln(1 - p), i.e. -r H(k/r, p).
fn log_binomial_kernel(k: u64, r: u64, p: Proportion) -> f64 {
    let term = |count: u64, rate: f64| {
        if count == 0 {
            0.0
        } else {
            count as f64 * rate.ln()
        }
    };
    term(k, p.get()) + term(r - k, 1.0 - p.get())
}

/// `-r H(theta1, p) - r H(theta2, q)`: the unnormalized log-likelihood of the
/// data at a single rate pair. `-inf` if the point makes an observed outcome
/// impossible.
pub fn log_likelihood_point(data: &ExperimentData, point: ParameterPoint) -> f64 {
    log_binomial_kernel(data.k1, data.r, point.p) + log_binomial_kernel(data.k2, data.r, point.q)
}

/// Log of the prior-averaged likelihood `sum_j w_j exp(L_j)`.
pub fn likelihood_given_prior(data: &ExperimentData, prior: &DiscretePrior) -> f64 {
    let terms: Vec<f64> = prior
        .iter()
        .filter(|(_, w)| *w > 0.0)
        .map(|(point, w)| w.ln() + log_likelihood_point(data, point))
        .collect();
    log_sum_exp(&terms)
}

/// `ln K` for `K = Pr[D | null] / Pr[D | alt]`.
pub fn log_bayes_factor_exact(
    data: &ExperimentData,
    null_prior: &DiscretePrior,
    alt_prior: &DiscretePrior,
) -> Result<f64> {
    let alt = likelihood_given_prior(data, alt_prior);
    if alt == f64::NEG_INFINITY {
        return Err(Error::ZeroLikelihood {
            prior: "alternative".into(),
        });
    }
    Ok(likelihood_given_prior(data, null_prior) - alt)
}

/// The Bayes factor `Pr[D | null] / Pr[D | alt]`.
pub fn bayes_factor_exact(
    data: &ExperimentData,
    null_prior: &DiscretePrior,
    alt_prior: &DiscretePrior,
) -> Result<f64> {
    log_bayes_factor_exact(data, null_prior, alt_prior).map(f64::exp)
}

/// The rate pair maximizing the likelihood: the empirical rates.
pub fn most_favorable_alternative(data: &ExperimentData) -> ParameterPoint {
    ParameterPoint::new(data.theta1(), data.theta2())
}

/// The equal-rate pair maximizing the likelihood: both rates at the pooled mean.
pub fn most_favorable_null(data: &ExperimentData) -> ParameterPoint {
    ParameterPoint::diagonal(data.midpoint_rate())
}
