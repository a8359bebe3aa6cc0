//! Closed-form Bayes-factor bounds, the Welch statistic for proportions and
//! the resulting sample-size rules.

use crate::divergences::{js_divergence, kl_divergence, Proportion};
use crate::error::{Error, Result};

/// Multiplier applied to user-facing sample-size reports.
pub const DEFAULT_MULTIPLIER: f64 = 2.0;

/// `-2r JS(t1, t2)`, the log of [`maxmin_bayes_factor_bound`].
pub fn log_maxmin_bayes_factor_bound(r: u64, t1: Proportion, t2: Proportion) -> f64 {
    -2.0 * r as f64 * js_divergence(t1, t2)
}

/// `exp(-2r JS(t1, t2))`: the Bayes factor of the most favorable equal-rate
/// null against the most favorable alternative, for `r` trials per group
/// with observed rates `t1`, `t2`.
pub fn maxmin_bayes_factor_bound(r: u64, t1: Proportion, t2: Proportion) -> f64 {
    log_maxmin_bayes_factor_bound(r, t1, t2).exp()
}

/// `-r KL(t1, x0) - r KL(t2, x0)`, the log of [`fixed_null_factor`].
pub fn log_fixed_null_factor(r: u64, t1: Proportion, t2: Proportion, x0: Proportion) -> f64 {
    let r = r as f64;
    -r * kl_divergence(t1, x0) - r * kl_divergence(t2, x0)
}

/// Bayes factor of the point null `p = q = x0` against the most favorable
/// alternative. Never exceeds the max-min bound; equal to it at the midpoint.
pub fn fixed_null_factor(r: u64, t1: Proportion, t2: Proportion, x0: Proportion) -> f64 {
    log_fixed_null_factor(r, t1, t2, x0).exp()
}

/// Welch's statistic `(mu1 - mu2) / sqrt(var1/r1 + var2/r2)`.
pub fn welch_t_general(mu1: f64, mu2: f64, var1: f64, var2: f64, r1: u64, r2: u64) -> Result<f64> {
    if r1 == 0 || r2 == 0 {
        return Err(Error::ZeroTrials);
    }
    if !(var1 >= 0.0 && var2 >= 0.0) {
        return Err(Error::DegenerateVariance);
    }
    let se2 = var1 / r1 as f64 + var2 / r2 as f64;
    if se2 <= 0.0 || !se2.is_finite() {
        return Err(Error::DegenerateVariance);
    }
    Ok((mu1 - mu2) / se2.sqrt())
}

fn pooled_variance(t1: Proportion, t2: Proportion) -> Result<f64> {
    let v = t1.variance() + t2.variance();
    if v > 0.0 {
        Ok(v)
    } else {
        Err(Error::DegenerateVariance)
    }
}

/// Welch's statistic for two binomial groups of `r` trials:
/// `sqrt(r) (t1 - t2) / sqrt(t1(1-t1) + t2(1-t2))`, using plug-in variances.
pub fn welch_t_binomial(r: u64, t1: Proportion, t2: Proportion) -> Result<f64> {
    if r == 0 {
        return Err(Error::ZeroTrials);
    }
    let v = pooled_variance(t1, t2)?;
    Ok((r as f64).sqrt() * (t1.get() - t2.get()) / v.sqrt())
}

/// `exp(-t^2 / 2)` for the binomial Welch statistic `t`.
pub fn welch_factor_bound(r: u64, t1: Proportion, t2: Proportion) -> Result<f64> {
    let t = welch_t_binomial(r, t1, t2)?;
    Ok((-0.5 * t * t).exp())
}

/// `t^2 / (4r)`, evaluated in its `r`-free form
/// `(t1 - t2)^2 / (4 (t1(1-t1) + t2(1-t2)))`.
pub fn js_welch_lower_bound_rhs(r: u64, t1: Proportion, t2: Proportion) -> Result<f64> {
    if r == 0 {
        return Err(Error::ZeroTrials);
    }
    let v = pooled_variance(t1, t2)?;
    let d = t1.get() - t2.get();
    Ok(d * d / (4.0 * v))
}

fn check_multiplier(multiplier: f64) -> Result<()> {
    if multiplier > 0.0 && multiplier.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidMultiplier(multiplier))
    }
}

/// Bayesian trial requirement `multiplier / (2 JS(p1, p2))` per group.
pub fn sample_bound_bayesian(p1: Proportion, p2: Proportion, multiplier: f64) -> Result<f64> {
    check_multiplier(multiplier)?;
    if p1 == p2 {
        return Err(Error::EqualRates(p1.get()));
    }
    Ok(multiplier / (2.0 * js_divergence(p1, p2)))
}

/// Frequentist trial requirement `multiplier * 2 (v1 + v2) / (p1 - p2)^2`
/// per group, from asking for a Welch statistic of order one.
pub fn sample_bound_frequentist(p1: Proportion, p2: Proportion, multiplier: f64) -> Result<f64> {
    check_multiplier(multiplier)?;
    if p1 == p2 {
        return Err(Error::EqualRates(p1.get()));
    }
    let d = p1.get() - p2.get();
    Ok(multiplier * 2.0 * (p1.variance() + p2.variance()) / (d * d))
}

/// Both sample-size rules evaluated at one multiplier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleBoundResult {
    pub bayesian_r: f64,
    pub frequentist_r: f64,
    pub multiplier: f64,
}

impl SampleBoundResult {
    pub fn new(p1: Proportion, p2: Proportion, multiplier: f64) -> Result<Self> {
        Ok(SampleBoundResult {
            bayesian_r: sample_bound_bayesian(p1, p2, multiplier)?,
            frequentist_r: sample_bound_frequentist(p1, p2, multiplier)?,
            multiplier,
        })
    }

    /// `bayesian_r / frequentist_r`.
    pub fn ratio(&self) -> f64 {
        self.bayesian_r / self.frequentist_r
    }
}
