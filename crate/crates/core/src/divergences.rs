//! Information measures between Bernoulli distributions, in nats.
//!
//! Every function takes success rates as [`Proportion`]s. Endpoints follow
//! the `0 * ln 0 = 0` convention; a divergence whose second argument puts
//! zero mass where the first does not is `f64::INFINITY`.

use std::fmt;

use crate::error::{Error, Result};

/// A success rate in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Proportion(f64);

impl Proportion {
    pub const ZERO: Proportion = Proportion(0.0);
    pub const HALF: Proportion = Proportion(0.5);
    pub const ONE: Proportion = Proportion(1.0);

    /// Rejects NaN and anything outside `[0, 1]`.
    pub fn new(value: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&value) {
            Ok(Proportion(value))
        } else {
            Err(Error::InvalidProportion(value))
        }
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }

    /// `1 - p`.
    #[inline]
    pub fn complement(self) -> Proportion {
        Proportion(1.0 - self.0)
    }

    /// `(a + b) / 2`, symmetric in its arguments.
    #[inline]
    pub fn midpoint(a: Proportion, b: Proportion) -> Proportion {
        Proportion(0.5 * (a.0 + b.0))
    }

    /// True for 0 and 1.
    #[inline]
    pub fn is_endpoint(self) -> bool {
        self.0 == 0.0 || self.0 == 1.0
    }

    /// Plug-in Bernoulli variance `p (1 - p)`.
    #[inline]
    pub fn variance(self) -> f64 {
        self.0 * (1.0 - self.0)
    }
}

impl TryFrom<f64> for Proportion {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        Proportion::new(value)
    }
}

impl From<Proportion> for f64 {
    fn from(p: Proportion) -> f64 {
        p.0
    }
}

impl fmt::Display for Proportion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

// x * ln(y) with 0 * ln(anything) = 0.
#[inline]
fn xlny(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * y.ln()
    }
}

// x * ln(x / y) with 0 * ln(0 / y) = 0 and +inf when y = 0 < x.
#[inline]
fn xlnxy(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * (x.ln() - y.ln())
    }
}

/// Shannon entropy `H(p) = -p ln p - (1-p) ln(1-p)`.
pub fn binary_entropy(p: Proportion) -> f64 {
    let p = p.get();
    let h = -(xlny(p, p) + xlny(1.0 - p, 1.0 - p));
    h.max(0.0)
}

/// Cross-entropy `H(p, q) = -p ln q - (1-p) ln(1-q)`.
pub fn cross_entropy(p: Proportion, q: Proportion) -> f64 {
    let (p, q) = (p.get(), q.get());
    -(xlny(p, q) + xlny(1.0 - p, 1.0 - q))
}

/// Kullback-Leibler divergence `KL(p, q) = H(p, q) - H(p)`.
///
/// Evaluated in log-ratio form rather than as a difference of entropies, so
/// small divergences keep their relative accuracy.
pub fn kl_divergence(p: Proportion, q: Proportion) -> f64 {
    let (p, q) = (p.get(), q.get());
    let kl = xlnxy(p, q) + xlnxy(1.0 - p, 1.0 - q);
    kl.max(0.0)
}

/// Jensen-Shannon divergence `H(m) - H(p)/2 - H(q)/2` with `m = (p + q) / 2`.
///
/// Bounded by `ln 2` and exactly symmetric in its arguments.
pub fn js_divergence(p: Proportion, q: Proportion) -> f64 {
    let m = Proportion::midpoint(p, q);
    let js = binary_entropy(m) - 0.5 * (binary_entropy(p) + binary_entropy(q));
    js.max(0.0)
}

/// Right-hand side `(theta - p)^2 / (2 theta (1 - theta))` of the quadratic
/// lower bound on `KL(theta, p)`.
///
/// The bound itself does not hold everywhere; see
/// [`crate::oracle::map_kl_quadratic_region`].
pub fn kl_quadratic_rhs(theta: Proportion, p: Proportion) -> Result<f64> {
    if theta.is_endpoint() {
        return Err(Error::BoundaryRate(theta.get()));
    }
    let gap = theta.get() - p.get();
    Ok(gap * gap / (2.0 * theta.variance()))
}
