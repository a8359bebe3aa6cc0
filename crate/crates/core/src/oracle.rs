//! Brute-force checks of the max-min Bayes factor and the inequalities
//! built around it.
//!
//! The max-min search keeps the alternative at the likelihood maximizer
//! (a unit mass at the empirical rates) and searches equal-rate nulls
//! numerically: a grid scan followed by golden-section refinement. The
//! midpoint is never assumed. Region maps tabulate both sides of an
//! inequality over a grid and record every cell, including the ones where
//! the inequality fails.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bounds::{js_welch_lower_bound_rhs, log_maxmin_bayes_factor_bound};
use crate::divergences::{
    cross_entropy, js_divergence, kl_divergence, kl_quadratic_rhs, Proportion,
};
use crate::error::{Error, Result};
use crate::model::{
    likelihood_given_prior, log_likelihood_point, most_favorable_alternative, DiscretePrior,
    ExperimentData, ParameterPoint,
};

/// Slack allowed when deciding whether `lhs >= rhs`, in nats.
pub const HOLDS_TOLERANCE: f64 = 1e-12;

/// Iteration cap for golden-section refinement.
pub const MAX_REFINE_ITERATIONS: usize = 200;

/// Default log-scale convergence threshold for refinement.
pub const DEFAULT_REFINE_TOLERANCE: f64 = 1e-9;

/// Default seed for randomized checks.
pub const DEFAULT_SEED: u64 = 0;

// Refinement stops once the bracket is this narrow.
const BRACKET_WIDTH_TOLERANCE: f64 = 1e-10;

const MAX_MIXTURE_SUPPORT: usize = 8;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Evenly spaced points `lower, ..., upper` (inclusive) on one axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub resolution: usize,
    pub lower: Proportion,
    pub upper: Proportion,
    pub refine_tolerance: f64,
}

impl GridSpec {
    pub fn new(
        resolution: usize,
        lower: Proportion,
        upper: Proportion,
        refine_tolerance: f64,
    ) -> Result<Self> {
        if resolution < 2 {
            return Err(Error::InvalidGrid(format!("resolution {resolution} < 2")));
        }
        if lower >= upper {
            return Err(Error::InvalidGrid(format!(
                "lower {lower} is not below upper {upper}"
            )));
        }
        if refine_tolerance.is_nan() || refine_tolerance <= 0.0 {
            return Err(Error::InvalidGrid(format!(
                "refine tolerance {refine_tolerance} is not positive"
            )));
        }
        Ok(GridSpec {
            resolution,
            lower,
            upper,
            refine_tolerance,
        })
    }

    /// `[1/(n+1), n/(n+1)]` with `n = resolution`: stays clear of 0 and 1.
    pub fn interior(resolution: usize) -> Result<Self> {
        let n = resolution as f64;
        let lower = Proportion::new(1.0 / (n + 1.0))?;
        let upper = Proportion::new(n / (n + 1.0))?;
        GridSpec::new(resolution, lower, upper, DEFAULT_REFINE_TOLERANCE)
    }

    /// The closed unit interval, endpoints included.
    pub fn unit(resolution: usize) -> Result<Self> {
        GridSpec::new(
            resolution,
            Proportion::ZERO,
            Proportion::ONE,
            DEFAULT_REFINE_TOLERANCE,
        )
    }

    pub fn with_tolerance(self, refine_tolerance: f64) -> Result<Self> {
        GridSpec::new(self.resolution, self.lower, self.upper, refine_tolerance)
    }

    pub fn step(&self) -> f64 {
        (self.upper.get() - self.lower.get()) / (self.resolution - 1) as f64
    }

    pub fn point(&self, index: usize) -> Proportion {
        debug_assert!(index < self.resolution);
        if index + 1 == self.resolution {
            return self.upper;
        }
        let (lo, hi) = (self.lower.get(), self.upper.get());
        let x = lo + (hi - lo) * index as f64 / (self.resolution - 1) as f64;
        Proportion::new(x.min(hi)).expect("grid point inside its range")
    }

    pub fn points(&self) -> Vec<Proportion> {
        (0..self.resolution).map(|i| self.point(i)).collect()
    }

    fn is_interior(&self) -> bool {
        self.lower.get() > 0.0 && self.upper.get() < 1.0
    }
}

/// Outcome of [`grid_maxmin`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxMinResult {
    /// Numerically best equal-rate null.
    pub best_null: ParameterPoint,
    /// Least favorable alternative (the empirical rates).
    pub best_alt: ParameterPoint,
    pub factor: f64,
    pub closed_form: f64,
    pub log_factor: f64,
    pub log_closed_form: f64,
    /// `|ln factor - ln closed_form|`.
    pub abs_log_gap: f64,
    pub iterations: usize,
}

/// Maximizes the Bayes factor over equal-rate point nulls against the
/// unit-mass alternative at the empirical rates, and compares the result
/// with `exp(-2r JS)`.
pub fn grid_maxmin(data: &ExperimentData, grid: &GridSpec) -> Result<MaxMinResult> {
    let midpoint = data.midpoint_rate();
    if midpoint < grid.lower || midpoint > grid.upper {
        return Err(Error::GridMissesMidpoint {
            lower: grid.lower.get(),
            upper: grid.upper.get(),
            midpoint: midpoint.get(),
        });
    }

    let best_alt = most_favorable_alternative(data);
    let alt_log_likelihood = log_likelihood_point(data, best_alt);
    let objective = |x: f64| {
        let x = Proportion::new(x.clamp(0.0, 1.0)).expect("clamped");
        log_likelihood_point(data, ParameterPoint::diagonal(x)) - alt_log_likelihood
    };

    let scan: Vec<f64> = grid
        .points()
        .into_iter()
        .map(|x| objective(x.get()))
        .collect();
    let best_index = argmax(&scan);
    let mut best_x = grid.point(best_index).get();
    let mut best_value = scan[best_index];

    let lo = grid.point(best_index.saturating_sub(1)).get();
    let hi = grid.point((best_index + 1).min(grid.resolution - 1)).get();
    let refined = golden_section_max(
        &objective,
        lo,
        hi,
        grid.refine_tolerance,
        MAX_REFINE_ITERATIONS,
    )?;
    if refined.value > best_value {
        best_x = refined.x;
        best_value = refined.value;
    }

    let log_closed_form =
        log_maxmin_bayes_factor_bound(data.trials(), data.theta1(), data.theta2());
    let best_null = ParameterPoint::diagonal(Proportion::new(best_x)?);
    Ok(MaxMinResult {
        best_null,
        best_alt,
        factor: best_value.exp(),
        closed_form: log_closed_form.exp(),
        log_factor: best_value,
        log_closed_form,
        abs_log_gap: (best_value - log_closed_form).abs(),
        iterations: refined.iterations,
    })
}

fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

struct Refined {
    x: f64,
    value: f64,
    iterations: usize,
}

// Golden-section search for the maximum of a unimodal `f` on [a, b].
// Converged when the bracket is narrower than BRACKET_WIDTH_TOLERANCE and
// the objective varies by at most `tolerance` across it.
fn golden_section_max(
    f: &impl Fn(f64) -> f64,
    mut a: f64,
    mut b: f64,
    tolerance: f64,
    max_iterations: usize,
) -> Result<Refined> {
    let mut fa = f(a);
    let mut fb = f(b);
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);

    let spread = |vals: [f64; 4]| {
        let max = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
        if max == min {
            0.0
        } else {
            max - min
        }
    };

    let mut iterations = 0;
    while b - a > BRACKET_WIDTH_TOLERANCE || spread([fa, fb, f1, f2]) > tolerance {
        if iterations == max_iterations {
            return Err(Error::NotConverged {
                iterations,
                spread: spread([fa, fb, f1, f2]),
            });
        }
        if f1 >= f2 {
            b = x2;
            fb = f2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            fa = f1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
        iterations += 1;
    }

    let (x, value) = [(a, fa), (x1, f1), (x2, f2), (b, fb)].into_iter().fold(
        (a, f64::NEG_INFINITY),
        |best, cand| if cand.1 > best.1 { cand } else { best },
    );
    Ok(Refined {
        x,
        value,
        iterations,
    })
}

/// `ln Pr[D | mixture] - ln Pr[D | unit mass at the empirical rates]`.
/// Never positive, up to rounding.
pub fn mixture_gap(data: &ExperimentData, prior: &DiscretePrior) -> f64 {
    let best = log_likelihood_point(data, most_favorable_alternative(data));
    likelihood_given_prior(data, prior) - best
}

/// Draws `trials` random finitely supported priors on the grid and checks
/// that none of them gives the data a higher likelihood than the unit mass
/// at the empirical rates.
pub fn mixture_no_improvement_check(
    data: &ExperimentData,
    grid: &GridSpec,
    trials: usize,
    seed: u64,
) -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = grid.points();
    (0..trials).all(|_| {
        let prior = random_prior(&mut rng, &points);
        mixture_gap(data, &prior) <= HOLDS_TOLERANCE
    })
}

fn random_prior(rng: &mut impl Rng, points: &[Proportion]) -> DiscretePrior {
    let size = rng.gen_range(1..=MAX_MIXTURE_SUPPORT);
    let mut support: Vec<ParameterPoint> = Vec::with_capacity(size);
    while support.len() < size {
        let point = ParameterPoint::new(
            points[rng.gen_range(0..points.len())],
            points[rng.gen_range(0..points.len())],
        );
        if !support.contains(&point) {
            support.push(point);
        }
    }
    let raw: Vec<f64> = (0..size)
        .map(|_| rng.gen_range(f64::EPSILON..1.0))
        .collect();
    let total: f64 = raw.iter().sum();
    let weights = raw.iter().map(|w| w / total).collect();
    DiscretePrior::new(support, weights).expect("normalized weights on distinct points")
}

/// One grid cell of a region map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionRow {
    pub t1: Proportion,
    pub t2: Proportion,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl RegionRow {
    fn new(t1: Proportion, t2: Proportion, lhs: f64, rhs: f64) -> Self {
        RegionRow {
            t1,
            t2,
            lhs,
            rhs,
            holds: inequality_holds(lhs, rhs),
        }
    }

    /// Either side is infinite or NaN.
    pub fn is_singular(&self) -> bool {
        !self.lhs.is_finite() || !self.rhs.is_finite()
    }
}

/// `lhs >= rhs - HOLDS_TOLERANCE`; false when either side is NaN.
pub fn inequality_holds(lhs: f64, rhs: f64) -> bool {
    lhs >= rhs - HOLDS_TOLERANCE
}

/// Tabulated status of `lhs >= rhs` over a square grid, in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionReport {
    pub rows: Vec<RegionRow>,
    pub total: usize,
    pub violations: usize,
}

impl RegionReport {
    fn from_rows(rows: Vec<RegionRow>) -> Self {
        let violations = rows.iter().filter(|r| !r.holds).count();
        RegionReport {
            total: rows.len(),
            violations,
            rows,
        }
    }

    pub fn singular(&self) -> usize {
        self.rows.iter().filter(|r| r.is_singular()).count()
    }

    pub fn find(&self, t1: f64, t2: f64) -> Option<&RegionRow> {
        self.rows
            .iter()
            .find(|r| (r.t1.get() - t1).abs() < 1e-12 && (r.t2.get() - t2).abs() < 1e-12)
    }
}

fn map_region(
    grid: &GridSpec,
    cell: impl Fn(Proportion, Proportion) -> (f64, f64) + Sync,
) -> Result<RegionReport> {
    if !grid.is_interior() {
        return Err(Error::InvalidGrid(format!(
            "region maps need a grid inside (0, 1), got [{}, {}]",
            grid.lower, grid.upper
        )));
    }
    let points = grid.points();
    let n = points.len();
    // collect() on an indexed parallel iterator keeps row-major order
    let rows = (0..n * n)
        .into_par_iter()
        .map(|idx| {
            let (t1, t2) = (points[idx / n], points[idx % n]);
            let (lhs, rhs) = cell(t1, t2);
            RegionRow::new(t1, t2, lhs, rhs)
        })
        .collect();
    Ok(RegionReport::from_rows(rows))
}

/// `KL(theta, p)` against `(theta - p)^2 / (2 theta (1 - theta))` for every
/// `(theta, p)` on the grid.
pub fn map_kl_quadratic_region(grid: &GridSpec) -> Result<RegionReport> {
    map_region(grid, |theta, p| {
        let rhs = kl_quadratic_rhs(theta, p).expect("interior grid");
        (kl_divergence(theta, p), rhs)
    })
}

/// `JS(t1, t2)` against the Welch-based lower bound `t^2 / (4r)` (which does
/// not depend on `r`) for every `(t1, t2)` on the grid.
pub fn map_js_welch_region(grid: &GridSpec) -> Result<RegionReport> {
    map_region(grid, |t1, t2| {
        let rhs = js_welch_lower_bound_rhs(1, t1, t2).expect("interior grid");
        (js_divergence(t1, t2), rhs)
    })
}

/// Step for the central second difference in [`verify_convexity`].
pub const SECOND_DIFFERENCE_STEP: f64 = 1e-4;

/// `(f(x+h) - 2 f(x) + f(x-h)) / h^2` for `f = cross_entropy(p, .)`.
pub fn cross_entropy_second_difference(p: Proportion, x: f64, h: f64) -> f64 {
    let f = |y: f64| cross_entropy(p, Proportion::new(y).expect("interior point"));
    (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h)
}

/// Whether `H(p, lambda x1 + (1-lambda) x2) <= lambda H(p, x1) + (1-lambda) H(p, x2) + 1e-10`.
pub fn convexity_holds(p: Proportion, x1: Proportion, x2: Proportion, lambda: f64) -> bool {
    let mix =
        Proportion::new(lambda * x1.get() + (1.0 - lambda) * x2.get()).expect("convex combination");
    let chord = lambda * cross_entropy(p, x1) + (1.0 - lambda) * cross_entropy(p, x2);
    cross_entropy(p, mix) <= chord + 1e-10
}

/// Randomized check that `x -> cross_entropy(p, x)` is convex: chord
/// inequality on random triples and nonnegative second differences.
pub fn verify_convexity(samples: usize, seed: u64) -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = SECOND_DIFFERENCE_STEP;
    (0..samples).all(|_| {
        let p = Proportion::new(rng.gen_range(0.0..=1.0)).expect("unit range");
        let x1 = Proportion::new(rng.gen_range(f64::EPSILON..1.0)).expect("unit range");
        let x2 = Proportion::new(rng.gen_range(f64::EPSILON..1.0)).expect("unit range");
        let lambda = rng.gen_range(0.0..=1.0);
        let x = rng.gen_range(1e-3..=1.0 - 1e-3);
        convexity_holds(p, x1, x2, lambda) && cross_entropy_second_difference(p, x, h) >= -1e-6
    })
}
