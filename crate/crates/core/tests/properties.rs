use abfactor::bounds::{
    fixed_null_factor, js_welch_lower_bound_rhs, log_fixed_null_factor,
    log_maxmin_bayes_factor_bound, maxmin_bayes_factor_bound, welch_t_binomial, welch_t_general,
};
use abfactor::divergences::{binary_entropy, cross_entropy, js_divergence, kl_divergence};
use abfactor::model::{
    likelihood_given_prior, log_bayes_factor_exact, log_likelihood_point,
    most_favorable_alternative, most_favorable_null,
};
use abfactor::oracle::{grid_maxmin, map_js_welch_region, GridSpec};
use abfactor::{DiscretePrior, ExperimentData, ParameterPoint, Proportion};
use proptest::prelude::*;

fn prop() -> impl Strategy<Value = Proportion> {
    (0.0..=1.0f64).prop_map(|v| Proportion::new(v).unwrap())
}

fn interior() -> impl Strategy<Value = Proportion> {
    (1e-6..=1.0 - 1e-6f64).prop_map(|v| Proportion::new(v).unwrap())
}

fn experiment(max_r: u64) -> impl Strategy<Value = ExperimentData> {
    (1..=max_r)
        .prop_flat_map(|r| (Just(r), 0..=r, 0..=r))
        .prop_map(|(r, k1, k2)| ExperimentData::new(r, k1, k2).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn entropy_symmetric_and_bounded(p in prop()) {
        let h = binary_entropy(p);
        prop_assert!((h - binary_entropy(p.complement())).abs() < 1e-15);
        prop_assert!((0.0..=std::f64::consts::LN_2 + 1e-15).contains(&h));
    }

    #[test]
    fn gibbs_inequality(p in prop(), q in prop()) {
        let c = cross_entropy(p, q);
        prop_assert!(c >= binary_entropy(p) - 1e-12);
        if p == q {
            prop_assert!((c - binary_entropy(p)).abs() < 1e-12);
        }
    }

    #[test]
    fn kl_is_cross_minus_entropy(p in prop(), q in prop()) {
        let kl = kl_divergence(p, q);
        let c = cross_entropy(p, q);
        prop_assert!(kl >= 0.0);
        if c.is_finite() {
            prop_assert!((kl - (c - binary_entropy(p))).abs() < 1e-12);
        } else {
            prop_assert_eq!(kl, f64::INFINITY);
        }
    }

    #[test]
    fn js_identity_and_symmetry(p in prop(), q in prop()) {
        let js = js_divergence(p, q);
        let m = Proportion::midpoint(p, q);
        prop_assert!((2.0 * js - (kl_divergence(p, m) + kl_divergence(q, m))).abs() < 1e-12);
        prop_assert_eq!(js, js_divergence(q, p));
        prop_assert!((0.0..=std::f64::consts::LN_2 + 1e-15).contains(&js));
    }

    #[test]
    fn cross_entropy_convex_in_second_argument(p in prop(), x1 in interior(), x2 in interior(), lambda in 0.0..=1.0f64) {
        let mix = Proportion::new(lambda * x1.get() + (1.0 - lambda) * x2.get()).unwrap();
        let chord = lambda * cross_entropy(p, x1) + (1.0 - lambda) * cross_entropy(p, x2);
        prop_assert!(cross_entropy(p, mix) <= chord + 1e-12);
    }

    #[test]
    fn mixture_likelihood_is_linear(d in experiment(60), a in interior(), b in interior(), c in interior(), e in interior(), lambda in 0.0..=1.0f64) {
        let pa = DiscretePrior::unit_mass(ParameterPoint::new(a, b));
        let pb = DiscretePrior::uniform(vec![ParameterPoint::new(c, e), ParameterPoint::new(e, a)]);
        prop_assume!(pb.is_ok());
        let pb = pb.unwrap();
        let mix = DiscretePrior::mixture(&pa, &pb, lambda).unwrap();
        let la = likelihood_given_prior(&d, &pa);
        let lb = likelihood_given_prior(&d, &pb);
        let expected = abfactor::model::log_sum_exp(&[lambda.ln() + la, (1.0 - lambda).ln() + lb]);
        prop_assert!((likelihood_given_prior(&d, &mix) - expected).abs() < 1e-12);
    }

    #[test]
    fn unit_mass_kl_consistency(d in experiment(100), x0 in interior()) {
        let null = DiscretePrior::unit_mass(ParameterPoint::diagonal(x0));
        let alt = DiscretePrior::unit_mass(most_favorable_alternative(&d));
        let exact = log_bayes_factor_exact(&d, &null, &alt).unwrap();
        let closed = log_fixed_null_factor(d.trials(), d.theta1(), d.theta2(), x0);
        prop_assert!((exact - closed).abs() < 1e-12 * closed.abs().max(1.0));
    }

    #[test]
    fn equality_bridge(d in experiment(100)) {
        let null = DiscretePrior::unit_mass(most_favorable_null(&d));
        let alt = DiscretePrior::unit_mass(most_favorable_alternative(&d));
        let exact = log_bayes_factor_exact(&d, &null, &alt).unwrap();
        let closed = log_maxmin_bayes_factor_bound(d.trials(), d.theta1(), d.theta2());
        prop_assert!((exact - closed).abs() < 1e-12);
    }

    #[test]
    fn midpoint_dominance(r in 1u64..500, t1 in prop(), t2 in prop(), x0 in prop()) {
        let bound = maxmin_bayes_factor_bound(r, t1, t2);
        prop_assert!(fixed_null_factor(r, t1, t2, x0) <= bound * (1.0 + 1e-12));
        let mid = fixed_null_factor(r, t1, t2, Proportion::midpoint(t1, t2));
        prop_assert!((mid.ln() - bound.ln()).abs() < 1e-10 || mid == bound);
    }

    #[test]
    fn maxmin_decays_in_r(r in 1u64..10_000, t1 in interior(), t2 in interior()) {
        prop_assume!((t1.get() - t2.get()).abs() > 1e-3);
        prop_assert!(log_maxmin_bayes_factor_bound(r + 1, t1, t2) < log_maxmin_bayes_factor_bound(r, t1, t2));
        let (a, b) = (maxmin_bayes_factor_bound(r + 1, t1, t2), maxmin_bayes_factor_bound(r, t1, t2));
        prop_assert!(a < b || b < f64::MIN_POSITIVE);
    }

    #[test]
    fn welch_antisymmetry_and_scaling(r in 1u64..100_000, t1 in interior(), t2 in interior()) {
        let t = welch_t_binomial(r, t1, t2).unwrap();
        prop_assert_eq!(t, -welch_t_binomial(r, t2, t1).unwrap());
        prop_assert_eq!(welch_t_binomial(4 * r, t1, t2).unwrap(), 2.0 * t);
        let g = welch_t_general(t1.get(), t2.get(), t1.variance(), t2.variance(), r, r).unwrap();
        prop_assert!((g - t).abs() < 1e-12 * t.abs().max(1.0));
    }

    #[test]
    fn js_welch_rhs_ignores_r(t1 in interior(), t2 in interior()) {
        let base = js_welch_lower_bound_rhs(1, t1, t2).unwrap();
        for r in [10, 1000] {
            prop_assert_eq!(js_welch_lower_bound_rhs(r, t1, t2).unwrap(), base);
        }
    }

    #[test]
    fn no_equal_rate_point_beats_midpoint(d in experiment(60), x in prop()) {
        let best = log_likelihood_point(&d, most_favorable_null(&d));
        prop_assert!(log_likelihood_point(&d, ParameterPoint::diagonal(x)) <= best + 1e-12);
        let mle = log_likelihood_point(&d, most_favorable_alternative(&d));
        prop_assert!(log_likelihood_point(&d, ParameterPoint::new(x, x)) <= mle + 1e-12);
    }
}

#[test]
fn no_grid_prior_beats_mle_on_random_datasets() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    let grid = GridSpec::interior(49).unwrap();
    let pts = grid.points();
    for _ in 0..100 {
        let r = rng.gen_range(1..=80);
        let d = ExperimentData::new(r, rng.gen_range(0..=r), rng.gen_range(0..=r)).unwrap();
        let mle = log_likelihood_point(&d, most_favorable_alternative(&d));
        let mid = log_likelihood_point(&d, most_favorable_null(&d));
        for &a in &pts {
            assert!(log_likelihood_point(&d, ParameterPoint::diagonal(a)) <= mid + 1e-12);
            for &b in &pts {
                assert!(log_likelihood_point(&d, ParameterPoint::new(a, b)) <= mle + 1e-12);
            }
        }
    }
}

#[test]
fn maxmin_agreement_suite() {
    let grid = GridSpec::unit(999).unwrap();
    let mut count = 0;
    for r in [3u64, 8, 17, 31, 50] {
        for k1 in (0..=r).step_by(3) {
            for k2 in (0..=r).step_by(5) {
                let d = ExperimentData::new(r, k1, k2).unwrap();
                let res = grid_maxmin(&d, &grid).unwrap();
                assert!(res.abs_log_gap <= 1e-6, "{d:?}: {res:?}");
                count += 1;
            }
        }
    }
    assert!(count >= 50);
}

#[test]
fn js_region_is_symmetric_and_deterministic() {
    let grid = GridSpec::interior(41).unwrap();
    let a = map_js_welch_region(&grid).unwrap();
    let b = map_js_welch_region(&grid).unwrap();
    assert_eq!(a, b);
    let n = grid.resolution;
    for i in 0..n {
        for j in 0..n {
            let (x, y) = (&a.rows[i * n + j], &a.rows[j * n + i]);
            assert_eq!((x.lhs, x.rhs, x.holds), (y.lhs, y.rhs, y.holds));
        }
    }
}
