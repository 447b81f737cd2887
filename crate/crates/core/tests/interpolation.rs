mod common;

use common::*;
use muck_core::interpolation::{
    continuity_upper_bound, factorize, interpolated_weight, interpolation_params, stein_weiss_check,
};
use muck_core::{Analyzer, CircleGrid, NormOptions, OperatorSpec, SignPattern, Weight};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn factorization_reconstructs((n, a) in log_values(7, 0.3), seed in any::<u64>(), t in 0.05f64..=1.0) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let w0 = weight_of(n, &(0..a.len()).map(|_| rng.random_range(-1.0..1.0)).collect::<Vec<_>>());
        let w = w0.product(&weight_of(n, &a)).unwrap();
        let an = Analyzer::dyadic();
        let f = factorize(&w, &w0, t, 2.0, &an).unwrap();
        let back = f.reconstruct(&w0).unwrap();
        let wn = w.normalized();
        prop_assert!(back.values().iter().zip(wn.values()).all(|(x, y)| (x - y).abs() <= 1e-10 * y));
        let lhs = an.d_star(&f.big_w, &w0).unwrap();
        let rhs = an.d_star(&w, &w0).unwrap() / t;
        prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs.max(1.0));
    }

    #[test]
    fn bound_is_log_linear_in_t(gamma in 0.5f64..5.0, c in 0.5f64..3.0, f in 1.0f64..10.0, t0 in 0.0f64..1.0, t1 in 0.0f64..1.0) {
        let (lo, hi) = if t0 <= t1 { (t0, t1) } else { (t1, t0) };
        let a = continuity_upper_bound(gamma, c, f, lo).unwrap();
        let b = continuity_upper_bound(gamma, c, f, hi).unwrap();
        let tol = 1e-12 * a.max(b);
        if c * f > gamma {
            prop_assert!(b >= a - tol);
        } else if c * f < gamma {
            prop_assert!(b <= a + tol);
        }
        let mid = continuity_upper_bound(gamma, c, f, 0.5 * (lo + hi)).unwrap();
        prop_assert!((mid - (a * b).sqrt()).abs() <= 1e-10 * mid);
    }

    #[test]
    fn stein_weiss_holds_on_mixed_trials((n, a) in log_values(6, 1.0), (_, b) in log_values(6, 1.0), t in 0.0f64..=1.0, which in 0usize..3) {
        let w0 = weight_of(n, &a);
        let w1 = weight_of(n, &b.iter().copied().cycle().take(a.len()).collect::<Vec<_>>());
        let g = w0.grid();
        let op = match (which, n >= 2) {
            (1, true) => OperatorSpec::PeriodicHilbert(CircleGrid::new(1 << n).unwrap()),
            (2, true) => OperatorSpec::RieszProjection(CircleGrid::new(1 << n).unwrap()),
            _ => OperatorSpec::martingale(SignPattern::random(g, n as u64)),
        };
        let r = stein_weiss_check(&op, &w0, &w1, 2.0, t, &NormOptions::default(), 1000).unwrap();
        prop_assert!(r.converged);
        prop_assert!(r.holds(1e-9), "{r:?}");
    }
}

#[test]
fn stein_weiss_examples() {
    let g = grid(3);
    let op = OperatorSpec::martingale(SignPattern::alternating(g));
    let opts = NormOptions::default();
    let one = Weight::constant(g, 1.0).unwrap();
    let two = Weight::from_fn(g, |x| if x < 0.5 { 2.0 } else { 1.0 }).unwrap();
    let r = stein_weiss_check(&op, &one, &two, 2.0, 0.5, &opts, 100).unwrap();
    assert!(r.measured <= (r.k0 * r.k1).sqrt() + 1e-8);
    let end = stein_weiss_check(&op, &two, &one, 2.0, 0.0, &opts, 100).unwrap();
    assert!(end.slack.abs() <= 1e-10 && (end.measured - end.k0).abs() <= 1e-10);
    let same = stein_weiss_check(&op, &two, &two, 2.0, 0.3, &opts, 100).unwrap();
    assert!((same.bound - same.k0).abs() <= 1e-10 && (same.measured - same.k0).abs() <= 1e-10);
}

#[test]
fn interpolation_exponents() {
    let q = interpolation_params(2.0, 4.0, 2.0, f64::INFINITY, 0.5).unwrap();
    assert!((q.p_t - 8.0 / 3.0).abs() < 1e-14);
    assert!((q.q_t - 4.0).abs() < 1e-14);
    assert!((q.s - 1.0 / 3.0).abs() < 1e-14);
    assert_eq!(q.r, 0.0);
    let g = grid(2);
    let m = interpolated_weight(&Weight::constant(g, 1.0).unwrap(), &Weight::constant(g, 4.0).unwrap(), 0.5).unwrap();
    assert!(m.values().iter().all(|v| (v - 2.0).abs() < 1e-15));
}
