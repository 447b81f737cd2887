mod common;

use common::*;
use muck_core::characteristic::{gj_lambda_star, lemma_gap_check};
use muck_core::weight::{dual_weight, exp_weight, holder_interpolant, normalize_mean_ratio};
use muck_core::{Analyzer, CharacteristicKind, Family, GridFunction, Interval, Weight};
use proptest::prelude::*;

fn analyzer(family: Family) -> Analyzer {
    Analyzer::new(family)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn matches_brute_force((n, logs) in log_values(6, 2.0), family in families(), p in 1.2f64..5.0) {
        let w = weight_of(n, &logs);
        let g = w.grid();
        let an = analyzer(family);
        let rel = |a: f64, b: f64| (a - b).abs() <= 1e-10 * b.abs().max(1.0);
        prop_assert!(rel(an.ap(&w, p).unwrap().value, ap(w.values(), &g, family, p)));
        prop_assert!(rel(an.ainfty(&w).value, ainfty(w.values(), &g, family)));
        prop_assert!(rel(an.a1(&w).value, a1(w.values(), &g, family)));
        prop_assert!(rel(an.bmo(&w.log()).value, bmo(&logs, &g, family)));
        prop_assert!(rel(an.blo(&w.log()).value, blo(&logs, &g, family)));
    }

    #[test]
    fn witness_re_evaluates((n, logs) in log_values(6, 2.0), family in families()) {
        let w = weight_of(n, &logs);
        let an = analyzer(family);
        for kind in [CharacteristicKind::Ap(2.0), CharacteristicKind::Ap(3.0), CharacteristicKind::AInfinity] {
            let r = an.of_weight(&w, kind).unwrap();
            let again = Analyzer::new(family).of_weight(&w, kind).unwrap();
            prop_assert_eq!(&r, &again);
            let range = r.witness.cell_range(&w.grid());
            let sub = &w.values()[range];
            let one = match kind {
                CharacteristicKind::AInfinity => {
                    let m = sub.iter().sum::<f64>() / sub.len() as f64;
                    m / (sub.iter().map(|x| x.ln()).sum::<f64>() / sub.len() as f64).exp()
                }
                CharacteristicKind::Ap(p) => {
                    let a = sub.iter().sum::<f64>() / sub.len() as f64;
                    let b = sub.iter().map(|x| x.powf(1.0 / (1.0 - p))).sum::<f64>() / sub.len() as f64;
                    a * b.powf(p - 1.0)
                }
                _ => unreachable!(),
            };
            prop_assert!((one - r.value).abs() <= 1e-10 * r.value);
        }
    }

    #[test]
    fn jensen_floor_and_ordering((n, logs) in log_values(6, 2.0), family in families()) {
        let w = weight_of(n, &logs);
        let an = analyzer(family);
        let ps = [1.5, 2.0, 3.0, 4.0];
        let vals: Vec<f64> = ps.iter().map(|&p| an.ap(&w, p).unwrap().value).collect();
        let ainf = an.ainfty(&w).value;
        prop_assert!(ainf >= 1.0 - 1e-12);
        for (i, &v) in vals.iter().enumerate() {
            prop_assert!(v >= 1.0 - 1e-12);
            prop_assert!(ainf <= v + 1e-12);
            for &later in &vals[i..] {
                prop_assert!(later <= v + 1e-10);
            }
        }
    }

    #[test]
    fn scale_invariance((n, logs) in log_values(6, 2.0), family in families(), c in 1e-3f64..1e3) {
        let w = weight_of(n, &logs);
        let cw = w.scaled(c).unwrap();
        let an = analyzer(family);
        for kind in [CharacteristicKind::A1, CharacteristicKind::Ap(2.0), CharacteristicKind::Ap(1.7), CharacteristicKind::AInfinity] {
            let a = an.of_weight(&w, kind).unwrap().value;
            let b = an.of_weight(&cw, kind).unwrap().value;
            prop_assert!((a - b).abs() <= 1e-12 * a, "{kind}: {a} vs {b}");
        }
        prop_assert!(an.d_star(&w, &cw).unwrap() <= 1e-12);
    }

    #[test]
    fn pseudometric(
        (n, a) in log_values(5, 1.5),
        seed in any::<u64>(),
        family in families(),
    ) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut other = || weight_of(n, &(0..a.len()).map(|_| rng.random_range(-1.5..1.5)).collect::<Vec<_>>());
        let (u, v, w) = (weight_of(n, &a), other(), other());
        let an = analyzer(family);
        let d = |x: &Weight, y: &Weight| an.d_star(x, y).unwrap();
        prop_assert!(d(&u, &v) >= 0.0);
        prop_assert!((d(&u, &v) - d(&v, &u)).abs() <= 1e-12);
        prop_assert!(d(&u, &w) <= d(&u, &v) + d(&v, &w) + 1e-12);
        prop_assert_eq!(d(&u, &u), 0.0);
        prop_assert!(d(&u, &v) > 0.0 || u.normalized().values().iter().zip(v.normalized().values()).all(|(x, y)| (x - y).abs() <= 1e-10));
    }

    #[test]
    fn holder_convexity((n, a) in log_values(6, 1.5), (_, b) in log_values(6, 1.5), t in 0.0f64..=1.0, p in 1.1f64..5.0) {
        let u = weight_of(n, &a);
        let v = weight_of(n, &b.iter().copied().cycle().take(a.len()).collect::<Vec<_>>());
        let an = Analyzer::dyadic();
        let mid = holder_interpolant(&u, &v, t).unwrap();
        let lhs = an.ap(&mid, p).unwrap().value;
        let rhs = an.ap(&u, p).unwrap().value.powf(t) * an.ap(&v, p).unwrap().value.powf(1.0 - t);
        prop_assert!(lhs <= rhs * (1.0 + 1e-10) + 1e-10);
        let lhs1 = an.a1(&mid).value;
        let rhs1 = an.a1(&u).value.powf(t) * an.a1(&v).value.powf(1.0 - t);
        prop_assert!(lhs1 <= rhs1 * (1.0 + 1e-10) + 1e-10);
    }

    #[test]
    fn duality_per_interval((n, logs) in log_values(6, 2.0), p in 1.1f64..6.0, family in families()) {
        let w = weight_of(n, &logs);
        let q = p / (p - 1.0);
        let dual = dual_weight(&w, p).unwrap();
        let g = w.grid();
        for iv in family.intervals(&g) {
            let r = iv.cell_range(&g);
            let one = |v: &[f64], p: f64| {
                let s = &v[r.clone()];
                let a = s.iter().sum::<f64>() / s.len() as f64;
                let b = s.iter().map(|x| x.powf(1.0 / (1.0 - p))).sum::<f64>() / s.len() as f64;
                a * b.powf(p - 1.0)
            };
            let lhs = one(dual.values(), q);
            let rhs = one(w.values(), p).powf(q - 1.0);
            prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs, "{iv}: {lhs} vs {rhs}");
        }
        let back = dual_weight(&dual, q).unwrap();
        let wn = w.normalized();
        prop_assert!(back.values().iter().zip(wn.values()).all(|(x, y)| (x - y).abs() <= 1e-12 * y));
    }

    #[test]
    fn a1_implies_blo((n, logs) in log_values(6, 2.0), family in families()) {
        let w = weight_of(n, &logs);
        let an = analyzer(family);
        prop_assert!(an.blo(&w.log()).value <= an.a1(&w).value.ln() + 1e-10);
        prop_assert!(an.blo(&w.log()).value >= an.bmo(&w.log()).value / 2.0 - 1e-12);
    }

    #[test]
    fn lemma_gap((n, logs) in log_values(6, 0.1), (_, base) in log_values(6, 0.5)) {
        let w0 = weight_of(n, &base.iter().copied().cycle().take(logs.len()).collect::<Vec<_>>());
        let w = w0.product(&weight_of(n, &logs)).unwrap();
        let w = normalize_mean_ratio(&w, &w0, &Interval::ROOT).unwrap();
        let (lhs, rhs) = lemma_gap_check(&Analyzer::dyadic(), &w, &w0, &Interval::ROOT).unwrap();
        prop_assert!(lhs <= rhs + 1e-12, "{lhs} > {rhs}");
    }
}

#[test]
fn gj_rescaling_and_constant() {
    let g = grid(8);
    let an = Analyzer::dyadic();
    let f = GridFunction::from_fn(g, |x| (6.0 * x).sin() + x).unwrap();
    let f2 = f.map(|v| 2.0 * v).unwrap();
    let l1 = gj_lambda_star(&an, &f, 3.0).unwrap();
    let l2 = gj_lambda_star(&an, &f2, 3.0).unwrap();
    assert!((l2 - l1 / 2.0).abs() < 1e-5, "{l1} {l2}");
    let flat = GridFunction::constant(g, 3.0).unwrap();
    assert_eq!(gj_lambda_star(&an, &flat, 2.0).unwrap(), f64::INFINITY);
    assert!(gj_lambda_star(&an, &f, 1.0).is_err());
    // threshold sits on the boundary of the predicate
    let at = an.ap(&exp_weight(&f, l1).unwrap(), 2.0).unwrap().value;
    assert!((at - 3.0).abs() < 1e-4, "{at}");
}

#[test]
fn exp_weight_closed_form() {
    let g = grid(4);
    let f = GridFunction::from_fn(g, |x| if x < 0.5 { 1.0 } else { -1.0 }).unwrap();
    let v = Analyzer::dyadic().ap(&exp_weight(&f, 0.1).unwrap(), 2.0).unwrap().value;
    assert!((v - 0.1f64.cosh().powi(2)).abs() < 1e-12);
    assert!((0.1f64.cosh().powi(2) - 1.010033).abs() < 1e-6);
}
