mod common;

use common::*;
use distrisk::indexsets::IncreasingMap;
use distrisk::oracle::{es_minimization, survival};
use distrisk::randvar::{apply_increasing, expectation_product, is_comonotonic, is_tail_event};
use distrisk::{Plrv, EPS};
use proptest::prelude::*;

const LEVELS: [f64; 7] = [0.01, 0.1, 0.25, 0.5, 0.75, 0.9, 0.99];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn quantiles_are_ordered(x in rv_strategy()) {
        let mut prev = f64::NEG_INFINITY;
        for p in LEVELS {
            let lo = x.quantile_left(p).unwrap();
            let hi = x.quantile_right(p).unwrap();
            prop_assert!(lo <= hi + EPS);
            prop_assert!(prev <= lo + EPS);
            prev = hi;
            prop_assert!(x.var(p).unwrap() <= x.es(p).unwrap() + EPS);
            prop_assert!(x.ess_inf() - EPS <= lo && hi <= x.ess_sup() + EPS);
        }
    }

    #[test]
    fn left_quantile_matches_survival(x in rv_strategy()) {
        for p in LEVELS {
            let q = x.quantile_left(p).unwrap();
            // P(X <= q) >= p, and P(X < q) <= p
            prop_assert!(1.0 - survival(&x, q) >= p - 1e-9);
            let below = x.pieces().iter().map(|pc| {
                let (lo, hi) = (pc.min(), pc.max());
                if hi < q { pc.len() } else if lo < q { pc.len() * (q - lo) / (hi - lo) } else { 0.0 }
            }).sum::<f64>();
            prop_assert!(below <= p + 1e-9);
        }
    }

    #[test]
    fn es_matches_minimization(x in rv_strategy(), p in 0.0f64..0.99) {
        let exact = x.es(p).unwrap();
        prop_assert!(close(exact, es_minimization(&x, p), 1e-9), "{} vs {}", exact, es_minimization(&x, p));
    }

    #[test]
    fn quantile_integrates_to_mean(x in rv_strategy()) {
        let q = x.quantile_fn();
        prop_assert!(close(q.integral(0.0, 1.0), x.mean(), 1e-12));
        prop_assert!(close(x.es(0.0).unwrap(), x.mean(), 1e-12));
    }

    #[test]
    fn affine_equivariance(x in rv_strategy(), a in 0.1f64..3.0, b in -2.0f64..2.0, p in 0.01f64..0.99) {
        let y = x.apply_affine(a, b);
        prop_assert!(close(y.var(p).unwrap(), a * x.var(p).unwrap() + b, 1e-12));
        prop_assert!(close(y.var_plus(p).unwrap(), a * x.var_plus(p).unwrap() + b, 1e-12));
        prop_assert!(close(y.es(p).unwrap(), a * x.es(p).unwrap() + b, 1e-12));
        let neg = x.scale(-1.0);
        prop_assert!(close(neg.var_plus(1.0 - p).unwrap(), -x.var(p).unwrap(), 1e-12));
    }

    #[test]
    fn rank_transform_is_a_distributional_transform(x in rv_strategy()) {
        let u = x.rank_transform();
        prop_assert!(u.quantile_fn().approx_eq(&distrisk::MonoFn::identity()));
        let back = apply_increasing(&u, &x.quantile_fn().to_map()).unwrap();
        prop_assert!(back.approx_eq(&x), "{:?} vs {:?}", back.pieces(), x.pieces());
        prop_assert!(is_comonotonic(&[x.clone(), u]));
    }

    #[test]
    fn superlevel_measure_is_survival(x in rv_strategy(), t in -4.0f64..4.0) {
        let e = x.superlevel(t);
        prop_assert!((e.measure() - survival(&x, t)).abs() <= 1e-12);
        prop_assert!(is_tail_event(&x, &e));
    }

    #[test]
    fn addition_is_pointwise(x in rv_strategy(), y in rv_strategy()) {
        let s = x.add(&y);
        prop_assert!(s.approx_eq(&y.add(&x)));
        prop_assert!(close(s.mean(), x.mean() + y.mean(), 1e-12));
        for k in 0..50 {
            let w = (k as f64 + 0.5) / 50.0;
            prop_assert!(close(s.eval(w), x.eval(w) + y.eval(w), 1e-12));
        }
        prop_assert!(close(expectation_product(&x, &Plrv::constant(1.0)), x.mean(), 1e-12));
    }

    #[test]
    fn increasing_images_are_comonotonic(x in rv_strategy(), f in monofn_strategy()) {
        // reuse an increasing function of [0,1] as a value map on the range of x
        let (lo, hi) = (x.ess_inf(), x.ess_sup());
        let width = (hi - lo).max(1.0);
        let stretch = IncreasingMap::affine(1.0 / width, -lo / width);
        let unit = apply_increasing(&x, &stretch).unwrap();
        let y = apply_increasing(&unit, &f.to_map()).unwrap();
        prop_assert!(is_comonotonic(&[x.clone(), y.clone()]));
        prop_assert!(is_comonotonic(&[x.clone(), x.scale(2.0).shift(1.0)]));
        if x.ess_sup() - x.ess_inf() > 1e-6 {
            prop_assert!(!is_comonotonic(&[x.clone(), x.scale(-1.0)]));
        }
    }

    #[test]
    fn json_round_trip(x in rv_strategy()) {
        let text = serde_json::to_string(&x).unwrap();
        let back: Plrv = serde_json::from_str(&text).unwrap();
        prop_assert!(back.approx_eq(&x));
    }
}

#[test]
fn rejects_bad_partitions() {
    use distrisk::Piece;
    assert!(Plrv::new(vec![Piece::constant(0.0, 0.5, 1.0)]).is_err());
    assert!(Plrv::new(vec![Piece::constant(0.0, 0.6, 1.0), Piece::constant(0.5, 1.0, 1.0)]).is_err());
    assert!(Plrv::new(vec![Piece::constant(0.0, 1.0, f64::NAN)]).is_err());
    assert!(serde_json::from_str::<Plrv>(r#"{"pieces":[[0,0.4,0,1]]}"#).is_err());
    assert!(Plrv::identity().quantile_left(0.0).is_err());
    assert!(Plrv::identity().var_plus(1.0).is_err());
}
