use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use proptest::prelude::*;
use slz_core::charfn::{elementary_factor, exponent_of_convergence, ln_elementary_factor, settle, HadamardProduct};
use slz_core::convrate::total_variation;
use slz_core::expr::{eval_expr, parse_expr};
use slz_core::fmt17;
use slz_core::speczeta::{zeta_contour, zeta_sum, CharFnRef, ZetaQuery};

fn squares() -> HadamardProduct {
    HadamardProduct::new((1..=400).map(|n| (n * n) as f64).collect(), 0, 0).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn elementary_factor_matches_definition(re in -0.9f64..0.9, im in -0.9f64..0.9, p in 0u32..5) {
        let w = C64::new(re, im);
        let mut s = C64::new(0.0, 0.0);
        for j in 1..=p {
            s += w.powu(j) / j as f64;
        }
        let direct = (C64::new(1.0, 0.0) - w) * s.exp();
        prop_assert!((elementary_factor(w, p) - direct).norm() < 1e-12 * (1.0 + direct.norm()));
        prop_assert!((ln_elementary_factor(w, p).exp() - direct).norm() < 1e-12 * (1.0 + direct.norm()));
    }

    #[test]
    fn settle_recovers_geometric_limit(a in -5.0f64..5.0, b in -3.0f64..3.0, r in 0.1f64..0.7) {
        let seq: Vec<C64> = (0..6).map(|k| C64::new(a + b * r.powi(k), 0.0)).collect();
        let (v, _) = settle(&seq);
        prop_assert!((v.re - a).abs() < 1e-9 * (1.0 + b.abs()));
    }

    #[test]
    fn exponent_of_power_sequence(beta in 1.2f64..3.0) {
        let v: Vec<f64> = (1..=200).map(|n| (n as f64).powf(beta)).collect();
        prop_assert!((exponent_of_convergence(&v).unwrap() - 1.0 / beta).abs() < 0.05);
    }

    #[test]
    fn zeta_sum_scales(scale in 0.5f64..4.0, s in 1.2f64..3.0) {
        let eigs: Vec<f64> = (1..=30).map(|n| (n as f64).powi(2) + 0.5).collect();
        let scaled: Vec<f64> = eigs.iter().map(|l| scale * l).collect();
        let a = zeta_sum(&eigs, C64::new(s, 0.0)).unwrap();
        let b = zeta_sum(&scaled, C64::new(s, 0.0)).unwrap();
        prop_assert!((b - a * scale.powf(-s)).norm() < 1e-12 * a.norm());
    }

    #[test]
    fn total_variation_of_monotone_is_span(mut v in proptest::collection::vec(-10.0f64..10.0, 2..20)) {
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        prop_assert!((total_variation(&v) - (v[v.len() - 1] - v[0])).abs() < 1e-12);
    }

    #[test]
    fn fmt17_round_trips(x in proptest::num::f64::NORMAL) {
        prop_assert_eq!(fmt17(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn expr_display_round_trips(a in -5.0f64..5.0, b in 0.1f64..3.0, x in 0.1f64..4.0) {
        let names: BTreeSet<String> = ["k".to_string()].into_iter().collect();
        let src = format!("({a})*x^2 - k*exp(-x/{b}) + sin(x)/x");
        let e = parse_expr(&src, &names).unwrap();
        let again = parse_expr(&e.to_string(), &names).unwrap();
        let p = BTreeMap::from([("k".to_string(), 1.5)]);
        let (u, v) = (eval_expr(&e, x, &p).unwrap(), eval_expr(&again, x, &p).unwrap());
        prop_assert!((u - v).abs() <= 1e-14 * (1.0 + u.abs()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn contour_independent_of_psi_and_radius(psi in 0.55f64..0.95, r in 0.2f64..0.9) {
        let h = squares();
        let base = zeta_contour(CharFnRef::Hadamard(&h), &ZetaQuery::new(C64::new(1.3, 0.2))).unwrap().value;
        let q = ZetaQuery { psi: psi * PI, r, ..ZetaQuery::new(C64::new(1.3, 0.2)) };
        let v = zeta_contour(CharFnRef::Hadamard(&h), &q).unwrap().value;
        prop_assert!((v - base).norm() < 3e-8, "{} vs {}", v, base);
    }
}
