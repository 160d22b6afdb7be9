use ggc_core::jk::{
    alpha_to_a, big_t_from_t, eq3_denominator_derivative, ik_exponential, j1_closed, jk_eq2,
    jk_eq3, jk_product_form, jk_xform, t_from_big_t, xform_coefficients, MixtureWeights,
    ProductParams,
};
use ggc_core::monotonicity::{cm_check, linear_grid, CMSettings};
use ggc_core::quadrature::QuadSettings;
use ggc_core::types::{derived_constants, JkParams};
use proptest::prelude::*;

/// Delta-form `J_k` by a plain trapezoid rule in `y = log(delta)`, with the
/// constants written out here rather than taken from the crate.
fn oracle_jk(a: f64, b: f64, k: f64, big_t: f64) -> f64 {
    let big_a = a * b + 1.0 / (a * b);
    let big_b = a / b + b / a;
    let alpha = a + 1.0 / a;
    let beta = b + 1.0 / b;
    let c = b - 1.0 / b;
    let root = ((big_t + big_a) * (big_t + big_b)).sqrt();
    let f = |y: f64| (c * c / (2.0 * y.cosh() * root + 2.0 * big_t + alpha * beta)).powf(k) / c;
    let (lo, hi, h) = (-200.0 / k.min(1.0), 200.0 / k.min(1.0), 0.05);
    let n = ((hi - lo) / h) as usize;
    h * (0..=n).map(|i| f(lo + i as f64 * h)).sum::<f64>()
}

#[test]
fn raw_form_against_trapezoid_oracle() {
    let s = QuadSettings::relative(1e-12);
    for (a, b, k, t) in [
        (2.0, 2.0, 0.3, 1.0),
        (1.1, 3.0, 2.5, 0.2),
        (5.0, 1.5, 7.0, 3.0),
        (1.2, 4.0, 0.5, 2.0),
    ] {
        let p = JkParams::new(a, b, k).unwrap();
        let oracle = oracle_jk(a, b, k, t + 1.0 / t);
        let raw = jk_eq2(&p, t, &s).unwrap();
        assert!(
            ((raw - oracle) / oracle).abs() < 1e-10,
            "({a}, {b}, {k}, {t}): {raw} vs {oracle}"
        );
    }
}

#[test]
fn closed_form_against_trapezoid_oracle() {
    let p = JkParams::new(3.0, 1.7, 1.0).unwrap();
    for big_t in [2.0, 5.5, 40.0] {
        let oracle = oracle_jk(3.0, 1.7, 1.0, big_t);
        assert!(((j1_closed(&p, big_t).unwrap() - oracle) / oracle).abs() < 1e-12);
    }
}

#[test]
fn ik_matches_bessel_oracle_after_mixing() {
    // alpha = 0.5 * 2.5 + 0.5 * 3.0 = 2.75
    let w = MixtureWeights::new(vec![0.5, 0.5], vec![2.5, 3.0]).unwrap();
    let a = alpha_to_a(2.75).unwrap();
    let p = JkParams::new(a, 2.0, 1.0).unwrap();
    let c = derived_constants(&p);
    for big_t in [2.0, 6.0] {
        let root = ((big_t + c.big_a) * (big_t + c.big_b)).sqrt();
        let h = 0.02;
        let bessel: f64 = h
            * (-1500..=1500)
                .map(|i| (-root * 2.0 * (i as f64 * h).cosh()).exp())
                .sum::<f64>();
        let oracle = (-(2.0 * big_t + c.alpha * c.beta)).exp() * bessel;
        let v = ik_exponential(&w, 2.0, big_t, &QuadSettings::relative(1e-12)).unwrap();
        assert!(((v - oracle) / oracle).abs() < 1e-10, "{v} vs {oracle}");
    }
}

#[test]
fn jk_decreases_in_big_t() {
    let p = JkParams::new(2.0, 3.0, 2.5).unwrap();
    let s = QuadSettings::default();
    let values: Vec<f64> = [2.0, 3.0, 5.0, 9.0]
        .iter()
        .map(|&bt| jk_eq3(&p, bt, &s).unwrap())
        .collect();
    assert!(values.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn product_form_requires_shared_b() {
    let p1 = JkParams::new(2.0, 2.0, 0.5).unwrap();
    let p2 = JkParams::new(3.0, 2.5, 0.5).unwrap();
    assert!(ProductParams::from_params(&[p1, p2]).is_err());
    let p3 = JkParams::new(3.0, 2.0, 0.5).unwrap();
    let prod = ProductParams::from_params(&[p1, p3]).unwrap();
    assert_eq!(prod.total_shape(), 1.0);
    assert!(jk_product_form(&prod, 1.0, &QuadSettings::default()).unwrap() > 0.0);
}

#[test]
fn delta_denominator_derivative_is_cm() {
    let settings = CMSettings {
        max_order: 6,
        grid: linear_grid(2.05, 50.0, 40),
        ..CMSettings::default()
    };
    for (a, b) in [(2.0, 2.0), (1.2, 4.0), (5.0, 1.5)] {
        let p = JkParams::new(a, b, 1.0).unwrap();
        for delta in [0.1, 1.0, 7.0] {
            let r = cm_check(
                |bt| Ok(eq3_denominator_derivative(&p, bt, delta)),
                &settings,
            )
            .unwrap();
            assert!(
                r.passed,
                "({a}, {b}), delta = {delta}: {:?}",
                r.first_violation
            );
        }
    }
}

#[test]
fn ik_is_positive_and_decreasing() {
    let w = MixtureWeights::new(vec![0.3, 0.7], vec![2.2, 4.0]).unwrap();
    let s = QuadSettings::default();
    let values: Vec<f64> = [2.0, 2.5, 4.0, 10.0]
        .iter()
        .map(|&bt| ik_exponential(&w, 1.7, bt, &s).unwrap())
        .collect();
    assert!(values[3] > 0.0);
    assert!(values.windows(2).all(|v| v[1] < v[0]));
}

#[test]
fn evaluations_are_bit_identical() {
    let p = JkParams::new(1.1, 3.0, 0.3).unwrap();
    let s = QuadSettings::default();
    assert_eq!(
        jk_eq2(&p, 0.2, &s).unwrap().to_bits(),
        jk_eq2(&p, 0.2, &s).unwrap().to_bits()
    );
    assert_eq!(
        jk_eq3(&p, 5.2, &s).unwrap().to_bits(),
        jk_eq3(&p, 5.2, &s).unwrap().to_bits()
    );
}

proptest! {
    #[test]
    fn xform_coefficients_factor(a in 1.01f64..10.0, b in 1.01f64..10.0, lt in -3.0f64..3.0) {
        let t = lt.exp();
        let p = JkParams::new(a, b, 1.0).unwrap();
        let c = derived_constants(&p);
        let (c1, c2) = xform_coefficients(&p, t);
        let bt = t + 1.0 / t;
        let rhs = (bt + c.big_a) * (bt + c.big_b);
        prop_assert!(((c1 * c2 - rhs) / rhs).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn forms_agree(a in 1.05f64..8.0, b in 1.05f64..8.0, k in 0.2f64..6.0, lt in -2.0f64..2.0) {
        let t = lt.exp();
        let s = QuadSettings::default();
        let p = JkParams::new(a, b, k).unwrap();
        let raw = jk_eq2(&p, t, &s).unwrap();
        let x = jk_xform(&p, t, &s).unwrap();
        let d = jk_eq3(&p, t + 1.0 / t, &s).unwrap();
        prop_assert!(((x - raw) / raw).abs() < 1e-8);
        prop_assert!(((d - raw) / raw).abs() < 1e-8);
    }

    #[test]
    fn t_reciprocal_symmetry(a in 1.05f64..8.0, b in 1.05f64..8.0, k in 0.2f64..6.0, lt in -2.0f64..2.0) {
        let t = lt.exp();
        let s = QuadSettings::relative(1e-13);
        let p = JkParams::new(a, b, k).unwrap();
        let lhs = jk_eq2(&p, t, &s).unwrap();
        let rhs = jk_eq2(&p, 1.0 / t, &s).unwrap();
        prop_assert!(((lhs - rhs) / lhs).abs() < 1e-10);
    }

    #[test]
    fn a_minus_b_identity(a in 1.0f64..10.0, b in 1.0f64..10.0) {
        let a = a.max(1.0 + 1e-9);
        let b = b.max(1.0 + 1e-9);
        let c = derived_constants(&JkParams::new(a, b, 1.0).unwrap());
        let identity = (a - 1.0 / a) * (b - 1.0 / b);
        prop_assert!((c.big_a - c.big_b - identity).abs() < 1e-12);
        prop_assert!(c.big_a > c.big_b);
    }

    #[test]
    fn alpha_inversion_round_trip(a in 1.001f64..1e3) {
        let alpha = a + 1.0 / a;
        let back = alpha_to_a(alpha).unwrap();
        prop_assert!(((back - a) / a).abs() < 1e-9);
    }

    #[test]
    fn big_t_round_trip(t in 1.0f64..1e4) {
        let bt = big_t_from_t(t).unwrap();
        let back = t_from_big_t(bt).unwrap();
        prop_assert!(((back - t) / t).abs() < 1e-7);
    }
}
