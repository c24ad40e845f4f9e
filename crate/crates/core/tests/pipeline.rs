//! Cross-module properties: spaces, Hecke operators and L-values together.

use halfweight::forms::{eigen_space, minus_form, plus_form, theta, FrickeSign, Weight};
use halfweight::hecke::{eigen_decompose, eigen_ratio_deviation, hecke_space, t_p2_coeffs};
use halfweight::lfunction::{eval_form, functional_equation_residual, lstar_generic, EmbeddedForm, ScanSign};
use halfweight::mp::{rat_to_complex, Complex, Real};
use halfweight::qseries::Rat;
use proptest::prelude::*;

const BITS: usize = 128;

fn rat(n: i64, d: i64) -> Rat {
    Rat::new(n.into(), d.into())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    // sigma off the quarter grid, so this complements the grid checks
    #[test]
    fn plus_form_is_positive_between_grid_points(k in 4u32..=7, num in -200i64..=1000) {
        let sigma = rat(num, 97);
        prop_assume!(sigma <= rat(k as i64 + 3, 1));
        let f = EmbeddedForm::from_vector(&plus_form(k, 200).unwrap(), BITS, "plus");
        let v = lstar_generic(&f, &rat_to_complex(&sigma, BITS)).unwrap();
        prop_assert_eq!(v.definite_sign(), ScanSign::Positive);
    }

    #[test]
    fn minus_form_sign_follows_the_center(k in 6u32..=8, num in -200i64..=1100) {
        let sigma = rat(num, 101);
        let center = rat(2 * k as i64 + 1, 4);
        prop_assume!(sigma <= rat(k as i64 + 3, 1) && sigma != center);
        let f = EmbeddedForm::from_vector(&minus_form(k, 200).unwrap(), BITS, "minus");
        let v = lstar_generic(&f, &rat_to_complex(&sigma, BITS)).unwrap();
        let expected = if sigma > center { ScanSign::Positive } else { ScanSign::Negative };
        prop_assert_eq!(v.definite_sign(), expected);
    }

    // a generic element of the cusp space, with neither Fricke sign
    #[test]
    fn functional_equation_for_mixed_forms(a in prop::sample::select(vec![-5i64, -2, -1, 1, 3, 4]), b in 1i64..=5, re in 0u32..=34, im in -8i32..=8) {
        let k = 8;
        let plus = eigen_space(k, FrickeSign::Plus, 120).unwrap();
        let minus = eigen_space(k, FrickeSign::Minus, 120).unwrap();
        let f = plus.basis()[0].ring.scale(&rat(a, 1)).add(&minus.basis()[0].ring.scale(&rat(b, 1)));
        let fw4 = f.w4();
        let form = EmbeddedForm::from_series(&f.series(120), &fw4.series(120), f.weight(), BITS, "mixed");
        prop_assert!(form.sign.is_none());
        let s = Complex::new(Real::from_f64(re as f64 / 4.0, BITS), Real::from_f64(im as f64 / 4.0, BITS));
        let r = functional_equation_residual(&form, &s).unwrap();
        prop_assert!(r.residual.to_f64() < 1e-20, "residual {:?}", r.residual);
    }

    #[test]
    fn hecke_images_stay_in_the_space(k in 4u32..=9, c in proptest::collection::vec(-9i64..=9, 4), p in prop::sample::select(vec![3u64, 5])) {
        let space = hecke_space(k, Some(FrickeSign::Plus), &[p], 0).unwrap();
        let coords: Vec<Rat> = (0..space.dim()).map(|i| rat(c[i % c.len()], 1)).collect();
        let f = space.combination(&coords);
        let image = t_p2_coeffs(&f.series, p, k, space.prec() / (p * p) as usize).unwrap();
        let small = eigen_space(k, FrickeSign::Plus, image.prec()).unwrap();
        prop_assert!(small.coordinates(&image).is_ok());
    }

    #[test]
    fn theta_transformation_at_random_points(t in 0.3f64..3.0) {
        let t = Real::from_f64(t, BITS);
        let w = Weight::from_twice(1);
        let series = theta(400);
        let direct = eval_form(&series, w, &t).unwrap();
        let dual = eval_form(&series, w, &(Real::one(BITS) / (&t * 4))).unwrap();
        let lhs = &dual.value / &(&t * 2).sqrt();
        let diff = (&lhs - &direct.value).abs();
        // plus one rounding for the division and square root
        let slack = direct.value.abs() * Real::pow2(-120, BITS);
        prop_assert!(diff <= direct.error_bound() + dual.error_bound() * 2 + slack);
    }
}

#[test]
fn eigenforms_are_normalized_and_eigen() {
    for (k, sign) in [(8, FrickeSign::Plus), (10, FrickeSign::Minus)] {
        let space = hecke_space(k, Some(sign), &[3, 5, 7], 25 * 31).unwrap();
        for e in eigen_decompose(&space, &[3, 5, 7], BITS).unwrap() {
            assert!((&e.coeffs[1] - &Real::one(BITS)).abs() < Real::pow2(-100, BITS));
            for p in [3, 5] {
                assert!(eigen_ratio_deviation(&e, p, 30).unwrap() < Real::pow2(-64, BITS));
            }
        }
    }
}
