use crate::error::{Error, Result};
use crate::forms::Weight;
use crate::mp::Real;
use crate::qseries::Series;

const GUARD: usize = 32;

/// `f(it)` with explicit bounds on the truncation and rounding errors.
#[derive(Debug, Clone)]
pub struct EvalValue {
    pub t: Real,
    pub value: Real,
    pub tail_bound: Real,
    pub rounding_bound: Real,
    pub terms_used: usize,
}

impl EvalValue {
    pub fn error_bound(&self) -> Real {
        &self.tail_bound + &self.rounding_bound
    }

    /// +1 or -1 when the value clears its error bound, 0 otherwise.
    pub fn definite_sign(&self) -> i32 {
        if self.value.abs() > self.error_bound() {
            self.value.signum()
        } else {
            0
        }
    }
}

/// Natural log of the growth-model tail `sum_{n >= len} C n^alpha q^n`, or
/// `None` when the geometric ratio is not below one.
pub(crate) fn ln_power_tail(ln_c: f64, alpha: f64, len: usize, ln_q: f64) -> Option<f64> {
    if ln_c == f64::NEG_INFINITY {
        return Some(f64::NEG_INFINITY);
    }
    let n = len.max(1) as f64;
    let ln_rho = alpha.max(0.0) * (1.0 / n).ln_1p() + ln_q;
    if ln_rho >= 0.0 {
        return None;
    }
    Some(ln_c + alpha * n.ln() + n * ln_q - (-ln_rho.exp()).ln_1p())
}

/// `ln C` for the model `|a(n)| <= C n^alpha`, `C = 2 max |a(n)| / n^alpha`.
pub(crate) fn ln_growth_constant<'a>(coeffs: impl Iterator<Item = &'a Real>, alpha: f64) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for (n, a) in coeffs.enumerate().skip(1) {
        if !a.is_zero() {
            best = best.max(a.ln_abs_f64() - alpha * (n as f64).ln());
        }
    }
    best + std::f64::consts::LN_2
}

/// Error of rounding a value of magnitude `mag` to `bits`, with a factor 2 to spare.
pub(crate) fn output_rounding(mag: &Real, bits: usize) -> Real {
    mag * &Real::pow2(1 - bits as i64, mag.prec())
}

pub(crate) fn real_exp_f64(ln: f64, prec: usize) -> Real {
    if ln == f64::NEG_INFINITY {
        Real::zero(prec)
    } else {
        Real::from_f64(ln, prec).exp()
    }
}

/// `f(it) = sum a(n) e^(-2 pi n t)` at the precision of `t`.
///
/// The tail model is `|a(n)| <= C n^w` for weight `w`, with `C` fitted on the
/// available coefficients.
pub fn eval_form(f: &Series, weight: Weight, t: &Real) -> Result<EvalValue> {
    let work = t.prec() + GUARD;
    let coeffs: Vec<Real> = f.coeffs().iter().map(|c| Real::from_rational(c, work)).collect();
    eval_real_coeffs(&coeffs, weight.as_f64(), t)
}

/// [`eval_form`] on embedded coefficients with an explicit growth exponent.
pub fn eval_real_coeffs(coeffs: &[Real], alpha: f64, t: &Real) -> Result<EvalValue> {
    if !t.is_positive() {
        return Err(Error::Domain(format!("evaluation point needs t > 0, got {t:?}")));
    }
    let prec = t.prec();
    let work = prec + GUARD;
    let t = t.with_prec(work);
    let ln_q = -2.0 * std::f64::consts::PI * t.to_f64();
    let ln_c = ln_growth_constant(coeffs.iter(), alpha);
    let ln_target = -((prec as f64) - 32.0) * std::f64::consts::LN_2;
    let ln_tail = ln_power_tail(ln_c, alpha, coeffs.len(), ln_q);
    if ln_tail.is_none_or(|x| x > ln_target) {
        let mut m = coeffs.len().max(2);
        while ln_power_tail(ln_c, alpha, m, ln_q).is_none_or(|x| x > ln_target) && m < 1 << 26 {
            m += m / 8 + 1;
        }
        return Err(Error::InsufficientPrecision {
            what: format!("series evaluation at t = {}", t.to_f64()),
            needed: m,
            available: coeffs.len(),
        });
    }
    let q = (&t * &Real::pi(work) * -2).exp();
    let mut acc = Real::zero(work);
    let mut acc_abs = Real::zero(work);
    for a in coeffs.iter().rev() {
        acc = &acc * &q + a;
        acc_abs = &acc_abs * &q + &a.abs();
    }
    let n = coeffs.len().max(1) as i64;
    let rounding = acc_abs * Real::pow2(-(work as i64) + 2, work) * n + output_rounding(&acc.abs(), prec);
    Ok(EvalValue {
        t: t.with_prec(prec),
        value: acc.with_prec(prec),
        tail_bound: real_exp_f64(ln_tail.unwrap_or(0.0), prec),
        rounding_bound: rounding.with_prec(prec),
        terms_used: coeffs.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::{d2, delta4, f2, monomial_series, theta};
    use crate::qseries::Rat;

    fn r(x: f64) -> Real {
        Real::from_f64(x, 128)
    }

    #[test]
    fn theta_at_one() {
        let v = eval_form(&theta(200), Weight::from_twice(1), &r(1.0)).unwrap();
        let pi = Real::pi(128);
        let direct = Real::one(128) + (-(&pi * 2)).exp() * 2 + (-(&pi * 8)).exp() * 2 + (-(&pi * 18)).exp() * 2;
        assert!(v.value > Real::one(128));
        assert!((&v.value - &direct).abs() < Real::pow2(-100, 128));
    }

    #[test]
    fn delta4_at_half_matches_factored_form() {
        let t = r(0.5);
        let d = eval_form(&delta4(300), Weight::integral(4), &t).unwrap();
        let f = eval_form(&f2(300), Weight::integral(2), &t).unwrap();
        let th4 = eval_form(&monomial_series(4, 0, 300), Weight::integral(2), &t).unwrap();
        let product = &f.value * &(&th4.value - &(&f.value * 16));
        assert!(d.value.is_positive());
        assert!((&d.value - &product).abs() < Real::pow2(-110, 128) * &d.value);
    }

    #[test]
    fn d2_vanishes_at_half() {
        let v = eval_form(&d2(300), Weight::integral(2), &r(0.5)).unwrap();
        assert!(v.value.abs() < Real::pow2(-90, 128));
        let v = eval_form(&d2(300), Weight::integral(2), &r(0.75)).unwrap();
        assert!(v.value.is_positive() && v.definite_sign() == 1);
    }

    #[test]
    fn short_series_is_rejected_with_an_estimate() {
        let e = eval_form(&delta4(40), Weight::integral(4), &r(0.05)).unwrap_err();
        match e {
            Error::InsufficientPrecision { needed, available, .. } => {
                assert_eq!(available, 40);
                assert!(needed > 200);
                // the estimate is enough
                assert!(eval_form(&delta4(needed), Weight::integral(4), &r(0.05)).is_ok());
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(eval_form(&delta4(40), Weight::integral(4), &r(0.0)).is_err());
    }

    #[test]
    fn bound_covers_higher_precision_value() {
        // large values, where rounding to the output precision dominates the tail
        let f = delta4(2000);
        for t in [0.05, 0.2, 1.0] {
            let a = eval_form(&f, Weight::integral(4), &Real::from_f64(t, 128)).unwrap();
            let b = eval_form(&f, Weight::integral(4), &Real::from_f64(t, 256)).unwrap();
            let diff = (&a.value.with_prec(256) - &b.value).abs();
            assert!(diff <= a.error_bound().with_prec(256) + b.error_bound(), "t = {t}");
        }
    }

    #[test]
    fn zero_series() {
        let z = Series::from_coeffs(vec![Rat::from_integer(0.into()); 10]);
        let v = eval_form(&z, Weight::integral(2), &r(1.0)).unwrap();
        assert!(v.value.is_zero() && v.tail_bound.is_zero());
    }

    #[test]
    fn tail_model_dominates_the_omitted_terms() {
        // evaluate a truncated theta^8 and compare against a much longer sum
        let long = monomial_series(8, 0, 400);
        let short = long.truncate(60);
        let t = r(0.3);
        let a = eval_form(&short, Weight::integral(4), &t).unwrap();
        let b = eval_form(&long, Weight::integral(4), &t).unwrap();
        assert!((&a.value - &b.value).abs() <= a.error_bound() + b.error_bound());
    }
}
