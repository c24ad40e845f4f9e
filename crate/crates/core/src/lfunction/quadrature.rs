//! Independent evaluation of `L*(f, s)` by numerical integration of
//! `int_{1/2}^oo [f(it) (2t)^s + (f|W4)(it) (2t)^(w-s)] dt/t`.

use super::eval::{ln_growth_constant, ln_power_tail, output_rounding, real_exp_f64};
use super::lstar::{EmbeddedForm, LValue, Method};
use crate::error::{Error, Result};
use crate::mp::{Complex, Real};
use crate::qseries::Rat;

const GUARD: usize = 32;
const MAX_LEVELS: usize = 14;

/// Upper limit `T` such that the integral beyond it is below `e^ln_target`, with
/// the bound actually achieved.
///
/// For `t >= 1/2`: `|f(it)| <= M e^(-2 pi t)` with `M = sum C n^alpha e^(-pi (n-1))`,
/// and `int_T^oo e^(-2 pi t) (2t)^sigma dt/t = pi^(-sigma) Gamma(sigma, 2 pi T)`,
/// which is at most `2 pi^(-sigma) (2 pi T)^(sigma-1) e^(-2 pi T)` once
/// `2 pi T >= 2 (sigma - 1)`.
fn choose_upper_limit(ln_m: [f64; 2], sigmas: [f64; 2], ln_target: f64) -> (f64, f64) {
    let pi = std::f64::consts::PI;
    let bound = |t: f64| {
        let x = 2.0 * pi * t;
        let parts = ln_m.iter().zip(sigmas).map(|(lm, sg)| {
            if x < 2.0 * (sg - 1.0) {
                f64::INFINITY
            } else {
                lm + 2f64.ln() - sg * pi.ln() + (sg - 1.0) * x.ln() - x
            }
        });
        parts.fold(f64::NEG_INFINITY, |a, b| {
            let m = a.max(b);
            if m.is_infinite() {
                m
            } else {
                m + ((a - m).exp() + (b - m).exp()).ln()
            }
        })
    };
    let mut t = 1.0;
    while bound(t) > ln_target {
        t += 0.25;
    }
    (t, bound(t))
}

/// `ln M` for `|f(it)| <= M e^(-2 pi t)` on `t >= 1/2`.
fn ln_envelope(ln_c: f64, alpha: f64) -> f64 {
    if ln_c == f64::NEG_INFINITY {
        return ln_c;
    }
    let pi = std::f64::consts::PI;
    let mut acc = f64::NEG_INFINITY;
    for n in 1..100_000 {
        let x = ln_c + alpha * (n as f64).ln() - pi * (n as f64 - 1.0);
        let m = acc.max(x);
        acc = m + ((acc - m).exp() + (x - m).exp()).ln();
        if x < acc - 60.0 && n > 10 {
            break;
        }
    }
    acc
}

struct Integrand<'a> {
    a: &'a [Real],
    b: &'a [Real],
    s: Complex,
    dual: Complex,
    pi: Real,
}

impl Integrand<'_> {
    fn series(c: &[Real], q: &Real) -> Real {
        let prec = q.prec();
        c.iter().rev().fold(Real::zero(prec), |acc, x| &acc * q + x)
    }

    fn at(&self, t: &Real) -> Complex {
        let q = (t * &self.pi * -2).exp();
        let fa = Integrand::series(self.a, &q);
        let fb = Integrand::series(self.b, &q);
        let ln2t = (t * 2).ln();
        let k1 = self.s.scale(&ln2t).exp().scale(&fa);
        let k2 = self.dual.scale(&ln2t).exp().scale(&fb);
        (&k1 + &k2).scale(&(Real::one(t.prec()) / t))
    }
}

/// `L*(f, s)` by tanh-sinh quadrature on `[1/2, T]`.
///
/// The step is halved until two successive estimates agree to
/// `2^(-(bits/2 + 16))` relative; the reported discretization error is that
/// last difference. Truncations of the `t`-range and of the Fourier series are
/// bounded with the same coefficient growth model as the gamma series.
pub fn lstar_quadrature(form: &EmbeddedForm, s: &Complex) -> Result<LValue> {
    let bits = s.prec();
    let work = bits + GUARD;
    let pi_f = std::f64::consts::PI;
    let w = form.weight.as_f64();
    let sigma = s.re.to_f64();
    let alpha = form.weight.as_f64();
    let ln_target = -((bits as f64) / 2.0 + 24.0) * std::f64::consts::LN_2;

    let ln_ca = ln_growth_constant(form.coeffs.iter(), alpha);
    let ln_cb = ln_growth_constant(form.w4_coeffs.iter(), alpha);
    let (upper, ln_range_tail) = choose_upper_limit(
        [ln_envelope(ln_ca, alpha), ln_envelope(ln_cb, alpha)],
        [sigma, w - sigma],
        ln_target,
    );

    // Fourier truncation: smallest N with the series tail at t = 1/2 below target
    let mut n = 2;
    let series_tail = |n: usize| {
        let a = ln_power_tail(ln_ca, alpha, n, -pi_f);
        let b = ln_power_tail(ln_cb, alpha, n, -pi_f);
        match (a, b) {
            (Some(a), Some(b)) => Some(a.max(b) + 2f64.ln()),
            _ => None,
        }
    };
    while series_tail(n).is_none_or(|x| x > ln_target - 8.0) {
        n += 1;
    }
    if n > form.prec() {
        return Err(Error::InsufficientPrecision {
            what: format!("quadrature of {}", form.id),
            needed: n,
            available: form.prec(),
        });
    }
    // |error in the integrand| <= tail(1/2) e^(-2 pi n (t - 1/2)) max(1, (2T)^sigma') / t
    let growth = [sigma, w - sigma]
        .iter()
        .map(|sg| (sg * (2.0 * upper).ln()).max(0.0))
        .fold(0.0, f64::max);
    let ln_series_err = series_tail(n).expect("finite") + growth + 2f64.ln() - (pi_f * n as f64).ln();

    let wk = |x: &Rat| Real::from_rational(x, work);
    let integrand = Integrand {
        a: &form.coeffs[..n],
        b: &form.w4_coeffs[..n],
        s: s.with_prec(work),
        dual: &Complex::from_real(Real::from_f64(w, work)) - &s.with_prec(work),
        pi: Real::pi(work),
    };
    let lo = wk(&Rat::new(1.into(), 2.into()));
    let hi = Real::from_f64(upper, work);
    let c = (&lo + &hi) / 2;
    let d = (&hi - &lo) / 2;
    let half_pi = Real::pi(work) / 2;
    let u_max = ((work as f64) * std::f64::consts::LN_2 / pi_f).asinh() + 1.0;

    // contribution of node u = j h, returned as (weight * integrand, |weight * integrand|)
    let node = |u: &Real| -> (Complex, Real) {
        let v = &half_pi * &u.sinh();
        let x = &c + &(&d * &v.tanh());
        let ch = v.cosh();
        let weight = &(&d * &half_pi) * &(&u.cosh() / &(&ch * &ch));
        if weight.is_zero() || x <= lo || x >= hi {
            return (Complex::zero(work), Real::zero(work));
        }
        let g = integrand.at(&x).scale(&weight);
        let m = g.abs();
        (g, m)
    };

    let mut h = Real::from_f64(0.5, work);
    let mut sum = node(&Real::zero(work)).0;
    let mut mag = Real::zero(work);
    let mut j = 1i64;
    loop {
        let u = &h * j;
        if u.to_f64() > u_max {
            break;
        }
        let (p, pm) = node(&u);
        let (m, mm) = node(&-&u);
        sum = &(&sum + &p) + &m;
        mag = mag + pm + mm;
        j += 1;
    }
    let mut estimate = sum.scale(&h);
    let mut last_diff = None;
    for _ in 0..MAX_LEVELS {
        h = &h / 2;
        let mut odd = Complex::zero(work);
        let mut j = 1i64;
        loop {
            let u = &h * j;
            if u.to_f64() > u_max {
                break;
            }
            let (p, pm) = node(&u);
            let (m, mm) = node(&-&u);
            odd = &(&odd + &p) + &m;
            mag = mag + pm + mm;
            j += 2;
        }
        let next = &estimate.scale(&Real::from_f64(0.5, work)) + &odd.scale(&h);
        let diff = (&next - &estimate).abs();
        estimate = next;
        let scale = estimate.abs().max(&Real::one(work));
        let converged = diff <= &scale * &real_exp_f64(ln_target, work);
        last_diff = Some(diff);
        if converged {
            let tail =
                last_diff.expect("set above") + real_exp_f64(ln_range_tail, work) + real_exp_f64(ln_series_err, work);
            let rounding = &mag * &h * Real::pow2(-(work as i64) + 8, work) + output_rounding(&estimate.abs(), bits);
            return Ok(LValue {
                s: s.clone(),
                value: estimate.with_prec(bits),
                tail_bound: tail.with_prec(bits),
                rounding_bound: rounding.with_prec(bits),
                terms_used: n,
                method: Method::Quadrature,
                form_id: form.id.clone(),
                bits,
            });
        }
    }
    Err(Error::Convergence(format!(
        "tanh-sinh quadrature for {} at s = {s:?} did not settle; last difference {:?}",
        form.id,
        last_diff.map(|d| d.to_sci(6))
    )))
}

/// Samples the real integrand for `f|W4 = f` at real `sigma` on `[1/2, t_max]`.
pub fn integrand_samples(form: &EmbeddedForm, sigma: &Real, t_max: f64, count: usize) -> Vec<(Real, Real)> {
    let work = sigma.prec() + GUARD;
    let w = Complex::from_real(Real::from_f64(form.weight.as_f64(), work));
    let s = Complex::from_real(sigma.with_prec(work));
    let integrand = Integrand {
        a: &form.coeffs,
        b: &form.w4_coeffs,
        dual: &w - &s,
        s,
        pi: Real::pi(work),
    };
    (0..count)
        .map(|i| {
            let t = 0.5 + (t_max - 0.5) * i as f64 / (count.max(2) - 1) as f64;
            let t = Real::from_f64(t, work);
            let v = integrand.at(&t).re;
            (t, v)
        })
        .collect()
}
