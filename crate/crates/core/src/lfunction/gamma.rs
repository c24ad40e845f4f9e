//! Complete and upper incomplete gamma functions at arbitrary precision.
//!
//! Both kernels work internally with `prec + GUARD` bits and round the result
//! back to the precision of the argument. Accuracy: relative error below
//! `2^(-prec + 8)` away from poles and zeros.

use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::mp::{Complex, Real};
use crate::qseries::Rat;

const GUARD: usize = 32;

fn bernoulli_cache() -> std::sync::MutexGuard<'static, Vec<Rat>> {
    static CACHE: OnceLock<Mutex<Vec<Rat>>> = OnceLock::new();
    CACHE
        .get_or_init(|| Mutex::new(vec![Rat::one()]))
        .lock()
        .expect("bernoulli cache")
}

fn extend_bernoulli(b: &mut Vec<Rat>, n: usize) {
    while b.len() <= n {
        let m = b.len();
        // sum_{j<=m} C(m+1, j) B_j = 0
        let mut binom = BigInt::one();
        let mut acc = Rat::zero();
        for (j, bj) in b.iter().enumerate() {
            acc += Rat::from_integer(binom.clone()) * bj;
            binom = binom * BigInt::from(m + 1 - j) / BigInt::from(j + 1);
        }
        b.push(-acc / Rat::from_integer(BigInt::from(m + 1)));
    }
}

/// Bernoulli numbers `B_0 ..= B_n` (with `B_1 = -1/2`), cached per process.
pub fn bernoulli(n: usize) -> Vec<Rat> {
    let mut b = bernoulli_cache();
    extend_bernoulli(&mut b, n);
    b[..=n].to_vec()
}

fn bernoulli_number(n: usize) -> Rat {
    let mut b = bernoulli_cache();
    extend_bernoulli(&mut b, n);
    b[n].clone()
}

fn nonpositive_integer(s: &Complex) -> Option<i64> {
    if !s.im.is_zero() || s.re.is_positive() {
        return None;
    }
    let r = s.re.to_f64().round();
    (Real::from_f64(r, s.re.prec()) == s.re).then_some(r as i64)
}

/// `ln Gamma(z)` by the Stirling series, for `Re(z)` large enough that the
/// asymptotic series reaches `2^(-prec)`.
fn ln_gamma_stirling(z: &Complex, prec: usize) -> Complex {
    let half = Real::from_rational(&Rat::new(1.into(), 2.into()), prec);
    let two_pi = Real::pi(prec) * 2;
    let mut acc = &(z - &Complex::from_real(half)) * &z.ln() - z;
    acc = acc + Complex::from_real(two_pi.ln() * &Real::from_rational(&Rat::new(1.into(), 2.into()), prec));
    let zinv = z.recip();
    let zinv2 = &zinv * &zinv;
    let mut zpow = zinv.clone();
    let eps = Real::pow2(-(prec as i64) - 4, prec);
    let mut j = 1;
    loop {
        let c = bernoulli_number(2 * j) / Rat::from_integer(BigInt::from((2 * j) * (2 * j - 1)));
        let term = zpow.scale(&Real::from_rational(&c, prec));
        let small = term.abs() < eps;
        acc = acc + term;
        if small || j > 4 * prec {
            break;
        }
        zpow = &zpow * &zinv2;
        j += 1;
    }
    acc
}

/// `Gamma(s)`; nonpositive integers are poles.
pub fn gamma_complete(s: &Complex) -> Result<Complex> {
    if let Some(n) = nonpositive_integer(s) {
        return Err(Error::Pole(format!("Gamma has a pole at s = {n}")));
    }
    let out_prec = s.prec();
    let prec = out_prec + GUARD;
    let s = s.with_prec(prec);
    // shift so that |z| >= 0.12 prec + 8; then the Stirling remainder is below 2^(-prec)
    let target = 0.12 * prec as f64 + 8.0;
    let re = s.re.to_f64();
    let im = s.im.to_f64();
    let mut shift = 0i64;
    while (re + shift as f64).hypot(im) < target || re + (shift as f64) < 1.0 {
        shift += 1;
    }
    let z = &s + &Complex::from_real(Real::from_i64(shift, prec));
    let mut value = ln_gamma_stirling(&z, prec).exp();
    // Gamma(s) = Gamma(s + m) / (s (s+1) ... (s+m-1))
    let mut denom = Complex::one(prec);
    for j in 0..shift {
        denom = &denom * &(&s + &Complex::from_real(Real::from_i64(j, prec)));
    }
    if shift > 0 {
        value = &value / &denom;
    }
    Ok(value.with_prec(out_prec))
}

/// `Gamma(s, x) = int_x^oo u^(s-1) e^(-u) du` for real `x > 0`.
///
/// Continued fraction (modified Lentz) when `x >= max(1, 0.8 |s|)` or
/// `Re(s) < 1/2`; otherwise `Gamma(s) - gamma(s, x)` with the power series of
/// the lower function.
pub fn gamma_upper(s: &Complex, x: &Real) -> Result<Complex> {
    if !x.is_positive() {
        return Err(Error::Domain(format!("incomplete gamma needs x > 0, got {x:?}")));
    }
    let out_prec = s.prec().max(x.prec());
    let prec = out_prec + GUARD;
    let s = s.with_prec(prec);
    let x = x.with_prec(prec);
    let xf = x.to_f64();
    let sabs = s.abs().to_f64();
    let use_cf = xf >= (0.8 * sabs).max(1.0) || s.re.to_f64() < 0.5;
    let value = if use_cf {
        upper_continued_fraction(&s, &x, prec)?
    } else {
        let g = gamma_complete(&s)?;
        &g - &lower_series(&s, &x, prec)?
    };
    Ok(value.with_prec(out_prec))
}

/// `Gamma(s, x) = e^(-x) x^s / (x + 1 - s - 1 (1 - s) / (x + 3 - s - ...))`.
fn upper_continued_fraction(s: &Complex, x: &Real, prec: usize) -> Result<Complex> {
    let one = Complex::one(prec);
    let huge = Complex::from_real(Real::pow2(4 * prec as i64, prec));
    let tiny = Complex::from_real(Real::pow2(-(4 * prec as i64), prec));
    let eps = Real::pow2(-(prec as i64) + 2, prec);
    let mut b = &Complex::from_real(x + 1) - s;
    let mut c = huge;
    let mut d = if b.abs() < tiny.re { tiny.recip() } else { b.recip() };
    let mut h = d.clone();
    let max_iter = 200 + 40 * prec;
    for i in 1..max_iter {
        let i_r = Real::from_i64(i as i64, prec);
        // a_i = -i (i - s)
        let an = (&Complex::from_real(i_r.clone()) - s).scale(&-i_r);
        b = &b + &Complex::from_real(Real::from_i64(2, prec));
        d = &(&an * &d) + &b;
        if d.abs() < tiny.re {
            d = tiny.clone();
        }
        c = &b + &(&an / &c);
        if c.abs() < tiny.re {
            c = tiny.clone();
        }
        d = d.recip();
        let delta = &d * &c;
        h = &h * &delta;
        if (&delta - &one).abs() < eps {
            let prefactor = (&s.scale(&x.ln()) - &Complex::from_real(x.clone())).exp();
            return Ok(&prefactor * &h);
        }
    }
    Err(Error::Convergence(format!(
        "incomplete gamma continued fraction did not converge (s = {s:?}, x = {x:?})"
    )))
}

/// `gamma(s, x) = x^s e^(-x) sum_j x^j / (s (s+1) ... (s+j))`.
fn lower_series(s: &Complex, x: &Real, prec: usize) -> Result<Complex> {
    let eps = Real::pow2(-(prec as i64) - 4, prec);
    let mut term = s.recip();
    let mut sum = term.clone();
    let mut j = 1i64;
    loop {
        let denom = s + &Complex::from_real(Real::from_i64(j, prec));
        term = &term.scale(x) / &denom;
        sum = &sum + &term;
        if j as f64 > x.to_f64() && term.abs() < &sum.abs() * &eps {
            break;
        }
        j += 1;
        if j > 100_000 {
            return Err(Error::Convergence("lower incomplete gamma series".into()));
        }
    }
    let prefactor = (&s.scale(&x.ln()) - &Complex::from_real(x.clone())).exp();
    Ok(&prefactor * &sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mp::parse_complex;

    const P: usize = 128;

    fn c(s: &str) -> Complex {
        parse_complex(s, P).unwrap()
    }

    fn rel(a: &Complex, b: &Complex) -> f64 {
        ((a - b).abs() / b.abs()).to_f64()
    }

    #[test]
    fn bernoulli_values() {
        let b = bernoulli(12);
        assert_eq!(b[1], Rat::new((-1).into(), 2.into()));
        assert_eq!(b[2], Rat::new(1.into(), 6.into()));
        assert_eq!(b[3], Rat::zero());
        assert_eq!(b[4], Rat::new((-1).into(), 30.into()));
        assert_eq!(b[12], Rat::new((-691).into(), 2730.into()));
    }

    #[test]
    fn gamma_classical_values() {
        assert!(rel(&gamma_complete(&c("1")).unwrap(), &Complex::one(P)) < 1e-36);
        let sqrt_pi = Complex::from_real(Real::pi(P).sqrt());
        assert!(rel(&gamma_complete(&c("0.5")).unwrap(), &sqrt_pi) < 1e-36);
        assert!(rel(&gamma_complete(&c("6")).unwrap(), &c("120")) < 1e-36);
        // Gamma(-1/2) = -2 sqrt(pi)
        let g = gamma_complete(&c("-0.5")).unwrap();
        assert!(rel(&g, &sqrt_pi.scale(&Real::from_i64(-2, P))) < 1e-36);
        assert!(matches!(gamma_complete(&c("0")), Err(Error::Pole(_))));
        assert!(matches!(gamma_complete(&c("-3")), Err(Error::Pole(_))));
    }

    #[test]
    fn gamma_recurrence() {
        for s in ["0.3+0.7i", "2+3i", "-1.25", "7.5-2i", "0.01", "-2.5+10i"] {
            let z = c(s);
            let lhs = gamma_complete(&(&z + &Complex::one(P))).unwrap();
            let rhs = &z * &gamma_complete(&z).unwrap();
            assert!(rel(&lhs, &rhs) < 1e-35, "s = {s}");
        }
    }

    #[test]
    fn gamma_reflection() {
        // Gamma(s) Gamma(1-s) = pi / sin(pi s)
        let s = c("0.25");
        let lhs = &gamma_complete(&s).unwrap() * &gamma_complete(&(&Complex::one(P) - &s)).unwrap();
        let pi = Real::pi(P);
        let rhs = Complex::from_real(&pi / &(&pi * &s.re).sin());
        assert!(rel(&lhs, &rhs) < 1e-35);
    }

    #[test]
    fn upper_gamma_of_one_is_exponential() {
        for x in ["0.5", "3.14159", "10", "40"] {
            let x = Real::parse(x, P).unwrap();
            let g = gamma_upper(&Complex::one(P), &x).unwrap();
            assert!(rel(&g, &Complex::from_real((-&x).exp())) < 1e-35);
        }
        assert!(gamma_upper(&Complex::one(P), &Real::zero(P)).is_err());
    }

    #[test]
    fn upper_gamma_recurrence_both_branches() {
        // Gamma(s+1, x) = s Gamma(s, x) + x^s e^(-x)
        for (s, x) in [
            ("12.5", "3.5"),
            ("2+3i", "3.2"),
            ("-2", "3.14159"),
            ("9.75", "1.5"),
            ("0.3", "0.2"),
        ] {
            let s = c(s);
            let x = Real::parse(x, P).unwrap();
            let lhs = gamma_upper(&(&s + &Complex::one(P)), &x).unwrap();
            let pow = (&s.scale(&x.ln()) - &Complex::from_real(x.clone())).exp();
            let rhs = &(&s * &gamma_upper(&s, &x).unwrap()) + &pow;
            assert!(rel(&lhs, &rhs) < 1e-34, "s = {s:?}, x = {x:?}");
        }
    }

    /// `erfc(y)` from the Taylor series of `erf` at a precision that absorbs the
    /// cancellation in `1 - erf(y)` for `y <= 18`.
    fn erfc_oracle(y: &Real) -> Real {
        let prec = 1100;
        let y = y.with_prec(prec);
        let y2 = &y * &y;
        let mut power = y.clone();
        let mut sum = Real::zero(prec);
        let mut n = 0i64;
        let eps = Real::pow2(-1090, prec);
        loop {
            // (-1)^n y^(2n+1) / (n! (2n+1))
            let term = &power / &Real::from_i64(2 * n + 1, prec);
            sum = if n % 2 == 0 { &sum + &term } else { &sum - &term };
            if n as f64 > y2.to_f64() && term.abs() < eps {
                break;
            }
            n += 1;
            power = &(&power * &y2) / &Real::from_i64(n, prec);
        }
        let erf = sum * Real::from_i64(2, prec) / Real::pi(prec).sqrt();
        (Real::one(prec) - erf).with_prec(P)
    }

    #[test]
    fn upper_gamma_half_matches_erfc() {
        let pi = Real::pi(P);
        let half = c("0.5");
        for i in 0..=12 {
            // log-spaced in [pi, 100 pi]
            let x = &pi * &Real::from_f64(100f64.powf(i as f64 / 12.0), P);
            let g = gamma_upper(&half, &x).unwrap();
            let expected = &pi.sqrt() * &erfc_oracle(&x.sqrt());
            assert!(rel(&g, &Complex::from_real(expected)) < 1e-34, "x = {x:?}");
        }
    }

    #[test]
    fn series_and_fraction_agree() {
        let prec = P + GUARD;
        for (s, x) in [("4.5", "3.5"), ("6+1i", "5"), ("1.5", "1.2")] {
            let s = c(s).with_prec(prec);
            let x = Real::parse(x, prec).unwrap();
            let cf = upper_continued_fraction(&s, &x, prec).unwrap();
            let series = &gamma_complete(&s).unwrap() - &lower_series(&s, &x, prec).unwrap();
            assert!(rel(&cf, &series) < 1e-40);
        }
    }
}
