//! Arbitrary-precision real and complex numbers.
//!
//! Thin value types over `astro_float::BigFloat`. Every value carries its working
//! precision in bits; binary operations round to the larger of the two.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use astro_float::{BigFloat, Consts, Radix, RoundingMode, Sign as AfSign};
use num_bigint::{BigInt, Sign};
use num_traits::Zero;

use crate::qseries::Rat;

const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("astro-float constant cache"));
}

fn with_consts<T>(f: impl FnOnce(&mut Consts) -> T) -> T {
    CONSTS.with(|c| f(&mut c.borrow_mut()))
}

#[derive(Clone)]
pub struct Real {
    v: BigFloat,
    prec: usize,
}

impl Real {
    fn wrap(v: BigFloat, prec: usize) -> Real {
        debug_assert!(!v.is_nan(), "NaN produced in multiprecision arithmetic");
        Real { v, prec }
    }

    pub fn prec(&self) -> usize {
        self.prec
    }

    pub fn zero(prec: usize) -> Real {
        Real::wrap(BigFloat::from_word(0, prec), prec)
    }

    pub fn one(prec: usize) -> Real {
        Real::from_i64(1, prec)
    }

    pub fn from_i64(x: i64, prec: usize) -> Real {
        Real::wrap(BigFloat::from_i64(x, prec), prec)
    }

    pub fn from_f64(x: f64, prec: usize) -> Real {
        Real::wrap(BigFloat::from_f64(x, prec), prec)
    }

    pub fn from_bigint(x: &BigInt, prec: usize) -> Real {
        if x.is_zero() {
            return Real::zero(prec);
        }
        let (sign, mag) = x.to_u64_digits();
        let words = mag.len();
        let s = if sign == Sign::Minus { AfSign::Neg } else { AfSign::Pos };
        let mut v = BigFloat::from_words(&mag, s, (words * 64) as i32);
        v.set_precision(prec.max(64), RM).expect("precision");
        Real::wrap(v, prec)
    }

    pub fn from_rational(x: &Rat, prec: usize) -> Real {
        let n = Real::from_bigint(x.numer(), prec + 8);
        if x.denom() == &BigInt::from(1) {
            return n.with_prec(prec);
        }
        let d = Real::from_bigint(x.denom(), prec + 8);
        n.div(&d).with_prec(prec)
    }

    /// Parses a decimal literal such as `-3.25`, `1e-3` or `7/4`.
    pub fn parse(s: &str, prec: usize) -> Option<Real> {
        let s = s.trim();
        if let Some((a, b)) = s.split_once('/') {
            let a = Real::parse(a, prec + 8)?;
            let b = Real::parse(b, prec + 8)?;
            return Some((&a / &b).with_prec(prec));
        }
        let v = with_consts(|cc| BigFloat::parse(s, Radix::Dec, prec, RM, cc));
        if v.is_nan() || v.is_inf() {
            None
        } else {
            Some(Real::wrap(v, prec))
        }
    }

    pub fn pi(prec: usize) -> Real {
        Real::wrap(with_consts(|cc| cc.pi(prec, RM)), prec)
    }

    pub fn ln2(prec: usize) -> Real {
        Real::wrap(with_consts(|cc| cc.ln_2(prec, RM)), prec)
    }

    pub fn with_prec(&self, prec: usize) -> Real {
        let mut v = self.v.clone();
        if !v.is_zero() {
            v.set_precision(prec, RM).expect("precision");
        }
        Real::wrap(v, prec)
    }

    pub fn exp(&self) -> Real {
        Real::wrap(with_consts(|cc| self.v.exp(self.prec, RM, cc)), self.prec)
    }

    /// Natural logarithm; the argument must be positive.
    pub fn ln(&self) -> Real {
        assert!(self.is_positive(), "logarithm of a non-positive number");
        Real::wrap(with_consts(|cc| self.v.ln(self.prec, RM, cc)), self.prec)
    }

    pub fn sqrt(&self) -> Real {
        Real::wrap(self.v.sqrt(self.prec, RM), self.prec)
    }

    pub fn sin(&self) -> Real {
        Real::wrap(with_consts(|cc| self.v.sin(self.prec, RM, cc)), self.prec)
    }

    pub fn cos(&self) -> Real {
        Real::wrap(with_consts(|cc| self.v.cos(self.prec, RM, cc)), self.prec)
    }

    pub fn atan(&self) -> Real {
        Real::wrap(with_consts(|cc| self.v.atan(self.prec, RM, cc)), self.prec)
    }

    pub fn sinh(&self) -> Real {
        Real::wrap(with_consts(|cc| self.v.sinh(self.prec, RM, cc)), self.prec)
    }

    pub fn cosh(&self) -> Real {
        Real::wrap(with_consts(|cc| self.v.cosh(self.prec, RM, cc)), self.prec)
    }

    pub fn tanh(&self) -> Real {
        Real::wrap(with_consts(|cc| self.v.tanh(self.prec, RM, cc)), self.prec)
    }

    /// `self^e` for a positive base.
    pub fn powr(&self, e: &Real) -> Real {
        (e * &self.ln()).exp()
    }

    pub fn powi(&self, n: i64) -> Real {
        let p = Real::wrap(self.v.powi(n.unsigned_abs() as usize, self.prec, RM), self.prec);
        if n < 0 {
            Real::one(self.prec) / p
        } else {
            p
        }
    }

    /// `atan2(y, x)` with the principal branch in `(-pi, pi]`.
    pub fn atan2(y: &Real, x: &Real) -> Real {
        let prec = y.prec.max(x.prec);
        if x.is_zero() {
            let half_pi = Real::pi(prec) / 2i64;
            return match y.signum() {
                1 => half_pi,
                -1 => -half_pi,
                _ => Real::zero(prec),
            };
        }
        let base = (y / x).atan();
        if x.is_positive() {
            base
        } else if y.is_negative() {
            base - Real::pi(prec)
        } else {
            base + Real::pi(prec)
        }
    }

    pub fn abs(&self) -> Real {
        Real::wrap(self.v.abs(), self.prec)
    }

    pub fn is_zero(&self) -> bool {
        self.v.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        !self.v.is_zero() && self.v.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        !self.v.is_zero() && self.v.is_negative()
    }

    pub fn signum(&self) -> i32 {
        if self.is_positive() {
            1
        } else if self.is_negative() {
            -1
        } else {
            0
        }
    }

    pub fn max(&self, other: &Real) -> Real {
        if self >= other {
            self.clone()
        } else {
            other.clone()
        }
    }

    pub fn min(&self, other: &Real) -> Real {
        if self <= other {
            self.clone()
        } else {
            other.clone()
        }
    }

    /// `2^e` exactly.
    pub fn pow2(e: i64, prec: usize) -> Real {
        let mut v = BigFloat::from_word(1, prec);
        v.set_exponent((e + 1) as i32);
        Real::wrap(v, prec)
    }

    /// Binary exponent `e` with `2^(e-1) <= |x| < 2^e`; `None` for zero.
    pub fn exponent(&self) -> Option<i64> {
        if self.is_zero() {
            None
        } else {
            self.v.exponent().map(i64::from)
        }
    }

    /// Nearest `f64`; saturates to 0 or infinity outside the `f64` range.
    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let Some((m, _n, sign, e, _)) = self.v.as_raw_parts() else {
            return f64::NAN;
        };
        let top = *m.last().unwrap_or(&0);
        let mant = top as f64 / 2f64.powi(64);
        let mag = if e > 1100 {
            f64::INFINITY
        } else if e < -1100 {
            0.0
        } else {
            mant * 2f64.powi(e)
        };
        if sign == AfSign::Neg {
            -mag
        } else {
            mag
        }
    }

    /// Natural log of `|x|` as `f64`, without overflow for tiny or huge values.
    pub fn ln_abs_f64(&self) -> f64 {
        if self.is_zero() {
            return f64::NEG_INFINITY;
        }
        let e = self.exponent().unwrap_or(0);
        let scaled = self.abs() * Real::pow2(-e, self.prec);
        scaled.to_f64().ln() + e as f64 * std::f64::consts::LN_2
    }

    /// Scientific notation with exactly `digits` significant digits, e.g. `-1.2500e-3`.
    pub fn to_sci(&self, digits: usize) -> String {
        let digits = digits.max(1);
        if self.is_zero() {
            return format!("{}e+0", zero_mantissa(digits));
        }
        let raw = with_consts(|cc| self.v.format(Radix::Dec, RM, cc)).unwrap_or_default();
        let (negative, mantissa, exp) = split_sci(&raw);
        let mut all: Vec<u8> = mantissa.bytes().filter(u8::is_ascii_digit).map(|b| b - b'0').collect();
        // leading zeros can appear when the formatter emits 0.xxx
        let mut exp = exp;
        while all.len() > 1 && all[0] == 0 {
            all.remove(0);
            exp -= 1;
        }
        all.resize(all.len().max(digits + 1), 0);
        let mut kept: Vec<u8> = all[..digits].to_vec();
        if all[digits] >= 5 {
            let mut i = digits;
            loop {
                if i == 0 {
                    kept.insert(0, 1);
                    kept.pop();
                    exp += 1;
                    break;
                }
                i -= 1;
                if kept[i] == 9 {
                    kept[i] = 0;
                } else {
                    kept[i] += 1;
                    break;
                }
            }
        }
        let mut s = String::new();
        if negative {
            s.push('-');
        }
        s.push((b'0' + kept[0]) as char);
        if digits > 1 {
            s.push('.');
            for d in &kept[1..] {
                s.push((b'0' + d) as char);
            }
        }
        s.push('e');
        s.push(if exp < 0 { '-' } else { '+' });
        s.push_str(&exp.abs().to_string());
        s
    }

    /// Decimal digits carried at `bits` of precision: `floor(bits * log10 2)`.
    pub fn decimal_digits(bits: usize) -> usize {
        (bits as f64 * 0.301).floor() as usize
    }
}

fn zero_mantissa(digits: usize) -> String {
    if digits == 1 {
        "0".into()
    } else {
        format!("0.{}", "0".repeat(digits - 1))
    }
}

/// Splits `"-1.234e+5"` into sign, mantissa digits with the point, and the exponent
/// of the first digit.
fn split_sci(raw: &str) -> (bool, String, i64) {
    let negative = raw.starts_with('-');
    let body = raw.trim_start_matches(['-', '+']);
    let (mant, exp) = match body.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i64>().unwrap_or(0)),
        None => (body, 0),
    };
    // exponent refers to the position after the first mantissa digit
    let point = mant.find('.').unwrap_or(mant.len()) as i64;
    (negative, mant.to_string(), exp + point - 1)
}

impl fmt::Debug for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_sci(Real::decimal_digits(self.prec).min(40)))
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_sci(Real::decimal_digits(self.prec)))
    }
}

impl PartialEq for Real {
    fn eq(&self, other: &Real) -> bool {
        self.partial_cmp(other) == Some(Ordering::Equal)
    }
}

impl PartialOrd for Real {
    fn partial_cmp(&self, other: &Real) -> Option<Ordering> {
        self.v.cmp(&other.v).map(|c| c.cmp(&0))
    }
}

macro_rules! real_binop {
    ($tr:ident, $method:ident, $af:ident) => {
        impl $tr<&Real> for &Real {
            type Output = Real;
            fn $method(self, rhs: &Real) -> Real {
                let p = self.prec.max(rhs.prec);
                Real::wrap(self.v.$af(&rhs.v, p, RM), p)
            }
        }
        impl $tr<Real> for Real {
            type Output = Real;
            fn $method(self, rhs: Real) -> Real {
                (&self).$method(&rhs)
            }
        }
        impl $tr<&Real> for Real {
            type Output = Real;
            fn $method(self, rhs: &Real) -> Real {
                (&self).$method(rhs)
            }
        }
        impl $tr<Real> for &Real {
            type Output = Real;
            fn $method(self, rhs: Real) -> Real {
                self.$method(&rhs)
            }
        }
        impl $tr<i64> for &Real {
            type Output = Real;
            fn $method(self, rhs: i64) -> Real {
                self.$method(&Real::from_i64(rhs, self.prec))
            }
        }
        impl $tr<i64> for Real {
            type Output = Real;
            fn $method(self, rhs: i64) -> Real {
                (&self).$method(&Real::from_i64(rhs, self.prec))
            }
        }
    };
}

real_binop!(Add, add, add);
real_binop!(Sub, sub, sub);
real_binop!(Mul, mul, mul);
real_binop!(Div, div, div);

impl Neg for &Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real::wrap(BigFloat::neg(&self.v), self.prec)
    }
}

impl Neg for Real {
    type Output = Real;
    fn neg(self) -> Real {
        -&self
    }
}

impl std::iter::Sum for Real {
    fn sum<I: Iterator<Item = Real>>(mut iter: I) -> Real {
        let first = iter.next().expect("sum of an empty iterator of Real");
        iter.fold(first, |a, b| a + b)
    }
}

/// Arbitrary-precision complex number.
#[derive(Clone, PartialEq)]
pub struct Complex {
    pub re: Real,
    pub im: Real,
}

impl Complex {
    pub fn new(re: Real, im: Real) -> Complex {
        Complex { re, im }
    }

    pub fn from_real(re: Real) -> Complex {
        let p = re.prec();
        Complex { re, im: Real::zero(p) }
    }

    pub fn zero(prec: usize) -> Complex {
        Complex::from_real(Real::zero(prec))
    }

    pub fn one(prec: usize) -> Complex {
        Complex::from_real(Real::one(prec))
    }

    pub fn prec(&self) -> usize {
        self.re.prec().max(self.im.prec())
    }

    pub fn with_prec(&self, prec: usize) -> Complex {
        Complex::new(self.re.with_prec(prec), self.im.with_prec(prec))
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Complex {
        Complex::new(self.re.clone(), -&self.im)
    }

    pub fn norm_sqr(&self) -> Real {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn abs(&self) -> Real {
        if self.im.is_zero() {
            return self.re.abs();
        }
        if self.re.is_zero() {
            return self.im.abs();
        }
        self.norm_sqr().sqrt()
    }

    pub fn arg(&self) -> Real {
        Real::atan2(&self.im, &self.re)
    }

    pub fn scale(&self, c: &Real) -> Complex {
        Complex::new(&self.re * c, &self.im * c)
    }

    pub fn recip(&self) -> Complex {
        if self.im.is_zero() {
            return Complex::from_real(Real::one(self.prec()) / &self.re);
        }
        let d = self.norm_sqr();
        Complex::new(&self.re / &d, -(&self.im / &d))
    }

    pub fn exp(&self) -> Complex {
        let m = self.re.exp();
        if self.im.is_zero() {
            return Complex::from_real(m);
        }
        Complex::new(&m * &self.im.cos(), &m * &self.im.sin())
    }

    /// Principal logarithm.
    pub fn ln(&self) -> Complex {
        if self.im.is_zero() && self.re.is_positive() {
            return Complex::from_real(self.re.ln());
        }
        Complex::new(self.abs().ln(), self.arg())
    }

    /// `base^self` for a positive real base: `exp(self * ln(base))`.
    pub fn exp_base(&self, base: &Real) -> Complex {
        self.scale(&base.ln()).exp()
    }

    /// `self^e`, principal branch.
    pub fn pow(&self, e: &Complex) -> Complex {
        (e * &self.ln()).exp()
    }

    pub fn to_string_digits(&self, digits: usize) -> String {
        if self.im.is_zero() {
            return self.re.to_sci(digits);
        }
        let im = self.im.to_sci(digits);
        if im.starts_with('-') {
            format!("{}{}i", self.re.to_sci(digits), im)
        } else {
            format!("{}+{}i", self.re.to_sci(digits), im)
        }
    }
}

impl fmt::Debug for Complex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}",
            self.to_string_digits(Real::decimal_digits(self.prec()).min(40))
        )
    }
}

impl Add<&Complex> for &Complex {
    type Output = Complex;
    fn add(self, rhs: &Complex) -> Complex {
        Complex::new(&self.re + &rhs.re, &self.im + &rhs.im)
    }
}

impl Sub<&Complex> for &Complex {
    type Output = Complex;
    fn sub(self, rhs: &Complex) -> Complex {
        Complex::new(&self.re - &rhs.re, &self.im - &rhs.im)
    }
}

impl Mul<&Complex> for &Complex {
    type Output = Complex;
    fn mul(self, rhs: &Complex) -> Complex {
        if self.im.is_zero() && rhs.im.is_zero() {
            return Complex::from_real(&self.re * &rhs.re);
        }
        if rhs.im.is_zero() {
            return self.scale(&rhs.re);
        }
        if self.im.is_zero() {
            return rhs.scale(&self.re);
        }
        Complex::new(
            &self.re * &rhs.re - &self.im * &rhs.im,
            &self.re * &rhs.im + &self.im * &rhs.re,
        )
    }
}

impl Div<&Complex> for &Complex {
    type Output = Complex;
    fn div(self, rhs: &Complex) -> Complex {
        if rhs.im.is_zero() {
            return Complex::new(&self.re / &rhs.re, &self.im / &rhs.re);
        }
        self * &rhs.recip()
    }
}

impl Neg for &Complex {
    type Output = Complex;
    fn neg(self) -> Complex {
        Complex::new(-&self.re, -&self.im)
    }
}

macro_rules! complex_owned {
    ($tr:ident, $method:ident) => {
        impl $tr<Complex> for Complex {
            type Output = Complex;
            fn $method(self, rhs: Complex) -> Complex {
                (&self).$method(&rhs)
            }
        }
        impl $tr<&Complex> for Complex {
            type Output = Complex;
            fn $method(self, rhs: &Complex) -> Complex {
                (&self).$method(rhs)
            }
        }
        impl $tr<Complex> for &Complex {
            type Output = Complex;
            fn $method(self, rhs: Complex) -> Complex {
                self.$method(&rhs)
            }
        }
    };
}

complex_owned!(Add, add);
complex_owned!(Sub, sub);
complex_owned!(Mul, mul);
complex_owned!(Div, div);

impl Neg for Complex {
    type Output = Complex;
    fn neg(self) -> Complex {
        -&self
    }
}

/// Parses `a`, `bi`, `a+bi`, `a-bi` (also with `j`), with decimal or `p/q` parts.
pub fn parse_complex(s: &str, prec: usize) -> Option<Complex> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return None;
    }
    let Some(body) = s.strip_suffix(['i', 'j']) else {
        return Real::parse(&s, prec).map(Complex::from_real);
    };
    // split at the last sign that is not the leading one and not part of an exponent
    let bytes = body.as_bytes();
    let mut split = None;
    for i in (1..bytes.len()).rev() {
        if (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E') {
            split = Some(i);
            break;
        }
    }
    let (re, im) = match split {
        Some(i) => (&body[..i], &body[i..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => "1",
        "-" => "-1",
        x => x,
    };
    let im = im.strip_prefix('+').unwrap_or(im);
    Some(Complex::new(Real::parse(re, prec)?, Real::parse(im, prec)?))
}

/// Converts an exact rational to a `Complex` with zero imaginary part.
pub fn rat_to_complex(x: &Rat, prec: usize) -> Complex {
    Complex::from_real(Real::from_rational(x, prec))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(x: f64) -> Real {
        Real::from_f64(x, 128)
    }

    fn close(a: &Real, b: &Real, tol: f64) -> bool {
        (a - b).abs().to_f64() <= tol * b.abs().to_f64().max(1e-300)
    }

    #[test]
    fn elementary_functions() {
        let two = r(2.0);
        let s = two.sqrt();
        assert!(close(&(&s * &s), &two, 1e-36));
        let e = Real::one(128).exp();
        assert!(close(&e.ln(), &Real::one(128), 1e-36));
        let pi = Real::pi(128);
        assert!((pi.sin()).abs().to_f64() < 1e-36);
        assert!(close(&Real::atan2(&r(1.0), &r(-1.0)), &(&pi * &r(0.75)), 1e-36));
        assert!(close(&Real::atan2(&r(-1.0), &r(-1.0)), &(&pi * &r(-0.75)), 1e-36));
    }

    #[test]
    fn conversions() {
        let big = BigInt::from(3).pow(100u32);
        let x = Real::from_bigint(&big, 256);
        assert_eq!(x.to_sci(20), "5.1537752073201133104e+47");
        let q = Rat::new(1.into(), 3.into());
        assert_eq!(Real::from_rational(&q, 128).to_sci(10), "3.333333333e-1");
        assert_eq!(Real::from_i64(-125, 64).to_sci(3), "-1.25e+2");
        assert_eq!(r(0.000999999).to_sci(3), "1.00e-3");
        assert_eq!(Real::zero(64).to_sci(3), "0.00e+0");
        assert_eq!(r(3.0).to_f64(), 3.0);
        assert_eq!(r(-0.15625).to_f64(), -0.15625);
        assert!((Real::pow2(-300, 64).ln_abs_f64() + 300.0 * std::f64::consts::LN_2).abs() < 1e-9);
    }

    #[test]
    fn complex_arithmetic() {
        let z = Complex::new(r(1.0), r(2.0));
        let w = &z * &z.recip();
        assert!(close(&w.re, &Real::one(128), 1e-36));
        assert!(w.im.abs().to_f64() < 1e-36);
        // exp(i pi) = -1
        let ipi = Complex::new(Real::zero(128), Real::pi(128));
        let m1 = ipi.exp();
        assert!(close(&m1.re, &r(-1.0), 1e-36));
        let l = z.ln().exp();
        assert!(close(&l.re, &z.re, 1e-36) && close(&l.im, &z.im, 1e-36));
    }

    #[test]
    fn complex_parsing() {
        let c = parse_complex("1+2i", 64).unwrap();
        assert_eq!((c.re.to_f64(), c.im.to_f64()), (1.0, 2.0));
        let c = parse_complex("-3.25", 64).unwrap();
        assert_eq!((c.re.to_f64(), c.im.to_f64()), (-3.25, 0.0));
        let c = parse_complex("2-3i", 64).unwrap();
        assert_eq!((c.re.to_f64(), c.im.to_f64()), (2.0, -3.0));
        let c = parse_complex("-i", 64).unwrap();
        assert_eq!((c.re.to_f64(), c.im.to_f64()), (0.0, -1.0));
        let c = parse_complex("1e-2+1e+1i", 64).unwrap();
        assert_eq!((c.re.to_f64(), c.im.to_f64()), (0.01, 10.0));
        let c = parse_complex("13/4", 64).unwrap();
        assert_eq!(c.re.to_f64(), 3.25);
        assert!(parse_complex("abc", 64).is_none());
    }
}
