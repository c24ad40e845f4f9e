//! Truncated power series in `q` with exact rational coefficients.
//!
//! A [`Series`] of precision `prec` stores the coefficients of `q^0 .. q^(prec-1)`
//! of some exact object; everything from `q^prec` on is unknown, not zero.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Exact rational number, always in lowest terms with positive denominator.
pub type Rat = BigRational;

/// Below this many nonzero terms on either side, products use the schoolbook loop.
const KRONECKER_THRESHOLD: usize = 48;

#[derive(Clone, PartialEq, Eq)]
pub struct Series {
    coeffs: Vec<Rat>,
}

/// Result of [`Series::valuation`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Valuation {
    At(usize),
    /// Every known coefficient vanishes.
    ZeroToPrecision,
}

impl Valuation {
    pub fn index(self) -> Option<usize> {
        match self {
            Valuation::At(n) => Some(n),
            Valuation::ZeroToPrecision => None,
        }
    }
}

impl Series {
    pub fn from_coeffs(coeffs: Vec<Rat>) -> Self {
        Series { coeffs }
    }

    pub fn from_ints<I, T>(coeffs: I) -> Self
    where
        I: IntoIterator<Item = T>,
        T: Into<BigInt>,
    {
        Series {
            coeffs: coeffs.into_iter().map(|c| Rat::from_integer(c.into())).collect(),
        }
    }

    pub fn zero(prec: usize) -> Self {
        Series {
            coeffs: vec![Rat::zero(); prec],
        }
    }

    pub fn one(prec: usize) -> Self {
        let mut s = Series::zero(prec);
        if prec > 0 {
            s.coeffs[0] = Rat::one();
        }
        s
    }

    pub fn prec(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Rat> {
        self.coeffs
    }

    /// Exact coefficient of `q^n`. Fails rather than returning zero past the precision.
    pub fn coeff(&self, n: usize) -> Result<&Rat> {
        self.coeffs.get(n).ok_or_else(|| Error::InsufficientPrecision {
            what: format!("coefficient of q^{n}"),
            needed: n + 1,
            available: self.prec(),
        })
    }

    pub fn valuation(&self) -> Valuation {
        match self.coeffs.iter().position(|c| !c.is_zero()) {
            Some(n) => Valuation::At(n),
            None => Valuation::ZeroToPrecision,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.valuation() == Valuation::ZeroToPrecision
    }

    pub fn truncate(&self, prec: usize) -> Series {
        Series {
            coeffs: self.coeffs[..prec.min(self.prec())].to_vec(),
        }
    }

    pub fn scale(&self, c: &Rat) -> Series {
        Series {
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
    }

    /// `self + c * other`, at the smaller precision.
    pub fn add_scaled(&self, c: &Rat, other: &Series) -> Series {
        let n = self.prec().min(other.prec());
        Series {
            coeffs: (0..n).map(|i| &self.coeffs[i] + c * &other.coeffs[i]).collect(),
        }
    }

    pub fn mul(&self, other: &Series) -> Series {
        let n = self.prec().min(other.prec());
        let (a, da) = to_integer_vector(&self.coeffs[..n]);
        let (b, db) = to_integer_vector(&other.coeffs[..n]);
        let c = convolve(&a, &b, n);
        let den = da * db;
        Series {
            coeffs: c.into_iter().map(|x| Rat::new(x, den.clone())).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Series {
        let mut result = Series::one(self.prec());
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    /// `g(z) -> g(m z)`, i.e. `q -> q^m`. Precision is preserved.
    pub fn v_operator(&self, m: usize) -> Result<Series> {
        if m == 0 {
            return Err(Error::Domain("V-operator index must be positive".into()));
        }
        let coeffs = (0..self.prec())
            .map(|n| {
                if n % m == 0 {
                    self.coeffs[n / m].clone()
                } else {
                    Rat::zero()
                }
            })
            .collect();
        Ok(Series { coeffs })
    }

    /// Common-denominator integer form: `self = numerators / denominator`.
    pub fn to_integers(&self) -> (Vec<BigInt>, BigInt) {
        to_integer_vector(&self.coeffs)
    }
}

impl fmt::Debug for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Series(prec={}; ", self.prec())?;
        for (i, c) in self.coeffs.iter().enumerate().take(12) {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        if self.prec() > 12 {
            write!(f, ", ...")?;
        }
        write!(f, ")")
    }
}

impl Add for &Series {
    type Output = Series;
    fn add(self, rhs: &Series) -> Series {
        let n = self.prec().min(rhs.prec());
        Series {
            coeffs: (0..n).map(|i| &self.coeffs[i] + &rhs.coeffs[i]).collect(),
        }
    }
}

impl Sub for &Series {
    type Output = Series;
    fn sub(self, rhs: &Series) -> Series {
        let n = self.prec().min(rhs.prec());
        Series {
            coeffs: (0..n).map(|i| &self.coeffs[i] - &rhs.coeffs[i]).collect(),
        }
    }
}

impl Neg for &Series {
    type Output = Series;
    fn neg(self) -> Series {
        Series {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

impl Mul for &Series {
    type Output = Series;
    fn mul(self, rhs: &Series) -> Series {
        Series::mul(self, rhs)
    }
}

fn to_integer_vector(coeffs: &[Rat]) -> (Vec<BigInt>, BigInt) {
    let den = coeffs.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let ints = coeffs
        .iter()
        .map(|c| {
            if den.is_one() {
                c.numer().clone()
            } else {
                c.numer() * (&den / c.denom())
            }
        })
        .collect();
    (ints, den)
}

/// Truncated product of two integer polynomials, first `n` coefficients.
pub fn convolve(a: &[BigInt], b: &[BigInt], n: usize) -> Vec<BigInt> {
    let nz_a = a.iter().take(n).filter(|x| !x.is_zero()).count();
    let nz_b = b.iter().take(n).filter(|x| !x.is_zero()).count();
    if nz_a.min(nz_b) < KRONECKER_THRESHOLD {
        convolve_schoolbook(a, b, n)
    } else {
        convolve_kronecker(a, b, n)
    }
}

/// Quadratic reference product; skips zero coefficients of both operands.
pub fn convolve_schoolbook(a: &[BigInt], b: &[BigInt], n: usize) -> Vec<BigInt> {
    let mut c = vec![BigInt::zero(); n];
    let nz_b: Vec<usize> = (0..n.min(b.len())).filter(|&j| !b[j].is_zero()).collect();
    for (i, ai) in a.iter().enumerate().take(n) {
        if ai.is_zero() {
            continue;
        }
        for &j in &nz_b {
            if i + j >= n {
                break;
            }
            c[i + j] += ai * &b[j];
        }
    }
    c
}

/// Product by Kronecker substitution: pack each polynomial into one big integer
/// with fixed-width slots, multiply once, unpack. Identical to the schoolbook result.
pub fn convolve_kronecker(a: &[BigInt], b: &[BigInt], n: usize) -> Vec<BigInt> {
    let a = &a[..n.min(a.len())];
    let b = &b[..n.min(b.len())];
    let bits_a = a.iter().map(|x| x.bits()).max().unwrap_or(0);
    let bits_b = b.iter().map(|x| x.bits()).max().unwrap_or(0);
    if bits_a == 0 || bits_b == 0 {
        return vec![BigInt::zero(); n];
    }
    let len_bits = 64 - (a.len().min(b.len()) as u64).leading_zeros() as u64;
    // |c_i| < 2^(w-1)
    let w = bits_a + bits_b + len_bits + 1;

    let pa = pack(a, w);
    let pb = pack(b, w);
    let prod = pa * pb;

    // Offset every slot by 2^(w-1) so that all digits become nonnegative.
    let slots = a.len() + b.len();
    let mut offset_limbs = vec![0u64; ((slots as u64 * w) / 64 + 2) as usize];
    for i in 0..slots as u64 {
        set_bit(&mut offset_limbs, i * w + w - 1);
    }
    let shifted = prod + BigInt::from_biguint(Sign::Plus, BigUint::from_slice_u64(&offset_limbs));
    let (sign, mag) = shifted.into_parts();
    debug_assert!(sign != Sign::Minus);
    let limbs = mag.to_u64_digits();
    let half = BigInt::one() << (w - 1);
    (0..n)
        .map(|i| {
            if i >= slots {
                return BigInt::zero();
            }
            BigInt::from_biguint(Sign::Plus, extract_bits(&limbs, i as u64 * w, w)) - &half
        })
        .collect()
}

trait FromSliceU64 {
    fn from_slice_u64(limbs: &[u64]) -> BigUint;
}

impl FromSliceU64 for BigUint {
    fn from_slice_u64(limbs: &[u64]) -> BigUint {
        let mut digits = Vec::with_capacity(limbs.len() * 2);
        for &l in limbs {
            digits.push(l as u32);
            digits.push((l >> 32) as u32);
        }
        BigUint::new(digits)
    }
}

fn set_bit(limbs: &mut [u64], bit: u64) {
    limbs[(bit / 64) as usize] |= 1u64 << (bit % 64);
}

fn pack(coeffs: &[BigInt], w: u64) -> BigInt {
    let total = (coeffs.len() as u64 * w) / 64 + 2;
    let mut pos = vec![0u64; total as usize];
    let mut neg = vec![0u64; total as usize];
    for (i, c) in coeffs.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let target = if c.is_negative() { &mut neg } else { &mut pos };
        write_bits(target, i as u64 * w, &c.magnitude().to_u64_digits());
    }
    BigInt::from_biguint(Sign::Plus, BigUint::from_slice_u64(&pos))
        - BigInt::from_biguint(Sign::Plus, BigUint::from_slice_u64(&neg))
}

fn write_bits(limbs: &mut [u64], start: u64, value: &[u64]) {
    let word = (start / 64) as usize;
    let shift = start % 64;
    for (k, &v) in value.iter().enumerate() {
        limbs[word + k] |= v << shift;
        if shift > 0 {
            limbs[word + k + 1] |= v >> (64 - shift);
        }
    }
}

fn extract_bits(limbs: &[u64], start: u64, width: u64) -> BigUint {
    let nwords = width.div_ceil(64) as usize;
    let mut out = vec![0u64; nwords];
    let word = (start / 64) as usize;
    let shift = start % 64;
    for (k, o) in out.iter_mut().enumerate() {
        let lo = limbs.get(word + k).copied().unwrap_or(0);
        let hi = limbs.get(word + k + 1).copied().unwrap_or(0);
        *o = if shift == 0 {
            lo
        } else {
            (lo >> shift) | (hi << (64 - shift))
        };
    }
    let rem = width % 64;
    if rem != 0 {
        out[nwords - 1] &= (1u64 << rem) - 1;
    }
    BigUint::from_slice_u64(&out)
}

/// Parses an exact rational written as an integer, a decimal (`-0.25`) or `p/q`.
pub fn parse_rational(s: &str) -> Option<Rat> {
    let s = s.trim();
    if s.contains('/') {
        return s.parse::<Rat>().ok().filter(|_| !s.ends_with("/0"));
    }
    let (negative, body) = match s.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() || !(int.bytes().chain(frac.bytes())).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let digits: BigInt = format!("0{int}{frac}").parse().ok()?;
    let x = Rat::new(digits, BigInt::from(10).pow(frac.len() as u32));
    Some(if negative { -x } else { x })
}

#[cfg(test)]
mod tests {
    #[test]
    fn rationals_parse_exactly() {
        let r = |n: i64, d: i64| Rat::new(n.into(), d.into());
        assert_eq!(parse_rational("0.25"), Some(r(1, 4)));
        assert_eq!(parse_rational("-2"), Some(r(-2, 1)));
        assert_eq!(parse_rational("13/4"), Some(r(13, 4)));
        assert_eq!(parse_rational("-.5"), Some(r(-1, 2)));
        assert_eq!(parse_rational("7."), Some(r(7, 1)));
        for bad in ["", "-", ".", "1/0", "1e3", "a", "1.2.3"] {
            assert_eq!(parse_rational(bad), None, "{bad}");
        }
    }

    use super::*;
    use proptest::prelude::*;

    fn ints(v: &[i64]) -> Series {
        Series::from_ints(v.iter().copied())
    }

    fn theta(prec: usize) -> Series {
        let mut c = vec![0i64; prec];
        let mut m = 0usize;
        while m * m < prec {
            c[m * m] = if m == 0 { 1 } else { 2 };
            m += 1;
        }
        ints(&c)
    }

    fn r4_brute(n: i64) -> i64 {
        let r = (n as f64).sqrt() as i64 + 1;
        let mut count = 0;
        for a in -r..=r {
            for b in -r..=r {
                for c in -r..=r {
                    for d in -r..=r {
                        if a * a + b * b + c * c + d * d == n {
                            count += 1;
                        }
                    }
                }
            }
        }
        count
    }

    #[test]
    fn add_examples() {
        assert_eq!(&ints(&[1, 2]) + &ints(&[0, 3]), ints(&[1, 5]));
        let a = ints(&[1, 2, 3, 4]);
        assert_eq!(&a + &Series::zero(3), a.truncate(3));
        let t = theta(10);
        assert!((&t + &(-&t)).is_zero());
        assert_eq!((&t + &(-&t)).prec(), 10);
    }

    #[test]
    fn mul_examples() {
        let geo = ints(&[1, 1, 1, 1, 1]);
        assert_eq!(&ints(&[1, -1, 0, 0, 0]) * &geo, Series::one(5));
        let t = theta(6);
        let t4 = &(&t * &t) * &(&t * &t);
        let expected: Vec<i64> = (0..6).map(r4_brute).collect();
        assert_eq!(expected, vec![1, 8, 24, 32, 24, 48]);
        assert_eq!(t4, ints(&expected));
        let a = ints(&[3, -1, 4, 1, -5]);
        assert_eq!(&a * &Series::one(5), a);
    }

    #[test]
    fn pow_examples() {
        assert_eq!(theta(8).pow(0), Series::one(8));
        assert_eq!(ints(&[1, -1, 0, 0, 0]).pow(8), ints(&[1, -8, 28, -56, 70]));
        let t = theta(40);
        assert_eq!(t.pow(4), &(&t * &t) * &(&t * &t));
    }

    #[test]
    fn v_operator_examples() {
        assert_eq!(
            ints(&[1, -24, 0, 0, 0]).v_operator(2).unwrap(),
            ints(&[1, 0, -24, 0, 0])
        );
        let a = ints(&[5, 6, 7]);
        assert_eq!(a.v_operator(1).unwrap(), a);
        assert!(a.v_operator(0).is_err());
        // P = 1 - 24 q - 72 q^2 - ...
        let p = ints(&[1, -24, -72, -96, -168, -144]);
        assert_eq!(
            p.v_operator(4).unwrap().coeff(4).unwrap(),
            &Rat::from_integer((-24).into())
        );
    }

    #[test]
    fn coeff_and_valuation() {
        let t = theta(10);
        assert_eq!(t.coeff(4).unwrap(), &Rat::from_integer(2.into()));
        assert!(t.coeff(3).unwrap().is_zero());
        assert!(matches!(t.coeff(10), Err(Error::InsufficientPrecision { .. })));
        assert_eq!(t.valuation(), Valuation::At(0));
        assert_eq!(Series::zero(7).valuation(), Valuation::ZeroToPrecision);
        assert_eq!(ints(&[0, 0, 3]).valuation(), Valuation::At(2));
    }

    #[test]
    fn rational_coefficients_stay_reduced() {
        let a = Series::from_coeffs(vec![Rat::new(1.into(), 2.into()), Rat::new(2.into(), 3.into())]);
        let b = Series::from_coeffs(vec![Rat::new(4.into(), 3.into()), Rat::new((-3).into(), 4.into())]);
        let c = &a * &b;
        assert_eq!(c.coeff(0).unwrap(), &Rat::new(2.into(), 3.into()));
        // 1/2 * -3/4 + 2/3 * 4/3 = -3/8 + 8/9 = 37/72
        assert_eq!(c.coeff(1).unwrap(), &Rat::new(37.into(), 72.into()));
        for x in c.coeffs() {
            assert!(x.denom().is_positive());
            assert!(x.numer().gcd(x.denom()).is_one());
        }
    }

    #[test]
    fn kronecker_handles_wide_coefficients() {
        let big = BigInt::from(3).pow(200u32);
        let a: Vec<BigInt> = (0..80).map(|i| &big * (i - 40) + i).collect();
        let b: Vec<BigInt> = (0..80).map(|i| BigInt::from((i * 7919) % 113) - 56).collect();
        assert_eq!(convolve_kronecker(&a, &b, 80), convolve_schoolbook(&a, &b, 80));
        assert_eq!(convolve_kronecker(&b, &a, 50), convolve_schoolbook(&a, &b, 50));
    }

    fn small_series(max_prec: usize) -> impl Strategy<Value = Series> {
        (1..=max_prec).prop_flat_map(|p| prop::collection::vec(-9i64..=9, p).prop_map(Series::from_ints))
    }

    fn three_same_prec() -> impl Strategy<Value = (Series, Series, Series)> {
        (1usize..=32).prop_flat_map(|p| {
            let v = || prop::collection::vec(-9i64..=9, p).prop_map(Series::from_ints);
            (v(), v(), v())
        })
    }

    proptest! {
        #[test]
        fn ring_axioms((a, b, c) in three_same_prec()) {
            prop_assert_eq!(a.mul(&(&b + &c)), &a.mul(&b) + &a.mul(&c));
            prop_assert_eq!(a.mul(&b), b.mul(&a));
        }

        #[test]
        fn v_operator_is_multiplicative(a in small_series(32), b in small_series(32), m in 1usize..5) {
            let lhs = a.mul(&b).v_operator(m).unwrap();
            let rhs = a.v_operator(m).unwrap().mul(&b.v_operator(m).unwrap());
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn pow_adds_exponents(a in small_series(16), e1 in 0u32..5, e2 in 0u32..5) {
            prop_assert_eq!(a.pow(e1 + e2), a.pow(e1).mul(&a.pow(e2)));
        }

        #[test]
        fn products_are_reduced(a in small_series(16), d in 1i64..30) {
            let b = a.scale(&Rat::new(1.into(), d.into()));
            for x in b.mul(&b).coeffs() {
                prop_assert!(x.denom().is_positive());
                prop_assert!(x.numer().gcd(x.denom()).is_one());
            }
        }

        #[test]
        fn kronecker_matches_schoolbook(
            a in prop::collection::vec(-1_000_000_000_000i64..1_000_000_000_000, 1..150),
            b in prop::collection::vec(-1000i64..1000, 1..150),
        ) {
            let a: Vec<BigInt> = a.into_iter().map(BigInt::from).collect();
            let b: Vec<BigInt> = b.into_iter().map(BigInt::from).collect();
            let n = a.len().min(b.len());
            prop_assert_eq!(convolve_kronecker(&a, &b, n), convolve_schoolbook(&a, &b, n));
        }
    }
}
