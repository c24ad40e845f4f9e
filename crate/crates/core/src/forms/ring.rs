use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::generators::monomial_series;
use super::Weight;
use crate::error::{Error, Result};
use crate::qseries::{Rat, Series};

/// Homogeneous polynomial in `theta` (weight 1/2) and `F2` (weight 2).
///
/// The key `(a, b)` stands for the monomial `theta^a F2^b`; homogeneity means
/// `a + 4 b` equals twice the weight for every stored term.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RingElement {
    weight: Weight,
    terms: BTreeMap<(u32, u32), Rat>,
}

impl RingElement {
    pub fn zero(weight: Weight) -> Self {
        RingElement {
            weight,
            terms: BTreeMap::new(),
        }
    }

    pub fn monomial(a: u32, b: u32) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert((a, b), Rat::one());
        RingElement {
            weight: Weight::from_twice(a + 4 * b),
            terms,
        }
    }

    pub fn theta() -> Self {
        RingElement::monomial(1, 0)
    }

    pub fn f2() -> Self {
        RingElement::monomial(0, 1)
    }

    /// `F2 (theta^4 - 16 F2)`.
    pub fn delta4() -> Self {
        let f = RingElement::f2();
        let inner = RingElement::monomial(4, 0).sub(&f.scale(&Rat::from_integer(16.into())));
        f.mul(&inner)
    }

    /// `theta^4 - 32 F2`.
    pub fn d2() -> Self {
        RingElement::monomial(4, 0).sub(&RingElement::f2().scale(&Rat::from_integer(32.into())))
    }

    pub fn from_terms<I>(weight: Weight, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = ((u32, u32), Rat)>,
    {
        let mut e = RingElement::zero(weight);
        for ((a, b), c) in terms {
            if a + 4 * b != weight.twice() {
                return Err(Error::Domain(format!(
                    "monomial theta^{a} F2^{b} has weight {}/2, expected {weight}",
                    a + 4 * b
                )));
            }
            e.add_term((a, b), c);
        }
        Ok(e)
    }

    /// Monomials of the given weight, ordered by increasing power of `F2`.
    pub fn monomial_basis(weight: Weight) -> Vec<(u32, u32)> {
        let w = weight.twice();
        (0..=w / 4).map(|b| (w - 4 * b, b)).collect()
    }

    /// Coordinates over [`RingElement::monomial_basis`].
    pub fn coordinates(&self) -> Vec<Rat> {
        RingElement::monomial_basis(self.weight)
            .into_iter()
            .map(|m| self.terms.get(&m).cloned().unwrap_or_else(Rat::zero))
            .collect()
    }

    pub fn from_coordinates(weight: Weight, coords: &[Rat]) -> Self {
        let basis = RingElement::monomial_basis(weight);
        assert_eq!(basis.len(), coords.len(), "coordinate vector length");
        let mut e = RingElement::zero(weight);
        for (m, c) in basis.into_iter().zip(coords) {
            e.add_term(m, c.clone());
        }
        e
    }

    pub fn weight(&self) -> Weight {
        self.weight
    }

    pub fn terms(&self) -> &BTreeMap<(u32, u32), Rat> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn add_term(&mut self, m: (u32, u32), c: Rat) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(m).or_insert_with(Rat::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn add(&self, other: &RingElement) -> RingElement {
        assert_eq!(self.weight, other.weight, "adding ring elements of different weights");
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(*m, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &RingElement) -> RingElement {
        self.add(&other.scale(&-Rat::one()))
    }

    pub fn scale(&self, c: &Rat) -> RingElement {
        let mut out = RingElement::zero(self.weight);
        for (m, x) in &self.terms {
            out.add_term(*m, x * c);
        }
        out
    }

    pub fn mul(&self, other: &RingElement) -> RingElement {
        let mut out = RingElement::zero(self.weight + other.weight);
        for ((a1, b1), c1) in &self.terms {
            for ((a2, b2), c2) in &other.terms {
                out.add_term((a1 + a2, b1 + b2), c1 * c2);
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> RingElement {
        let mut out = RingElement::monomial(0, 0);
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    /// Fricke involution on the ring.
    ///
    /// The multiplicative map fixing `theta` and sending `F2` to `theta^4/16 - F2`,
    /// which is `f -> (-2 i z)^(-w) f(-1/(4z))` on forms of weight `w`.
    pub fn w4(&self) -> RingElement {
        let sixteenth = Rat::new(BigInt::one(), BigInt::from(16));
        let mut out = RingElement::zero(self.weight);
        for (&(a, b), c) in &self.terms {
            // theta^a (theta^4/16 - F2)^b = sum_j C(b,j) 16^(j-b) (-1)^j theta^(a + 4(b-j)) F2^j
            let mut binom = BigInt::one();
            for j in 0..=b {
                let mut coef = Rat::from_integer(binom.clone()) * c * pow_rat(&sixteenth, b - j);
                if j % 2 == 1 {
                    coef = -coef;
                }
                out.add_term((a + 4 * (b - j), j), coef);
                binom = binom * BigInt::from(b - j) / BigInt::from(j + 1);
            }
        }
        out
    }

    /// Constant term of the q-expansion (only `F2`-free monomials contribute).
    pub fn constant_term(&self) -> Rat {
        self.terms
            .iter()
            .filter(|((_, b), _)| *b == 0)
            .fold(Rat::zero(), |acc, (_, c)| acc + c)
    }

    pub fn series(&self, prec: usize) -> Series {
        let mut acc = Series::zero(prec);
        for (&(a, b), c) in &self.terms {
            acc = acc.add_scaled(c, &monomial_series(a, b, prec));
        }
        acc
    }
}

fn pow_rat(x: &Rat, e: u32) -> Rat {
    (0..e).fold(Rat::one(), |acc, _| acc * x)
}

impl fmt::Display for RingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (&(a, b), c)) in self.terms.iter().rev().enumerate() {
            let negative = c < &Rat::zero();
            let mag = if negative { -c.clone() } else { c.clone() };
            if i == 0 {
                if negative {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if negative { " - " } else { " + " })?;
            }
            let mut factors = Vec::new();
            if !mag.is_one() || (a == 0 && b == 0) {
                factors.push(mag.to_string());
            }
            match a {
                0 => {}
                1 => factors.push("theta".into()),
                _ => factors.push(format!("theta^{a}")),
            }
            match b {
                0 => {}
                1 => factors.push("F2".into()),
                _ => factors.push(format!("F2^{b}")),
            }
            write!(f, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}

impl fmt::Debug for RingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RingElement[{}]({self})", self.weight)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::generators::{d2, delta4};
    use proptest::prelude::*;

    #[test]
    fn w4_on_generators() {
        assert_eq!(RingElement::theta().w4(), RingElement::theta());
        assert_eq!(RingElement::delta4().w4(), RingElement::delta4());
        assert_eq!(RingElement::d2().w4(), RingElement::d2().scale(&-Rat::one()));
        let f2_image = RingElement::f2().w4();
        let expected = RingElement::monomial(4, 0)
            .scale(&Rat::new(1.into(), 16.into()))
            .sub(&RingElement::f2());
        assert_eq!(f2_image, expected);
    }

    #[test]
    fn ring_series_match_generators() {
        assert_eq!(RingElement::delta4().series(60), delta4(60));
        assert_eq!(RingElement::d2().series(60), d2(60));
    }

    #[test]
    fn homogeneity_is_enforced() {
        let bad = RingElement::from_terms(Weight::from_twice(9), [((1, 1), Rat::one())]);
        assert!(bad.is_err());
        let ok = RingElement::from_terms(Weight::from_twice(9), [((5, 1), Rat::one()), ((9, 0), Rat::one())]);
        assert_eq!(ok.unwrap().terms().len(), 2);
    }

    #[test]
    fn monomial_counts() {
        assert_eq!(RingElement::monomial_basis(Weight::half_integral(0)), vec![(1, 0)]);
        assert_eq!(
            RingElement::monomial_basis(Weight::half_integral(4)),
            vec![(9, 0), (5, 1), (1, 2)]
        );
        for k in 0..30 {
            assert_eq!(
                RingElement::monomial_basis(Weight::half_integral(k)).len() as u32,
                k / 2 + 1
            );
        }
    }

    #[test]
    fn display() {
        assert_eq!(RingElement::delta4().to_string(), "theta^4*F2 - 16*F2^2");
        assert_eq!(RingElement::theta().to_string(), "theta");
    }

    fn homogeneous() -> impl Strategy<Value = RingElement> {
        (0u32..14).prop_flat_map(|twice| {
            let n = RingElement::monomial_basis(Weight::from_twice(twice)).len();
            prop::collection::vec((-20i64..=20, 1i64..=6), n).prop_map(move |v| {
                let coords: Vec<Rat> = v.into_iter().map(|(a, b)| Rat::new(a.into(), b.into())).collect();
                RingElement::from_coordinates(Weight::from_twice(twice), &coords)
            })
        })
    }

    proptest! {
        #[test]
        fn w4_is_an_involution(e in homogeneous()) {
            prop_assert_eq!(e.w4().w4(), e);
        }

        #[test]
        fn w4_is_multiplicative(a in homogeneous(), b in homogeneous()) {
            prop_assert_eq!(a.mul(&b).w4(), a.w4().mul(&b.w4()));
        }

        #[test]
        fn series_is_a_ring_map(a in homogeneous(), b in homogeneous()) {
            prop_assert_eq!(a.mul(&b).series(30), a.series(30).mul(&b.series(30)));
        }
    }
}
