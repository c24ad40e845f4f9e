//! Modular forms of level 4 as exact q-expansions.
//!
//! The graded ring of forms of weight `w/2` on Gamma_0(4) is generated by the theta
//! series (weight 1/2) and the odd-divisor series `F2` (weight 2); elements of the
//! ring are [`RingElement`]s, homogeneous polynomials in those two generators.

mod generators;
mod ring;
mod space;

use std::fmt;

use serde::Serialize;

pub use generators::{
    d2, delta4, delta4_product, delta4_product_factor_indices, f2, monomial_series, quasi_eisenstein_p, theta,
};
pub use ring::RingElement;
pub use space::{
    cusp_dimension_formula, cusp_space, eigen_space, minus_form, monomial_space, plus_form, FormSpace, FormVector,
    SpaceKind,
};

/// A weight `w/2`, stored as the integer `w`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Weight {
    twice: u32,
}

impl Weight {
    pub const fn from_twice(twice: u32) -> Weight {
        Weight { twice }
    }

    /// `k + 1/2`.
    pub const fn half_integral(k: u32) -> Weight {
        Weight { twice: 2 * k + 1 }
    }

    pub const fn integral(k: u32) -> Weight {
        Weight { twice: 2 * k }
    }

    pub fn twice(self) -> u32 {
        self.twice
    }

    pub fn is_half_integral(self) -> bool {
        self.twice % 2 == 1
    }

    /// `k` in `k + 1/2` (or the weight itself when integral).
    pub fn k(self) -> u32 {
        self.twice / 2
    }

    pub fn as_f64(self) -> f64 {
        self.twice as f64 / 2.0
    }
}

impl std::ops::Add for Weight {
    type Output = Weight;
    fn add(self, rhs: Weight) -> Weight {
        Weight::from_twice(self.twice + rhs.twice)
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_half_integral() {
            write!(f, "{}/2", self.twice)
        } else {
            write!(f, "{}", self.twice / 2)
        }
    }
}

/// Eigenvalue of the Fricke involution selecting a subspace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum FrickeSign {
    Plus,
    Minus,
}

impl FrickeSign {
    pub fn as_i32(self) -> i32 {
        match self {
            FrickeSign::Plus => 1,
            FrickeSign::Minus => -1,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            FrickeSign::Plus => "+",
            FrickeSign::Minus => "-",
        }
    }
}

impl std::str::FromStr for FrickeSign {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "+" | "+1" | "plus" => Ok(FrickeSign::Plus),
            "-" | "-1" | "minus" => Ok(FrickeSign::Minus),
            _ => Err(format!("expected + or -, got {s:?}")),
        }
    }
}
