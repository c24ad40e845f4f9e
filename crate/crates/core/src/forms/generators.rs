use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::arith::{is_square, sigma1_table};
use crate::qseries::{Rat, Series};

/// `theta = sum_{n in Z} q^(n^2)`.
pub fn theta(prec: usize) -> Series {
    Series::from_ints((0..prec).map(|n| match n {
        0 => 1i64,
        n if is_square(n) => 2,
        _ => 0,
    }))
}

/// `P = 1 - 24 sum sigma_1(n) q^n`, the weight-2 quasi-Eisenstein series.
pub fn quasi_eisenstein_p(prec: usize) -> Series {
    let sigma = sigma1_table(prec);
    Series::from_ints((0..prec).map(|n| {
        if n == 0 {
            BigInt::one()
        } else {
            BigInt::from(-24) * BigInt::from(sigma[n])
        }
    }))
}

/// `F2 = (-P(z) + 3 P(2z) - 2 P(4z)) / 24`.
pub fn f2(prec: usize) -> Series {
    let p = quasi_eisenstein_p(prec);
    let p2 = p.v_operator(2).expect("m = 2");
    let p4 = p.v_operator(4).expect("m = 4");
    let three = Rat::from_integer(3.into());
    let minus_two = Rat::from_integer((-2).into());
    (-&p)
        .add_scaled(&three, &p2)
        .add_scaled(&minus_two, &p4)
        .scale(&Rat::new(1.into(), 24.into()))
}

/// `Delta4 = F2 (theta^4 - 16 F2)`.
pub fn delta4(prec: usize) -> Series {
    let f = monomial_series(0, 1, prec);
    let t4 = monomial_series(4, 0, prec);
    let inner = t4.add_scaled(&Rat::from_integer((-16).into()), &f);
    f.mul(&inner)
}

/// Indices `n >= 1` with `n = 0, 1, 3 (mod 4)` below `prec`.
pub fn delta4_product_factor_indices(prec: usize) -> Vec<usize> {
    (1..prec).filter(|n| n % 4 != 2).collect()
}

/// `q prod_{n = 0, +-1 (mod 4)} (1 - q^n)^8`, truncated.
pub fn delta4_product(prec: usize) -> Series {
    let mut c = vec![BigInt::zero(); prec];
    if prec > 1 {
        c[1] = BigInt::one();
    }
    for n in delta4_product_factor_indices(prec) {
        for _ in 0..8 {
            // multiply in place by (1 - q^n)
            for i in (n..prec).rev() {
                if !c[i - n].is_zero() {
                    let t = c[i - n].clone();
                    c[i] -= t;
                }
            }
        }
    }
    Series::from_ints(c)
}

/// `D2 = theta^4 - 32 F2`.
pub fn d2(prec: usize) -> Series {
    monomial_series(4, 0, prec).add_scaled(&Rat::from_integer((-32).into()), &monomial_series(0, 1, prec))
}

type MonomialCache = Mutex<HashMap<(u32, u32), Arc<Series>>>;

fn cache() -> &'static MonomialCache {
    static CACHE: OnceLock<MonomialCache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// `theta^a F2^b` to precision `prec`.
///
/// Memoized per process: the longest expansion computed so far is kept and
/// truncated on request. Results are identical to recomputation.
pub fn monomial_series(a: u32, b: u32, prec: usize) -> Series {
    if let Some(s) = cache().lock().expect("cache lock").get(&(a, b)) {
        if s.prec() >= prec {
            return s.truncate(prec);
        }
    }
    let s = match (a, b) {
        (0, 0) => Series::one(prec),
        (1, 0) => theta(prec),
        (0, 1) => f2(prec),
        (a, 0) => {
            let half = monomial_series(a / 2, 0, prec);
            let sq = half.mul(&half);
            if a % 2 == 1 {
                sq.mul(&theta(prec))
            } else {
                sq
            }
        }
        (0, b) => {
            let half = monomial_series(0, b / 2, prec);
            let sq = half.mul(&half);
            if b % 2 == 1 {
                sq.mul(&f2(prec))
            } else {
                sq
            }
        }
        (a, b) => monomial_series(a, 0, prec).mul(&monomial_series(0, b, prec)),
    };
    let mut guard = cache().lock().expect("cache lock");
    let entry = guard.entry((a, b)).or_insert_with(|| Arc::new(s.clone()));
    if entry.prec() < s.prec() {
        *entry = Arc::new(s.clone());
    }
    s
}
