//! Small integer helpers.

/// `sigma_1(n)` for `0 <= n < limit` by a divisor sieve; `sigma_1(0)` is reported as 0.
pub fn sigma1_table(limit: usize) -> Vec<u64> {
    let mut s = vec![0u64; limit];
    for d in 1..limit {
        let mut m = d;
        while m < limit {
            s[m] += d as u64;
            m += d;
        }
    }
    s
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

pub fn is_odd_prime(n: u64) -> bool {
    n > 2 && is_prime(n)
}

/// Odd primes in increasing order, starting at 3.
pub fn odd_primes() -> impl Iterator<Item = u64> {
    (3u64..).step_by(2).filter(|&n| is_prime(n))
}

/// Legendre symbol `(a | p)` for an odd prime `p`.
pub fn legendre(a: i64, p: u64) -> i32 {
    let p_i = p as i64;
    let a = a.rem_euclid(p_i) as u64;
    if a == 0 {
        return 0;
    }
    let r = mod_pow(a, (p - 1) / 2, p);
    if r == 1 {
        1
    } else {
        -1
    }
}

fn mod_pow(b: u64, mut e: u64, m: u64) -> u64 {
    let m = m as u128;
    let mut b = b as u128 % m;
    let mut r = 1u128;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    r as u64
}

pub fn is_square(n: usize) -> bool {
    let r = (n as f64).sqrt() as usize;
    (r.saturating_sub(1)..=r + 1).any(|x| x * x == n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigma_small_values() {
        let s = sigma1_table(13);
        assert_eq!(&s[1..], &[1, 3, 4, 7, 6, 12, 8, 15, 13, 18, 12, 28]);
    }

    #[test]
    fn legendre_matches_brute_force() {
        for &p in &[3u64, 5, 7, 11, 13] {
            for a in -30i64..30 {
                let residue = a.rem_euclid(p as i64);
                let expected = if residue == 0 {
                    0
                } else if (1..p as i64).any(|x| (x * x) % p as i64 == residue) {
                    1
                } else {
                    -1
                };
                assert_eq!(legendre(a, p), expected, "({a}|{p})");
            }
        }
    }

    #[test]
    fn primes() {
        let v: Vec<u64> = odd_primes().take(6).collect();
        assert_eq!(v, vec![3, 5, 7, 11, 13, 17]);
        assert!(!is_odd_prime(2));
        assert!(!is_odd_prime(9));
    }

    #[test]
    fn squares() {
        let sq: Vec<usize> = (0..50).filter(|&n| is_square(n)).collect();
        assert_eq!(sq, vec![0, 1, 4, 9, 16, 25, 36, 49]);
    }
}
