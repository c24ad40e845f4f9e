//! Exact linear algebra over the rationals and univariate polynomials over Q.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::qseries::Rat;

/// Dense row-major matrix over Q.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rat>,
}

impl QMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        QMatrix {
            rows,
            cols,
            data: vec![Rat::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = QMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Rat::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rat>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged matrix");
        QMatrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn from_columns(cols: &[Vec<Rat>], rows: usize) -> Self {
        let mut m = QMatrix::zeros(rows, cols.len());
        for (j, col) in cols.iter().enumerate() {
            for (i, x) in col.iter().enumerate() {
                m.set(i, j, x.clone());
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Rat {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rat) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Rat] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Rat> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<Rat>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn mul(&self, other: &QMatrix) -> QMatrix {
        assert_eq!(self.cols, other.rows);
        let mut out = QMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let v = out.get(i, j) + a * other.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Rat]) -> Vec<Rat> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).fold(Rat::zero(), |acc, (a, b)| acc + a * b))
            .collect()
    }

    pub fn add_scaled_identity(&self, c: &Rat) -> QMatrix {
        assert_eq!(self.rows, self.cols);
        let mut m = self.clone();
        for i in 0..self.rows {
            let v = m.get(i, i) + c;
            m.set(i, i, v);
        }
        m
    }

    pub fn add(&self, other: &QMatrix) -> QMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        QMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn scale(&self, c: &Rat) -> QMatrix {
        QMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * c).collect(),
        }
    }

    /// Reduced row echelon form and pivot columns.
    pub fn rref(&self) -> (QMatrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| !m.get(i, c).is_zero()) else {
                continue;
            };
            m.swap_rows(r, p);
            let inv = m.get(r, c).recip();
            for j in 0..m.cols {
                let v = m.get(r, j) * &inv;
                m.set(r, j, v);
            }
            for i in 0..m.rows {
                if i == r || m.get(i, c).is_zero() {
                    continue;
                }
                let f = m.get(i, c).clone();
                for j in 0..m.cols {
                    let v = m.get(i, j) - &f * m.get(r, j);
                    m.set(i, j, v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of the right null space, one vector per free column.
    pub fn kernel(&self) -> Vec<Vec<Rat>> {
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![Rat::zero(); self.cols];
                v[f] = Rat::one();
                for (row, &p) in pivots.iter().enumerate() {
                    v[p] = -r.get(row, f).clone();
                }
                v
            })
            .collect()
    }

    pub fn determinant(&self) -> Rat {
        assert_eq!(self.rows, self.cols);
        let mut m = self.clone();
        let mut det = Rat::one();
        for c in 0..m.cols {
            let Some(p) = (c..m.rows).find(|&i| !m.get(i, c).is_zero()) else {
                return Rat::zero();
            };
            if p != c {
                m.swap_rows(p, c);
                det = -det;
            }
            let piv = m.get(c, c).clone();
            det *= &piv;
            for i in c + 1..m.rows {
                if m.get(i, c).is_zero() {
                    continue;
                }
                let f = m.get(i, c) / &piv;
                for j in c..m.cols {
                    let v = m.get(i, j) - &f * m.get(c, j);
                    m.set(i, j, v);
                }
            }
        }
        det
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    /// Characteristic polynomial `det(x I - A)`.
    ///
    /// Clears denominators, runs the division-free Berkowitz recursion over Z,
    /// then rescales: if `B = D A` then `charpoly_A(x) = D^(-n) charpoly_B(D x)`.
    pub fn charpoly(&self) -> QPoly {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let d = self.data.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
        let b: Vec<Vec<BigInt>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let x = self.get(i, j);
                        x.numer() * (&d / x.denom())
                    })
                    .collect()
            })
            .collect();
        // highest degree first
        let cb = berkowitz(&b);
        // coefficient of x^(n-i) is cb[i] / d^i
        let mut low_first = vec![Rat::zero(); n + 1];
        let mut dpow = BigInt::one();
        for (i, c) in cb.iter().enumerate() {
            low_first[n - i] = Rat::new(c.clone(), dpow.clone());
            dpow *= &d;
        }
        QPoly::new(low_first)
    }
}

/// Berkowitz characteristic polynomial of an integer matrix, highest degree first.
pub fn berkowitz(a: &[Vec<BigInt>]) -> Vec<BigInt> {
    let n = a.len();
    let mut poly = vec![BigInt::one()];
    for r in 0..n {
        // Leading (r+1)x(r+1) block: [[A_r, C], [R, a_rr]].
        let col: Vec<BigInt> = (0..r).map(|i| a[i][r].clone()).collect();
        let row: Vec<BigInt> = (0..r).map(|j| a[r][j].clone()).collect();
        let mut toeplitz = Vec::with_capacity(r + 2);
        toeplitz.push(BigInt::one());
        toeplitz.push(-a[r][r].clone());
        let mut v = col;
        for _ in 0..r {
            let rv: BigInt = row.iter().zip(&v).map(|(x, y)| x * y).sum();
            toeplitz.push(-rv);
            v = (0..r).map(|i| (0..r).map(|j| &a[i][j] * &v[j]).sum()).collect();
        }
        let mut next = vec![BigInt::zero(); r + 2];
        for (i, out) in next.iter_mut().enumerate() {
            for (j, pj) in poly.iter().enumerate() {
                if i >= j && i - j < toeplitz.len() {
                    *out += &toeplitz[i - j] * pj;
                }
            }
        }
        poly = next;
    }
    poly
}

/// Univariate polynomial over Q, coefficients lowest degree first, no trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QPoly {
    coeffs: Vec<Rat>,
}

impl QPoly {
    pub fn new(mut coeffs: Vec<Rat>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        QPoly { coeffs }
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial reports `None`.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Rat {
        self.coeffs.last().cloned().unwrap_or_else(Rat::zero)
    }

    pub fn eval(&self, x: &Rat) -> Rat {
        self.coeffs.iter().rev().fold(Rat::zero(), |acc, c| acc * x + c)
    }

    pub fn derivative(&self) -> QPoly {
        QPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * Rat::from_integer(BigInt::from(i)))
                .collect(),
        )
    }

    pub fn monic(&self) -> QPoly {
        if self.is_zero() {
            return self.clone();
        }
        let l = self.leading().recip();
        QPoly::new(self.coeffs.iter().map(|c| c * &l).collect())
    }

    pub fn div_rem(&self, d: &QPoly) -> (QPoly, QPoly) {
        let dd = d.degree().expect("division by zero polynomial");
        let mut r = self.coeffs.clone();
        let Some(n) = self.degree() else {
            return (QPoly::new(vec![]), QPoly::new(vec![]));
        };
        if n < dd {
            return (QPoly::new(vec![]), self.clone());
        }
        let mut q = vec![Rat::zero(); n - dd + 1];
        let lead = d.leading();
        for i in (0..=n - dd).rev() {
            let c = &r[i + dd] / &lead;
            if !c.is_zero() {
                for (j, dj) in d.coeffs.iter().enumerate() {
                    r[i + j] -= &c * dj;
                }
            }
            q[i] = c;
        }
        r.truncate(dd);
        (QPoly::new(q), QPoly::new(r))
    }

    pub fn gcd(&self, other: &QPoly) -> QPoly {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// `p / gcd(p, p')`: same roots, all simple.
    pub fn squarefree_part(&self) -> QPoly {
        let g = self.gcd(&self.derivative());
        self.div_rem(&g).0.monic()
    }

    pub fn is_squarefree(&self) -> bool {
        self.gcd(&self.derivative()).degree() == Some(0)
    }

    fn sturm_chain(&self) -> Vec<QPoly> {
        let mut chain = vec![self.clone(), self.derivative()];
        loop {
            let n = chain.len();
            if chain[n - 1].is_zero() {
                chain.pop();
                break;
            }
            let (_, r) = chain[n - 2].div_rem(&chain[n - 1]);
            if r.is_zero() {
                break;
            }
            chain.push(QPoly::new(r.coeffs.iter().map(|c| -c).collect()));
        }
        chain
    }

    /// Cauchy bound: every root has absolute value below it.
    pub fn root_bound(&self) -> Rat {
        let l = self.leading().abs();
        let m = self.coeffs[..self.coeffs.len() - 1]
            .iter()
            .map(|c| c.abs() / &l)
            .fold(Rat::zero(), |a, b| if b > a { b } else { a });
        m + Rat::one()
    }

    /// Isolates and refines the real roots of a squarefree polynomial.
    ///
    /// Each root is returned as an interval of width at most `2^(-bits)` (or as an
    /// exact rational when bisection lands on it), sorted increasingly.
    pub fn real_roots(&self, bits: u32) -> Vec<RootInterval> {
        let Some(deg) = self.degree() else {
            return vec![];
        };
        if deg == 0 {
            return vec![];
        }
        let chain = self.sturm_chain();
        let b = self.root_bound();
        let mut pending = vec![(-b.clone(), b)];
        let mut isolated = Vec::new();
        while let Some((lo, hi)) = pending.pop() {
            let count = sign_variations(&chain, &lo) - sign_variations(&chain, &hi);
            match count {
                0 => {}
                1 => isolated.push((lo, hi)),
                _ => {
                    let mid = (&lo + &hi) / Rat::from_integer(2.into());
                    pending.push((mid.clone(), hi));
                    pending.push((lo, mid));
                }
            }
        }
        isolated.sort_by(|a, b| a.0.cmp(&b.0));
        let width = Rat::new(BigInt::one(), BigInt::one() << bits);
        isolated
            .into_iter()
            .map(|(lo, hi)| self.refine(lo, hi, &width))
            .collect()
    }

    /// Number of distinct real roots (Sturm).
    pub fn count_real_roots(&self) -> usize {
        if self.degree().unwrap_or(0) == 0 {
            return 0;
        }
        let chain = self.sturm_chain();
        let b = self.root_bound();
        sign_variations(&chain, &-b.clone()) - sign_variations(&chain, &b)
    }

    fn refine(&self, mut lo: Rat, mut hi: Rat, width: &Rat) -> RootInterval {
        // invariant: exactly one root in (lo, hi]
        let at_hi = self.eval(&hi);
        if at_hi.is_zero() {
            return RootInterval::exact(hi);
        }
        let two = Rat::from_integer(2.into());
        // sign just right of `lo` (which may itself be a neighbouring root)
        let mut s_lo = -at_hi.signum();
        while &(&hi - &lo) > width {
            let mid = (&lo + &hi) / &two;
            let v = self.eval(&mid);
            if v.is_zero() {
                return RootInterval::exact(mid);
            }
            if v.signum() == s_lo {
                lo = mid;
                s_lo = v.signum();
            } else {
                hi = mid;
            }
        }
        RootInterval { lo, hi, exact: None }
    }
}

fn sign_variations(chain: &[QPoly], x: &Rat) -> usize {
    let mut last = 0i8;
    let mut count = 0;
    for p in chain {
        let v = p.eval(x);
        let s = if v.is_positive() {
            1
        } else if v.is_negative() {
            -1
        } else {
            0
        };
        if s != 0 {
            if last != 0 && s != last {
                count += 1;
            }
            last = s;
        }
    }
    count
}

/// A real root located in `[lo, hi]`, or known exactly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootInterval {
    pub lo: Rat,
    pub hi: Rat,
    pub exact: Option<Rat>,
}

impl RootInterval {
    fn exact(r: Rat) -> Self {
        RootInterval {
            lo: r.clone(),
            hi: r.clone(),
            exact: Some(r),
        }
    }

    pub fn midpoint(&self) -> Rat {
        match &self.exact {
            Some(r) => r.clone(),
            None => (&self.lo + &self.hi) / Rat::from_integer(2.into()),
        }
    }

    /// Tries to recognize the root as a rational with denominator at most
    /// `max_den`, verified exactly against `poly`.
    pub fn recognize_rational(&self, poly: &QPoly, max_den: u64) -> Option<Rat> {
        if let Some(r) = &self.exact {
            return Some(r.clone());
        }
        let max_den = BigInt::from(max_den);
        for candidate in convergents(&self.midpoint()) {
            if candidate.denom() > &max_den {
                break;
            }
            if candidate >= self.lo && candidate <= self.hi && poly.eval(&candidate).is_zero() {
                return Some(candidate);
            }
        }
        None
    }
}

/// Continued-fraction convergents of a rational number.
fn convergents(x: &Rat) -> Vec<Rat> {
    let mut out = Vec::new();
    let (mut h0, mut h1) = (BigInt::zero(), BigInt::one());
    let (mut k0, mut k1) = (BigInt::one(), BigInt::zero());
    let mut r = x.clone();
    for _ in 0..200 {
        let a = r.floor().to_integer();
        let h2 = &a * &h1 + &h0;
        let k2 = &a * &k1 + &k0;
        out.push(Rat::new(h2.clone(), k2.clone()));
        h0 = std::mem::replace(&mut h1, h2);
        k0 = std::mem::replace(&mut k1, k2);
        let frac = &r - Rat::from_integer(a);
        if frac.is_zero() {
            break;
        }
        r = frac.recip();
    }
    out
}
