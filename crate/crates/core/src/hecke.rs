//! Hecke operators `T(p^2)` on cusp forms of weight `k + 1/2` and level 4.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::arith::{is_odd_prime, legendre, odd_primes};
use crate::error::{Error, Result};
use crate::forms::{cusp_space, eigen_space, FormSpace, FrickeSign, SpaceKind, Weight};
use crate::linalg::{QMatrix, QPoly};
use crate::mp::Real;
use crate::qseries::{Rat, Series};

/// Extra bits carried through root refinement and the numeric nullspace.
const GUARD_BITS: usize = 64;

fn check_prime(p: u64) -> Result<()> {
    if is_odd_prime(p) {
        Ok(())
    } else {
        Err(Error::Domain(format!("T(p^2) needs an odd prime p, got {p}")))
    }
}

fn rat_pow(p: u64, e: u32) -> Rat {
    Rat::from_integer(BigInt::from(p).pow(e))
}

/// Multiplier `((-1)^k n | p) p^(k-1)` of the middle term.
fn middle_factor(n: usize, p: u64, k: u32) -> i32 {
    let m = n as i64;
    legendre(if k.is_multiple_of(2) { m } else { -m }, p)
}

/// Coefficients of `T(p^2) f` for `n < prec_out`:
/// `b(n) = a(p^2 n) + ((-1)^k n | p) p^(k-1) a(n) + p^(2k-1) a(n/p^2)`.
pub fn t_p2_coeffs(f: &Series, p: u64, k: u32, prec_out: usize) -> Result<Series> {
    check_prime(p)?;
    let p2 = (p * p) as usize;
    let needed = p2 * prec_out;
    if f.prec() < needed {
        return Err(Error::InsufficientPrecision {
            what: format!("T({p}^2) to {prec_out} coefficients"),
            needed,
            available: f.prec(),
        });
    }
    let mid = if k == 0 {
        Rat::new(BigInt::one(), BigInt::from(p))
    } else {
        rat_pow(p, k - 1)
    };
    let last = if k == 0 {
        Rat::new(BigInt::one(), BigInt::from(p))
    } else {
        rat_pow(p, 2 * k - 1)
    };
    let a = f.coeffs();
    let coeffs = (0..prec_out)
        .map(|n| {
            let mut b = a[p2 * n].clone();
            match middle_factor(n, p, k) {
                1 => b += &mid * &a[n],
                -1 => b -= &mid * &a[n],
                _ => {}
            }
            if n % p2 == 0 {
                b += &last * &a[n / p2];
            }
            b
        })
        .collect();
    Ok(Series::from_coeffs(coeffs))
}

/// The same operator on embedded coefficients.
pub fn t_p2_coeffs_real(a: &[Real], p: u64, k: u32, prec_out: usize) -> Result<Vec<Real>> {
    check_prime(p)?;
    let p2 = (p * p) as usize;
    if a.len() < p2 * prec_out {
        return Err(Error::InsufficientPrecision {
            what: format!("T({p}^2) to {prec_out} coefficients"),
            needed: p2 * prec_out,
            available: a.len(),
        });
    }
    let bits = a.first().map_or(64, Real::prec);
    let mid = Real::from_rational(
        &if k == 0 {
            Rat::new(1.into(), p.into())
        } else {
            rat_pow(p, k - 1)
        },
        bits,
    );
    let last = Real::from_rational(
        &if k == 0 {
            Rat::new(1.into(), p.into())
        } else {
            rat_pow(p, 2 * k - 1)
        },
        bits,
    );
    Ok((0..prec_out)
        .map(|n| {
            let mut b = a[p2 * n].clone();
            match middle_factor(n, p, k) {
                1 => b = b + &mid * &a[n],
                -1 => b = b - &mid * &a[n],
                _ => {}
            }
            if n % p2 == 0 {
                b = b + &last * &a[n / p2];
            }
            b
        })
        .collect())
}

/// Series precision needed to compute `T(p^2)` on a space with the given
/// dimension and largest pivot.
pub fn required_prec(dim: usize, max_pivot: usize, p: u64) -> usize {
    (p * p) as usize * (dim + max_pivot) + 8
}

/// Builds the cusp space (`sign = None`) or a Fricke eigenspace of weight
/// `k + 1/2` at a precision sufficient for every prime in `primes` and at least
/// `min_prec`.
pub fn hecke_space(k: u32, sign: Option<FrickeSign>, primes: &[u64], min_prec: usize) -> Result<FormSpace> {
    let probe_prec = (k / 2) as usize + 2;
    let build = |prec| match sign {
        None => cusp_space(k, prec),
        Some(s) => eigen_space(k, s, prec),
    };
    let probe = build(probe_prec)?;
    let pmax = primes.iter().copied().max().unwrap_or(3);
    let need = required_prec(probe.dim(), probe.max_pivot().unwrap_or(0), pmax).max(min_prec);
    build(need)
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeckeMatrix {
    pub p: u64,
    pub k: u32,
    pub kind: SpaceKind,
    /// Column `j` holds the coordinates of `T(p^2) e_j`.
    pub entries: QMatrix,
}

impl HeckeMatrix {
    pub fn dim(&self) -> usize {
        self.entries.rows()
    }

    pub fn commutes_with(&self, other: &HeckeMatrix) -> bool {
        self.entries.mul(&other.entries) == other.entries.mul(&self.entries)
    }
}

/// Exact matrix of `T(p^2)` on the echelon basis of a cusp space or eigenspace.
///
/// Every image is checked against all coefficients it has, so a wrong operator
/// normalization surfaces as an error instead of a bad matrix.
pub fn t_p2_matrix(space: &FormSpace, p: u64) -> Result<HeckeMatrix> {
    check_prime(p)?;
    if space.kind() == SpaceKind::Full {
        return Err(Error::Domain("Hecke matrices are computed on cusp spaces only".into()));
    }
    let k = space.weight().k();
    let p2 = (p * p) as usize;
    let prec_out = space.prec() / p2;
    let max_pivot = space.max_pivot().unwrap_or(0);
    if space.dim() > 0 && prec_out <= max_pivot {
        return Err(Error::InsufficientPrecision {
            what: format!("T({p}^2) matrix on weight {} {} space", space.weight(), space.kind()),
            needed: p2 * (max_pivot + 1),
            available: space.prec(),
        });
    }
    let mut cols = Vec::with_capacity(space.dim());
    for e in space.basis() {
        let image = t_p2_coeffs(&e.series, p, k, prec_out)?;
        let c = space.coordinates(&image).map_err(|err| match err {
            Error::NotInSpace(msg) => Error::NotInSpace(format!("T({p}^2) image not in space: {msg}")),
            other => other,
        })?;
        cols.push(c);
    }
    Ok(HeckeMatrix {
        p,
        k,
        kind: space.kind(),
        entries: QMatrix::from_columns(&cols, space.dim()),
    })
}

/// A simultaneous eigenvector of the `T(p^2)` for a finite set of primes.
#[derive(Debug, Clone)]
pub struct Eigenform {
    pub weight: Weight,
    pub kind: SpaceKind,
    /// Position in the output of [`eigen_decompose`].
    pub index: usize,
    /// Coordinates over the echelon basis of the space.
    pub coords: Vec<Real>,
    /// Present when the eigenvector is rational.
    pub exact_coords: Option<Vec<Rat>>,
    pub eigenvalues: BTreeMap<u64, Real>,
    pub exact_eigenvalues: BTreeMap<u64, Rat>,
    /// Fourier coefficients `a(n)`, `n < prec` of the space.
    pub coeffs: Vec<Real>,
    /// Fourier coefficients of the Fricke image.
    pub w4_coeffs: Vec<Real>,
    /// Primes for which the eigen-property was verified.
    pub primes: Vec<u64>,
    pub bits: usize,
}

impl Eigenform {
    pub fn is_exact(&self) -> bool {
        self.exact_coords.is_some()
    }

    pub fn sign(&self) -> Option<FrickeSign> {
        match self.kind {
            SpaceKind::Plus => Some(FrickeSign::Plus),
            SpaceKind::Minus => Some(FrickeSign::Minus),
            _ => None,
        }
    }

    /// Short identifier: weight, space, index and a hash of the leading coefficients.
    pub fn id(&self) -> String {
        format!(
            "k={} {} #{} [{:016x}]",
            self.weight.k(),
            self.kind,
            self.index,
            coefficient_hash(&self.coeffs)
        )
    }
}

/// FNV-1a over the first 32 coefficients printed to 20 significant digits.
pub fn coefficient_hash(coeffs: &[Real]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for c in coeffs.iter().take(32) {
        for b in c.to_sci(20).bytes().chain(std::iter::once(b';')) {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    }
    h
}

/// Simultaneous eigenbasis of `{T(p^2) : p in primes}` on the space.
///
/// The characteristic polynomial of a combination of the matrices is computed
/// exactly. While it has repeated roots, the next prime's matrix is mixed in.
/// Rational roots give exact eigenvectors; the others are refined to
/// `bits + 64` bits and their eigenvectors found numerically.
pub fn eigen_decompose(space: &FormSpace, primes: &[u64], bits: usize) -> Result<Vec<Eigenform>> {
    if primes.is_empty() {
        return Err(Error::Domain("eigen decomposition needs at least one prime".into()));
    }
    if space.dim() == 0 {
        return Ok(vec![]);
    }
    let mats = primes
        .iter()
        .map(|&p| t_p2_matrix(space, p))
        .collect::<Result<Vec<_>>>()?;
    let n = space.dim();

    let mut combo = mats[0].entries.clone();
    let mut used = 1;
    let mut chi = combo.charpoly();
    while !chi.is_squarefree() {
        if used == mats.len() {
            return Err(Error::Unsplit(format!(
                "T(p^2) for p in {:?} leave a repeated eigenvalue on weight {} {} space; characteristic polynomial {:?}",
                primes,
                space.weight(),
                space.kind(),
                chi.coeffs()
            )));
        }
        // small integer multipliers avoid accidental coincidences
        let mut split = false;
        for c in 1..=8i64 {
            let candidate = combo.add(&mats[used].entries.scale(&Rat::from_integer(c.into())));
            let cp = candidate.charpoly();
            if cp.is_squarefree() {
                combo = candidate;
                chi = cp;
                split = true;
                break;
            }
        }
        if !split {
            combo = combo.add(&mats[used].entries);
            chi = combo.charpoly();
        }
        used += 1;
    }

    let root_bits = (bits + GUARD_BITS) as u32;
    let roots = chi.real_roots(root_bits);
    if roots.len() != n {
        return Err(Error::Unsplit(format!(
            "characteristic polynomial {:?} has {} real roots out of {n}",
            chi.coeffs(),
            roots.len()
        )));
    }

    let work = bits + GUARD_BITS;
    let mut out = Vec::with_capacity(n);
    for (index, root) in roots.iter().enumerate() {
        let form = match rational_root(root, &chi) {
            Some(r) => exact_eigenform(space, &mats, &combo, &r, index, bits)?,
            None => numeric_eigenform(space, &mats, &combo, &root.midpoint(), index, bits, work)?,
        };
        out.push(form);
    }
    Ok(out)
}

fn rational_root(root: &crate::linalg::RootInterval, chi: &QPoly) -> Option<Rat> {
    root.recognize_rational(chi, 1 << 40)
}

fn exact_eigenform(
    space: &FormSpace,
    mats: &[HeckeMatrix],
    combo: &QMatrix,
    root: &Rat,
    index: usize,
    bits: usize,
) -> Result<Eigenform> {
    let kernel = combo.add_scaled_identity(&-root.clone()).kernel();
    if kernel.len() != 1 {
        return Err(Error::Unsplit(format!(
            "eigenvalue {root} has a {}-dimensional eigenspace",
            kernel.len()
        )));
    }
    let v = kernel.into_iter().next().expect("one kernel vector");
    let f = space.combination(&v);
    let lead = leading_coefficient(f.series.coeffs())
        .ok_or_else(|| Error::Consistency("eigenvector with vanishing q-expansion".into()))?;
    let inv = lead.recip();
    let v: Vec<Rat> = v.iter().map(|c| c * &inv).collect();

    let mut exact_eigenvalues = BTreeMap::new();
    let mut eigenvalues = BTreeMap::new();
    for m in mats {
        let av = m.entries.mul_vec(&v);
        let j = v.iter().position(|c| !c.is_zero()).expect("nonzero eigenvector");
        let lambda = &av[j] / &v[j];
        if av.iter().zip(&v).any(|(x, y)| x != &(&lambda * y)) {
            return Err(Error::Unsplit(format!(
                "vector for eigenvalue {root} is not an eigenvector of T({}^2)",
                m.p
            )));
        }
        eigenvalues.insert(m.p, Real::from_rational(&lambda, bits));
        exact_eigenvalues.insert(m.p, lambda);
    }
    let prec = bits + GUARD_BITS;
    let series = space.combination(&v).series;
    let w4 = fricke_series(space, &v);
    Ok(Eigenform {
        weight: space.weight(),
        kind: space.kind(),
        index,
        coords: v.iter().map(|c| Real::from_rational(c, prec)).collect(),
        exact_coords: Some(v),
        eigenvalues,
        exact_eigenvalues,
        coeffs: series.coeffs().iter().map(|c| Real::from_rational(c, prec)).collect(),
        w4_coeffs: w4.coeffs().iter().map(|c| Real::from_rational(c, prec)).collect(),
        primes: mats.iter().map(|m| m.p).collect(),
        bits,
    })
}

fn fricke_series(space: &FormSpace, v: &[Rat]) -> Series {
    match space.kind() {
        SpaceKind::Plus => space.combination(v).series,
        SpaceKind::Minus => space.combination(v).series.scale(&-Rat::one()),
        _ => space.combination(v).ring.w4().series(space.prec()),
    }
}

fn leading_coefficient(c: &[Rat]) -> Option<Rat> {
    if c.len() > 1 && !c[1].is_zero() {
        return Some(c[1].clone());
    }
    c.iter().find(|x| !x.is_zero()).cloned()
}

fn numeric_eigenform(
    space: &FormSpace,
    mats: &[HeckeMatrix],
    combo: &QMatrix,
    root: &Rat,
    index: usize,
    bits: usize,
    work: usize,
) -> Result<Eigenform> {
    let n = space.dim();
    let r = Real::from_rational(root, work);
    let m: Vec<Vec<Real>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let x = Real::from_rational(combo.get(i, j), work);
                    if i == j {
                        x - &r
                    } else {
                        x
                    }
                })
                .collect()
        })
        .collect();
    let mut v = null_vector(m);

    // embedded q-expansions of the basis, then normalize
    let basis: Vec<Vec<Real>> = space
        .basis()
        .iter()
        .map(|e| e.series.coeffs().iter().map(|c| Real::from_rational(c, work)).collect())
        .collect();
    let coeffs = combine(&basis, &v, work);
    let scale_ref = coeffs.iter().map(Real::abs).fold(Real::zero(work), |a, b| a.max(&b));
    let threshold = &scale_ref * &Real::pow2(-((bits / 2) as i64), work);
    let lead_index = if coeffs.len() > 1 && coeffs[1].abs() > threshold {
        1
    } else {
        coeffs
            .iter()
            .position(|c| c.abs() > threshold)
            .ok_or_else(|| Error::Consistency("eigenvector with vanishing q-expansion".into()))?
    };
    let lead = coeffs[lead_index].clone();
    v = v.iter().map(|x| x / &lead).collect();
    let coeffs: Vec<Real> = coeffs.iter().map(|x| x / &lead).collect();

    let w4_coeffs = match space.kind() {
        SpaceKind::Plus => coeffs.clone(),
        SpaceKind::Minus => coeffs.iter().map(|x| -x).collect(),
        _ => {
            let w4_basis: Vec<Vec<Real>> = space
                .basis()
                .iter()
                .map(|e| {
                    e.w4_series()
                        .coeffs()
                        .iter()
                        .map(|c| Real::from_rational(c, work))
                        .collect()
                })
                .collect();
            combine(&w4_basis, &v, work)
        }
    };

    let vmax = v.iter().map(Real::abs).fold(Real::zero(work), |a, b| a.max(&b));
    let jmax = v.iter().position(|x| x.abs() == vmax).expect("nonempty vector");
    let tol_exp = -((bits / 2) as i64);
    let mut eigenvalues = BTreeMap::new();
    for mat in mats {
        let av: Vec<Real> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| Real::from_rational(mat.entries.get(i, j), work) * &v[j])
                    .fold(Real::zero(work), |a, b| a + b)
            })
            .collect();
        let lambda = &av[jmax] / &v[jmax];
        let scale = lambda.abs().max(&Real::one(work)) * &vmax;
        let tol = scale * Real::pow2(tol_exp, work);
        for (x, y) in av.iter().zip(&v) {
            if (x - &(&lambda * y)).abs() > tol {
                return Err(Error::Unsplit(format!(
                    "numeric eigenvector {index} fails the T({}^2) eigen check",
                    mat.p
                )));
            }
        }
        eigenvalues.insert(mat.p, lambda.with_prec(bits));
    }
    Ok(Eigenform {
        weight: space.weight(),
        kind: space.kind(),
        index,
        coords: v,
        exact_coords: None,
        eigenvalues,
        exact_eigenvalues: BTreeMap::new(),
        coeffs,
        w4_coeffs,
        primes: mats.iter().map(|m| m.p).collect(),
        bits,
    })
}

fn combine(basis: &[Vec<Real>], v: &[Real], prec: usize) -> Vec<Real> {
    let len = basis.iter().map(Vec::len).min().unwrap_or(0);
    (0..len)
        .map(|i| {
            basis
                .iter()
                .zip(v)
                .fold(Real::zero(prec), |acc, (b, c)| acc + &b[i] * c)
        })
        .collect()
}

/// Kernel vector of a matrix with one-dimensional kernel, by Gauss-Jordan
/// elimination with full pivoting. The column left without a pivot is set to 1.
fn null_vector(mut m: Vec<Vec<Real>>) -> Vec<Real> {
    let n = m.len();
    let prec = m[0][0].prec();
    let mut perm: Vec<usize> = (0..n).collect();
    for step in 0..n.saturating_sub(1) {
        let (mut bi, mut bj) = (step, step);
        let mut best = Real::zero(prec);
        for (i, row) in m.iter().enumerate().skip(step) {
            for j in step..n {
                let a = row[perm[j]].abs();
                if a > best {
                    best = a;
                    bi = i;
                    bj = j;
                }
            }
        }
        m.swap(step, bi);
        perm.swap(step, bj);
        let pc = perm[step];
        let piv = m[step][pc].clone();
        for x in m[step].iter_mut() {
            *x = &*x / &piv;
        }
        for i in 0..n {
            if i != step {
                let f = m[i][pc].clone();
                if !f.is_zero() {
                    for j in 0..n {
                        let t = &f * &m[step][j];
                        m[i][j] = &m[i][j] - &t;
                    }
                }
            }
        }
    }
    let free = perm[n - 1];
    let mut v = vec![Real::zero(prec); n];
    v[free] = Real::one(prec);
    for step in 0..n - 1 {
        v[perm[step]] = -&m[step][free];
    }
    v
}

/// Solves `V c = x` where the columns of `V` are the eigenvector coordinates,
/// after checking that `f` lies in the space.
pub fn express_in_eigenbasis(f: &Series, space: &FormSpace, eigenbasis: &[Eigenform]) -> Result<Vec<Real>> {
    let x = space.coordinates(f)?;
    let n = space.dim();
    if eigenbasis.len() != n {
        return Err(Error::Domain(format!(
            "eigenbasis has {} elements for a {n}-dimensional space",
            eigenbasis.len()
        )));
    }
    if n == 0 {
        return Ok(vec![]);
    }
    let prec = eigenbasis[0].coords[0].prec();
    let mut aug: Vec<Vec<Real>> = (0..n)
        .map(|i| {
            let mut row: Vec<Real> = eigenbasis.iter().map(|e| e.coords[i].clone()).collect();
            row.push(Real::from_rational(&x[i], prec));
            row
        })
        .collect();
    let original = aug.clone();
    for col in 0..n {
        let p = (col..n)
            .max_by(|&a, &b| aug[a][col].abs().partial_cmp(&aug[b][col].abs()).expect("ordered"))
            .expect("nonempty");
        aug.swap(col, p);
        let piv = aug[col][col].clone();
        if piv.is_zero() {
            return Err(Error::Consistency("eigenbasis is linearly dependent".into()));
        }
        for i in 0..n {
            if i != col {
                let f = &aug[i][col] / &piv;
                for j in col..=n {
                    let t = &f * &aug[col][j];
                    aug[i][j] = &aug[i][j] - &t;
                }
            }
        }
    }
    let c: Vec<Real> = (0..n).map(|i| &aug[i][n] / &aug[i][i]).collect();
    let xmax = original
        .iter()
        .map(|r| r[n].abs())
        .fold(Real::zero(prec), |a, b| a.max(&b));
    let tol = xmax.max(&Real::one(prec)) * Real::pow2(-((prec / 2) as i64), prec);
    for row in &original {
        let lhs = row[..n].iter().zip(&c).fold(Real::zero(prec), |a, (v, ci)| a + v * ci);
        if (lhs - &row[n]).abs() > tol {
            return Err(Error::NotInSpace("eigenbasis expansion leaves a residual".into()));
        }
    }
    Ok(c)
}

/// `max |(T(p^2) f)(n) / a(n) - lambda_p|` over `1 <= n <= n_max` with `a(n) != 0`.
///
/// Coefficients below `2^(-bits/2)` relative to the largest one count as zero.
pub fn eigen_ratio_deviation(f: &Eigenform, p: u64, n_max: usize) -> Result<Real> {
    let lambda = f
        .eigenvalues
        .get(&p)
        .ok_or_else(|| Error::Domain(format!("no eigenvalue recorded for p = {p}")))?;
    let image = t_p2_coeffs_real(&f.coeffs, p, f.weight.k(), n_max + 1)?;
    let prec = f.coeffs[0].prec();
    let amax = f.coeffs[..=n_max]
        .iter()
        .map(Real::abs)
        .fold(Real::zero(prec), |a, b| a.max(&b));
    let cutoff = amax * Real::pow2(-((f.bits / 2) as i64), prec);
    let mut worst = Real::zero(prec);
    for n in 1..=n_max {
        let a = &f.coeffs[n];
        if a.abs() > cutoff {
            let d = (&image[n] / a - lambda).abs();
            worst = worst.max(&d);
        }
    }
    Ok(worst)
}

/// The first `count` odd primes.
pub fn first_odd_primes(count: usize) -> Vec<u64> {
    odd_primes().take(count).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::{minus_form, plus_form};

    fn q(n: i64) -> Rat {
        Rat::from_integer(n.into())
    }

    #[test]
    fn t9_on_theta_delta4() {
        let f1 = plus_form(4, 9 * 60).unwrap();
        let image = t_p2_coeffs(&f1.series, 3, 4, 60).unwrap();
        let a = f1.series.coeffs();
        // lambda = a(9) + (1|3) 3^3 a(1), computed by hand from the formula
        let lambda = &a[9] + q(27) * &a[1];
        for n in 0..60 {
            assert_eq!(image.coeffs()[n], &lambda * &a[n], "n = {n}");
        }
    }

    #[test]
    fn middle_and_last_terms_vanish_when_p_divides_n_once() {
        let f = plus_form(5, 25 * 40).unwrap();
        let image = t_p2_coeffs(&f.series, 5, 5, 40).unwrap();
        for n in [5usize, 10, 15, 20, 30, 35] {
            assert_eq!(image.coeffs()[n], f.series.coeffs()[25 * n]);
        }
    }

    #[test]
    fn zero_maps_to_zero_and_precision_is_checked() {
        let z = Series::zero(900);
        assert!(t_p2_coeffs(&z, 3, 6, 100).unwrap().is_zero());
        let e = t_p2_coeffs(&z, 3, 6, 101).unwrap_err();
        assert!(matches!(e, Error::InsufficientPrecision { needed: 909, .. }));
        assert!(t_p2_coeffs(&z, 9, 6, 10).is_err());
        assert!(t_p2_coeffs(&z, 2, 6, 10).is_err());
    }

    #[test]
    fn one_dimensional_spaces() {
        let plus = hecke_space(4, Some(FrickeSign::Plus), &[3], 0).unwrap();
        let m = t_p2_matrix(&plus, 3).unwrap();
        assert_eq!(m.dim(), 1);
        let forms = eigen_decompose(&plus, &[3], 128).unwrap();
        assert_eq!(forms.len(), 1);
        assert!(forms[0].is_exact());
        let f1 = plus_form(4, plus.prec()).unwrap();
        assert_eq!(
            plus.coordinates(&f1.series).unwrap(),
            forms[0].exact_coords.clone().unwrap()
        );
        assert_eq!(forms[0].exact_eigenvalues[&3], m.entries.get(0, 0).clone());

        let minus = hecke_space(6, Some(FrickeSign::Minus), &[3], 0).unwrap();
        let forms = eigen_decompose(&minus, &[3], 128).unwrap();
        assert_eq!(forms.len(), 1);
        let f2 = minus_form(6, minus.prec()).unwrap();
        let c = minus.coordinates(&f2.series).unwrap();
        // f2 already has a(1) = 1
        assert_eq!(c, forms[0].exact_coords.clone().unwrap());
        assert_eq!(forms[0].coeffs[1], Real::one(192));
    }

    #[test]
    fn empty_space_gives_no_eigenforms() {
        let s = hecke_space(3, Some(FrickeSign::Plus), &[3], 0).unwrap();
        assert!(eigen_decompose(&s, &[3], 128).unwrap().is_empty());
    }

    #[test]
    fn matrices_commute_and_preserve_eigenspaces() {
        for k in 4..=12 {
            for sign in [None, Some(FrickeSign::Plus), Some(FrickeSign::Minus)] {
                let space = hecke_space(k, sign, &[3, 5, 7], 0).unwrap();
                let ms: Vec<HeckeMatrix> = [3, 5, 7].iter().map(|&p| t_p2_matrix(&space, p).unwrap()).collect();
                for a in &ms {
                    for b in &ms {
                        assert!(a.commutes_with(b), "k = {k} {sign:?} p = {} q = {}", a.p, b.p);
                    }
                }
            }
        }
    }

    #[test]
    fn twisted_operator_is_rejected() {
        // the operator for weight 17/2 applied to a form of weight 19/2
        let space = hecke_space(9, None, &[3], 0).unwrap();
        let e = &space.basis()[0];
        let wrong = t_p2_coeffs(&e.series, 3, 8, space.prec() / 9).unwrap();
        assert!(space.coordinates(&wrong).is_err());
    }

    #[test]
    fn higher_dimensional_decomposition() {
        let space = hecke_space(10, Some(FrickeSign::Plus), &[3, 5], 25 * 101).unwrap();
        assert!(space.dim() >= 2);
        let forms = eigen_decompose(&space, &[3, 5], 128).unwrap();
        assert_eq!(forms.len(), space.dim());
        let tol = Real::pow2(-64, 128);
        for f in &forms {
            for p in [3, 5] {
                let d = eigen_ratio_deviation(f, p, 100).unwrap();
                assert!(d < tol, "p = {p}: {d:?}");
            }
        }
        let g = plus_form(10, space.prec()).unwrap();
        let c = express_in_eigenbasis(&g.series, &space, &forms).unwrap();
        assert!(c.iter().any(|x| !x.is_zero()));
        // the expansion reproduces the coefficients
        for n in 0..40 {
            let sum = forms
                .iter()
                .zip(&c)
                .fold(Real::zero(192), |acc, (f, ci)| acc + &f.coeffs[n] * ci);
            let exact = Real::from_rational(&g.series.coeffs()[n], 192);
            assert!((sum - &exact).abs() <= exact.abs().max(&Real::one(192)) * Real::pow2(-80, 192));
        }
    }

    #[test]
    fn express_simple_multiples() {
        let space = hecke_space(4, Some(FrickeSign::Plus), &[3], 0).unwrap();
        let forms = eigen_decompose(&space, &[3], 128).unwrap();
        let f1 = plus_form(4, space.prec()).unwrap();
        let c = express_in_eigenbasis(&f1.series, &space, &forms).unwrap();
        assert_eq!(c[0].to_f64(), 1.0);
        let c = express_in_eigenbasis(&f1.series.scale(&q(2)), &space, &forms).unwrap();
        assert_eq!(c[0].to_f64(), 2.0);
        let outsider = minus_form(6, 40).unwrap().series;
        assert!(express_in_eigenbasis(&outsider, &space, &forms).is_err());
    }

    #[test]
    fn required_precision_formula() {
        assert_eq!(required_prec(1, 1, 3), 9 * 2 + 8);
        assert_eq!(required_prec(3, 4, 5), 25 * 7 + 8);
        let space = hecke_space(8, Some(FrickeSign::Plus), &[3, 5], 0).unwrap();
        assert!(space.prec() >= required_prec(space.dim(), space.max_pivot().unwrap(), 5));
    }
}
