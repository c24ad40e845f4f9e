use num_traits::Signed;
use rayon::prelude::*;
use serde::Serialize;

use super::eval::{ln_growth_constant, ln_power_tail, output_rounding, real_exp_f64};
use super::gamma::gamma_upper;
use crate::error::{Error, Result};
use crate::forms::{FormVector, FrickeSign, Weight};
use crate::hecke::{coefficient_hash, Eigenform};
use crate::mp::{rat_to_complex, Complex, Real};
use crate::qseries::{Rat, Series};

const GUARD: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    GammaSeries,
    Quadrature,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::GammaSeries => "gamma_series",
            Method::Quadrature => "quadrature",
        }
    }
}

/// A value of the completed L-function with its error report.
#[derive(Debug, Clone)]
pub struct LValue {
    pub s: Complex,
    pub value: Complex,
    /// Bound on the truncation error under the coefficient growth model.
    pub tail_bound: Real,
    /// Bound on accumulated rounding in the kernels and the sum.
    pub rounding_bound: Real,
    pub terms_used: usize,
    pub method: Method,
    pub form_id: String,
    pub bits: usize,
}

impl LValue {
    pub fn error_bound(&self) -> Real {
        &self.tail_bound + &self.rounding_bound
    }

    /// Sign of the real part when it clears the error bound.
    pub fn definite_sign(&self) -> ScanSign {
        if self.value.re.abs() <= self.error_bound() {
            ScanSign::Zero
        } else if self.value.re.is_positive() {
            ScanSign::Positive
        } else {
            ScanSign::Negative
        }
    }
}

/// Fourier coefficients of a form and of its Fricke image, embedded at a fixed
/// precision.
#[derive(Debug, Clone)]
pub struct EmbeddedForm {
    pub weight: Weight,
    pub coeffs: Vec<Real>,
    pub w4_coeffs: Vec<Real>,
    pub sign: Option<FrickeSign>,
    pub id: String,
}

impl EmbeddedForm {
    pub fn from_series(f: &Series, fw4: &Series, weight: Weight, bits: usize, id: impl Into<String>) -> Self {
        let work = bits + GUARD;
        let n = f.prec().min(fw4.prec());
        let emb = |s: &Series| {
            s.coeffs()[..n]
                .iter()
                .map(|c| Real::from_rational(c, work))
                .collect::<Vec<_>>()
        };
        let sign = if fw4.truncate(n) == f.truncate(n) {
            Some(FrickeSign::Plus)
        } else if fw4.truncate(n) == (-f).truncate(n) {
            Some(FrickeSign::Minus)
        } else {
            None
        };
        EmbeddedForm {
            weight,
            coeffs: emb(f),
            w4_coeffs: emb(fw4),
            sign,
            id: id.into(),
        }
    }

    pub fn from_vector(f: &FormVector, bits: usize, id: impl Into<String>) -> Self {
        EmbeddedForm::from_series(&f.series, &f.w4_series(), f.ring.weight(), bits, id)
    }

    pub fn from_eigenform(e: &Eigenform) -> Self {
        EmbeddedForm {
            weight: e.weight,
            coeffs: e.coeffs.clone(),
            w4_coeffs: e.w4_coeffs.clone(),
            sign: e.sign(),
            id: e.id(),
        }
    }

    /// The Fricke image, as a form in its own right.
    pub fn w4(&self) -> EmbeddedForm {
        EmbeddedForm {
            weight: self.weight,
            coeffs: self.w4_coeffs.clone(),
            w4_coeffs: self.coeffs.clone(),
            sign: self.sign,
            id: format!("W4({})", self.id),
        }
    }

    pub fn prec(&self) -> usize {
        self.coeffs.len()
    }

    pub fn hash(&self) -> u64 {
        coefficient_hash(&self.coeffs)
    }
}

/// Growth exponent of the coefficient model for weight `w`: `w/2 + 1/2`.
fn growth_exponent(weight: Weight) -> f64 {
    weight.as_f64() / 2.0 + 0.5
}

/// `ln` of the tail bound for one half of the sum, truncated before `n = terms`:
/// `sum_{n >= N} C n^alpha (pi n)^(-sigma) |Gamma(s, pi n)|`.
fn ln_half_tail(ln_c: f64, alpha: f64, sigma: f64, terms: usize) -> Option<f64> {
    let pi = std::f64::consts::PI;
    let n = terms.max(1) as f64;
    let excess = (sigma - 1.0).max(0.0) / (pi * n);
    if excess >= 1.0 {
        return None;
    }
    // |Gamma(s, x)| <= x^(sigma-1) e^(-x) / (1 - max(0, sigma-1)/x)
    let per_term = ln_power_tail(ln_c, alpha - 1.0, terms, -pi)?;
    Some(per_term - pi.ln() - (-excess).ln_1p())
}

fn ln_add(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    if m == f64::NEG_INFINITY {
        m
    } else {
        m + ((a - m).exp() + (b - m).exp()).ln()
    }
}

fn ln_tail(form: &EmbeddedForm, use_w4: bool, sigma: f64, terms: usize) -> Option<f64> {
    let alpha = growth_exponent(form.weight);
    let w = form.weight.as_f64();
    let c1 = ln_growth_constant(form.coeffs.iter(), alpha);
    let c2 = if use_w4 {
        ln_growth_constant(form.w4_coeffs.iter(), alpha)
    } else {
        c1
    };
    Some(ln_add(
        ln_half_tail(c1, alpha, sigma, terms)?,
        ln_half_tail(c2, alpha, w - sigma, terms)?,
    ))
}

fn ln_target(bits: usize) -> f64 {
    -((bits as f64) - 32.0) * std::f64::consts::LN_2
}

/// Smallest truncation meeting the target, or the error naming it.
fn choose_terms(form: &EmbeddedForm, use_w4: bool, sigma: f64, bits: usize, extra: usize) -> Result<(usize, f64)> {
    let target = ln_target(bits);
    let mut n = 2;
    loop {
        if let Some(t) = ln_tail(form, use_w4, sigma, n) {
            if t <= target {
                break;
            }
        }
        n += 1;
        if n > 1 << 20 {
            return Err(Error::Convergence("no truncation meets the L-value target".into()));
        }
    }
    let n = n + extra;
    if n > form.prec() {
        return Err(Error::InsufficientPrecision {
            what: format!("L-value of {} at Re(s) = {sigma}", form.id),
            needed: n,
            available: form.prec(),
        });
    }
    let tail = ln_tail(form, use_w4, sigma, n).expect("tail finite past the chosen truncation");
    Ok((n, tail))
}

/// `K1(n) = (pi n)^(-s) Gamma(s, pi n)` and `K2(n) = (pi n)^(s-w) Gamma(w-s, pi n)`
/// for `1 <= n < terms`, reusable across forms of one weight.
#[derive(Debug, Clone)]
pub struct MellinKernel {
    pub weight: Weight,
    pub s: Complex,
    k1: Vec<Complex>,
    k2: Vec<Complex>,
}

impl MellinKernel {
    pub fn new(weight: Weight, s: &Complex, terms: usize) -> Result<MellinKernel> {
        let work = s.prec() + GUARD;
        let s_w = s.with_prec(work);
        let w = Complex::from_real(Real::from_rational(
            &Rat::new((weight.twice() as i64).into(), 2.into()),
            work,
        ));
        let dual = &w - &s_w;
        let pi = Real::pi(work);
        let mut k1 = vec![Complex::zero(work)];
        let mut k2 = vec![Complex::zero(work)];
        for n in 1..terms {
            let x = &pi * n as i64;
            let lnx = x.ln();
            k1.push(&(-&s_w).scale(&lnx).exp() * &gamma_upper(&s_w, &x)?);
            k2.push(&(-&dual).scale(&lnx).exp() * &gamma_upper(&dual, &x)?);
        }
        Ok(MellinKernel {
            weight,
            s: s.clone(),
            k1,
            k2,
        })
    }

    pub fn terms(&self) -> usize {
        self.k1.len()
    }

    /// `sum a(n) K1(n) + sum b(n) K2(n)` over the first `terms` entries, with the
    /// sum of the absolute values of the terms.
    fn apply(&self, a: &[Real], b: &[Real], terms: usize) -> (Complex, Real) {
        let work = self.k1[0].prec();
        let mut acc = Complex::zero(work);
        let mut mag = Real::zero(work);
        for n in 1..terms {
            let t1 = self.k1[n].scale(&a[n]);
            let t2 = self.k2[n].scale(&b[n]);
            mag = mag + t1.abs() + t2.abs();
            acc = &(&acc + &t1) + &t2;
        }
        (acc, mag)
    }
}

fn finish(form: &EmbeddedForm, s: &Complex, kernel: &MellinKernel, b: &[Real], terms: usize, ln_tail: f64) -> LValue {
    let bits = s.prec();
    let (value, mag) = kernel.apply(&form.coeffs, b, terms);
    let work = value.prec();
    // each kernel value is good to 2^(-work+8) relatively; the sum adds one rounding per term
    let rounding =
        mag * Real::pow2(-(work as i64) + 8, work) * (terms as i64 + 4) + output_rounding(&value.abs(), bits);
    LValue {
        s: s.clone(),
        value: value.with_prec(bits),
        tail_bound: real_exp_f64(ln_tail, bits),
        rounding_bound: rounding.with_prec(bits),
        terms_used: terms,
        method: Method::GammaSeries,
        form_id: form.id.clone(),
        bits,
    }
}

fn check_weight(form: &EmbeddedForm, kernel: &MellinKernel) -> Result<()> {
    if form.weight != kernel.weight {
        return Err(Error::Domain(format!(
            "kernel for weight {} used with a form of weight {}",
            kernel.weight, form.weight
        )));
    }
    Ok(())
}

/// Terms needed for `L*(f, s)` at the precision of `s`.
pub fn required_terms(form: &EmbeddedForm, s: &Complex, eigen: bool) -> Result<usize> {
    Ok(choose_terms(form, !eigen, s.re.to_f64(), s.prec(), 0)?.0)
}

/// `L*(f, s)` for `f|W4 = sign f`: `sum a(n) [(pi n)^(-s) Gamma(s, pi n) + sign (pi n)^(s-w) Gamma(w-s, pi n)]`.
///
/// Precision is that of `s`; the truncation is chosen so that the tail bound is
/// below `2^(-(bits - 32))`.
pub fn lstar_eigen(form: &EmbeddedForm, sign: FrickeSign, s: &Complex) -> Result<LValue> {
    let (terms, tail) = choose_terms(form, false, s.re.to_f64(), s.prec(), 0)?;
    let kernel = MellinKernel::new(form.weight, s, terms)?;
    Ok(lstar_eigen_with_kernel(form, sign, &kernel, terms, tail))
}

fn lstar_eigen_with_kernel(
    form: &EmbeddedForm,
    sign: FrickeSign,
    kernel: &MellinKernel,
    terms: usize,
    tail: f64,
) -> LValue {
    let b: Vec<Real> = match sign {
        FrickeSign::Plus => form.coeffs[..terms].to_vec(),
        FrickeSign::Minus => form.coeffs[..terms].iter().map(|x| -x).collect(),
    };
    finish(form, &kernel.s, kernel, &b, terms, tail)
}

/// `L*(f, s)` with the Fricke image taken from `form.w4_coeffs`.
pub fn lstar_generic(form: &EmbeddedForm, s: &Complex) -> Result<LValue> {
    lstar_generic_with(form, s, 0)
}

/// [`lstar_generic`] with `extra` terms beyond the chosen truncation.
pub fn lstar_generic_with(form: &EmbeddedForm, s: &Complex, extra: usize) -> Result<LValue> {
    let (terms, tail) = choose_terms(form, true, s.re.to_f64(), s.prec(), extra)?;
    let kernel = MellinKernel::new(form.weight, s, terms)?;
    Ok(finish(form, s, &kernel, &form.w4_coeffs, terms, tail))
}

/// Evaluates several forms of one weight at one `s` with a shared kernel.
///
/// Forms with a Fricke sign use the eigenform formula, the others the generic
/// one; `extra` terms are added beyond each chosen truncation.
pub fn lstar_many(forms: &[&EmbeddedForm], s: &Complex, extra: usize) -> Result<Vec<LValue>> {
    let Some(first) = forms.first() else {
        return Ok(vec![]);
    };
    let mut plan = Vec::with_capacity(forms.len());
    for f in forms {
        plan.push(choose_terms(f, f.sign.is_none(), s.re.to_f64(), s.prec(), extra)?);
    }
    let max_terms = plan.iter().map(|p| p.0).max().unwrap_or(2);
    let kernel = MellinKernel::new(first.weight, s, max_terms)?;
    forms
        .iter()
        .zip(plan)
        .map(|(f, (terms, tail))| {
            check_weight(f, &kernel)?;
            Ok(match f.sign {
                Some(sign) => lstar_eigen_with_kernel(f, sign, &kernel, terms, tail),
                None => finish(f, s, &kernel, &f.w4_coeffs, terms, tail),
            })
        })
        .collect()
}

/// `|L*(f, w - s) - L*(f|W4, s)|`, with the two sides truncated differently.
#[derive(Debug, Clone)]
pub struct FeResidual {
    pub s: Complex,
    pub residual: Real,
    /// Sum of the error bounds of both sides.
    pub budget: Real,
}

pub fn functional_equation_residual(form: &EmbeddedForm, s: &Complex) -> Result<FeResidual> {
    let prec = s.prec();
    let w = Complex::from_real(Real::from_rational(
        &Rat::new((form.weight.twice() as i64).into(), 2.into()),
        prec,
    ));
    let lhs = lstar_generic(form, &(&w - s))?;
    let rhs = lstar_generic_with(&form.w4(), s, 8)?;
    Ok(FeResidual {
        s: s.clone(),
        residual: (&lhs.value - &rhs.value).abs(),
        budget: lhs.error_bound() + rhs.error_bound(),
    })
}

/// [`functional_equation_residual`] for several forms of one weight, sharing
/// the two kernels.
pub fn functional_equation_residuals(forms: &[&EmbeddedForm], s: &Complex) -> Result<Vec<FeResidual>> {
    let Some(first) = forms.first() else {
        return Ok(vec![]);
    };
    let prec = s.prec();
    let w = Complex::from_real(Real::from_rational(
        &Rat::new((first.weight.twice() as i64).into(), 2.into()),
        prec,
    ));
    let generic: Vec<EmbeddedForm> = forms
        .iter()
        .map(|f| EmbeddedForm {
            sign: None,
            ..(*f).clone()
        })
        .collect();
    let images: Vec<EmbeddedForm> = generic.iter().map(EmbeddedForm::w4).collect();
    let lhs = lstar_many(&generic.iter().collect::<Vec<_>>(), &(&w - s), 0)?;
    let rhs = lstar_many(&images.iter().collect::<Vec<_>>(), s, 8)?;
    Ok(lhs
        .into_iter()
        .zip(rhs)
        .map(|(l, r)| FeResidual {
            s: s.clone(),
            residual: (&l.value - &r.value).abs(),
            budget: l.error_bound() + r.error_bound(),
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ScanSign {
    Positive,
    Negative,
    /// Within the error budget of zero.
    Zero,
}

impl ScanSign {
    pub fn symbol(self) -> &'static str {
        match self {
            ScanSign::Positive => "+",
            ScanSign::Negative => "-",
            ScanSign::Zero => "0",
        }
    }

    pub fn as_i32(self) -> i32 {
        match self {
            ScanSign::Positive => 1,
            ScanSign::Negative => -1,
            ScanSign::Zero => 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ScanPoint {
    pub sigma: Rat,
    pub value: LValue,
    pub sign: ScanSign,
}

/// The grid `lo, lo + step, ...` up to and including `hi`; empty when `lo >= hi`.
pub fn sigma_grid(lo: &Rat, hi: &Rat, step: &Rat) -> Result<Vec<Rat>> {
    if !step.is_positive() {
        return Err(Error::Domain(format!("scan step must be positive, got {step}")));
    }
    let mut out = Vec::new();
    if lo >= hi {
        return Ok(out);
    }
    let mut x = lo.clone();
    while &x <= hi {
        out.push(x.clone());
        x += step;
    }
    Ok(out)
}

/// `L*(f, sigma)` on a real grid, evaluated in parallel. Uses the eigenform
/// formula when `sign` is given and the generic one otherwise.
pub fn scan_real(
    form: &EmbeddedForm,
    sign: Option<FrickeSign>,
    lo: &Rat,
    hi: &Rat,
    step: &Rat,
    bits: usize,
) -> Result<Vec<ScanPoint>> {
    let grid = sigma_grid(lo, hi, step)?;
    grid.par_iter()
        .map(|sigma| {
            let s = rat_to_complex(sigma, bits);
            let value = match sign {
                Some(sg) => lstar_eigen(form, sg, &s)?,
                None => lstar_generic(form, &s)?,
            };
            let sign = value.definite_sign();
            Ok(ScanPoint {
                sigma: sigma.clone(),
                value,
                sign,
            })
        })
        .collect()
}

/// Intervals `(sigma_i, sigma_j)` between consecutive definite values of
/// opposite sign; points within their error budget of zero are skipped.
pub fn sign_changes(points: &[ScanPoint]) -> Vec<(Rat, Rat)> {
    let mut out = Vec::new();
    let mut last: Option<(&Rat, ScanSign)> = None;
    for p in points {
        if p.sign == ScanSign::Zero {
            continue;
        }
        if let Some((sigma, sg)) = last {
            if sg != p.sign {
                out.push((sigma.clone(), p.sigma.clone()));
            }
        }
        last = Some((&p.sigma, p.sign));
    }
    out
}

/// Whether a rational lies strictly inside an interval.
pub fn brackets(interval: &(Rat, Rat), x: &Rat) -> bool {
    &interval.0 < x && x < &interval.1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::{minus_form, plus_form};
    use crate::mp::parse_complex;

    const BITS: usize = 128;

    fn f1() -> EmbeddedForm {
        EmbeddedForm::from_vector(&plus_form(4, 120).unwrap(), BITS, "f1")
    }

    fn f2() -> EmbeddedForm {
        EmbeddedForm::from_vector(&minus_form(6, 120).unwrap(), BITS, "f2")
    }

    fn c(s: &str) -> Complex {
        parse_complex(s, BITS).unwrap()
    }

    fn q(a: i64, b: i64) -> Rat {
        Rat::new(a.into(), b.into())
    }

    #[test]
    fn signs_are_detected() {
        assert_eq!(f1().sign, Some(FrickeSign::Plus));
        assert_eq!(f2().sign, Some(FrickeSign::Minus));
    }

    #[test]
    fn plus_form_positive() {
        for s in ["-2", "0", "2.25", "5"] {
            let v = lstar_eigen(&f1(), FrickeSign::Plus, &c(s)).unwrap();
            assert_eq!(v.definite_sign(), ScanSign::Positive, "s = {s}");
            assert!(v.tail_bound < Real::pow2(-96, BITS));
        }
    }

    #[test]
    fn minus_form_central_zero_and_signs() {
        let f = f2();
        let v = lstar_eigen(&f, FrickeSign::Minus, &c("3.25")).unwrap();
        assert!(v.value.abs() <= v.error_bound() + Real::pow2(-64, BITS));
        assert_eq!(
            lstar_eigen(&f, FrickeSign::Minus, &c("2")).unwrap().definite_sign(),
            ScanSign::Negative
        );
        assert_eq!(
            lstar_eigen(&f, FrickeSign::Minus, &c("5")).unwrap().definite_sign(),
            ScanSign::Positive
        );
    }

    #[test]
    fn generic_matches_eigen() {
        let f = f1();
        for s in ["1", "2+3i", "-1.5"] {
            let a = lstar_eigen(&f, FrickeSign::Plus, &c(s)).unwrap();
            let b = lstar_generic(&f, &c(s)).unwrap();
            assert!((&a.value - &b.value).abs() <= a.error_bound() + b.error_bound());
        }
    }

    #[test]
    fn zero_form_gives_zero() {
        let z = Series::zero(50);
        let f = EmbeddedForm::from_series(&z, &z, Weight::half_integral(4), BITS, "0");
        let v = lstar_generic(&f, &c("1+i")).unwrap();
        assert!(v.value.abs().is_zero());
        let r = functional_equation_residual(&f, &c("2")).unwrap();
        assert!(r.residual.is_zero());
    }

    #[test]
    fn functional_equation_for_a_generic_form() {
        // a cusp form that is not a Fricke eigenform
        let plus = plus_form(6, 150).unwrap();
        let minus = minus_form(6, 150).unwrap();
        let mix = FormVector::new(plus.ring.add(&minus.ring.scale(&q(3, 1))), 150);
        let f = EmbeddedForm::from_vector(&mix, BITS, "mix");
        assert_eq!(f.sign, None);
        for s in ["1+i", "0.3", "4-2i"] {
            let r = functional_equation_residual(&f, &c(s)).unwrap();
            assert!(r.residual < Real::pow2(-90, BITS), "s = {s}: {:?}", r.residual);
        }
    }

    #[test]
    fn batched_residuals_match_single_ones() {
        let a = f1();
        let b = EmbeddedForm::from_vector(&plus_form(4, 120).unwrap(), BITS, "b");
        let s = c("1+i");
        let batch = functional_equation_residuals(&[&a, &b], &s).unwrap();
        let single = functional_equation_residual(&a, &s).unwrap();
        assert!(batch[0].residual < Real::pow2(-90, BITS));
        assert!((&batch[0].residual - &single.residual).abs() <= single.budget.clone() * 2);
    }

    #[test]
    fn minus_form_center_residual_is_twice_the_value() {
        let f = f2();
        let center = c("3.25");
        let r = functional_equation_residual(&f, &center).unwrap();
        let v = lstar_generic(&f, &center).unwrap();
        let twice = v.value.abs() * 2;
        assert!((&r.residual - &twice).abs() <= r.budget.clone() * 4);
    }

    #[test]
    fn doubling_the_terms_changes_less_than_the_bound() {
        let f = f1();
        let s = c("1.5+0.5i");
        let a = lstar_generic(&f, &s).unwrap();
        let b = lstar_generic_with(&f, &s, a.terms_used).unwrap();
        assert!((&a.value - &b.value).abs() <= a.error_bound() + b.error_bound());
    }

    #[test]
    fn short_expansion_is_rejected() {
        let f = EmbeddedForm::from_vector(&plus_form(4, 10).unwrap(), BITS, "short");
        assert!(matches!(
            lstar_eigen(&f, FrickeSign::Plus, &c("1")),
            Err(Error::InsufficientPrecision { .. })
        ));
    }

    #[test]
    fn scans() {
        let pts = scan_real(&f1(), Some(FrickeSign::Plus), &q(-2, 1), &q(7, 1), &q(1, 2), BITS).unwrap();
        assert_eq!(pts.len(), 19);
        assert!(pts.iter().all(|p| p.sign == ScanSign::Positive));
        assert!(sign_changes(&pts).is_empty());

        let pts = scan_real(&f2(), Some(FrickeSign::Minus), &q(-2, 1), &q(7, 1), &q(1, 4), BITS).unwrap();
        let changes = sign_changes(&pts);
        assert_eq!(changes.len(), 1);
        assert!(brackets(&changes[0], &q(13, 4)));
        let center = pts.iter().find(|p| p.sigma == q(13, 4)).unwrap();
        assert_eq!(center.sign, ScanSign::Zero);

        assert!(
            scan_real(&f1(), Some(FrickeSign::Plus), &q(3, 1), &q(3, 1), &q(1, 4), BITS)
                .unwrap()
                .is_empty()
        );
        assert!(sigma_grid(&q(0, 1), &q(1, 1), &q(0, 1)).is_err());
    }

    #[test]
    fn shared_kernel_matches_individual_evaluation() {
        let a = f1();
        let g = EmbeddedForm::from_vector(&plus_form(4, 120).unwrap(), BITS, "g");
        let s = c("0.75");
        let many = lstar_many(&[&a, &g], &s, 0).unwrap();
        let single = lstar_eigen(&a, FrickeSign::Plus, &s).unwrap();
        assert!((&many[0].value - &single.value).abs() <= single.error_bound() * 2);
    }
}
