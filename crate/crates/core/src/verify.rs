//! End-to-end verification suites and the JSON report.
//!
//! Every check compares a measured number against a tolerance and passes when
//! `measured <= tolerance`. Counts of failing grid points use tolerance 0.

use std::time::Instant;

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::forms::{
    cusp_dimension_formula, cusp_space, d2, delta4, delta4_product, f2, minus_form, monomial_series, plus_form, theta,
    FrickeSign, RingElement, Weight,
};
use crate::hecke::{
    eigen_decompose, eigen_ratio_deviation, express_in_eigenbasis, hecke_space, t_p2_matrix, Eigenform,
};
use crate::lfunction::{
    eval_form, functional_equation_residuals, lstar_generic, lstar_many, lstar_quadrature, sigma_grid, EmbeddedForm,
    EvalValue, LValue, ScanSign,
};
use crate::mp::{rat_to_complex, Complex, Real};
use crate::qseries::{Rat, Series};

pub const SCHEMA_VERSION: u32 = 1;

/// Identifiers of the mathematical statements checks refer to.
pub const ANCHORS: &[(&str, &str)] = &[
    ("dimension-formula", "dim S_{k+1/2}(4) = max(0, [k/2] - 1)"),
    (
        "delta4-q-product",
        "Delta4 = F2 (theta^4 - 16 F2) = q prod_{n = 0, 1, 3 mod 4} (1 - q^n)^8",
    ),
    ("fricke-ring-involution", "W4 acts on the graded ring as an involution"),
    ("theta-fricke-invariance", "theta | W4 = theta"),
    (
        "f2-fricke-transformation",
        "(2z)^-2 F2(-1/(4z)) = F2(z) - theta^4(z)/16",
    ),
    ("delta4-fricke-invariance", "Delta4 | W4 = Delta4"),
    (
        "d2-fricke-antiinvariance",
        "(2z)^-2 D2(-1/(4z)) = D2(z), i.e. D2 | W4 = -D2",
    ),
    ("theta4-32f2-at-i/2", "theta^4(i/2) = 32 F2(i/2)"),
    ("d2-zero-at-i/2", "D2(i/2) = 0"),
    ("delta4-positive", "Delta4(it) > 0 for t > 0"),
    ("d2-positive", "D2(it) > 0 for t > 1/2"),
    ("hecke-commutation", "the T(p^2) commute with each other"),
    ("hecke-fricke-commutation", "T(p^2) preserves the W4 eigenspaces"),
    (
        "hecke-eigenbasis",
        "the W4 eigenspaces have a basis of Hecke eigenforms",
    ),
    ("functional-equation", "L*(f, k + 1/2 - s) = L*(f|W4, s)"),
    (
        "mellin-identity",
        "L*(f, s) as an integral over [1/2, oo) of f(it) and (f|W4)(it)",
    ),
    ("central-zero", "f|W4 = -f implies L*(f, k/2 + 1/4) = 0"),
    (
        "theorem-plus",
        "k >= 4: a plus Hecke eigenform with L*(f, sigma) != 0, for each real sigma",
    ),
    (
        "theorem-minus",
        "k >= 6, sigma != k/2 + 1/4: a minus Hecke eigenform with L*(f, sigma) != 0",
    ),
];

pub fn anchor_known(id: &str) -> bool {
    ANCHORS.iter().any(|(a, _)| *a == id)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

/// What a passing check establishes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Scope {
    /// Exact rational arithmetic.
    Exact,
    /// Floating evaluation with explicit error bounds.
    Numeric,
    /// Numeric, at finitely many grid points only.
    GridPoints,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub check_id: String,
    pub status: Status,
    pub paper_anchor: String,
    pub measured: Option<f64>,
    pub tolerance: f64,
    pub seconds: f64,
    pub scope: Scope,
    pub detail: String,
}

impl CheckResult {
    fn new(id: impl Into<String>, anchor: &str, scope: Scope) -> CheckResult {
        debug_assert!(anchor_known(anchor), "unregistered anchor {anchor}");
        CheckResult {
            check_id: id.into(),
            status: Status::Skipped,
            paper_anchor: anchor.to_string(),
            measured: None,
            tolerance: 0.0,
            seconds: 0.0,
            scope,
            detail: String::new(),
        }
    }

    fn measure(mut self, measured: f64, tolerance: f64) -> CheckResult {
        self.measured = Some(measured);
        self.tolerance = tolerance;
        self.status = if measured <= tolerance {
            Status::Pass
        } else {
            Status::Fail
        };
        self
    }

    fn detail(mut self, d: impl Into<String>) -> CheckResult {
        self.detail = d.into();
        self
    }

    fn failed(mut self, err: &Error) -> CheckResult {
        self.status = Status::Fail;
        self.detail = err.to_string();
        self
    }

    fn skipped(mut self, reason: impl Into<String>) -> CheckResult {
        self.status = Status::Skipped;
        self.detail = reason.into();
        self
    }

    fn timed(mut self, start: Instant) -> CheckResult {
        self.seconds = start.elapsed().as_secs_f64();
        self
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

fn count(ok: impl Iterator<Item = bool>) -> f64 {
    ok.filter(|b| !b).count() as f64
}

/// Log-spaced points in `[lo, hi]`, both ends included.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| lo * (hi / lo).powf(i as f64 / (n - 1).max(1) as f64))
        .collect()
}

/// Evaluates `f(it)`, lengthening the series when the tail model asks for it.
fn eval_auto(build: &dyn Fn(usize) -> Series, weight: Weight, t: &Real, prec: usize) -> Result<(EvalValue, usize)> {
    let mut p = prec;
    for _ in 0..4 {
        match eval_form(&build(p), weight, t) {
            Ok(v) => return Ok((v, p)),
            Err(Error::InsufficientPrecision { needed, .. }) if needed > p => p = needed + 8,
            Err(e) => return Err(e),
        }
    }
    Err(Error::InsufficientPrecision {
        what: format!("evaluation at t = {}", t.to_f64()),
        needed: p,
        available: prec,
    })
}

fn rel_err(a: &Real, b: &Real) -> f64 {
    let d = (a - b).abs();
    if b.is_zero() {
        d.to_f64()
    } else {
        (d / b.abs()).to_f64()
    }
}

pub const TRANSFORMATION_POINTS: [f64; 3] = [0.6, 1.0, 1.7];
pub const TRANSFORMATION_TOLERANCE: f64 = 1e-25;
pub const SPECIAL_VALUE_TOLERANCE: f64 = 1e-25;

type Builder = Box<dyn Fn(usize) -> Series>;
type Factor = Box<dyn Fn(&Real) -> Real>;
type Side = Box<dyn Fn(&Real, usize) -> Result<Real>>;

/// Evaluates `lhs_factor(t) * g(i/(4t))` and `rhs(it)` for each sample `t`, and
/// returns the largest relative difference.
fn transformation_law(
    g: &dyn Fn(usize) -> Series,
    weight: Weight,
    factor: &dyn Fn(&Real) -> Real,
    rhs: &dyn Fn(&Real, usize) -> Result<Real>,
    prec: usize,
    bits: usize,
) -> Result<f64> {
    let mut worst = 0f64;
    for &t in &TRANSFORMATION_POINTS {
        let t = Real::from_f64(t, bits);
        let dual = Real::one(bits) / (&t * 4);
        let (v, _) = eval_auto(g, weight, &dual, prec)?;
        let lhs = factor(&t) * &v.value;
        let r = rhs(&t, prec)?;
        worst = worst.max(rel_err(&lhs, &r));
    }
    Ok(worst)
}

/// Ring identities, numeric transformation laws at `it`, special values at
/// `i/2`, and the positivity grids.
pub fn verify_identities(prec: usize, bits: usize) -> Vec<CheckResult> {
    let mut out = Vec::new();

    let start = Instant::now();
    let mismatches: Vec<u32> = (0..=30u32)
        .filter(|&k| cusp_space(k, 40).map(|s| s.dim()).ok() != Some(cusp_dimension_formula(k)))
        .collect();
    out.push(
        CheckResult::new(
            "identities/dimension-formula/k=0..30",
            "dimension-formula",
            Scope::Exact,
        )
        .measure(mismatches.len() as f64, 0.0)
        .detail(if mismatches.is_empty() {
            String::new()
        } else {
            format!("mismatch at k = {mismatches:?}")
        })
        .timed(start),
    );

    let start = Instant::now();
    let n = prec.max(500);
    let a = delta4(n);
    let b = delta4_product(n);
    let diff = (0..n).filter(|&i| a.coeffs()[i] != b.coeffs()[i]).count();
    out.push(
        CheckResult::new(
            format!("identities/delta4-q-product/{n}-coefficients"),
            "delta4-q-product",
            Scope::Exact,
        )
        .measure(diff as f64, 0.0)
        .timed(start),
    );

    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let bad = (0..50)
        .filter(|_| {
            let twice = rng.gen_range(1..=25u32);
            let coords: Vec<Rat> = RingElement::monomial_basis(Weight::from_twice(twice))
                .iter()
                .map(|_| Rat::new(rng.gen_range(-50i64..=50).into(), rng.gen_range(1i64..=9).into()))
                .collect();
            let e = RingElement::from_coordinates(Weight::from_twice(twice), &coords);
            e.w4().w4() != e
        })
        .count();
    out.push(
        CheckResult::new(
            "identities/w4-involution/50-random",
            "fricke-ring-involution",
            Scope::Exact,
        )
        .measure(bad as f64, 0.0)
        .timed(start),
    );
    let start = Instant::now();
    let minus_one = -Rat::one();
    let exact = [
        (
            "identities/w4-delta4-exact",
            "delta4-fricke-invariance",
            RingElement::delta4().w4() == RingElement::delta4(),
        ),
        (
            "identities/w4-d2-exact",
            "d2-fricke-antiinvariance",
            RingElement::d2().w4() == RingElement::d2().scale(&minus_one),
        ),
        (
            "identities/w4-theta-exact",
            "theta-fricke-invariance",
            RingElement::theta().w4() == RingElement::theta(),
        ),
    ];
    for (id, anchor, ok) in exact {
        out.push(
            CheckResult::new(id, anchor, Scope::Exact)
                .measure(if ok { 0.0 } else { 1.0 }, 0.0)
                .timed(start),
        );
    }

    // numeric transformation laws at z = it, where 2z = 2it: (2it)^-2 = -(2t)^-2
    let theta_b: Builder = Box::new(theta);
    let f2_b: Builder = Box::new(f2);
    let d4_b: Builder = Box::new(delta4);
    let d2_b: Builder = Box::new(d2);
    let laws: Vec<(&str, &str, &Builder, Weight, Factor, Side)> = vec![
        (
            "identities/theta-transformation",
            "theta-fricke-invariance",
            &theta_b,
            Weight::from_twice(1),
            Box::new(|t: &Real| (t * 2).sqrt().recip_real()),
            Box::new(|t: &Real, p| Ok(eval_auto(&theta, Weight::from_twice(1), t, p)?.0.value)),
        ),
        (
            "identities/f2-transformation",
            "f2-fricke-transformation",
            &f2_b,
            Weight::integral(2),
            Box::new(|t: &Real| -(t * 2).powi(-2)),
            Box::new(|t: &Real, p| {
                let f = eval_auto(&f2, Weight::integral(2), t, p)?.0.value;
                let th4 = eval_auto(&|n| monomial_series(4, 0, n), Weight::integral(2), t, p)?
                    .0
                    .value;
                Ok(f - th4 / 16)
            }),
        ),
        (
            "identities/delta4-transformation",
            "delta4-fricke-invariance",
            &d4_b,
            Weight::integral(4),
            Box::new(|t: &Real| (t * 2).powi(-4)),
            Box::new(|t: &Real, p| Ok(eval_auto(&delta4, Weight::integral(4), t, p)?.0.value)),
        ),
        (
            "identities/d2-transformation",
            "d2-fricke-antiinvariance",
            &d2_b,
            Weight::integral(2),
            Box::new(|t: &Real| -(t * 2).powi(-2)),
            Box::new(|t: &Real, p| Ok(eval_auto(&d2, Weight::integral(2), t, p)?.0.value)),
        ),
    ];
    for (id, anchor, g, weight, factor, rhs) in laws {
        let start = Instant::now();
        let check = CheckResult::new(format!("{id}/t=0.6,1,1.7"), anchor, Scope::Numeric);
        out.push(
            match transformation_law(g.as_ref(), weight, factor.as_ref(), rhs.as_ref(), prec, bits) {
                Ok(worst) => check.measure(worst, TRANSFORMATION_TOLERANCE),
                Err(e) => check.failed(&e),
            }
            .timed(start),
        );
    }

    // special values at i/2
    let start = Instant::now();
    let half = Real::from_f64(0.5, bits);
    let special = (|| -> Result<(f64, f64)> {
        // measured = |computed value| + its error bound, an upper bound on the true value
        let th4 = eval_auto(&|n| monomial_series(4, 0, n), Weight::integral(2), &half, prec)?.0;
        let f = eval_auto(&f2, Weight::integral(2), &half, prec)?.0;
        let d = eval_auto(&d2, Weight::integral(2), &half, prec)?.0;
        let a = (&th4.value - &(&f.value * 32)).abs() + th4.error_bound() + f.error_bound() * 32;
        Ok((a.to_f64(), (d.value.abs() + d.error_bound()).to_f64()))
    })();
    match special {
        Ok((a, b)) => {
            out.push(
                CheckResult::new(
                    "identities/theta4-minus-32f2-at-i/2",
                    "theta4-32f2-at-i/2",
                    Scope::Numeric,
                )
                .measure(a, SPECIAL_VALUE_TOLERANCE)
                .timed(start),
            );
            out.push(
                CheckResult::new("identities/d2-at-i/2", "d2-zero-at-i/2", Scope::Numeric)
                    .measure(b, SPECIAL_VALUE_TOLERANCE)
                    .timed(start),
            );
        }
        Err(e) => {
            out.push(
                CheckResult::new(
                    "identities/theta4-minus-32f2-at-i/2",
                    "theta4-32f2-at-i/2",
                    Scope::Numeric,
                )
                .failed(&e),
            );
            out.push(CheckResult::new("identities/d2-at-i/2", "d2-zero-at-i/2", Scope::Numeric).failed(&e));
        }
    }

    out.push(positivity_grid(
        "identities/delta4-positive/200-points-t-in-[0.05,50]",
        "delta4-positive",
        &delta4,
        Weight::integral(4),
        &log_grid(0.05, 50.0, 200),
        prec,
        bits,
    ));
    let d2_grid: Vec<f64> = (1..=200).map(|i| 0.5 * 100f64.powf(i as f64 / 200.0)).collect();
    out.push(positivity_grid(
        "identities/d2-positive/200-points-t-in-(0.5,50]",
        "d2-positive",
        &d2,
        Weight::integral(2),
        &d2_grid,
        prec,
        bits,
    ));
    out
}

trait RecipReal {
    fn recip_real(&self) -> Real;
}

impl RecipReal for Real {
    fn recip_real(&self) -> Real {
        Real::one(self.prec()) / self
    }
}

fn positivity_grid(
    id: &str,
    anchor: &str,
    build: &dyn Fn(usize) -> Series,
    weight: Weight,
    grid: &[f64],
    prec: usize,
    bits: usize,
) -> CheckResult {
    let start = Instant::now();
    let check = CheckResult::new(id, anchor, Scope::GridPoints);
    // provision once for the smallest t, then reuse the series
    let t_min = grid.iter().copied().fold(f64::INFINITY, f64::min);
    let used = match eval_auto(build, weight, &Real::from_f64(t_min, bits), prec) {
        Ok((_, p)) => p,
        Err(e) => return check.failed(&e).timed(start),
    };
    let series = build(used);
    let work = bits + 32;
    let coeffs: Vec<Real> = series.coeffs().iter().map(|c| Real::from_rational(c, work)).collect();
    let mut failures = 0usize;
    let mut min_ratio = f64::INFINITY;
    for &t in grid {
        match crate::lfunction::eval_real_coeffs(&coeffs, weight.as_f64(), &Real::from_f64(t, bits)) {
            Ok(v) => {
                if v.definite_sign() != 1 {
                    failures += 1;
                } else {
                    let margin = v.value.ln_abs_f64() - v.error_bound().ln_abs_f64();
                    min_ratio = min_ratio.min(margin / std::f64::consts::LN_10);
                }
            }
            Err(_) => failures += 1,
        }
    }
    check
        .measure(failures as f64, 0.0)
        .detail(format!(
            "series precision {used}; smallest value/error ratio 1e{:.1}",
            min_ratio
        ))
        .timed(start)
}

pub const HECKE_PRIMES: [u64; 2] = [3, 5];
pub const EIGEN_PRIMES: [u64; 3] = [3, 5, 7];
pub const EIGEN_RATIO_TOLERANCE: f64 = 1e-20;
pub const EIGEN_RATIO_RANGE: usize = 100;

/// Eigenforms of the plus or minus space of weight `k + 1/2`, with enough
/// precision for L-values and for the eigen-ratio check up to `n_max`.
pub fn eigenforms(k: u32, sign: FrickeSign, n_max: usize, bits: usize) -> Result<Vec<Eigenform>> {
    let min_prec = (HECKE_PRIMES[1] * HECKE_PRIMES[1]) as usize * (n_max + 1);
    eigenforms_at(k, sign, min_prec, bits)
}

/// Eigenforms from a space built with at least `min_prec` coefficients.
pub fn eigenforms_at(k: u32, sign: FrickeSign, min_prec: usize, bits: usize) -> Result<Vec<Eigenform>> {
    let space = hecke_space(k, Some(sign), &EIGEN_PRIMES, min_prec)?;
    eigen_decompose(&space, &EIGEN_PRIMES, bits)
}

/// Series precision the suites use by default for the eigenforms of weight `k + 1/2`.
pub fn default_eigen_prec(k: u32, sign: FrickeSign) -> Result<usize> {
    Ok(hecke_space(k, Some(sign), &EIGEN_PRIMES, 0)?.prec())
}

/// Series precision of the Hecke suite: enough for `T(25)` up to `n <= 100`.
pub const HECKE_SUITE_PREC: usize = 25 * (EIGEN_RATIO_RANGE + 1);

/// Commutation and membership of `T(9)`, `T(25)` on both Fricke eigenspaces of
/// weight `k + 1/2`, and the eigen-ratio property of the eigenbasis.
pub fn verify_hecke(k: u32, bits: usize) -> Vec<CheckResult> {
    verify_hecke_at(k, bits, HECKE_SUITE_PREC)
}

pub fn verify_hecke_at(k: u32, bits: usize, min_prec: usize) -> Vec<CheckResult> {
    let mut out = Vec::new();
    for sign in [FrickeSign::Plus, FrickeSign::Minus] {
        let tag = format!(
            "hecke/k={k}/{}",
            if sign == FrickeSign::Plus { "plus" } else { "minus" }
        );
        let start = Instant::now();
        let space = match hecke_space(k, Some(sign), &HECKE_PRIMES, min_prec.max(HECKE_SUITE_PREC)) {
            Ok(s) => s,
            Err(e) => {
                out.push(
                    CheckResult::new(format!("{tag}/membership"), "hecke-fricke-commutation", Scope::Exact).failed(&e),
                );
                continue;
            }
        };
        if space.dim() == 0 {
            for (what, anchor) in [
                ("membership", "hecke-fricke-commutation"),
                ("commute-9-25", "hecke-commutation"),
                ("eigen-ratio", "hecke-eigenbasis"),
            ] {
                out.push(CheckResult::new(format!("{tag}/{what}"), anchor, Scope::Exact).skipped("space trivial"));
            }
            continue;
        }
        let mats: Result<Vec<_>> = HECKE_PRIMES.iter().map(|&p| t_p2_matrix(&space, p)).collect();
        let mats = match mats {
            Ok(m) => m,
            Err(e) => {
                out.push(
                    CheckResult::new(format!("{tag}/membership"), "hecke-fricke-commutation", Scope::Exact).failed(&e),
                );
                continue;
            }
        };
        out.push(
            CheckResult::new(format!("{tag}/membership"), "hecke-fricke-commutation", Scope::Exact)
                .measure(0.0, 0.0)
                .detail(format!("dim {}, series precision {}", space.dim(), space.prec()))
                .timed(start),
        );
        out.push(
            CheckResult::new(format!("{tag}/commute-9-25"), "hecke-commutation", Scope::Exact)
                .measure(if mats[0].commutes_with(&mats[1]) { 0.0 } else { 1.0 }, 0.0)
                .timed(start),
        );
        let start = Instant::now();
        let check = CheckResult::new(format!("{tag}/eigen-ratio"), "hecke-eigenbasis", Scope::Numeric);
        let result = eigen_decompose(&space, &EIGEN_PRIMES, bits).and_then(|forms| {
            let mut worst = Real::zero(bits);
            for f in &forms {
                for &p in &HECKE_PRIMES {
                    worst = worst.max(&eigen_ratio_deviation(f, p, EIGEN_RATIO_RANGE)?);
                }
            }
            Ok((forms.len(), worst))
        });
        out.push(
            match result {
                Ok((n, worst)) => check.measure(worst.to_f64(), EIGEN_RATIO_TOLERANCE).detail(format!(
                    "{n} eigenforms; primes {EIGEN_PRIMES:?} certified; n <= {EIGEN_RATIO_RANGE}"
                )),
                Err(e) => check.failed(&e),
            }
            .timed(start),
        );
    }
    out
}

pub const FE_TOLERANCE: f64 = 1e-20;
pub const FE_SAMPLES: usize = 5;

/// Pseudo-random points `sigma + i tau` with `0 <= sigma <= k + 1/2`, `|tau| <= 2`,
/// seeded by `k`.
pub fn fe_sample_points(k: u32, bits: usize) -> Vec<Complex> {
    let mut rng = ChaCha8Rng::seed_from_u64(1000 + u64::from(k));
    let w = k as f64 + 0.5;
    (0..FE_SAMPLES)
        .map(|_| {
            let re: f64 = rng.gen_range(0.0..=w);
            let im: f64 = rng.gen_range(-2.0..=2.0);
            // round to 1/64 so the points have short exact representations
            let q = |x: f64| Real::from_f64((x * 64.0).round() / 64.0, bits);
            Complex::new(q(re), q(im))
        })
        .collect()
}

/// Functional-equation residuals for every eigenform of weight `k + 1/2`.
pub fn verify_functional_equation(k: u32, bits: usize) -> Vec<CheckResult> {
    verify_functional_equation_at(k, bits, 0)
}

pub fn verify_functional_equation_at(k: u32, bits: usize, min_prec: usize) -> Vec<CheckResult> {
    let start = Instant::now();
    let check = CheckResult::new(
        format!("functional-equation/k={k}"),
        "functional-equation",
        Scope::Numeric,
    );
    let mut forms = Vec::new();
    for sign in [FrickeSign::Plus, FrickeSign::Minus] {
        match eigenforms_at(k, sign, min_prec, bits) {
            Ok(f) => forms.extend(f.iter().map(EmbeddedForm::from_eigenform)),
            Err(e) => return vec![check.failed(&e).timed(start)],
        }
    }
    if forms.is_empty() {
        return vec![check.skipped("space trivial")];
    }
    let refs: Vec<&EmbeddedForm> = forms.iter().collect();
    let points = fe_sample_points(k, bits);
    let results: Result<Vec<_>> = points
        .par_iter()
        .map(|s| functional_equation_residuals(&refs, s))
        .collect();
    match results {
        Ok(rs) => {
            let worst = rs.iter().flatten().map(|r| r.residual.to_f64()).fold(0.0, f64::max);
            vec![check
                .measure(worst, FE_TOLERANCE)
                .detail(format!("{} eigenforms x {} points", forms.len(), points.len()))
                .timed(start)]
        }
        Err(e) => vec![check.failed(&e).timed(start)],
    }
}

pub const DUAL_METHOD_RELATIVE_TARGET: f64 = 1e-15;

/// The sample points `{0, 1, k/2 + 1/4, k, 2 + 3i}`.
pub fn dual_method_points(k: u32, bits: usize) -> Vec<(String, Complex)> {
    let center = Rat::new((2 * k as i64 + 1).into(), 4.into());
    vec![
        ("0".into(), Complex::zero(bits)),
        ("1".into(), Complex::one(bits)),
        (center.to_string(), rat_to_complex(&center, bits)),
        (k.to_string(), Complex::from_real(Real::from_i64(k as i64, bits))),
        (
            "2+3i".into(),
            Complex::new(Real::from_i64(2, bits), Real::from_i64(3, bits)),
        ),
    ]
}

/// Gamma series against quadrature for one form: the discrepancy must lie
/// within the combined error budgets, and the budgets within the relative target.
pub fn verify_dual_method(form: &EmbeddedForm, k: u32, label: &str, bits: usize) -> Vec<CheckResult> {
    dual_method_points(k, bits)
        .into_iter()
        .map(|(name, s)| {
            let start = Instant::now();
            let check = CheckResult::new(
                format!("dual-method/{label}/s={name}"),
                "mellin-identity",
                Scope::Numeric,
            );
            match (lstar_generic(form, &s), lstar_quadrature(form, &s)) {
                (Ok(a), Ok(b)) => {
                    let diff = (&a.value - &b.value).abs();
                    let budget = a.error_bound() + b.error_bound();
                    let scale = a.value.abs().max(&Real::one(bits));
                    let within_target = budget <= &scale * &Real::from_f64(DUAL_METHOD_RELATIVE_TARGET, bits);
                    let check = check.measure(diff.to_f64(), budget.to_f64()).detail(format!(
                        "value {}; budget {} ({} relative target)",
                        a.value.to_string_digits(12),
                        budget.to_sci(3),
                        if within_target { "meets" } else { "misses" }
                    ));
                    if within_target {
                        check
                    } else {
                        CheckResult {
                            status: Status::Fail,
                            ..check
                        }
                    }
                }
                (Err(e), _) | (_, Err(e)) => check.failed(&e),
            }
            .timed(start)
        })
        .collect()
}

/// Per-`sigma` outcome of a theorem run.
#[derive(Debug, Clone)]
pub struct TheoremPoint {
    pub sigma: Rat,
    pub value: LValue,
    pub expected: ScanSign,
    pub sign: ScanSign,
    /// Index of the witnessing eigenform and its L-value.
    pub witness: Option<(usize, LValue)>,
}

#[derive(Debug, Clone)]
pub struct TheoremRun {
    pub k: u32,
    pub sign: FrickeSign,
    /// Series precision of the eigenforms.
    pub prec: usize,
    pub coefficients: Vec<Real>,
    pub points: Vec<TheoremPoint>,
}

/// The default grid `[-2, k + 3]` in steps of 1/4.
pub fn default_sigma_grid(k: u32) -> Vec<Rat> {
    sigma_grid(
        &Rat::from_integer((-2).into()),
        &Rat::from_integer((k as i64 + 3).into()),
        &Rat::new(1.into(), 4.into()),
    )
    .expect("positive step")
}

/// Evaluates `L*(g, sigma)` for the structured form `g` of the theorem, writes
/// `g` in the Hecke eigenbasis and picks the eigenform maximizing
/// `|c_i L*(f_i, sigma)|` among those with `|L*(f_i, sigma)|` above its error budget.
pub fn theorem_run(k: u32, sign: FrickeSign, grid: &[Rat], bits: usize) -> Result<TheoremRun> {
    theorem_run_at(k, sign, grid, bits, 0)
}

pub fn theorem_run_at(k: u32, sign: FrickeSign, grid: &[Rat], bits: usize, min_prec: usize) -> Result<TheoremRun> {
    let (min_k, what) = match sign {
        FrickeSign::Plus => (4, "plus"),
        FrickeSign::Minus => (6, "minus"),
    };
    if k < min_k {
        return Err(Error::Domain(format!(
            "the {what} theorem needs k >= {min_k}, got k = {k}"
        )));
    }
    let space = hecke_space(k, Some(sign), &EIGEN_PRIMES, min_prec)?;
    let forms = eigen_decompose(&space, &EIGEN_PRIMES, bits)?;
    let g = match sign {
        FrickeSign::Plus => plus_form(k, space.prec())?,
        FrickeSign::Minus => minus_form(k, space.prec())?,
    };
    let coefficients = express_in_eigenbasis(&g.series, &space, &forms)?;
    let g_label = match sign {
        FrickeSign::Plus => format!("Delta4*theta^{}", 2 * k - 7),
        FrickeSign::Minus => format!("Delta4*D2*theta^{}", 2 * k - 11),
    };
    // the structured form goes through the two-sided formula, so its central
    // zero is computed rather than built in
    let g_emb = EmbeddedForm {
        sign: None,
        ..EmbeddedForm::from_vector(&g, bits, g_label)
    };
    let embedded: Vec<EmbeddedForm> = forms.iter().map(EmbeddedForm::from_eigenform).collect();
    let center = Rat::new((2 * k as i64 + 1).into(), 4.into());
    let cutoff = Real::pow2(-((bits / 2) as i64), bits);

    let points: Result<Vec<TheoremPoint>> = grid
        .par_iter()
        .map(|sigma| {
            let s = rat_to_complex(sigma, bits);
            let mut all: Vec<&EmbeddedForm> = vec![&g_emb];
            all.extend(embedded.iter());
            let mut values = lstar_many(&all, &s, 0)?;
            let value = values.remove(0);
            let expected = match sign {
                FrickeSign::Plus => ScanSign::Positive,
                FrickeSign::Minus if sigma > &center => ScanSign::Positive,
                FrickeSign::Minus if sigma < &center => ScanSign::Negative,
                FrickeSign::Minus => ScanSign::Zero,
            };
            let mut witness: Option<(usize, LValue, Real)> = None;
            for (i, (v, c)) in values.into_iter().zip(&coefficients).enumerate() {
                if c.abs() <= cutoff || v.definite_sign() == ScanSign::Zero {
                    continue;
                }
                let weight = (&v.value * &Complex::from_real(c.clone())).abs();
                if witness.as_ref().is_none_or(|(_, _, w)| &weight > w) {
                    witness = Some((i, v, weight));
                }
            }
            Ok(TheoremPoint {
                sigma: sigma.clone(),
                sign: value.definite_sign(),
                value,
                expected,
                witness: witness.map(|(i, v, _)| (i, v)),
            })
        })
        .collect();
    Ok(TheoremRun {
        k,
        sign,
        prec: space.prec(),
        coefficients,
        points: points?,
    })
}

pub const CENTRAL_ZERO_TOLERANCE: f64 = 1e-20;

/// Sign pattern, witnesses and (for the minus space) the central zero.
pub fn theorem_checks(run: &TheoremRun, start: Instant) -> Vec<CheckResult> {
    let (prefix, anchor) = match run.sign {
        FrickeSign::Plus => ("theorem-plus", "theorem-plus"),
        FrickeSign::Minus => ("theorem-minus", "theorem-minus"),
    };
    let k = run.k;
    let off_center: Vec<&TheoremPoint> = run.points.iter().filter(|p| p.expected != ScanSign::Zero).collect();
    let sign_failures = count(off_center.iter().map(|p| p.sign == p.expected));
    let witness_failures = count(off_center.iter().map(|p| p.witness.is_some()));
    let lo = run.points.first().map(|p| p.sigma.to_string()).unwrap_or_default();
    let hi = run.points.last().map(|p| p.sigma.to_string()).unwrap_or_default();
    let grid = format!("sigma in [{lo}, {hi}], {} points", run.points.len());
    let mut witnesses: Vec<usize> = off_center
        .iter()
        .filter_map(|p| p.witness.as_ref().map(|w| w.0))
        .collect();
    witnesses.sort_unstable();
    witnesses.dedup();
    let claim = "checked at grid points only; the statement for every real sigma rests on integrand positivity";
    let mut out = vec![
        CheckResult::new(format!("{prefix}/k={k}/sign-pattern"), anchor, Scope::GridPoints)
            .measure(sign_failures, 0.0)
            .detail(format!("{grid}; {claim}"))
            .timed(start),
        CheckResult::new(format!("{prefix}/k={k}/eigenform-witness"), anchor, Scope::GridPoints)
            .measure(witness_failures, 0.0)
            .detail(format!("{grid}; witnesses used: {witnesses:?}"))
            .timed(start),
    ];
    if let Some(p) = run.points.iter().find(|p| p.expected == ScanSign::Zero) {
        let budget = p.value.error_bound().to_f64();
        out.push(
            CheckResult::new(format!("{prefix}/k={k}/central-zero"), "central-zero", Scope::Numeric)
                .measure(p.value.value.abs().to_f64(), budget.min(CENTRAL_ZERO_TOLERANCE))
                .detail(format!(
                    "forced zero at sigma = {}: with f|W4 = -f the two halves of the series cancel term by term; error budget {budget:.3e}",
                    p.sigma
                ))
                .timed(start),
        );
    }
    out
}

/// Plus-space theorem on the grid.
pub fn verify_theorem_i(k: u32, grid: &[Rat], bits: usize) -> Result<Vec<CheckResult>> {
    let start = Instant::now();
    let run = theorem_run(k, FrickeSign::Plus, grid, bits)?;
    Ok(theorem_checks(&run, start))
}

/// Minus-space theorem on the grid; the center `k/2 + 1/4` is checked as a
/// forced zero.
pub fn verify_theorem_ii(k: u32, grid: &[Rat], bits: usize) -> Result<Vec<CheckResult>> {
    let start = Instant::now();
    let run = theorem_run(k, FrickeSign::Minus, grid, bits)?;
    Ok(theorem_checks(&run, start))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Parameters {
    pub k_max: u32,
    pub bits: usize,
    pub prec: usize,
    pub eigen_primes: [u64; 3],
}

#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct Summary {
    pub pass: usize,
    pub fail: usize,
    pub skipped: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub artifact_version: String,
    pub parameters: Parameters,
    pub checks: Vec<CheckResult>,
    pub summary: Summary,
}

impl Report {
    pub fn new(parameters: Parameters, checks: Vec<CheckResult>) -> Report {
        let mut summary = Summary::default();
        for c in &checks {
            match c.status {
                Status::Pass => summary.pass += 1,
                Status::Fail => summary.fail += 1,
                Status::Skipped => summary.skipped += 1,
            }
        }
        Report {
            schema_version: SCHEMA_VERSION,
            artifact_version: env!("CARGO_PKG_VERSION").to_string(),
            parameters,
            checks,
            summary,
        }
    }

    pub fn all_passed(&self) -> bool {
        self.summary.fail == 0
    }

    /// Sets every timing to zero, making the document byte-reproducible.
    pub fn without_timings(mut self) -> Report {
        for c in &mut self.checks {
            c.seconds = 0.0;
        }
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn theorem_or_fail(result: Result<Vec<CheckResult>>, id: String, anchor: &str) -> Vec<CheckResult> {
    result.unwrap_or_else(|e| vec![CheckResult::new(id, anchor, Scope::GridPoints).failed(&e)])
}

/// All suites for `4 <= k <= k_max`.
pub fn full_report(k_max: u32, bits: usize, prec: usize) -> Report {
    let mut checks = verify_identities(prec, bits);
    for k in 4..=k_max {
        checks.extend(verify_hecke(k, bits));
    }
    for k in 4..=k_max {
        checks.extend(verify_functional_equation(k, bits));
    }
    if k_max >= 4 {
        match eigenforms(4, FrickeSign::Plus, 0, bits) {
            Ok(f) => checks.extend(verify_dual_method(&EmbeddedForm::from_eigenform(&f[0]), 4, "f1", bits)),
            Err(e) => checks.push(CheckResult::new("dual-method/f1", "mellin-identity", Scope::Numeric).failed(&e)),
        }
    }
    if k_max >= 6 {
        match eigenforms(6, FrickeSign::Minus, 0, bits) {
            Ok(f) => checks.extend(verify_dual_method(&EmbeddedForm::from_eigenform(&f[0]), 6, "f2", bits)),
            Err(e) => checks.push(CheckResult::new("dual-method/f2", "mellin-identity", Scope::Numeric).failed(&e)),
        }
    }
    if k_max < 4 {
        checks.push(CheckResult::new("theorem-plus", "theorem-plus", Scope::GridPoints).skipped("spaces trivial"));
    }
    for k in 4..=k_max {
        checks.extend(theorem_or_fail(
            verify_theorem_i(k, &default_sigma_grid(k), bits),
            format!("theorem-plus/k={k}"),
            "theorem-plus",
        ));
    }
    if k_max < 6 {
        checks.push(CheckResult::new("theorem-minus", "theorem-minus", Scope::GridPoints).skipped("spaces trivial"));
    }
    for k in 6..=k_max {
        checks.extend(theorem_or_fail(
            verify_theorem_ii(k, &default_sigma_grid(k), bits),
            format!("theorem-minus/k={k}"),
            "theorem-minus",
        ));
    }
    Report::new(
        Parameters {
            k_max,
            bits,
            prec,
            eigen_primes: EIGEN_PRIMES,
        },
        checks,
    )
}

/// Whether a rational is an integer multiple of 1/4 (the default grid spacing).
pub fn on_quarter_grid(x: &Rat) -> bool {
    (x * Rat::from_integer(4.into())).is_integer() && !x.is_zero() || x.is_zero()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn anchors_are_registered() {
        let report = Report::new(
            Parameters {
                k_max: 0,
                bits: 128,
                prec: 300,
                eigen_primes: EIGEN_PRIMES,
            },
            verify_identities(300, 128),
        );
        for c in &report.checks {
            assert!(anchor_known(&c.paper_anchor), "{}", c.paper_anchor);
            assert!(c.passed(), "{} failed: {}", c.check_id, c.detail);
        }
        assert_eq!(report.summary.fail, 0);
    }

    #[test]
    fn grids() {
        let g = log_grid(0.05, 50.0, 200);
        assert_eq!(g.len(), 200);
        assert!((g[0] - 0.05).abs() < 1e-15 && (g[199] - 50.0).abs() < 1e-12);
        let s = default_sigma_grid(4);
        assert_eq!(s.len(), 37);
        assert_eq!(s[0], Rat::from_integer((-2).into()));
        assert_eq!(s[36], Rat::from_integer(7.into()));
    }

    #[test]
    fn theorem_domains() {
        assert!(matches!(verify_theorem_i(3, &[], 128), Err(Error::Domain(_))));
        assert!(matches!(verify_theorem_ii(5, &[], 128), Err(Error::Domain(_))));
    }

    #[test]
    fn small_weight_theorems() {
        let grid = default_sigma_grid(4);
        let checks = verify_theorem_i(4, &grid, 128).unwrap();
        assert!(checks.iter().all(CheckResult::passed), "{checks:?}");
        let checks = verify_theorem_ii(6, &default_sigma_grid(6), 128).unwrap();
        assert_eq!(checks.len(), 3);
        assert!(checks.iter().all(CheckResult::passed), "{checks:?}");
    }

    #[test]
    fn trivial_report() {
        let r = full_report(3, 128, 300);
        assert!(r.all_passed());
        assert!(r
            .checks
            .iter()
            .any(|c| c.check_id == "theorem-plus" && c.status == Status::Skipped));
        let json: serde_json::Value = serde_json::from_str(&r.without_timings().to_json()).unwrap();
        assert_eq!(json["schema_version"], 1);
        assert_eq!(json["parameters"]["k_max"], 3);
        assert!(json["checks"].as_array().unwrap().iter().all(|c| c["seconds"] == 0.0));
    }
}
