use std::fmt;

use halfweight::arith::is_odd_prime;
use halfweight::error::Error;
use halfweight::forms::{
    cusp_dimension_formula, cusp_space, d2, delta4, delta4_product, eigen_space, f2, minus_form, monomial_series,
    monomial_space, plus_form, quasi_eisenstein_p, theta, FormSpace, FrickeSign, RingElement, SpaceKind, Weight,
};
use halfweight::hecke::{eigen_decompose, hecke_space, t_p2_matrix, Eigenform, HeckeMatrix};
use halfweight::lfunction::{lstar_many, lstar_quadrature, scan_real, sign_changes, EmbeddedForm, LValue};
use halfweight::mp::parse_complex;
use halfweight::qseries::{parse_rational, Series};
use halfweight::verify::{self, Status, EIGEN_PRIMES, SCHEMA_VERSION};
use num_traits::Zero;
use serde_json::{json, Value};

use crate::render;
use crate::Format;

pub struct Context {
    pub bits: usize,
    pub prec: Option<usize>,
}

pub struct Outcome {
    pub body: String,
    /// A check carried out by the command did not hold.
    pub failed: bool,
    /// Printed on stderr.
    pub note: Option<String>,
}

impl Outcome {
    fn ok(body: String) -> Outcome {
        Outcome {
            body,
            failed: false,
            note: None,
        }
    }

    /// CSV output carries no comment lines, so the effective settings go to stderr.
    fn with_format_note(mut self, format: Format, bits: usize, prec: usize) -> Outcome {
        if format == Format::Csv {
            self.note = Some(render::echo(bits, prec));
        }
        self
    }
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Lib(Error),
}

impl CliError {
    /// 2 for bad input, 1 when a computation could not be completed.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Lib(Error::Domain(_) | Error::Pole(_) | Error::InsufficientPrecision { .. }) => 2,
            CliError::Lib(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Lib(e @ Error::InsufficientPrecision { needed, .. }) => {
                write!(f, "{e}; rerun with --prec {} or without --prec", needed + 8)
            }
            CliError::Lib(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

type Res<T> = Result<T, CliError>;

fn json_body(v: Value) -> String {
    let mut s = serde_json::to_string_pretty(&v).expect("json value serializes");
    s.push('\n');
    s
}

/// Runs `attempt` at the explicit precision, or from `start` upwards as long as
/// it reports a larger requirement.
fn provision<T>(
    explicit: Option<usize>,
    start: usize,
    mut attempt: impl FnMut(usize) -> halfweight::Result<T>,
) -> Res<T> {
    if let Some(p) = explicit {
        return Ok(attempt(p)?);
    }
    let mut p = start;
    for _ in 0..8 {
        match attempt(p) {
            Err(Error::InsufficientPrecision { needed, .. }) if needed > p => p = needed + 8,
            r => return Ok(r?),
        }
    }
    Ok(attempt(p)?)
}

fn parse_call<'a>(spec: &'a str, name: &str) -> Option<Vec<&'a str>> {
    let inner = spec.strip_prefix(name)?.trim().strip_prefix('(')?.strip_suffix(')')?;
    Some(inner.split(',').map(str::trim).collect())
}

fn parse_u32(s: &str, what: &str) -> Res<u32> {
    s.parse()
        .map_err(|_| CliError::Usage(format!("{what}: expected a non-negative integer, got {s:?}")))
}

type Generator = (&'static str, Weight, fn(usize) -> Series);

/// The series named by `spec`, with its weight.
fn named_form(spec: &str, n: usize) -> Res<(String, Weight, Series)> {
    let plain: Option<Generator> = match spec.to_ascii_lowercase().as_str() {
        "theta" => Some(("theta", Weight::from_twice(1), theta)),
        "p" => Some(("P", Weight::integral(2), quasi_eisenstein_p)),
        "f2" => Some(("F2", Weight::integral(2), f2)),
        "delta4" => Some(("Delta4", Weight::integral(4), delta4)),
        "delta4_product" => Some(("Delta4_product", Weight::integral(4), delta4_product)),
        "d2" => Some(("D2", Weight::integral(2), d2)),
        _ => None,
    };
    if let Some((name, w, build)) = plain {
        return Ok((name.to_string(), w, build(n)));
    }
    if let Some(args) = parse_call(spec, "plus_form") {
        let [k] = args[..] else {
            return Err(CliError::Usage("plus_form takes one argument k".into()));
        };
        let f = plus_form(parse_u32(k, "plus_form")?, n)?;
        return Ok((spec.to_string(), f.ring.weight(), f.series));
    }
    if let Some(args) = parse_call(spec, "minus_form") {
        let [k] = args[..] else {
            return Err(CliError::Usage("minus_form takes one argument k".into()));
        };
        let f = minus_form(parse_u32(k, "minus_form")?, n)?;
        return Ok((spec.to_string(), f.ring.weight(), f.series));
    }
    if let Some(args) = parse_call(spec, "monomial") {
        let [a, b] = args[..] else {
            return Err(CliError::Usage("monomial takes two arguments a,b".into()));
        };
        let (a, b) = (parse_u32(a, "monomial")?, parse_u32(b, "monomial")?);
        return Ok((
            spec.to_string(),
            Weight::from_twice(a + 4 * b),
            monomial_series(a, b, n),
        ));
    }
    Err(CliError::Usage(format!(
        "unknown form {spec:?}; expected theta, P, F2, Delta4, Delta4_product, D2, plus_form(k), minus_form(k) or monomial(a,b)"
    )))
}

pub fn expand(ctx: &Context, spec: &str, n_terms: Option<usize>, format: Format) -> Res<Outcome> {
    let n = n_terms.or(ctx.prec).unwrap_or(20);
    let (name, weight, series) = named_form(spec, n)?;
    let coeffs: Vec<String> = series.coeffs().iter().map(render::rat).collect();
    let body = match format {
        Format::Text => format!("{}\n{}\n", render::echo(ctx.bits, n), coeffs.join(",")),
        Format::Csv => {
            let mut s = String::from("n,coefficient\n");
            for (i, c) in coeffs.iter().enumerate() {
                s.push_str(&format!("{i},{c}\n"));
            }
            s
        }
        Format::Json => json_body(json!({
            "schema_version": SCHEMA_VERSION,
            "command": "expand",
            "form": name,
            "weight": weight.to_string(),
            "bits": ctx.bits,
            "prec": n,
            "coefficients": coeffs,
        })),
    };
    Ok(Outcome::ok(body).with_format_note(format, ctx.bits, n))
}

pub fn basis(ctx: &Context, k: u32, kind: SpaceKind, format: Format) -> Res<Outcome> {
    let weight = Weight::half_integral(k);
    let space: FormSpace = provision(ctx.prec, k as usize + 12, |p| match kind {
        SpaceKind::Full => monomial_space(weight, p),
        SpaceKind::Cusp => cusp_space(k, p),
        SpaceKind::Plus => eigen_space(k, FrickeSign::Plus, p),
        SpaceKind::Minus => eigen_space(k, FrickeSign::Minus, p),
    })?;
    let monomials = RingElement::monomial_basis(weight);
    let vectors: Vec<Value> = space
        .basis()
        .iter()
        .zip(space.pivots())
        .map(|(v, pivot)| {
            let coords: Vec<Value> = monomials
                .iter()
                .zip(v.ring.coordinates())
                .filter(|(_, c)| !c.is_zero())
                .map(|(&(a, b), c)| json!({"theta": a, "f2": b, "coefficient": render::rat(&c)}))
                .collect();
            json!({
                "pivot": pivot,
                "ring": v.ring.to_string(),
                "monomial_coordinates": coords,
                "coefficients": v.series.coeffs().iter().map(render::rat).collect::<Vec<_>>(),
            })
        })
        .collect();
    let formula = (kind == SpaceKind::Cusp).then(|| cusp_dimension_formula(k));
    let body = match format {
        Format::Text => {
            let mut s = format!(
                "{}\nspace: {kind}, weight {weight}, dim {}\n",
                render::echo(ctx.bits, space.prec()),
                space.dim()
            );
            if let Some(d) = formula {
                s.push_str(&format!("dimension formula: {d}\n"));
            }
            for (i, v) in space.basis().iter().enumerate() {
                let coeffs: Vec<String> = v.series.coeffs().iter().map(render::rat).collect();
                s.push_str(&format!(
                    "[{i}] pivot q^{}: {}\n    {}\n",
                    space.pivots()[i],
                    v.ring,
                    coeffs.join(",")
                ));
            }
            s
        }
        Format::Csv => {
            let mut s = String::from("vector,pivot,n,coefficient\n");
            for (i, v) in space.basis().iter().enumerate() {
                for (n, c) in v.series.coeffs().iter().enumerate() {
                    s.push_str(&format!("{i},{},{n},{}\n", space.pivots()[i], render::rat(c)));
                }
            }
            s
        }
        Format::Json => json_body(json!({
            "schema_version": SCHEMA_VERSION,
            "command": "basis",
            "k": k,
            "kind": kind.name(),
            "weight": weight.to_string(),
            "bits": ctx.bits,
            "prec": space.prec(),
            "dim": space.dim(),
            "dimension_formula": formula,
            "basis": vectors,
        })),
    };
    Ok(Outcome::ok(body).with_format_note(format, ctx.bits, space.prec()))
}

fn parse_primes(s: &str) -> Res<Vec<u64>> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim) {
        let p: u64 = part
            .parse()
            .map_err(|_| CliError::Usage(format!("primes: expected a comma-separated list, got {s:?}")))?;
        if !is_odd_prime(p) {
            return Err(CliError::Usage(format!("primes: {p} is not an odd prime")));
        }
        if !out.contains(&p) {
            out.push(p);
        }
    }
    Ok(out)
}

fn eigenvalue_strings(e: &Eigenform, bits: usize) -> serde_json::Map<String, Value> {
    e.eigenvalues
        .iter()
        .map(|(p, x)| {
            let v = match e.exact_eigenvalues.get(p) {
                Some(q) => render::rat(q),
                None => render::real(x, bits),
            };
            (p.to_string(), Value::String(v))
        })
        .collect()
}

fn eigen_coefficients(e: &Eigenform, space: &FormSpace, terms: usize, bits: usize) -> Vec<String> {
    let n = terms.min(e.coeffs.len());
    match &e.exact_coords {
        Some(c) => space.combination(c).series.coeffs()[..n]
            .iter()
            .map(render::rat)
            .collect(),
        None => e.coeffs[..n].iter().map(|x| render::real(x, bits)).collect(),
    }
}

pub fn hecke(ctx: &Context, k: u32, sign: FrickeSign, primes: &str, terms: usize, format: Format) -> Res<Outcome> {
    let primes = parse_primes(primes)?;
    let space = hecke_space(k, Some(sign), &primes, ctx.prec.unwrap_or(0))?;
    let (mats, forms): (Vec<HeckeMatrix>, Vec<Eigenform>) = if space.dim() == 0 {
        (Vec::new(), Vec::new())
    } else {
        let mats = primes
            .iter()
            .map(|&p| t_p2_matrix(&space, p))
            .collect::<halfweight::Result<Vec<_>>>()?;
        (mats, eigen_decompose(&space, &primes, ctx.bits)?)
    };
    let commute = mats
        .iter()
        .enumerate()
        .all(|(i, a)| mats[i + 1..].iter().all(|b| a.commutes_with(b)));
    let bits = ctx.bits;
    let body = match format {
        Format::Text => {
            let mut s = format!(
                "{}\nspace: {}, weight {}, dim {}\n",
                render::echo(bits, space.prec()),
                space.kind(),
                space.weight(),
                space.dim()
            );
            if space.dim() == 0 {
                s.push_str("the space is trivial\n");
            }
            for m in &mats {
                s.push_str(&format!("T({}^2):\n", m.p));
                for row in m.entries.to_rows() {
                    let row: Vec<String> = row.iter().map(render::rat).collect();
                    s.push_str(&format!("  [{}]\n", row.join(", ")));
                }
                s.push_str(&format!("  charpoly: {}\n", render::poly(&m.entries.charpoly())));
            }
            if mats.len() > 1 {
                s.push_str(&format!("commute: {}\n", if commute { "yes" } else { "no" }));
            }
            for e in &forms {
                s.push_str(&format!(
                    "eigenform {}{}\n",
                    e.id(),
                    if e.is_exact() { " (rational)" } else { "" }
                ));
                for (p, v) in eigenvalue_strings(e, bits) {
                    s.push_str(&format!("  lambda_{p} = {}\n", v.as_str().unwrap_or_default()));
                }
                s.push_str(&format!("  {}\n", eigen_coefficients(e, &space, terms, bits).join(",")));
            }
            s
        }
        Format::Csv => {
            let mut s = String::from("eigenform,prime,eigenvalue\n");
            for e in &forms {
                for (p, v) in eigenvalue_strings(e, bits) {
                    s.push_str(&format!("{},{p},{}\n", e.index, v.as_str().unwrap_or_default()));
                }
            }
            s
        }
        Format::Json => json_body(json!({
            "schema_version": SCHEMA_VERSION,
            "command": "hecke",
            "k": k,
            "sign": sign.symbol(),
            "weight": space.weight().to_string(),
            "bits": bits,
            "prec": space.prec(),
            "dim": space.dim(),
            "primes": primes,
            "matrices": mats.iter().map(|m| json!({
                "p": m.p,
                "entries": m.entries.to_rows().iter().map(|r| r.iter().map(render::rat).collect::<Vec<_>>()).collect::<Vec<_>>(),
                "charpoly": m.entries.charpoly().coeffs().iter().map(render::rat).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
            "commute": commute,
            "eigenforms": forms.iter().map(|e| json!({
                "id": e.id(),
                "index": e.index,
                "exact": e.is_exact(),
                "eigenvalues": eigenvalue_strings(e, bits),
                "coefficients": eigen_coefficients(e, &space, terms, bits),
            })).collect::<Vec<_>>(),
        })),
    };
    Ok(Outcome {
        body,
        failed: !commute,
        note: None,
    }
    .with_format_note(format, bits, space.prec()))
}

/// The form a `lstar` or `scan` command talks about, at series precision `p`.
fn command_form(
    k: u32,
    sign: FrickeSign,
    eigen: Option<usize>,
    p: usize,
    bits: usize,
) -> halfweight::Result<EmbeddedForm> {
    match eigen {
        None => {
            let (g, label) = match sign {
                FrickeSign::Plus => (plus_form(k, p)?, format!("Delta4*theta^{}", 2 * k - 7)),
                FrickeSign::Minus => (minus_form(k, p)?, format!("Delta4*D2*theta^{}", 2 * k - 11)),
            };
            Ok(EmbeddedForm::from_vector(&g, bits, label))
        }
        Some(i) => {
            let space = hecke_space(k, Some(sign), &EIGEN_PRIMES, p)?;
            if space.dim() == 0 {
                return Err(Error::Domain(format!(
                    "the {} space of weight {k}+1/2 is trivial",
                    sign.symbol()
                )));
            }
            let forms = eigen_decompose(&space, &EIGEN_PRIMES, bits)?;
            let e = forms.get(i).ok_or_else(|| {
                Error::Domain(format!(
                    "eigenform index {i} out of range; the space has dimension {}",
                    forms.len()
                ))
            })?;
            Ok(EmbeddedForm::from_eigenform(e))
        }
    }
}

fn lvalue_json(v: &LValue, bits: usize) -> Value {
    json!({
        "value": render::complex(&v.value, bits),
        "error_bound": render::bound(&v.error_bound()),
        "tail_bound": render::bound(&v.tail_bound),
        "rounding_bound": render::bound(&v.rounding_bound),
        "terms_used": v.terms_used,
        "method": v.method.name(),
        "sign": v.definite_sign().symbol(),
    })
}

fn lvalue_text(v: &LValue, bits: usize) -> String {
    format!(
        "{}: {}\n  error_bound: {}\n  tail_bound: {}\n  rounding_bound: {}\n  terms_used: {}\n  sign: {}\n",
        v.method.name(),
        render::complex(&v.value, bits),
        render::bound(&v.error_bound()),
        render::bound(&v.tail_bound),
        render::bound(&v.rounding_bound),
        v.terms_used,
        v.definite_sign().symbol()
    )
}

const LSTAR_START_PREC: usize = 64;

pub fn lstar(
    ctx: &Context,
    k: u32,
    sign: FrickeSign,
    s: &str,
    eigen: Option<usize>,
    cross_check: bool,
    format: Format,
) -> Res<Outcome> {
    let bits = ctx.bits;
    let point = parse_complex(s, bits).ok_or_else(|| CliError::Usage(format!("cannot parse s = {s:?}")))?;
    let (form, value, quad) = provision(ctx.prec, LSTAR_START_PREC, |p| {
        let form = command_form(k, sign, eigen, p, bits)?;
        let value = lstar_many(&[&form], &point, 0)?.remove(0);
        let quad = if cross_check {
            Some(lstar_quadrature(&form, &point)?)
        } else {
            None
        };
        Ok((form, value, quad))
    })?;
    let comparison = quad.as_ref().map(|q| {
        let diff = (&value.value - &q.value).abs();
        let budget = value.error_bound() + q.error_bound();
        let agree = diff <= budget;
        (diff, budget, agree)
    });
    let prec = form.prec();
    let body = match format {
        Format::Text => {
            let mut out = format!(
                "{}\nform: {}\nweight: {}\ns: {}\n{}",
                render::echo(bits, prec),
                form.id,
                form.weight,
                render::complex(&point, bits),
                lvalue_text(&value, bits)
            );
            if let (Some(q), Some((diff, budget, agree))) = (&quad, &comparison) {
                out.push_str(&lvalue_text(q, bits));
                out.push_str(&format!(
                    "discrepancy: {}\ncombined_budget: {}\nagree: {}\n",
                    render::bound(diff),
                    render::bound(budget),
                    if *agree { "yes" } else { "no" }
                ));
            }
            out
        }
        Format::Csv => {
            let mut out = String::from("s,method,value,error_bound,tail_bound,rounding_bound,terms_used\n");
            for v in std::iter::once(&value).chain(&quad) {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    render::csv_field(&render::complex(&point, bits)),
                    v.method.name(),
                    render::csv_field(&render::complex(&v.value, bits)),
                    render::bound(&v.error_bound()),
                    render::bound(&v.tail_bound),
                    render::bound(&v.rounding_bound),
                    v.terms_used
                ));
            }
            out
        }
        Format::Json => json_body(json!({
            "schema_version": SCHEMA_VERSION,
            "command": "lstar",
            "form": form.id,
            "weight": form.weight.to_string(),
            "bits": bits,
            "prec": prec,
            "s": render::complex(&point, bits),
            "result": lvalue_json(&value, bits),
            "cross_check": quad.as_ref().zip(comparison.as_ref()).map(|(q, (diff, budget, agree))| json!({
                "quadrature": lvalue_json(q, bits),
                "discrepancy": render::bound(diff),
                "combined_budget": render::bound(budget),
                "agree": agree,
            })),
        })),
    };
    Ok(Outcome {
        body,
        failed: comparison.is_some_and(|c| !c.2),
        note: None,
    }
    .with_format_note(format, bits, prec))
}

pub fn scan(
    ctx: &Context,
    k: u32,
    sign: FrickeSign,
    range: [&String; 3],
    eigen: Option<usize>,
    format: Format,
) -> Res<Outcome> {
    let bits = ctx.bits;
    let [lo, hi, step] =
        range.map(|x| parse_rational(x).ok_or_else(|| CliError::Usage(format!("cannot parse {x:?} as a rational"))));
    let (lo, hi, step) = (lo?, hi?, step?);
    let (form, points) = provision(ctx.prec, LSTAR_START_PREC, |p| {
        let form = command_form(k, sign, eigen, p, bits)?;
        let points = scan_real(&form, form.sign, &lo, &hi, &step, bits)?;
        Ok((form, points))
    })?;
    let changes = sign_changes(&points);
    let prec = form.prec();
    let header = "sigma,lstar,sign,tail_bound\n";
    let rows = || {
        points
            .iter()
            .map(|p| {
                format!(
                    "{},{},{},{}\n",
                    render::rat(&p.sigma),
                    render::real(&p.value.value.re, bits),
                    p.sign.symbol(),
                    render::bound(&p.value.tail_bound)
                )
            })
            .collect::<String>()
    };
    let change_list: Vec<String> = changes
        .iter()
        .map(|(a, b)| format!("({}, {})", render::rat(a), render::rat(b)))
        .collect();
    let body = match format {
        Format::Csv => format!("{header}{}", rows()),
        Format::Text => format!(
            "{header}{}# form: {}; {} points; sign changes: {}\n{}\n",
            rows(),
            form.id,
            points.len(),
            if change_list.is_empty() {
                "none".to_string()
            } else {
                change_list.join(" ")
            },
            render::echo(bits, prec)
        ),
        Format::Json => json_body(json!({
            "schema_version": SCHEMA_VERSION,
            "command": "scan",
            "form": form.id,
            "weight": form.weight.to_string(),
            "bits": bits,
            "prec": prec,
            "points": points.iter().map(|p| json!({
                "sigma": render::rat(&p.sigma),
                "lstar": render::real(&p.value.value.re, bits),
                "sign": p.sign.symbol(),
                "tail_bound": render::bound(&p.value.tail_bound),
            })).collect::<Vec<_>>(),
            "summary": {
                "points": points.len(),
                "sign_changes": changes.iter().map(|(a, b)| json!([render::rat(a), render::rat(b)])).collect::<Vec<_>>(),
            },
        })),
    };
    Ok(Outcome::ok(body).with_format_note(format, bits, prec))
}

pub const VERIFY_DEFAULT_PREC: usize = 1000;

pub fn verify(ctx: &Context, k_max: u32, no_timings: bool, format: Format) -> Res<Outcome> {
    let prec = ctx.prec.unwrap_or(VERIFY_DEFAULT_PREC);
    let mut report = verify::full_report(k_max, ctx.bits, prec);
    if no_timings {
        report = report.without_timings();
    }
    let measured = |m: Option<f64>| m.map(|x| format!("{x:.3e}")).unwrap_or_else(|| "-".into());
    let status = |s: Status| match s {
        Status::Pass => "pass",
        Status::Fail => "fail",
        Status::Skipped => "skipped",
    };
    let body = match format {
        Format::Json => report.to_json() + "\n",
        Format::Csv => {
            let mut s = String::from("check_id,status,paper_anchor,measured,tolerance,seconds\n");
            for c in &report.checks {
                s.push_str(&format!(
                    "{},{},{},{},{:.3e},{:.3}\n",
                    render::csv_field(&c.check_id),
                    status(c.status),
                    c.paper_anchor,
                    measured(c.measured),
                    c.tolerance,
                    c.seconds
                ));
            }
            s
        }
        Format::Text => {
            let mut s = render::echo(ctx.bits, prec) + "\n";
            for c in &report.checks {
                s.push_str(&format!(
                    "{:<7} {} measured={} tolerance={:.3e}{}\n",
                    status(c.status),
                    c.check_id,
                    measured(c.measured),
                    c.tolerance,
                    if c.detail.is_empty() {
                        String::new()
                    } else {
                        format!(" ({})", c.detail)
                    }
                ));
            }
            s.push_str(&format!(
                "summary: {} pass, {} fail, {} skipped\n",
                report.summary.pass, report.summary.fail, report.summary.skipped
            ));
            s
        }
    };
    Ok(Outcome {
        body,
        failed: !report.all_passed(),
        note: None,
    }
    .with_format_note(format, ctx.bits, prec))
}
