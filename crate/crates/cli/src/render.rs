//! Fixed textual forms for numbers, so output is byte-stable.

use halfweight::linalg::QPoly;
use halfweight::mp::{Complex, Real};
use halfweight::qseries::Rat;
use num_traits::{One, Signed, Zero};

pub const BOUND_DIGITS: usize = 6;

/// Exact rational as `p/q`, or `p` for integers.
pub fn rat(x: &Rat) -> String {
    x.to_string()
}

/// Significant digits printed for a value computed at `bits`.
pub fn digits(bits: usize) -> usize {
    Real::decimal_digits(bits)
}

pub fn real(x: &Real, bits: usize) -> String {
    x.to_sci(digits(bits))
}

pub fn complex(x: &Complex, bits: usize) -> String {
    x.to_string_digits(digits(bits))
}

pub fn bound(x: &Real) -> String {
    x.to_sci(BOUND_DIGITS)
}

/// `x^2 - 3*x + 1/2`, highest degree first.
pub fn poly(p: &QPoly) -> String {
    let mut out = String::new();
    for (d, c) in p.coeffs().iter().enumerate().rev() {
        if c.is_zero() {
            continue;
        }
        let mag = c.abs();
        if out.is_empty() {
            if c.is_negative() {
                out.push('-');
            }
        } else {
            out.push_str(if c.is_negative() { " - " } else { " + " });
        }
        let var = match d {
            0 => String::new(),
            1 => "x".into(),
            _ => format!("x^{d}"),
        };
        match (mag.is_one(), var.is_empty()) {
            (true, false) => out.push_str(&var),
            (_, true) => out.push_str(&mag.to_string()),
            (false, false) => out.push_str(&format!("{mag}*{var}")),
        }
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

/// Quotes a CSV field when it contains a separator, quote or line break.
pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn echo(bits: usize, prec: usize) -> String {
    format!("# bits={bits} prec={prec}")
}
