//! Working precision and the elementary functions every numeric module uses.
//!
//! All arithmetic runs on MPFR floats. A [`PrecisionContext`] fixes the
//! number of decimal digits and is passed explicitly to every evaluation;
//! nothing reads an ambient precision.

use std::fmt;

use rug::float::Constant;
use rug::ops::Pow;
use rug::{Float, Rational};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Arbitrary precision real. Its precision travels with the value.
pub type Real = Float;

const BITS_PER_DIGIT: f64 = std::f64::consts::LOG2_10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PrecisionContext {
    digits: u32,
}

impl Default for PrecisionContext {
    fn default() -> Self {
        PrecisionContext {
            digits: Self::DEFAULT_DIGITS,
        }
    }
}

impl PrecisionContext {
    pub const DEFAULT_DIGITS: u32 = 50;
    pub const MIN_DIGITS: u32 = 15;
    /// Sanity ceiling; MPFR would go further but nothing here needs it.
    pub const MAX_DIGITS: u32 = 5000;

    pub fn new(digits: u32) -> Result<Self> {
        if !(Self::MIN_DIGITS..=Self::MAX_DIGITS).contains(&digits) {
            return Err(Error::Precision(format!(
                "digits must lie in [{}, {}], got {digits}",
                Self::MIN_DIGITS,
                Self::MAX_DIGITS
            )));
        }
        Ok(PrecisionContext { digits })
    }

    pub fn digits(&self) -> u32 {
        self.digits
    }

    /// Binary precision: the decimal digits plus eight guard bits.
    pub fn bits(&self) -> u32 {
        (f64::from(self.digits) * BITS_PER_DIGIT).ceil() as u32 + 8
    }

    /// A context carrying `extra` more decimal digits.
    pub fn with_extra_digits(&self, extra: u32) -> Self {
        PrecisionContext {
            digits: (self.digits + extra).min(Self::MAX_DIGITS),
        }
    }

    /// A context with exactly `digits`, clamped to the admissible range.
    pub fn with_digits(digits: u32) -> Self {
        PrecisionContext {
            digits: digits.clamp(Self::MIN_DIGITS, Self::MAX_DIGITS),
        }
    }

    pub fn real<T>(&self, value: T) -> Real
    where
        Float: rug::Assign<T>,
    {
        Float::with_val(self.bits(), value)
    }

    pub fn zero(&self) -> Real {
        self.real(0)
    }

    pub fn one(&self) -> Real {
        self.real(1)
    }

    pub fn pi(&self) -> Real {
        self.real(Constant::Pi)
    }

    pub fn euler_gamma(&self) -> Real {
        self.real(Constant::Euler)
    }

    pub fn from_rational(&self, q: &Rational) -> Real {
        self.real(q)
    }

    /// `n!` at this precision.
    pub fn factorial(&self, n: u32) -> Real {
        self.real(&rug::Integer::from(rug::Integer::factorial(n)))
    }

    /// `10^e` at this precision.
    pub fn pow10(&self, e: i32) -> Real {
        self.real(10).pow(e)
    }

    /// `10^{-digits}`.
    pub fn epsilon(&self) -> Real {
        self.pow10(-(self.digits as i32))
    }

    /// Re-rounds `x` to this context's precision.
    pub fn round(&self, x: &Real) -> Real {
        self.real(x)
    }

    pub fn parse(&self, s: &str) -> Result<Real> {
        let parsed = Float::parse(s.trim())
            .map_err(|e| Error::domain("parse", format!("{s:?}: {e}")))?;
        finite("parse", self.real(parsed))
    }

    pub fn exp(&self, x: &Real) -> Result<Real> {
        elem(self, Elementary::Exp, &[x])
    }

    pub fn ln(&self, x: &Real) -> Result<Real> {
        elem(self, Elementary::Ln, &[x])
    }

    pub fn sin(&self, x: &Real) -> Result<Real> {
        elem(self, Elementary::Sin, &[x])
    }

    pub fn cos(&self, x: &Real) -> Result<Real> {
        elem(self, Elementary::Cos, &[x])
    }

    pub fn coth(&self, x: &Real) -> Result<Real> {
        elem(self, Elementary::Coth, &[x])
    }

    pub fn pow(&self, x: &Real, alpha: &Real) -> Result<Real> {
        elem(self, Elementary::Pow, &[x, alpha])
    }

    /// `e^x − 1` without cancellation near zero.
    pub fn exp_m1(&self, x: &Real) -> Result<Real> {
        finite("exp_m1", self.real(x).exp_m1())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Elementary {
    Exp,
    Ln,
    Sin,
    Cos,
    Coth,
    Pow,
}

impl fmt::Display for Elementary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Elementary {
    fn name(self) -> &'static str {
        match self {
            Elementary::Exp => "exp",
            Elementary::Ln => "ln",
            Elementary::Sin => "sin",
            Elementary::Cos => "cos",
            Elementary::Coth => "coth",
            Elementary::Pow => "pow",
        }
    }

    fn arity(self) -> usize {
        match self {
            Elementary::Pow => 2,
            _ => 1,
        }
    }
}

/// Evaluates an elementary function at `ctx` precision.
///
/// MPFR rounds each of these correctly; the only composite is `coth`, built
/// as `2/(1 − e^{−2v}) − 1` with `1 − e^{−2v}` taken from `expm1` so that
/// neither large nor small `|v|` cancels.
pub fn elem(ctx: &PrecisionContext, which: Elementary, args: &[&Real]) -> Result<Real> {
    let name = which.name();
    if args.len() != which.arity() {
        return Err(Error::domain(
            name,
            format!("expected {} argument(s), got {}", which.arity(), args.len()),
        ));
    }
    for a in args {
        if !a.is_finite() {
            return Err(Error::domain(name, format!("non-finite argument {a}")));
        }
    }
    let x = args[0];
    let out = match which {
        Elementary::Exp => ctx.real(x).exp(),
        Elementary::Sin => ctx.real(x).sin(),
        Elementary::Cos => ctx.real(x).cos(),
        Elementary::Ln => {
            if *x <= 0 {
                return Err(Error::domain(name, format!("argument {} is not > 0", short(x))));
            }
            ctx.real(x).ln()
        }
        Elementary::Coth => {
            if x.is_zero() {
                return Err(Error::domain(name, "argument is 0"));
            }
            let work = ctx.with_extra_digits(5);
            let v = work.real(&*x.as_abs());
            // 1 − e^{−2v} = −expm1(−2v)
            let denom = -work.real(-(v * 2u32)).exp_m1();
            let mut c = work.real(2) / denom - 1u32;
            if *x < 0 {
                c = -c;
            }
            ctx.real(&c)
        }
        Elementary::Pow => {
            if *x <= 0 {
                return Err(Error::domain(name, format!("base {} is not > 0", short(x))));
            }
            ctx.real(x).pow(args[1])
        }
    };
    finite(name, out)
}

/// Rejects infinities and NaN.
pub fn finite(func: &'static str, x: Real) -> Result<Real> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::domain(func, format!("non-finite result {x}")))
    }
}

/// `log10(a / b)` from the binary exponents; good to a fraction of a digit.
/// Returns `f64::INFINITY` when `b` is zero and `a` is not.
pub fn digits_between(a: &Real, b: &Real) -> f64 {
    match (a.is_zero(), b.is_zero()) {
        (true, _) => 0.0,
        (false, true) => f64::INFINITY,
        _ => {
            let ea = a.get_exp().unwrap_or(0) as f64;
            let eb = b.get_exp().unwrap_or(0) as f64;
            (ea - eb) * std::f64::consts::LOG10_2
        }
    }
}

/// Runs `eval` at increasing precision until the cancellation it reports
/// fits inside the guard digits, then rounds the value back to `ctx`.
///
/// `eval` returns `(value, scale)` where `scale` is the largest magnitude
/// among the summands that produced `value`.
pub fn with_cancellation_guard<F>(ctx: &PrecisionContext, mut eval: F) -> Result<Real>
where
    F: FnMut(&PrecisionContext) -> Result<(Real, Real)>,
{
    let cap = 4 * ctx.digits() + 400;
    let mut guard = 12u32;
    loop {
        let work = ctx.with_extra_digits(guard);
        let (value, scale) = eval(&work)?;
        let lost = digits_between(&scale, &value).max(0.0);
        if lost.is_finite() && lost + 4.0 <= f64::from(guard) {
            return Ok(ctx.round(&value));
        }
        if guard >= cap {
            // Either an exact zero or cancellation beyond any sane guard.
            return Ok(ctx.round(&value));
        }
        let want = if lost.is_finite() {
            lost.ceil() as u32 + 12
        } else {
            guard * 2
        };
        guard = want.max(guard + 8).min(cap);
    }
}

/// Scientific notation with `sig` significant digits, e.g. `1.250e-3`.
pub fn format_sci(x: &Real, sig: usize) -> String {
    let sig = sig.max(1);
    if x.is_zero() {
        let frac = "0".repeat(sig - 1);
        return if sig > 1 { format!("0.{frac}e0") } else { "0e0".to_string() };
    }
    let (neg, digits, exp) = x.to_sign_string_exp(10, Some(sig));
    let exp = exp.unwrap_or(0) - 1;
    let sign = if neg { "-" } else { "" };
    let (head, tail) = digits.split_at(1);
    if tail.is_empty() {
        format!("{sign}{head}e{exp}")
    } else {
        format!("{sign}{head}.{tail}e{exp}")
    }
}

fn short(x: &Real) -> String {
    format_sci(x, 8)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> PrecisionContext {
        PrecisionContext::default()
    }

    #[test]
    fn rejects_low_precision() {
        assert!(PrecisionContext::new(14).is_err());
        assert!(PrecisionContext::new(15).is_ok());
    }

    #[test]
    fn ln_of_one_is_zero() {
        let c = ctx();
        assert!(c.ln(&c.one()).unwrap().is_zero());
    }

    #[test]
    fn domain_errors_name_the_function() {
        let c = ctx();
        match c.ln(&c.real(-1)) {
            Err(Error::Domain { func, .. }) => assert_eq!(func, "ln"),
            other => panic!("{other:?}"),
        }
        assert!(matches!(c.coth(&c.zero()), Err(Error::Domain { func: "coth", .. })));
        assert!(matches!(
            c.pow(&c.zero(), &c.real(2)),
            Err(Error::Domain { func: "pow", .. })
        ));
    }

    #[test]
    fn coth_one_matches_exponential_ratio() {
        let c = ctx();
        // (e^2 + 1)/(e^2 − 1) computed at twice the precision
        let hi = PrecisionContext::new(100).unwrap();
        let e2 = hi.real(2).exp();
        let oracle = (e2.clone() + 1u32) / (e2 - 1u32);
        let got = c.coth(&c.one()).unwrap();
        let diff = Float::with_val(hi.bits(), &got - &oracle).abs();
        assert!(diff < c.pow10(-48), "{diff}");
        assert!(format_sci(&got, 15).starts_with("1.31303528549933"));
    }

    #[test]
    fn coth_large_argument_tends_to_one() {
        let c = ctx();
        let v = c.coth(&c.real(200)).unwrap();
        assert_eq!(v, 1);
        let v = c.coth(&c.real(-3)).unwrap() + c.coth(&c.real(3)).unwrap();
        assert!(v.is_zero());
    }

    #[test]
    fn coth_minus_one_is_bracketed() {
        // coth v − 1 = 2e^{−2v}/(1 − e^{−2v}) exactly, so the upper side holds
        // only up to rounding
        let c = ctx();
        let slack = c.one() + c.pow10(-45);
        for v in [1e-6, 1e-2, 0.3, 1.0, 7.0, 40.0] {
            let v = c.real(v);
            let excess = c.coth(&v).unwrap() - 1u32;
            let e = c.exp(&c.real(-(v.clone() * 2u32))).unwrap();
            let bound = e.clone() * 2u32 / (c.one() - e);
            assert!(excess > 0, "v={v}");
            assert!(excess <= bound * &slack, "v={v}");
        }
    }

    #[test]
    fn refinement_is_monotone() {
        let lo = ctx();
        let hi = lo.with_extra_digits(20);
        for x in [0.1, 2.5, 30.0] {
            let a = lo.coth(&lo.real(x)).unwrap();
            let b = hi.coth(&hi.real(x)).unwrap();
            let rel = Float::with_val(hi.bits(), (a - &b) / b).abs();
            assert!(rel < lo.pow10(-45));
        }
    }

    #[test]
    fn guard_recovers_cancelled_digits() {
        let c = ctx();
        // (1 + 1e-40) − 1 at 50 digits keeps only ~10 digits without a guard
        let v = with_cancellation_guard(&c, |w| {
            let tiny = w.pow10(-40);
            let a = w.one() + &tiny;
            let d = a.clone() - 1u32;
            Ok((d, a))
        })
        .unwrap();
        let rel = (v - c.pow10(-40)) / c.pow10(-40);
        assert!(rel.abs() < c.pow10(-45));
    }

    #[test]
    fn sci_format_is_stable() {
        let c = ctx();
        assert_eq!(format_sci(&c.real(0.00125), 4), "1.250e-3");
        assert_eq!(format_sci(&c.zero(), 3), "0.00e0");
        assert_eq!(format_sci(&c.real(-20), 2), "-2.0e1");
        assert_eq!(format_sci(&c.real(1), 1), "1e0");
    }
}
