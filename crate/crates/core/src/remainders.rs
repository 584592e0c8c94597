//! Remainders `R_n(t)` of the Stirling series for `ln Γ` and their
//! derivatives.
//!
//! `R_n(t) = (−1)^n [ln Γ(t) − (t−½) ln t + t − ½ ln 2π − Σ_{k=1}^{n} c_k t^{1−2k}]`
//! with `c_k = B_{2k}/(2k(2k−1))`. Each `R_n` is completely monotonic, so
//! `R_n ≥ 0`, `−R_n′ > 0` and `R_n″ ≥ 0`.
//!
//! Where the tail `Σ_{k>n}` converges it is summed directly. Otherwise the
//! defining difference is formed under a cancellation guard.

use rug::ops::Pow;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{bernoulli, bernoulli_even_table};
use crate::error::{Error, Result};
use crate::gammakit::{ln_gamma, polygamma, stirling_head, stirling_tail, stirling_tail_converges};
use crate::precision::{with_cancellation_guard, PrecisionContext, Real};

pub const MAX_ORDER: u32 = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RemainderSpec {
    pub n: u32,
    /// 0 for `R_n`, 1 for `−R_n′`, 2 for `R_n″`.
    pub deriv: u32,
}

impl RemainderSpec {
    pub fn new(n: u32, deriv: u32) -> Result<Self> {
        let s = RemainderSpec { n, deriv };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n > MAX_ORDER {
            return Err(Error::domain("remainder", format!("n must be <= {MAX_ORDER}, got {}", self.n)));
        }
        if self.deriv > 2 {
            return Err(Error::domain("remainder", format!("deriv must be 0, 1 or 2, got {}", self.deriv)));
        }
        Ok(())
    }

    pub fn eval(&self, ctx: &PrecisionContext, t: &Real) -> Result<Real> {
        self.validate()?;
        match self.deriv {
            0 => remainder(ctx, self.n, t),
            1 => remainder_d1(ctx, self.n, t),
            _ => remainder_d2(ctx, self.n, t),
        }
    }
}

/// `Σ_{k=1}^{n} c_k ⟨1−2k⟩_j t^{1−2k−j}` and the largest term magnitude.
fn head_sum(ctx: &PrecisionContext, n: u32, j: u32, t: &Real) -> (Real, Real) {
    let table = bernoulli_even_table(ctx.bits(), n as usize + 1);
    let mut sum = ctx.zero();
    let mut scale = ctx.zero();
    for k in 1..=n {
        let two_k = 2 * k;
        let mut term = ctx.real(&table[k as usize]) / (two_k * (two_k - 1));
        for i in 0..j {
            term *= -(i64::from(two_k) - 1 + i64::from(i));
        }
        term *= ctx.real(t.clone().pow(1 - two_k as i32 - j as i32));
        let a = ctx.real(&*term.as_abs());
        if a > scale {
            scale = a;
        }
        sum += term;
    }
    (sum, scale)
}

fn check(func: &'static str, n: u32, t: &Real) -> Result<()> {
    if n > MAX_ORDER {
        return Err(Error::domain(func, format!("n must be <= {MAX_ORDER}, got {n}")));
    }
    if !t.is_finite() || *t <= 0 {
        return Err(Error::domain(func, format!("t must be finite and > 0, got {}", t.to_f64())));
    }
    Ok(())
}

/// `ln Γ(t)`, taken through `Γ(t+3)` below `t = 1`.
fn ln_gamma_small_safe(ctx: &PrecisionContext, t: &Real) -> Result<Real> {
    if *t < 1 {
        let shifted = ln_gamma(ctx, &ctx.real(t + 3u32))?;
        let prod = t.clone() * ctx.real(t + 1u32) * ctx.real(t + 2u32);
        return Ok(shifted - ctx.ln(&ctx.real(prod))?);
    }
    ln_gamma(ctx, t)
}

/// `R_n^{(j)}(t)`.
pub fn remainder_deriv(ctx: &PrecisionContext, n: u32, j: u32, t: &Real) -> Result<Real> {
    check("remainder", n, t)?;
    let sign_flip = n % 2 == 1;
    let probe = ctx.with_extra_digits(12);
    if stirling_tail_converges(n, j, t.to_f64(), probe.digits()) {
        if let Some((sum, _)) = stirling_tail(&probe, n, j, &probe.real(t)) {
            let v = ctx.round(&sum);
            return Ok(if sign_flip { -v } else { v });
        }
    }
    let v = with_cancellation_guard(ctx, |w| {
        let tw = w.real(t);
        let full = if j == 0 {
            ln_gamma_small_safe(w, &tw)?
        } else {
            polygamma(w, j - 1, &tw)?
        };
        let head = stirling_head(w, j, &tw)?;
        let (partial, partial_scale) = head_sum(w, n, j, &tw);
        let scale = w
            .real(&*full.as_abs())
            .max(&w.real(&*head.as_abs()))
            .max(&partial_scale);
        Ok((full - head - partial, scale))
    })?;
    Ok(if sign_flip { -v } else { v })
}

/// `R_n(t)`.
pub fn remainder(ctx: &PrecisionContext, n: u32, t: &Real) -> Result<Real> {
    remainder_deriv(ctx, n, 0, t)
}

/// `−R_n′(t)`.
pub fn remainder_d1(ctx: &PrecisionContext, n: u32, t: &Real) -> Result<Real> {
    Ok(-remainder_deriv(ctx, n, 1, t)?)
}

/// `R_n″(t)`.
pub fn remainder_d2(ctx: &PrecisionContext, n: u32, t: &Real) -> Result<Real> {
    remainder_deriv(ctx, n, 2, t)
}

/// `φ(t) = ψ(t) − ln t + 1/(2t) + 1/(12t²) = −R_1′(t)`.
pub fn phi(ctx: &PrecisionContext, t: &Real) -> Result<Real> {
    remainder_d1(ctx, 1, t)
}

/// `−t R_n″(t) / R_n′(t)`: any `α` making `t^α[−R_n′(t)]` completely
/// monotonic lies below this at every `t`.
pub fn ratio_bound(ctx: &PrecisionContext, n: u32, t: &Real) -> Result<Real> {
    let d1 = remainder_d1(ctx, n, t)?;
    if d1.is_zero() || !d1.is_normal() {
        return Err(Error::Precision(format!(
            "−R_{n}′ vanished at t={} in working precision",
            t.to_f64()
        )));
    }
    let d2 = remainder_d2(ctx, n, t)?;
    Ok(ctx.real(t * d2) / d1)
}

/// Powers of `t` used for the two non-zero limits of `t^p R_n′(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TailExponents {
    /// `p` in `t^p R_n′(t)` as `t → ∞`.
    pub at_infinity: u32,
    /// `p` in `t^p R_n′(t)` as `t → 0⁺`.
    pub at_zero: u32,
}

impl TailExponents {
    /// `2n+3` at infinity and `2n+1` at zero.
    pub fn stated(n: u32) -> Self {
        TailExponents {
            at_infinity: 2 * n + 3,
            at_zero: 2 * n + 1,
        }
    }

    /// The exponents that cancel the leading behaviour of `R_n′`:
    /// `R_n′ ~ (−1)^{n+1} B_{2n+2}/(2n+2) · t^{−2n−2}` at infinity and
    /// `R_n′ ~ (−1)^n B_{2n}/(2n) · t^{−2n}` at zero.
    pub fn leading_order(n: u32) -> Self {
        TailExponents {
            at_infinity: 2 * n + 2,
            at_zero: 2 * n,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TailLimit {
    pub expression: String,
    pub t: Real,
    pub value: Real,
    pub target: Real,
}

impl TailLimit {
    /// `|value − target| ≤ rel · max(|target|, 1)`.
    pub fn deviation(&self) -> Real {
        let prec = self.value.prec();
        let d = Real::with_val(prec, &self.value - &self.target).abs();
        let denom = Real::with_val(prec, &*self.target.as_abs()).max(&Real::with_val(prec, 1));
        d / denom
    }

    pub fn within(&self, rel: f64) -> bool {
        self.deviation() <= rel
    }
}

pub const LARGE_T: f64 = 1e6;
pub const SMALL_T: f64 = 1e-6;

/// The four limits of `R_n′` with the stated exponents.
pub fn tail_limits(ctx: &PrecisionContext, n: u32) -> Result<[TailLimit; 4]> {
    tail_limits_with(ctx, n, TailExponents::stated(n))
}

/// `R_n′(∞)`, `t^{2n−1} R_n′` at infinity, and the two exponent-dependent
/// limits, each evaluated at `t = 10⁶` or `t = 10⁻⁶`.
pub fn tail_limits_with(ctx: &PrecisionContext, n: u32, exps: TailExponents) -> Result<[TailLimit; 4]> {
    if n == 0 {
        return Err(Error::domain("tail_limits", "n must be >= 1"));
    }
    let big = ctx.real(LARGE_T);
    let small = ctx.real(SMALL_T);
    let d1_big = -remainder_d1(ctx, n, &big)?;
    let d1_small = -remainder_d1(ctx, n, &small)?;
    let scaled = |t: &Real, d: &Real, p: u32| ctx.real(t.clone().pow(p)) * d;
    let mut t_inf = ctx.from_rational(&bernoulli(2 * n + 2)) / (2 * n + 2);
    if n.is_multiple_of(2) {
        t_inf = -t_inf;
    }
    let mut t_zero = ctx.from_rational(&bernoulli(2 * n)) / (2 * n);
    if n % 2 == 1 {
        t_zero = -t_zero;
    }
    Ok([
        TailLimit {
            expression: "R_n'(t), t->inf".into(),
            t: big.clone(),
            value: d1_big.clone(),
            target: ctx.zero(),
        },
        TailLimit {
            expression: format!("t^{} R_n'(t), t->inf", 2 * n - 1),
            t: big.clone(),
            value: scaled(&big, &d1_big, 2 * n - 1),
            target: ctx.zero(),
        },
        TailLimit {
            expression: format!("t^{} R_n'(t), t->inf", exps.at_infinity),
            t: big.clone(),
            value: scaled(&big, &d1_big, exps.at_infinity),
            target: t_inf,
        },
        TailLimit {
            expression: format!("t^{} R_n'(t), t->0+", exps.at_zero),
            t: small.clone(),
            value: scaled(&small, &d1_small, exps.at_zero),
            target: t_zero,
        },
    ])
}
