//! `ln Γ`, `ψ` and `ψ^{(m)}` on `(0, ∞)`.
//!
//! The argument is shifted upward by the recurrence until the Stirling
//! series converges to working precision, then the series is summed until
//! its terms drop below `eps · |sum|`. Because the remainders of the series
//! are completely monotonic the series envelopes its value, so the first
//! omitted term bounds the truncation error.

use rug::ops::Pow;
use crate::combinatorics::bernoulli_even_table;
use crate::error::{Error, Result};
use crate::precision::{PrecisionContext, Real};
use crate::quadrature::{laplace, IntegralResult};

const GUARD_DIGITS: u32 = 12;

#[derive(Debug, Clone)]
pub struct GammaEval {
    pub t: Real,
    pub value: Real,
    /// −1 for `ln Γ`, 0 for `ψ`, `m ≥ 1` for `ψ^{(m)}`.
    pub order: i32,
    pub est_error: Real,
}

fn ln_factorial(n: u32) -> f64 {
    (2..=n).map(|k| f64::from(k).ln()).sum()
}

/// `ln |c_k ⟨1−2k⟩_j t^{1−2k−j}|` up to the `ζ(2k) ≈ 1` factor.
fn log_term(k: u32, j: u32, ln_t: f64) -> f64 {
    let two_k = 2 * k;
    std::f64::consts::LN_2 + ln_factorial(two_k + j - 2)
        - f64::from(two_k) * (2.0 * std::f64::consts::PI).ln()
        + (1.0 - f64::from(two_k) - f64::from(j)) * ln_t
}

/// Whether the tail `Σ_{k>skip}` of the `j`-th derivative of the Stirling
/// series reaches relative size `10^{−digits}` before its terms turn around.
pub(crate) fn stirling_tail_converges(skip: u32, j: u32, t: f64, digits: u32) -> bool {
    let ln_t = t.ln();
    let first = log_term(skip + 1, j, ln_t);
    let target = first - f64::from(digits + 2) * std::f64::consts::LN_10;
    let mut prev = first;
    let mut k = skip + 1;
    loop {
        let cur = log_term(k, j, ln_t);
        if cur < target {
            return true;
        }
        if k > skip + 1 && cur >= prev {
            return false;
        }
        if k > skip + 100_000 {
            return false;
        }
        prev = cur;
        k += 1;
    }
}

/// `Σ_{k>skip} c_k ⟨1−2k⟩_j t^{1−2k−j}` with `c_k = B_{2k}/(2k(2k−1))`,
/// the `j`-th derivative of the Stirling series tail.
///
/// Returns `(sum, |first omitted term|)`, or `None` when the terms stop
/// decreasing before they fall below `eps · |sum|`.
pub(crate) fn stirling_tail(
    ctx: &PrecisionContext,
    skip: u32,
    j: u32,
    t: &Real,
) -> Option<(Real, Real)> {
    let eps = ctx.epsilon();
    let inv_t2 = ctx.real(t.clone().square()).recip();
    let mut k = skip + 1;
    // t^{1−2k−j} for the current k
    let mut pw = ctx.real(t.clone().pow(1 - 2 * k as i32 - j as i32));
    let mut table = bernoulli_even_table(ctx.bits(), k as usize + 32);
    let mut sum = ctx.zero();
    let mut prev_abs: Option<Real> = None;
    loop {
        if table.len() <= k as usize {
            table = bernoulli_even_table(ctx.bits(), 2 * k as usize + 16);
        }
        let two_k = 2 * k;
        let mut coeff = ctx.real(&table[k as usize]) / (two_k * (two_k - 1));
        for i in 0..j {
            // ⟨1−2k⟩_j = Π (1 − 2k − i)
            coeff *= -(i64::from(two_k) - 1 + i64::from(i));
        }
        let term = coeff * &pw;
        let abs = ctx.real(&*term.as_abs());
        if let Some(p) = &prev_abs {
            if abs <= eps.clone() * &*sum.as_abs() {
                return Some((sum, abs));
            }
            if abs >= *p {
                return None;
            }
        }
        sum += &term;
        prev_abs = Some(abs);
        pw *= &inv_t2;
        k += 1;
    }
}

/// The elementary part `G(t) = (t−½) ln t − t + ½ ln 2π` and its
/// derivatives: `G′ = ln t − 1/(2t)`, and for `j ≥ 2`
/// `G^{(j)} = (−1)^j [(j−2)!/t^{j−1} + ½ (j−1)!/t^j]`.
pub(crate) fn stirling_head(ctx: &PrecisionContext, j: u32, t: &Real) -> Result<Real> {
    let ln_t = ctx.ln(t)?;
    Ok(match j {
        0 => {
            let half_ln_2pi = ctx.ln(&(ctx.pi() * 2u32))? / 2u32;
            (ctx.real(t - 0.5f64)) * ln_t - t + half_ln_2pi
        }
        1 => ln_t - ctx.real(t * 2u32).recip(),
        _ => {
            let f2 = ctx.factorial(j - 2);
            let f1 = ctx.factorial(j - 1);
            let v = f2 / ctx.real(t.clone().pow(j - 1)) + f1 / ctx.real(t.clone().pow(j)) / 2u32;
            if j.is_multiple_of(2) {
                v
            } else {
                -v
            }
        }
    })
}

/// Shift that brings `t` into the region where the `j`-th derivative of the
/// Stirling series converges at `digits`.
fn shift_for(t: f64, j: u32, digits: u32) -> u32 {
    let x0 = (0.4 * f64::from(digits) + f64::from(j) + 5.0).max(10.0);
    let mut n = if t >= x0 { 0 } else { (x0 - t).ceil() as u32 };
    while !stirling_tail_converges(0, j, t + f64::from(n), digits) {
        n = (2 * n).max(8);
    }
    n
}

/// `j`-th derivative of `ln Γ` (`j = 0` gives `ln Γ`, `j = 1` gives `ψ`).
fn log_gamma_deriv(ctx: &PrecisionContext, j: u32, t: &Real) -> Result<(Real, Real)> {
    if !t.is_finite() || *t <= 0 {
        return Err(Error::domain(
            if j == 0 { "ln_gamma" } else { "polygamma" },
            format!("t must be finite and > 0, got {}", t.to_f64()),
        ));
    }
    let work = ctx.with_extra_digits(GUARD_DIGITS);
    let t = work.real(t);
    let n = shift_for(t.to_f64(), j, work.digits());
    let shifted = work.real(&t + n);
    let (tail, omitted) = stirling_tail(&work, 0, j, &shifted).ok_or_else(|| {
        Error::Precision(format!("Stirling series diverges at t={}", shifted.to_f64()))
    })?;
    let mut value = stirling_head(&work, j, &shifted)? + tail;
    if n > 0 {
        if j == 0 {
            // ln Γ(t) = ln Γ(t+n) − ln(t(t+1)⋯(t+n−1))
            let mut prod = work.one();
            for i in 0..n {
                prod *= work.real(&t + i);
            }
            value -= work.ln(&prod)?;
        } else {
            // ψ^{(m)}(t) = ψ^{(m)}(t+n) − (−1)^m m! Σ 1/(t+i)^{m+1}
            let m = j - 1;
            let mut s = work.zero();
            for i in 0..n {
                s += work.real(&t + i).pow(j).recip();
            }
            s *= work.factorial(m);
            if m.is_multiple_of(2) {
                value -= s;
            } else {
                value += s;
            }
        }
    }
    let rounding = ctx.real(&*value.as_abs()) * ctx.epsilon();
    Ok((ctx.round(&value), ctx.real(&omitted) + rounding))
}

pub fn ln_gamma(ctx: &PrecisionContext, t: &Real) -> Result<Real> {
    Ok(log_gamma_deriv(ctx, 0, t)?.0)
}

pub fn ln_gamma_eval(ctx: &PrecisionContext, t: &Real) -> Result<GammaEval> {
    let (value, est_error) = log_gamma_deriv(ctx, 0, t)?;
    Ok(GammaEval {
        t: t.clone(),
        value,
        order: -1,
        est_error,
    })
}

/// `ψ^{(m)}(t)`.
pub fn polygamma(ctx: &PrecisionContext, m: u32, t: &Real) -> Result<Real> {
    Ok(log_gamma_deriv(ctx, m + 1, t)?.0)
}

pub fn polygamma_eval(ctx: &PrecisionContext, m: u32, t: &Real) -> Result<GammaEval> {
    let (value, est_error) = log_gamma_deriv(ctx, m + 1, t)?;
    Ok(GammaEval {
        t: t.clone(),
        value,
        order: m as i32,
        est_error,
    })
}

pub fn digamma(ctx: &PrecisionContext, t: &Real) -> Result<Real> {
    polygamma(ctx, 0, t)
}

/// `Σ_{k≥1} B_{2k} u^{2k−1+shift} / (2k)!`, summed to `eps` relative.
/// Converges for `|u| < 2π`; used below `u = 1/2`.
pub(crate) fn bernoulli_power_series(ctx: &PrecisionContext, u: &Real, shift: i32) -> Real {
    let eps = ctx.epsilon();
    let table = bernoulli_even_table(ctx.bits(), 64);
    let u2 = ctx.real(u.clone().square());
    // u^{2k−1+shift}/(2k)! for k = 1
    let mut pw = ctx.real(u.clone().pow(1 + shift)) / 2u32;
    let mut sum = ctx.zero();
    let mut k = 1usize;
    let mut table = table;
    loop {
        if table.len() <= k {
            table = bernoulli_even_table(ctx.bits(), 2 * k);
        }
        let term = ctx.real(&table[k]) * &pw;
        let small = ctx.real(&*term.as_abs()) <= eps.clone() * &*sum.as_abs();
        sum += term;
        if small && k > 1 {
            return sum;
        }
        pw *= &u2;
        pw /= ((2 * k + 1) * (2 * k + 2)) as u32;
        k += 1;
    }
}

fn check_positive(func: &'static str, t: &Real) -> Result<()> {
    if !t.is_finite() || *t <= 0 {
        return Err(Error::domain(func, format!("t must be finite and > 0, got {}", t.to_f64())));
    }
    Ok(())
}

fn oracle_tol(ctx: &PrecisionContext) -> Real {
    ctx.pow10(-(ctx.digits() as i32 - 8))
}

/// `ln Γ(t)` from Binet's first formula, by quadrature.
pub fn binet_check(ctx: &PrecisionContext, t: &Real) -> Result<Real> {
    Ok(binet_integral(ctx, t)?.0)
}

/// Binet value together with the quadrature diagnostics.
pub fn binet_integral(ctx: &PrecisionContext, t: &Real) -> Result<(Real, IntegralResult)> {
    check_positive("binet_check", t)?;
    let work = ctx.with_extra_digits(GUARD_DIGITS);
    let half = work.real(0.5f64);
    // (1/(e^u − 1) − 1/u + ½)/u = Σ_{k≥1} B_{2k} u^{2k−2}/(2k)!
    let kernel = |u: &Real| -> Result<Real> {
        if *u < half {
            return Ok(bernoulli_power_series(&work, u, -1));
        }
        let em1 = work.exp_m1(u)?;
        Ok((em1.recip() - work.real(u.clone().recip()) + 0.5f64) / u)
    };
    let tw = work.real(t);
    let res = laplace(&work, &kernel, (0.5, 0.0), &tw, &oracle_tol(ctx))?;
    let value = stirling_head(&work, 0, &tw)? + &res.value;
    Ok((ctx.round(&value), res))
}

/// `ψ(t) = ln t + ∫₀^∞ (1/v − 1/(1 − e^{−v})) e^{−tv} dv`, by quadrature.
pub fn psi_integral_check(ctx: &PrecisionContext, t: &Real) -> Result<Real> {
    check_positive("psi_integral_check", t)?;
    let work = ctx.with_extra_digits(GUARD_DIGITS);
    let half = work.real(0.5f64);
    // 1/v − 1/(1 − e^{−v}) = −½ − Σ_{k≥1} B_{2k} v^{2k−1}/(2k)!
    let kernel = |v: &Real| -> Result<Real> {
        if *v < half {
            return Ok(-bernoulli_power_series(&work, v, 0) - 0.5f64);
        }
        let one_minus = -work.exp_m1(&work.real(-v))?;
        Ok(work.real(v.clone().recip()) - one_minus.recip())
    };
    let tw = work.real(t);
    let res = laplace(&work, &kernel, (1.0, 0.0), &tw, &oracle_tol(ctx))?;
    Ok(ctx.round(&(work.ln(&tw)? + res.value)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::zeta_even;

    fn ctx() -> PrecisionContext {
        PrecisionContext::default()
    }

    fn close(a: &Real, b: &Real, e: i32) -> bool {
        let c = ctx();
        (c.real(a - b)).abs() < c.pow10(e)
    }

    #[test]
    fn ln_gamma_at_integers_and_half() {
        let c = ctx();
        assert!(ln_gamma(&c, &c.one()).unwrap().abs() < c.pow10(-48));
        assert!(close(
            &ln_gamma(&c, &c.real(10)).unwrap(),
            &c.ln(&c.real(362_880)).unwrap(),
            -45
        ));
        let ln_sqrt_pi = c.ln(&c.pi()).unwrap() / 2u32;
        assert!(close(&ln_gamma(&c, &c.real(0.5)).unwrap(), &ln_sqrt_pi, -45));
        assert!(ln_gamma(&c, &c.zero()).is_err());
        assert!(matches!(
            ln_gamma(&c, &c.real(-2)),
            Err(Error::Domain { func: "ln_gamma", .. })
        ));
    }

    #[test]
    fn ln_gamma_reports_error_estimate() {
        let c = ctx();
        let e = ln_gamma_eval(&c, &c.real(3.7)).unwrap();
        let rel = e.est_error / e.value.abs();
        assert!(rel < c.pow10(-40));
        assert_eq!(e.order, -1);
    }

    #[test]
    fn digamma_at_one_is_minus_euler() {
        // oracle: H_N − ln N − 1/(2N) + Σ B_{2k}/(2k N^{2k}) for N = 1000
        let c = ctx();
        let n = 1000u32;
        let mut h = c.zero();
        for k in 1..=n {
            h += c.real(k).recip();
        }
        let big = c.real(n);
        let mut gamma = h - c.ln(&big).unwrap() - c.real(big.clone() * 2u32).recip();
        for k in 1..=10u32 {
            let b = c.from_rational(&crate::combinatorics::bernoulli(2 * k));
            gamma += b / (2 * k) / big.clone().pow(2 * k);
        }
        let psi1 = digamma(&c, &c.one()).unwrap();
        assert!(close(&psi1, &(-gamma), -45));
        assert!(close(&psi1, &(-c.euler_gamma()), -45));
    }

    #[test]
    fn trigamma_at_one_is_zeta_two() {
        let c = ctx();
        let z2 = zeta_even(1).unwrap().to_real(&c);
        assert!(close(&polygamma(&c, 1, &c.one()).unwrap(), &z2, -45));
    }

    #[test]
    fn recurrence_holds() {
        let c = ctx();
        for m in 0..=8u32 {
            for t in [0.1, 1.0, 7.0, 0.003, 45.0] {
                let t = c.real(t);
                let a = polygamma(&c, m, &c.real(&t + 1u32)).unwrap();
                let b = polygamma(&c, m, &t).unwrap();
                let mut rhs = c.factorial(m) / t.clone().pow(m + 1);
                if m % 2 == 1 {
                    rhs = -rhs;
                }
                let diff = c.real(a - b - &rhs).abs();
                let scale = rhs.abs() + 1u32;
                assert!(diff < scale * c.pow10(-45), "m={m} t={t}");
            }
        }
    }

    #[test]
    fn polygamma_sign_pattern() {
        let c = ctx();
        for m in 1..=12u32 {
            for t in [1e-3, 0.4, 2.0, 60.0, 1e5] {
                let v = polygamma(&c, m, &c.real(t)).unwrap();
                let signed = if m % 2 == 1 { v } else { -v };
                assert!(signed > 0, "m={m} t={t}");
            }
        }
    }

    #[test]
    fn limits_of_t_times_log_minus_psi() {
        let c = ctx();
        let f = |t: f64| {
            let t = c.real(t);
            let v = c.ln(&t).unwrap() - digamma(&c, &t).unwrap();
            (t * v).to_f64()
        };
        let mut prev = 0.0;
        for k in 4..=8 {
            let t = 10f64.powi(-k);
            let v = f(t);
            // t[ln t − ψ(t)] = 1 + t ln t + γt + O(t²)
            assert!((v - 1.0).abs() < 2.0 * t * t.ln().abs());
            assert!(v > prev);
            prev = v;
        }
        assert!((f(1e8) - 0.5).abs() < 1e-8);
    }

    #[test]
    fn series_kernel_matches_closed_form_near_switch() {
        let c = ctx();
        let u = c.real(0.49);
        let series = bernoulli_power_series(&c, &u, -1);
        let work = c.with_extra_digits(20);
        let uw = work.real(&u);
        let closed = (work.exp_m1(&uw).unwrap().recip() - uw.clone().recip() + 0.5f64) / &uw;
        assert!(close(&series, &c.round(&closed), -46));
    }

    #[test]
    fn binet_oracle_agrees() {
        let c = PrecisionContext::new(40).unwrap();
        for t in [0.5, 1.0, 3.0, 20.0] {
            let t = c.real(t);
            let b = binet_check(&c, &t).unwrap();
            let d = ln_gamma(&c, &t).unwrap();
            assert!(c.real(b - d).abs() < c.pow10(-30), "t={t}");
        }
    }

    #[test]
    fn psi_oracle_agrees() {
        let c = PrecisionContext::new(40).unwrap();
        let one_minus_gamma = c.one() - c.euler_gamma();
        let p2 = psi_integral_check(&c, &c.real(2)).unwrap();
        assert!(c.real(p2 - one_minus_gamma).abs() < c.pow10(-30));
        for t in [0.05, 1.0, 9.0] {
            let t = c.real(t);
            let a = psi_integral_check(&c, &t).unwrap();
            let b = digamma(&c, &t).unwrap();
            assert!(c.real(a - b).abs() < c.pow10(-30), "t={t}");
        }
    }
}
