//! Bose-type moments and the cos/sin kernel integrals.

use rug::ops::Pow;
use super::engine::{integrate_oscillatory, integrate_semi_infinite, Budget, TailModel, DEFAULT_BUDGET};
use super::IntegralResult;
use crate::error::{Error, Result};
use crate::kernels::bose_derivative;
use crate::precision::{with_cancellation_guard, PrecisionContext, Real};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// `1/(e^{2π} − 1)`-style constant: `1/(e^{cw} − 1) ≤ e^{−cw}/(1 − e^{−c})` for `w ≥ 1`.
fn bose_tail_coeff(rate: f64) -> f64 {
    1.0 / (1.0 - (-rate).exp())
}

/// `∫₀^∞ w^s / (e^{2πw} − 1) dw`.
pub fn bose_moment(ctx: &PrecisionContext, s: &Real, tol: &Real) -> Result<IntegralResult> {
    if !s.is_finite() || *s <= 0 {
        return Err(Error::domain("bose_moment", format!("s must be > 0, got {}", s.to_f64())));
    }
    let two_pi = ctx.pi() * 2u32;
    let integrand = |w: &Real| -> Result<Real> {
        if w.is_zero() {
            return Ok(ctx.zero());
        }
        let denom = ctx.exp_m1(&ctx.real(w * &two_pi))?;
        Ok(ctx.pow(w, s)? / denom)
    };
    let tail = TailModel {
        coeff: bose_tail_coeff(TWO_PI),
        power: s.to_f64().max(0.0),
        rate: TWO_PI,
    };
    let mut budget = Budget::new(DEFAULT_BUDGET);
    integrate_semi_infinite(ctx, &integrand, tail, tol, &mut budget)
}

/// `∫₀^∞ w^{2n−1} [1 − cos(wv)] / (e^{2πw} − 1) dw`; exactly 0 at `v = 0`.
pub fn cos_kernel_integral(
    ctx: &PrecisionContext,
    n: u32,
    v: &Real,
    tol: &Real,
) -> Result<IntegralResult> {
    if n == 0 {
        return Err(Error::domain("cos_kernel_integral", "n must be >= 1"));
    }
    if !v.is_finite() || *v < 0 {
        return Err(Error::domain("cos_kernel_integral", format!("v must be >= 0, got {}", v.to_f64())));
    }
    if v.is_zero() {
        return Ok(IntegralResult {
            value: ctx.zero(),
            est_error: ctx.zero(),
            evaluations: 0,
        });
    }
    let two_pi = ctx.pi() * 2u32;
    let half_v = ctx.real(v / 2u32);
    let integrand = |w: &Real| -> Result<Real> {
        if w.is_zero() {
            return Ok(ctx.zero());
        }
        // 1 − cos x = 2 sin²(x/2)
        let s = ctx.sin(&ctx.real(w * &half_v))?;
        let denom = ctx.exp_m1(&ctx.real(w * &two_pi))?;
        Ok(ctx.real(w.clone().pow(2 * n - 1)) * s.square() * 2u32 / denom)
    };
    let tail = TailModel {
        coeff: 2.0 * bose_tail_coeff(TWO_PI),
        power: f64::from(2 * n - 1),
        rate: TWO_PI,
    };
    // zeros of sin(wv/2) at w = 2πk/v
    let spacing = ctx.real(&two_pi / v);
    let mut budget = Budget::new(DEFAULT_BUDGET);
    integrate_oscillatory(ctx, &integrand, &spacing, &spacing, tail, tol, &mut budget)
}

/// `∫₀^∞ u^p sin(su) / (e^u − 1) du` for even `p ≥ 2`.
pub fn sin_kernel_integral(
    ctx: &PrecisionContext,
    p: u32,
    s: &Real,
    tol: &Real,
) -> Result<IntegralResult> {
    check_sin_args(p, s)?;
    let integrand = |u: &Real| -> Result<Real> {
        if u.is_zero() {
            return Ok(ctx.zero());
        }
        let sn = ctx.sin(&ctx.real(u * s))?;
        Ok(ctx.real(u.clone().pow(p)) * sn / ctx.exp_m1(u)?)
    };
    let tail = TailModel {
        coeff: bose_tail_coeff(1.0),
        power: f64::from(p),
        rate: 1.0,
    };
    let half_period = ctx.pi() / s;
    let mut budget = Budget::new(DEFAULT_BUDGET);
    integrate_oscillatory(ctx, &integrand, &half_period, &half_period, tail, tol, &mut budget)
}

/// The same integral in closed form, `p = 2n`:
/// `(−1)^n [π (2π)^{2n} b^{(2n)}(2πs) − (2n)!/(2 s^{2n+1})]` with
/// `b(x) = 1/(e^x − 1)`.
pub fn sin_kernel_closed_form(ctx: &PrecisionContext, p: u32, s: &Real) -> Result<Real> {
    check_sin_args(p, s)?;
    let value = with_cancellation_guard(ctx, |w| {
        let two_pi = w.pi() * 2u32;
        let x = w.real(&two_pi * s);
        let b = bose_derivative(w, p, &x)?;
        let a = w.pi() * w.real(two_pi.pow(p)) * b;
        let c = w.factorial(p) / w.real(s.clone().pow(p + 1)) / 2u32;
        let scale = w.real(&*a.as_abs()).max(&w.real(&*c.as_abs()));
        Ok((a - c, scale))
    })?;
    Ok(if (p / 2) % 2 == 1 { -value } else { value })
}

fn check_sin_args(p: u32, s: &Real) -> Result<()> {
    if p < 2 || p % 2 == 1 {
        return Err(Error::domain("sin_kernel_integral", format!("p must be even and >= 2, got {p}")));
    }
    if !s.is_finite() || *s <= 0 {
        return Err(Error::domain("sin_kernel_integral", format!("s must be > 0, got {}", s.to_f64())));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::{bernoulli, zeta_even};

    fn ctx() -> PrecisionContext {
        PrecisionContext::default()
    }

    #[test]
    fn odd_moments_are_bernoulli() {
        let c = ctx();
        for k in 1..=6u32 {
            let r = bose_moment(&c, &c.real(2 * k - 1), &c.pow10(-40)).unwrap();
            let mut exact = c.from_rational(&bernoulli(2 * k)) / (4 * k);
            if k % 2 == 0 {
                exact = -exact;
            }
            assert!(c.real(r.value - exact).abs() < c.pow10(-35), "k={k}");
        }
    }

    #[test]
    fn moment_s2_matches_geometric_expansion() {
        // ∫ w² Σ_m e^{−2πmw} dw = Σ 2/(2πm)³ = 2ζ(3)/(2π)³
        let c = PrecisionContext::new(30).unwrap();
        let mut z3 = c.zero();
        let terms = 20_000u32;
        for m in (1..=terms).rev() {
            z3 += c.real(m).pow(3u32).recip();
        }
        let big = c.real(terms);
        // Euler–Maclaurin tail of Σ 1/m³ beyond N
        z3 += big.clone().square().recip() / 2u32 - big.clone().pow(3u32).recip() / 2u32
            + c.real(big.pow(4u32)).recip() / 4u32;
        let two_pi = c.pi() * 2u32;
        let exact = z3 * 2u32 / two_pi.pow(3u32);
        let r = bose_moment(&c, &c.real(2), &c.pow10(-25)).unwrap();
        assert!(c.real(r.value - exact).abs() < c.pow10(-20));
    }

    #[test]
    fn moment_equals_zeta_form() {
        // Γ(2n)ζ(2n)/(2π)^{2n} = bose_moment(2n−1)
        let c = ctx();
        for n in 1..=4u32 {
            let z = zeta_even(n).unwrap().to_real(&c);
            let lhs = c.factorial(2 * n - 1) * z / (c.pi() * 2u32).pow(2 * n);
            let r = bose_moment(&c, &c.real(2 * n - 1), &c.pow10(-40)).unwrap();
            assert!(c.real(lhs - r.value).abs() < c.pow10(-35), "n={n}");
        }
    }

    #[test]
    fn cos_kernel_is_zero_at_origin_and_nonnegative() {
        let c = ctx();
        let z = cos_kernel_integral(&c, 2, &c.zero(), &c.pow10(-30)).unwrap();
        assert!(z.value.is_zero());
        for n in 1..=3u32 {
            for v in [0.01, 0.5, 3.0, 40.0] {
                let r = cos_kernel_integral(&c, n, &c.real(v), &c.pow10(-30)).unwrap();
                assert!(r.value >= 0, "n={n} v={v}");
            }
        }
    }

    #[test]
    fn cos_kernel_approaches_moment_for_large_v() {
        let c = PrecisionContext::new(30).unwrap();
        let r = cos_kernel_integral(&c, 2, &c.real(1000), &c.pow10(-20)).unwrap();
        let m = c.real(240).recip();
        // the remaining cos part is O(v^{−4})
        assert!(c.real(r.value - m).abs() < c.pow10(-11));
    }

    #[test]
    fn sin_kernel_matches_closed_form() {
        let c = ctx();
        for p in [2u32, 4, 6] {
            for s in [0.3, 1.0, 5.0] {
                let s = c.real(s);
                let q = sin_kernel_integral(&c, p, &s, &c.pow10(-30)).unwrap();
                let f = sin_kernel_closed_form(&c, p, &s).unwrap();
                assert!(c.real(q.value - f).abs() < c.pow10(-28), "p={p} s={s}");
            }
        }
    }

    #[test]
    fn sin_kernel_rejects_odd_power() {
        let c = ctx();
        assert!(sin_kernel_integral(&c, 3, &c.one(), &c.pow10(-20)).is_err());
        assert!(sin_kernel_integral(&c, 2, &c.zero(), &c.pow10(-20)).is_err());
    }
}
