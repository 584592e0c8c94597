//! Integral identities that tie the kernels back to the remainders.

use rug::ops::Pow;
use rug::Integer;
use serde::{Deserialize, Serialize};

use super::moments::cos_kernel_integral;
use super::{laplace, GridSpec};
use crate::combinatorics::{stirling2, zeta_even, BigRational};
use crate::error::{Error, Result};
use crate::kernels::{bose_derivative, coth_part_deriv};
use crate::precision::{with_cancellation_guard, PrecisionContext, Real};
use crate::remainders::remainder_d1;

/// Digits needed to resolve `tol` with some headroom.
fn working_digits(ctx: &PrecisionContext, tol: &Real) -> PrecisionContext {
    let want = (-tol.to_f64().log10()).ceil().max(0.0) as u32 + 15;
    PrecisionContext::with_digits(want.min(ctx.digits()))
}

/// `|2 ∫₀^∞ C_n(v) e^{−tv} dv − t^{2n−1}[−R_n′(t)]|` where
/// `C_n(v) = ∫₀^∞ w^{2n−1}[1 − cos(wv)]/(e^{2πw} − 1) dw`.
///
/// The double integral runs at the precision `tol` calls for (capped by
/// `ctx`), since each outer node costs a full inner quadrature.
pub fn verify_degree_representation(
    ctx: &PrecisionContext,
    n: u32,
    t: &Real,
    tol: &Real,
) -> Result<Real> {
    if n == 0 {
        return Err(Error::domain("verify_degree_representation", "n must be >= 1"));
    }
    if !t.is_finite() || *t <= 0 {
        return Err(Error::domain("verify_degree_representation", "t must be > 0"));
    }
    let work = working_digits(ctx, tol);
    let tw = work.real(t);
    let outer_tol = work.real(tol) / 4u32;
    // an inner error ε moves the outer value by at most 2ε/t
    let inner_tol = work.real(&outer_tol * &tw) / 4u32;
    let kernel = |v: &Real| -> Result<Real> {
        Ok(cos_kernel_integral(&work, n, v, &inner_tol)?.value * 2u32)
    };
    let lhs = laplace(&work, &kernel, (1.0, 0.0), &tw, &outer_tol)?;
    let rhs = work.real(tw.clone().pow(2 * n - 1)) * remainder_d1(&work, n, &tw)?;
    Ok(ctx.real(work.real(lhs.value - rhs).abs()))
}

/// `Γ(2n)ζ(2n)/(2π)^{2n} = (2n−1)! q_n / 2^{2n}` where `ζ(2n) = q_n π^{2n}`.
pub fn zeta_bound(n: u32) -> Result<BigRational> {
    let z = zeta_even(n)?;
    let f = Integer::from(Integer::factorial(2 * n - 1));
    Ok(z.coefficient * f / (Integer::from(1) << (2 * n)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ZetaBoundForm {
    /// `(−1)^n/2 · (1/v − ½ coth(v/2))^{(2n−1)}`
    Coth,
    /// `(−1)^n/2 · (1/v − 1/(e^v − 1))^{(2n−1)}`
    Bose,
    /// `(−1)^n/2 · [(2n−1)!/v^{2n} − Σ_{p=1}^{2n} (p−1)! S(2n,p) x^p]`
    Stirling,
}

impl ZetaBoundForm {
    pub const ALL: [ZetaBoundForm; 3] = [ZetaBoundForm::Coth, ZetaBoundForm::Bose, ZetaBoundForm::Stirling];

    pub fn name(self) -> &'static str {
        match self {
            ZetaBoundForm::Coth => "coth",
            ZetaBoundForm::Bose => "bose",
            ZetaBoundForm::Stirling => "stirling",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ZetaBoundViolation {
    pub form: ZetaBoundForm,
    pub v: Real,
    pub lhs: Real,
}

#[derive(Debug, Clone)]
pub struct ZetaBoundSlack {
    pub form: ZetaBoundForm,
    pub min_slack: Real,
    pub argmin: Real,
    pub max_slack: Real,
}

#[derive(Debug, Clone)]
pub struct ZetaBoundReport {
    pub n: u32,
    pub bound: BigRational,
    pub slack: Vec<ZetaBoundSlack>,
    pub violations: Vec<ZetaBoundViolation>,
}

impl ZetaBoundReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Left-hand side of one of the three inequalities at `v`.
pub fn zeta_bound_lhs(ctx: &PrecisionContext, form: ZetaBoundForm, n: u32, v: &Real) -> Result<Real> {
    let m = 2 * n - 1;
    let raw = match form {
        ZetaBoundForm::Coth => coth_part_deriv(ctx, m, v)?,
        ZetaBoundForm::Bose => with_cancellation_guard(ctx, |w| {
            let vw = w.real(v);
            // d^m(1/v) = −m!/v^{m+1} for odd m
            let a = -(w.factorial(m) / w.real(vw.clone().pow(m + 1)));
            let b = bose_derivative(w, m, &vw)?;
            let scale = w.real(&*a.as_abs()).max(&w.real(&*b.as_abs()));
            Ok((a - b, scale))
        })?,
        ZetaBoundForm::Stirling => with_cancellation_guard(ctx, |w| {
            let vw = w.real(v);
            let x = w.exp_m1(&vw)?.recip();
            let a = w.factorial(m) / w.real(vw.clone().pow(2 * n));
            let mut sum = w.zero();
            let mut xp = w.one();
            for p in 1..=2 * n {
                xp *= &x;
                sum += w.from_rational(&stirling2(2 * n, p)?) * w.factorial(p - 1) * &xp;
            }
            let scale = w.real(&*a.as_abs()).max(&sum);
            Ok((a - sum, scale))
        })?,
    };
    let half = raw / 2u32;
    Ok(if n % 2 == 1 { -half } else { half })
}

/// Checks `lhs < Γ(2n)ζ(2n)/(2π)^{2n}` for all three forms on `grid`.
pub fn zeta_bound_inequalities(ctx: &PrecisionContext, n: u32, grid: &GridSpec) -> Result<ZetaBoundReport> {
    if n == 0 {
        return Err(Error::domain("zeta_bound_inequalities", "n must be >= 1"));
    }
    let bound_q = zeta_bound(n)?;
    let bound = ctx.from_rational(&bound_q);
    let pts = grid.points(ctx)?;
    let mut slack = Vec::new();
    let mut violations = Vec::new();
    for form in ZetaBoundForm::ALL {
        let mut min: Option<(Real, Real)> = None;
        let mut max: Option<Real> = None;
        for v in &pts {
            let lhs = zeta_bound_lhs(ctx, form, n, v)?;
            let s = ctx.real(&bound - &lhs);
            if s <= 0 {
                violations.push(ZetaBoundViolation {
                    form,
                    v: v.clone(),
                    lhs,
                });
            }
            if min.as_ref().is_none_or(|(m, _)| s < *m) {
                min = Some((s.clone(), v.clone()));
            }
            if max.as_ref().is_none_or(|m| s > *m) {
                max = Some(s);
            }
        }
        let (min_slack, argmin) = min.expect("grid has points");
        slack.push(ZetaBoundSlack {
            form,
            min_slack,
            argmin,
            max_slack: max.expect("grid has points"),
        });
    }
    Ok(ZetaBoundReport {
        n,
        bound: bound_q,
        slack,
        violations,
    })
}
