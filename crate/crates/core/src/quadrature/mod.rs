//! Semi-infinite quadrature at working precision.
//!
//! Every integral here has a smooth integrand with exponential decay, so a
//! single scheme covers them: the axis is cut into panels, the panel that
//! touches the origin is integrated by tanh-sinh (which tolerates integrable
//! endpoint singularities), every other panel by Gauss–Legendre with
//! interval halving, and the part beyond the last panel is dropped once an
//! analytic tail bound says it is below tolerance. Oscillatory integrands
//! get panels aligned with the zeros of the oscillating factor.

mod engine;
mod identities;
mod moments;

pub use engine::{
    integrate_finite, integrate_oscillatory, integrate_semi_infinite, Budget, TailModel,
    DEFAULT_BUDGET,
};
pub use identities::{
    verify_degree_representation, zeta_bound, zeta_bound_inequalities, zeta_bound_lhs,
    ZetaBoundForm, ZetaBoundReport, ZetaBoundSlack, ZetaBoundViolation,
};
pub use moments::{bose_moment, cos_kernel_integral, sin_kernel_closed_form, sin_kernel_integral};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::precision::{PrecisionContext, Real};

#[derive(Debug, Clone)]
pub struct IntegralResult {
    pub value: Real,
    /// Conservative bound from interval halving, level differences, rounding
    /// and the analytic tail.
    pub est_error: Real,
    pub evaluations: usize,
}

/// Log-spaced points on `[t_min, t_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub t_min: f64,
    pub t_max: f64,
    pub count: usize,
}

impl GridSpec {
    pub fn log(t_min: f64, t_max: f64, count: usize) -> Result<Self> {
        let g = GridSpec {
            t_min,
            t_max,
            count,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_min > 0.0 && self.t_min.is_finite() && self.t_max.is_finite()) {
            return Err(Error::domain("grid", format!("endpoints must be finite and > 0: {self:?}")));
        }
        if self.t_min >= self.t_max {
            return Err(Error::domain("grid", format!("need t_min < t_max: {self:?}")));
        }
        if self.count < 2 {
            return Err(Error::domain("grid", format!("need at least 2 points: {self:?}")));
        }
        Ok(())
    }

    pub fn points(&self, ctx: &PrecisionContext) -> Result<Vec<Real>> {
        self.validate()?;
        // decimal endpoints as written, not their binary f64 neighbours
        let lo = ctx.parse(&format!("{:e}", self.t_min))?;
        let hi = ctx.parse(&format!("{:e}", self.t_max))?;
        let span = ctx.ln(&hi)? - ctx.ln(&lo)?;
        let last = (self.count - 1) as u32;
        let mut pts = Vec::with_capacity(self.count);
        pts.push(lo.clone());
        for i in 1..last {
            let x = ctx.ln(&lo)? + span.clone() * i / last;
            pts.push(ctx.exp(&x)?);
        }
        pts.push(hi);
        Ok(pts)
    }
}

/// `∫₀^∞ kernel(v) e^{−tv} dv`.
///
/// `growth = (C, p)` asserts `|kernel(v)| ≤ C (1+v)^p` for `v ≥ 1`; it feeds
/// the tail bound and is not checked.
pub fn laplace(
    ctx: &PrecisionContext,
    kernel: &dyn Fn(&Real) -> Result<Real>,
    growth: (f64, f64),
    t: &Real,
    tol: &Real,
) -> Result<IntegralResult> {
    if *t <= 0 {
        return Err(Error::domain("laplace", "t must be > 0"));
    }
    let rate = t.to_f64();
    let integrand = |v: &Real| -> Result<Real> {
        let k = kernel(v)?;
        let damp = ctx.exp(&ctx.real(-(t.clone() * v)))?;
        Ok(k * damp)
    };
    let tail = TailModel {
        coeff: growth.0,
        power: growth.1,
        rate,
    };
    let mut budget = Budget::new(DEFAULT_BUDGET);
    integrate_semi_infinite(ctx, &integrand, tail, tol, &mut budget)
}
