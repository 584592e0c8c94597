//! Necessary-condition checks for complete monotonicity of `t^α[h(t) − h(∞)]`
//! and bisection for the completely monotonic degree of `h`.
//!
//! A pass only says that no sign violation was seen for derivative orders
//! `0..=J` on the grid; it never certifies complete monotonicity.

use std::fmt;
use std::sync::Arc;

use rug::ops::Pow;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{falling, BigRational};
use crate::error::{Error, Result};
use crate::gammakit::polygamma;
use crate::precision::{PrecisionContext, Real};
use crate::quadrature::GridSpec;
use crate::remainders::{remainder_deriv, MAX_ORDER};

type DerivFn = dyn Fn(&PrecisionContext, u32, &Real) -> Result<Real> + Send + Sync;

/// Derivative orders registered for the built-in families.
pub const BUILTIN_MAX_ORDER: u32 = 24;

/// A function `h` on `(0, ∞)` known through its analytic derivatives.
#[derive(Clone)]
pub struct FunctionFamily {
    pub name: String,
    eval: Arc<DerivFn>,
    pub limit_at_infinity: BigRational,
    pub max_order: u32,
}

impl fmt::Debug for FunctionFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FunctionFamily")
            .field("name", &self.name)
            .field("limit_at_infinity", &self.limit_at_infinity)
            .field("max_order", &self.max_order)
            .finish()
    }
}

impl FunctionFamily {
    pub fn new<F>(name: impl Into<String>, limit_at_infinity: BigRational, max_order: u32, eval: F) -> Self
    where
        F: Fn(&PrecisionContext, u32, &Real) -> Result<Real> + Send + Sync + 'static,
    {
        FunctionFamily {
            name: name.into(),
            eval: Arc::new(eval),
            limit_at_infinity,
            max_order,
        }
    }

    /// `h^{(j)}(t)`.
    pub fn eval_deriv(&self, ctx: &PrecisionContext, j: u32, t: &Real) -> Result<Real> {
        if j > self.max_order {
            return Err(Error::domain(
                "eval_deriv",
                format!("{}: order {j} exceeds max_order {}", self.name, self.max_order),
            ));
        }
        if !t.is_finite() || *t <= 0 {
            return Err(Error::domain("eval_deriv", format!("t must be > 0, got {}", t.to_f64())));
        }
        (self.eval)(ctx, j, t)
    }

    /// `h(t) − h(∞)`, the quantity the checks work on.
    pub fn shifted(&self, ctx: &PrecisionContext, t: &Real) -> Result<Real> {
        Ok(self.eval_deriv(ctx, 0, t)? - ctx.from_rational(&self.limit_at_infinity))
    }

    /// `ln t − ψ(t)`; `h^{(j)} = ½(−1)^j j!/t^{j+1} − R_0^{(j+1)}`.
    pub fn ln_minus_psi() -> Self {
        FunctionFamily::new("lnminuspsi", BigRational::new(), BUILTIN_MAX_ORDER, |ctx, j, t| {
            let w = ctx.with_extra_digits(6);
            let tw = w.real(t);
            let mut head = w.factorial(j) / w.real(tw.clone().pow(j + 1)) / 2u32;
            if j % 2 == 1 {
                head = -head;
            }
            Ok(ctx.round(&(head - remainder_deriv(&w, 0, j + 1, &tw)?)))
        })
    }

    /// `φ(t) = −R_1′(t)`.
    pub fn phi() -> Self {
        let mut f = FunctionFamily::neg_remainder_prime(1).expect("n = 1 is registered");
        f.name = "phi".into();
        f
    }

    /// `R_n(t)`.
    pub fn remainder(n: u32) -> Result<Self> {
        check_n("remainder family", n, MAX_ORDER)?;
        Ok(FunctionFamily::new(format!("R:{n}"), BigRational::new(), BUILTIN_MAX_ORDER, move |ctx, j, t| {
            remainder_deriv(ctx, n, j, t)
        }))
    }

    /// `−R_n′(t)` for `n ≤ 6`.
    pub fn neg_remainder_prime(n: u32) -> Result<Self> {
        check_n("negRprime family", n, 6)?;
        Ok(FunctionFamily::new(
            format!("negRprime:{n}"),
            BigRational::new(),
            BUILTIN_MAX_ORDER - 1,
            move |ctx, j, t| Ok(-remainder_deriv(ctx, n, j + 1, t)?),
        ))
    }

    /// `(−1)^m R_n^{(m)}(t)`.
    pub fn signed_remainder_deriv(n: u32, m: u32) -> Result<Self> {
        check_n("dR family", n, MAX_ORDER)?;
        if m > BUILTIN_MAX_ORDER {
            return Err(Error::domain("dR family", format!("m must be <= {BUILTIN_MAX_ORDER}, got {m}")));
        }
        Ok(FunctionFamily::new(
            format!("dR:{n}:{m}"),
            BigRational::new(),
            BUILTIN_MAX_ORDER - m,
            move |ctx, j, t| {
                let v = remainder_deriv(ctx, n, j + m, t)?;
                Ok(if m % 2 == 1 { -v } else { v })
            },
        ))
    }

    /// Looks up a built-in by name: `lnminuspsi`, `phi`, `negR1prime`,
    /// `R:n`, `negRprime:n`, `dR:n:m`.
    pub fn builtin(name: &str) -> Result<Self> {
        let parts: Vec<&str> = name.split(':').collect();
        let num = |s: &str| -> Result<u32> {
            s.parse::<u32>()
                .map_err(|_| Error::domain("family", format!("bad index {s:?} in {name:?}")))
        };
        match parts.as_slice() {
            ["lnminuspsi"] => Ok(FunctionFamily::ln_minus_psi()),
            ["phi"] => Ok(FunctionFamily::phi()),
            ["negR1prime"] => {
                let mut f = FunctionFamily::neg_remainder_prime(1)?;
                f.name = "negR1prime".into();
                Ok(f)
            }
            ["R", n] => FunctionFamily::remainder(num(n)?),
            ["negRprime", n] => FunctionFamily::neg_remainder_prime(num(n)?),
            ["dR", n, m] => FunctionFamily::signed_remainder_deriv(num(n)?, num(m)?),
            _ => Err(Error::domain("family", format!("unknown function family {name:?}"))),
        }
    }
}

fn check_n(func: &'static str, n: u32, max: u32) -> Result<()> {
    if n > max {
        return Err(Error::domain(func, format!("n must be <= {max}, got {n}")));
    }
    Ok(())
}

/// Outcome of [`cm_check`].
#[derive(Debug, Clone, PartialEq)]
pub enum CmOutcome {
    Pass,
    /// `(−1)^j g^{(j)}(t) = value` fell below the tolerance.
    Fail { j: u32, t: Real, value: Real },
}

impl CmOutcome {
    pub fn passed(&self) -> bool {
        matches!(self, CmOutcome::Pass)
    }
}

/// `h − h(∞)` and its derivatives up to order `J` on a grid, computed once
/// and reused for every `α`.
#[derive(Debug, Clone)]
pub struct Samples {
    pub family: String,
    pub grid: GridSpec,
    pub points: Vec<Real>,
    /// `derivs[i][j] = h^{(j)}(points[i])`, with the limit already removed
    /// from `j = 0`.
    pub derivs: Vec<Vec<Real>>,
}

impl Samples {
    pub fn order(&self) -> u32 {
        self.derivs.first().map_or(0, |d| d.len() as u32 - 1)
    }

    /// Sign test of `g = t^α h` for orders `0..=order`.
    ///
    /// The sum `Σ_i C(j,i) ⟨α⟩_i t^{−i} h^{(j−i)}` is formed without the
    /// common factor `t^α`; it fails when `(−1)^j` times it is below
    /// `−tol · Σ|terms|`.
    pub fn check(&self, ctx: &PrecisionContext, alpha: f64, order: u32, tol: &Real) -> Result<CmOutcome> {
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(Error::domain("cm_check", format!("alpha must be >= 0, got {alpha}")));
        }
        if order > self.order() {
            return Err(Error::domain(
                "cm_check",
                format!("order {order} exceeds sampled order {}", self.order()),
            ));
        }
        let a = ctx.real(alpha);
        let fall: Vec<Real> = (0..=order).map(|i| falling(&a, i)).collect();
        let binom = binomial_rows(order);
        for (t, h) in self.points.iter().zip(&self.derivs) {
            let inv_t = ctx.real(t.clone().recip());
            let mut inv_pow = vec![ctx.one()];
            for i in 1..=order as usize {
                inv_pow.push(ctx.real(&inv_pow[i - 1] * &inv_t));
            }
            for j in 0..=order as usize {
                let mut sum = ctx.zero();
                let mut mag = ctx.zero();
                for i in 0..=j {
                    let term = ctx.real(&fall[i] * &inv_pow[i]) * &h[j - i] * binom[j][i];
                    mag += term.clone().abs();
                    sum += term;
                }
                if j % 2 == 1 {
                    sum = -sum;
                }
                if sum < -(mag * tol) {
                    let value = sum * ctx.pow(t, &a)?;
                    return Ok(CmOutcome::Fail {
                        j: j as u32,
                        t: t.clone(),
                        value,
                    });
                }
            }
        }
        Ok(CmOutcome::Pass)
    }

    /// `inf −t h′(t)/h(t)` over the grid points where `h ≠ 0`.
    pub fn first_deriv_bound(&self, ctx: &PrecisionContext) -> f64 {
        let mut best = f64::INFINITY;
        for (t, h) in self.points.iter().zip(&self.derivs) {
            if h[0].is_zero() || h.len() < 2 {
                continue;
            }
            let r = -(ctx.real(t * &h[1]) / &h[0]).to_f64();
            if r < best {
                best = r;
            }
        }
        best
    }
}

fn binomial_rows(order: u32) -> Vec<Vec<f64>> {
    let mut rows: Vec<Vec<f64>> = vec![vec![1.0]];
    for j in 1..=order as usize {
        let prev = &rows[j - 1];
        let mut row = vec![1.0; j + 1];
        for i in 1..j {
            row[i] = prev[i - 1] + prev[i];
        }
        rows.push(row);
    }
    rows
}

/// Evaluates the family and its first `order` derivatives on `grid`.
pub fn sample(ctx: &PrecisionContext, fam: &FunctionFamily, order: u32, grid: &GridSpec) -> Result<Samples> {
    if order > fam.max_order {
        return Err(Error::domain(
            "cm_check",
            format!("J = {order} exceeds max_order {} of {}", fam.max_order, fam.name),
        ));
    }
    let points = grid.points(ctx)?;
    let limit = ctx.from_rational(&fam.limit_at_infinity);
    let mut derivs = Vec::with_capacity(points.len());
    for t in &points {
        let mut row = Vec::with_capacity(order as usize + 1);
        for j in 0..=order {
            let mut v = fam.eval_deriv(ctx, j, t)?;
            if j == 0 {
                v -= &limit;
            }
            row.push(v);
        }
        derivs.push(row);
    }
    Ok(Samples {
        family: fam.name.clone(),
        grid: *grid,
        points,
        derivs,
    })
}

/// Checks `(−1)^j [t^α(h(t) − h(∞))]^{(j)} ≥ 0` for `j = 0..=J` on `grid`,
/// up to the relative tolerance described in [`Samples::check`].
pub fn cm_check(
    ctx: &PrecisionContext,
    fam: &FunctionFamily,
    alpha: f64,
    order: u32,
    grid: &GridSpec,
    tol: &Real,
) -> Result<CmOutcome> {
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::domain("cm_check", format!("alpha must be >= 0, got {alpha}")));
    }
    sample(ctx, fam, order, grid)?.check(ctx, alpha, order, tol)
}

/// The first violation seen at `failed_alpha`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub j: u32,
    pub t: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeBracket {
    pub family: String,
    pub passed_alpha: f64,
    pub failed_alpha: f64,
    pub resolution: f64,
    pub order_used: u32,
    pub grid: GridSpec,
    pub first_deriv_bound: f64,
    pub witness: Witness,
    /// Set for brackets of conjectured, unproved degrees.
    pub exploratory: bool,
}

impl DegreeBracket {
    pub fn width(&self) -> f64 {
        self.failed_alpha - self.passed_alpha
    }

    pub fn contains(&self, alpha: f64) -> bool {
        self.passed_alpha <= alpha && alpha <= self.failed_alpha
    }
}

/// Settings shared by the estimator entry points.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeSettings {
    pub order: u32,
    pub grid: GridSpec,
    pub tol: Real,
    pub resolution: f64,
}

impl DegreeSettings {
    /// J = 8, 400 log-spaced points on `[10⁻³, 10³]`, `tol = 10^{−digits/2}`,
    /// resolution 0.05.
    pub fn defaults(ctx: &PrecisionContext) -> Self {
        DegreeSettings {
            order: 8,
            grid: GridSpec {
                t_min: 1e-3,
                t_max: 1e3,
                count: 400,
            },
            tol: ctx.pow10(-(ctx.digits() as i32 / 2)),
            resolution: 0.05,
        }
    }
}

fn witness_of(outcome: &CmOutcome) -> Option<Witness> {
    match outcome {
        CmOutcome::Pass => None,
        CmOutcome::Fail { j, t, value } => Some(Witness {
            j: *j,
            t: t.to_f64(),
            value: value.to_f64(),
        }),
    }
}

/// Bisects `[alpha_lo, alpha_hi]` until the pass/fail bracket is no wider
/// than `resolution`.
pub fn degree_estimate(
    ctx: &PrecisionContext,
    fam: &FunctionFamily,
    alpha_lo: f64,
    alpha_hi: f64,
    settings: &DegreeSettings,
) -> Result<DegreeBracket> {
    let samples = sample(ctx, fam, settings.order, &settings.grid)?;
    degree_from_samples(ctx, &samples, alpha_lo, alpha_hi, settings)
}

/// [`degree_estimate`] on already sampled derivatives.
pub fn degree_from_samples(
    ctx: &PrecisionContext,
    samples: &Samples,
    alpha_lo: f64,
    alpha_hi: f64,
    settings: &DegreeSettings,
) -> Result<DegreeBracket> {
    if !(alpha_lo >= 0.0 && alpha_lo < alpha_hi && alpha_hi.is_finite()) {
        return Err(Error::domain(
            "degree_estimate",
            format!("need 0 <= alpha_lo < alpha_hi, got [{alpha_lo}, {alpha_hi}]"),
        ));
    }
    if !(settings.resolution > 0.0) {
        return Err(Error::domain("degree_estimate", "resolution must be > 0"));
    }
    let order = settings.order;
    let tol = &settings.tol;
    if let CmOutcome::Fail { j, t, .. } = samples.check(ctx, alpha_lo, order, tol)? {
        return Err(Error::Bracket(format!(
            "{}: check already fails at alpha_lo = {alpha_lo} (order {j}, t = {:e})",
            samples.family,
            t.to_f64()
        )));
    }
    let top = samples.check(ctx, alpha_hi, order, tol)?;
    let mut witness = witness_of(&top).ok_or_else(|| {
        Error::Bracket(format!(
            "{}: check still passes at alpha_hi = {alpha_hi}; no failing alpha to bracket",
            samples.family
        ))
    })?;
    let (mut lo, mut hi) = (alpha_lo, alpha_hi);
    while hi - lo > settings.resolution {
        let mid = 0.5 * (lo + hi);
        match samples.check(ctx, mid, order, tol)? {
            CmOutcome::Pass => lo = mid,
            fail => {
                hi = mid;
                witness = witness_of(&fail).expect("failure");
            }
        }
    }
    Ok(DegreeBracket {
        family: samples.family.clone(),
        passed_alpha: lo,
        failed_alpha: hi,
        resolution: settings.resolution,
        order_used: order,
        grid: samples.grid,
        first_deriv_bound: samples.first_deriv_bound(ctx),
        witness,
        exploratory: false,
    })
}

/// Conjectured degree of `(−1)^m R_n^{(m)}`: `m`, `m+1`, or `m + 2(n−1)`.
pub fn conjectured_degree(n: u32, m: u32) -> u32 {
    match n {
        0 => m,
        1 => m + 1,
        _ => m + 2 * (n - 1),
    }
}

/// Degree bracket of `(−1)^m R_n^{(m)}` around its conjectured value.
///
/// The search starts from `[c − 1, c + 1]` and widens by 1 on either side
/// (down to 0, up to `c + 4`) until it brackets. The result is marked
/// exploratory.
pub fn conjecture_probe(
    ctx: &PrecisionContext,
    n: u32,
    m: u32,
    settings: &DegreeSettings,
) -> Result<DegreeBracket> {
    if n > 6 || m > 4 {
        return Err(Error::domain("conjecture_probe", format!("need n <= 6 and m <= 4, got n={n}, m={m}")));
    }
    let fam = FunctionFamily::signed_remainder_deriv(n, m)?;
    let samples = sample(ctx, &fam, settings.order, &settings.grid)?;
    let c = f64::from(conjectured_degree(n, m));
    let mut lo = (c - 1.0).max(0.0);
    while lo > 0.0 && !samples.check(ctx, lo, settings.order, &settings.tol)?.passed() {
        lo = (lo - 1.0).max(0.0);
    }
    let mut hi = c + 1.0;
    while hi < c + 4.0 && samples.check(ctx, hi, settings.order, &settings.tol)?.passed() {
        hi += 1.0;
    }
    let mut b = degree_from_samples(ctx, &samples, lo, hi, settings)?;
    b.exploratory = true;
    Ok(b)
}

/// `h(10⁶) − h(∞)`, which should be small for a registered limit.
pub fn limit_residual(ctx: &PrecisionContext, fam: &FunctionFamily) -> Result<Real> {
    fam.shifted(ctx, &ctx.real(1e6))
}

/// `ψ^{(m)}` as a family, for tests and custom registrations.
pub fn polygamma_family(m: u32) -> FunctionFamily {
    let name = format!("polygamma:{m}");
    let sign_neg = m.is_multiple_of(2);
    // (−1)^{m+1} ψ^{(m)} is completely monotonic for m ≥ 1
    FunctionFamily::new(name, BigRational::new(), BUILTIN_MAX_ORDER, move |ctx, j, t| {
        let v = polygamma(ctx, m + j, t)?;
        Ok(if sign_neg { -v } else { v })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ctx() -> PrecisionContext {
        PrecisionContext::new(40).unwrap()
    }

    fn small(ctx: &PrecisionContext) -> DegreeSettings {
        DegreeSettings {
            grid: GridSpec::log(1e-3, 1e3, 60).unwrap(),
            ..DegreeSettings::defaults(ctx)
        }
    }

    #[test]
    fn builtin_lookup() {
        for name in ["lnminuspsi", "phi", "negR1prime", "R:0", "R:3", "negRprime:6", "dR:2:3"] {
            assert!(FunctionFamily::builtin(name).is_ok(), "{name}");
        }
        for name in ["negRprime:7", "psi", "R:x", "dR:1"] {
            assert!(FunctionFamily::builtin(name).is_err(), "{name}");
        }
    }

    #[test]
    fn ln_minus_psi_matches_direct() {
        let c = ctx();
        let f = FunctionFamily::ln_minus_psi();
        for t in [0.01, 1.0, 30.0] {
            let t = c.real(t);
            let direct = c.ln(&t).unwrap() - polygamma(&c, 0, &t).unwrap();
            assert!(c.real(f.eval_deriv(&c, 0, &t).unwrap() - &direct).abs() < c.pow10(-35));
            // h′ = 1/t − ψ′
            let d1 = c.real(t.clone().recip()) - polygamma(&c, 1, &t).unwrap();
            assert!(c.real(f.eval_deriv(&c, 1, &t).unwrap() - d1).abs() < c.pow10(-33));
        }
    }

    #[test]
    fn limits_vanish_far_out() {
        let c = ctx();
        for name in ["lnminuspsi", "phi", "R:0", "R:2", "negRprime:1", "negRprime:6"] {
            let f = FunctionFamily::builtin(name).unwrap();
            let r = limit_residual(&c, &f).unwrap();
            assert!(r.abs() < 1e-5, "{name}");
        }
    }

    #[test]
    fn order_overflow_is_domain_error() {
        let c = ctx();
        let f = FunctionFamily::neg_remainder_prime(2).unwrap();
        let g = GridSpec::log(1.0, 2.0, 2).unwrap();
        let r = cm_check(&c, &f, 1.0, f.max_order + 1, &g, &c.pow10(-20));
        assert!(matches!(r, Err(Error::Domain { .. })));
        assert!(matches!(cm_check(&c, &f, -1.0, 2, &g, &c.pow10(-20)), Err(Error::Domain { .. })));
    }

    #[test]
    fn ln_minus_psi_degree_one() {
        let c = ctx();
        let s = small(&c);
        let f = FunctionFamily::ln_minus_psi();
        assert!(cm_check(&c, &f, 1.0, 8, &s.grid, &s.tol).unwrap().passed());
        assert!(!cm_check(&c, &f, 1.1, 8, &s.grid, &s.tol).unwrap().passed());
    }

    #[test]
    fn phi_degree_two() {
        let c = ctx();
        let s = small(&c);
        let f = FunctionFamily::phi();
        assert!(cm_check(&c, &f, 2.0, 8, &s.grid, &s.tol).unwrap().passed());
        match cm_check(&c, &f, 2.1, 8, &s.grid, &s.tol).unwrap() {
            CmOutcome::Fail { value, .. } => assert!(value < 0),
            CmOutcome::Pass => panic!("2.1 should fail"),
        }
    }

    #[test]
    fn polygamma_family_is_cm() {
        let c = ctx();
        let s = small(&c);
        for m in 1..=3 {
            assert!(cm_check(&c, &polygamma_family(m), 0.0, 6, &s.grid, &s.tol).unwrap().passed());
        }
    }

    #[test]
    fn bracket_errors() {
        let c = ctx();
        let s = small(&c);
        let f = FunctionFamily::ln_minus_psi();
        assert!(matches!(degree_estimate(&c, &f, 1.2, 2.0, &s), Err(Error::Bracket(_))));
        assert!(matches!(degree_estimate(&c, &f, 0.1, 0.5, &s), Err(Error::Bracket(_))));
        assert!(matches!(degree_estimate(&c, &f, 1.0, 0.5, &s), Err(Error::Domain { .. })));
    }

    #[test]
    fn bracket_for_ln_minus_psi() {
        let c = ctx();
        let s = small(&c);
        let b = degree_estimate(&c, &FunctionFamily::ln_minus_psi(), 0.5, 1.5, &s).unwrap();
        assert!(b.width() <= 0.05 && b.contains(1.0), "{b:?}");
        assert!(b.passed_alpha <= b.first_deriv_bound + s.resolution);
        assert!(!b.exploratory);
    }

    #[test]
    fn r2_prime_between_three_and_four() {
        let c = ctx();
        let s = small(&c);
        let f = FunctionFamily::neg_remainder_prime(2).unwrap();
        let b = degree_estimate(&c, &f, 2.5, 4.5, &s).unwrap();
        assert!(b.passed_alpha >= 2.95 && b.failed_alpha <= 4.05, "{b:?}");
    }

    #[test]
    fn r0_first_derivative_bound_shrinks_toward_zero() {
        let c = PrecisionContext::new(30).unwrap();
        let f = FunctionFamily::remainder(0).unwrap();
        let mut last = f64::INFINITY;
        for lo in [1e-4, 1e-10, 1e-20] {
            let g = GridSpec::log(lo, 1e2, 12).unwrap();
            let b = sample(&c, &f, 1, &g).unwrap().first_deriv_bound(&c);
            assert!(b < last && b > 0.0);
            last = b;
        }
        assert!(last < 0.03);
    }

    #[test]
    fn probe_r0_second_derivative() {
        let c = ctx();
        let b = conjecture_probe(&c, 0, 2, &small(&c)).unwrap();
        assert!(b.exploratory && b.contains(2.0), "{b:?}");
    }

    #[test]
    fn bracket_serde_round_trip() {
        let c = ctx();
        let s = small(&c);
        let b = degree_estimate(&c, &FunctionFamily::phi(), 1.5, 2.5, &s).unwrap();
        let json = serde_json::to_string(&b).unwrap();
        let back: DegreeBracket = serde_json::from_str(&json).unwrap();
        assert_eq!(b, back);
    }

    fn fixtures() -> Vec<(FunctionFamily, Samples)> {
        let c = PrecisionContext::new(30).unwrap();
        let g = GridSpec::log(1e-3, 1e3, 24).unwrap();
        ["lnminuspsi", "phi", "R:1", "negRprime:2"]
            .iter()
            .map(|n| {
                let f = FunctionFamily::builtin(n).unwrap();
                let s = sample(&c, &f, 8, &g).unwrap();
                (f, s)
            })
            .collect()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn failure_persists_for_larger_alpha(which in 0usize..4, a in 0.0f64..5.0, d in 0.0f64..2.0, order in 1u32..=8) {
            thread_local!(static FX: Vec<(FunctionFamily, Samples)> = fixtures());
            let c = PrecisionContext::new(30).unwrap();
            let tol = c.pow10(-15);
            FX.with(|fx| {
                let s = &fx[which].1;
                let lo = s.check(&c, a, order, &tol).unwrap();
                let hi = s.check(&c, a + d, order, &tol).unwrap();
                prop_assert!(lo.passed() || !hi.passed());
                Ok(())
            })?;
        }

        #[test]
        fn pass_persists_for_lower_order(which in 0usize..4, a in 0.0f64..5.0, order in 1u32..=8, drop in 1u32..=8) {
            thread_local!(static FX: Vec<(FunctionFamily, Samples)> = fixtures());
            let c = PrecisionContext::new(30).unwrap();
            let tol = c.pow10(-15);
            let lower = order.saturating_sub(drop);
            FX.with(|fx| {
                let s = &fx[which].1;
                if s.check(&c, a, order, &tol).unwrap().passed() {
                    prop_assert!(s.check(&c, a, lower, &tol).unwrap().passed());
                }
                Ok(())
            })?;
        }
    }
}
