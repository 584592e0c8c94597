use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rug::Float;

use super::IntegralResult;
use crate::error::{Error, Result};
use crate::precision::{PrecisionContext, Real};

/// Integrand calls allowed per integral unless a caller says otherwise.
pub const DEFAULT_BUDGET: usize = 200_000;

const MAX_TS_LEVEL: u32 = 10;
const MIN_TS_LEVEL: u32 = 3;
const MAX_HALVINGS: u32 = 24;
const MAX_PANELS: usize = 100_000;
/// Half-periods per oscillatory panel.
const OSC_GROUP: u32 = 4;

/// Remaining integrand evaluations.
#[derive(Debug, Clone)]
pub struct Budget {
    limit: usize,
    used: usize,
}

impl Budget {
    pub fn new(limit: usize) -> Self {
        Budget { limit, used: 0 }
    }

    pub fn used(&self) -> usize {
        self.used
    }

    fn spend(&mut self, n: usize) -> Result<()> {
        self.used += n;
        if self.used > self.limit {
            return Err(Error::Integration {
                reason: format!("evaluation budget of {} exhausted", self.limit),
                achieved: f64::INFINITY,
            });
        }
        Ok(())
    }
}

/// `|f(v)| ≤ coeff · (1+v)^power · e^{−rate·v}` for `v ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailModel {
    pub coeff: f64,
    pub power: f64,
    pub rate: f64,
}

impl TailModel {
    /// Natural log of a bound on `∫_V^∞ |f|`, or `+∞` when the model gives
    /// no bound yet at `V`.
    fn log_tail(&self, v: f64) -> f64 {
        if self.coeff == 0.0 {
            return f64::NEG_INFINITY;
        }
        if self.power <= 0.0 {
            return self.coeff.ln() - self.rate * v - self.rate.ln();
        }
        // (1+x)^p e^{−rx} ≤ (1+V)^p e^{−rV} e^{−(r/2)(x−V)} once p/(1+V) ≤ r/2
        if self.power / (1.0 + v) > self.rate / 2.0 {
            return f64::INFINITY;
        }
        self.coeff.ln() + self.power * (1.0 + v).ln() - self.rate * v + (2.0 / self.rate).ln()
    }
}

fn log_of(x: &Real) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let (m, e) = x.to_f64_exp();
    m.abs().ln() + f64::from(e) * std::f64::consts::LN_2
}

struct GaussTable {
    /// Positive nodes with their weights; the rule has an even node count.
    nodes: Vec<(Float, Float)>,
}

fn gauss_order(ctx: &PrecisionContext) -> u32 {
    let n = (0.6 * f64::from(ctx.digits()) + 8.0).ceil() as u32;
    (n.clamp(16, 240) + 1) & !1
}

fn gauss_table(ctx: &PrecisionContext) -> Arc<GaussTable> {
    static CACHE: OnceLock<Mutex<HashMap<(u32, u32), Arc<GaussTable>>>> = OnceLock::new();
    let n = gauss_order(ctx);
    let key = (ctx.bits(), n);
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(t) = cache.lock().expect("gauss cache").get(&key) {
        return Arc::clone(t);
    }
    let table = Arc::new(build_gauss(ctx, n));
    cache
        .lock()
        .expect("gauss cache")
        .insert(key, Arc::clone(&table));
    table
}

fn build_gauss(ctx: &PrecisionContext, n: u32) -> GaussTable {
    let bits = ctx.bits() + 16;
    let tiny = Float::with_val(bits, Float::i_exp(1, -(bits as i32) + 6));
    let mut nodes = Vec::with_capacity(n as usize / 2);
    for i in 1..=n / 2 {
        let guess = (std::f64::consts::PI * (f64::from(i) - 0.25) / (f64::from(n) + 0.5)).cos();
        let mut x = Float::with_val(bits, guess);
        let mut deriv = Float::with_val(bits, 0);
        for _ in 0..100 {
            let (p, dp) = legendre(&x, n);
            let step = Float::with_val(bits, &p / &dp);
            x -= &step;
            deriv = dp;
            if step.abs() < tiny {
                let (_, dp) = legendre(&x, n);
                deriv = dp;
                break;
            }
        }
        let one_minus_x2 = Float::with_val(bits, 1u32 - Float::with_val(bits, &x * &x));
        let w = Float::with_val(bits, 2u32 / (one_minus_x2 * Float::with_val(bits, &deriv * &deriv)));
        nodes.push((ctx.real(&x), ctx.real(&w)));
    }
    GaussTable { nodes }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(x: &Float, n: u32) -> (Float, Float) {
    let bits = x.prec();
    let mut p0 = Float::with_val(bits, 1);
    let mut p1 = x.clone();
    for k in 2..=n {
        let a = Float::with_val(bits, x * &p1) * (2 * k - 1);
        let p2 = (a - Float::with_val(bits, &p0 * (k - 1))) / k;
        p0 = p1;
        p1 = p2;
    }
    let x2m1 = Float::with_val(bits, x * x) - 1u32;
    let dp = Float::with_val(bits, x * &p1 - &p0) * n / x2m1;
    (p1, dp)
}

/// Gauss–Legendre on one panel: `(value, Σ|w f| half)`.
fn gauss_panel(
    ctx: &PrecisionContext,
    f: &dyn Fn(&Real) -> Result<Real>,
    a: &Real,
    b: &Real,
    budget: &mut Budget,
) -> Result<(Real, Real)> {
    let table = gauss_table(ctx);
    budget.spend(2 * table.nodes.len())?;
    let half = ctx.real(b - a) / 2u32;
    let mid = ctx.real(a + b) / 2u32;
    let mut sum = ctx.zero();
    let mut abs = ctx.zero();
    for (x, w) in &table.nodes {
        let dx = half.clone() * x;
        let fl = f(&ctx.real(&mid - &dx))?;
        let fr = f(&ctx.real(&mid + &dx))?;
        abs += (fl.clone().abs() + fr.clone().abs()) * w;
        sum += (fl + fr) * w;
    }
    Ok((sum * &half, abs * half.abs()))
}

#[allow(clippy::too_many_arguments)]
fn gauss_adaptive(
    ctx: &PrecisionContext,
    f: &dyn Fn(&Real) -> Result<Real>,
    a: &Real,
    b: &Real,
    whole: Real,
    tol: &Real,
    depth: u32,
    budget: &mut Budget,
) -> Result<(Real, Real, Real)> {
    let mid = ctx.real(a + b) / 2u32;
    let (l, la) = gauss_panel(ctx, f, a, &mid, budget)?;
    let (r, ra) = gauss_panel(ctx, f, &mid, b, budget)?;
    let split = l.clone() + &r;
    let est = (split.clone() - &whole).abs();
    if est <= *tol || depth >= MAX_HALVINGS {
        return Ok((split, est, la + ra));
    }
    let half_tol = tol.clone() / 2u32;
    let (lv, le, labs) = gauss_adaptive(ctx, f, a, &mid, l, &half_tol, depth + 1, budget)?;
    let (rv, re, rabs) = gauss_adaptive(ctx, f, &mid, b, r, &half_tol, depth + 1, budget)?;
    Ok((lv + rv, le + re, labs + rabs))
}

/// Gauss–Legendre with interval halving on `[a, b]`.
pub(crate) fn gauss_interval(
    ctx: &PrecisionContext,
    f: &dyn Fn(&Real) -> Result<Real>,
    a: &Real,
    b: &Real,
    tol: &Real,
    budget: &mut Budget,
) -> Result<(Real, Real)> {
    let (whole, _) = gauss_panel(ctx, f, a, b, budget)?;
    let (v, e, abs) = gauss_adaptive(ctx, f, a, b, whole, tol, 0, budget)?;
    let rounding = abs * ctx.epsilon() * 4u32;
    Ok((v, e + rounding))
}

struct TanhSinhLevel {
    /// `(weight, 1 − tanh(π/2 sinh s))` for the abscissas new at this level.
    nodes: Vec<(Float, Float)>,
}

fn tanh_sinh_s_max(ctx: &PrecisionContext) -> f64 {
    // weights below 10^{−(2·digits+20)} are dropped
    let target = -(2.0 * f64::from(ctx.digits()) + 20.0) * std::f64::consts::LN_10;
    let mut s = 0.0f64;
    loop {
        let u = std::f64::consts::FRAC_PI_2 * s.sinh();
        let log_w = std::f64::consts::FRAC_PI_2.ln() + s.cosh().ln() + 2.0 * std::f64::consts::LN_2
            - 2.0 * u;
        if log_w < target {
            return s;
        }
        s += 0.01;
    }
}

fn tanh_sinh_level(ctx: &PrecisionContext, level: u32) -> Arc<TanhSinhLevel> {
    static CACHE: OnceLock<Mutex<HashMap<(u32, u32), Arc<TanhSinhLevel>>>> = OnceLock::new();
    let key = (ctx.bits(), level);
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(t) = cache.lock().expect("tanh-sinh cache").get(&key) {
        return Arc::clone(t);
    }
    let s_max = tanh_sinh_s_max(ctx);
    let step = 0.5f64.powi(level as i32);
    let half_pi = ctx.pi() / 2u32;
    let mut nodes = Vec::new();
    let mut j = 1u64;
    loop {
        let idx = if level == 0 { j } else { 2 * j - 1 };
        let s_f = idx as f64 * step;
        if s_f > s_max {
            break;
        }
        let s = ctx.real(idx) / ctx.real(2u32).pow_u(level);
        let u = half_pi.clone() * s.clone().sinh();
        let cosh_u = u.clone().cosh();
        let w = half_pi.clone() * s.cosh() / (cosh_u.clone() * &cosh_u);
        // 1 − tanh u = 2/(e^{2u} + 1)
        let q = ctx.real(2) / (ctx.real(u * 2u32).exp() + 1u32);
        nodes.push((w, q));
        j += 1;
    }
    let lvl = Arc::new(TanhSinhLevel { nodes });
    cache
        .lock()
        .expect("tanh-sinh cache")
        .insert(key, Arc::clone(&lvl));
    lvl
}

trait PowU {
    fn pow_u(self, e: u32) -> Self;
}

impl PowU for Float {
    fn pow_u(self, e: u32) -> Self {
        use rug::ops::Pow;
        self.pow(e)
    }
}

/// Tanh-sinh on `[a, b]`, refining the step until successive levels agree
/// to `tol`. Returns `(value, est_error)`.
pub(crate) fn tanh_sinh(
    ctx: &PrecisionContext,
    f: &dyn Fn(&Real) -> Result<Real>,
    a: &Real,
    b: &Real,
    tol: &Real,
    budget: &mut Budget,
) -> Result<(Real, Real)> {
    let half = ctx.real(b - a) / 2u32;
    let mid = ctx.real(a + b) / 2u32;
    budget.spend(1)?;
    let fc = f(&mid)?;
    let half_pi = ctx.pi() / 2u32;
    let mut sum = fc.clone() * &half_pi;
    let mut abs = fc.abs() * &half_pi;
    let mut prev: Option<Real> = None;
    let mut step = ctx.one();
    for level in 0..=MAX_TS_LEVEL {
        if level > 0 {
            step /= 2u32;
        }
        let lvl = tanh_sinh_level(ctx, level);
        budget.spend(2 * lvl.nodes.len())?;
        for (w, q) in &lvl.nodes {
            let dx = half.clone() * q;
            let fl = f(&ctx.real(a + &dx))?;
            let fr = f(&ctx.real(b - &dx))?;
            abs += (fl.clone().abs() + fr.clone().abs()) * w;
            sum += (fl + fr) * w;
        }
        let current = sum.clone() * &step * &half;
        if let Some(p) = prev.take() {
            let diff = (current.clone() - p).abs();
            if level >= MIN_TS_LEVEL && diff <= *tol {
                let rounding = abs * &step * half.abs() * ctx.epsilon() * 4u32;
                return Ok((current, diff + rounding));
            }
            if level == MAX_TS_LEVEL {
                return Err(Error::Integration {
                    reason: format!("tanh-sinh did not settle on [{}, {}]", a.to_f64(), b.to_f64()),
                    achieved: diff.to_f64(),
                });
            }
        }
        prev = Some(current);
    }
    unreachable!("loop returns at the last level")
}

/// `∫_a^b f` by Gauss–Legendre with interval halving.
pub fn integrate_finite(
    ctx: &PrecisionContext,
    f: &dyn Fn(&Real) -> Result<Real>,
    a: &Real,
    b: &Real,
    tol: &Real,
    budget: &mut Budget,
) -> Result<IntegralResult> {
    let start = budget.used();
    let (value, est_error) = gauss_interval(ctx, f, a, b, tol, budget)?;
    finish(value, est_error, tol, budget.used() - start)
}

fn finish(value: Real, est_error: Real, tol: &Real, evaluations: usize) -> Result<IntegralResult> {
    if est_error > *tol {
        return Err(Error::Integration {
            reason: format!("requested tolerance {:.3e} not reached", tol.to_f64()),
            achieved: est_error.to_f64(),
        });
    }
    Ok(IntegralResult {
        value,
        est_error,
        evaluations,
    })
}

/// Integrates over consecutive panels `edges[i]..edges[i+1]`; the first
/// panel uses tanh-sinh when it starts at the origin.
fn integrate_panels(
    ctx: &PrecisionContext,
    f: &dyn Fn(&Real) -> Result<Real>,
    edges: &[Real],
    tol: &Real,
    budget: &mut Budget,
) -> Result<(Real, Real)> {
    let total = ctx.real(&edges[edges.len() - 1] - &edges[0]);
    let mut value = ctx.zero();
    let mut err = ctx.zero();
    for (i, pair) in edges.windows(2).enumerate() {
        let (a, b) = (&pair[0], &pair[1]);
        let share = tol.clone() * ctx.real(b - a) / &total;
        let (v, e) = if i == 0 && a.is_zero() {
            tanh_sinh(ctx, f, a, b, &share, budget)?
        } else {
            gauss_interval(ctx, f, a, b, &share, budget)?
        };
        value += v;
        err += e;
    }
    Ok((value, err))
}

/// Smallest `V` from the doubling sequence with a tail bound below `target`.
fn panel_edges(ctx: &PrecisionContext, tail: &TailModel, log_target: f64, first: f64) -> Result<Vec<Real>> {
    if !(tail.rate > 0.0) {
        return Err(Error::domain("quadrature", "tail decay rate must be > 0"));
    }
    let cap = (4.0 / tail.rate).max(1.0);
    let mut edges = vec![ctx.zero()];
    let mut x = first;
    let mut width = first;
    loop {
        edges.push(ctx.real(x));
        if x >= 1.0 && tail.log_tail(x) < log_target {
            return Ok(edges);
        }
        if edges.len() > MAX_PANELS {
            return Err(Error::Integration {
                reason: "tail bound never dropped below tolerance".into(),
                achieved: tail.log_tail(x).exp(),
            });
        }
        width = (width * 2.0).min(cap).max(width);
        x += width;
    }
}

/// `∫₀^∞ f` for an integrand obeying `tail` beyond `v = 1`.
pub fn integrate_semi_infinite(
    ctx: &PrecisionContext,
    f: &dyn Fn(&Real) -> Result<Real>,
    tail: TailModel,
    tol: &Real,
    budget: &mut Budget,
) -> Result<IntegralResult> {
    let start = budget.used();
    let log_target = log_of(tol) + (0.1f64).ln();
    let edges = panel_edges(ctx, &tail, log_target, 1.0)?;
    let last = edges.last().expect("edges non-empty").to_f64();
    let tail_bound = ctx.real(tail.log_tail(last).exp());
    let panel_tol = tol.clone() * 0.9f64;
    let (value, err) = integrate_panels(ctx, f, &edges, &panel_tol, budget)?;
    finish(value, err + tail_bound, tol, budget.used() - start)
}

/// `∫₀^∞ f` where `f = g · osc` with `|osc| ≤ 1` vanishing at
/// `first_zero + k · half_period`; `tail` bounds `|g|`.
pub fn integrate_oscillatory(
    ctx: &PrecisionContext,
    f: &dyn Fn(&Real) -> Result<Real>,
    first_zero: &Real,
    half_period: &Real,
    tail: TailModel,
    tol: &Real,
    budget: &mut Budget,
) -> Result<IntegralResult> {
    if *half_period <= 0 || *first_zero <= 0 {
        return Err(Error::domain("quadrature", "oscillation spacing must be > 0"));
    }
    let step = half_period.clone() * OSC_GROUP;
    if step >= 1 {
        return integrate_semi_infinite(ctx, f, tail, tol, budget);
    }
    let start = budget.used();
    let log_target = log_of(tol) + (0.1f64).ln();
    let mut edges = vec![ctx.zero(), first_zero.clone()];
    let mut k = 1u32;
    loop {
        let x = ctx.real(first_zero + step.clone() * k);
        let xf = x.to_f64();
        edges.push(x);
        if xf >= 1.0 && tail.log_tail(xf) < log_target {
            break;
        }
        if edges.len() > MAX_PANELS {
            return Err(Error::Integration {
                reason: "too many oscillation panels".into(),
                achieved: tail.log_tail(xf).exp(),
            });
        }
        k += 1;
    }
    let last = edges.last().expect("edges non-empty").to_f64();
    let tail_bound = ctx.real(tail.log_tail(last).exp());
    let panel_tol = tol.clone() * 0.9f64;
    let (value, err) = integrate_panels(ctx, f, &edges, &panel_tol, budget)?;
    finish(value, err + tail_bound, tol, budget.used() - start)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_rule_is_exact_for_polynomials() {
        let c = PrecisionContext::default();
        let mut b = Budget::new(DEFAULT_BUDGET);
        let f = |x: &Real| Ok(x.clone().square() * x.clone().square() * 5u32);
        let (v, _) = gauss_panel(&c, &f, &c.zero(), &c.real(2), &mut b).unwrap();
        assert!((v - 32u32).abs() < c.pow10(-45));
    }

    #[test]
    fn tanh_sinh_integrates_log_singularity() {
        // ∫₀¹ ln x dx = −1
        let c = PrecisionContext::default();
        let mut b = Budget::new(DEFAULT_BUDGET);
        let f = |x: &Real| c.ln(x);
        let (v, e) = tanh_sinh(&c, &f, &c.zero(), &c.one(), &c.pow10(-40), &mut b).unwrap();
        assert!((v + 1u32).abs() < c.pow10(-40));
        assert!(e < c.pow10(-40));
    }

    #[test]
    fn budget_exhaustion_is_an_integration_error() {
        let c = PrecisionContext::default();
        let mut b = Budget::new(50);
        let f = |x: &Real| Ok(x.clone());
        let r = integrate_finite(&c, &f, &c.zero(), &c.one(), &c.pow10(-30), &mut b);
        assert!(matches!(r, Err(Error::Integration { .. })));
    }

    #[test]
    fn oscillatory_panels_match_closed_form() {
        // ∫₀^∞ e^{−v} cos(40 v) dv = 1/(1 + 1600)
        let c = PrecisionContext::default();
        let mut b = Budget::new(DEFAULT_BUDGET);
        let w = c.real(40);
        let f = |v: &Real| Ok(c.exp(&c.real(-v.clone())).unwrap() * c.cos(&(v.clone() * &w)).unwrap());
        let hp = c.pi() / &w;
        let z0 = hp.clone() / 2u32;
        let tail = TailModel { coeff: 1.0, power: 0.0, rate: 1.0 };
        let r = integrate_oscillatory(&c, &f, &z0, &hp, tail, &c.pow10(-35), &mut b).unwrap();
        let exact = c.one() / 1601u32;
        assert!((r.value - exact).abs() < c.pow10(-35));
    }
}
