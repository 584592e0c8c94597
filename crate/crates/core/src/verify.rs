//! Identity suites behind `cmlab verify`: each check yields one record with
//! its deviation, tolerance and verdict.

use std::fmt;
use std::str::FromStr;

use rug::ops::Pow;
use rug::Rational;
use serde::{Deserialize, Serialize};

use crate::combinatorics::bernoulli;
use crate::error::{Error, Result};
use crate::gammakit::{binet_check, digamma, ln_gamma, psi_integral_check};
use crate::kernels::{bose_derivative, f_kernel_with, k2_derivative_chain, sign_scan, KernelForm, KernelSpec};
use crate::precision::{format_sci, PrecisionContext, Real};
use crate::quadrature::{
    bose_moment, sin_kernel_closed_form, sin_kernel_integral, verify_degree_representation, zeta_bound,
    zeta_bound_inequalities, GridSpec,
};
use crate::remainders::{tail_limits_with, TailExponents};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Bose,
    Laprep,
    K2chain,
    Ksigns,
    Sinkernel,
    Zetabound,
    Taillimits,
    Binet,
    Psiint,
    Stirling,
    Fseries,
}

impl Suite {
    pub const ALL: [Suite; 11] = [
        Suite::Bose,
        Suite::Laprep,
        Suite::K2chain,
        Suite::Ksigns,
        Suite::Sinkernel,
        Suite::Zetabound,
        Suite::Taillimits,
        Suite::Binet,
        Suite::Psiint,
        Suite::Stirling,
        Suite::Fseries,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Bose => "bose",
            Suite::Laprep => "laprep",
            Suite::K2chain => "k2chain",
            Suite::Ksigns => "ksigns",
            Suite::Sinkernel => "sinkernel",
            Suite::Zetabound => "zetabound",
            Suite::Taillimits => "taillimits",
            Suite::Binet => "binet",
            Suite::Psiint => "psiint",
            Suite::Stirling => "stirling",
            Suite::Fseries => "fseries",
        }
    }

    /// `all` expands to every suite.
    pub fn parse_list(s: &str) -> Result<Vec<Suite>> {
        let mut out = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            if part == "all" {
                out.extend(Suite::ALL);
            } else {
                out.push(part.parse()?);
            }
        }
        if out.is_empty() {
            return Err(Error::domain("verify", "empty suite list"));
        }
        out.dedup();
        Ok(out)
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::domain("verify", format!("unknown suite {s:?}")))
    }
}

/// One verified identity. Numbers are decimal strings so that reports
/// round-trip exactly.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    /// The identity being checked, written out.
    pub paper_anchor: String,
    pub max_deviation: String,
    pub tolerance: String,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    /// Replaces every default tolerance.
    pub tol: Option<f64>,
    /// Adds the search for a negative `p = 4` sin-kernel integral.
    pub find_negative: bool,
    /// Significant digits in the record strings.
    pub sig: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            tol: None,
            find_negative: false,
            sig: 25,
        }
    }
}

struct Recorder<'a> {
    ctx: &'a PrecisionContext,
    opts: &'a VerifyOptions,
    out: Vec<CheckRecord>,
}

impl Recorder<'_> {
    fn tol(&self, default: f64) -> Real {
        self.ctx.real(self.opts.tol.unwrap_or(default))
    }

    /// Passes when `deviation ≤ tol`.
    fn within(&mut self, name: String, anchor: &str, res: Result<Real>, default_tol: f64, note: Option<String>) {
        let tol = self.tol(default_tol);
        match res {
            Ok(dev) => {
                let pass = dev.is_finite() && dev <= tol;
                self.push(name, anchor, &dev, &tol, pass, note);
            }
            Err(e) => self.failed(name, anchor, &tol, e),
        }
    }

    fn push(&mut self, name: String, anchor: &str, dev: &Real, tol: &Real, pass: bool, note: Option<String>) {
        self.out.push(CheckRecord {
            name,
            paper_anchor: anchor.to_string(),
            max_deviation: format_sci(dev, self.opts.sig),
            tolerance: format_sci(tol, self.opts.sig),
            pass,
            note,
        });
    }

    fn failed(&mut self, name: String, anchor: &str, tol: &Real, e: Error) {
        self.out.push(CheckRecord {
            name,
            paper_anchor: anchor.to_string(),
            max_deviation: "nan".into(),
            tolerance: format_sci(tol, self.opts.sig),
            pass: false,
            note: Some(e.to_string()),
        });
    }

    fn fmt(&self, x: &Real) -> String {
        format_sci(x, self.opts.sig)
    }
}

/// Runs `suites` in order.
pub fn run_suites(ctx: &PrecisionContext, suites: &[Suite], opts: &VerifyOptions) -> Vec<CheckRecord> {
    let mut rec = Recorder {
        ctx,
        opts,
        out: Vec::new(),
    };
    for s in suites {
        match s {
            Suite::Bose => bose(&mut rec),
            Suite::Laprep => laprep(&mut rec),
            Suite::K2chain => k2chain(&mut rec),
            Suite::Ksigns => ksigns(&mut rec),
            Suite::Sinkernel => sinkernel(&mut rec),
            Suite::Zetabound => zetabound(&mut rec),
            Suite::Taillimits => taillimits(&mut rec),
            Suite::Binet => oracle(&mut rec, true),
            Suite::Psiint => oracle(&mut rec, false),
            Suite::Stirling => stirling(&mut rec),
            Suite::Fseries => fseries(&mut rec),
        }
    }
    rec.out
}

fn quad_tol(ctx: &PrecisionContext) -> Real {
    ctx.pow10(-(ctx.digits() as i32 - 8))
}

fn bose(rec: &mut Recorder) {
    let ctx = rec.ctx;
    const ANCHOR: &str = "∫₀^∞ w^{2k−1}/(e^{2πw} − 1) dw = (−1)^{k−1} B_{2k}/(4k)";
    for k in 1..=6u32 {
        let res = bose_moment(ctx, &ctx.real(2 * k - 1), &quad_tol(ctx)).map(|r| {
            let mut exact = ctx.from_rational(&bernoulli(2 * k)) / (4 * k);
            if k % 2 == 0 {
                exact = -exact;
            }
            ctx.real(r.value - exact).abs()
        });
        rec.within(format!("bose-moment k={k}"), ANCHOR, res, 1e-30, None);
    }
}

fn laprep(rec: &mut Recorder) {
    let ctx = rec.ctx;
    const ANCHOR: &str = "t^{2n−1}[−R_n′(t)] = 2∫₀^∞ e^{−tv} ∫₀^∞ w^{2n−1}[1 − cos(wv)]/(e^{2πw} − 1) dw dv";
    for n in 1..=3u32 {
        for t in [0.5, 1.0, 10.0] {
            let tol = rec.tol(1e-15);
            let res = verify_degree_representation(ctx, n, &ctx.real(t), &tol);
            rec.within(format!("laplace-representation n={n} t={t}"), ANCHOR, res, 1e-15, None);
        }
    }
}

fn k2chain(rec: &mut Recorder) {
    let ctx = rec.ctx;
    const ANCHOR: &str = "E_0 = [(e^v−1)³ v³ K_2(v)]′, E_i = (E_0 e^{−v})^{(i)}; E_0..E_3 → 0 as v → 0⁺, \
                          E_4 = 96e^v(e^v − 1 − v − (9/16)v²/2! − (1/8)v³/3!) > 0";
    match k2_derivative_chain(ctx, &ctx.real(1e-6)) {
        Ok(ch) => {
            for i in 0..4 {
                let dev = ctx.real(&*ch.values[i].as_abs());
                rec.within(format!("k2-chain E_{i}(1e-6) vanishes"), ANCHOR, Ok(dev), 1e-15, None);
            }
        }
        Err(e) => {
            let tol = rec.tol(1e-15);
            rec.failed("k2-chain vanishes".into(), ANCHOR, &tol, e);
        }
    }
    let grid = GridSpec {
        t_min: 1e-2,
        t_max: 1e2,
        count: 100,
    };
    let res = grid.points(ctx).and_then(|pts| {
        let mut min: Option<Real> = None;
        for v in &pts {
            let e4 = k2_derivative_chain(ctx, v)?.values[4].clone();
            if min.as_ref().is_none_or(|m| e4 < *m) {
                min = Some(e4);
            }
        }
        Ok(min.expect("grid has points"))
    });
    positivity(rec, "k2-chain E_4 > 0 on 100 points of [1e-2, 1e2]".into(), ANCHOR, res, 0.0);
}

/// Strict positivity when `floor` is 0, otherwise `min ≥ −floor`.
fn positivity(rec: &mut Recorder, name: String, anchor: &str, min: Result<Real>, floor: f64) {
    let ctx = rec.ctx;
    let tol = rec.tol(floor);
    match min {
        Ok(min) => {
            let violation = ctx.real(-&min).max(&ctx.zero());
            let pass = if tol.is_zero() { min > 0 } else { min >= -tol.clone() };
            let note = Some(format!("min={}", rec.fmt(&min)));
            rec.push(name, anchor, &violation, &tol, pass, note);
        }
        Err(e) => rec.failed(name, anchor, &tol, e),
    }
}

fn ksigns(rec: &mut Recorder) {
    let ctx = rec.ctx;
    let grid = GridSpec {
        t_min: 1e-2,
        t_max: 1e2,
        count: 400,
    };
    let res = sign_scan(ctx, 2, &grid).map(|r| r.min_value);
    positivity(
        rec,
        "K_2 > 0 on 400 points of [1e-2, 1e2]".into(),
        "K_2(v) = 2/v³ − 2/(e^v−1)³ − 3/(e^v−1)² − 1/(e^v−1) > 0",
        res,
        0.0,
    );
    for n in 1..=4u32 {
        let res = sign_scan(ctx, 2 * n - 1, &grid).map(|r| r.signed_min.expect("odd order has a sign"));
        positivity(
            rec,
            format!("(−1)^{{n−1}} K_{} >= 0, n={n}", 2 * n - 1),
            "K_{2n−1}(v) = (−1)^{n−1} 2∫₀^∞ w^{2n−1}[1 − cos(wv)]/(e^{2πw} − 1) dw",
            res,
            1e-25,
        );
    }
}

fn sinkernel(rec: &mut Recorder) {
    let ctx = rec.ctx;
    const ANCHOR: &str = "∫₀^∞ u² sin(su)/(e^u − 1) du ≥ 0; the p = 4 analogue is negative somewhere";
    let res = [0.5, 1.0, 5.0, 20.0]
        .iter()
        .map(|s| sin_kernel_integral(ctx, 2, &ctx.real(*s), &quad_tol(ctx)).map(|r| r.value))
        .collect::<Result<Vec<_>>>()
        .map(|vals| vals.into_iter().fold(ctx.real(f64::INFINITY), |a, b| a.min(&b)));
    positivity(rec, "sin-kernel p=2 non-negative".into(), ANCHOR, res, 1e-20);
    if !rec.opts.find_negative {
        return;
    }
    // step through (0, 30]; the tail behaves like −12/s⁵
    let tol = rec.tol(1e-20);
    let name = "sin-kernel p=4 negative value".to_string();
    for i in 1..=120u32 {
        let s = ctx.real(i) / 4u32;
        let q = match sin_kernel_integral(ctx, 4, &s, &quad_tol(ctx)) {
            Ok(q) => q.value,
            Err(e) => return rec.failed(name, ANCHOR, &tol, e),
        };
        if q < 0 {
            // confirm the sign against the closed form
            let res = sin_kernel_closed_form(ctx, 4, &s).map(|f| ctx.real(&q - f).abs());
            let note = Some(format!("s={} value={}", rec.fmt(&s), rec.fmt(&q)));
            return rec.within(name, ANCHOR, res, 1e-20, note);
        }
    }
    let nan = ctx.real(f64::NAN);
    rec.push(name, ANCHOR, &nan, &tol, false, Some("no negative value on (0, 30]".into()));
}

fn zetabound(rec: &mut Recorder) {
    let ctx = rec.ctx;
    const ANCHOR: &str = "(−1)^n/2·(1/v − ½coth(v/2))^{(2n−1)} < Γ(2n)ζ(2n)/(2π)^{2n}, likewise for the Bose \
                          and Stirling-number forms";
    let exact = zeta_bound(1).map(|b| {
        let d = &b - Rational::from((1, 24));
        ctx.from_rational(&d).abs()
    });
    rec.within("zeta-bound n=1 equals 1/24".into(), ANCHOR, exact, 0.0, None);
    let grid = GridSpec {
        t_min: 1e-3,
        t_max: 1e3,
        count: 200,
    };
    for n in 1..=4u32 {
        let res = zeta_bound_inequalities(ctx, n, &grid).map(|r| {
            r.slack
                .iter()
                .map(|s| s.min_slack.clone())
                .fold(ctx.real(f64::INFINITY), |a, b| a.min(&b))
        });
        positivity(rec, format!("zeta-bound inequalities n={n}"), ANCHOR, res, 0.0);
    }
}

fn taillimits(rec: &mut Recorder) {
    let ctx = rec.ctx;
    const ANCHOR: &str = "t^{2n+2}R_n′(t) → (−1)^{n+1}B_{2n+2}/(2n+2) as t → ∞, \
                          t^{2n}R_n′(t) → (−1)^n B_{2n}/(2n) as t → 0⁺";
    for n in 1..=3u32 {
        match tail_limits_with(ctx, n, TailExponents::leading_order(n)) {
            Ok(lims) => {
                for l in lims {
                    let note = Some(format!("t={:e} value={}", l.t.to_f64(), rec.fmt(&l.value)));
                    rec.within(format!("tail-limit n={n} {}", l.expression), ANCHOR, Ok(l.deviation()), 1e-6, note);
                }
            }
            Err(e) => {
                let tol = rec.tol(1e-6);
                rec.failed(format!("tail-limit n={n}"), ANCHOR, &tol, e);
            }
        }
    }
}

fn oracle(rec: &mut Recorder, binet: bool) {
    let ctx = rec.ctx;
    let grid = GridSpec {
        t_min: 1e-2,
        t_max: 1e2,
        count: 20,
    };
    let res = grid.points(ctx).and_then(|pts| {
        let mut worst = ctx.zero();
        for t in &pts {
            let d = if binet {
                binet_check(ctx, t)? - ln_gamma(ctx, t)?
            } else {
                psi_integral_check(ctx, t)? - digamma(ctx, t)?
            };
            worst = worst.max(&ctx.real(d.abs()));
        }
        Ok(worst)
    });
    if binet {
        rec.within(
            "binet integral vs ln Γ on 20 points".into(),
            "ln Γ(t) = (t − ½)ln t − t + ½ln 2π + ∫₀^∞ (1/(e^u−1) − 1/u + ½) e^{−tu}/u du",
            res,
            1e-30,
            None,
        );
    } else {
        rec.within(
            "ψ integral vs ψ on 20 points".into(),
            "ψ(t) = ln t + ∫₀^∞ (1/v − 1/(1 − e^{−v})) e^{−tv} dv",
            res,
            1e-30,
            None,
        );
    }
}

/// Central-difference weights for the `k`-th derivative on offsets
/// `−p..=p`, from the moment conditions `Σ w_i i^m = k!·[m = k]`.
fn fd_weights(k: u32, p: i32) -> Vec<Rational> {
    let size = (2 * p + 1) as usize;
    let mut a: Vec<Vec<Rational>> = (0..size)
        .map(|m| {
            let mut row: Vec<Rational> = (-p..=p).map(|i| Rational::from(rug::Integer::from(i).pow(m as u32))).collect();
            let rhs = if m as u32 == k {
                Rational::from(rug::Integer::from(rug::Integer::factorial(k)))
            } else {
                Rational::new()
            };
            row.push(rhs);
            row
        })
        .collect();
    for col in 0..size {
        let piv = (col..size).find(|&r| a[r][col] != 0).expect("Vandermonde is regular");
        a.swap(col, piv);
        let lead = a[col][col].clone();
        for x in a[col].iter_mut() {
            *x /= &lead;
        }
        for r in 0..size {
            if r != col && a[r][col] != 0 {
                let f = a[r][col].clone();
                for c in col..=size {
                    let sub = Rational::from(&f * &a[col][c]);
                    a[r][c] -= sub;
                }
            }
        }
    }
    a.into_iter().map(|row| row[size].clone()).collect()
}

fn stirling(rec: &mut Recorder) {
    let ctx = rec.ctx;
    const ANCHOR: &str = "(1/(e^v−1))^{(k)} = (−1)^k Σ_{p=1}^{k+1} (p−1)! S(k+1,p) (1/(e^v−1))^p";
    let h_f = 1e-5;
    for k in 1..=8u32 {
        // enough points for an error of order h⁴ or better
        let p = ((k + 4) / 2) as i32;
        let w = fd_weights(k, p);
        // the stencil cancels about k·5 digits; carry them
        let fine = ctx.with_extra_digits(5 * k + 20);
        let h = fine.parse("1e-5").expect("literal");
        let res = (|| -> Result<Real> {
            let mut worst = ctx.zero();
            for v in [0.5, 1.0, 3.0] {
                let v = fine.real(v);
                let mut acc = fine.zero();
                for (i, wi) in (-p..=p).zip(&w) {
                    let x = fine.real(&v + fine.real(&h * i));
                    acc += fine.exp_m1(&x)?.recip() * fine.from_rational(wi);
                }
                let fd = acc / fine.real(h.clone().pow(k));
                let exact = bose_derivative(ctx, k, &ctx.real(&v))?;
                let scale = bose_derivative(ctx, k + 4, &ctx.real(&v))?.abs() + ctx.real(&*exact.as_abs());
                let rel = ctx.real(fd - &exact).abs() / (scale * ctx.real(h_f).pow(4u32));
                worst = worst.max(&rel);
            }
            Ok(worst)
        })();
        rec.within(
            format!("bose derivative k={k} vs finite differences, h=1e-5"),
            ANCHOR,
            res,
            1.0,
            Some("deviation is |fd − formula| / (h⁴ (|b^{(k+4)}| + |b^{(k)}|))".into()),
        );
    }
}

fn fseries(rec: &mut Recorder) {
    let ctx = rec.ctx;
    let v = ctx.real(0.4);
    for n in 0..=4u32 {
        let res = (|| -> Result<Real> {
            let a = f_kernel_with(ctx, &KernelSpec::new(n, KernelForm::Series), &v)?;
            let b = f_kernel_with(ctx, &KernelSpec::new(n, KernelForm::Closed), &v)?;
            Ok(ctx.real(a - b).abs())
        })();
        rec.within(
            format!("f_{n} series vs closed form at v=0.4"),
            "f_n(v) = (−1)^{n+1} Σ_{k≥n+1} B_{2k} v^{2k−1}/(2k)!",
            res,
            1e-40,
            None,
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert_eq!(Suite::parse_list("all").unwrap().len(), Suite::ALL.len());
        assert!(Suite::parse_list("bose,nope").is_err());
    }

    #[test]
    fn fd_weights_second_derivative() {
        // 5-point stencil: (−1, 16, −30, 16, −1)/12
        let w = fd_weights(2, 2);
        let want = [-1, 16, -30, 16, -1].map(|x| Rational::from((x, 12)));
        assert_eq!(w, want.to_vec());
    }

    #[test]
    fn cheap_suites_pass() {
        let c = PrecisionContext::default();
        let recs = run_suites(&c, &[Suite::Bose, Suite::Fseries, Suite::Stirling], &VerifyOptions::default());
        assert_eq!(recs.len(), 6 + 5 + 8);
        for r in &recs {
            assert!(r.pass, "{r:?}");
        }
    }

    #[test]
    fn tolerance_override_can_fail_a_check() {
        let c = PrecisionContext::default();
        let opts = VerifyOptions {
            tol: Some(1e-60),
            ..Default::default()
        };
        let recs = run_suites(&c, &[Suite::Bose], &opts);
        assert!(recs.iter().any(|r| !r.pass));
    }
}
