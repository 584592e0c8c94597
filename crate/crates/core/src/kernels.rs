//! Laplace kernels of the remainders.
//!
//! `R_n′(t) = ∫₀^∞ f_n(v) e^{−tv} dv` with
//! `f_n(v) = (−1)^n [1/v − ½ coth(v/2) + Σ_{k=1}^{n} B_{2k} v^{2k−1}/(2k)!]`.
//! Integrating by parts moves derivatives onto the kernel; the resulting
//! `K_m(v)` are derivatives of `1/v − ½ coth(v/2)`, which are evaluated from
//! the Stirling-number formula for derivatives of `1/(e^v − 1)`.
//!
//! Near the origin every closed form cancels badly, so below `v = 1/2` the
//! Taylor series `1/v − ½ coth(v/2) = −Σ_{k≥1} B_{2k} v^{2k−1}/(2k)!` is
//! differentiated term by term instead.

use rug::ops::Pow;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{bernoulli, bernoulli_even_table, falling, stirling2};
use crate::error::{Error, Result};
use crate::precision::{with_cancellation_guard, PrecisionContext, Real};
use crate::quadrature::GridSpec;

/// Below this the Taylor branch is used.
pub const SERIES_SWITCH: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelForm {
    Closed,
    Series,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub n: u32,
    pub form: KernelForm,
    /// Cap on Taylor terms; the sum also stops once terms drop below `eps`.
    pub series_terms: u32,
}

impl KernelSpec {
    pub fn new(n: u32, form: KernelForm) -> Self {
        KernelSpec {
            n,
            form,
            series_terms: 4000,
        }
    }
}

fn check_v(func: &'static str, v: &Real) -> Result<()> {
    if !v.is_finite() || *v <= 0 {
        return Err(Error::domain(func, format!("v must be finite and > 0, got {}", v.to_f64())));
    }
    Ok(())
}

/// `Σ_{k≥k0} B_{2k} ⟨2k−1⟩_l v^{2k−1−l} / (2k)!`, the `l`-th derivative of
/// the series tail from `k0`.
fn series_deriv(ctx: &PrecisionContext, l: u32, v: &Real, k0: u32, max_terms: u32) -> Result<Real> {
    if *v >= 2.0 * std::f64::consts::PI {
        return Err(Error::domain("kernel series", "needs |v| < 2π"));
    }
    let eps = ctx.epsilon();
    let v2 = ctx.real(v.clone().square());
    let mut table = bernoulli_even_table(ctx.bits(), (k0 + 64) as usize);
    let mut k = k0.max(1);
    // v^{2k−1−l}/(2k)!
    let mut pw = ctx.real(v.clone().pow(2 * k as i32 - 1 - l as i32))
        / ctx.factorial(2 * k);
    let mut sum = ctx.zero();
    let mut small_run = 0;
    let mut count = 0u32;
    loop {
        if table.len() <= k as usize {
            table = bernoulli_even_table(ctx.bits(), 2 * k as usize);
        }
        let ff = falling(&ctx.real(2 * k - 1), l);
        let term = ctx.real(&table[k as usize]) * ff * &pw;
        let tiny = ctx.real(&*term.as_abs()) <= eps.clone() * &*sum.as_abs();
        sum += term;
        count += 1;
        if tiny && 2 * k > l + 1 {
            small_run += 1;
            if small_run >= 2 {
                return Ok(sum);
            }
        } else {
            small_run = 0;
        }
        if count >= max_terms {
            return Ok(sum);
        }
        pw *= &v2;
        pw /= (2 * k + 1) * (2 * k + 2);
        k += 1;
    }
}

/// `x = 1/(e^v − 1)` without cancellation at small `v`.
fn bose(ctx: &PrecisionContext, v: &Real) -> Result<Real> {
    Ok(ctx.exp_m1(v)?.recip())
}

/// `d^k/dv^k [1/(e^v − 1)] = (−1)^k Σ_{p=1}^{k+1} (p−1)! S(k+1, p) x^p`
/// with `x = 1/(e^v − 1)`.
pub fn bose_derivative(ctx: &PrecisionContext, k: u32, v: &Real) -> Result<Real> {
    check_v("bose_derivative", v)?;
    let x = bose(ctx, v)?;
    // Horner in x: Σ a_p x^p
    let mut acc = ctx.zero();
    for p in (1..=k + 1).rev() {
        let a = ctx.from_rational(&stirling2(k + 1, p)?) * ctx.factorial(p - 1);
        acc += a;
        acc *= &x;
    }
    Ok(if k % 2 == 1 { -acc } else { acc })
}

/// `d^l/dv^l [1/v − ½ coth(v/2)]`.
pub fn coth_part_deriv(ctx: &PrecisionContext, l: u32, v: &Real) -> Result<Real> {
    check_v("coth_part_deriv", v)?;
    if *v < SERIES_SWITCH {
        return Ok(-series_deriv(ctx, l, v, 1, u32::MAX)?);
    }
    with_cancellation_guard(ctx, |w| closed_coth_part(w, l, &w.real(v)))
}

/// `Σ_{k=1}^{n} B_{2k} ⟨2k−1⟩_l v^{2k−1−l}/(2k)!` and its largest term.
fn poly_part_deriv(ctx: &PrecisionContext, n: u32, l: u32, v: &Real) -> (Real, Real) {
    let mut sum = ctx.zero();
    let mut scale = ctx.zero();
    for k in 1..=n {
        if 2 * k - 1 < l {
            continue;
        }
        let term = ctx.from_rational(&bernoulli(2 * k)) * falling(&ctx.real(2 * k - 1), l)
            * ctx.real(v.clone().pow(2 * k as i32 - 1 - l as i32))
            / ctx.factorial(2 * k);
        let a = ctx.real(&*term.as_abs());
        if a > scale {
            scale = a;
        }
        sum += term;
    }
    (sum, scale)
}

/// `f_n(v)`.
pub fn f_kernel(ctx: &PrecisionContext, n: u32, v: &Real) -> Result<Real> {
    f_kernel_deriv(ctx, n, 0, v)
}

/// `f_n(v)` with the branch forced by `spec.form`.
pub fn f_kernel_with(ctx: &PrecisionContext, spec: &KernelSpec, v: &Real) -> Result<Real> {
    check_v("f_kernel", v)?;
    match spec.form {
        KernelForm::Series => f_series(ctx, spec.n, 0, v, spec.series_terms),
        KernelForm::Closed => f_closed(ctx, spec.n, 0, v),
    }
}

/// `f_n^{(l)}(v)`.
pub fn f_kernel_deriv(ctx: &PrecisionContext, n: u32, l: u32, v: &Real) -> Result<Real> {
    check_v("f_kernel", v)?;
    if *v < SERIES_SWITCH {
        f_series(ctx, n, l, v, u32::MAX)
    } else {
        f_closed(ctx, n, l, v)
    }
}

fn f_series(ctx: &PrecisionContext, n: u32, l: u32, v: &Real, terms: u32) -> Result<Real> {
    // f_n = (−1)^{n+1} Σ_{k≥n+1} B_{2k} v^{2k−1}/(2k)!
    let s = series_deriv(ctx, l, v, n + 1, terms)?;
    Ok(if n.is_multiple_of(2) { -s } else { s })
}

fn f_closed(ctx: &PrecisionContext, n: u32, l: u32, v: &Real) -> Result<Real> {
    let s = with_cancellation_guard(ctx, |w| {
        let vw = w.real(v);
        let (c, cscale) = closed_coth_part(w, l, &vw)?;
        let (p, pscale) = poly_part_deriv(w, n, l, &vw);
        let scale = cscale.max(&pscale);
        Ok((c + p, scale))
    })?;
    Ok(if n % 2 == 1 { -s } else { s })
}

/// `(−1)^l l!/v^{l+1} − b^{(l)}(v) − [l = 0]·½` and the largest part,
/// using `1/v − ½ coth(v/2) = 1/v − ½ − 1/(e^v − 1)`.
fn closed_coth_part(ctx: &PrecisionContext, l: u32, v: &Real) -> Result<(Real, Real)> {
    let mut a = ctx.factorial(l) / ctx.real(v.clone().pow(l + 1));
    if l % 2 == 1 {
        a = -a;
    }
    let b = bose_derivative(ctx, l, v)?;
    let half = if l == 0 { ctx.real(0.5f64) } else { ctx.zero() };
    let scale = ctx.real(&*a.as_abs()).max(&ctx.real(&*b.as_abs())).max(&half);
    Ok((a - b - half, scale))
}

/// `K_m(v) = d^m/dv^m [1/v − ½ coth(v/2)]`, plus `B_{m+1}/(m+1)` when `m` is
/// odd.
pub fn k_kernel(ctx: &PrecisionContext, m: u32, v: &Real) -> Result<Real> {
    if m == 0 {
        return Err(Error::domain("k_kernel", "m must be >= 1"));
    }
    check_v("k_kernel", v)?;
    if *v < SERIES_SWITCH {
        // the constant cancels the k = (m+1)/2 term exactly
        let k0 = m.div_ceil(2) + 1;
        return Ok(-series_deriv(ctx, m, v, k0, u32::MAX)?);
    }
    with_cancellation_guard(ctx, |w| {
        let vw = w.real(v);
        let mut a = w.factorial(m) / w.real(vw.clone().pow(m + 1));
        if m % 2 == 1 {
            a = -a;
        }
        let b = bose_derivative(w, m, &vw)?;
        let c = if m % 2 == 1 {
            w.from_rational(&bernoulli(m + 1)) / (m + 1)
        } else {
            w.zero()
        };
        let scale = w.real(&*a.as_abs()).max(&w.real(&*b.as_abs())).max(&w.real(&*c.as_abs()));
        Ok((a - b + c, scale))
    })
}

/// `K_2(v) = 2/v³ − 2x³ − 3x² − x` with `x = 1/(e^v − 1)`, straight from the
/// displayed formula.
pub fn k2_closed_form(ctx: &PrecisionContext, v: &Real) -> Result<Real> {
    check_v("k2_closed_form", v)?;
    with_cancellation_guard(ctx, |w| {
        let vw = w.real(v);
        let x = bose(w, &vw)?;
        let a = w.real(vw.pow(3u32)).recip() * 2u32;
        let b = w.real(x.clone().pow(3u32)) * 2u32 + w.real(x.clone().square()) * 3u32 + &x;
        let scale = w.real(&*a.as_abs()).max(&b);
        Ok((a - b, scale))
    })
}

/// The five functions of the positivity argument for `K_2`:
/// `E_0 = [(e^v−1)³ v³ K_2(v)]′` and `E_i = (E_0 e^{−v})^{(i)}` for `i = 1..4`.
#[derive(Debug, Clone)]
pub struct K2Chain {
    pub v: Real,
    pub values: [Real; 5],
}

/// Evaluates the chain from its exponential-polynomial closed forms.
pub fn k2_derivative_chain(ctx: &PrecisionContext, v: &Real) -> Result<K2Chain> {
    check_v("k2_derivative_chain", v)?;
    let mut values: [Real; 5] = std::array::from_fn(|_| ctx.zero());
    for (i, slot) in values.iter_mut().enumerate() {
        *slot = with_cancellation_guard(ctx, |w| chain_term(w, i, &w.real(v)))?;
    }
    Ok(K2Chain {
        v: v.clone(),
        values,
    })
}

fn poly(ctx: &PrecisionContext, coeffs: &[i64], v: &Real) -> Real {
    // coeffs[i] multiplies v^i
    let mut acc = ctx.zero();
    for c in coeffs.iter().rev() {
        acc *= v;
        acc += *c;
    }
    acc
}

fn chain_term(w: &PrecisionContext, i: usize, v: &Real) -> Result<(Real, Real)> {
    let e = w.exp(v)?;
    let e2 = w.real(e.clone().square());
    let parts: Vec<Real> = match i {
        // e^v [6e^{2v} − v³ − 3v² + 6 − e^v (2v³ + 3v² + 12)]
        0 => vec![
            w.real(&e2 * &e) * 6u32,
            -(w.real(&e) * poly(w, &[-6, 0, 3, 1], v)),
            -(w.real(&e2) * poly(w, &[12, 0, 3, 2], v)),
        ],
        // 12e^{2v} − e^v (2v³ + 9v² + 6v + 12) − 3v(v + 2)
        1 => vec![
            w.real(&e2) * 12u32,
            -(w.real(&e) * poly(w, &[12, 6, 9, 2], v)),
            -poly(w, &[0, 6, 3], v),
        ],
        // 24e^{2v} − e^v (2v³ + 15v² + 24v + 18) − 6(v + 1)
        2 => vec![
            w.real(&e2) * 24u32,
            -(w.real(&e) * poly(w, &[18, 24, 15, 2], v)),
            -poly(w, &[6, 6], v),
        ],
        // 48e^{2v} − e^v (2v³ + 21v² + 54v + 42) − 6
        3 => vec![
            w.real(&e2) * 48u32,
            -(w.real(&e) * poly(w, &[42, 54, 21, 2], v)),
            w.real(-6),
        ],
        // 96e^v (e^v − 1 − v − (9/16) v²/2! − (1/8) v³/3!)
        _ => {
            let em1 = w.exp_m1(v)?;
            let p = w.real(v.clone().square()) * 9u32 / 32u32 + w.real(v.clone().pow(3u32)) / 48u32 + v;
            let head = w.real(&e * 96u32);
            return Ok((head.clone() * (em1.clone() - &p), head * em1.max(&p)));
        }
    };
    let scale = parts
        .iter()
        .map(|p| w.real(&*p.as_abs()))
        .fold(w.zero(), |a, b| a.max(&b));
    let sum = parts.into_iter().fold(w.zero(), |a, b| a + b);
    Ok((sum, scale))
}

#[derive(Debug, Clone)]
pub struct SignReport {
    pub m: u32,
    pub min_value: Real,
    pub argmin: Real,
    pub max_value: Real,
    pub argmax: Real,
    /// `(−1)^{n−1}` for `m = 2n−1`, `+1` for `m = 2`; none otherwise.
    pub expected_sign: Option<i8>,
    /// Smallest value of `expected_sign · K_m` over the grid.
    pub signed_min: Option<Real>,
    /// Whether `expected_sign · K_m ≥ 0` at every grid point.
    pub held: Option<bool>,
    /// Consecutive grid points between which `K_m` changes sign.
    pub sign_changes: Vec<(Real, Real)>,
}

/// Scans `K_m` over `grid`.
pub fn sign_scan(ctx: &PrecisionContext, m: u32, grid: &GridSpec) -> Result<SignReport> {
    let pts = grid.points(ctx)?;
    let vals = pts
        .iter()
        .map(|v| k_kernel(ctx, m, v))
        .collect::<Result<Vec<_>>>()?;
    let expected_sign: Option<i8> = if m % 2 == 1 {
        let n = m.div_ceil(2);
        Some(if n % 2 == 1 { 1 } else { -1 })
    } else if m == 2 {
        Some(1)
    } else {
        None
    };
    let mut imin = 0;
    let mut imax = 0;
    for (i, v) in vals.iter().enumerate() {
        if *v < vals[imin] {
            imin = i;
        }
        if *v > vals[imax] {
            imax = i;
        }
    }
    let mut sign_changes = Vec::new();
    for i in 1..vals.len() {
        let a = vals[i - 1].cmp0();
        let b = vals[i].cmp0();
        if let (Some(a), Some(b)) = (a, b) {
            if a != b && a.is_ne() && b.is_ne() {
                sign_changes.push((pts[i - 1].clone(), pts[i].clone()));
            }
        }
    }
    let signed_min = expected_sign.map(|s| {
        vals.iter()
            .map(|v| if s > 0 { v.clone() } else { -v.clone() })
            .fold(None::<Real>, |acc, x| match acc {
                Some(a) if a <= x => Some(a),
                _ => Some(x),
            })
            .unwrap_or_else(|| ctx.zero())
    });
    let held = signed_min.as_ref().map(|s| *s >= 0);
    Ok(SignReport {
        m,
        min_value: vals[imin].clone(),
        argmin: pts[imin].clone(),
        max_value: vals[imax].clone(),
        argmax: pts[imax].clone(),
        expected_sign,
        signed_min,
        held,
        sign_changes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> PrecisionContext {
        PrecisionContext::default()
    }

    #[test]
    fn bose_derivative_low_orders() {
        let c = ctx();
        let v = c.one();
        let e = c.exp(&v).unwrap();
        let b0 = bose_derivative(&c, 0, &v).unwrap();
        assert!(c.real(b0 - (e.clone() - 1u32).recip()).abs() < c.pow10(-48));
        let b1 = bose_derivative(&c, 1, &v).unwrap();
        let exact = -(e.clone() / (e - 1u32).square());
        assert!(c.real(b1 - exact).abs() < c.pow10(-48));
    }

    #[test]
    fn bose_derivative_matches_finite_differences() {
        // five-point stencil on the (k−1)-th derivative, error O(h⁴)
        let c = ctx();
        let h = c.pow10(-8);
        for k in 1..=8u32 {
            for v in [0.5, 1.0, 3.0] {
                let v = c.real(v);
                let g = |x: Real| bose_derivative(&c, k - 1, &x).unwrap();
                let fd = (g(c.real(&v - h.clone() * 2u32)) - g(c.real(&v + h.clone() * 2u32))
                    + (g(c.real(&v + &h)) - g(c.real(&v - &h))) * 8u32)
                    / (h.clone() * 12u32);
                let d = bose_derivative(&c, k, &v).unwrap();
                let scale = d.clone().abs() + 1u32;
                assert!(c.real(fd - d).abs() < scale * c.pow10(-25), "k={k} v={v}");
            }
        }
    }

    #[test]
    fn series_and_closed_forms_agree() {
        let c = ctx();
        let v = c.real(0.4);
        for n in 0..=4u32 {
            let s = f_kernel_with(&c, &KernelSpec::new(n, KernelForm::Series), &v).unwrap();
            let k = f_kernel_with(&c, &KernelSpec::new(n, KernelForm::Closed), &v).unwrap();
            assert!(c.real(s - k).abs() < c.pow10(-40), "n={n}");
        }
        let edge = c.real(SERIES_SWITCH);
        for n in 0..=4u32 {
            let below = f_series(&c, n, 0, &edge, u32::MAX).unwrap();
            let above = f_closed(&c, n, 0, &edge).unwrap();
            assert!(c.real(below - above).abs() < c.pow10(-40));
        }
    }

    #[test]
    fn f_limits() {
        let c = ctx();
        for n in 0..=4u32 {
            assert!(f_kernel(&c, n, &c.real(1e-8)).unwrap().abs() < 1e-7);
        }
        let far = f_kernel(&c, 0, &c.real(1e4)).unwrap();
        assert!((far.to_f64() + 0.5).abs() < 1e-3);
        // f^{(l)} e^{−tv} vanishes at v = 200, t = 0.1
        let damp = c.exp(&c.real(-20)).unwrap();
        for l in 0..=5 {
            let x = f_kernel_deriv(&c, 2, l, &c.real(200)).unwrap() * &damp;
            assert!(x.abs() < 1e-1, "l={l}");
        }
    }

    #[test]
    fn k_kernel_branches_agree() {
        let c = ctx();
        let edge = c.real(SERIES_SWITCH);
        for m in 1..=8u32 {
            let k0 = m.div_ceil(2) + 1;
            let series = -series_deriv(&c, m, &edge, k0, u32::MAX).unwrap();
            let closed = k_kernel(&c, m, &c.real(SERIES_SWITCH)).unwrap();
            let scale = closed.clone().abs() + 1u32;
            assert!(c.real(series - closed).abs() < scale * c.pow10(-40), "m={m}");
        }
    }

    #[test]
    fn k2_forms_and_sign() {
        let c = ctx();
        for v in [0.01, 1.0, 5.0] {
            let v = c.real(v);
            let a = k_kernel(&c, 2, &v).unwrap();
            let b = k2_closed_form(&c, &v).unwrap();
            assert!(c.real(&a - b).abs() < c.pow10(-40));
            assert!(a > 0);
        }
    }

    #[test]
    fn odd_kernels_tend_to_constant() {
        let c = ctx();
        for n in 1..=3u32 {
            let k = k_kernel(&c, 2 * n - 1, &c.real(300)).unwrap();
            let b = c.from_rational(&bernoulli(2 * n)) / (2 * n);
            assert!(c.real(k - b).abs() < 1e-3);
        }
    }

    #[test]
    fn chain_is_consistent_and_vanishes() {
        let c = ctx();
        let tiny = k2_derivative_chain(&c, &c.real(1e-6)).unwrap();
        for x in &tiny.values[..4] {
            assert!(x.clone().abs() < 1e-15);
        }
        let v1 = k2_derivative_chain(&c, &c.one()).unwrap();
        let e = c.exp(&c.one()).unwrap();
        let exact = e.clone() * 96u32 * (e - 2u32 - c.real(9) / 32u32 - c.real(48).recip());
        assert!(c.real(&v1.values[4] - exact).abs() < c.pow10(-45));
        // E_{i+1} = (E_i e^{−v})′ for i = 0, and E_{i+1} = E_i′ after that
        let h = c.pow10(-10);
        let v = c.real(0.8);
        let lo = k2_derivative_chain(&c, &c.real(&v - &h)).unwrap();
        let hi = k2_derivative_chain(&c, &c.real(&v + &h)).unwrap();
        let mid = k2_derivative_chain(&c, &v).unwrap();
        for i in 0..4 {
            let (a, b) = if i == 0 {
                (
                    hi.values[0].clone() * c.exp(&-c.real(&v + &h)).unwrap(),
                    lo.values[0].clone() * c.exp(&-c.real(&v - &h)).unwrap(),
                )
            } else {
                (hi.values[i].clone(), lo.values[i].clone())
            };
            let fd = (a - b) / (h.clone() * 2u32);
            let scale = mid.values[i + 1].clone().abs() + 1u32;
            assert!(c.real(fd - &mid.values[i + 1]).abs() < scale * c.pow10(-15), "i={i}");
        }
    }

    #[test]
    fn scans_report_expected_signs() {
        let c = PrecisionContext::new(30).unwrap();
        let g = GridSpec::log(1e-2, 1e2, 60).unwrap();
        for m in [1u32, 2, 3, 5] {
            let r = sign_scan(&c, m, &g).unwrap();
            assert_eq!(r.held, Some(true), "m={m}");
        }
        let r4 = sign_scan(&c, 4, &g).unwrap();
        assert!(r4.expected_sign.is_none());
    }

    #[test]
    fn domain_errors() {
        let c = ctx();
        assert!(f_kernel(&c, 1, &c.zero()).is_err());
        assert!(k_kernel(&c, 0, &c.one()).is_err());
        assert!(bose_derivative(&c, 2, &c.real(-1)).is_err());
    }
}
