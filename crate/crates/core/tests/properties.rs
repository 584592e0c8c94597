use proptest::prelude::*;
use rug::ops::Pow;

use cmlab::combinatorics::bernoulli;
use cmlab::gammakit::{ln_gamma, polygamma};
use cmlab::kernels::{f_kernel_deriv, k_kernel};
use cmlab::quadrature::cos_kernel_integral;
use cmlab::remainders::{remainder, remainder_d1, remainder_d2};
use cmlab::PrecisionContext;

fn ctx() -> PrecisionContext {
    PrecisionContext::new(40).unwrap()
}

#[test]
fn odd_kernels_match_cos_representation() {
    let c = PrecisionContext::default();
    for n in 1..=3u32 {
        for v in [0.05, 0.7, 3.0, 25.0] {
            let v = c.real(v);
            let k = k_kernel(&c, 2 * n - 1, &v).unwrap();
            let q = cos_kernel_integral(&c, n, &v, &c.pow10(-45)).unwrap().value * 2u32;
            let q = if n % 2 == 1 { q } else { -q };
            assert!(c.real(k - q).abs() < c.pow10(-35), "n={n} v={v}");
        }
    }
}

#[test]
fn kernel_derivatives_are_damped_far_out() {
    // f_n grows like v^{2n−1}, so e^{−tv} wins at v = 200 only for small n
    let c = ctx();
    let g = |n: u32, l: u32, v: f64| {
        let v = c.real(v);
        f_kernel_deriv(&c, n, l, &v).unwrap() * c.exp(&c.real(-(v.clone() / 10u32))).unwrap()
    };
    for l in 0..=5u32 {
        for n in 0..=1u32 {
            assert!(g(n, l, 200.0).abs() < 1e-6, "n={n} l={l}");
        }
        for n in 0..=4u32 {
            let far = g(n, l, 800.0).abs();
            assert!(far < 1e-10 && far < g(n, l, 400.0).abs(), "n={n} l={l}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn ln_gamma_recurrence(t in 1e-3f64..60.0) {
        let c = ctx();
        let t = c.real(t);
        let lhs = ln_gamma(&c, &c.real(&t + 1u32)).unwrap();
        let rhs = ln_gamma(&c, &t).unwrap() + c.ln(&t).unwrap();
        prop_assert!(c.real(lhs - rhs).abs() < c.pow10(-34));
    }

    #[test]
    fn polygamma_recurrence(t in 1e-2f64..40.0, m in 0u32..6) {
        // ψ^{(m)}(t+1) = ψ^{(m)}(t) + (−1)^m m!/t^{m+1}
        let c = ctx();
        let t = c.real(t);
        let a = polygamma(&c, m, &c.real(&t + 1u32)).unwrap();
        let b = polygamma(&c, m, &t).unwrap();
        let mut step = c.factorial(m) / c.real(t.clone().pow(m + 1));
        if m % 2 == 1 {
            step = -step;
        }
        let scale = step.clone().abs() + 1u32;
        prop_assert!(c.real(a - b - step).abs() < scale * c.pow10(-34));
    }

    #[test]
    fn remainders_carry_cm_signs(t in -4.0f64..3.0, n in 0u32..=6) {
        let c = ctx();
        let t = c.real(10f64.powf(t));
        prop_assert!(remainder(&c, n, &t).unwrap() >= 0);
        prop_assert!(remainder_d1(&c, n, &t).unwrap() > 0);
        prop_assert!(remainder_d2(&c, n, &t).unwrap() >= 0);
    }

    #[test]
    fn consecutive_remainders_sum_to_a_power(t in -2.0f64..2.0, n in 0u32..=5) {
        // R_n + R_{n+1} = |B_{2n+2}| / ((2n+2)(2n+1) t^{2n+1})
        let c = ctx();
        let t = c.real(10f64.powf(t));
        let sum = remainder(&c, n, &t).unwrap() + remainder(&c, n + 1, &t).unwrap();
        let b = c.from_rational(&bernoulli(2 * n + 2)).abs();
        let exact = b / ((2 * n + 2) * (2 * n + 1)) / c.real(t.pow(2 * n + 1));
        prop_assert!(c.real(&sum - &exact).abs() <= exact.abs() * c.pow10(-30));
    }
}

