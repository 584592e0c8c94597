//! Exact sequences: Bernoulli numbers, Stirling numbers of the second kind,
//! falling factorials and the rational part of ζ at even integers.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock, RwLock};

use rug::ops::Pow;
use rug::{Float, Integer, Rational};

use crate::error::{Error, Result};
use crate::precision::Real;

pub type BigRational = Rational;

fn bernoulli_cache() -> &'static Mutex<Vec<Rational>> {
    static CACHE: OnceLock<Mutex<Vec<Rational>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(vec![Rational::from(1)]))
}

/// `B_n` with the convention `B_1 = −1/2`, from
/// `Σ_{k=0}^{n} C(n+1, k) B_k = 0`. Values are memoized.
pub fn bernoulli(n: u32) -> BigRational {
    let n = n as usize;
    if n >= 3 && n % 2 == 1 {
        return Rational::new();
    }
    let mut cache = bernoulli_cache().lock().expect("bernoulli cache poisoned");
    while cache.len() <= n {
        let m = cache.len() as u32;
        let mut acc = Rational::new();
        for (k, b) in cache.iter().enumerate() {
            if b.cmp0().is_eq() {
                continue;
            }
            let c = Integer::from(Integer::binomial_u(m + 1, k as u32));
            acc += Rational::from(b * c);
        }
        let b_m = -acc / Integer::from(m + 1);
        cache.push(b_m);
    }
    cache[n].clone()
}

type FloatTable = Arc<Vec<Float>>;

fn even_float_cache() -> &'static RwLock<HashMap<u32, FloatTable>> {
    static CACHE: OnceLock<RwLock<HashMap<u32, FloatTable>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// `[B_0, B_2, B_4, …, B_{2(count−1)}]` rounded to `bits`.
pub fn bernoulli_even_table(bits: u32, count: usize) -> FloatTable {
    if let Some(t) = even_float_cache().read().expect("table poisoned").get(&bits) {
        if t.len() >= count {
            return Arc::clone(t);
        }
    }
    let mut map = even_float_cache().write().expect("table poisoned");
    let have = map.get(&bits).map_or(0, |t| t.len());
    if have >= count {
        return Arc::clone(&map[&bits]);
    }
    let want = count.max(2 * have).max(16);
    let table: Vec<Float> = (0..want)
        .map(|k| Float::with_val(bits, &bernoulli(2 * k as u32)))
        .collect();
    let table = Arc::new(table);
    map.insert(bits, Arc::clone(&table));
    table
}

/// `S(k, p)` by the explicit alternating sum
/// `(1/p!) Σ_{q=1}^{p} (−1)^{p−q} C(p, q) q^k`.
pub fn stirling2(k: u32, p: u32) -> Result<BigRational> {
    if p == 0 || p > k {
        return Err(Error::domain(
            "stirling2",
            format!("need 1 <= p <= k, got k={k}, p={p}"),
        ));
    }
    let mut sum = Integer::new();
    for q in 1..=p {
        let term = Integer::from(Integer::binomial_u(p, q)) * Integer::from(Integer::u_pow_u(q, k));
        if (p - q).is_multiple_of(2) {
            sum += term;
        } else {
            sum -= term;
        }
    }
    let fact = Integer::from(Integer::factorial(p));
    Ok(Rational::from((sum, fact)))
}

/// Rows `0..=kmax` of `S(k, p)` from `S(k, p) = p S(k−1, p) + S(k−1, p−1)`.
pub fn stirling2_triangle(kmax: u32) -> Vec<Vec<Integer>> {
    let mut rows: Vec<Vec<Integer>> = vec![vec![Integer::from(1)]];
    for k in 1..=kmax as usize {
        let prev = &rows[k - 1];
        let mut row = vec![Integer::new(); k + 1];
        for (p, slot) in row.iter_mut().enumerate().skip(1) {
            let stay = prev.get(p).map_or(Integer::new(), |s| Integer::from(s * p as u32));
            *slot = stay + &prev[p - 1];
        }
        rows.push(row);
    }
    rows
}

/// Values that can carry a falling factorial `⟨α⟩_n = α(α−1)⋯(α−n+1)`.
pub trait FallingBase: Clone {
    fn unit_like(&self) -> Self;
    fn minus(&self, k: u32) -> Self;
    fn times(&mut self, other: &Self);
}

impl FallingBase for Rational {
    fn unit_like(&self) -> Self {
        Rational::from(1)
    }
    fn minus(&self, k: u32) -> Self {
        Rational::from(self - k)
    }
    fn times(&mut self, other: &Self) {
        *self *= other;
    }
}

impl FallingBase for Float {
    fn unit_like(&self) -> Self {
        Float::with_val(self.prec(), 1)
    }
    fn minus(&self, k: u32) -> Self {
        Float::with_val(self.prec(), self - k)
    }
    fn times(&mut self, other: &Self) {
        *self *= other;
    }
}

impl FallingBase for f64 {
    fn unit_like(&self) -> Self {
        1.0
    }
    fn minus(&self, k: u32) -> Self {
        self - f64::from(k)
    }
    fn times(&mut self, other: &Self) {
        *self *= other;
    }
}

/// `⟨α⟩_n`, equal to 1 for `n = 0`.
pub fn falling<T: FallingBase>(alpha: &T, n: u32) -> T {
    let mut acc = alpha.unit_like();
    for k in 0..n {
        acc.times(&alpha.minus(k));
    }
    acc
}

/// `ζ(2n) = coefficient · π^{power_of_pi}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZetaEven {
    pub coefficient: BigRational,
    pub power_of_pi: u32,
}

impl ZetaEven {
    pub fn to_real(&self, ctx: &crate::precision::PrecisionContext) -> Real {
        ctx.from_rational(&self.coefficient) * ctx.pi().pow(self.power_of_pi)
    }
}

/// `ζ(2n) = (−1)^{n+1} B_{2n} 2^{2n−1} / (2n)! · π^{2n}`.
pub fn zeta_even(n: u32) -> Result<ZetaEven> {
    if n == 0 {
        return Err(Error::domain("zeta_even", "n must be >= 1"));
    }
    let b = bernoulli(2 * n);
    let two_pow = Integer::from(1) << (2 * n - 1);
    let fact = Integer::from(Integer::factorial(2 * n));
    let mut q = b * two_pow / fact;
    if n.is_multiple_of(2) {
        q = -q;
    }
    Ok(ZetaEven {
        coefficient: q,
        power_of_pi: 2 * n,
    })
}
