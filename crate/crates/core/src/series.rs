//! Twin-prime constant, the pair singular series `𝔖(d)`, the triple series
//! `𝔖({0, d', d})`, and Mertens' product.
//!
//! Infinite products are truncated at a prime `P` and returned as a
//! [`SeriesValue`] whose `error_bound` rigorously covers the omitted tail plus
//! floating-point rounding in the finite part. Every factor of these tails is
//! at most 1, so the true value lies in `[value - error_bound, value]`.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{distinct_prime_factors, is_prime_small, CompensatedSum};
use crate::sieve::{primes_up_to, Sieve, SieveConfig};

/// Truncation used for `C₂` when none is given.
pub const DEFAULT_TRUNCATION: u64 = 1_000_000;
/// Truncation used for triple series when none is given.
pub const DEFAULT_TRIPLE_TRUNCATION: u64 = 100_000;
/// `e^{2γ}`: the constant in `Π_{p ≤ y} (1 - 1/p)^{-2} ~ e^{2γ} (ln y)²`.
pub const BOUND5_CONSTANT: f64 = 3.172_218_958_455_359_6;
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const CACHED_PRIME_BOUND: u64 = 1 << 20;

fn with_primes_through<T>(bound: u64, f: impl FnOnce(&[u64]) -> T) -> T {
    static CACHE: OnceLock<Vec<u64>> = OnceLock::new();
    if bound <= CACHED_PRIME_BOUND {
        let all = CACHE.get_or_init(|| primes_up_to(CACHED_PRIME_BOUND));
        let end = all.partition_point(|&p| p <= bound);
        f(&all[..end])
    } else {
        f(&primes_up_to(bound))
    }
}

/// A truncated evaluation with a rigorous bound on `|true - value|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesValue {
    pub value: f64,
    pub error_bound: f64,
    pub truncation_prime: u64,
}

impl SeriesValue {
    pub fn exact_zero(truncation_prime: u64) -> Self {
        Self {
            value: 0.0,
            error_bound: 0.0,
            truncation_prime,
        }
    }

    pub fn lower(&self) -> f64 {
        self.value - self.error_bound
    }

    pub fn upper(&self) -> f64 {
        self.value + self.error_bound
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lower() <= v && v <= self.upper()
    }

    pub fn overlaps(&self, other: &SeriesValue) -> bool {
        self.lower() <= other.upper() && other.lower() <= self.upper()
    }
}

/// Rounding allowance for a product of `factors` correctly rounded terms.
fn rounding_allowance(value: f64, factors: u64) -> f64 {
    3.0 * (factors as f64 + 1.0) * f64::EPSILON * value.abs()
}

/// `C₂ = Π_{p > 2} (1 - 1/(p-1)²)` truncated at `truncation_prime`.
///
/// The tail satisfies `|ln tail| <= Σ_{n > P} 1/(n(n-2)) <= 1/(P-2)`.
pub fn twin_prime_constant(truncation_prime: u64) -> Result<SeriesValue> {
    if truncation_prime < 3 {
        return Err(Error::Domain(format!(
            "twin-prime constant needs a truncation of at least 3, got {truncation_prime}"
        )));
    }
    let mut value = 1.0f64;
    let mut factors = 0u64;
    let mut apply = |p: u64| {
        if p > 2 {
            let q = (p - 1) as f64;
            value *= 1.0 - 1.0 / (q * q);
            factors += 1;
        }
    };
    if truncation_prime <= CACHED_PRIME_BOUND {
        with_primes_through(truncation_prime, |ps| {
            ps.iter().copied().for_each(&mut apply)
        });
    } else {
        Sieve::new(SieveConfig::new(truncation_prime)?).for_each_prime(&mut apply);
    }
    let tail_log = 1.0 / (truncation_prime - 2) as f64;
    let error_bound = -value * (-tail_log).exp_m1() + rounding_allowance(value, factors);
    Ok(SeriesValue {
        value,
        error_bound,
        truncation_prime,
    })
}

/// `C₂` at [`DEFAULT_TRUNCATION`], computed once.
pub fn default_twin_constant() -> SeriesValue {
    static C2: OnceLock<SeriesValue> = OnceLock::new();
    *C2.get_or_init(|| twin_prime_constant(DEFAULT_TRUNCATION).expect("valid truncation"))
}

/// Odd prime divisors of `|d|`.
fn odd_prime_support(d: u64) -> impl Iterator<Item = u64> {
    distinct_prime_factors(d).into_iter().filter(|&p| p > 2)
}

/// `Π_{p | d, p > 2} (p-1)/(p-2)` as an exact fraction `(numerator, denominator)`.
pub fn pair_factor_ratio(d: u64) -> (u128, u128) {
    odd_prime_support(d).fold((1u128, 1u128), |(n, m), p| {
        (n * u128::from(p - 1), m * u128::from(p - 2))
    })
}

/// `Π_{p | d, p > 2} (1 + 1/(p-2))` in floating point.
pub fn pair_factor(d: u64) -> f64 {
    odd_prime_support(d)
        .map(|p| 1.0 + 1.0 / (p - 2) as f64)
        .product()
}

/// `𝔖(d)` using the cached default `C₂`.
pub fn singular_series(d: i64) -> Result<SeriesValue> {
    singular_series_with(d, &default_twin_constant())
}

/// `𝔖(d)` for `d ≠ 0` relative to a given evaluation of `C₂`.
pub fn singular_series_with(d: i64, c2: &SeriesValue) -> Result<SeriesValue> {
    if d == 0 {
        return Err(Error::Domain(
            "singular series is undefined at d = 0".into(),
        ));
    }
    let d = d.unsigned_abs();
    if d % 2 == 1 {
        return Ok(SeriesValue::exact_zero(c2.truncation_prime));
    }
    let support: Vec<u64> = odd_prime_support(d).collect();
    let factor: f64 = support
        .iter()
        .map(|&p| 1.0 + 1.0 / (p - 2) as f64)
        .product();
    let value = 2.0 * c2.value * factor;
    let error_bound =
        2.0 * c2.error_bound * factor + rounding_allowance(value, 2 * support.len() as u64 + 1);
    Ok(SeriesValue {
        value,
        error_bound,
        truncation_prime: c2.truncation_prime,
    })
}

/// Number of distinct residues of `offsets` modulo the prime `p`.
pub fn nu_residues(offsets: &[i64], p: u64) -> Result<u64> {
    if offsets.is_empty() {
        return Err(Error::Argument("offset set is empty".into()));
    }
    if !is_prime_small(p) {
        return Err(Error::Argument(format!("modulus {p} is not prime")));
    }
    let p = i128::from(p);
    let mut residues: Vec<i128> = offsets
        .iter()
        .map(|&h| i128::from(h).rem_euclid(p))
        .collect();
    residues.sort_unstable();
    residues.dedup();
    Ok(residues.len() as u64)
}

/// The triple `{0, d', d}` with `d` even and `1 <= d' < d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TripleConfig {
    d: u64,
    d_prime: u64,
    delta: u64,
}

impl TripleConfig {
    pub fn new(d: u64, d_prime: u64) -> Result<Self> {
        if d < 2 || d % 2 == 1 {
            return Err(Error::Argument(format!(
                "triple needs even d >= 2, got {d}"
            )));
        }
        if d_prime == 0 || d_prime >= d {
            return Err(Error::Argument(format!(
                "triple needs 1 <= d' < d, got d' = {d_prime}, d = {d}"
            )));
        }
        let delta = d_prime
            .checked_mul(d)
            .and_then(|v| v.checked_mul(d - d_prime))
            .ok_or_else(|| Error::Range(format!("Δ = d'·d·(d-d') overflows for d = {d}")))?;
        Ok(Self { d, d_prime, delta })
    }

    pub fn d(&self) -> u64 {
        self.d
    }

    pub fn d_prime(&self) -> u64 {
        self.d_prime
    }

    /// `Δ = d' · d · (d - d')`.
    pub fn delta(&self) -> u64 {
        self.delta
    }

    pub fn offsets(&self) -> [i64; 3] {
        [0, self.d_prime as i64, self.d as i64]
    }

    /// Local factor `(1 - 1/p)^{-3} (1 - ν(p)/p)`.
    pub fn local_factor(&self, p: u64) -> f64 {
        let nu = nu_residues(&self.offsets(), p).expect("p is prime");
        let pf = p as f64;
        let q = (p - 1) as f64;
        (p - nu) as f64 * pf * pf / (q * q * q)
    }
}

/// Upper bound on `Σ_{p > P} -ln f(p)` where `f(p) = (1-3/p)/(1-1/p)³`.
fn triple_tail_log_bound(truncation_prime: u64) -> f64 {
    let u0 = 1.0 / (truncation_prime + 1) as f64;
    let g = 3.0 / (1.0 - u0).powi(3);
    g / (1.0 - g * u0 * u0) / truncation_prime as f64
}

/// `𝔖({0, d', d}) = Π_p (1 - 1/p)^{-3} (1 - ν(p)/p)` truncated at `truncation_prime`.
pub fn triple_singular_series(cfg: &TripleConfig, truncation_prime: u64) -> Result<SeriesValue> {
    if truncation_prime < 3 {
        return Err(Error::Argument(format!(
            "triple series needs a truncation of at least 3, got {truncation_prime}"
        )));
    }
    let largest = distinct_prime_factors(cfg.delta())
        .last()
        .copied()
        .unwrap_or(2);
    if truncation_prime < largest {
        return Err(Error::Argument(format!(
            "truncation {truncation_prime} is below the largest prime factor {largest} of Δ"
        )));
    }
    // Three offsets can only cover every class modulo 2 or 3.
    for p in [2, 3] {
        if nu_residues(&cfg.offsets(), p)? == p {
            return Ok(SeriesValue::exact_zero(truncation_prime));
        }
    }
    let (value, factors) = with_primes_through(truncation_prime, |ps| {
        (
            ps.iter().map(|&p| cfg.local_factor(p)).product::<f64>(),
            ps.len() as u64,
        )
    });
    let tail_log = triple_tail_log_bound(truncation_prime);
    let error_bound = -value * (-tail_log).exp_m1() + rounding_allowance(value, 2 * factors);
    Ok(SeriesValue {
        value,
        error_bound,
        truncation_prime,
    })
}

/// `Π_{p ≤ x} (1 - 1/p)`.
pub fn mertens_product(x: u64) -> Result<f64> {
    if x < 2 {
        return Err(Error::Domain(format!(
            "Mertens product needs x >= 2, got {x}"
        )));
    }
    let mut acc = CompensatedSum::new();
    let mut add = |p: u64| acc.add((-1.0 / p as f64).ln_1p());
    if x <= CACHED_PRIME_BOUND {
        with_primes_through(x, |ps| ps.iter().copied().for_each(&mut add));
    } else {
        Sieve::new(SieveConfig::new(x)?).for_each_prime(&mut add);
    }
    Ok(acc.value().exp())
}

/// Numerical witness for `𝔖({0, d', d}) ≪ (ln Δ)² ≪ d^ε`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bound5Witness {
    pub d: u64,
    pub d_prime: u64,
    pub delta: u64,
    pub series: SeriesValue,
    /// `Π_{p | Δ} (1 - 1/p)^{-2}`, which dominates the series.
    pub divisor_bound: f64,
    pub log_delta_squared: f64,
    /// `𝔖 / (ln Δ)²`.
    pub ratio: f64,
    pub constant: f64,
    pub epsilon: f64,
    pub d_pow_epsilon: f64,
    pub passes: bool,
}

pub fn check_bound5(cfg: &TripleConfig, epsilon: f64) -> Result<Bound5Witness> {
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::Argument(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    let factors = distinct_prime_factors(cfg.delta());
    let truncation = DEFAULT_TRIPLE_TRUNCATION.max(factors.last().copied().unwrap_or(2));
    let series = triple_singular_series(cfg, truncation)?;
    let divisor_bound: f64 = factors
        .iter()
        .map(|&p| {
            let r = p as f64 / (p - 1) as f64;
            r * r
        })
        .product();
    let log_delta = (cfg.delta() as f64).ln();
    let log_delta_squared = log_delta * log_delta;
    let ratio = series.upper() / log_delta_squared;
    let passes = series.lower() <= divisor_bound && ratio <= BOUND5_CONSTANT;
    Ok(Bound5Witness {
        d: cfg.d(),
        d_prime: cfg.d_prime(),
        delta: cfg.delta(),
        series,
        divisor_bound,
        log_delta_squared,
        ratio,
        constant: BOUND5_CONSTANT,
        epsilon,
        d_pow_epsilon: (cfg.d() as f64).powf(epsilon),
        passes,
    })
}
