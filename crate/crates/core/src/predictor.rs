//! Hardy–Littlewood predictions for gap counts and the numeric side of the
//! champion-divisibility argument.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaps::{gap_histogram, GapHistogram};
use crate::primorial::{PrimorialEntry, PrimorialTable};
use crate::series::{pair_factor, pair_factor_ratio, singular_series};
use crate::sieve::{mertens_reciprocal_sum, SieveConfig};

/// The constant below `𝔖(2) = 2C₂ ≈ 1.3203` used in the `N*(x)` lower bound.
pub const NSTAR_LOWER_CONSTANT: f64 = 1.32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    /// `𝔖(d) · x / (ln x)²`
    Asymptotic,
    /// `𝔖(d) · ∫₂ˣ dt / (ln t)²`
    Integral,
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Model::Asymptotic => "asymptotic",
            Model::Integral => "integral",
        })
    }
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "asymptotic" => Ok(Model::Asymptotic),
            "integral" => Ok(Model::Integral),
            other => Err(Error::Argument(format!("unknown model {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub x: u64,
    pub d: u64,
    pub model: Model,
    pub predicted_count: f64,
}

/// `∫₂ˣ dt / (ln t)²` by double-exponential quadrature.
pub fn log_squared_integral(x: f64) -> f64 {
    if x <= 2.0 {
        return 0.0;
    }
    let f = |t: f64| {
        let l = t.ln();
        1.0 / (l * l)
    };
    // Split at powers of 4 so each piece is smooth on its own scale.
    let mut total = 0.0;
    let mut a = 2.0f64;
    while a < x {
        let b = (a * 4.0).min(x);
        let scale = (b - a) / (b.ln() * b.ln());
        total += quadrature::integrate(f, a, b, 1e-13 * scale).integral;
        a = b;
    }
    total
}

pub fn predicted_count(x: u64, d: u64, model: Model) -> Result<Prediction> {
    if x < 3 {
        return Err(Error::Domain(format!("prediction needs x >= 3, got {x}")));
    }
    if d == 0 {
        return Err(Error::Argument("gap d must be at least 1".into()));
    }
    let series = singular_series(d as i64)?.value;
    let predicted_count = if series == 0.0 {
        0.0
    } else {
        let xf = x as f64;
        let main = match model {
            Model::Asymptotic => xf / (xf.ln() * xf.ln()),
            Model::Integral => log_squared_integral(xf),
        };
        series * main
    };
    Ok(Prediction {
        x,
        d,
        model,
        predicted_count,
    })
}

/// `N(x, d) / prediction` for a histogram computed up to `x`.
pub fn observed_ratio(histogram: &GapHistogram, d: u64, model: Model) -> Result<f64> {
    let p = predicted_count(histogram.upper_bound_x(), d, model)?;
    Ok(histogram.count(d) as f64 / p.predicted_count)
}

/// Largest primorial `<= √(ln x)`, given `ln x`.
pub fn predicted_champion_ln(ln_x: f64) -> Result<Vec<u64>> {
    let window = ln_x.sqrt();
    if window.is_nan() || window < 2.0 {
        return Err(Error::Domain(format!(
            "√(ln x) = {window} is below 2; no even gap fits the window"
        )));
    }
    Ok(vec![PrimorialTable::new().floor(window)?.value])
}

/// The most likely gap among even `d <= √(ln x)`: the primorial floor of the window.
pub fn predicted_champion(x: u64) -> Result<Vec<u64>> {
    if x < 10 {
        return Err(Error::Domain(format!("prediction needs x >= 10, got {x}")));
    }
    predicted_champion_ln((x as f64).ln())
}

/// Numeric side of `𝔖(⌊(ln x)²⌋_𝒫) / 𝔖(⌊√(ln x)⌋_𝒫)` against the covering product
/// `Π (1 + 1/(p-2))` over odd primes in `[⅓ ln ln x, 3 ln ln x]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremWitness {
    pub ln_x: f64,
    pub small_floor: u64,
    pub large_floor: u64,
    pub ratio: f64,
    pub covering_low: f64,
    pub covering_high: f64,
    pub covering_primes: Vec<u64>,
    pub covering_product: f64,
    /// `ratio <= covering_product`, decided in exact arithmetic when it fits.
    pub holds: bool,
}

fn odd_primes_between(lo: f64, hi: f64) -> Vec<u64> {
    let top = hi.floor().max(0.0) as u64;
    crate::sieve::primes_up_to(top)
        .into_iter()
        .filter(|&p| p > 2 && p as f64 >= lo)
        .collect()
}

fn product_ratio(primes: &[u64]) -> Option<(u128, u128)> {
    primes.iter().try_fold((1u128, 1u128), |(n, m), &p| {
        Some((
            n.checked_mul(u128::from(p - 1))?,
            m.checked_mul(u128::from(p - 2))?,
        ))
    })
}

pub fn theorem_witness_ln(ln_x: f64) -> Result<TheoremWitness> {
    let table = PrimorialTable::new();
    let small: PrimorialEntry = table.floor(ln_x.sqrt()).map_err(|e| match e {
        Error::Domain(_) => Error::Domain(format!("√(ln x) = {} is below 2", ln_x.sqrt())),
        other => other,
    })?;
    let large = table.floor(ln_x * ln_x)?;
    let (a, b) = pair_factor_ratio(large.value);
    let (c, e) = pair_factor_ratio(small.value);
    let ratio = pair_factor(large.value) / pair_factor(small.value);

    let lnln = ln_x.ln();
    let (covering_low, covering_high) = (lnln / 3.0, 3.0 * lnln);
    let covering_primes = odd_primes_between(covering_low, covering_high);
    let covering_product: f64 = covering_primes
        .iter()
        .map(|&p| 1.0 + 1.0 / (p - 2) as f64)
        .product();

    // ratio = (a/b)/(c/e) = a·e / (b·c); compare with num/den crosswise.
    let exact = product_ratio(&covering_primes).and_then(|(num, den)| {
        let lhs = a.checked_mul(e)?.checked_mul(den)?;
        let rhs = b.checked_mul(c)?.checked_mul(num)?;
        Some(lhs <= rhs)
    });
    let holds = exact.unwrap_or(ratio <= covering_product * (1.0 + 1e-12));
    Ok(TheoremWitness {
        ln_x,
        small_floor: small.value,
        large_floor: large.value,
        ratio,
        covering_low,
        covering_high,
        covering_primes,
        covering_product,
        holds,
    })
}

pub fn theorem_witness(x: u64) -> Result<TheoremWitness> {
    if x < 3 {
        return Err(Error::Domain(format!(
            "theorem witness needs x >= 3, got {x}"
        )));
    }
    theorem_witness_ln((x as f64).ln())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundWitness {
    pub x: u64,
    pub n_star: u64,
    pub champions: Vec<u64>,
    /// `1.32 · x / (ln x)²`
    pub threshold: f64,
    pub holds: bool,
}

pub fn lower_bound_witness(histogram: &GapHistogram) -> LowerBoundWitness {
    let report = histogram.report();
    let xf = report.x as f64;
    let threshold = NSTAR_LOWER_CONSTANT * xf / (xf.ln() * xf.ln());
    LowerBoundWitness {
        x: report.x,
        n_star: report.n_star,
        champions: report.champions,
        threshold,
        holds: report.n_star as f64 > threshold,
    }
}

fn require_diagnostic_bound(x: u64) -> Result<()> {
    if x < 1000 {
        return Err(Error::Domain(format!(
            "diagnostic needs x >= 1000, got {x}"
        )));
    }
    Ok(())
}

/// Whether `N*(x) > 1.32 · x / (ln x)²`.
pub fn nstar_lower_bound_check(x: u64, config: &SieveConfig) -> Result<LowerBoundWitness> {
    require_diagnostic_bound(x)?;
    Ok(lower_bound_witness(&gap_histogram(x, config)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LargeGapWitness {
    pub x: u64,
    /// `(ln x)²`
    pub threshold_gap: f64,
    /// `x / (ln x)²`
    pub large_gap_bound: f64,
    pub max_gap: u64,
    /// Observed gaps `d >= (ln x)²`.
    pub large_gaps: Vec<u64>,
    /// `N(x, d) <= x / d` for every observed `d`.
    pub per_gap_holds: bool,
    /// `N(x, d) <= x / (ln x)²` for every `d >= (ln x)²`.
    pub large_gap_holds: bool,
}

impl LargeGapWitness {
    pub fn holds(&self) -> bool {
        self.per_gap_holds && self.large_gap_holds
    }
}

pub fn large_gap_witness(histogram: &GapHistogram) -> LargeGapWitness {
    let x = histogram.upper_bound_x();
    let xf = x as f64;
    let threshold_gap = xf.ln() * xf.ln();
    let large_gap_bound = xf / threshold_gap;
    // N·d <= x in integers avoids rounding x/d.
    let per_gap_holds = histogram
        .iter()
        .all(|(d, c)| u128::from(c) * u128::from(d) <= u128::from(x));
    let large_gaps: Vec<u64> = histogram
        .iter()
        .filter(|&(d, _)| d as f64 >= threshold_gap)
        .map(|(d, _)| d)
        .collect();
    let large_gap_holds = large_gaps
        .iter()
        .all(|&d| histogram.count(d) as f64 <= large_gap_bound);
    LargeGapWitness {
        x,
        threshold_gap,
        large_gap_bound,
        max_gap: histogram.max_gap().unwrap_or(0),
        large_gaps,
        per_gap_holds,
        large_gap_holds,
    }
}

pub fn large_gap_bound_check(x: u64, config: &SieveConfig) -> Result<LargeGapWitness> {
    require_diagnostic_bound(x)?;
    Ok(large_gap_witness(&gap_histogram(x, config)?))
}

/// Mean of `Σ_{p ≤ x} 1/p - ln ln x` over the given bounds.
pub fn fit_mertens_constant(bounds: &[u64]) -> Result<f64> {
    if bounds.is_empty() {
        return Err(Error::Argument("no bounds to fit against".into()));
    }
    let mut total = 0.0;
    for &x in bounds {
        if x < 3 {
            return Err(Error::Domain(format!("ln ln x needs x >= 3, got {x}")));
        }
        total += mertens_reciprocal_sum(x)? - (x as f64).ln().ln();
    }
    Ok(total / bounds.len() as f64)
}
