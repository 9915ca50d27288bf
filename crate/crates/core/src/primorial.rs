//! Primorials, the floor with respect to an increasing sequence, and the
//! exhaustive check that `𝔖(d) < 𝔖(𝒫ₖ)` for every `2 <= d < 𝒫ₖ`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::parallel::WorkerPool;
use crate::series::{default_twin_constant, singular_series_with, SeriesValue};

/// `𝒫₁₅` is the last primorial below 2⁶⁴.
pub const MAX_PRIMORIAL_INDEX: usize = 15;
pub const MAX_LEMMA1_INDEX: usize = 7;

const FIRST_PRIMES: [u64; MAX_PRIMORIAL_INDEX + 1] =
    [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

/// `𝒫ₖ = 2·3·5⋯pₖ`.
pub fn primorial(k: usize) -> Result<u64> {
    if k == 0 {
        return Err(Error::Argument("primorial index starts at 1".into()));
    }
    if k > MAX_PRIMORIAL_INDEX {
        return Err(Error::Range(format!(
            "primorial 𝒫_{k} does not fit in 64 bits (max index {MAX_PRIMORIAL_INDEX})"
        )));
    }
    FIRST_PRIMES[..k]
        .iter()
        .try_fold(1u64, |acc, &p| acc.checked_mul(p))
        .ok_or_else(|| Error::Range(format!("primorial 𝒫_{k} overflows")))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimorialEntry {
    pub k: usize,
    pub prime: u64,
    pub value: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimorialTable {
    entries: Vec<PrimorialEntry>,
}

impl PrimorialTable {
    /// `𝒫₁ .. 𝒫₁₅`.
    pub fn new() -> Self {
        let mut value = 1u64;
        let entries = FIRST_PRIMES[..MAX_PRIMORIAL_INDEX]
            .iter()
            .enumerate()
            .map(|(i, &p)| {
                value *= p;
                PrimorialEntry {
                    k: i + 1,
                    prime: p,
                    value,
                }
            })
            .collect();
        Self { entries }
    }

    pub fn entries(&self) -> &[PrimorialEntry] {
        &self.entries
    }

    pub fn values(&self) -> Vec<u64> {
        self.entries.iter().map(|e| e.value).collect()
    }

    /// `⌊y⌋` with respect to the primorials.
    pub fn floor(&self, y: f64) -> Result<PrimorialEntry> {
        let v = sequence_floor(y, &self.values())?;
        Ok(*self
            .entries
            .iter()
            .find(|e| e.value == v)
            .expect("value from table"))
    }
}

impl Default for PrimorialTable {
    fn default() -> Self {
        Self::new()
    }
}

/// The element `aₙ` of an ascending sequence with `aₙ <= y < aₙ₊₁`.
///
/// The last element only bounds the search, so `y` must lie below it.
pub fn sequence_floor(y: f64, sequence: &[u64]) -> Result<u64> {
    if sequence.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Argument(
            "sequence must be strictly increasing".into(),
        ));
    }
    let (Some(&first), Some(&last)) = (sequence.first(), sequence.last()) else {
        return Err(Error::Argument("sequence is empty".into()));
    };
    if y.is_nan() || y < first as f64 {
        return Err(Error::Domain(format!(
            "{y} lies below the first element {first}"
        )));
    }
    if y >= last as f64 {
        return Err(Error::Range(format!(
            "{y} is not below the last tabulated element {last}"
        )));
    }
    let idx = sequence.partition_point(|&a| a as f64 <= y);
    Ok(sequence[idx - 1])
}

/// Both sides of `⌊y⌋_𝒫 = 𝒫ₙ ⇔ ϑ(pₙ) <= ln y < ϑ(pₙ₊₁)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaWitness {
    pub y: f64,
    /// `n` from the primorial floor.
    pub floor_index: usize,
    pub floor_value: u64,
    /// `n` from comparing `ln y` with partial sums of `ln p`.
    pub theta_index: usize,
    pub theta_n: f64,
    pub log_y: f64,
    pub theta_next: f64,
    pub consistent: bool,
}

pub fn theta_characterization(y: f64) -> Result<ThetaWitness> {
    if y.is_nan() || y < 2.0 {
        return Err(Error::Domain(format!(
            "theta characterization needs y >= 2, got {y}"
        )));
    }
    let table = PrimorialTable::new();
    let floor = table.floor(y)?;
    let log_y = y.ln();
    // ln 𝒫ₙ and ϑ(pₙ) agree to rounding; allow for it on the boundary.
    let tol = 8.0 * f64::EPSILON * log_y.max(1.0);
    let thetas: Vec<f64> = FIRST_PRIMES
        .iter()
        .scan(0.0, |acc, &p| {
            *acc += (p as f64).ln();
            Some(*acc)
        })
        .collect();
    let theta_index = thetas.iter().take_while(|&&t| t <= log_y + tol).count();
    let consistent = theta_index == floor.k
        && thetas[floor.k - 1] <= log_y + tol
        && log_y < thetas[floor.k] - tol;
    Ok(ThetaWitness {
        y,
        floor_index: floor.k,
        floor_value: floor.value,
        theta_index,
        theta_n: thetas[floor.k - 1],
        log_y,
        theta_next: thetas[floor.k],
        consistent,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lemma1Witness {
    pub k: usize,
    pub primorial: u64,
    pub primorial_series: SeriesValue,
    /// Smallest `d < 𝒫ₖ` attaining the largest `𝔖(d)`.
    pub maximizer: u64,
    pub maximizer_series: SeriesValue,
    /// Even values of `d` examined.
    pub checked: u64,
    pub holds: bool,
    /// First `d` whose interval lies entirely above `𝔖(𝒫ₖ)`.
    pub counterexample: Option<u64>,
}

#[derive(Debug, Clone, Copy)]
struct ChunkResult {
    best: Option<(u64, SeriesValue)>,
    counterexample: Option<u64>,
    undecided: Option<u64>,
    checked: u64,
}

const LEMMA1_CHUNK: u64 = 1 << 14;

/// Checks `𝔖(d) < 𝔖(𝒫ₖ)` for every even `d` in `[2, 𝒫ₖ)` by interval separation.
///
/// Odd `d` have `𝔖(d) = 0` and need no check.
pub fn verify_lemma1(k: usize, workers: usize) -> Result<Lemma1Witness> {
    verify_lemma1_with(k, workers, &default_twin_constant())
}

pub fn verify_lemma1_with(k: usize, workers: usize, c2: &SeriesValue) -> Result<Lemma1Witness> {
    if !(2..=MAX_LEMMA1_INDEX).contains(&k) {
        return Err(Error::Argument(format!(
            "exhaustive check supports 2 <= k <= {MAX_LEMMA1_INDEX}, got {k}"
        )));
    }
    let p_k = primorial(k)?;
    let target = singular_series_with(p_k as i64, c2)?;
    let chunks = p_k.div_ceil(LEMMA1_CHUNK);
    let pool = WorkerPool::new(workers);
    let results = pool.map_ordered(0..chunks, |chunk| -> Result<ChunkResult> {
        let lo = (chunk * LEMMA1_CHUNK).max(2);
        let hi = ((chunk + 1) * LEMMA1_CHUNK).min(p_k);
        let mut out = ChunkResult {
            best: None,
            counterexample: None,
            undecided: None,
            checked: 0,
        };
        for d in (lo..hi).filter(|d| d % 2 == 0) {
            let s = singular_series_with(d as i64, c2)?;
            out.checked += 1;
            if s.upper() < target.lower() {
                // separated
            } else if s.lower() > target.upper() {
                out.counterexample.get_or_insert(d);
            } else {
                out.undecided.get_or_insert(d);
            }
            if out.best.is_none_or(|(_, b)| s.value > b.value) {
                out.best = Some((d, s));
            }
        }
        Ok(out)
    });

    let mut best: Option<(u64, SeriesValue)> = None;
    let mut counterexample = None;
    let mut undecided = None;
    let mut checked = 0;
    for r in results {
        let r = r?;
        checked += r.checked;
        counterexample = counterexample.or(r.counterexample);
        undecided = undecided.or(r.undecided);
        if let Some((d, s)) = r.best {
            if best.is_none_or(|(_, b)| s.value > b.value) {
                best = Some((d, s));
            }
        }
    }
    if counterexample.is_none() {
        if let Some(d) = undecided {
            return Err(Error::Precision(format!(
                "𝔖({d}) and 𝔖({p_k}) are not separated at truncation {}",
                c2.truncation_prime
            )));
        }
    }
    let (maximizer, maximizer_series) = best.expect("at least d = 2 is checked");
    Ok(Lemma1Witness {
        k,
        primorial: p_k,
        primorial_series: target,
        maximizer,
        maximizer_series,
        checked,
        holds: counterexample.is_none(),
        counterexample,
    })
}
