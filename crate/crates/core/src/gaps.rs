//! Consecutive-prime gap counts and the pair/triple counts that bracket them.
//!
//! `N(x, d)` counts primes `p_n <= x` (n >= 2) whose predecessor is `p_n - d`;
//! the gap `3 - 2 = 1` is included. `π₂` and `π₃` count prime pairs and
//! triples at fixed offsets without requiring adjacency.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::parallel::WorkerPool;
use crate::sieve::{primes_up_to, summarize_window, SegmentSummary, Sieve, SieveConfig};

/// Default upper bound for the brute-force pair and triple counts.
pub const DEFAULT_PAIR_CAP: u64 = 10_000_000;

/// Sparse map from gap `d` to the number of consecutive-prime gaps equal to `d`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapHistogram {
    counts: BTreeMap<u64, u64>,
    upper_bound_x: u64,
}

impl GapHistogram {
    pub fn from_counts(mut counts: BTreeMap<u64, u64>, upper_bound_x: u64) -> Self {
        counts.retain(|_, c| *c > 0);
        Self {
            counts,
            upper_bound_x,
        }
    }

    pub fn upper_bound_x(&self) -> u64 {
        self.upper_bound_x
    }

    pub fn count(&self, d: u64) -> u64 {
        self.counts.get(&d).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.counts.iter().map(|(&d, &c)| (d, c))
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Total number of gaps, `π(x) - 1` for a full histogram.
    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    /// `Σ d · N(x, d)`; telescopes to `(largest prime <= x) - 2`.
    pub fn weighted_sum(&self) -> u64 {
        self.counts.iter().map(|(d, c)| d * c).sum()
    }

    pub fn max_gap(&self) -> Option<u64> {
        self.counts.keys().next_back().copied()
    }

    pub fn report(&self) -> ChampionReport {
        let n_star = self.counts.values().copied().max().unwrap_or(0);
        let champions = if n_star == 0 {
            Vec::new()
        } else {
            self.iter()
                .filter(|&(_, c)| c == n_star)
                .map(|(d, _)| d)
                .collect()
        };
        ChampionReport {
            x: self.upper_bound_x,
            n_star,
            champions,
            total_gaps: self.total(),
        }
    }

    /// CSV with header `d,count`, rows in ascending `d`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("d,count\n");
        for (d, c) in self.iter() {
            writeln!(out, "{d},{c}").expect("writing to a String cannot fail");
        }
        out
    }
}

/// `N*(x)` and the jumping champions `D*(x)` for one bound `x`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChampionReport {
    pub x: u64,
    pub n_star: u64,
    /// Ascending.
    pub champions: Vec<u64>,
    pub total_gaps: u64,
}

/// Running merge of tile summaries in tile order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GapAccumulator {
    counts: BTreeMap<u64, u64>,
    last_prime: Option<u64>,
    prime_count: u64,
    processed_up_to: u64,
}

impl GapAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    /// Rebuilds an accumulator from a saved histogram.
    pub fn restore(histogram: &GapHistogram, last_prime: u64) -> Self {
        Self {
            counts: histogram.counts.clone(),
            last_prime: Some(last_prime),
            prime_count: histogram.total() + 1,
            processed_up_to: histogram.upper_bound_x,
        }
    }

    /// Appends the next summary; its range must start right after the data seen so far.
    pub fn absorb(&mut self, summary: &SegmentSummary) {
        debug_assert!(
            self.processed_up_to == 0 || summary.range_start == self.processed_up_to + 1,
            "summaries must be merged in tile order"
        );
        if let (Some(prev), Some(first)) = (self.last_prime, summary.first_prime) {
            *self.counts.entry(first - prev).or_insert(0) += 1;
        }
        for (d, c) in summary.interior_histogram.iter() {
            *self.counts.entry(d).or_insert(0) += c;
        }
        if summary.last_prime.is_some() {
            self.last_prime = summary.last_prime;
        }
        self.prime_count += summary.prime_count;
        self.processed_up_to = summary.range_end;
    }

    pub fn last_prime(&self) -> Option<u64> {
        self.last_prime
    }

    pub fn prime_count(&self) -> u64 {
        self.prime_count
    }

    pub fn processed_up_to(&self) -> u64 {
        self.processed_up_to
    }

    pub fn histogram(&self) -> GapHistogram {
        GapHistogram::from_counts(self.counts.clone(), self.processed_up_to)
    }

    /// Histogram at the end of `prefix`, as if it had been absorbed.
    fn histogram_with(&self, prefix: &SegmentSummary) -> GapHistogram {
        let mut probe = self.clone();
        probe.absorb(prefix);
        probe.histogram()
    }
}

/// Sieves `tiles` (in parallel when the pool allows) and merges them into
/// `acc` in tile order, handing over the histogram at every checkpoint in range.
pub(crate) fn advance_tiles<F: FnMut(GapHistogram)>(
    sieve: &Sieve,
    pool: &WorkerPool,
    tiles: Range<u64>,
    checkpoints: &[u64],
    acc: &mut GapAccumulator,
    mut on_checkpoint: F,
) {
    let outputs = pool.map_ordered(tiles, |index| {
        let tile = sieve.config().tile(index).expect("tile index in range");
        let lo = checkpoints.partition_point(|&c| c < tile.start);
        let hi = checkpoints.partition_point(|&c| c <= tile.end);
        let window = sieve.window(index).expect("tile index in range");
        summarize_window(&window, &checkpoints[lo..hi])
    });
    for (summary, prefixes) in outputs {
        for (_, prefix) in &prefixes {
            on_checkpoint(acc.histogram_with(prefix));
        }
        acc.absorb(&summary);
    }
}

fn require_gap_bound(x: u64) -> Result<()> {
    if x < 3 {
        return Err(Error::Domain(format!(
            "no consecutive-prime gap exists below 3 (x = {x})"
        )));
    }
    Ok(())
}

/// Full gap histogram for primes up to `x`, using `config`'s tiling and workers.
pub fn gap_histogram(x: u64, config: &SieveConfig) -> Result<GapHistogram> {
    require_gap_bound(x)?;
    let sieve = Sieve::new(config.with_limit(x)?);
    let pool = WorkerPool::new(config.worker_count());
    let mut acc = GapAccumulator::new();
    advance_tiles(
        &sieve,
        &pool,
        0..sieve.config().tile_count(),
        &[],
        &mut acc,
        |_| {},
    );
    Ok(acc.histogram())
}

pub fn champions(x: u64, config: &SieveConfig) -> Result<ChampionReport> {
    Ok(gap_histogram(x, config)?.report())
}

pub(crate) fn validate_checkpoints(checkpoints: &[u64], x_max: u64) -> Result<()> {
    if let Some(w) = checkpoints.windows(2).find(|w| w[0] >= w[1]) {
        return Err(Error::Argument(format!(
            "checkpoints must be strictly ascending ({} then {})",
            w[0], w[1]
        )));
    }
    if let Some(&first) = checkpoints.first() {
        require_gap_bound(first)?;
    }
    if let Some(&last) = checkpoints.last() {
        if last > x_max {
            return Err(Error::Argument(format!(
                "checkpoint {last} exceeds the sieve bound {x_max}"
            )));
        }
    }
    Ok(())
}

/// Histograms at each checkpoint from one sieve pass up to `x_max`.
pub fn histogram_timeline(
    x_max: u64,
    checkpoints: &[u64],
    config: &SieveConfig,
) -> Result<Vec<GapHistogram>> {
    validate_checkpoints(checkpoints, x_max)?;
    let Some(&last) = checkpoints.last() else {
        return Ok(Vec::new());
    };
    // Nothing past the last checkpoint influences any histogram.
    let sieve = Sieve::new(config.with_limit(last)?);
    let pool = WorkerPool::new(config.worker_count());
    let mut acc = GapAccumulator::new();
    let mut out = Vec::with_capacity(checkpoints.len());
    advance_tiles(
        &sieve,
        &pool,
        0..sieve.config().tile_count(),
        checkpoints,
        &mut acc,
        |h| out.push(h),
    );
    Ok(out)
}

/// Reports at each checkpoint from one sieve pass up to `x_max`.
pub fn champion_timeline(
    x_max: u64,
    checkpoints: &[u64],
    config: &SieveConfig,
) -> Result<Vec<ChampionReport>> {
    Ok(histogram_timeline(x_max, checkpoints, config)?
        .iter()
        .map(GapHistogram::report)
        .collect())
}

/// Tracks `D*(x)` prime by prime.
#[derive(Debug, Clone, Default)]
pub struct ChampionTracker {
    counts: Vec<u64>,
    n_star: u64,
    champions: Vec<u64>,
    last_prime: Option<u64>,
}

impl ChampionTracker {
    pub fn new() -> Self {
        Self::default()
    }

    /// Feeds the next prime; returns whether the champion set changed.
    pub fn push(&mut self, p: u64) -> bool {
        let Some(prev) = self.last_prime.replace(p) else {
            return false;
        };
        let d = (p - prev) as usize;
        if d >= self.counts.len() {
            self.counts.resize(d + 1, 0);
        }
        self.counts[d] += 1;
        let c = self.counts[d];
        let d = d as u64;
        if c > self.n_star {
            self.n_star = c;
            let changed = self.champions != [d];
            self.champions.clear();
            self.champions.push(d);
            changed
        } else if c == self.n_star {
            let at = self.champions.partition_point(|&e| e < d);
            self.champions.insert(at, d);
            true
        } else {
            false
        }
    }

    pub fn n_star(&self) -> u64 {
        self.n_star
    }

    pub fn champions(&self) -> &[u64] {
        &self.champions
    }
}

/// A maximal run of consecutive primes over which `D*` is constant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChampionEpoch {
    pub first_prime: u64,
    pub last_prime: u64,
    pub champions: Vec<u64>,
}

/// Every change of `D*(q)` as `q` runs over the primes `3 <= q <= x_max`.
pub fn champion_epochs(x_max: u64, config: &SieveConfig) -> Result<Vec<ChampionEpoch>> {
    require_gap_bound(x_max)?;
    let sieve = Sieve::new(config.with_limit(x_max)?);
    let mut tracker = ChampionTracker::new();
    let mut epochs: Vec<ChampionEpoch> = Vec::new();
    sieve.for_each_prime(|p| {
        if tracker.push(p) {
            epochs.push(ChampionEpoch {
                first_prime: p,
                last_prime: p,
                champions: tracker.champions().to_vec(),
            });
        } else if let Some(e) = epochs.last_mut() {
            e.last_prime = p;
        }
    });
    Ok(epochs)
}

/// Prime membership bitmap for the brute-force pair/triple counts.
#[derive(Debug, Clone)]
pub struct PairCounter {
    x: u64,
    primes: Vec<u64>,
    odd_bits: Vec<u64>,
}

impl PairCounter {
    pub fn new(x: u64) -> Result<Self> {
        Self::with_cap(x, DEFAULT_PAIR_CAP)
    }

    pub fn with_cap(x: u64, cap: u64) -> Result<Self> {
        if x < 2 {
            return Err(Error::Domain(format!("pair counts need x >= 2, got {x}")));
        }
        if x > cap {
            return Err(Error::Resource { requested: x, cap });
        }
        let primes = primes_up_to(x);
        let mut odd_bits = vec![0u64; (x / 2 + 1).div_ceil(64) as usize];
        for &p in primes.iter().skip(1) {
            let i = (p / 2) as usize;
            odd_bits[i >> 6] |= 1 << (i & 63);
        }
        Ok(Self {
            x,
            primes,
            odd_bits,
        })
    }

    pub fn x(&self) -> u64 {
        self.x
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    #[inline]
    pub fn is_prime(&self, n: u64) -> bool {
        if n > self.x {
            return false;
        }
        if n.is_multiple_of(2) {
            return n == 2;
        }
        let i = (n / 2) as usize;
        self.odd_bits[i >> 6] >> (i & 63) & 1 == 1
    }

    /// Primes `p <= x` with `p - d` also prime.
    pub fn pi2(&self, d: u64) -> Result<u64> {
        if d == 0 {
            return Err(Error::Argument("pair offset d must be at least 1".into()));
        }
        Ok(self
            .primes
            .iter()
            .filter(|&&p| p > d && self.is_prime(p - d))
            .count() as u64)
    }

    /// Primes `p <= x` with both `p - d` and `p - d'` prime, `1 <= d' < d`.
    pub fn pi3(&self, d: u64, d_prime: u64) -> Result<u64> {
        if d_prime == 0 || d_prime >= d {
            return Err(Error::Argument(format!(
                "triple offsets need 1 <= d' < d, got d' = {d_prime}, d = {d}"
            )));
        }
        Ok(self
            .primes
            .iter()
            .filter(|&&p| p > d && self.is_prime(p - d) && self.is_prime(p - d_prime))
            .count() as u64)
    }
}

/// π₂(x, d) with the default brute-force cap.
pub fn pi2(x: u64, d: u64) -> Result<u64> {
    PairCounter::new(x)?.pi2(d)
}

/// π₃(x, d, d') with the default brute-force cap.
pub fn pi3(x: u64, d: u64, d_prime: u64) -> Result<u64> {
    if d_prime == 0 || d_prime >= d {
        return Err(Error::Argument(format!(
            "triple offsets need 1 <= d' < d, got d' = {d_prime}, d = {d}"
        )));
    }
    PairCounter::new(x)?.pi3(d, d_prime)
}

/// The three quantities of `π₂ - Σ π₃ <= N <= π₂` at one `(x, d)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SandwichWitness {
    pub x: u64,
    pub d: u64,
    pub gap_count: u64,
    pub pi2: u64,
    pub pi3_sum: u64,
    pub lower_holds: bool,
    pub upper_holds: bool,
}

impl SandwichWitness {
    pub fn holds(&self) -> bool {
        self.lower_holds && self.upper_holds
    }

    pub fn lower_bound(&self) -> i64 {
        self.pi2 as i64 - self.pi3_sum as i64
    }

    /// `N - (π₂ - Σ π₃)`.
    pub fn lower_slack(&self) -> i64 {
        self.gap_count as i64 - self.lower_bound()
    }
}

/// Reuses one sieve histogram and one membership table across many `d`.
#[derive(Debug, Clone)]
pub struct SandwichVerifier {
    histogram: GapHistogram,
    pairs: PairCounter,
}

impl SandwichVerifier {
    pub fn new(x: u64, config: &SieveConfig) -> Result<Self> {
        let pairs = PairCounter::new(x)?;
        let histogram = gap_histogram(x, config)?;
        Ok(Self { histogram, pairs })
    }

    pub fn histogram(&self) -> &GapHistogram {
        &self.histogram
    }

    pub fn check(&self, d: u64) -> Result<SandwichWitness> {
        if d == 0 || d % 2 == 1 {
            return Err(Error::Argument(format!(
                "sandwich check needs even d >= 2, got {d}"
            )));
        }
        let gap_count = self.histogram.count(d);
        let pi2 = self.pairs.pi2(d)?;
        let pi3_sum = (1..d)
            .map(|dp| self.pairs.pi3(d, dp))
            .sum::<Result<u64>>()?;
        let lower = pi2 as i64 - pi3_sum as i64;
        Ok(SandwichWitness {
            x: self.pairs.x(),
            d,
            gap_count,
            pi2,
            pi3_sum,
            lower_holds: lower <= gap_count as i64,
            upper_holds: gap_count <= pi2,
        })
    }
}

pub fn verify_sandwich(x: u64, d: u64) -> Result<SandwichWitness> {
    if x < 3 {
        return Err(Error::Domain(format!(
            "sandwich check needs x >= 3, got {x}"
        )));
    }
    SandwichVerifier::new(x, &SieveConfig::new(x)?)?.check(d)
}
