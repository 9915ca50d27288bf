//! Bit-packed, odd-only segmented sieve of Eratosthenes.
//!
//! The interval `[2, limit]` is cut into tiles of `2 * segment_size` integers
//! (each tile holds `segment_size` odd candidates, one bit each). Tile `i`
//! covers `[i * span, (i + 1) * span - 1]`, clipped to `[2, limit]`. Base
//! primes up to `isqrt(limit)` are computed once by a plain sieve and shared
//! read-only by every worker.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::gaps::GapHistogram;
use crate::numeric::CompensatedSum;
use crate::parallel::{default_workers, WorkerPool};

pub const DEFAULT_SEGMENT_SIZE: u64 = 1 << 20;
pub const MIN_SEGMENT_SIZE: u64 = 64;
/// Largest accepted limit; leaves headroom so tile arithmetic cannot wrap.
pub const MAX_LIMIT: u64 = u64::MAX - (1 << 40);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SieveConfig {
    limit: u64,
    segment_size: u64,
    worker_count: usize,
}

impl SieveConfig {
    pub fn new(limit: u64) -> Result<Self> {
        if limit < 2 {
            return Err(Error::Domain(format!("sieve limit {limit} is below 2")));
        }
        if limit > MAX_LIMIT {
            return Err(Error::Range(format!(
                "sieve limit {limit} exceeds the 64-bit bound {MAX_LIMIT}"
            )));
        }
        Ok(Self {
            limit,
            segment_size: DEFAULT_SEGMENT_SIZE,
            worker_count: default_workers(),
        })
    }

    pub fn with_segment_size(mut self, segment_size: u64) -> Result<Self> {
        if segment_size < MIN_SEGMENT_SIZE {
            return Err(Error::Argument(format!(
                "segment size {segment_size} is below the minimum {MIN_SEGMENT_SIZE}"
            )));
        }
        if segment_size > 1 << 40 {
            return Err(Error::Argument(format!(
                "segment size {segment_size} is too large"
            )));
        }
        self.segment_size = segment_size;
        Ok(self)
    }

    pub fn with_workers(mut self, worker_count: usize) -> Result<Self> {
        if worker_count == 0 {
            return Err(Error::Argument("worker count must be at least 1".into()));
        }
        self.worker_count = worker_count;
        Ok(self)
    }

    /// Same segment size and workers, different limit.
    pub fn with_limit(self, limit: u64) -> Result<Self> {
        Ok(Self {
            limit: Self::new(limit)?.limit,
            ..self
        })
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn segment_size(&self) -> u64 {
        self.segment_size
    }

    pub fn worker_count(&self) -> usize {
        self.worker_count
    }

    /// Integers covered by one full tile.
    pub fn span(&self) -> u64 {
        2 * self.segment_size
    }

    pub fn tile_count(&self) -> u64 {
        self.limit / self.span() + 1
    }

    pub fn tile(&self, index: u64) -> Result<Tile> {
        if index >= self.tile_count() {
            return Err(Error::Range(format!(
                "tile index {index} out of range (0..{})",
                self.tile_count()
            )));
        }
        let start = (index * self.span()).max(2);
        let end = (index * self.span() + self.span() - 1).min(self.limit);
        Ok(Tile { index, start, end })
    }

    /// Index of the tile containing `n` (which must lie in `[2, limit]`).
    pub fn tile_of(&self, n: u64) -> u64 {
        n / self.span()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Tile {
    pub index: u64,
    pub start: u64,
    pub end: u64,
}

/// All primes `<= n` by a plain odd-only sieve; used for base primes.
pub fn simple_sieve(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = usize::try_from(n).expect("simple sieve bound exceeds address space");
    // index i represents 2i + 1
    let half = (n - 1) / 2 + 1;
    let mut composite = vec![false; half];
    let mut i = 1;
    while (2 * i + 1) * (2 * i + 1) <= n {
        if !composite[i] {
            let p = 2 * i + 1;
            let mut j = p * p / 2;
            while j < half {
                composite[j] = true;
                j += p;
            }
        }
        i += 1;
    }
    let mut primes = Vec::with_capacity(half / 4 + 1);
    primes.push(2);
    primes.extend(
        composite
            .iter()
            .enumerate()
            .skip(1)
            .filter(|(_, &c)| !c)
            .map(|(i, _)| (2 * i + 1) as u64),
    );
    primes
}

/// Odd primes up to `isqrt(limit)`, shared read-only by all tiles.
#[derive(Debug, Clone)]
pub struct BasePrimes {
    covers: u64,
    odd: Vec<u64>,
}

impl BasePrimes {
    /// Base primes sufficient for sieving any window ending at or below `limit`.
    pub fn for_limit(limit: u64) -> Self {
        let root = limit.isqrt();
        let odd = simple_sieve(root).into_iter().skip(1).collect();
        Self { covers: limit, odd }
    }

    pub fn covers(&self) -> u64 {
        self.covers
    }
}

/// Sieved bitmap of one window `[start, end]`.
#[derive(Debug, Clone)]
pub struct SieveWindow {
    start: u64,
    end: u64,
    first_odd: u64,
    len: usize,
    words: Vec<u64>,
}

impl SieveWindow {
    pub fn sieve(base: &BasePrimes, start: u64, end: u64) -> Self {
        assert!(end <= base.covers, "base primes do not cover {end}");
        let start = start.max(2);
        let first_odd = if start <= 3 { 3 } else { start | 1 };
        let len = if end >= first_odd {
            ((end - first_odd) / 2 + 1) as usize
        } else {
            0
        };
        let mut words = vec![u64::MAX; len.div_ceil(64)];
        if len % 64 != 0 {
            if let Some(last) = words.last_mut() {
                *last = (1u64 << (len % 64)) - 1;
            }
        }
        for &p in &base.odd {
            let square = p * p;
            if square > end {
                break;
            }
            let mut m = if square >= first_odd {
                square
            } else {
                first_odd.div_ceil(p) * p
            };
            if m % 2 == 0 {
                m += p;
            }
            let step = p as usize;
            let mut j = ((m - first_odd) / 2) as usize;
            while j < len {
                words[j >> 6] &= !(1u64 << (j & 63));
                j += step;
            }
        }
        Self {
            start,
            end,
            first_odd,
            len,
            words,
        }
    }

    pub fn start(&self) -> u64 {
        self.start
    }

    pub fn end(&self) -> u64 {
        self.end
    }

    fn has_two(&self) -> bool {
        self.start <= 2 && self.end >= 2
    }

    /// Primes of the window in ascending order.
    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        let two = self.has_two().then_some(2);
        let first_odd = self.first_odd;
        let odd = self
            .words
            .iter()
            .enumerate()
            .flat_map(move |(w, &word)| BitIter { word }.map(move |b| (w * 64 + b) as u64))
            .map(move |j| first_odd + 2 * j);
        two.into_iter().chain(odd)
    }

    pub fn count(&self) -> u64 {
        let odd: u64 = self.words.iter().map(|w| u64::from(w.count_ones())).sum();
        odd + u64::from(self.has_two())
    }

    /// Number of odd candidates tracked by the bitmap.
    pub fn candidate_len(&self) -> usize {
        self.len
    }
}

struct BitIter {
    word: u64,
}

impl Iterator for BitIter {
    type Item = usize;

    #[inline]
    fn next(&mut self) -> Option<usize> {
        if self.word == 0 {
            return None;
        }
        let b = self.word.trailing_zeros() as usize;
        self.word &= self.word - 1;
        Some(b)
    }
}

/// Per-tile sieve output: a gap histogram fragment plus the data needed to
/// stitch the gap that crosses into the next tile.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentSummary {
    pub range_start: u64,
    pub range_end: u64,
    pub first_prime: Option<u64>,
    pub last_prime: Option<u64>,
    /// Gaps between consecutive primes both lying inside the range.
    pub interior_histogram: GapHistogram,
    pub prime_count: u64,
}

/// Incrementally builds a [`SegmentSummary`] from an ascending prime stream.
#[derive(Debug, Clone)]
pub(crate) struct SummaryBuilder {
    start: u64,
    first: Option<u64>,
    last: Option<u64>,
    count: u64,
    dense: Vec<u64>,
}

impl SummaryBuilder {
    pub(crate) fn new(start: u64) -> Self {
        Self {
            start,
            first: None,
            last: None,
            count: 0,
            dense: Vec::new(),
        }
    }

    #[inline]
    pub(crate) fn push(&mut self, p: u64) {
        match self.last {
            Some(q) => {
                let gap = (p - q) as usize;
                if gap >= self.dense.len() {
                    self.dense.resize(gap + 1, 0);
                }
                self.dense[gap] += 1;
            }
            None => self.first = Some(p),
        }
        self.last = Some(p);
        self.count += 1;
    }

    pub(crate) fn summary(&self, end: u64) -> SegmentSummary {
        let counts: BTreeMap<u64, u64> = self
            .dense
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(d, &c)| (d as u64, c))
            .collect();
        SegmentSummary {
            range_start: self.start,
            range_end: end,
            first_prime: self.first,
            last_prime: self.last,
            interior_histogram: GapHistogram::from_counts(counts, end),
            prime_count: self.count,
        }
    }
}

/// Summarizes a sieved window; also returns prefix summaries `[start, c]` for
/// every `c` in `marks` (ascending, each within the window).
pub(crate) fn summarize_window(
    window: &SieveWindow,
    marks: &[u64],
) -> (SegmentSummary, Vec<(u64, SegmentSummary)>) {
    let mut builder = SummaryBuilder::new(window.start());
    let mut prefixes = Vec::with_capacity(marks.len());
    let mut pending = marks.iter().copied().peekable();
    for p in window.primes() {
        while let Some(&c) = pending.peek() {
            if c >= p {
                break;
            }
            prefixes.push((c, builder.summary(c)));
            pending.next();
        }
        builder.push(p);
    }
    for c in pending {
        prefixes.push((c, builder.summary(c)));
    }
    (builder.summary(window.end()), prefixes)
}

/// A configured sieve with its base primes.
#[derive(Debug, Clone)]
pub struct Sieve {
    config: SieveConfig,
    base: BasePrimes,
}

impl Sieve {
    pub fn new(config: SieveConfig) -> Self {
        let base = BasePrimes::for_limit(config.limit());
        Self { config, base }
    }

    pub fn config(&self) -> &SieveConfig {
        &self.config
    }

    pub fn base(&self) -> &BasePrimes {
        &self.base
    }

    pub fn window(&self, index: u64) -> Result<SieveWindow> {
        let tile = self.config.tile(index)?;
        Ok(SieveWindow::sieve(&self.base, tile.start, tile.end))
    }

    pub fn segment(&self, index: u64) -> Result<SegmentSummary> {
        Ok(summarize_window(&self.window(index)?, &[]).0)
    }

    pub fn tile_primes(&self, index: u64) -> Result<Vec<u64>> {
        Ok(self.window(index)?.primes().collect())
    }

    /// Calls `f` on every prime up to the limit in ascending order.
    pub fn for_each_prime<F: FnMut(u64)>(&self, mut f: F) {
        for index in 0..self.config.tile_count() {
            let window = self.window(index).expect("index in range");
            window.primes().for_each(&mut f);
        }
    }

    pub fn prime_count(&self) -> u64 {
        let pool = WorkerPool::new(self.config.worker_count());
        pool.map_ordered(0..self.config.tile_count(), |i| {
            self.window(i).expect("index in range").count()
        })
        .into_iter()
        .sum()
    }
}

/// Summary of tile `index` of `config`.
pub fn sieve_segment(config: &SieveConfig, index: u64) -> Result<SegmentSummary> {
    // Validate before paying for base primes.
    config.tile(index)?;
    Sieve::new(*config).segment(index)
}

pub fn primes_up_to(x: u64) -> Vec<u64> {
    if x < 2 {
        return Vec::new();
    }
    let sieve = Sieve::new(SieveConfig::new(x).expect("x >= 2"));
    let mut out = Vec::new();
    sieve.for_each_prime(|p| out.push(p));
    out
}

/// π(x).
pub fn prime_count(x: u64) -> u64 {
    if x < 2 {
        return 0;
    }
    Sieve::new(SieveConfig::new(x).expect("x >= 2")).prime_count()
}

fn prime_sum<F: Fn(u64) -> f64>(x: u64, term: F) -> Result<f64> {
    if x < 2 {
        return Err(Error::Domain(format!(
            "summatory function needs x >= 2, got {x}"
        )));
    }
    let sieve = Sieve::new(SieveConfig::new(x)?);
    let mut acc = CompensatedSum::new();
    sieve.for_each_prime(|p| acc.add(term(p)));
    Ok(acc.value())
}

/// Chebyshev's ϑ(x) = Σ_{p ≤ x} ln p.
pub fn chebyshev_theta(x: u64) -> Result<f64> {
    prime_sum(x, |p| (p as f64).ln())
}

/// Σ_{p ≤ x} 1/p.
pub fn mertens_reciprocal_sum(x: u64) -> Result<f64> {
    prime_sum(x, |p| 1.0 / p as f64)
}
