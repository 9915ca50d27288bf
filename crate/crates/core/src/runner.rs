//! Drivers behind the command-line tool: checkpointed champion runs and the
//! verification suites.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::checkpoint::{Checkpoint, CHECKPOINT_FORMAT_VERSION};
use crate::error::{Error, Result};
use crate::gaps::{
    advance_tiles, champion_epochs, champion_timeline, validate_checkpoints, ChampionReport,
    GapAccumulator, GapHistogram, SandwichVerifier,
};
use crate::parallel::{default_workers, WorkerPool};
use crate::predictor::{large_gap_witness, lower_bound_witness, theorem_witness};
use crate::primorial::{verify_lemma1, MAX_LEMMA1_INDEX};
use crate::series::twin_prime_constant;
use crate::sieve::{Sieve, SieveConfig, DEFAULT_SEGMENT_SIZE};

/// Each power of ten from 10³ below `limit`, then `limit` itself.
pub fn default_checkpoints(limit: u64) -> Vec<u64> {
    let mut out: Vec<u64> = std::iter::successors(Some(1000u64), |&c| c.checked_mul(10))
        .take_while(|&c| c < limit)
        .collect();
    if limit >= 3 {
        out.push(limit);
    }
    out
}

#[derive(Debug, Clone)]
pub struct ChampionRun {
    pub limit: u64,
    pub checkpoints: Vec<u64>,
    pub segment_size: u64,
    pub workers: usize,
    /// Tiles sieved between checkpoint writes.
    pub batch_tiles: u64,
    pub state_path: Option<PathBuf>,
    /// Continue from `state_path` when it exists.
    pub resume: bool,
    /// Stop after this many batches, leaving a resumable checkpoint.
    pub halt_after_batches: Option<u64>,
}

impl ChampionRun {
    pub fn new(limit: u64) -> Self {
        let workers = default_workers();
        Self {
            limit,
            checkpoints: default_checkpoints(limit),
            segment_size: DEFAULT_SEGMENT_SIZE,
            workers,
            batch_tiles: 4 * workers as u64,
            state_path: None,
            resume: false,
            halt_after_batches: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunSummary {
    pub reports: Vec<ChampionReport>,
    pub histogram: GapHistogram,
    pub prime_count: u64,
    pub last_prime: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RunOutcome {
    Finished(RunSummary),
    Halted(Checkpoint),
}

fn snapshot(run: &ChampionRun, acc: &GapAccumulator, reports: &[ChampionReport]) -> Checkpoint {
    Checkpoint {
        format_version: CHECKPOINT_FORMAT_VERSION,
        limit: run.limit,
        segment_size: run.segment_size,
        checkpoints: run.checkpoints.clone(),
        processed_up_to: acc.processed_up_to(),
        last_prime: acc.last_prime().expect("at least one tile processed"),
        histogram: acc.histogram(),
        reports: reports.to_vec(),
    }
}

fn resume_state(
    run: &ChampionRun,
    config: &SieveConfig,
) -> Result<Option<(GapAccumulator, Vec<ChampionReport>, u64)>> {
    let Some(path) = run
        .state_path
        .as_deref()
        .filter(|p| run.resume && p.exists())
    else {
        return Ok(None);
    };
    let cp = Checkpoint::load(path)?;
    if cp.limit != run.limit {
        return Err(Error::Checkpoint(format!(
            "checkpoint was written for limit {} but this run has limit {}",
            cp.limit, run.limit
        )));
    }
    if cp.segment_size != run.segment_size {
        return Err(Error::Checkpoint(format!(
            "checkpoint was written with segment size {} but this run uses {}",
            cp.segment_size, run.segment_size
        )));
    }
    if cp.checkpoints != run.checkpoints {
        return Err(Error::Checkpoint(
            "checkpoint was written for a different checkpoint list".into(),
        ));
    }
    let next_tile = config.tile_of(cp.processed_up_to) + 1;
    if config.tile(next_tile - 1)?.end != cp.processed_up_to {
        return Err(Error::Checkpoint(format!(
            "processed bound {} is not a tile boundary",
            cp.processed_up_to
        )));
    }
    let acc = GapAccumulator::restore(&cp.histogram, cp.last_prime);
    Ok(Some((acc, cp.reports, next_tile)))
}

/// Sieves to `run.limit` in batches, calling `on_report` as each checkpoint is
/// reached and saving state after every batch when a path is configured.
pub fn run_champions<F>(run: &ChampionRun, mut on_report: F) -> Result<RunOutcome>
where
    F: FnMut(&ChampionReport),
{
    if run.limit < 3 {
        return Err(Error::Domain(format!(
            "champion runs need limit >= 3, got {}",
            run.limit
        )));
    }
    if run.batch_tiles == 0 {
        return Err(Error::Argument(
            "batch size must be at least one tile".into(),
        ));
    }
    validate_checkpoints(&run.checkpoints, run.limit)?;
    let config = SieveConfig::new(run.limit)?
        .with_segment_size(run.segment_size)?
        .with_workers(run.workers)?;
    let (mut acc, mut reports, mut next_tile) =
        resume_state(run, &config)?.unwrap_or_else(|| (GapAccumulator::new(), Vec::new(), 0));

    let sieve = Sieve::new(config);
    let pool = WorkerPool::new(run.workers);
    let total = config.tile_count();
    let mut batches = 0u64;
    while next_tile < total {
        let end = (next_tile + run.batch_tiles).min(total);
        advance_tiles(
            &sieve,
            &pool,
            next_tile..end,
            &run.checkpoints,
            &mut acc,
            |h| {
                let report = h.report();
                on_report(&report);
                reports.push(report);
            },
        );
        next_tile = end;
        batches += 1;
        if let Some(path) = &run.state_path {
            snapshot(run, &acc, &reports).save_atomic(path)?;
        }
        if next_tile < total && run.halt_after_batches == Some(batches) {
            return Ok(RunOutcome::Halted(snapshot(run, &acc, &reports)));
        }
    }
    Ok(RunOutcome::Finished(RunSummary {
        histogram: acc.histogram(),
        prime_count: acc.prime_count(),
        last_prime: acc.last_prime().expect("limit >= 3"),
        reports,
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Table1,
    Lemma1,
    Sandwich,
    Bounds,
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Suite::Table1 => "table1",
            Suite::Lemma1 => "lemma1",
            Suite::Sandwich => "sandwich",
            Suite::Bounds => "bounds",
        })
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "table1" => Ok(Suite::Table1),
            "lemma1" => Ok(Suite::Lemma1),
            "sandwich" => Ok(Suite::Sandwich),
            "bounds" => Ok(Suite::Bounds),
            other => Err(Error::Argument(format!("unknown suite {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct VerifyParams {
    /// Largest primorial index for the lemma suite.
    pub k: usize,
    /// Bound for the sandwich and bounds suites, and the table scan.
    pub x: u64,
    pub workers: usize,
}

impl Default for VerifyParams {
    fn default() -> Self {
        Self {
            k: 5,
            x: 1_000_000,
            workers: default_workers(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub witness: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub suite: Suite,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

/// One row of the known-champions table: the set, its smallest prime
/// occurrence, and its largest known occurrence (`None` when open-ended).
#[derive(Debug, Clone, Copy)]
pub struct KnownChampions {
    pub champions: &'static [u64],
    pub smallest: u64,
    pub largest_known: Option<u64>,
}

pub const KNOWN_CHAMPIONS: [KnownChampions; 9] = [
    KnownChampions {
        champions: &[1],
        smallest: 3,
        largest_known: Some(3),
    },
    KnownChampions {
        champions: &[1, 2],
        smallest: 5,
        largest_known: Some(5),
    },
    KnownChampions {
        champions: &[2],
        smallest: 7,
        largest_known: Some(433),
    },
    KnownChampions {
        champions: &[2, 4],
        smallest: 101,
        largest_known: Some(173),
    },
    KnownChampions {
        champions: &[4],
        smallest: 131,
        largest_known: Some(541),
    },
    KnownChampions {
        champions: &[2, 4, 6],
        smallest: 179,
        largest_known: Some(487),
    },
    KnownChampions {
        champions: &[2, 6],
        smallest: 379,
        largest_known: Some(463),
    },
    KnownChampions {
        champions: &[6],
        smallest: 389,
        largest_known: None,
    },
    KnownChampions {
        champions: &[4, 6],
        smallest: 547,
        largest_known: Some(941),
    },
];

fn check<T: Serialize>(name: impl Into<String>, passed: bool, witness: &T) -> CheckResult {
    CheckResult {
        name: name.into(),
        passed,
        witness: serde_json::to_value(witness).unwrap_or(Value::Null),
    }
}

fn failed(name: impl Into<String>, err: &Error) -> CheckResult {
    CheckResult {
        name: name.into(),
        passed: false,
        witness: json!({ "error": err.to_string() }),
    }
}

fn table1_checks(params: &VerifyParams) -> Result<Vec<CheckResult>> {
    let scan = params.x.max(1000);
    let config = SieveConfig::new(scan)?.with_workers(params.workers)?;
    let smallest: Vec<u64> = KNOWN_CHAMPIONS.iter().map(|r| r.smallest).collect();
    let mut order: Vec<usize> = (0..smallest.len()).collect();
    order.sort_by_key(|&i| smallest[i]);
    let sorted: Vec<u64> = order.iter().map(|&i| smallest[i]).collect();
    let reports = champion_timeline(scan, &sorted, &config)?;
    let epochs = champion_epochs(scan, &config)?;

    let mut out = Vec::new();
    for (&i, report) in order.iter().zip(&reports) {
        let row = &KNOWN_CHAMPIONS[i];
        let first = epochs.iter().find(|e| e.champions == row.champions);
        let passed = report.champions == row.champions
            && first.is_some_and(|e| e.first_prime == row.smallest);
        out.push(check(
            format!(
                "smallest occurrence of {:?} at {}",
                row.champions, row.smallest
            ),
            passed,
            &json!({ "report": report, "first_prime": first.map(|e| e.first_prime) }),
        ));
    }
    for row in &KNOWN_CHAMPIONS {
        let last = epochs.iter().rev().find(|e| e.champions == row.champions);
        let (name, passed) = match row.largest_known {
            Some(l) => (
                format!("last occurrence of {:?} up to {scan} is {l}", row.champions),
                last.is_some_and(|e| e.last_prime == l),
            ),
            None => (
                format!("{:?} still champion at {scan}", row.champions),
                epochs.last().is_some_and(|e| e.champions == row.champions),
            ),
        };
        out.push(check(name, passed, &json!({ "last_epoch": last })));
    }
    Ok(out)
}

fn lemma1_checks(params: &VerifyParams) -> Vec<CheckResult> {
    if !(2..=MAX_LEMMA1_INDEX).contains(&params.k) {
        let e = Error::Argument(format!("k must lie in 2..={MAX_LEMMA1_INDEX}"));
        return vec![failed(format!("lemma1 k = {}", params.k), &e)];
    }
    (2..=params.k)
        .map(|k| {
            let name = format!("𝔖(d) < 𝔖(𝒫_{k}) for all 2 <= d < 𝒫_{k}");
            match verify_lemma1(k, params.workers) {
                Ok(w) => check(name, w.holds && w.primorial % w.maximizer == 0, &w),
                Err(e) => failed(name, &e),
            }
        })
        .collect()
}

fn sandwich_checks(params: &VerifyParams) -> Result<Vec<CheckResult>> {
    let config = SieveConfig::new(params.x)?.with_workers(params.workers)?;
    let verifier = SandwichVerifier::new(params.x, &config)?;
    (2..=50)
        .step_by(2)
        .map(|d| {
            let w = verifier.check(d)?;
            Ok(check(
                format!("sandwich at x = {}, d = {d}", params.x),
                w.holds(),
                &w,
            ))
        })
        .collect()
}

/// Digits `0.66016…` of the twin-prime constant.
const C2_DIGITS: (f64, f64) = (0.66016, 0.66017);

fn bounds_checks(params: &VerifyParams) -> Result<Vec<CheckResult>> {
    let x = params.x;
    let mut out = Vec::new();
    let config = SieveConfig::new(x)?.with_workers(params.workers)?;
    let histogram = crate::gaps::gap_histogram(x, &config)?;

    let lower = lower_bound_witness(&histogram);
    out.push(check(
        format!("N*({x}) > 1.32 x/(ln x)²"),
        lower.holds,
        &lower,
    ));
    let large = large_gap_witness(&histogram);
    out.push(check(
        format!("large-gap bound at {x}"),
        large.holds(),
        &large,
    ));
    match theorem_witness(x) {
        Ok(w) => out.push(check(format!("primorial ratio bound at {x}"), w.holds, &w)),
        Err(e) => out.push(failed(format!("primorial ratio bound at {x}"), &e)),
    }
    let c2 = twin_prime_constant(1_000_000)?;
    let passed = (c2.value - C2_DIGITS.0).abs() <= 5e-6
        && c2.lower() < C2_DIGITS.1
        && c2.upper() >= C2_DIGITS.0;
    out.push(check("twin-prime constant digits", passed, &c2));
    Ok(out)
}

/// Runs a verification suite. Failures, including evaluation errors, are
/// reported as failed checks rather than as errors.
pub fn run_verify(suite: Suite, params: &VerifyParams) -> VerifyReport {
    let checks = match suite {
        Suite::Table1 => table1_checks(params),
        Suite::Lemma1 => Ok(lemma1_checks(params)),
        Suite::Sandwich => sandwich_checks(params),
        Suite::Bounds => bounds_checks(params),
    }
    .unwrap_or_else(|e| vec![failed(suite.to_string(), &e)]);
    VerifyReport {
        suite,
        passed: !checks.is_empty() && checks.iter().all(|c| c.passed),
        checks,
    }
}
