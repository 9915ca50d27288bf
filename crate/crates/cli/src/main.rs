use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use jumpchamp::predictor::{observed_ratio, predicted_count, Model};
use jumpchamp::runner::{
    default_checkpoints, run_champions, run_verify, ChampionRun, RunOutcome, Suite, VerifyParams,
};
use jumpchamp::series::{
    singular_series_with, triple_singular_series, twin_prime_constant, DEFAULT_TRIPLE_TRUNCATION,
    DEFAULT_TRUNCATION,
};
use jumpchamp::sieve::DEFAULT_SEGMENT_SIZE;
use jumpchamp::{
    chebyshev_theta, gap_histogram, mertens_product, mertens_reciprocal_sum, SieveConfig,
    TripleConfig,
};
use serde_json::json;

#[derive(Parser, Debug)]
#[command(
    name = "jumpchamp",
    version,
    about = "Jumping champions and prime-gap statistics"
)]
struct Cli {
    /// Worker threads for sieving.
    #[arg(long, global = true, env = "JUMPCHAMP_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Jumping champions up to a limit, with optional resumable state.
    Champions(ChampionsArgs),
    /// Pair or triple singular series.
    Series(SeriesArgs),
    /// The twin-prime constant with its truncation error bound.
    Constant {
        #[arg(long, default_value_t = DEFAULT_TRUNCATION, value_parser = parse_count)]
        truncation: u64,
    },
    /// Hardy–Littlewood prediction for N(x, d), optionally against the observed count.
    Predict {
        #[arg(long, value_parser = parse_count)]
        limit: u64,
        #[arg(long)]
        d: u64,
        #[arg(long, value_enum, default_value_t = ModelArg::Asymptotic)]
        model: ModelArg,
        /// Sieve up to the limit and report the observed count and ratio.
        #[arg(long)]
        observed: bool,
    },
    /// Run a verification suite; exits non-zero if any check fails.
    Verify {
        #[arg(long, value_enum)]
        suite: SuiteArg,
        /// Largest primorial index for the lemma suite.
        #[arg(long, default_value_t = 5)]
        k: usize,
        /// Bound for the sandwich, bounds and table suites.
        #[arg(long, default_value = "1000000", value_parser = parse_count)]
        x: u64,
    },
    /// Chebyshev's theta, the prime reciprocal sum and Mertens' product at x.
    Theta {
        #[arg(long, value_parser = parse_count)]
        x: u64,
    },
}

#[derive(Args, Debug)]
struct ChampionsArgs {
    #[arg(long, value_parser = parse_count)]
    limit: u64,
    /// Comma-separated report bounds; defaults to powers of ten and the limit.
    #[arg(long, value_delimiter = ',', value_parser = parse_count)]
    checkpoints: Option<Vec<u64>>,
    /// State file: resumed from when present, rewritten after every batch.
    #[arg(long)]
    resume: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutFormat::Json)]
    out: OutFormat,
    /// Odd candidates per sieve segment.
    #[arg(long, default_value_t = DEFAULT_SEGMENT_SIZE, value_parser = parse_count)]
    segment_size: u64,
    /// Segments sieved between state writes.
    #[arg(long)]
    batch: Option<u64>,
    /// Stop after this many batches, leaving the state file to resume from.
    #[arg(long, hide = true)]
    halt_after: Option<u64>,
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct SeriesTarget {
    #[arg(long, allow_hyphen_values = true)]
    d: Option<i64>,
    /// `DP,D` for the triple {0, DP, D}.
    #[arg(long, value_parser = parse_triple)]
    triple: Option<(u64, u64)>,
}

#[derive(Args, Debug)]
struct SeriesArgs {
    #[command(flatten)]
    target: SeriesTarget,
    #[arg(long, value_parser = parse_count)]
    truncation: Option<u64>,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum OutFormat {
    Csv,
    Json,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum ModelArg {
    Asymptotic,
    Integral,
}

impl From<ModelArg> for Model {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Asymptotic => Model::Asymptotic,
            ModelArg::Integral => Model::Integral,
        }
    }
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum SuiteArg {
    Table1,
    Lemma1,
    Sandwich,
    Bounds,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::Table1 => Suite::Table1,
            SuiteArg::Lemma1 => Suite::Lemma1,
            SuiteArg::Sandwich => Suite::Sandwich,
            SuiteArg::Bounds => Suite::Bounds,
        }
    }
}

/// Accepts `1000000`, `1_000_000`, `1e6` and `10^6`.
fn parse_count(s: &str) -> Result<u64, String> {
    let s = s.trim().replace('_', "");
    let pow = |base: &str, exp: &str| -> Result<u64, String> {
        let b: u64 = base.parse().map_err(|e| format!("{base:?}: {e}"))?;
        let e: u32 = exp.parse().map_err(|e| format!("{exp:?}: {e}"))?;
        b.checked_pow(e)
            .ok_or_else(|| format!("{s} does not fit in 64 bits"))
    };
    if let Some((m, e)) = s.split_once(['e', 'E']) {
        let mantissa = pow(m, "1")?;
        return mantissa
            .checked_mul(pow("10", e)?)
            .ok_or_else(|| format!("{s} does not fit in 64 bits"));
    }
    if let Some((b, e)) = s.split_once('^') {
        return pow(b, e);
    }
    s.parse().map_err(|e| format!("{s:?}: {e}"))
}

fn parse_triple(s: &str) -> Result<(u64, u64), String> {
    let (dp, d) = s
        .split_once(',')
        .ok_or_else(|| format!("expected DP,D, got {s:?}"))?;
    Ok((parse_count(dp)?, parse_count(d)?))
}

fn print_json<T: serde::Serialize + ?Sized>(v: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn champions_cmd(args: ChampionsArgs, threads: usize) -> Result<ExitCode> {
    let mut run = ChampionRun::new(args.limit);
    run.checkpoints = args
        .checkpoints
        .unwrap_or_else(|| default_checkpoints(args.limit));
    run.segment_size = args.segment_size;
    run.workers = threads;
    run.batch_tiles = args.batch.unwrap_or(4 * threads as u64);
    run.resume = args.resume.is_some();
    run.state_path = args.resume;
    run.halt_after_batches = args.halt_after;

    let outcome = run_champions(&run, |r| {
        eprintln!("{}", serde_json::to_string(r).expect("report serializes"));
    })?;
    match outcome {
        RunOutcome::Finished(summary) => match args.out {
            OutFormat::Csv => print!("{}", summary.histogram.to_csv()),
            OutFormat::Json => print_json(&summary.reports)?,
        },
        RunOutcome::Halted(cp) => {
            eprintln!(
                "halted at {}; rerun with the same --resume path to continue",
                cp.processed_up_to
            );
            print_json(&json!({
                "halted": true,
                "processed_up_to": cp.processed_up_to,
                "reports": cp.reports,
            }))?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn series_cmd(args: SeriesArgs) -> Result<ExitCode> {
    let value = match (args.target.d, args.target.triple) {
        (Some(d), None) => {
            let c2 = twin_prime_constant(args.truncation.unwrap_or(DEFAULT_TRUNCATION))?;
            singular_series_with(d, &c2)?
        }
        (None, Some(t)) => {
            let cfg = TripleConfig::new(t.1, t.0)?;
            triple_singular_series(&cfg, args.truncation.unwrap_or(DEFAULT_TRIPLE_TRUNCATION))?
        }
        _ => bail!("give exactly one of --d or --triple"),
    };
    print_json(&value)?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> Result<ExitCode> {
    let cli = Cli::parse();
    let threads = match cli.threads {
        Some(0) => bail!("--threads must be at least 1"),
        Some(n) => n,
        None => jumpchamp::parallel::default_workers(),
    };
    match cli.command {
        Command::Champions(args) => champions_cmd(args, threads),
        Command::Series(args) => series_cmd(args),
        Command::Constant { truncation } => {
            print_json(&twin_prime_constant(truncation)?)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Predict {
            limit,
            d,
            model,
            observed,
        } => {
            let model = Model::from(model);
            let p = predicted_count(limit, d, model)?;
            let mut out = json!({
                "x": p.x,
                "d": p.d,
                "model": p.model,
                "predicted": p.predicted_count,
            });
            if observed {
                let config = SieveConfig::new(limit)?.with_workers(threads)?;
                let h = gap_histogram(limit, &config).context("sieving for observed counts")?;
                out["observed"] = json!(h.count(d));
                out["ratio"] = json!(observed_ratio(&h, d, model)?);
            }
            print_json(&out)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { suite, k, x } => {
            let report = run_verify(
                suite.into(),
                &VerifyParams {
                    k,
                    x,
                    workers: threads,
                },
            );
            print_json(&report)?;
            Ok(if report.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
        Command::Theta { x } => {
            print_json(&json!({
                "x": x,
                "theta": chebyshev_theta(x)?,
                "prime_reciprocal_sum": mertens_reciprocal_sum(x)?,
                "mertens_product": mertens_product(x)?,
            }))?;
            Ok(ExitCode::SUCCESS)
        }
    }
}
