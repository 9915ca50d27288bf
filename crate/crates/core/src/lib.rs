//! Prime-gap statistics engine.
//!
//! Computes jumping champions (the most frequent gaps between consecutive
//! primes up to `x`) with a parallel segmented sieve, evaluates the
//! Hardy–Littlewood singular series with rigorous truncation bounds, and
//! cross-checks the inequalities that connect the two.

pub mod checkpoint;
pub mod error;
pub mod gaps;
pub mod numeric;
pub mod parallel;
pub mod predictor;
pub mod primorial;
pub mod runner;
pub mod series;
pub mod sieve;

pub use error::{Error, Result};
pub use gaps::{
    champion_epochs, champion_timeline, champions, gap_histogram, histogram_timeline, pi2, pi3,
    verify_sandwich, ChampionEpoch, ChampionReport, GapAccumulator, GapHistogram, PairCounter,
    SandwichVerifier, SandwichWitness,
};
pub use predictor::{predicted_champion, predicted_count, theorem_witness, Model, Prediction};
pub use primorial::{primorial, sequence_floor, theta_characterization, verify_lemma1};
pub use series::{
    check_bound5, mertens_product, nu_residues, singular_series, triple_singular_series,
    twin_prime_constant, SeriesValue, TripleConfig,
};
pub use sieve::{
    chebyshev_theta, mertens_reciprocal_sum, prime_count, primes_up_to, sieve_segment,
    SegmentSummary, Sieve, SieveConfig,
};
