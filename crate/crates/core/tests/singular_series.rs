use jumpchamp::numeric::{distinct_prime_factors, is_prime_small};
use jumpchamp::series::{pair_factor_ratio, twin_prime_constant, BOUND5_CONSTANT, EULER_GAMMA};
use jumpchamp::{
    check_bound5, mertens_product, nu_residues, singular_series, triple_singular_series, Error,
    TripleConfig,
};
use proptest::prelude::*;

const C2_REF: f64 = 0.660_161_815_846_869_6;

fn radical(d: u64) -> u64 {
    distinct_prime_factors(d).iter().product()
}

fn odd_primes_below(n: u64) -> Vec<u64> {
    (3..n).filter(|&p| is_prime_small(p)).collect()
}

/// `a/b < c/e` for positive rationals.
fn less(a: (u128, u128), c: (u128, u128)) -> bool {
    a.0 * c.1 < c.0 * a.1
}

#[test]
fn series_vanishes_exactly_on_odd_offsets() {
    for d in -200i64..=200 {
        if d == 0 {
            assert!(matches!(singular_series(0), Err(Error::Domain(_))));
            continue;
        }
        let s = singular_series(d).unwrap();
        if d % 2 != 0 {
            assert_eq!((s.value, s.error_bound), (0.0, 0.0), "d = {d}");
        } else {
            assert!(s.value > 0.0);
            assert_eq!(s.value, singular_series(-d).unwrap().value);
        }
    }
}

#[test]
fn even_series_is_at_least_twice_the_twin_constant() {
    let c2 = twin_prime_constant(1_000_000).unwrap();
    for d in (2..5000u64).step_by(2) {
        let s = singular_series(d as i64).unwrap();
        let power_of_two = d.is_power_of_two();
        if power_of_two {
            assert!((s.value - 2.0 * c2.value).abs() <= 1e-15, "d = {d}");
        } else {
            assert!(s.value > 2.0 * c2.value, "d = {d}");
        }
    }
    assert!((singular_series(2).unwrap().value - 2.0 * C2_REF).abs() < 2e-6);
    assert!((singular_series(6).unwrap().value - 4.0 * C2_REF).abs() < 4e-6);
    assert!((singular_series(30).unwrap().value - 16.0 / 3.0 * C2_REF).abs() < 8e-6);
}

#[test]
fn factor_swap_increases_the_series() {
    // Replacing an odd prime factor q of squarefree d by a smaller prime p ∤ d
    // strictly increases 𝔖.
    let small = odd_primes_below(2310);
    let mut swaps = 0;
    for d in (2..2310u64).step_by(2) {
        if radical(d) != d {
            continue;
        }
        let before = pair_factor_ratio(d);
        for &q in distinct_prime_factors(d).iter().filter(|&&q| q > 2) {
            for &p in small
                .iter()
                .take_while(|&&p| p < q)
                .filter(|&&p| d % p != 0)
            {
                let swapped = d / q * p;
                assert!(
                    less(before, pair_factor_ratio(swapped)),
                    "d = {d}, {q} -> {p}"
                );
                assert!(
                    singular_series(swapped as i64).unwrap().value
                        > singular_series(d as i64).unwrap().value
                );
                swaps += 1;
            }
        }
    }
    assert!(swaps > 1000);
}

#[test]
fn twin_constant_brackets_and_tightens() {
    let truncations = [3, 5, 10, 100, 1_000, 10_000, 100_000, 1_000_000];
    let values: Vec<_> = truncations
        .iter()
        .map(|&p| twin_prime_constant(p).unwrap())
        .collect();
    for w in values.windows(2) {
        assert!(w[1].error_bound < w[0].error_bound);
        assert!(w[1].value <= w[0].value);
    }
    for v in &values {
        assert!(v.lower() <= C2_REF && C2_REF <= v.value, "{v:?}");
        assert!(values.last().unwrap().value >= v.lower());
    }
    let c2 = values.last().unwrap();
    assert!((c2.value - 0.66016).abs() < 5e-6);
    assert!(c2.error_bound < 1e-6);
    assert!(matches!(twin_prime_constant(2), Err(Error::Domain(_))));
}

#[test]
fn nu_counts_residues_exhaustively() {
    for p in (2..=100).filter(|&p| is_prime_small(p)) {
        for d in 2..=100i64 {
            for dp in 1..d {
                let nu = nu_residues(&[0, dp, d], p).unwrap();
                let delta = (dp * d * (d - dp)) as u64;
                assert!(nu <= p.min(3));
                assert_eq!(
                    nu == 3,
                    !delta.is_multiple_of(p),
                    "p = {p}, d = {d}, d' = {dp}"
                );
            }
        }
    }
    assert_eq!(nu_residues(&[0, 2, 6], 5).unwrap(), 3);
    assert_eq!(nu_residues(&[0, 2, 6], 3).unwrap(), 2);
    assert_eq!(nu_residues(&[0, 2, 4], 3).unwrap(), 3);
    assert!(nu_residues(&[], 3).is_err());
    assert!(nu_residues(&[0, 1], 4).is_err());
}

#[test]
fn inadmissible_triples_vanish() {
    let s = triple_singular_series(&TripleConfig::new(4, 2).unwrap(), 1000).unwrap();
    assert_eq!((s.value, s.error_bound), (0.0, 0.0));
    for d in (2..=60u64).step_by(2) {
        for dp in 1..d {
            let cfg = TripleConfig::new(d, dp).unwrap();
            let covers = [2, 3]
                .iter()
                .any(|&p| nu_residues(&cfg.offsets(), p).unwrap() == p);
            let s = triple_singular_series(&cfg, 10_000).unwrap();
            assert_eq!(s.value == 0.0, covers, "d = {d}, d' = {dp}");
        }
    }
}

#[test]
fn triple_partial_products_decrease_past_delta() {
    for (d, dp) in [(6, 2), (6, 4), (12, 6), (30, 12), (90, 40)] {
        let cfg = TripleConfig::new(d, dp).unwrap();
        let largest = *distinct_prime_factors(cfg.delta()).last().unwrap();
        for p in (largest + 1..20_000).filter(|&p| is_prime_small(p)) {
            assert!(cfg.local_factor(p) <= 1.0, "p = {p}");
        }
    }
}

#[test]
fn triple_series_is_stable_under_truncation() {
    let cfg = TripleConfig::new(6, 2).unwrap();
    let coarse = triple_singular_series(&cfg, 10_000).unwrap();
    let mid = triple_singular_series(&cfg, 100_000).unwrap();
    let fine = triple_singular_series(&cfg, 1_000_000).unwrap();
    assert!((coarse.value - fine.value).abs() < 1e-4);
    assert!(coarse.overlaps(&fine) && mid.overlaps(&fine));
    assert!(coarse.contains(fine.value) && mid.contains(fine.value));
    assert!(fine.error_bound < mid.error_bound && mid.error_bound < coarse.error_bound);
    assert!(triple_singular_series(&TripleConfig::new(30, 7).unwrap(), 5).is_err());
}

#[test]
fn mertens_product_matches_reference() {
    let m = mertens_product(1_000_000).unwrap();
    assert!((m / 0.04063821017164838 - 1.0).abs() < 1e-12);
    let asymptotic = (-EULER_GAMMA).exp() / 1e6f64.ln();
    assert!((m / asymptotic - 1.0).abs() < 0.02);
    assert_eq!(mertens_product(2).unwrap(), 0.5);
    assert!(mertens_product(1).is_err());
}

#[test]
fn bound5_holds_on_small_triples() {
    let mut worst: f64 = 0.0;
    for d in (4..=100u64).step_by(2) {
        for dp in 1..d {
            let w = check_bound5(&TripleConfig::new(d, dp).unwrap(), 0.5).unwrap();
            assert!(w.passes, "{w:?}");
            worst = worst.max(w.ratio);
        }
    }
    assert!(worst < BOUND5_CONSTANT);
    assert!(check_bound5(&TripleConfig::new(6, 2).unwrap(), 0.0).is_err());
}

#[test]
fn triple_config_validation() {
    assert!(matches!(TripleConfig::new(5, 2), Err(Error::Argument(_))));
    assert!(matches!(TripleConfig::new(6, 6), Err(Error::Argument(_))));
    assert!(matches!(TripleConfig::new(6, 0), Err(Error::Argument(_))));
    assert!(matches!(
        TripleConfig::new(u64::MAX - 1, 3),
        Err(Error::Range(_))
    ));
    assert_eq!(TripleConfig::new(6, 2).unwrap().delta(), 48);
}

proptest! {
    #[test]
    fn multiplicity_does_not_change_the_series(d in 1u64..200_000, k in 1u32..4) {
        let d = 2 * d;
        let pumped = d * radical(d).pow(k).min(1 << 20);
        prop_assume!(pumped % d == 0 && radical(pumped) == radical(d));
        prop_assert_eq!(pair_factor_ratio(pumped), pair_factor_ratio(d));
        prop_assert_eq!(
            singular_series(pumped as i64).unwrap().value,
            singular_series(radical(d) as i64).unwrap().value
        );
    }
}
