mod common;

use proptest::prelude::*;

use embq::logic::parse_formula;
use embq::zeroone::{
    estimate_mu, estimate_mu_with_jobs, sample_random_structure, MuEstimate, SampleConfig,
};
use embq::Vocabulary;

use common::test_registry;

const Z95: f64 = 1.959_963_984_540_054;

/// Mean exact coverage of the 95% interval over a grid of p must sit in
/// this band, and no grid point may fall below the floor.
const MEAN_COVERAGE: (f64, f64) = (0.94, 0.96);
const MIN_COVERAGE: f64 = 0.80;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn estimates_do_not_depend_on_thread_count(seed in any::<u64>(), jobs in 2usize..=8, size in 1usize..=8) {
        let reg = test_registry();
        let phi = parse_formula("exists x. Qk2[y1, y2: E(y1,y2) & !(y1 = x)]", &Vocabulary::graph(), &reg).unwrap();
        let cfg = SampleConfig::new(Vocabulary::graph(), size, 40, seed);
        let serial = estimate_mu_with_jobs(&phi, &cfg, Some(1)).unwrap();
        prop_assert_eq!(&serial, &estimate_mu_with_jobs(&phi, &cfg, Some(jobs)).unwrap());
        prop_assert_eq!(&serial, &estimate_mu(&phi, &cfg).unwrap());
        for i in [0u64, 7, 39] {
            prop_assert_eq!(sample_random_structure(&cfg, i), sample_random_structure(&cfg, i));
        }
    }
}

#[test]
fn triangle_frequency_grows_with_size() {
    let reg = test_registry();
    let phi = parse_formula("Qtri[y1, y2: E(y1,y2)]", &Vocabulary::graph(), &reg).unwrap();
    let estimates: Vec<MuEstimate> = [10, 20, 40]
        .iter()
        .map(|&n| estimate_mu(&phi, &SampleConfig::new(Vocabulary::graph(), n, 200, 42)).unwrap())
        .collect();
    for w in estimates.windows(2) {
        assert!(w[1].high >= w[0].low, "{:?} then {:?}", w[0], w[1]);
    }
    assert!(estimates[2].estimate >= estimates[0].estimate);
}

/// Wilson bounds are the roots of (p̂ - p)² = z² p (1 - p) / n; find them by
/// bisection on the score statistic.
fn score_bounds(k: usize, n: usize) -> (f64, f64) {
    let phat = k as f64 / n as f64;
    let inside = |p: f64| (phat - p).powi(2) <= Z95 * Z95 * p * (1.0 - p) / n as f64;
    let bisect = |mut out: f64, mut inn: f64| {
        for _ in 0..200 {
            let mid = (out + inn) / 2.0;
            if inside(mid) {
                inn = mid;
            } else {
                out = mid;
            }
        }
        inn
    };
    let low = if k == 0 { 0.0 } else { bisect(0.0, phat) };
    let high = if k == n { 1.0 } else { bisect(1.0, phat) };
    (low, high)
}

fn binomial_pmf(n: usize, k: usize, p: f64) -> f64 {
    let ln_choose: f64 = (1..=k).map(|i| ((n - k + i) as f64 / i as f64).ln()).sum();
    (ln_choose + k as f64 * p.ln() + (n - k) as f64 * (1.0 - p).ln()).exp()
}

#[test]
fn wilson_interval_matches_score_inversion_and_exact_coverage() {
    for n in 1..=50 {
        let intervals: Vec<MuEstimate> =
            (0..=n).map(|k| MuEstimate::wilson(k, n).unwrap()).collect();
        for (k, m) in intervals.iter().enumerate() {
            let (low, high) = score_bounds(k, n);
            assert!(
                (m.low - low).abs() < 1e-9,
                "n = {n}, k = {k}: low {} vs {low}",
                m.low
            );
            assert!(
                (m.high - high).abs() < 1e-9,
                "n = {n}, k = {k}: high {} vs {high}",
                m.high
            );
            assert!(m.low <= m.estimate && m.estimate <= m.high);
        }
        if n < 5 {
            continue;
        }
        let coverages: Vec<f64> = (1..200)
            .map(|i| {
                let p = i as f64 / 200.0;
                (0..=n)
                    .filter(|&k| intervals[k].low <= p && p <= intervals[k].high)
                    .map(|k| binomial_pmf(n, k, p))
                    .sum()
            })
            .collect();
        let mean = coverages.iter().sum::<f64>() / coverages.len() as f64;
        let min = coverages.iter().cloned().fold(1.0, f64::min);
        assert!(
            mean >= MEAN_COVERAGE.0 && mean <= MEAN_COVERAGE.1,
            "n = {n}: mean coverage {mean}"
        );
        assert!(min >= MIN_COVERAGE, "n = {n}: minimum coverage {min}");
    }
}
