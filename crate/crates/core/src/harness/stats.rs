//! Small exact tests used by the campaign and suite reports.

use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, Binomial, ChiSquared, ContinuousCDF, DiscreteCDF};

/// Two-sided Clopper-Pearson interval for `successes` out of `trials` at
/// the given confidence (e.g. 0.95). `trials == 0` gives `[0, 1]`.
pub fn clopper_pearson(successes: u64, trials: u64, confidence: f64) -> (f64, f64) {
    assert!(successes <= trials);
    if trials == 0 {
        return (0.0, 1.0);
    }
    let tail = (1.0 - confidence) / 2.0;
    let (k, n) = (successes as f64, trials as f64);
    let lower = if successes == 0 { 0.0 } else { Beta::new(k, n - k + 1.0).unwrap().inverse_cdf(tail) };
    let upper = if successes == trials { 1.0 } else { Beta::new(k + 1.0, n - k).unwrap().inverse_cdf(1.0 - tail) };
    (lower, upper)
}

/// One-sided exact upper confidence bound on a success probability.
pub fn exact_upper_bound(successes: u64, trials: u64, confidence: f64) -> f64 {
    if trials == 0 || successes == trials {
        return 1.0;
    }
    let (k, n) = (successes as f64, trials as f64);
    Beta::new(k + 1.0, n - k).unwrap().inverse_cdf(confidence)
}

/// `P(X <= k)` for `X ~ Binomial(n, p)`.
pub fn binomial_cdf(k: u64, n: u64, p: f64) -> f64 {
    Binomial::new(p, n).unwrap().cdf(k)
}

/// Goodness-of-fit p-value of `observed` counts against `expected`
/// probabilities (which must sum to one).
pub fn chi_squared_p_value(observed: &[u64], expected: &[f64]) -> f64 {
    assert_eq!(observed.len(), expected.len());
    assert!(observed.len() >= 2);
    let total: u64 = observed.iter().sum();
    let stat: f64 = observed
        .iter()
        .zip(expected)
        .map(|(&o, &p)| {
            let e = p * total as f64;
            (o as f64 - e).powi(2) / e
        })
        .sum();
    ChiSquared::new((observed.len() - 1) as f64).unwrap().sf(stat)
}

/// Binomial standard deviation of a sample proportion.
pub fn proportion_sigma(p: f64, n: u64) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

/// Estimate with an exact 95% interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Proportion {
    pub successes: u64,
    pub trials: u64,
    pub estimate: Option<f64>,
    pub lower: f64,
    pub upper: f64,
}

impl Proportion {
    pub fn new(successes: u64, trials: u64) -> Self {
        let (lower, upper) = clopper_pearson(successes, trials, 0.95);
        let estimate = (trials > 0).then(|| successes as f64 / trials as f64);
        Proportion { successes, trials, estimate, lower, upper }
    }
}
