//! Exact binomial tests and a 2x2 chi-square test for comparing Monte Carlo
//! counts with closed forms.
//!
//! "Within `z` sigma" is evaluated with exact binomial tails at the coverage a
//! normal `z`-sigma interval would have, so counts near 0 or `n` are handled
//! without the normal approximation collapsing.

use statrs::distribution::{ChiSquared, ContinuousCDF};
use statrs::function::erf::erfc;
use statrs::function::gamma::ln_gamma;

/// Two-sided tail mass outside `z` standard deviations of a normal.
pub fn normal_two_sided_tail(z: f64) -> f64 {
    erfc(z / std::f64::consts::SQRT_2)
}

fn ln_pmf(k: u64, n: u64, p: f64) -> f64 {
    if p <= 0.0 {
        return if k == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    if p >= 1.0 {
        return if k == n { 0.0 } else { f64::NEG_INFINITY };
    }
    let (k, n) = (k as f64, n as f64);
    ln_gamma(n + 1.0) - ln_gamma(k + 1.0) - ln_gamma(n - k + 1.0) + k * p.ln() + (n - k) * (-p).ln_1p()
}

/// `P(X <= k)` for `X ~ Binomial(n, p)`.
pub fn binomial_cdf(k: u64, n: u64, p: f64) -> f64 {
    if k >= n {
        return 1.0;
    }
    (0..=k).map(|i| ln_pmf(i, n, p).exp()).sum::<f64>().min(1.0)
}

/// `P(X >= k)` for `X ~ Binomial(n, p)`.
pub fn binomial_sf(k: u64, n: u64, p: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    (k..=n).map(|i| ln_pmf(i, n, p).exp()).sum::<f64>().min(1.0)
}

/// Whether `successes` out of `trials` is consistent with rate `p` at the
/// two-sided coverage of a `z`-sigma normal interval.
pub fn binomial_consistent(successes: u64, trials: u64, p: f64, z: f64) -> bool {
    let half = normal_two_sided_tail(z) / 2.0;
    binomial_cdf(successes, trials, p) >= half && binomial_sf(successes, trials, p) >= half
}

/// Whether `successes` out of `trials` is consistent with a rate of at most
/// `p_max` (one-sided, same per-tail level as [`binomial_consistent`]).
pub fn binomial_not_above(successes: u64, trials: u64, p_max: f64, z: f64) -> bool {
    if p_max >= 1.0 {
        return true;
    }
    binomial_sf(successes, trials, p_max) >= normal_two_sided_tail(z) / 2.0
}

/// Normal-approximation standard error of a proportion.
pub fn proportion_sigma(successes: u64, trials: u64) -> f64 {
    let p = successes as f64 / trials as f64;
    (p * (1.0 - p) / trials as f64).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChiSquare {
    pub statistic: f64,
    pub p_value: f64,
}

/// Pearson chi-square test of homogeneity for two samples of a binary outcome.
pub fn chi_square_two_samples(a_hits: u64, a_trials: u64, b_hits: u64, b_trials: u64) -> ChiSquare {
    let total = (a_trials + b_trials) as f64;
    let hits = (a_hits + b_hits) as f64;
    let misses = total - hits;
    if hits == 0.0 || misses == 0.0 {
        return ChiSquare {
            statistic: 0.0,
            p_value: 1.0,
        };
    }
    let cells = [
        (a_hits as f64, a_trials as f64 * hits / total),
        ((a_trials - a_hits) as f64, a_trials as f64 * misses / total),
        (b_hits as f64, b_trials as f64 * hits / total),
        ((b_trials - b_hits) as f64, b_trials as f64 * misses / total),
    ];
    let statistic: f64 = cells.iter().map(|(o, e)| (o - e) * (o - e) / e).sum();
    let dist = ChiSquared::new(1.0).expect("one degree of freedom");
    ChiSquare {
        statistic,
        p_value: 1.0 - dist.cdf(statistic),
    }
}
