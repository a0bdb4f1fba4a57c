//! Entropy, divergences, and exact checks of the entropy/distance sandwich
//! and the key-leakage bound. All logarithms are base 2.

use rand::Rng;
use serde::Serialize;

use crate::error::{PrcError, Result};

const NORMALIZATION_TOLERANCE: f64 = 1e-12;
const SLACK: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct FiniteDistribution {
    probs: Vec<f64>,
}

impl FiniteDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(PrcError::InvalidParameter("empty support".into()));
        }
        if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(PrcError::InvalidParameter(format!("invalid probability {p}")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(PrcError::InvalidParameter(format!("probabilities sum to {total}")));
        }
        Ok(Self { probs })
    }

    pub fn uniform(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(PrcError::InvalidParameter("empty support".into()));
        }
        Ok(Self {
            probs: vec![1.0 / size as f64; size],
        })
    }

    pub fn point_mass(size: usize, at: usize) -> Result<Self> {
        if at >= size {
            return Err(PrcError::InvalidParameter(format!("point {at} outside support {size}")));
        }
        let mut probs = vec![0.0; size];
        probs[at] = 1.0;
        Ok(Self { probs })
    }

    /// Normalizes nonnegative weights.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !total.is_finite() || total <= 0.0 {
            return Err(PrcError::InvalidParameter(format!("weights sum to {total}")));
        }
        let mut probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let head: f64 = probs[..probs.len() - 1].iter().sum();
        let last = probs.last_mut().expect("nonempty");
        *last = (1.0 - head).max(0.0);
        Self::new(probs)
    }

    /// Weights `1 + spread * U(-1, 1)`, normalized. The distance to uniform
    /// grows with `spread` and is at most about `spread / 2`.
    pub fn random_near_uniform<R: Rng + ?Sized>(size: usize, spread: f64, rng: &mut R) -> Result<Self> {
        let weights: Vec<f64> = (0..size)
            .map(|_| (1.0 + spread * (2.0 * rng.gen::<f64>() - 1.0)).max(0.0) + 1e-300)
            .collect();
        Self::from_weights(&weights)
    }

    pub fn support_size(&self) -> usize {
        self.probs.len()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }
}

pub fn entropy(d: &FiniteDistribution) -> f64 {
    -d.probs.iter().filter(|&&p| p > 0.0).map(|p| p * p.log2()).sum::<f64>()
}

fn check_same_support(d1: &FiniteDistribution, d2: &FiniteDistribution) -> Result<()> {
    if d1.probs.len() != d2.probs.len() {
        Err(PrcError::DimensionMismatch {
            left: d1.probs.len(),
            right: d2.probs.len(),
        })
    } else {
        Ok(())
    }
}

pub fn statistical_distance(d1: &FiniteDistribution, d2: &FiniteDistribution) -> Result<f64> {
    check_same_support(d1, d2)?;
    Ok(0.5 * d1.probs.iter().zip(&d2.probs).map(|(p, q)| (p - q).abs()).sum::<f64>())
}

pub fn kl_divergence(d1: &FiniteDistribution, d2: &FiniteDistribution) -> Result<f64> {
    check_same_support(d1, d2)?;
    let mut total = 0.0;
    for (&p, &q) in d1.probs.iter().zip(&d2.probs) {
        if p > 0.0 {
            if q <= 0.0 {
                return Err(PrcError::InfiniteDivergence);
            }
            total += p * (p / q).log2();
        }
    }
    Ok(total)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PinskerCheck {
    pub support: usize,
    pub eps: f64,
    pub lower: f64,
    pub gap: f64,
    pub upper: f64,
    pub ok: bool,
}

/// Checks `2 eps^2 <= log|S| - H(d) <= 2 eps log|S| + 2 sqrt(eps)` where
/// `eps = SD(d, uniform)`. Only claimed for `eps <= 1/4`.
pub fn check_pinsker_sandwich(d: &FiniteDistribution) -> Result<PinskerCheck> {
    let size = d.support_size();
    let eps = statistical_distance(d, &FiniteDistribution::uniform(size)?)?;
    if eps > 0.25 {
        return Err(PrcError::HypothesisViolated(format!(
            "distance to uniform {eps} exceeds 1/4"
        )));
    }
    let log_size = (size as f64).log2();
    let gap = log_size - entropy(d);
    let lower = 2.0 * eps * eps;
    let upper = 2.0 * eps * log_size + 2.0 * eps.sqrt();
    Ok(PinskerCheck {
        support: size,
        eps,
        lower,
        gap,
        upper,
        ok: lower <= gap + SLACK && gap <= upper + SLACK,
    })
}

/// `sqrt(2 eps n + 2 sqrt(eps) / m + ell / m)`.
pub fn key_leakage_bound(eps: f64, n: usize, m: usize, ell: usize) -> f64 {
    let m = m as f64;
    (2.0 * eps * n as f64 + 2.0 * eps.sqrt() / m + ell as f64 / m).sqrt()
}

/// One distribution over `{0,1}^n` per key in `{0,1}^ell`.
#[derive(Clone, Debug, PartialEq)]
pub struct KeyedFamily {
    n: usize,
    ell: usize,
    members: Vec<FiniteDistribution>,
}

/// `n + ell` limit for the `(sk, x)` table.
pub const MAX_JOINT_BITS: usize = 20;
/// `m * n` limit for the joint distribution of `m` samples.
pub const MAX_SAMPLE_BITS: usize = 24;

impl KeyedFamily {
    pub fn new(n: usize, ell: usize, members: Vec<FiniteDistribution>) -> Result<Self> {
        if n + ell > MAX_JOINT_BITS {
            return Err(PrcError::EnumerationLimit(format!(
                "n + ell = {} exceeds {MAX_JOINT_BITS}",
                n + ell
            )));
        }
        if members.len() != 1 << ell {
            return Err(PrcError::InvalidParameter(format!(
                "{} members for {} keys",
                members.len(),
                1usize << ell
            )));
        }
        if let Some(d) = members.iter().find(|d| d.support_size() != 1 << n) {
            return Err(PrcError::InvalidParameter(format!(
                "member over {} points, expected {}",
                d.support_size(),
                1usize << n
            )));
        }
        Ok(Self { n, ell, members })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn members(&self) -> &[FiniteDistribution] {
        &self.members
    }

    /// Exact statistical distance of `(x_1, ..., x_m)` from uniform over
    /// `{0,1}^{mn}`, with `sk` uniform and the `x_i` i.i.d. from `D_sk`.
    pub fn joint_sample_distance(&self, m: usize) -> Result<f64> {
        if m == 0 {
            return Err(PrcError::InvalidParameter("m must be at least 1".into()));
        }
        if m * self.n > MAX_SAMPLE_BITS {
            return Err(PrcError::EnumerationLimit(format!(
                "m * n = {} exceeds {MAX_SAMPLE_BITS}",
                m * self.n
            )));
        }
        let keys = self.members.len();
        let uniform = (2f64).powi(-((m * self.n) as i32));
        let mut weights = vec![1.0 / keys as f64; keys];
        let mut total = 0.0;
        self.accumulate(m, &mut weights, uniform, &mut total);
        Ok(0.5 * total)
    }

    // Depth-first over sample tuples; `weights[k]` carries
    // `2^-ell * prod D_k(x_i)` for the prefix chosen so far.
    fn accumulate(&self, remaining: usize, weights: &mut [f64], uniform: f64, total: &mut f64) {
        if remaining == 0 {
            let p: f64 = weights.iter().sum();
            *total += (p - uniform).abs();
            return;
        }
        let points = 1usize << self.n;
        let mut next = vec![0.0; weights.len()];
        for x in 0..points {
            for (k, w) in next.iter_mut().enumerate() {
                *w = weights[k] * self.members[k].probs[x];
            }
            if next.iter().all(|&w| w == 0.0) {
                // Whole subtree has zero mass; its uniform mass still counts.
                *total += uniform * (points as f64).powi(remaining as i32 - 1);
                continue;
            }
            self.accumulate(remaining - 1, &mut next.clone(), uniform, total);
        }
    }

    /// `SD((sk, x), uniform over {0,1}^{ell + n}) = avg_k SD(D_k, U_n)`.
    pub fn key_sample_distance(&self) -> f64 {
        let uniform = FiniteDistribution::uniform(1 << self.n).expect("n is small");
        self.members
            .iter()
            .map(|d| statistical_distance(d, &uniform).expect("same support"))
            .sum::<f64>()
            / self.members.len() as f64
    }

    pub fn random<R: Rng + ?Sized>(n: usize, ell: usize, rng: &mut R) -> Result<Self> {
        let shape = rng.gen_range(0..4);
        let members = (0..1usize << ell)
            .map(|_| match shape {
                0 => FiniteDistribution::random_near_uniform(1 << n, rng.gen_range(0.0..0.3), rng),
                1 => {
                    let w: Vec<f64> = (0..1usize << n).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
                    FiniteDistribution::from_weights(&w)
                }
                2 => {
                    // Uniform over a random subset of half the points.
                    let w: Vec<f64> = (0..1usize << n)
                        .map(|_| if rng.gen_bool(0.5) { 1.0 } else { 0.0 })
                        .collect();
                    if w.iter().sum::<f64>() == 0.0 {
                        FiniteDistribution::uniform(1 << n)
                    } else {
                        FiniteDistribution::from_weights(&w)
                    }
                }
                _ => FiniteDistribution::point_mass(1 << n, rng.gen_range(0..1usize << n)),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(n, ell, members)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KeyLeakageCheck {
    pub n: usize,
    pub ell: usize,
    pub m: usize,
    pub eps: f64,
    pub measured_sd: f64,
    pub bound: f64,
    pub ok: bool,
}

pub fn check_key_leakage(family: &KeyedFamily, m: usize) -> Result<KeyLeakageCheck> {
    let eps = family.joint_sample_distance(m)?;
    let measured_sd = family.key_sample_distance();
    let bound = key_leakage_bound(eps, family.n, m, family.ell);
    Ok(KeyLeakageCheck {
        n: family.n,
        ell: family.ell,
        m,
        eps,
        measured_sd,
        bound,
        ok: measured_sd <= bound + SLACK,
    })
}
