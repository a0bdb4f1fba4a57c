//! The binary symmetric channel `N_rho`: each bit is kept with probability
//! `(1 + rho) / 2` and flipped otherwise.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{PrcError, Result};
use crate::seed::Seed;

/// Correlation parameter `rho` in `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct NoiseParameter(f64);

impl NoiseParameter {
    pub fn new(rho: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&rho) {
            Ok(Self(rho))
        } else {
            Err(PrcError::InvalidParameter(format!("rho = {rho} is outside [0, 1]")))
        }
    }

    pub fn rho(self) -> f64 {
        self.0
    }

    pub fn flip_probability(self) -> f64 {
        flip_probability(self)
    }

    /// Probability that a single bit survives the channel.
    pub fn keep_probability(self) -> f64 {
        (1.0 + self.0) / 2.0
    }

    pub fn corrupt<R: Rng + ?Sized>(self, x: &BitString, rng: &mut R) -> BitString {
        let p = self.flip_probability();
        if p == 0.0 {
            return x.clone();
        }
        let errors = BitString::from_fn(x.len(), |_| rng.gen_bool(p));
        x.xor(&errors)
    }
}

impl TryFrom<f64> for NoiseParameter {
    type Error = PrcError;
    fn try_from(v: f64) -> Result<Self> {
        Self::new(v)
    }
}

impl From<NoiseParameter> for f64 {
    fn from(p: NoiseParameter) -> f64 {
        p.0
    }
}

pub fn flip_probability(rho: NoiseParameter) -> f64 {
    (1.0 - rho.0) / 2.0
}

/// `x XOR e` with `e ~ Ber((1 - rho) / 2)^n`, deterministic in `seed`.
pub fn apply_noise(x: &BitString, rho: NoiseParameter, seed: Seed) -> BitString {
    rho.corrupt(x, &mut seed.rng())
}
