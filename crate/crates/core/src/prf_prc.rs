//! Block PRC from a PRF evaluated through a secret-prefix oracle.
//!
//! A codeword is `B` blocks `r_i || PRF_sk(r_i)` with `r_i` uniform in
//! `{0,1}^ell`. Decoding accepts if any received block is self-consistent.
//! Bit `j` of `PRF_sk(r)` is the oracle answer on `sk || r || j`, with `j`
//! written at a fixed width.

use crate::bits::BitString;
use crate::error::{PrcError, Result};
use crate::oracle::{secret_prefix, Oracle};
use crate::prc::{PrcScheme, Verdict};
use crate::seed::Seed;

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PrfPrcParams {
    pub lambda: usize,
    pub ell: usize,
    pub blocks: usize,
}

impl PrfPrcParams {
    /// `ell = ceil(log2(lambda) / (1 - rho_design))` (at least 1) and
    /// `blocks = lambda^2`.
    pub fn new(lambda: usize, rho_design: f64) -> Result<Self> {
        if lambda < 1 {
            return Err(PrcError::InvalidParameter("lambda must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&rho_design) {
            return Err(PrcError::InvalidParameter(format!(
                "design noise {rho_design} must lie in [0, 1)"
            )));
        }
        let ell = ((lambda as f64).log2() / (1.0 - rho_design)).ceil().max(1.0) as usize;
        Self::explicit(lambda, ell, lambda * lambda)
    }

    pub fn explicit(lambda: usize, ell: usize, blocks: usize) -> Result<Self> {
        if lambda < 1 || ell < 1 || blocks < 1 {
            return Err(PrcError::InvalidParameter(format!(
                "lambda, ell and blocks must be positive (got {lambda}, {ell}, {blocks})"
            )));
        }
        if ell > 64 {
            return Err(PrcError::InvalidParameter(format!("ell = {ell} exceeds 64")));
        }
        Ok(Self { lambda, ell, blocks })
    }

    pub fn with_ell(self, ell: usize) -> Result<Self> {
        Self::explicit(self.lambda, ell, self.blocks)
    }

    pub fn with_blocks(self, blocks: usize) -> Result<Self> {
        Self::explicit(self.lambda, self.ell, blocks)
    }

    pub fn codeword_len(&self) -> usize {
        2 * self.ell * self.blocks
    }

    /// Width of the output-bit index appended to each PRF query.
    pub fn index_width(&self) -> usize {
        (usize::BITS - (self.ell - 1).leading_zeros()).max(1) as usize
    }
}

/// `r || 0^width`, with the index bits rewritten in place per output bit.
struct PrfQuery {
    q: BitString,
    offset: usize,
    width: usize,
}

impl PrfQuery {
    fn new(r: &BitString, width: usize) -> Self {
        Self {
            q: r.concat(&BitString::zeros(width)),
            offset: r.len(),
            width,
        }
    }

    fn at(&mut self, j: usize) -> &BitString {
        for k in 0..self.width {
            self.q.set(self.offset + k, (j >> (self.width - 1 - k)) & 1 == 1);
        }
        &self.q
    }
}

/// `PRF_sk(r)`: `ell` oracle queries.
pub fn prf_eval(params: &PrfPrcParams, sk: &BitString, r: &BitString, oracle: &mut dyn Oracle) -> BitString {
    assert_eq!(r.len(), params.ell, "PRF input length");
    let mut q = PrfQuery::new(r, params.index_width());
    let mut keyed = secret_prefix(oracle, sk);
    BitString::from_fn(params.ell, |j| keyed.query(q.at(j)))
}

/// Whether `y == PRF_sk(r)`, stopping at the first mismatching bit.
pub fn prf_matches(
    params: &PrfPrcParams,
    sk: &BitString,
    r: &BitString,
    y: &BitString,
    oracle: &mut dyn Oracle,
) -> bool {
    let mut q = PrfQuery::new(r, params.index_width());
    let mut keyed = secret_prefix(oracle, sk);
    (0..params.ell).all(|j| keyed.query(q.at(j)) == y.get(j))
}

pub fn encode(params: &PrfPrcParams, sk: &BitString, seed: Seed, oracle: &mut dyn Oracle) -> BitString {
    let mut rng = seed.rng();
    let mut out = BitString::zeros(0);
    for _ in 0..params.blocks {
        let r = BitString::random(params.ell, &mut rng);
        let y = prf_eval(params, sk, &r, oracle);
        out.append(&r);
        out.append(&y);
    }
    out
}

pub fn decode(params: &PrfPrcParams, sk: &BitString, x: &BitString, oracle: &mut dyn Oracle) -> Result<Verdict> {
    let n = params.codeword_len();
    if x.len() != n {
        return Err(PrcError::LengthMismatch {
            expected: n,
            actual: x.len(),
        });
    }
    let ell = params.ell;
    for i in 0..params.blocks {
        let start = 2 * ell * i;
        let r = x.slice(start, start + ell);
        let y = x.slice(start + ell, start + 2 * ell);
        if prf_matches(params, sk, &r, &y, oracle) {
            return Ok(Verdict::Accept);
        }
    }
    Ok(Verdict::Reject)
}

/// Probability that at least one of `blocks` blocks of `2 ell` bits survives
/// `BSC_rho` untouched: `1 - (1 - ((1+rho)/2)^(2 ell))^blocks`.
pub fn closed_form_completeness(rho: f64, ell: usize, blocks: usize) -> f64 {
    let p = ((1.0 + rho) / 2.0).powf(2.0 * ell as f64);
    if p >= 1.0 {
        return 1.0;
    }
    -f64::exp_m1(blocks as f64 * (-p).ln_1p())
}

/// Like [`closed_form_completeness`], but also counting blocks whose seed was
/// hit by noise and whose corrupted tag matches the PRF on the new seed by
/// chance. Per block that is `k^(2 ell) + (1 - k^ell) 2^-ell` with
/// `k = (1+rho)/2`, treating the PRF on a corrupted seed as a fresh uniform
/// string, which ignores seeds colliding across blocks. At `rho = 0` it is
/// the false-accept rate `1 - (1 - 2^-ell)^blocks`.
pub fn chance_adjusted_completeness(rho: f64, ell: usize, blocks: usize) -> f64 {
    let keep = (1.0 + rho) / 2.0;
    let seed_intact = keep.powf(ell as f64);
    let p = seed_intact * seed_intact + (1.0 - seed_intact) * (-(ell as f64)).exp2();
    if p >= 1.0 {
        return 1.0;
    }
    -f64::exp_m1(blocks as f64 * (-p).ln_1p())
}

/// Union bound `blocks * 2^-ell` on the false-accept rate of a uniform string.
/// May exceed 1.
pub fn closed_form_soundness_bound(ell: usize, blocks: usize) -> f64 {
    blocks as f64 * (-(ell as f64)).exp2()
}

#[derive(Clone, Debug)]
pub struct PrfPrc {
    pub params: PrfPrcParams,
}

impl PrfPrc {
    pub fn new(params: PrfPrcParams) -> Self {
        Self { params }
    }
}

impl PrcScheme for PrfPrc {
    fn name(&self) -> String {
        format!(
            "prf-prc[lambda={},ell={},B={}]",
            self.params.lambda, self.params.ell, self.params.blocks
        )
    }

    fn security_parameter(&self) -> usize {
        self.params.lambda
    }

    fn codeword_len(&self) -> usize {
        self.params.codeword_len()
    }

    fn key_len(&self) -> usize {
        self.params.lambda
    }

    fn query_bound(&self) -> usize {
        self.params.ell * self.params.blocks
    }

    fn keygen(&self, seed: Seed, _oracle: &mut dyn Oracle) -> BitString {
        BitString::random(self.params.lambda, &mut seed.rng())
    }

    fn encode(&self, sk: &BitString, seed: Seed, oracle: &mut dyn Oracle) -> BitString {
        encode(&self.params, sk, seed, oracle)
    }

    fn decode(&self, sk: &BitString, x: &BitString, _seed: Seed, oracle: &mut dyn Oracle) -> Verdict {
        decode(&self.params, sk, x, oracle).expect("harness checks the length")
    }
}
