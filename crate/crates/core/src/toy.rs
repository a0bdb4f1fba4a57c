//! Small hand-built schemes. None of them is a secure PRC; they exist to put
//! known, easily computed behaviour in front of the estimators and the
//! compiler.

use crate::bits::BitString;
use crate::oracle::Oracle;
use crate::prc::{PrcScheme, Verdict};
use crate::seed::Seed;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ToyEncoder {
    Uniform,
    AllZeros,
    /// Output the key itself. Needs `key_len == codeword_len`.
    Key,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ToyDecoder {
    AlwaysAccept,
    AlwaysReject,
    FirstBitZero,
    /// Accept iff the Hamming distance to the key is below the threshold.
    NearKey(usize),
    /// Query a fixed string; accept iff the answer is 1.
    QueryFixed(BitString),
    /// Query the input verbatim; accept iff the answer is 1.
    QueryInput,
    /// Query `sk || (x & mask)`; accept iff the answer is 1.
    MaskedQuery(BitString),
}

impl ToyDecoder {
    fn queries(&self) -> usize {
        match self {
            Self::QueryFixed(_) | Self::QueryInput | Self::MaskedQuery(_) => 1,
            _ => 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ToyScheme {
    n: usize,
    key_len: usize,
    encoder: ToyEncoder,
    decoder: ToyDecoder,
    keygen_queries: usize,
    declared_bound: Option<usize>,
}

impl ToyScheme {
    pub fn new(n: usize, key_len: usize, encoder: ToyEncoder, decoder: ToyDecoder) -> Self {
        if encoder == ToyEncoder::Key {
            assert_eq!(n, key_len, "key encoder needs key_len == n");
        }
        if let ToyDecoder::MaskedQuery(mask) = &decoder {
            assert_eq!(mask.len(), n, "mask length must equal n");
        }
        Self {
            n,
            key_len,
            encoder,
            decoder,
            keygen_queries: 0,
            declared_bound: None,
        }
    }

    /// Key generation additionally queries `k` fixed points.
    pub fn with_keygen_queries(mut self, k: usize) -> Self {
        self.keygen_queries = k;
        self
    }

    /// Override the declared query bound (to exercise enforcement).
    pub fn with_declared_bound(mut self, q: usize) -> Self {
        self.declared_bound = Some(q);
        self
    }
}

impl PrcScheme for ToyScheme {
    fn name(&self) -> String {
        format!("toy[{:?}/{:?}]", self.encoder, self.decoder)
    }

    fn security_parameter(&self) -> usize {
        self.key_len
    }

    fn codeword_len(&self) -> usize {
        self.n
    }

    fn key_len(&self) -> usize {
        self.key_len
    }

    fn query_bound(&self) -> usize {
        self.declared_bound
            .unwrap_or_else(|| self.decoder.queries().max(self.keygen_queries))
    }

    fn keygen(&self, seed: Seed, oracle: &mut dyn Oracle) -> BitString {
        for i in 0..self.keygen_queries {
            oracle.query(&BitString::from_u64(i as u64, 16));
        }
        BitString::random(self.key_len, &mut seed.rng())
    }

    fn encode(&self, sk: &BitString, seed: Seed, _oracle: &mut dyn Oracle) -> BitString {
        match self.encoder {
            ToyEncoder::Uniform => BitString::random(self.n, &mut seed.rng()),
            ToyEncoder::AllZeros => BitString::zeros(self.n),
            ToyEncoder::Key => sk.clone(),
        }
    }

    fn decode(&self, sk: &BitString, x: &BitString, _seed: Seed, oracle: &mut dyn Oracle) -> Verdict {
        let accept = match &self.decoder {
            ToyDecoder::AlwaysAccept => true,
            ToyDecoder::AlwaysReject => false,
            ToyDecoder::FirstBitZero => self.n > 0 && !x.get(0),
            ToyDecoder::NearKey(t) => x.hamming_distance(sk) < *t,
            ToyDecoder::QueryFixed(q) => oracle.query(q),
            ToyDecoder::QueryInput => oracle.query(x),
            ToyDecoder::MaskedQuery(mask) => oracle.query(&sk.concat(&x.and(mask))),
        };
        if accept {
            Verdict::Accept
        } else {
            Verdict::Reject
        }
    }
}

/// One-query tagging scheme. A codeword is `p || R(sk || p) || padding` for a
/// random `k`-bit `p`; decoding re-queries `R(sk || x[..k])` and compares it
/// with bit `k`.
#[derive(Clone, Debug)]
pub struct TagScheme {
    pub k: usize,
    pub pad: usize,
    pub lambda: usize,
}

impl TagScheme {
    pub fn new(k: usize, pad: usize, lambda: usize) -> Self {
        Self { k, pad, lambda }
    }

    /// Exact completeness over `BSC_rho`: the tag survives with probability
    /// `keep^(k+1)`; a corrupted prefix still matches by luck half the time.
    pub fn completeness(&self, rho: f64) -> f64 {
        let keep = (1.0 + rho) / 2.0;
        let prefix_ok = keep.powi(self.k as i32);
        prefix_ok * keep + (1.0 - prefix_ok) * 0.5
    }
}

impl PrcScheme for TagScheme {
    fn name(&self) -> String {
        format!("tag[k={},pad={}]", self.k, self.pad)
    }

    fn security_parameter(&self) -> usize {
        self.lambda
    }

    fn codeword_len(&self) -> usize {
        self.k + 1 + self.pad
    }

    fn key_len(&self) -> usize {
        self.lambda
    }

    fn query_bound(&self) -> usize {
        1
    }

    fn keygen(&self, seed: Seed, _oracle: &mut dyn Oracle) -> BitString {
        BitString::random(self.lambda, &mut seed.rng())
    }

    fn encode(&self, sk: &BitString, seed: Seed, oracle: &mut dyn Oracle) -> BitString {
        let mut rng = seed.rng();
        let p = BitString::random(self.k, &mut rng);
        let tag = oracle.query(&sk.concat(&p));
        p.concat(&BitString::from_bits(&[tag]))
            .concat(&BitString::random(self.pad, &mut rng))
    }

    fn decode(&self, sk: &BitString, x: &BitString, _seed: Seed, oracle: &mut dyn Oracle) -> Verdict {
        let tag = oracle.query(&sk.concat(&x.slice(0, self.k)));
        if tag == x.get(self.k) {
            Verdict::Accept
        } else {
            Verdict::Reject
        }
    }
}
