//! Zero-bit private-key PRCs and Monte Carlo estimators for their
//! completeness, soundness, and an empirical pseudorandomness proxy.
//!
//! Schemes implement [`PrcScheme`]; callers go through [`run_keygen`],
//! [`run_encode`] and [`run_decode`], which absorb key-generation oracle
//! traffic into the key, enforce the declared query bound on every call, and
//! check codeword lengths.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::channel::{apply_noise, NoiseParameter};
use crate::error::{PrcError, Result};
use crate::oracle::{CountingOracle, LazyOracle, Oracle, OverlayOracle, QuerySet, RecordingOracle};
use crate::seed::Seed;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    Accept,
    Reject,
}

impl Verdict {
    pub fn accepted(self) -> bool {
        self == Verdict::Accept
    }
}

/// Key bits plus the oracle answers key generation consumed.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SecretKey {
    pub bits: BitString,
    pub transcript: QuerySet,
}

impl SecretKey {
    pub fn new(bits: BitString) -> Self {
        Self {
            bits,
            transcript: QuerySet::new(),
        }
    }

    /// First line is the key, remaining lines are the transcript in
    /// query-set format.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "{}", self.bits).expect("writing to a String");
        s.push_str(&self.transcript.to_text());
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let (first, rest) = text.split_once('\n').unwrap_or((text, ""));
        Ok(Self {
            bits: first.parse()?,
            transcript: QuerySet::from_text(rest)?,
        })
    }
}

/// A zero-bit PRC whose procedures may query a (secret) random oracle.
pub trait PrcScheme: Sync {
    fn name(&self) -> String;
    fn security_parameter(&self) -> usize;
    fn codeword_len(&self) -> usize;
    fn key_len(&self) -> usize;
    /// Maximum oracle queries of one keygen, encode, or decode call.
    fn query_bound(&self) -> usize;

    fn keygen(&self, seed: Seed, oracle: &mut dyn Oracle) -> BitString;
    fn encode(&self, sk: &BitString, seed: Seed, oracle: &mut dyn Oracle) -> BitString;
    /// Only called with `x.len() == codeword_len()`.
    fn decode(&self, sk: &BitString, x: &BitString, seed: Seed, oracle: &mut dyn Oracle) -> Verdict;
}

fn check_bound(scheme: &dyn PrcScheme, made: usize) -> Result<()> {
    let bound = scheme.query_bound();
    if made > bound {
        Err(PrcError::QueryBoundExceeded { bound, made })
    } else {
        Ok(())
    }
}

pub fn run_keygen(scheme: &dyn PrcScheme, seed: Seed, oracle: &mut dyn Oracle) -> Result<SecretKey> {
    let mut rec = RecordingOracle::new(oracle);
    let bits = scheme.keygen(seed, &mut rec);
    check_bound(scheme, rec.record.len())?;
    if bits.len() != scheme.key_len() {
        return Err(PrcError::Contract(format!(
            "keygen returned {} bits, declared {}",
            bits.len(),
            scheme.key_len()
        )));
    }
    let mut transcript = QuerySet::new();
    for (q, b) in rec.record {
        transcript.insert(q, b)?;
    }
    Ok(SecretKey { bits, transcript })
}

pub fn run_encode(scheme: &dyn PrcScheme, sk: &SecretKey, seed: Seed, oracle: &mut dyn Oracle) -> Result<BitString> {
    let mut overlay = OverlayOracle::new(&sk.transcript, oracle);
    let mut counting = CountingOracle::new(&mut overlay);
    let c = scheme.encode(&sk.bits, seed, &mut counting);
    check_bound(scheme, counting.count())?;
    if c.len() != scheme.codeword_len() {
        return Err(PrcError::Contract(format!(
            "encode returned {} bits, declared {}",
            c.len(),
            scheme.codeword_len()
        )));
    }
    Ok(c)
}

pub fn run_decode(
    scheme: &dyn PrcScheme,
    sk: &SecretKey,
    x: &BitString,
    seed: Seed,
    oracle: &mut dyn Oracle,
) -> Result<Verdict> {
    if x.len() != scheme.codeword_len() {
        return Err(PrcError::LengthMismatch {
            expected: scheme.codeword_len(),
            actual: x.len(),
        });
    }
    let mut overlay = OverlayOracle::new(&sk.transcript, oracle);
    let mut counting = CountingOracle::new(&mut overlay);
    let v = scheme.decode(&sk.bits, x, seed, &mut counting);
    check_bound(scheme, counting.count())?;
    Ok(v)
}

/// Point estimate of a proportion with a normal-approximation 95% interval.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub scheme: String,
    pub estimate: f64,
    pub trials: u64,
    #[serde(rename = "ci95")]
    pub ci95_halfwidth: f64,
    pub events: BTreeMap<String, u64>,
    pub params: BTreeMap<String, f64>,
}

pub const MIN_TRIALS: u64 = 100;

fn check_trials(trials: u64) -> Result<()> {
    if trials < MIN_TRIALS {
        Err(PrcError::InvalidParameter(format!(
            "{trials} trials; at least {MIN_TRIALS} required"
        )))
    } else {
        Ok(())
    }
}

impl ExperimentReport {
    pub fn from_counts(scheme: String, successes: u64, trials: u64) -> Self {
        let estimate = successes as f64 / trials as f64;
        Self {
            scheme,
            estimate,
            trials,
            ci95_halfwidth: 1.96 * (estimate * (1.0 - estimate) / trials as f64).sqrt(),
            events: BTreeMap::new(),
            params: BTreeMap::new(),
        }
    }

    pub fn sigma(&self) -> f64 {
        self.ci95_halfwidth / 1.96
    }

    pub fn event(&self, name: &str) -> u64 {
        self.events.get(name).copied().unwrap_or(0)
    }

    fn echo_scheme(&mut self, scheme: &dyn PrcScheme) {
        self.params.insert("lambda".into(), scheme.security_parameter() as f64);
        self.params.insert("n".into(), scheme.codeword_len() as f64);
        self.params.insert("Q".into(), scheme.query_bound() as f64);
        self.params.insert("key_len".into(), scheme.key_len() as f64);
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

struct TrialSeeds {
    keygen: Seed,
    oracle: Seed,
    encode: Seed,
    noise: Seed,
    decode: Seed,
    input: Seed,
}

impl TrialSeeds {
    fn new(root: Seed, trial: u64) -> Self {
        let s = root.child(trial);
        Self {
            keygen: s.stream("keygen"),
            oracle: s.stream("oracle"),
            encode: s.stream("encode"),
            noise: s.stream("noise"),
            decode: s.stream("decode"),
            input: s.stream("input"),
        }
    }
}

/// Fraction of trials where a noisy fresh encoding decodes. Estimates `1 - delta`.
pub fn estimate_completeness(
    scheme: &dyn PrcScheme,
    rho: NoiseParameter,
    trials: u64,
    seed: Seed,
) -> Result<ExperimentReport> {
    check_trials(trials)?;
    let mut accepts = 0;
    for t in 0..trials {
        let s = TrialSeeds::new(seed, t);
        let mut oracle = LazyOracle::unlogged(s.oracle);
        let sk = run_keygen(scheme, s.keygen, &mut oracle)?;
        let c = run_encode(scheme, &sk, s.encode, &mut oracle)?;
        let noisy = apply_noise(&c, rho, s.noise);
        if run_decode(scheme, &sk, &noisy, s.decode, &mut oracle)?.accepted() {
            accepts += 1;
        }
    }
    let mut report = ExperimentReport::from_counts(scheme.name(), accepts, trials);
    report.events.insert("accept".into(), accepts);
    report.events.insert("reject".into(), trials - accepts);
    report.echo_scheme(scheme);
    report.params.insert("rho".into(), rho.rho());
    Ok(report)
}

/// Fraction of trials where a uniform string, independent of a fresh key, is
/// rejected. Estimates `1 - mu`.
pub fn estimate_soundness(scheme: &dyn PrcScheme, trials: u64, seed: Seed) -> Result<ExperimentReport> {
    check_trials(trials)?;
    let mut rejects = 0;
    for t in 0..trials {
        let s = TrialSeeds::new(seed, t);
        let mut oracle = LazyOracle::unlogged(s.oracle);
        let sk = run_keygen(scheme, s.keygen, &mut oracle)?;
        let x = BitString::random(scheme.codeword_len(), &mut s.input.rng());
        if !run_decode(scheme, &sk, &x, s.decode, &mut oracle)?.accepted() {
            rejects += 1;
        }
    }
    let mut report = ExperimentReport::from_counts(scheme.name(), rejects, trials);
    report.events.insert("reject".into(), rejects);
    report.events.insert("accept".into(), trials - rejects);
    report.echo_scheme(scheme);
    Ok(report)
}

/// Fixed statistical tests. Each maps `m` samples to accept/reject.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Distinguisher {
    /// Accept iff the overall count of ones is within 3 sigma of half.
    Frequency,
    /// Accept iff equal `width`-bit windows collide more often than expected
    /// for uniform strings.
    BlockCollision { width: usize },
    /// Accept iff the total number of runs exceeds its uniform mean.
    Runs,
    /// Accept iff two samples are identical.
    PairwiseEquality,
}

impl Distinguisher {
    pub fn name(&self) -> String {
        match self {
            Self::Frequency => "frequency".into(),
            Self::BlockCollision { width } => format!("block_collision_{width}"),
            Self::Runs => "runs".into(),
            Self::PairwiseEquality => "pairwise_equality".into(),
        }
    }

    pub fn accepts(&self, samples: &[BitString]) -> bool {
        match *self {
            Self::Frequency => {
                let total: usize = samples.iter().map(BitString::len).sum();
                let ones: usize = samples.iter().map(BitString::count_ones).sum();
                let dev = (ones as f64 - total as f64 / 2.0).abs();
                dev <= 1.5 * (total as f64).sqrt()
            }
            Self::BlockCollision { width } => {
                let mut counts: HashMap<u64, u64> = HashMap::new();
                let mut windows = 0u64;
                for s in samples {
                    for w in 0..s.len() / width {
                        *counts.entry(s.slice(w * width, (w + 1) * width).to_u64()).or_default() += 1;
                        windows += 1;
                    }
                }
                let pairs: u64 = counts.values().map(|c| c * (c - 1) / 2).sum();
                let expected = (windows * windows.saturating_sub(1)) as f64 / 2.0 / (1u64 << width) as f64;
                pairs as f64 > expected
            }
            Self::Runs => {
                let mut runs = 0usize;
                let mut expected = 0.0;
                for s in samples {
                    if s.is_empty() {
                        continue;
                    }
                    runs += 1 + (1..s.len()).filter(|&i| s.get(i) != s.get(i - 1)).count();
                    expected += 1.0 + (s.len() - 1) as f64 / 2.0;
                }
                runs as f64 > expected
            }
            Self::PairwiseEquality => {
                let mut seen = std::collections::HashSet::new();
                samples.iter().any(|s| !seen.insert(s))
            }
        }
    }
}

pub fn default_battery() -> Vec<Distinguisher> {
    vec![
        Distinguisher::Frequency,
        Distinguisher::BlockCollision { width: 8 },
        Distinguisher::Runs,
        Distinguisher::PairwiseEquality,
    ]
}

/// Largest acceptance-rate gap, over the battery, between `m` encodings under
/// one fresh key and `m` uniform strings. A lower bound on the true
/// pseudorandomness advantage, not the advantage itself.
pub fn estimate_pseudorandomness_proxy(
    scheme: &dyn PrcScheme,
    m: usize,
    trials: u64,
    battery: &[Distinguisher],
    seed: Seed,
) -> Result<ExperimentReport> {
    check_trials(trials)?;
    if battery.is_empty() {
        return Err(PrcError::InvalidParameter("empty distinguisher battery".into()));
    }
    if m == 0 {
        return Err(PrcError::InvalidParameter("m must be at least 1".into()));
    }
    let mut real = vec![0u64; battery.len()];
    let mut ideal = vec![0u64; battery.len()];
    for t in 0..trials {
        let s = TrialSeeds::new(seed, t);
        let mut oracle = LazyOracle::unlogged(s.oracle);
        let sk = run_keygen(scheme, s.keygen, &mut oracle)?;
        let encodings = (0..m as u64)
            .map(|i| run_encode(scheme, &sk, s.encode.child(i), &mut oracle))
            .collect::<Result<Vec<_>>>()?;
        let mut rng = s.input.rng();
        let uniform: Vec<BitString> = (0..m)
            .map(|_| BitString::random(scheme.codeword_len(), &mut rng))
            .collect();
        for (i, d) in battery.iter().enumerate() {
            real[i] += u64::from(d.accepts(&encodings));
            ideal[i] += u64::from(d.accepts(&uniform));
        }
    }
    let tf = trials as f64;
    let mut best = (0usize, -1.0f64, 0.0f64);
    for i in 0..battery.len() {
        let (p, q) = (real[i] as f64 / tf, ideal[i] as f64 / tf);
        let gap = (p - q).abs();
        let sigma = ((p * (1.0 - p) + q * (1.0 - q)) / tf).sqrt();
        if gap > best.1 {
            best = (i, gap, sigma);
        }
    }
    let mut report = ExperimentReport {
        scheme: scheme.name(),
        estimate: best.1,
        trials,
        ci95_halfwidth: 1.96 * best.2,
        events: BTreeMap::new(),
        params: BTreeMap::new(),
    };
    for (i, d) in battery.iter().enumerate() {
        report.events.insert(format!("{}.real", d.name()), real[i]);
        report.events.insert(format!("{}.ideal", d.name()), ideal[i]);
    }
    report.echo_scheme(scheme);
    report.params.insert("m".into(), m as f64);
    report.params.insert("worst_distinguisher".into(), best.0 as f64);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::toy::{ToyDecoder, ToyEncoder, ToyScheme};

    fn rho(v: f64) -> NoiseParameter {
        NoiseParameter::new(v).unwrap()
    }

    fn toy(enc: ToyEncoder, dec: ToyDecoder) -> ToyScheme {
        ToyScheme::new(8, 16, enc, dec)
    }

    #[test]
    fn completeness_of_trivial_decoders() {
        let s = toy(ToyEncoder::Uniform, ToyDecoder::AlwaysAccept);
        let r = estimate_completeness(&s, rho(0.5), 200, Seed(1)).unwrap();
        assert_eq!(r.estimate, 1.0);
        assert_eq!(r.event("accept") + r.event("reject"), 200);
        let s = toy(ToyEncoder::Uniform, ToyDecoder::AlwaysReject);
        assert_eq!(estimate_completeness(&s, rho(0.5), 200, Seed(1)).unwrap().estimate, 0.0);
    }

    #[test]
    fn soundness_of_simple_decoders() {
        let s = toy(ToyEncoder::Uniform, ToyDecoder::AlwaysReject);
        assert_eq!(estimate_soundness(&s, 100, Seed(2)).unwrap().estimate, 1.0);
        let s = toy(ToyEncoder::Uniform, ToyDecoder::FirstBitZero);
        let r = estimate_soundness(&s, 4000, Seed(2)).unwrap();
        assert!(
            (r.estimate - 0.5).abs() < 4.0 * (0.25f64 / 4000.0).sqrt(),
            "{}",
            r.estimate
        );
    }

    #[test]
    fn too_few_trials_rejected() {
        let s = toy(ToyEncoder::Uniform, ToyDecoder::AlwaysAccept);
        assert!(estimate_completeness(&s, rho(0.5), 99, Seed(1)).is_err());
    }

    #[test]
    fn reports_are_seed_deterministic() {
        let s = toy(ToyEncoder::Uniform, ToyDecoder::FirstBitZero);
        let a = estimate_completeness(&s, rho(0.3), 300, Seed(7)).unwrap();
        let b = estimate_completeness(&s, rho(0.3), 300, Seed(7)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_json(), b.to_json());
    }

    #[test]
    fn report_json_field_names() {
        let s = toy(ToyEncoder::Uniform, ToyDecoder::AlwaysAccept);
        let r = estimate_completeness(&s, rho(0.5), 100, Seed(1)).unwrap();
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        for key in ["estimate", "trials", "ci95", "params", "events"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        let back: ExperimentReport = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn query_bound_is_enforced() {
        // Declares Q = 0 but queries once per decode.
        let s = ToyScheme::new(8, 16, ToyEncoder::Uniform, ToyDecoder::QueryFixed(BitString::zeros(4)))
            .with_declared_bound(0);
        assert!(matches!(
            estimate_soundness(&s, 100, Seed(1)),
            Err(PrcError::QueryBoundExceeded { bound: 0, made: 1 })
        ));
    }

    #[test]
    fn decode_length_checked() {
        let s = toy(ToyEncoder::Uniform, ToyDecoder::AlwaysAccept);
        let sk = SecretKey::new(BitString::zeros(16));
        let mut o = LazyOracle::new(Seed(0));
        assert_eq!(
            run_decode(&s, &sk, &BitString::zeros(7), Seed(0), &mut o),
            Err(PrcError::LengthMismatch { expected: 8, actual: 7 })
        );
    }

    #[test]
    fn secret_key_text_round_trip() {
        let mut sk = SecretKey::new(BitString::from_u64(0xbeef, 16));
        sk.transcript.insert(BitString::from_u64(3, 5), true).unwrap();
        sk.transcript.insert(BitString::from_u64(9, 7), false).unwrap();
        assert_eq!(SecretKey::from_text(&sk.to_text()).unwrap(), sk);
        let bare = SecretKey::new(BitString::from_u64(1, 3));
        assert_eq!(SecretKey::from_text(&bare.to_text()).unwrap(), bare);
    }

    #[test]
    fn keygen_queries_are_absorbed() {
        let s = ToyScheme::new(8, 16, ToyEncoder::Uniform, ToyDecoder::AlwaysAccept).with_keygen_queries(3);
        let mut o = LazyOracle::new(Seed(5));
        let sk = run_keygen(&s, Seed(1), &mut o).unwrap();
        assert_eq!(sk.transcript.len(), 3);
    }

    #[test]
    fn proxy_on_uniform_and_degenerate_encoders() {
        let s = ToyScheme::new(256, 16, ToyEncoder::Uniform, ToyDecoder::AlwaysReject);
        let r = estimate_pseudorandomness_proxy(&s, 4, 2000, &default_battery(), Seed(3)).unwrap();
        assert!(r.estimate <= 4.0 * r.sigma().max(1.0 / 2000.0), "gap {}", r.estimate);

        let s = ToyScheme::new(256, 16, ToyEncoder::AllZeros, ToyDecoder::AlwaysReject);
        let r = estimate_pseudorandomness_proxy(&s, 4, 500, &[Distinguisher::Frequency], Seed(3)).unwrap();
        assert!(r.estimate > 0.95, "gap {}", r.estimate);
        assert!(estimate_pseudorandomness_proxy(&s, 4, 500, &[], Seed(3)).is_err());
    }

    #[test]
    fn distinguishers_on_fixed_inputs() {
        let zeros = vec![BitString::zeros(64); 3];
        assert!(!Distinguisher::Frequency.accepts(&zeros));
        assert!(Distinguisher::PairwiseEquality.accepts(&zeros));
        assert!(Distinguisher::BlockCollision { width: 8 }.accepts(&zeros));
        assert!(!Distinguisher::Runs.accepts(&zeros));
        let alt = vec![BitString::from_fn(64, |i| i % 2 == 0)];
        assert!(Distinguisher::Runs.accepts(&alt));
        assert!(Distinguisher::Frequency.accepts(&alt));
    }
}
