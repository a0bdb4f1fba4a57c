//! Removing the random oracle from a PRC by learning the decoder's heavy
//! queries at key-generation time.
//!
//! `KeyGen'` samples its own oracle `F0`, runs the decoder `ceil(lambda/tau)`
//! times on uniform inputs, and stores every query-answer pair it saw in `S`.
//! `Enc'` and `Dec'` then run against independent resamples `F1` and `F2`
//! that agree with `S` and are otherwise fresh.
//!
//! The completeness experiment flags the two ways this can go wrong:
//! `Bad1`, some query that is `tau`-heavy for `(sk, F2)` is missing from `S`;
//! and `Bad2`, no `Bad1` but the encoder and decoder share a query outside
//! `S` (an intersection query).

use std::collections::{BTreeMap, HashSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::channel::{apply_noise, NoiseParameter};
use crate::error::{PrcError, Result};
use crate::oracle::{consistent_resample, LazyOracle, Oracle, QuerySet, RecordingOracle};
use crate::prc::{run_decode, run_encode, run_keygen, ExperimentReport, PrcScheme, SecretKey, Verdict, MIN_TRIALS};
use crate::seed::Seed;

/// Largest codeword length for which heavy queries are found by enumerating
/// every input.
pub const EXACT_HEAVY_MAX_N: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum HeavyMode {
    /// Exact when `n <= EXACT_HEAVY_MAX_N`, otherwise Monte Carlo with
    /// `ceil(100 / tau)` probes.
    Auto,
    Exact,
    MonteCarlo {
        probes: u64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompilerParams {
    pub tau: f64,
    pub heavy_mode: HeavyMode,
}

impl CompilerParams {
    pub fn new(tau: f64) -> Result<Self> {
        if !(tau > 0.0 && tau < 1.0) {
            return Err(PrcError::InvalidParameter(format!("tau = {tau} must lie in (0, 1)")));
        }
        Ok(Self {
            tau,
            heavy_mode: HeavyMode::Auto,
        })
    }

    pub fn with_heavy_mode(mut self, mode: HeavyMode) -> Self {
        self.heavy_mode = mode;
        self
    }

    /// `ceil(lambda / tau)`, guarded against `lambda / tau` landing a hair
    /// above an integer through rounding.
    pub fn learning_runs(&self, lambda: usize) -> u64 {
        ((lambda as f64 / self.tau) - 1e-9).ceil().max(0.0) as u64
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompiledKey {
    pub sk: SecretKey,
    pub set: Arc<QuerySet>,
}

/// `KeyGen'`: key generation and the learning runs, all against a fresh `F0`.
pub fn compile_keygen(scheme: &dyn PrcScheme, params: &CompilerParams, seed: Seed) -> Result<CompiledKey> {
    let mut f0 = LazyOracle::unlogged(seed.stream("F0"));
    compile_keygen_with(scheme, params, seed, &mut f0)
}

/// [`compile_keygen`] with a caller-supplied `F0`, e.g. an explicit table
/// when enumerating every oracle on a small domain.
pub fn compile_keygen_with(
    scheme: &dyn PrcScheme,
    params: &CompilerParams,
    seed: Seed,
    f0: &mut dyn Oracle,
) -> Result<CompiledKey> {
    let sk = run_keygen(scheme, seed.stream("keygen"), f0)?;
    let inputs = seed.stream("inputs");
    let coins = seed.stream("coins");
    let n = scheme.codeword_len();
    let mut rec = RecordingOracle::new(f0);
    for i in 0..params.learning_runs(scheme.security_parameter()) {
        let x = BitString::random(n, &mut inputs.child(i).rng());
        run_decode(scheme, &sk, &x, coins.child(i), &mut rec)?;
    }
    let mut set = QuerySet::new();
    for (q, b) in rec.record {
        set.insert(q, b)?;
    }
    Ok(CompiledKey { sk, set: Arc::new(set) })
}

/// `F1` for the given encoding seed.
pub fn encoder_oracle(ck: &CompiledKey, seed: Seed) -> LazyOracle {
    consistent_resample(ck.set.clone(), seed.stream("F1"))
}

/// `F2` for the given decoding seed.
pub fn decoder_oracle(ck: &CompiledKey, seed: Seed) -> LazyOracle {
    consistent_resample(ck.set.clone(), seed.stream("F2"))
}

/// `Enc'`.
pub fn compiled_encode(scheme: &dyn PrcScheme, ck: &CompiledKey, seed: Seed) -> Result<BitString> {
    let mut f1 = encoder_oracle(ck, seed);
    run_encode(scheme, &ck.sk, seed.stream("coins"), &mut f1)
}

/// `Dec'`.
pub fn compiled_decode(scheme: &dyn PrcScheme, ck: &CompiledKey, x: &BitString, seed: Seed) -> Result<Verdict> {
    let mut f2 = decoder_oracle(ck, seed);
    run_decode(scheme, &ck.sk, x, seed.stream("coins"), &mut f2)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HeavyQueries {
    /// Sorted.
    pub queries: Vec<BitString>,
    pub exact: bool,
    pub probes: u64,
}

/// Queries the decoder makes on a uniform input with probability at least
/// `tau`, with respect to `oracle` (its seed and pins; its log is ignored).
///
/// Exact mode enumerates every input and draws the decoder's coins once per
/// input. Monte Carlo mode samples `probes` inputs and keeps every query seen
/// in at least a `tau/2` fraction of them, so it errs towards reporting.
pub fn find_heavy_queries(
    scheme: &dyn PrcScheme,
    sk: &SecretKey,
    oracle: &LazyOracle,
    tau: f64,
    mode: HeavyMode,
    seed: Seed,
) -> Result<HeavyQueries> {
    let n = scheme.codeword_len();
    let mode = match mode {
        HeavyMode::Auto if n <= EXACT_HEAVY_MAX_N => HeavyMode::Exact,
        HeavyMode::Auto => HeavyMode::MonteCarlo {
            probes: (100.0 / tau).ceil() as u64,
        },
        m => m,
    };
    let mut counts: BTreeMap<BitString, u64> = BTreeMap::new();
    let mut tally = |x: &BitString, coins: Seed| -> Result<()> {
        let mut view = oracle.fresh_view();
        run_decode(scheme, sk, x, coins, &mut view)?;
        for (q, _) in view.log() {
            *counts.entry(q.clone()).or_default() += 1;
        }
        Ok(())
    };
    let (probes, threshold, exact) = match mode {
        HeavyMode::Exact => {
            if n > EXACT_HEAVY_MAX_N {
                return Err(PrcError::EnumerationLimit(format!(
                    "exact heavy-query search needs n <= {EXACT_HEAVY_MAX_N}, got {n}"
                )));
            }
            let total = 1u64 << n;
            for x in 0..total {
                tally(&BitString::from_u64(x, n), seed.child(x))?;
            }
            (total, tau * total as f64, true)
        }
        HeavyMode::MonteCarlo { probes } => {
            if (probes as f64) < 10.0 / tau {
                return Err(PrcError::InvalidParameter(format!(
                    "{probes} probes; at least 10/tau = {} required",
                    (10.0 / tau).ceil()
                )));
            }
            let mut rng = seed.stream("inputs").rng();
            for i in 0..probes {
                let x = BitString::random(n, &mut rng);
                tally(&x, seed.child(i))?;
            }
            (probes, tau / 2.0 * probes as f64, false)
        }
        HeavyMode::Auto => unreachable!(),
    };
    let slack = 1e-9 * probes as f64;
    let queries = counts
        .into_iter()
        .filter(|&(_, c)| c as f64 + slack >= threshold)
        .map(|(q, _)| q)
        .collect();
    Ok(HeavyQueries { queries, exact, probes })
}

/// Per-trial flags of the compiled completeness experiment.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BadEventCounts {
    pub trials: u64,
    pub bad1_count: u64,
    pub bad2_count: u64,
    pub bad1: Vec<bool>,
    pub bad2: Vec<bool>,
    /// Encoder and decoder shared a query outside `S` (regardless of `Bad1`).
    pub intersection: Vec<bool>,
    pub compiled_accept: Vec<bool>,
    /// Verdict of the uncompiled decoder under the matched oracle.
    pub uncompiled_accept: Vec<bool>,
    pub set_size: Vec<usize>,
}

impl BadEventCounts {
    pub fn bad1_freq(&self) -> f64 {
        self.bad1_count as f64 / self.trials as f64
    }

    pub fn bad2_freq(&self) -> f64 {
        self.bad2_count as f64 / self.trials as f64
    }

    pub fn set_size_mean(&self) -> f64 {
        self.set_size.iter().sum::<usize>() as f64 / self.trials as f64
    }

    pub fn uncompiled_completeness(&self) -> f64 {
        self.uncompiled_accept.iter().filter(|&&a| a).count() as f64 / self.trials as f64
    }
}

/// The compiled scheme's completeness over `BSC_rho`, with `Bad1`/`Bad2`
/// flags per trial.
///
/// Each trial also reruns the original decoder with the same coins against
/// the oracle that answers like `F1` on the encoder's queries, like `S` on
/// its domain, and like `F2` elsewhere. That oracle is a uniformly random
/// function, so these verdicts give the uncompiled completeness under matched
/// seeds; without an intersection query both verdicts coincide.
pub fn run_completeness_experiment(
    scheme: &dyn PrcScheme,
    params: &CompilerParams,
    rho: NoiseParameter,
    trials: u64,
    seed: Seed,
) -> Result<(ExperimentReport, BadEventCounts)> {
    if trials < MIN_TRIALS {
        return Err(PrcError::InvalidParameter(format!(
            "{trials} trials; at least {MIN_TRIALS} required"
        )));
    }
    let mut counts = BadEventCounts {
        trials,
        ..Default::default()
    };
    let mut exact_heavy = true;
    for t in 0..trials {
        let s = seed.child(t);
        let ck = compile_keygen(scheme, params, s.stream("keygen"))?;

        let enc_seed = s.stream("encode");
        let mut f1 = encoder_oracle(&ck, enc_seed);
        let c = run_encode(scheme, &ck.sk, enc_seed.stream("coins"), &mut f1)?;
        let noisy = apply_noise(&c, rho, s.stream("noise"));

        let dec_seed = s.stream("decode");
        let mut f2 = decoder_oracle(&ck, dec_seed);
        let dec_coins = dec_seed.stream("coins");
        let verdict = run_decode(scheme, &ck.sk, &noisy, dec_coins, &mut f2)?;

        let heavy = find_heavy_queries(scheme, &ck.sk, &f2, params.tau, params.heavy_mode, s.stream("heavy"))?;
        exact_heavy &= heavy.exact;
        let bad1 = heavy.queries.iter().any(|q| !ck.set.contains(q));

        let encoder_queries: HashSet<&BitString> = f1.log().iter().map(|(q, _)| q).collect();
        let intersection = f2
            .log()
            .iter()
            .any(|(q, _)| encoder_queries.contains(q) && !ck.set.contains(q));
        let bad2 = !bad1 && intersection;

        let mut matched = f2.with_extra_pins(f1.log().iter().cloned())?;
        let uncompiled = run_decode(scheme, &ck.sk, &noisy, dec_coins, &mut matched)?;
        if !intersection && uncompiled != verdict {
            return Err(PrcError::Contract(format!(
                "trial {t}: matched verdicts differ without an intersection query"
            )));
        }

        counts.bad1_count += u64::from(bad1);
        counts.bad2_count += u64::from(bad2);
        counts.bad1.push(bad1);
        counts.bad2.push(bad2);
        counts.intersection.push(intersection);
        counts.compiled_accept.push(verdict.accepted());
        counts.uncompiled_accept.push(uncompiled.accepted());
        counts.set_size.push(ck.set.len());
    }
    let accepts = counts.compiled_accept.iter().filter(|&&a| a).count() as u64;
    let mut report = ExperimentReport::from_counts(format!("compiled {}", scheme.name()), accepts, trials);
    report.events.insert("accept".into(), accepts);
    report.events.insert(
        "accept_uncompiled".into(),
        counts.uncompiled_accept.iter().filter(|&&a| a).count() as u64,
    );
    report.events.insert("bad1".into(), counts.bad1_count);
    report.events.insert("bad2".into(), counts.bad2_count);
    report.events.insert(
        "intersection".into(),
        counts.intersection.iter().filter(|&&a| a).count() as u64,
    );
    report
        .params
        .insert("lambda".into(), scheme.security_parameter() as f64);
    report.params.insert("n".into(), scheme.codeword_len() as f64);
    report.params.insert("Q".into(), scheme.query_bound() as f64);
    report.params.insert("rho".into(), rho.rho());
    report.params.insert("tau".into(), params.tau);
    report
        .params
        .insert("heavy_exact".into(), if exact_heavy { 1.0 } else { 0.0 });
    Ok((report, counts))
}

/// Fraction of trials where `Dec'` rejects a uniform string under a fresh
/// compiled key.
pub fn estimate_compiled_soundness(
    scheme: &dyn PrcScheme,
    params: &CompilerParams,
    trials: u64,
    seed: Seed,
) -> Result<ExperimentReport> {
    if trials < MIN_TRIALS {
        return Err(PrcError::InvalidParameter(format!(
            "{trials} trials; at least {MIN_TRIALS} required"
        )));
    }
    let mut rejects = 0;
    for t in 0..trials {
        let s = seed.child(t);
        let ck = compile_keygen(scheme, params, s.stream("keygen"))?;
        let x = BitString::random(scheme.codeword_len(), &mut s.stream("input").rng());
        if !compiled_decode(scheme, &ck, &x, s.stream("decode"))?.accepted() {
            rejects += 1;
        }
    }
    let mut report = ExperimentReport::from_counts(format!("compiled {}", scheme.name()), rejects, trials);
    report.events.insert("reject".into(), rejects);
    report.events.insert("accept".into(), trials - rejects);
    report
        .params
        .insert("lambda".into(), scheme.security_parameter() as f64);
    report.params.insert("n".into(), scheme.codeword_len() as f64);
    report.params.insert("Q".into(), scheme.query_bound() as f64);
    report.params.insert("tau".into(), params.tau);
    Ok(report)
}

/// Exponent `(1/2)(1 - rho^2)/(1 + rho^2)` of `tau` in the intersection term.
pub fn tau_exponent(rho: f64) -> f64 {
    0.5 * (1.0 - rho * rho) / (1.0 + rho * rho)
}

/// `2^-lambda * Q / tau`.
pub fn bad1_bound(q: usize, tau: f64, lambda: usize) -> f64 {
    (-(lambda as f64)).exp2() * q as f64 / tau
}

/// `Q^2 * tau^((1/2)(1 - rho^2)/(1 + rho^2))`.
pub fn bad2_tau_term(q: usize, tau: f64, rho: f64) -> f64 {
    (q * q) as f64 * tau.powf(tau_exponent(rho))
}

/// `tau^e` at `tau = lambda^-c`, i.e. `lambda^(-(c/2)(1 - rho^2)/(1 + rho^2))`.
pub fn tau_term_at_power(lambda: f64, c: f64, rho: f64) -> f64 {
    lambda.powf(-c * tau_exponent(rho))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaPrime {
    pub delta: f64,
    pub bad1_term: f64,
    pub tau_term: f64,
    /// `Q^2 * sqrt(eps * n)`, constant taken as 1.
    pub leakage_term: f64,
    pub total: f64,
}

/// Completeness error of the compiled scheme, term by term.
pub fn theoretical_delta_prime(
    delta: f64,
    q: usize,
    tau: f64,
    rho: f64,
    eps: f64,
    n: usize,
    lambda: usize,
) -> Result<DeltaPrime> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(PrcError::InvalidParameter(format!("tau = {tau} must lie in (0, 1)")));
    }
    if !(delta >= 0.0 && eps >= 0.0) || !(-1.0..=1.0).contains(&rho) {
        return Err(PrcError::InvalidParameter(format!(
            "need delta >= 0, eps >= 0, |rho| <= 1 (got {delta}, {eps}, {rho})"
        )));
    }
    let bad1_term = bad1_bound(q, tau, lambda);
    let tau_term = bad2_tau_term(q, tau, rho);
    let leakage_term = (q * q) as f64 * (eps * n as f64).sqrt();
    Ok(DeltaPrime {
        delta,
        bad1_term,
        tau_term,
        leakage_term,
        total: delta + bad1_term + tau_term + leakage_term,
    })
}

/// One row of a compiler sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub lambda: usize,
    pub rho: f64,
    pub tau: f64,
    #[serde(rename = "Q")]
    pub q: usize,
    pub n: usize,
    pub trials: u64,
    pub completeness_compiled: f64,
    pub completeness_uncompiled: f64,
    pub bad1_freq: f64,
    pub bad1_bound: f64,
    pub bad2_freq: f64,
    pub bad2_tau_term: f64,
    pub delta_prime_theory: f64,
    #[serde(rename = "S_size_mean")]
    pub s_size_mean: f64,
}

impl SweepRow {
    /// Theory column uses the measured uncompiled error as `delta` and
    /// `eps = 0`, which is exact for a simulated oracle.
    pub fn from_experiment(
        scheme: &dyn PrcScheme,
        params: &CompilerParams,
        rho: NoiseParameter,
        report: &ExperimentReport,
        counts: &BadEventCounts,
    ) -> Result<Self> {
        let q = scheme.query_bound();
        let lambda = scheme.security_parameter();
        let uncompiled = counts.uncompiled_completeness();
        let theory = theoretical_delta_prime(
            1.0 - uncompiled,
            q,
            params.tau,
            rho.rho(),
            0.0,
            scheme.codeword_len(),
            lambda,
        )?;
        Ok(Self {
            lambda,
            rho: rho.rho(),
            tau: params.tau,
            q,
            n: scheme.codeword_len(),
            trials: report.trials,
            completeness_compiled: report.estimate,
            completeness_uncompiled: uncompiled,
            bad1_freq: counts.bad1_freq(),
            bad1_bound: bad1_bound(q, params.tau, lambda),
            bad2_freq: counts.bad2_freq(),
            bad2_tau_term: bad2_tau_term(q, params.tau, rho.rho()),
            delta_prime_theory: theory.total,
            s_size_mean: counts.set_size_mean(),
        })
    }
}
