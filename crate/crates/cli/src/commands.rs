use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use prclab_core::boolean::{check_collision_bound, check_hypercontractivity, sample, INEQUALITY_SLACK};
use prclab_core::compiler::{
    bad1_bound, bad2_tau_term, run_completeness_experiment, tau_exponent, tau_term_at_power, theoretical_delta_prime,
    CompilerParams, HeavyMode, SweepRow,
};
use prclab_core::info::key_leakage_bound;
use prclab_core::prc::{estimate_completeness, estimate_soundness, PrcScheme};
use prclab_core::prf_prc::{closed_form_completeness, closed_form_soundness_bound, PrfPrc, PrfPrcParams};
use prclab_core::stats::{binomial_consistent, binomial_not_above};
use prclab_core::toy::{TagScheme, ToyDecoder, ToyEncoder, ToyScheme};
use prclab_core::{NoiseParameter, PrcError, Seed};

use crate::output::{emit, render};
use crate::{BoundsArgs, Cli, Command, CompileArgs, Failure, HeavyModeArg, HyperArgs, PrcEvalArgs, SchemeKind};

/// Largest `n` accepted by `hyper`.
pub const HYPER_N_CAP: usize = 16;

fn usage(e: PrcError) -> Failure {
    Failure::Usage(e.to_string())
}

fn noise(rho: f64) -> Result<NoiseParameter, Failure> {
    NoiseParameter::new(rho).map_err(usage)
}

pub fn run(cli: &mut Cli) -> Result<(), Failure> {
    let default_trials = match cli.command {
        Command::Hyper(_) => 10_000,
        _ => 1_000,
    };
    let trials = cli.trials.unwrap_or(default_trials);
    cli.trials = Some(trials);
    let seed = Seed(cli.seed);
    let (text, violation) = match &cli.command {
        Command::Hyper(a) => {
            let rows = hyper(a, trials, seed)?;
            let bad = rows.iter().filter(|r| !r.ok).count();
            let violation = (bad > 0).then(|| format!("{bad} of {} instances violate an inequality", rows.len()));
            (render(cli, &rows, cli.format), violation)
        }
        Command::PrcEval(a) => (render(cli, &prc_eval(a, trials, seed)?, cli.format), None),
        Command::Compile(a) => (render(cli, &compile(a, trials, seed)?, cli.format), None),
        Command::Bounds(a) => (render(cli, &bounds(a)?, cli.format), None),
    };
    let text = text.map_err(Failure::Io)?;
    emit(&text, cli.out.as_deref()).map_err(|e| Failure::Io(e.to_string()))?;
    match violation {
        Some(msg) => Err(Failure::Violation(msg)),
        None => Ok(()),
    }
}

#[derive(Debug, Serialize)]
pub struct HyperRow {
    pub instance: u64,
    pub n: usize,
    pub rho: f64,
    pub hyper_margin: f64,
    pub collision_lhs: f64,
    pub collision_rhs: f64,
    pub collision_margin: f64,
    pub ok: bool,
}

fn hyper(a: &HyperArgs, trials: u64, seed: Seed) -> Result<Vec<HyperRow>, Failure> {
    if let Some(&n) = a.n.iter().find(|&&n| n == 0 || n > HYPER_N_CAP) {
        return Err(Failure::Usage(format!("--n {n} outside 1..={HYPER_N_CAP}")));
    }
    let rhos = a.rho.iter().map(|&r| noise(r)).collect::<Result<Vec<_>, _>>()?;
    if a.labels == 0 {
        return Err(Failure::Usage("--labels must be positive".into()));
    }
    (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = seed.child(i).rng();
            let n = a.n[rng.gen_range(0..a.n.len())];
            let rho = rhos[rng.gen_range(0..rhos.len())];
            let f = sample::function(n, &mut rng);
            let hyper_margin = check_hypercontractivity(&f, rho);
            let fr = sample::randomized_function(n, a.labels, &mut rng);
            let gr = sample::randomized_function(n, a.labels, &mut rng);
            let cc = check_collision_bound(&fr, &gr, rho).map_err(|e| Failure::Io(e.to_string()))?;
            Ok(HyperRow {
                instance: i,
                n,
                rho: rho.rho(),
                hyper_margin,
                collision_lhs: cc.lhs,
                collision_rhs: cc.rhs,
                collision_margin: cc.rhs - cc.lhs,
                ok: hyper_margin >= -INEQUALITY_SLACK && cc.ok,
            })
        })
        .collect()
}

#[derive(Debug, Serialize)]
pub struct PrcEvalRow {
    pub lambda: usize,
    pub rho: f64,
    pub ell: usize,
    pub blocks: usize,
    pub n: usize,
    pub trials: Option<u64>,
    pub completeness_closed_form: f64,
    pub completeness_measured: Option<f64>,
    pub completeness_ci95: Option<f64>,
    pub completeness_within_3sigma: Option<bool>,
    pub soundness_bound: f64,
    pub false_accept_measured: Option<f64>,
    pub false_accept_within_bound: Option<bool>,
}

fn prc_eval(a: &PrcEvalArgs, trials: u64, seed: Seed) -> Result<Vec<PrcEvalRow>, Failure> {
    let mut cells = Vec::new();
    for &rho in &a.rho {
        let rho = noise(rho)?;
        for &ell in &a.ell {
            for &blocks in &a.blocks {
                cells.push((rho, PrfPrcParams::explicit(a.lambda, ell, blocks).map_err(usage)?));
            }
        }
    }
    if !a.closed_form_only && trials < prclab_core::prc::MIN_TRIALS {
        return Err(Failure::Usage(format!(
            "--trials {trials} below {}",
            prclab_core::prc::MIN_TRIALS
        )));
    }
    cells
        .par_iter()
        .enumerate()
        .map(|(i, &(rho, p))| {
            let cf = closed_form_completeness(rho.rho(), p.ell, p.blocks);
            let bound = closed_form_soundness_bound(p.ell, p.blocks);
            let mut row = PrcEvalRow {
                lambda: p.lambda,
                rho: rho.rho(),
                ell: p.ell,
                blocks: p.blocks,
                n: p.codeword_len(),
                trials: None,
                completeness_closed_form: cf,
                completeness_measured: None,
                completeness_ci95: None,
                completeness_within_3sigma: None,
                soundness_bound: bound,
                false_accept_measured: None,
                false_accept_within_bound: None,
            };
            if !a.closed_form_only {
                let scheme = PrfPrc::new(p);
                let cell = seed.child(i as u64);
                let c = estimate_completeness(&scheme, rho, trials, cell.stream("completeness"))
                    .map_err(|e| Failure::Io(e.to_string()))?;
                let s = estimate_soundness(&scheme, trials, cell.stream("soundness"))
                    .map_err(|e| Failure::Io(e.to_string()))?;
                let false_accepts = s.event("accept");
                row.trials = Some(trials);
                row.completeness_measured = Some(c.estimate);
                row.completeness_ci95 = Some(c.ci95_halfwidth);
                row.completeness_within_3sigma = Some(binomial_consistent(c.event("accept"), trials, cf, 3.0));
                row.false_accept_measured = Some(false_accepts as f64 / trials as f64);
                row.false_accept_within_bound = Some(binomial_not_above(false_accepts, trials, bound, 3.0));
            }
            Ok(row)
        })
        .collect()
}

fn build_scheme(a: &CompileArgs, lambda: usize) -> Result<Box<dyn PrcScheme + Send>, Failure> {
    Ok(match a.scheme {
        SchemeKind::Prf => Box::new(PrfPrc::new(
            PrfPrcParams::explicit(lambda, a.ell, a.blocks).map_err(usage)?,
        )),
        SchemeKind::Tag => {
            if a.k == 0 || a.k > 32 {
                return Err(Failure::Usage(format!("--k {} outside 1..=32", a.k)));
            }
            Box::new(TagScheme::new(a.k, a.pad, lambda))
        }
        SchemeKind::OracleFree => {
            if lambda == 0 {
                return Err(Failure::Usage("--lambda must be positive".into()));
            }
            Box::new(ToyScheme::new(
                lambda,
                lambda,
                ToyEncoder::Key,
                ToyDecoder::NearKey((lambda / 4).max(1)),
            ))
        }
    })
}

fn compile(a: &CompileArgs, trials: u64, seed: Seed) -> Result<Vec<SweepRow>, Failure> {
    let mut cells = Vec::new();
    for &lambda in &a.lambda {
        for &rho in &a.rho {
            let rho = noise(rho)?;
            for &tau in &a.tau {
                let mut params = CompilerParams::new(tau).map_err(usage)?;
                params = params.with_heavy_mode(match a.heavy_mode {
                    HeavyModeArg::Auto => HeavyMode::Auto,
                    HeavyModeArg::Exact => HeavyMode::Exact,
                    HeavyModeArg::MonteCarlo => HeavyMode::MonteCarlo {
                        probes: a.probes.unwrap_or((100.0 / tau).ceil() as u64),
                    },
                });
                cells.push((build_scheme(a, lambda)?, rho, params));
            }
        }
    }
    if trials < prclab_core::prc::MIN_TRIALS {
        return Err(Failure::Usage(format!(
            "--trials {trials} below {}",
            prclab_core::prc::MIN_TRIALS
        )));
    }
    cells
        .par_iter()
        .enumerate()
        .map(|(i, (scheme, rho, params))| {
            let err = |e: PrcError| match e {
                PrcError::InvalidParameter(_) | PrcError::EnumerationLimit(_) => Failure::Usage(e.to_string()),
                _ => Failure::Io(e.to_string()),
            };
            let (report, counts) =
                run_completeness_experiment(scheme.as_ref(), params, *rho, trials, seed.child(i as u64))
                    .map_err(err)?;
            SweepRow::from_experiment(scheme.as_ref(), params, *rho, &report, &counts).map_err(err)
        })
        .collect()
}

#[derive(Debug, Serialize)]
pub struct BoundRow {
    pub quantity: &'static str,
    pub value: f64,
}

fn bounds(a: &BoundsArgs) -> Result<Vec<BoundRow>, Failure> {
    let rho = noise(a.rho)?.rho();
    if a.m == 0 {
        return Err(Failure::Usage("--m must be positive".into()));
    }
    let d = theoretical_delta_prime(a.delta, a.q_bound, a.tau, rho, a.eps, a.n, a.lambda).map_err(usage)?;
    let blocks = a.blocks.unwrap_or(a.lambda * a.lambda);
    let params = PrfPrcParams::explicit(a.lambda, a.ell, blocks).map_err(usage)?;
    let key_bits = a.key_bits.unwrap_or(a.lambda);
    let mut rows = vec![
        BoundRow {
            quantity: "delta_prime",
            value: d.total,
        },
        BoundRow {
            quantity: "delta",
            value: d.delta,
        },
        BoundRow {
            quantity: "bad1_term",
            value: d.bad1_term,
        },
        BoundRow {
            quantity: "tau_term",
            value: d.tau_term,
        },
        BoundRow {
            quantity: "leakage_term",
            value: d.leakage_term,
        },
        BoundRow {
            quantity: "bad1_bound",
            value: bad1_bound(a.q_bound, a.tau, a.lambda),
        },
        BoundRow {
            quantity: "bad2_tau_term",
            value: bad2_tau_term(a.q_bound, a.tau, rho),
        },
        BoundRow {
            quantity: "tau_exponent",
            value: tau_exponent(rho),
        },
    ];
    if let Some(c) = a.c {
        if !c.is_finite() || c < 0.0 {
            return Err(Failure::Usage(format!("--c {c} must be a nonnegative number")));
        }
        let lambda = a.lambda as f64;
        rows.push(BoundRow {
            quantity: "tau_at_lambda_pow_c",
            value: lambda.powf(-c),
        });
        rows.push(BoundRow {
            quantity: "tau_term_at_lambda_pow_c",
            value: tau_term_at_power(lambda, c, rho),
        });
    }
    rows.push(BoundRow {
        quantity: "key_leakage_bound",
        value: key_leakage_bound(a.eps, a.n, a.m, key_bits),
    });
    if rho < 1.0 {
        let default = PrfPrcParams::new(a.lambda, rho).map_err(usage)?;
        rows.push(BoundRow {
            quantity: "prf_default_ell",
            value: default.ell as f64,
        });
    }
    rows.push(BoundRow {
        quantity: "prf_completeness",
        value: closed_form_completeness(rho, params.ell, params.blocks),
    });
    rows.push(BoundRow {
        quantity: "prf_soundness_bound",
        value: closed_form_soundness_bound(params.ell, params.blocks),
    });
    Ok(rows)
}
