use std::f64::consts::{FRAC_PI_2, PI};

use clap::{Args, ValueEnum};
use nalgebra::DMatrix;
use rand::Rng;
use serde::Serialize;

use bayesreg::inference::{ml_estimate, observed_information};
use bayesreg::mc::{
    cap_integrals, cap_slabs, lemma_check, mc_region_props, mc_rse, rse_interval_actual, rse_interval_categorical,
    rse_interval_difference, CapGeometry, McConfig, Proposal,
};
use bayesreg::models::{
    homodyne_phase_fisher, homodyne_phase_logpdf, sample, squeezed_fisher_elements, squeezed_variance,
    three_path_probs, HomodynePhase,
};
use bayesreg::region::*;
use bayesreg::rng::{stream, tag, StreamRng};
use bayesreg::{Batch, Dataset, FisherMatrix, MlOptions, Outcome, ParamSpace, Setting, StatisticalModel, SCHEMA_VERSION};

use crate::{CliError, CliResult};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Suite {
    /// Importance-sampled region size, credibility and RSE against the closed forms.
    McRegion,
    /// Summation lemma on constructed sequences and ball slabs.
    Lemma,
    /// Cap-truncated balls and one-dimensional interval RSE.
    Conservativeness,
    /// Trace inequality on random SPD matrices.
    Trace,
    /// Threshold stationary points.
    Thresholds,
    /// Size/credibility/λ identities.
    Identities,
    /// Model probabilities and Fisher information.
    Models,
}

#[derive(Args)]
pub struct ValidateArgs {
    #[arg(value_enum)]
    suite: Suite,
    /// Random cases for the fuzzing suites.
    #[arg(long)]
    cases: Option<usize>,
    /// Monte Carlo samples for mc-region.
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Serialize)]
struct Check {
    name: String,
    passed: bool,
    detail: String,
}

#[derive(Serialize)]
struct Report {
    schema_version: &'static str,
    suite: String,
    passed: bool,
    checks: Vec<Check>,
}

fn check(name: &str, passed: bool, detail: String) -> Check {
    Check {
        name: name.to_string(),
        passed,
        detail,
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn random_spd(d: usize, scale: f64, rng: &mut StreamRng) -> FisherMatrix {
    let a = DMatrix::from_fn(d, d, |_, _| rng.random_range(-1.0..1.0));
    FisherMatrix::new((&a * a.transpose() + DMatrix::identity(d, d) * 0.05) * scale).expect("symmetric by construction")
}

fn identities(cases: usize, rng: &mut StreamRng) -> CliResult<Vec<Check>> {
    let (mut tri, mut plaus) = (0.0f64, 0.0f64);
    for _ in 0..cases {
        let d = rng.random_range(1..=3);
        let f = random_spd(d, rng.random_range(1.0..1e4), rng);
        let space = ParamSpace::with_volume(d, rng.random_range(0.5..5.0))?;
        let lambda: f64 = rng.random_range(1e-4..0.999);
        let p = size_of_lambda(lambda, &f, &space)?;
        tri = tri
            .max(rel(size_from_credibility(p.credibility, &f, &space)?, p.size))
            .max(rel(neg_log_lambda_of_size(p.size, &f, &space)?, -lambda.ln()))
            .max(rel(lambda_of_credibility(d, p.credibility)?, lambda));
        let lc = lambda_crit(&f, &space)?;
        if !lc.degenerate {
            plaus = plaus.max(rel(mrse_plausible(&f, &space)?, mrse_asymptotic(lc.value, &f)?));
        }
    }
    let mut d2 = 0.0f64;
    for i in 1..=1000 {
        let lambda = i as f64 / 1000.0;
        d2 = d2.max((credibility_of_lambda(2, lambda)? - (1.0 - lambda)).abs());
    }
    Ok(vec![
        check("size-credibility-lambda triangle", tri <= 1e-9, format!("max rel err {tri:.2e}")),
        check("plausible MRSE at lambda_crit", plaus <= 1e-10, format!("max rel err {plaus:.2e}")),
        check("d=2 credibility 1 - lambda", d2 <= 1e-12, format!("max abs err {d2:.2e}")),
    ])
}

fn trace(cases: usize, rng: &mut StreamRng) -> CliResult<Vec<Check>> {
    let mut violations = 0;
    for _ in 0..cases {
        let d = rng.random_range(1..=5);
        let f = random_spd(d, rng.random_range(0.01..1e3), rng);
        let bound = trace_inverse_bound(d, f.det(), default_trace_bound(&f))?;
        if f.inverse_trace()? > bound * (1.0 + 1e-12) {
            violations += 1;
        }
    }
    Ok(vec![check(
        "trace inverse bound",
        violations == 0,
        format!("{violations} violations in {cases} cases"),
    )])
}

fn grid_argmax(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let (mut a, mut b, mut best) = (lo, hi, lo);
    for _ in 0..3 {
        let n = 2000;
        let h = (b - a) / n as f64;
        let mut top = f64::NEG_INFINITY;
        for i in 0..=n {
            let x = a + h * i as f64;
            let v = f(x);
            if v > top {
                top = v;
                best = x;
            }
        }
        a = (best - 2.0 * h).max(lo);
        b = (best + 2.0 * h).min(hi);
    }
    best
}

fn thresholds() -> CliResult<Vec<Check>> {
    let mut checks = Vec::new();
    for d in 1..=3 {
        let space = ParamSpace::with_volume(d, 1.0)?;
        let cmax = threshold_c_max(d)?;
        let c = grid_argmax(|c| credibility_profile(d, c).unwrap_or(f64::NEG_INFINITY), 1e-6, 1.0 - 1e-6);
        checks.push(check(
            &format!("d={d} credibility threshold"),
            (c - cmax).abs() <= 1e-6,
            format!("grid argmax {c:.9}, closed form {cmax:.9}"),
        ));
        let xmax = threshold_det(d, &space)?;
        let floor = (2.0 * PI).powi(d as i32);
        let x = grid_argmax(|x| size_profile(d, x, 1.0).unwrap_or(f64::NEG_INFINITY), floor, 20.0 * xmax);
        checks.push(check(
            &format!("d={d} det threshold"),
            rel(x, xmax) <= 1e-6,
            format!("grid argmax {x:.6}, closed form {xmax:.6}"),
        ));
        let lambda_c = lambda_of_credibility(d, cmax)?;
        checks.push(check(
            &format!("d={d} lambda at credibility threshold"),
            (lambda_c - (-0.5f64).exp()).abs() <= 1e-12,
            format!("{lambda_c:.12} (e^-1/2 = {:.12})", (-0.5f64).exp()),
        ));
        let f = FisherMatrix::diagonal(&vec![xmax.powf(1.0 / d as f64); d]);
        let lambda_x = lambda_crit(&f, &space)?.value;
        let expected = (-(d as f64) / 2.0).exp();
        checks.push(check(
            &format!("d={d} lambda_crit at det threshold"),
            (lambda_x - expected).abs() <= 1e-12,
            format!("{lambda_x:.12} (e^-d/2 = {expected:.12})"),
        ));
    }
    Ok(checks)
}

fn conservativeness(cases: usize, rng: &mut StreamRng) -> CliResult<Vec<Check>> {
    let mut checks = Vec::new();
    for d in 1..=4 {
        let full = d as f64 / (d as f64 + 2.0);
        let rse = (0..200)
            .map(|i| Ok(cap_integrals(&CapGeometry::new(d, 1.0, i as f64 / 199.0)?)?.rse))
            .collect::<CliResult<Vec<f64>>>()?;
        let k = (0..200).min_by(|&a, &b| rse[a].total_cmp(&rse[b])).unwrap_or(0);
        let bounded = rse.iter().all(|&v| v <= full * (1.0 + 1e-9));
        let endpoints = rel(rse[0], full).max(rel(rse[199], full));
        let unimodal = rse[..=k].windows(2).all(|w| w[1] <= w[0]) && rse[k..].windows(2).all(|w| w[1] >= w[0]);
        checks.push(check(
            &format!("d={d} cap RSE"),
            bounded && endpoints <= 1e-9 && unimodal,
            format!("bounded {bounded}, endpoint rel err {endpoints:.1e}, unimodal {unimodal}, min at h = {:.3}", k as f64 / 199.0),
        ));
    }
    let (mut ident, mut dominated) = (0.0f64, 0);
    for _ in 0..cases {
        let r_ml = rng.random_range(-1.0..1.0);
        let a = r_ml - rng.random_range(0.01..1.0);
        let b = rng.random_range(r_ml..2.0 * r_ml - a);
        let r = rng.random_range(-2.0..2.0);
        let lhs = rse_interval_actual(r, a, b) - rse_interval_categorical(r, a, r_ml);
        ident = ident.max((lhs - rse_interval_difference(r, a, b, r_ml)).abs() / (1.0 + lhs.abs()));
        if rse_interval_categorical(r_ml, a, r_ml) >= rse_interval_actual(r_ml, a, b) {
            dominated += 1;
        }
    }
    checks.push(check("interval difference identity", ident <= 1e-12, format!("max err {ident:.1e}")));
    checks.push(check(
        "categorical >= actual at r = r_ml",
        dominated == cases,
        format!("{dominated}/{cases}"),
    ));
    Ok(checks)
}

fn lemma(cases: usize, rng: &mut StreamRng) -> CliResult<Vec<Check>> {
    let mut held = 0;
    for _ in 0..cases {
        let n = rng.random_range(2..40);
        let mut ratio = rng.random_range(0.0..1.0);
        let (mut a, mut b) = (vec![0.0], vec![0.0]);
        for _ in 0..n {
            ratio += rng.random_range(1e-3..1.0);
            let bj = rng.random_range(0.01..2.0);
            a.push(ratio * bj);
            b.push(bj);
        }
        let (sa, sb): (f64, f64) = (a.iter().sum(), b.iter().sum());
        b[0] = rng.random_range(0.01..5.0);
        a[0] = b[0] * sa / sb;
        if lemma_check(&a, &b)?.holds {
            held += 1;
        }
    }
    let mut slabs = true;
    for d in 1..=4 {
        let (a, b) = cap_slabs(d, 1.0, 50)?;
        slabs &= lemma_check(&a, &b)?.holds;
    }
    Ok(vec![
        check("constructed instances", held == cases, format!("{held}/{cases} hold")),
        check("ball slabs, d = 1..4", slabs, format!("holds {slabs}")),
    ])
}

fn mc_region(samples: usize, seed: u64) -> CliResult<Vec<Check>> {
    let (phi, zeta, theta, n) = (1.179, 0.7, 1.837, 10_000);
    let model = HomodynePhase::new(zeta)?;
    let setting = Setting::new(vec![theta]);
    let outcomes = sample(&model, &[phi], &setting, n, &mut stream(seed, &[tag::DATA]))?;
    let mut data = Dataset::new();
    data.push(Batch::new(&model, setting, outcomes)?);
    let ev = data.evidence();
    let ml = ml_estimate(&model, &data, &MlOptions::default())?;
    let f_ml = observed_information(&model, &ev, &ml.estimate, 1e-4)?;
    let cfg = McConfig::new(samples, Proposal::Gaussian, seed)?;
    let mut checks = Vec::new();
    for lambda in [0.5, 0.1, 0.01] {
        let mc = mc_region_props(&model, &ev, &ml, lambda, &cfg)?;
        let asym = size_of_lambda(lambda, &f_ml, model.param_space())?;
        let zs = (mc.size.estimate - asym.size) / mc.size.std_error;
        let zc = (mc.credibility.estimate - asym.credibility) / mc.credibility.std_error;
        checks.push(check(
            &format!("lambda={lambda} size and credibility"),
            zs.abs() <= 3.0 && zc.abs() <= 3.0,
            format!(
                "size {:.5e} vs {:.5e} (z = {zs:+.2}), credibility {:.5} vs {:.5} (z = {zc:+.2})",
                mc.size.estimate, asym.size, mc.credibility.estimate, asym.credibility
            ),
        ));
        let rse = mc_rse(&model, &ev, &ml, lambda, &[phi], &cfg)?;
        let want = rse_asymptotic(lambda, &ml.estimate, &[phi], &f_ml)?;
        checks.push(check(
            &format!("lambda={lambda} RSE"),
            rel(rse.estimate, want) <= 0.1,
            format!("{:.5e} vs {want:.5e}", rse.estimate),
        ));
    }
    Ok(checks)
}

fn models(cases: usize, rng: &mut StreamRng) -> CliResult<Vec<Check>> {
    let mut norm = 0.0f64;
    let mut negative = false;
    for _ in 0..cases {
        let psi = [rng.random_range(0.0..2.0 * PI), rng.random_range(0.0..2.0 * PI)];
        let phi = [rng.random_range(0.0..FRAC_PI_2), rng.random_range(0.0..FRAC_PI_2)];
        let p = three_path_probs(psi[0], psi[1], phi[0], phi[1]);
        norm = norm.max((p.iter().sum::<f64>() - 1.0).abs());
        negative |= p.iter().any(|&x| x < 0.0);
    }
    let mut sq = 0.0f64;
    for _ in 0..cases {
        let (nu, alpha, theta) = (
            rng.random_range(1.05..5.0),
            rng.random_range(0.0..FRAC_PI_2),
            rng.random_range(0.0..PI),
        );
        let h = 1e-3;
        let var = |n: f64, a: f64| squeezed_variance(n, a, theta);
        let stencil = |f: &dyn Fn(f64) -> CliResult<f64>, x: f64| -> CliResult<f64> {
            Ok((-f(x + 2.0 * h)? + 8.0 * f(x + h)? - 8.0 * f(x - h)? + f(x - 2.0 * h)?) / (12.0 * h))
        };
        let g = [
            stencil(&|n| Ok(var(n, alpha)?), nu)?,
            stencil(&|a| Ok(var(nu, a)?), alpha)?,
        ];
        let v = var(nu, alpha)?;
        let analytic = squeezed_fisher_elements(nu, alpha, theta);
        for i in 0..2 {
            for j in 0..2 {
                sq = sq.max((analytic[i][j] - g[i] * g[j] / (2.0 * v * v)).abs());
            }
        }
    }
    let (phi, zeta, theta) = (1.179, 0.7, 1.837);
    let model = HomodynePhase::new(zeta)?;
    let n = 1_000_000;
    let outcomes = sample(&model, &[phi], &Setting::new(vec![theta]), n, rng)?;
    let h = 1e-6;
    let score_var = outcomes
        .iter()
        .filter_map(|o| match *o {
            Outcome::Quadrature(x) => Some(x),
            _ => None,
        })
        .map(|x| {
            let s = (homodyne_phase_logpdf(x, phi + h, zeta, theta) - homodyne_phase_logpdf(x, phi - h, zeta, theta))
                / (2.0 * h);
            s * s
        })
        .sum::<f64>()
        / n as f64;
    let analytic = homodyne_phase_fisher(phi, zeta, theta, 1).matrix()[(0, 0)];
    Ok(vec![
        check(
            "three-path probabilities normalized",
            norm <= 1e-12 && !negative,
            format!("max |sum - 1| = {norm:.1e}"),
        ),
        check(
            "squeezed Fisher vs Gaussian-variance information",
            sq <= 1e-9,
            format!("max abs err {sq:.1e}"),
        ),
        check(
            "homodyne Fisher vs score variance",
            rel(score_var, analytic) <= 0.01,
            format!("{analytic:.5} vs {score_var:.5}"),
        ),
    ])
}

pub fn run(args: &ValidateArgs) -> CliResult<()> {
    let mut rng = stream(args.seed, &[tag::ORACLE]);
    let checks = match args.suite {
        Suite::McRegion => mc_region(args.samples, args.seed)?,
        Suite::Lemma => lemma(args.cases.unwrap_or(10_000), &mut rng)?,
        Suite::Conservativeness => conservativeness(args.cases.unwrap_or(10_000), &mut rng)?,
        Suite::Trace => trace(args.cases.unwrap_or(10_000), &mut rng)?,
        Suite::Thresholds => thresholds()?,
        Suite::Identities => identities(args.cases.unwrap_or(1000), &mut rng)?,
        Suite::Models => models(args.cases.unwrap_or(100), &mut rng)?,
    };
    let passed = checks.iter().all(|c| c.passed);
    let report = Report {
        schema_version: SCHEMA_VERSION,
        suite: args
            .suite
            .to_possible_value()
            .map(|v| v.get_name().to_string())
            .unwrap_or_default(),
        passed,
        checks,
    };
    let json = serde_json::to_string_pretty(&report).map_err(|e| CliError::Failure(e.to_string()))?;
    println!("{json}");
    if passed {
        Ok(())
    } else {
        Err(CliError::Failure("validation failed".into()))
    }
}
