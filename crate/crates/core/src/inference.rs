//! Maximum-likelihood estimation over multi-setting datasets and Fisher
//! information assembly.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::fisher::FisherMatrix;
use crate::models::{check_setting, Evidence, Outcome, Setting, StatisticalModel, Summary};
use crate::optimize::nelder_mead;

/// Outcomes collected with one setting.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    setting: Setting,
    outcomes: Vec<Outcome>,
    summary: Summary,
}

impl Batch {
    pub fn new(model: &dyn StatisticalModel, setting: Setting, outcomes: Vec<Outcome>) -> Result<Self> {
        check_setting(model, &setting)?;
        if outcomes.is_empty() {
            return domain("a batch needs at least one outcome");
        }
        let summary = model.summarize(&setting, &outcomes)?;
        Ok(Self {
            setting,
            outcomes,
            summary,
        })
    }

    pub fn setting(&self) -> &Setting {
        &self.setting
    }

    pub fn outcomes(&self) -> &[Outcome] {
        &self.outcomes
    }

    pub fn summary(&self) -> &Summary {
        &self.summary
    }

    pub fn copies(&self) -> usize {
        self.outcomes.len()
    }

    pub fn evidence(&self) -> Evidence {
        Evidence {
            setting: self.setting.clone(),
            summary: self.summary.clone(),
        }
    }
}

/// Accumulated batches.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    batches: Vec<Batch>,
}

/// Serialized form: per-batch setting vector and outcome array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub batches: Vec<BatchRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchRecord {
    pub setting: Setting,
    pub outcomes: Vec<Outcome>,
}

impl Dataset {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, batch: Batch) {
        self.batches.push(batch);
    }

    pub fn batches(&self) -> &[Batch] {
        &self.batches
    }

    pub fn is_empty(&self) -> bool {
        self.batches.is_empty()
    }

    pub fn total_copies(&self) -> usize {
        self.batches.iter().map(Batch::copies).sum()
    }

    pub fn evidence(&self) -> Vec<Evidence> {
        self.batches.iter().map(Batch::evidence).collect()
    }

    pub fn design(&self) -> Vec<(Setting, usize)> {
        self.batches.iter().map(|b| (b.setting.clone(), b.copies())).collect()
    }

    pub fn to_record(&self) -> DatasetRecord {
        DatasetRecord {
            batches: self
                .batches
                .iter()
                .map(|b| BatchRecord {
                    setting: b.setting.clone(),
                    outcomes: b.outcomes.clone(),
                })
                .collect(),
        }
    }

    pub fn from_record(model: &dyn StatisticalModel, record: DatasetRecord) -> Result<Self> {
        let batches = record
            .batches
            .into_iter()
            .map(|b| Batch::new(model, b.setting, b.outcomes))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { batches })
    }
}

/// Estimator configuration; the defaults are the documented ones.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MlOptions {
    /// Coarse grid points per parameter axis.
    pub grid_points: usize,
    /// Simplex parameter tolerance.
    pub tol: f64,
    pub max_iter: usize,
    /// Relative distance to the box edge reported as a boundary hit.
    pub boundary_tol: f64,
}

impl Default for MlOptions {
    fn default() -> Self {
        Self {
            grid_points: 101,
            tol: 1e-8,
            max_iter: 10_000,
            boundary_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlResult {
    pub estimate: Vec<f64>,
    pub log_likelihood_max: f64,
    pub fisher_at_ml: FisherMatrix,
    pub converged: bool,
    pub boundary_hit: bool,
}

pub fn log_likelihood_evidence(model: &dyn StatisticalModel, evidence: &[Evidence], params: &[f64]) -> f64 {
    evidence
        .iter()
        .map(|e| model.log_likelihood(params, &e.setting, &e.summary))
        .sum()
}

/// Log of the i.i.d. likelihood across all batches.
pub fn log_likelihood(model: &dyn StatisticalModel, dataset: &Dataset, params: &[f64]) -> Result<f64> {
    model.param_space().check_point(params)?;
    Ok(dataset
        .batches
        .iter()
        .map(|b| model.log_likelihood(params, &b.setting, &b.summary))
        .sum())
}

fn grid_argmax(model: &dyn StatisticalModel, evidence: &[Evidence], points: usize) -> (Vec<f64>, f64) {
    let space = model.param_space();
    let d = space.dim();
    let axes: Vec<Vec<f64>> = (0..d)
        .map(|j| {
            let (lo, hi) = (space.lower()[j], space.upper()[j]);
            (0..points)
                .map(|i| if points == 1 { 0.5 * (lo + hi) } else { lo + (hi - lo) * i as f64 / (points - 1) as f64 })
                .collect()
        })
        .collect();
    let total = points.pow(d as u32);
    let mut best = (vec![0.0; d], f64::NEG_INFINITY);
    let mut point = vec![0.0; d];
    for flat in 0..total {
        // first axis varies slowest: lexicographic order
        let mut rem = flat;
        for j in (0..d).rev() {
            point[j] = axes[j][rem % points];
            rem /= points;
        }
        let v = log_likelihood_evidence(model, evidence, &point);
        if v > best.1 || (flat == 0 && best.1 == f64::NEG_INFINITY) {
            best = (point.clone(), v);
        }
    }
    best
}

fn finish(
    model: &dyn StatisticalModel,
    evidence: &[Evidence],
    start: (Vec<f64>, f64),
    step: Vec<f64>,
    opts: &MlOptions,
) -> MlResult {
    let space = model.param_space();
    let m = nelder_mead(
        |x| -log_likelihood_evidence(model, evidence, x),
        &start.0,
        &step,
        space,
        opts.tol,
        opts.max_iter,
    );
    let (mut estimate, value) = if -m.value >= start.1 { (m.x, -m.value) } else { start };
    space.clamp(&mut estimate);
    let fisher_at_ml = fisher_at_evidence(model, evidence, &estimate);
    MlResult {
        boundary_hit: space.near_boundary(&estimate, opts.boundary_tol),
        estimate,
        log_likelihood_max: value,
        fisher_at_ml,
        converged: m.converged,
    }
}

/// Grid search then simplex refinement, clamped to the parameter box.
pub fn ml_estimate_evidence(model: &dyn StatisticalModel, evidence: &[Evidence], opts: &MlOptions) -> Result<MlResult> {
    if evidence.is_empty() {
        return domain("cannot estimate from an empty dataset");
    }
    if opts.grid_points == 0 {
        return Err(Error::Config("grid_points must be positive".into()));
    }
    let start = grid_argmax(model, evidence, opts.grid_points);
    let space = model.param_space();
    let step = space
        .widths()
        .map(|w| w / (opts.grid_points.max(2) - 1) as f64)
        .collect();
    Ok(finish(model, evidence, start, step, opts))
}

pub fn ml_estimate(model: &dyn StatisticalModel, dataset: &Dataset, opts: &MlOptions) -> Result<MlResult> {
    ml_estimate_evidence(model, &dataset.evidence(), opts)
}

/// Simplex refinement only, from a known nearby start (projected estimates).
pub fn ml_refine(
    model: &dyn StatisticalModel,
    evidence: &[Evidence],
    start: &[f64],
    step: &[f64],
    opts: &MlOptions,
) -> Result<MlResult> {
    if evidence.is_empty() {
        return domain("cannot estimate from an empty dataset");
    }
    model.param_space().check_point(start)?;
    let v = log_likelihood_evidence(model, evidence, start);
    Ok(finish(model, evidence, (start.to_vec(), v), step.to_vec(), opts))
}

/// Fisher-scoring refinement from a start near the maximum.
///
/// Uses the expected information with a central-difference score and step
/// halving. Falls back to [`ml_refine`] when the information is singular,
/// the start sits on the box edge, or scoring stalls.
pub fn ml_scoring(
    model: &dyn StatisticalModel,
    evidence: &[Evidence],
    start: &[f64],
    step: &[f64],
    opts: &MlOptions,
) -> Result<MlResult> {
    if evidence.is_empty() {
        return domain("cannot estimate from an empty dataset");
    }
    let space = model.param_space();
    space.check_point(start)?;
    let d = start.len();
    let h: Vec<f64> = space.widths().map(|w| 1e-5 * w).collect();
    let loglik = |x: &[f64]| log_likelihood_evidence(model, evidence, x);
    let mut r = start.to_vec();
    let mut f = loglik(&r);
    for _ in 0..50 {
        let inside = (0..d).all(|i| r[i] - h[i] >= space.lower()[i] && r[i] + h[i] <= space.upper()[i]);
        let info = fisher_at_evidence(model, evidence, &r);
        let Some(inv) = inside.then(|| info.inverse().ok()).flatten() else {
            break;
        };
        let score: Vec<f64> = (0..d)
            .map(|i| {
                let mut p = r.clone();
                p[i] += h[i];
                let up = loglik(&p);
                p[i] -= 2.0 * h[i];
                (up - loglik(&p)) / (2.0 * h[i])
            })
            .collect();
        let delta: Vec<f64> = (0..d).map(|i| (0..d).map(|j| inv[(i, j)] * score[j]).sum()).collect();
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..30 {
            let mut cand: Vec<f64> = (0..d).map(|i| r[i] + t * delta[i]).collect();
            space.clamp(&mut cand);
            let fc = loglik(&cand);
            if fc >= f {
                accepted = Some((cand, fc));
                break;
            }
            t *= 0.5;
        }
        let Some((cand, fc)) = accepted else {
            break;
        };
        let moved = (0..d).map(|i| (cand[i] - r[i]).abs()).fold(0.0, f64::max);
        r = cand;
        f = fc;
        if moved < opts.tol {
            let fisher_at_ml = fisher_at_evidence(model, evidence, &r);
            return Ok(MlResult {
                boundary_hit: space.near_boundary(&r, opts.boundary_tol),
                estimate: r,
                log_likelihood_max: f,
                fisher_at_ml,
                converged: true,
            });
        }
    }
    ml_refine(model, evidence, &r, step, opts)
}

/// `Σ_batches copies · F1(setting; params)`.
pub fn fisher_at(model: &dyn StatisticalModel, design: &[(Setting, usize)], params: &[f64]) -> Result<FisherMatrix> {
    model.param_space().check_point(params)?;
    let d = model.dim();
    let mut total = FisherMatrix::zeros(d);
    for (setting, copies) in design {
        total += &(&model.fisher_per_copy(params, setting) * *copies as f64);
    }
    Ok(total)
}

pub fn fisher_at_evidence(model: &dyn StatisticalModel, evidence: &[Evidence], params: &[f64]) -> FisherMatrix {
    let mut total = FisherMatrix::zeros(model.dim());
    for e in evidence {
        total += &(&model.fisher_per_copy(params, &e.setting) * e.copies() as f64);
    }
    total
}

/// Observed information: central-difference Hessian of `-log L` with step `h`.
pub fn observed_information(
    model: &dyn StatisticalModel,
    evidence: &[Evidence],
    params: &[f64],
    h: f64,
) -> Result<FisherMatrix> {
    let d = params.len();
    let f = |x: &[f64]| -log_likelihood_evidence(model, evidence, x);
    let mut m = DMatrix::zeros(d, d);
    let f0 = f(params);
    for i in 0..d {
        for j in i..d {
            let v = if i == j {
                let mut p = params.to_vec();
                p[i] += h;
                let fp = f(&p);
                p[i] -= 2.0 * h;
                let fm = f(&p);
                (fp - 2.0 * f0 + fm) / (h * h)
            } else {
                let shifted = |si: f64, sj: f64| {
                    let mut p = params.to_vec();
                    p[i] += si * h;
                    p[j] += sj * h;
                    f(&p)
                };
                (shifted(1.0, 1.0) - shifted(1.0, -1.0) - shifted(-1.0, 1.0) + shifted(-1.0, -1.0)) / (4.0 * h * h)
            };
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    if m.iter().any(|x: &f64| !x.is_finite()) {
        return Err(Error::Numerical("non-finite observed information".into()));
    }
    FisherMatrix::new(m)
}
