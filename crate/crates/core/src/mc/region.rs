//! Monte Carlo size, credibility and RSE of likelihood-ratio regions under
//! the uniform prior on the parameter box.

use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::inference::{log_likelihood_evidence, MlResult};
use crate::models::{Evidence, StatisticalModel};
use crate::rng::{stream, tag};

const CHUNK: usize = 4096;
const MIN_SAMPLES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Proposal {
    /// Uniform over the parameter box.
    Uniform,
    /// Gaussian centred at the ML estimate with covariance `F_ML⁻¹`, truncated to the box.
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub samples: usize,
    pub proposal: Proposal,
    pub seed: u64,
}

impl McConfig {
    pub fn new(samples: usize, proposal: Proposal, seed: u64) -> Result<Self> {
        if samples < MIN_SAMPLES {
            return Err(Error::Config(format!("need at least {MIN_SAMPLES} samples, got {samples}")));
        }
        Ok(Self { samples, proposal, seed })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub samples: usize,
    pub proposal: Proposal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionMcReport {
    pub lambda: f64,
    pub size: McEstimate,
    pub credibility: McEstimate,
    /// Draws that landed inside the region.
    pub accepted: usize,
    pub zero_acceptance: bool,
}

struct Draw {
    /// Prior-to-proposal density ratio (zero outside the box).
    weight: f64,
    /// `log L(r) − log L_max`.
    log_ratio: f64,
    point: Vec<f64>,
}

fn draws(model: &dyn StatisticalModel, evidence: &[Evidence], ml: &MlResult, config: &McConfig) -> Result<Vec<Draw>> {
    if config.samples < MIN_SAMPLES {
        return Err(Error::Config(format!("need at least {MIN_SAMPLES} samples")));
    }
    if evidence.is_empty() {
        return domain("Monte Carlo region estimates need a nonempty dataset");
    }
    let space = model.param_space();
    let d = space.dim();
    let volume = space.volume();
    // F = L Lᵀ; r = μ + L⁻ᵀ z has covariance F⁻¹
    let chol = match config.proposal {
        Proposal::Uniform => None,
        Proposal::Gaussian => {
            let c = ml
                .fisher_at_ml
                .matrix()
                .clone()
                .cholesky()
                .ok_or(Error::SingularFisher { det: ml.fisher_at_ml.det() })?;
            let l = c.l();
            let log_det_l: f64 = l.diagonal().iter().map(|x| x.ln()).sum();
            let lt_inv = l
                .transpose()
                .try_inverse()
                .ok_or(Error::SingularFisher { det: ml.fisher_at_ml.det() })?;
            Some((lt_inv, log_det_l))
        }
    };
    let log_norm = -0.5 * d as f64 * (2.0 * std::f64::consts::PI).ln();
    let chunks = config.samples.div_ceil(CHUNK);
    let per_chunk: Vec<Vec<Draw>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream(config.seed, &[tag::ORACLE, c as u64]);
            let n = CHUNK.min(config.samples - c * CHUNK);
            (0..n)
                .map(|_| {
                    let (point, weight) = match &chol {
                        None => {
                            let p: Vec<f64> = (0..d)
                                .map(|j| space.lower()[j] + (space.upper()[j] - space.lower()[j]) * rng.random::<f64>())
                                .collect();
                            (p, 1.0)
                        }
                        Some((lt_inv, log_det_l)) => {
                            let z = DVector::from_iterator(d, (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)));
                            let shift = lt_inv * &z;
                            let p: Vec<f64> = (0..d).map(|j| ml.estimate[j] + shift[j]).collect();
                            let log_q = log_norm + log_det_l - 0.5 * z.norm_squared();
                            let w = if space.contains(&p) { (-log_q).exp() / volume } else { 0.0 };
                            (p, w)
                        }
                    };
                    let log_ratio = if weight > 0.0 {
                        log_likelihood_evidence(model, evidence, &point) - ml.log_likelihood_max
                    } else {
                        f64::NEG_INFINITY
                    };
                    Draw { weight, log_ratio, point }
                })
                .collect()
        })
        .collect();
    Ok(per_chunk.into_iter().flatten().collect())
}

fn mean_estimate(values: impl Iterator<Item = f64> + Clone, m: usize, proposal: Proposal) -> McEstimate {
    let mf = m as f64;
    let mean = values.clone().sum::<f64>() / mf;
    let var = values.map(|v| (v - mean).powi(2)).sum::<f64>() / (mf - 1.0);
    McEstimate {
        estimate: mean,
        std_error: (var / mf).sqrt(),
        samples: m,
        proposal,
    }
}

/// Ratio `Σy/Σx` with the delta-method standard error.
fn ratio_estimate(pairs: &[(f64, f64)], proposal: Proposal) -> McEstimate {
    let m = pairs.len() as f64;
    let sx: f64 = pairs.iter().map(|p| p.1).sum();
    let sy: f64 = pairs.iter().map(|p| p.0).sum();
    let ratio = if sx > 0.0 { sy / sx } else { f64::NAN };
    let resid: f64 = pairs.iter().map(|(y, x)| (y - ratio * x).powi(2)).sum();
    let xbar = sx / m;
    McEstimate {
        estimate: ratio,
        std_error: (resid / (m * (m - 1.0))).sqrt() / xbar,
        samples: pairs.len(),
        proposal,
    }
}

fn check_lambda(lambda: f64) -> Result<f64> {
    if !(lambda > 0.0 && lambda <= 1.0) {
        return domain(format!("lambda must lie in (0, 1], got {lambda}"));
    }
    Ok(lambda.ln())
}

/// Size (prior content) and credibility (posterior content) of
/// `{r : L(r) ≥ λ L_max}`.
pub fn mc_region_props(
    model: &dyn StatisticalModel,
    evidence: &[Evidence],
    ml: &MlResult,
    lambda: f64,
    config: &McConfig,
) -> Result<RegionMcReport> {
    let log_lambda = check_lambda(lambda)?;
    let draws = draws(model, evidence, ml, config)?;
    let inside = |d: &Draw| d.weight > 0.0 && d.log_ratio >= log_lambda;
    let accepted = draws.iter().filter(|d| inside(d)).count();
    let size = mean_estimate(
        draws.iter().map(|d| if inside(d) { d.weight } else { 0.0 }),
        draws.len(),
        config.proposal,
    );
    let pairs: Vec<(f64, f64)> = draws
        .iter()
        .map(|d| {
            let w = if d.weight > 0.0 { d.weight * d.log_ratio.exp() } else { 0.0 };
            (if inside(d) { w } else { 0.0 }, w)
        })
        .collect();
    let credibility = ratio_estimate(&pairs, config.proposal);
    Ok(RegionMcReport {
        lambda,
        size,
        credibility,
        accepted,
        zero_acceptance: accepted == 0,
    })
}

/// Uniform-prior average of `‖r′ − reference‖²` over the region.
pub fn mc_rse(
    model: &dyn StatisticalModel,
    evidence: &[Evidence],
    ml: &MlResult,
    lambda: f64,
    reference: &[f64],
    config: &McConfig,
) -> Result<McEstimate> {
    let log_lambda = check_lambda(lambda)?;
    if reference.len() != model.dim() {
        return Err(Error::Dimension {
            expected: model.dim(),
            got: reference.len(),
        });
    }
    let draws = draws(model, evidence, ml, config)?;
    let pairs: Vec<(f64, f64)> = draws
        .iter()
        .map(|d| {
            if d.weight > 0.0 && d.log_ratio >= log_lambda {
                let dist2: f64 = d.point.iter().zip(reference).map(|(a, b)| (a - b).powi(2)).sum();
                (d.weight * dist2, d.weight)
            } else {
                (0.0, 0.0)
            }
        })
        .collect();
    if pairs.iter().all(|p| p.1 == 0.0) {
        return Err(Error::Numerical("no Monte Carlo sample entered the region".into()));
    }
    Ok(ratio_estimate(&pairs, config.proposal))
}
