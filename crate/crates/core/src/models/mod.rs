//! Statistical models behind one interface: outcome distributions, samplers
//! and per-copy Fisher information as functions of the unknown parameters
//! and the measurement setting.

mod homodyne;
mod squeezed;
mod three_path;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::fisher::FisherMatrix;
use crate::rng::StreamRng;
use crate::space::ParamSpace;

pub use homodyne::{
    homodyne_phase_fisher, homodyne_phase_fisher_printed, homodyne_phase_logpdf, homodyne_phase_opt_setting,
    homodyne_phase_variance, HomodynePhase, OptimalPhase,
};
pub use squeezed::{squeezed_fisher_elements, squeezed_variance, SqueezedState};
pub use three_path::{three_path_probs, tritter_unitary, ThreePath, OCCUPATIONS};

/// Measurement setting `m`, one value per setting coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Setting(pub Vec<f64>);

impl Setting {
    pub fn new(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for Setting {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

/// Single measurement outcome.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Outcome {
    /// Index into a finite outcome list.
    Discrete(u32),
    /// One homodyne quadrature value.
    Quadrature(f64),
    /// Quadratures measured at the two LO phases of a phase-pair setting.
    QuadraturePair([f64; 2]),
}

/// Sufficient statistics of one batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Summary {
    /// Zero-mean Gaussian channels: copy count and per-channel `Σ x²`.
    Quadratures { copies: usize, sum_sq: Vec<f64> },
    /// Outcome histogram.
    Counts(Vec<u64>),
}

impl Summary {
    pub fn copies(&self) -> usize {
        match self {
            Summary::Quadratures { copies, .. } => *copies,
            Summary::Counts(c) => c.iter().sum::<u64>() as usize,
        }
    }
}

/// A batch reduced to what the likelihood needs.
#[derive(Debug, Clone, PartialEq)]
pub struct Evidence {
    pub setting: Setting,
    pub summary: Summary,
}

impl Evidence {
    pub fn copies(&self) -> usize {
        self.summary.copies()
    }
}

pub trait StatisticalModel: Send + Sync {
    fn name(&self) -> &'static str;

    /// Names used for parameters in JSON and CSV output.
    fn param_names(&self) -> &'static [&'static str];

    fn setting_names(&self) -> &'static [&'static str];

    fn param_space(&self) -> &ParamSpace;

    fn setting_space(&self) -> &ParamSpace;

    /// Period of each setting coordinate (the likelihood is periodic in it).
    fn setting_period(&self) -> Vec<f64>;

    fn sample_unchecked(&self, params: &[f64], setting: &Setting, n: usize, rng: &mut StreamRng) -> Vec<Outcome>;

    fn summarize(&self, setting: &Setting, outcomes: &[Outcome]) -> Result<Summary>;

    /// Draws the sufficient statistics of `n` copies directly.
    ///
    /// Equal in distribution to summarizing [`StatisticalModel::sample_unchecked`].
    fn simulate_summary(&self, params: &[f64], setting: &Setting, n: usize, rng: &mut StreamRng) -> Summary {
        let outcomes = self.sample_unchecked(params, setting, n, rng);
        self.summarize(setting, &outcomes).expect("sampler produced outcomes of the model's own kind")
    }

    /// Batch log-likelihood; `-inf` when an observed outcome has zero probability.
    fn log_likelihood(&self, params: &[f64], setting: &Setting, summary: &Summary) -> f64;

    /// Fisher information of one copy.
    fn fisher_per_copy(&self, params: &[f64], setting: &Setting) -> FisherMatrix;

    fn dim(&self) -> usize {
        self.param_space().dim()
    }

    fn setting_dim(&self) -> usize {
        self.setting_space().dim()
    }
}

/// Draws `n` i.i.d. outcomes after validating parameters and setting.
pub fn sample(
    model: &dyn StatisticalModel,
    params: &[f64],
    setting: &Setting,
    n: usize,
    rng: &mut StreamRng,
) -> Result<Vec<Outcome>> {
    model.param_space().check_point(params)?;
    check_setting(model, setting)?;
    if n == 0 {
        return domain("need at least one copy");
    }
    Ok(model.sample_unchecked(params, setting, n, rng))
}

pub fn check_setting(model: &dyn StatisticalModel, setting: &Setting) -> Result<()> {
    if setting.0.len() != model.setting_dim() {
        return Err(Error::Dimension {
            expected: model.setting_dim(),
            got: setting.0.len(),
        });
    }
    if !model.setting_space().contains(&setting.0) {
        return domain(format!("setting {:?} outside the setting space", setting.0));
    }
    Ok(())
}

pub(crate) fn gaussian_summary(setting: &Setting, outcomes: &[Outcome], channels: usize) -> Result<Summary> {
    let mut sum_sq = vec![0.0; channels];
    for o in outcomes {
        match (o, channels) {
            (Outcome::Quadrature(x), 1) if x.is_finite() => sum_sq[0] += x * x,
            (Outcome::QuadraturePair([a, b]), 2) if a.is_finite() && b.is_finite() => {
                sum_sq[0] += a * a;
                sum_sq[1] += b * b;
            }
            _ => return domain(format!("outcome {o:?} does not fit setting {:?}", setting.0)),
        }
    }
    Ok(Summary::Quadratures {
        copies: outcomes.len(),
        sum_sq,
    })
}

/// Zero-mean Gaussian log-likelihood of `copies` draws with `Σ x² = sum_sq`.
pub(crate) fn gaussian_loglik(variance: f64, copies: usize, sum_sq: f64) -> f64 {
    -0.5 * copies as f64 * (2.0 * std::f64::consts::PI * variance).ln() - sum_sq / (2.0 * variance)
}

/// Model selection and known constants, as they appear in configuration files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum ModelSpec {
    Homodyne { zeta: f64 },
    ThreePath,
    Squeezed,
}

impl ModelSpec {
    pub fn build(&self) -> Result<Box<dyn StatisticalModel>> {
        Ok(match *self {
            ModelSpec::Homodyne { zeta } => Box::new(HomodynePhase::new(zeta)?),
            ModelSpec::ThreePath => Box::new(ThreePath::new()),
            ModelSpec::Squeezed => Box::new(SqueezedState::new()),
        })
    }
}

/// Named values (`{"phi": 1.179}`) ordered by the model's name list.
pub fn named_values(names: &[&str], values: &BTreeMap<String, f64>) -> Result<Vec<f64>> {
    if let Some(extra) = values.keys().find(|k| !names.contains(&k.as_str())) {
        return Err(Error::Config(format!("unknown name '{extra}', expected one of {names:?}")));
    }
    names
        .iter()
        .map(|n| {
            values
                .get(*n)
                .copied()
                .ok_or_else(|| Error::Config(format!("missing value for '{n}'")))
        })
        .collect()
}

pub fn to_named(names: &[&str], values: &[f64]) -> BTreeMap<String, f64> {
    names.iter().zip(values).map(|(n, v)| (n.to_string(), *v)).collect()
}
