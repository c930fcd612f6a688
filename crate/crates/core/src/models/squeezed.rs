//! Squeezed-state characterization by homodyne detection at a pair of LO
//! phases. Unknowns are the squeeze parameter `ν` and orientation `α` of a
//! single-mode Gaussian state of known, normalized temperature.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::DMatrix;
use rand_distr::{Distribution, Gamma, Normal};

use super::{gaussian_loglik, gaussian_summary, Outcome, Setting, StatisticalModel, Summary};
use crate::error::Result;
use crate::fisher::FisherMatrix;
use crate::rng::StreamRng;
use crate::space::ParamSpace;

/// Quadrature variance at LO phase `ϑ`:
/// `[ν² + 1 + (ν² - 1) cos(2α + 2ϑ)] / (4ν)`.
pub fn squeezed_variance(nu: f64, alpha: f64, theta: f64) -> Result<f64> {
    if !(nu > 0.0) {
        return crate::error::domain(format!("squeeze parameter nu must be positive, got {nu}"));
    }
    Ok(variance(nu, alpha, theta))
}

fn variance(nu: f64, alpha: f64, theta: f64) -> f64 {
    let nu2 = nu * nu;
    (nu2 + 1.0 + (nu2 - 1.0) * (2.0 * alpha + 2.0 * theta).cos()) / (4.0 * nu)
}

/// Single-phase Fisher elements `[[F11, F12], [F12, F22]]` over `(ν, α)`.
pub fn squeezed_fisher_elements(nu: f64, alpha: f64, theta: f64) -> [[f64; 2]; 2] {
    let nu2 = nu * nu;
    let w = 2.0 * alpha + 2.0 * theta;
    let (sin, cos) = w.sin_cos();
    let denom = nu2 + (nu2 - 1.0) * cos + 1.0;
    let num = nu2 + (nu2 + 1.0) * cos - 1.0;
    let f11 = num * num / (2.0 * nu2 * denom * denom);
    let f22 = 2.0 * (nu2 - 1.0).powi(2) * sin * sin / (denom * denom);
    let f12 = (1.0 - nu2) * sin * num / (nu * denom * denom);
    [[f11, f12], [f12, f22]]
}

/// Squeezed-state model: `ν ∈ [1, 5]`, `α ∈ [0, π/2]`; setting `(ϑ1, ϑ2) ∈ [0, π]²`.
///
/// One copy is one quadrature at each of the two LO phases, so the per-copy
/// information is `F̃(ϑ1) + F̃(ϑ2)`.
#[derive(Debug, Clone)]
pub struct SqueezedState {
    params: ParamSpace,
    settings: ParamSpace,
}

impl SqueezedState {
    pub fn new() -> Self {
        Self {
            params: ParamSpace::new(vec![1.0, 0.0], vec![5.0, FRAC_PI_2]).expect("valid box"),
            settings: ParamSpace::new(vec![0.0, 0.0], vec![PI, PI]).expect("valid box"),
        }
    }
}

impl Default for SqueezedState {
    fn default() -> Self {
        Self::new()
    }
}

impl StatisticalModel for SqueezedState {
    fn name(&self) -> &'static str {
        "squeezed"
    }

    fn param_names(&self) -> &'static [&'static str] {
        &["nu", "alpha"]
    }

    fn setting_names(&self) -> &'static [&'static str] {
        &["theta1", "theta2"]
    }

    fn param_space(&self) -> &ParamSpace {
        &self.params
    }

    fn setting_space(&self) -> &ParamSpace {
        &self.settings
    }

    fn setting_period(&self) -> Vec<f64> {
        vec![PI, PI]
    }

    fn sample_unchecked(&self, params: &[f64], setting: &Setting, n: usize, rng: &mut StreamRng) -> Vec<Outcome> {
        let n1 = Normal::new(0.0, variance(params[0], params[1], setting.0[0]).sqrt()).expect("positive variance");
        let n2 = Normal::new(0.0, variance(params[0], params[1], setting.0[1]).sqrt()).expect("positive variance");
        (0..n)
            .map(|_| {
                let a = n1.sample(rng);
                let b = n2.sample(rng);
                Outcome::QuadraturePair([a, b])
            })
            .collect()
    }

    fn summarize(&self, setting: &Setting, outcomes: &[Outcome]) -> Result<Summary> {
        gaussian_summary(setting, outcomes, 2)
    }

    fn simulate_summary(&self, params: &[f64], setting: &Setting, n: usize, rng: &mut StreamRng) -> Summary {
        let chi2 = Gamma::new(0.5 * n as f64, 2.0).expect("n >= 1");
        let s1 = variance(params[0], params[1], setting.0[0]) * chi2.sample(rng);
        let s2 = variance(params[0], params[1], setting.0[1]) * chi2.sample(rng);
        Summary::Quadratures {
            copies: n,
            sum_sq: vec![s1, s2],
        }
    }

    fn log_likelihood(&self, params: &[f64], setting: &Setting, summary: &Summary) -> f64 {
        match summary {
            Summary::Quadratures { copies, sum_sq } => setting
                .0
                .iter()
                .zip(sum_sq)
                .map(|(&t, &s)| gaussian_loglik(variance(params[0], params[1], t), *copies, s))
                .sum(),
            Summary::Counts(_) => f64::NEG_INFINITY,
        }
    }

    fn fisher_per_copy(&self, params: &[f64], setting: &Setting) -> FisherMatrix {
        let mut m = DMatrix::zeros(2, 2);
        for &t in &setting.0 {
            let e = squeezed_fisher_elements(params[0], params[1], t);
            for i in 0..2 {
                for j in 0..2 {
                    m[(i, j)] += e[i][j];
                }
            }
        }
        FisherMatrix::from_symmetric(m)
    }
}
