//! Phase-shifted homodyne interferometer with a squeezed-vacuum probe.
//!
//! One unknown phase `φ`, known squeeze parameter `ζ`, controllable LO phase
//! `ϑ`. Quadrature outcomes are zero-mean Gaussian with variance
//! `σ² = [cosh 2ζ + cos(2ϑ - 2φ) sinh 2ζ] / 2`.

use std::f64::consts::{FRAC_PI_2, PI};

use rand_distr::{Distribution, Gamma, Normal};
use serde::{Deserialize, Serialize};

use super::{gaussian_loglik, gaussian_summary, Outcome, Setting, StatisticalModel, Summary};
use crate::error::{domain, Result};
use crate::fisher::FisherMatrix;
use crate::optimize::golden_section_max;
use crate::rng::StreamRng;
use crate::space::ParamSpace;

pub fn homodyne_phase_variance(phi: f64, zeta: f64, theta: f64) -> f64 {
    0.5 * ((2.0 * zeta).cosh() + (2.0 * theta - 2.0 * phi).cos() * (2.0 * zeta).sinh())
}

/// Normalized Gaussian log-density of quadrature `x`.
pub fn homodyne_phase_logpdf(x: f64, phi: f64, zeta: f64, theta: f64) -> f64 {
    let var = homodyne_phase_variance(phi, zeta, theta);
    -0.5 * (2.0 * PI * var).ln() - x * x / (2.0 * var)
}

fn variance_slope(phi: f64, zeta: f64, theta: f64) -> f64 {
    (2.0 * theta - 2.0 * phi).sin() * (2.0 * zeta).sinh()
}

/// `N (∂_φ σ²)² / (2 σ⁴)`, the information of the normalized Gaussian.
pub fn homodyne_phase_fisher(phi: f64, zeta: f64, theta: f64, copies: usize) -> FisherMatrix {
    let var = homodyne_phase_variance(phi, zeta, theta);
    let slope = variance_slope(phi, zeta, theta);
    FisherMatrix::diagonal(&[copies as f64 * slope * slope / (2.0 * var * var)])
}

/// The alternative expression `N [sinh²2ζ - (cosh 2ζ - 2σ²)²] / (2σ²)`.
///
/// Equals [`homodyne_phase_fisher`] times `σ²`; kept for comparison.
pub fn homodyne_phase_fisher_printed(phi: f64, zeta: f64, theta: f64, copies: usize) -> f64 {
    let var = homodyne_phase_variance(phi, zeta, theta);
    let s = (2.0 * zeta).sinh();
    let c = (2.0 * zeta).cosh();
    copies as f64 * (s * s - (c - 2.0 * var).powi(2)) / (2.0 * var)
}

/// LO phase maximizing the per-copy Fisher information.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimalPhase {
    /// Argmax in `[0, π)`.
    pub theta: f64,
    pub fisher: f64,
    /// Flat objective (`ζ = 0`).
    pub degenerate: bool,
    /// Closed-form branch `φ + s1 · acos(s2 · tanh ζ) / 2 (+ shift)` reproducing `theta`, if any.
    pub branch: Option<String>,
}

fn wrap(x: f64, period: f64) -> f64 {
    x.rem_euclid(period)
}

fn circular_distance(a: f64, b: f64, period: f64) -> f64 {
    let d = wrap(a - b, period);
    d.min(period - d)
}

/// Numeric argmax over `ϑ` by a 1001-point grid on `[0, π)` and golden-section
/// refinement, compared against the closed-form branches.
pub fn homodyne_phase_opt_setting(phi: f64, zeta: f64) -> OptimalPhase {
    let f = |t: f64| homodyne_phase_fisher(phi, zeta, t, 1).matrix()[(0, 0)];
    if zeta == 0.0 {
        return OptimalPhase {
            theta: wrap(phi, PI),
            fisher: 0.0,
            degenerate: true,
            branch: None,
        };
    }
    let n = 1001;
    let h = PI / n as f64;
    let (best, _) = (0..n)
        .map(|i| (i, f(i as f64 * h)))
        .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
    let (theta, fisher) = golden_section_max(f, best as f64 * h - h, best as f64 * h + h, 1e-10);
    let theta = wrap(theta, PI);

    // tanh ζ branches maximize the printed expression; tanh 2ζ branches
    // maximize the normalized-Gaussian information.
    let a = zeta.tanh().acos();
    let b = (-zeta.tanh()).acos();
    let a2 = (2.0 * zeta).tanh().acos();
    let b2 = (-(2.0 * zeta).tanh()).acos();
    let candidates = [
        ("phi - acos(tanh zeta)/2", phi - 0.5 * a),
        ("phi + acos(tanh zeta)/2", phi + 0.5 * a),
        ("phi - acos(-tanh zeta)/2", phi - 0.5 * b),
        ("phi + acos(-tanh zeta)/2", phi + 0.5 * b),
        ("phi - acos(tanh 2zeta)/2", phi - 0.5 * a2),
        ("phi + acos(tanh 2zeta)/2", phi + 0.5 * a2),
        ("phi - acos(-tanh 2zeta)/2", phi - 0.5 * b2),
        ("phi + acos(-tanh 2zeta)/2", phi + 0.5 * b2),
    ];
    let branch = candidates
        .iter()
        .flat_map(|&(label, t)| [(label.to_string(), t), (format!("{label} + pi/2"), t + FRAC_PI_2)])
        .find(|(_, t)| circular_distance(*t, theta, PI) < 1e-6)
        .map(|(label, _)| label);

    OptimalPhase {
        theta,
        fisher,
        degenerate: false,
        branch,
    }
}

/// Homodyne phase model: parameter `φ ∈ [0, π/2]`, setting `ϑ ∈ [0, π]`.
#[derive(Debug, Clone)]
pub struct HomodynePhase {
    zeta: f64,
    params: ParamSpace,
    settings: ParamSpace,
}

impl HomodynePhase {
    pub fn new(zeta: f64) -> Result<Self> {
        if !zeta.is_finite() {
            return domain("squeeze parameter must be finite");
        }
        Ok(Self {
            zeta,
            params: ParamSpace::new(vec![0.0], vec![FRAC_PI_2])?,
            settings: ParamSpace::new(vec![0.0], vec![PI])?,
        })
    }

    pub fn zeta(&self) -> f64 {
        self.zeta
    }
}

impl StatisticalModel for HomodynePhase {
    fn name(&self) -> &'static str {
        "homodyne"
    }

    fn param_names(&self) -> &'static [&'static str] {
        &["phi"]
    }

    fn setting_names(&self) -> &'static [&'static str] {
        &["theta"]
    }

    fn param_space(&self) -> &ParamSpace {
        &self.params
    }

    fn setting_space(&self) -> &ParamSpace {
        &self.settings
    }

    fn setting_period(&self) -> Vec<f64> {
        vec![PI]
    }

    fn sample_unchecked(&self, params: &[f64], setting: &Setting, n: usize, rng: &mut StreamRng) -> Vec<Outcome> {
        let sd = homodyne_phase_variance(params[0], self.zeta, setting.0[0]).sqrt();
        let normal = Normal::new(0.0, sd).expect("finite positive sd");
        (0..n).map(|_| Outcome::Quadrature(normal.sample(rng))).collect()
    }

    fn summarize(&self, setting: &Setting, outcomes: &[Outcome]) -> Result<Summary> {
        gaussian_summary(setting, outcomes, 1)
    }

    fn simulate_summary(&self, params: &[f64], setting: &Setting, n: usize, rng: &mut StreamRng) -> Summary {
        let var = homodyne_phase_variance(params[0], self.zeta, setting.0[0]);
        // Σx² = σ² χ²_n
        let chi2 = Gamma::new(0.5 * n as f64, 2.0).expect("n >= 1");
        Summary::Quadratures {
            copies: n,
            sum_sq: vec![var * chi2.sample(rng)],
        }
    }

    fn log_likelihood(&self, params: &[f64], setting: &Setting, summary: &Summary) -> f64 {
        match summary {
            Summary::Quadratures { copies, sum_sq } => {
                gaussian_loglik(homodyne_phase_variance(params[0], self.zeta, setting.0[0]), *copies, sum_sq[0])
            }
            Summary::Counts(_) => f64::NEG_INFINITY,
        }
    }

    fn fisher_per_copy(&self, params: &[f64], setting: &Setting) -> FisherMatrix {
        homodyne_phase_fisher(params[0], self.zeta, setting.0[0], 1)
    }
}
