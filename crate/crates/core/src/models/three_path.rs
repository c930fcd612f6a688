//! Three-path interferometer: `|1,1,1>` through a tritter, a two-phase
//! shifter and a second tritter, detected by photon counting.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use super::{Outcome, Setting, StatisticalModel, Summary};
use crate::error::{domain, Result};
use crate::fisher::FisherMatrix;
use crate::rng::StreamRng;
use crate::space::ParamSpace;

/// Output occupations `(n1, n2, n3)` with `n1 + n2 + n3 = 3`, descending
/// lexicographic. Outcome index `i` refers to `OCCUPATIONS[i]`.
pub const OCCUPATIONS: [[usize; 3]; 10] = [
    [3, 0, 0],
    [2, 1, 0],
    [2, 0, 1],
    [1, 2, 0],
    [1, 1, 1],
    [1, 0, 2],
    [0, 3, 0],
    [0, 2, 1],
    [0, 1, 2],
    [0, 0, 3],
];

const NUM_OUTCOMES: usize = OCCUPATIONS.len();
const DIFF_STEP: f64 = 1e-5;
const MIN_PROB: f64 = 1e-12;

type Mat3 = [[Complex64; 3]; 3];

/// Symmetric beam tritter with entries `1/√3` and `e^{2πi/3}/√3` off the diagonal.
pub fn tritter_unitary() -> Mat3 {
    let s = 1.0 / 3.0_f64.sqrt();
    let one = Complex64::new(s, 0.0);
    let w = Complex64::from_polar(s, 2.0 * PI / 3.0);
    [[one, w, w], [w, one, w], [w, w, one]]
}

fn mat_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = [[Complex64::new(0.0, 0.0); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

/// Mode unitary of the interferometer for relative phases `(δ1, δ2)`.
pub(crate) fn interferometer(delta1: f64, delta2: f64) -> Mat3 {
    let t = tritter_unitary();
    let mut shifted = t;
    for j in 0..3 {
        shifted[0][j] *= Complex64::from_polar(1.0, delta1);
        shifted[1][j] *= Complex64::from_polar(1.0, delta2);
    }
    mat_mul(&t, &shifted)
}

fn permanent3(m: &Mat3) -> Complex64 {
    m[0][0] * (m[1][1] * m[2][2] + m[1][2] * m[2][1])
        + m[0][1] * (m[1][0] * m[2][2] + m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] + m[1][1] * m[2][0])
}

const FACT: [f64; 4] = [1.0, 1.0, 2.0, 6.0];

fn probs_for_unitary(u: &Mat3) -> [f64; NUM_OUTCOMES] {
    let mut out = [0.0; NUM_OUTCOMES];
    for (p, occ) in out.iter_mut().zip(OCCUPATIONS.iter()) {
        // rows repeated by output occupation, every input column used once
        let mut rows = [0usize; 3];
        let mut r = 0;
        for (mode, &n) in occ.iter().enumerate() {
            for _ in 0..n {
                rows[r] = mode;
                r += 1;
            }
        }
        let sub: Mat3 = [u[rows[0]], u[rows[1]], u[rows[2]]];
        let norm: f64 = occ.iter().map(|&n| FACT[n]).product();
        *p = permanent3(&sub).norm_sqr() / norm;
    }
    out
}

/// Born probabilities `|<n1,n2,n3| U(ψ1 - φ1, ψ2 - φ2) |1,1,1>|²` in [`OCCUPATIONS`] order.
pub fn three_path_probs(psi1: f64, psi2: f64, phi1: f64, phi2: f64) -> [f64; NUM_OUTCOMES] {
    probs_for_unitary(&interferometer(psi1 - phi1, psi2 - phi2))
}

/// Three-path model: `(φ1, φ2) ∈ [0, π/2]²`, control phases `(ψ1, ψ2) ∈ [0, 2π]²`.
#[derive(Debug, Clone)]
pub struct ThreePath {
    params: ParamSpace,
    settings: ParamSpace,
}

impl ThreePath {
    pub fn new() -> Self {
        Self {
            params: ParamSpace::new(vec![0.0, 0.0], vec![FRAC_PI_2, FRAC_PI_2]).expect("valid box"),
            settings: ParamSpace::new(vec![0.0, 0.0], vec![2.0 * PI, 2.0 * PI]).expect("valid box"),
        }
    }

    /// `N Σ_o (∂_i p_o)(∂_j p_o) / p_o` by central differences with step `h`.
    pub fn fisher_with_step(params: &[f64], setting: &Setting, h: f64) -> FisherMatrix {
        let (psi1, psi2) = (setting.0[0], setting.0[1]);
        let p = three_path_probs(psi1, psi2, params[0], params[1]);
        let grad = |axis: usize| {
            let mut plus = [params[0], params[1]];
            let mut minus = plus;
            plus[axis] += h;
            minus[axis] -= h;
            let pp = three_path_probs(psi1, psi2, plus[0], plus[1]);
            let pm = three_path_probs(psi1, psi2, minus[0], minus[1]);
            let mut g = [0.0; NUM_OUTCOMES];
            for o in 0..NUM_OUTCOMES {
                g[o] = (pp[o] - pm[o]) / (2.0 * h);
            }
            g
        };
        let g = [grad(0), grad(1)];
        let mut m = DMatrix::zeros(2, 2);
        for o in 0..NUM_OUTCOMES {
            if p[o] < MIN_PROB {
                continue;
            }
            for i in 0..2 {
                for j in 0..2 {
                    m[(i, j)] += g[i][o] * g[j][o] / p[o];
                }
            }
        }
        FisherMatrix::from_symmetric(m)
    }
}

impl Default for ThreePath {
    fn default() -> Self {
        Self::new()
    }
}

impl StatisticalModel for ThreePath {
    fn name(&self) -> &'static str {
        "three-path"
    }

    fn param_names(&self) -> &'static [&'static str] {
        &["phi1", "phi2"]
    }

    fn setting_names(&self) -> &'static [&'static str] {
        &["psi1", "psi2"]
    }

    fn param_space(&self) -> &ParamSpace {
        &self.params
    }

    fn setting_space(&self) -> &ParamSpace {
        &self.settings
    }

    fn setting_period(&self) -> Vec<f64> {
        vec![2.0 * PI, 2.0 * PI]
    }

    fn sample_unchecked(&self, params: &[f64], setting: &Setting, n: usize, rng: &mut StreamRng) -> Vec<Outcome> {
        let p = three_path_probs(setting.0[0], setting.0[1], params[0], params[1]);
        let mut cdf = [0.0; NUM_OUTCOMES];
        let mut acc = 0.0;
        for (c, pi) in cdf.iter_mut().zip(p) {
            acc += pi;
            *c = acc;
        }
        (0..n)
            .map(|_| {
                let u: f64 = rng.random::<f64>() * acc;
                let idx = cdf.iter().position(|&c| u < c).unwrap_or(NUM_OUTCOMES - 1);
                Outcome::Discrete(idx as u32)
            })
            .collect()
    }

    fn summarize(&self, setting: &Setting, outcomes: &[Outcome]) -> Result<Summary> {
        let mut counts = vec![0u64; NUM_OUTCOMES];
        for o in outcomes {
            match o {
                Outcome::Discrete(i) if (*i as usize) < NUM_OUTCOMES => counts[*i as usize] += 1,
                _ => return domain(format!("outcome {o:?} does not fit setting {:?}", setting.0)),
            }
        }
        Ok(Summary::Counts(counts))
    }

    fn log_likelihood(&self, params: &[f64], setting: &Setting, summary: &Summary) -> f64 {
        let Summary::Counts(counts) = summary else {
            return f64::NEG_INFINITY;
        };
        let p = three_path_probs(setting.0[0], setting.0[1], params[0], params[1]);
        counts
            .iter()
            .zip(p)
            .filter(|(&n, _)| n > 0)
            .map(|(&n, pi)| if pi > 0.0 { n as f64 * pi.ln() } else { f64::NEG_INFINITY })
            .sum()
    }

    fn fisher_per_copy(&self, params: &[f64], setting: &Setting) -> FisherMatrix {
        Self::fisher_with_step(params, setting, DIFF_STEP)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tritter_is_unitary_and_symmetric() {
        let u = tritter_unitary();
        for i in 0..3 {
            for j in 0..3 {
                let dot: Complex64 = (0..3).map(|k| u[k][i].conj() * u[k][j]).sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((dot - expect).norm() < 1e-12);
                assert!((u[i][j].norm() - 1.0 / 3.0_f64.sqrt()).abs() < 1e-15);
                assert_eq!(u[i][j], u[j][i]);
            }
        }
    }

    #[test]
    fn probabilities_normalized() {
        for (a, b) in [(0.0, 0.0), (0.3, 1.7), (2.0, -1.0), (5.5, 0.1)] {
            let p = three_path_probs(a, b, 0.5, 1.0);
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(p.iter().all(|&x| x >= 0.0));
        }
    }

    #[test]
    fn depends_on_phase_differences_only() {
        let p = three_path_probs(1.0, 2.0, 0.5, 0.25);
        let q = three_path_probs(1.5, 2.5, 1.0, 0.75);
        for (x, y) in p.iter().zip(q) {
            assert!((x - y).abs() < 1e-13);
        }
    }

    #[test]
    fn summary_rejects_foreign_outcomes() {
        let m = ThreePath::new();
        let set = Setting::new(vec![0.0, 0.0]);
        assert!(m.summarize(&set, &[Outcome::Discrete(10)]).is_err());
        assert!(m.summarize(&set, &[Outcome::Quadrature(0.1)]).is_err());
    }
}
