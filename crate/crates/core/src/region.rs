//! Closed-form Case-1 region formulas: size and credibility of the
//! likelihood-ratio region `R_λ = {r : L(r) >= λ L_max}`, the critical
//! `λ_crit` of the plausible region, region squared errors (RSE/MRSE) and
//! the bounds and thresholds that describe how they respond to the Fisher
//! information.
//!
//! All volumes are raw-coordinate volumes of the parameter box; the uniform
//! prior measure divides by that volume exactly once, inside `size`.

use std::f64::consts::{E, PI};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::fisher::FisherMatrix;
use crate::space::ParamSpace;
use crate::specfn::{inv_reg_upper_gamma, reg_upper_gamma, unit_ball_volume, GammaOrder};

/// Which constraint defines the reported region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RegionSpec {
    /// Fixed size `s0` in `(0, 1]`, credibility maximized.
    FixedS { s0: f64 },
    /// Fixed credibility `c0` in `(0, 1)`, size minimized.
    FixedC { c0: f64 },
    /// `λ = λ_crit`.
    Plausible,
}

impl RegionSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            RegionSpec::FixedS { s0 } if !(s0 > 0.0 && s0 <= 1.0) => {
                domain(format!("s0 must lie in (0, 1], got {s0}"))
            }
            RegionSpec::FixedC { c0 } if !(c0 > 0.0 && c0 < 1.0) => {
                domain(format!("c0 must lie in (0, 1), got {c0}"))
            }
            _ => Ok(()),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            RegionSpec::FixedS { .. } => "fixed-s",
            RegionSpec::FixedC { .. } => "fixed-c",
            RegionSpec::Plausible => "plausible",
        }
    }
}

/// Mutually consistent `(λ, s, c)` triple of a Case-1 region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionProps {
    pub lambda: f64,
    pub size: f64,
    pub credibility: f64,
    /// False when the asymptotic size exceeds one or `λ > 1`.
    pub case1_valid: bool,
}

/// `λ_crit` with a flag for values `>= 1`, where no meaningful plausible
/// region exists.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaCrit {
    pub value: f64,
    pub degenerate: bool,
}

fn half_dim(d: usize) -> Result<GammaOrder> {
    GammaOrder::half_dim(d)
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda <= 1.0 {
        Ok(())
    } else {
        domain(format!("lambda must lie in (0, 1], got {lambda}"))
    }
}

fn check_dims(fisher: &FisherMatrix, space: &ParamSpace) -> Result<usize> {
    if fisher.dim() != space.dim() {
        return Err(Error::Dimension {
            expected: space.dim(),
            got: fisher.dim(),
        });
    }
    Ok(fisher.dim())
}

/// `c_λ = 1 - Q(d/2, -log λ)`.
pub fn credibility_of_lambda(d: usize, lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    Ok(1.0 - reg_upper_gamma(half_dim(d)?, -lambda.ln())?)
}

/// `λ` whose region has credibility `c`: `exp(-Q^{-1}(d/2, 1 - c))`.
pub fn lambda_of_credibility(d: usize, c: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&c) {
        return domain(format!("credibility must lie in [0, 1), got {c}"));
    }
    Ok((-inv_reg_upper_gamma(half_dim(d)?, 1.0 - c)?).exp())
}

/// `s_λ = (V_d / V) (-2 log λ)^{d/2} det(F)^{-1/2}` together with `c_λ`.
pub fn size_of_lambda(lambda: f64, fisher: &FisherMatrix, space: &ParamSpace) -> Result<RegionProps> {
    check_lambda(lambda)?;
    let d = check_dims(fisher, space)?;
    let det = fisher.positive_det()?;
    let size = unit_ball_volume(d)? / space.volume() * (-2.0 * lambda.ln()).powf(d as f64 / 2.0) / det.sqrt();
    let credibility = credibility_of_lambda(d, lambda)?;
    Ok(RegionProps {
        lambda,
        size,
        credibility,
        case1_valid: size <= 1.0 && lambda <= 1.0,
    })
}

/// `λ_crit = sqrt(det(2π F^{-1})) / V`.
pub fn lambda_crit(fisher: &FisherMatrix, space: &ParamSpace) -> Result<LambdaCrit> {
    let d = check_dims(fisher, space)?;
    let det = fisher.positive_det()?;
    let value = ((2.0 * PI).powi(d as i32) / det).sqrt() / space.volume();
    Ok(LambdaCrit {
        value,
        degenerate: value >= 1.0,
    })
}

/// `s = (V_d / V) [2 Q^{-1}(d/2, 1 - c)]^{d/2} det(F)^{-1/2}`.
pub fn size_from_credibility(c: f64, fisher: &FisherMatrix, space: &ParamSpace) -> Result<f64> {
    if !(c > 0.0 && c < 1.0) {
        return domain(format!("credibility must lie in (0, 1), got {c}"));
    }
    let d = check_dims(fisher, space)?;
    let det = fisher.positive_det()?;
    let q = inv_reg_upper_gamma(half_dim(d)?, 1.0 - c)?;
    Ok(unit_ball_volume(d)? / space.volume() * (2.0 * q).powf(d as f64 / 2.0) / det.sqrt())
}

/// `-log λ` of the region of size `s0`: `(s0 V sqrt(det F) / V_d)^{2/d} / 2`.
pub fn neg_log_lambda_of_size(s0: f64, fisher: &FisherMatrix, space: &ParamSpace) -> Result<f64> {
    if !(s0 >= 0.0) {
        return domain(format!("size must be nonnegative, got {s0}"));
    }
    let d = check_dims(fisher, space)?;
    let det = fisher.positive_det()?;
    Ok(0.5 * (s0 * space.volume() * det.sqrt() / unit_ball_volume(d)?).powf(2.0 / d as f64))
}

/// Region properties for the region selected by `spec`.
pub fn region_props(spec: &RegionSpec, fisher: &FisherMatrix, space: &ParamSpace) -> Result<RegionProps> {
    spec.validate()?;
    let d = check_dims(fisher, space)?;
    match *spec {
        RegionSpec::FixedS { s0 } => {
            let t = neg_log_lambda_of_size(s0, fisher, space)?;
            let credibility = 1.0 - reg_upper_gamma(half_dim(d)?, t)?;
            Ok(RegionProps {
                lambda: (-t).exp(),
                size: s0,
                credibility,
                case1_valid: true,
            })
        }
        RegionSpec::FixedC { c0 } => size_of_lambda(lambda_of_credibility(d, c0)?, fisher, space),
        RegionSpec::Plausible => {
            let lc = lambda_crit(fisher, space)?;
            if lc.degenerate {
                // no plausible region; report the formula values with the flag down
                let t = -lc.value.ln();
                return Ok(RegionProps {
                    lambda: lc.value,
                    size: 0.0,
                    credibility: if t > 0.0 { 1.0 - reg_upper_gamma(half_dim(d)?, t)? } else { 0.0 },
                    case1_valid: false,
                });
            }
            size_of_lambda(lc.value, fisher, space)
        }
    }
}

fn squared_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Dimension {
            expected: a.len(),
            got: b.len(),
        });
    }
    Ok(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum())
}

/// `RSE = ||r_ML - r||² + 2 Tr{F_ML^{-1}} (-log λ) / (d + 2)`.
pub fn rse_asymptotic(lambda: f64, ml_estimate: &[f64], true_param: &[f64], fisher_ml: &FisherMatrix) -> Result<f64> {
    check_lambda(lambda)?;
    let d = fisher_ml.dim();
    if ml_estimate.len() != d {
        return Err(Error::Dimension {
            expected: d,
            got: ml_estimate.len(),
        });
    }
    let sq = squared_distance(ml_estimate, true_param)?;
    let tr = fisher_ml.inverse_trace()?;
    Ok(sq + 2.0 * tr * (-lambda.ln()) / (d as f64 + 2.0))
}

/// `MRSE = Tr{F^{-1}} (1 - 2 log λ / (d + 2))`.
pub fn mrse_asymptotic(lambda: f64, fisher: &FisherMatrix) -> Result<f64> {
    check_lambda(lambda)?;
    let d = fisher.dim() as f64;
    Ok(fisher.inverse_trace()? * (1.0 - 2.0 * lambda.ln() / (d + 2.0)))
}

/// Credible-region MRSE at fixed size `s0`:
/// `Tr{F^{-1}} [1 + (s0 V / V_d)^{2/d} det(F)^{1/d} / (d + 2)]`.
pub fn mrse_credible_fixed_s(s0: f64, fisher: &FisherMatrix, space: &ParamSpace) -> Result<f64> {
    RegionSpec::FixedS { s0 }.validate()?;
    let d = check_dims(fisher, space)?;
    let df = d as f64;
    let det = fisher.positive_det()?;
    let tr = fisher.inverse_trace()?;
    let scale = (s0 * space.volume() / unit_ball_volume(d)?).powf(2.0 / df);
    Ok(tr * (1.0 + scale * det.powf(1.0 / df) / (df + 2.0)))
}

/// Credible-region MRSE at fixed credibility `c0`:
/// `Tr{F^{-1}} [1 + 2 Q^{-1}(d/2, 1 - c0) / (d + 2)]`.
pub fn mrse_credible_fixed_c(c0: f64, fisher: &FisherMatrix) -> Result<f64> {
    RegionSpec::FixedC { c0 }.validate()?;
    let d = fisher.dim();
    let q = inv_reg_upper_gamma(half_dim(d)?, 1.0 - c0)?;
    Ok(fisher.inverse_trace()? * (1.0 + 2.0 * q / (d as f64 + 2.0)))
}

/// Plausible-region MRSE:
/// `Tr{F^{-1}} [1 + log(V² / (2π)^d) / (d + 2) + log det(F) / (d + 2)]`.
///
/// Only meaningful while `λ_crit < 1`; check [`lambda_crit`].
pub fn mrse_plausible(fisher: &FisherMatrix, space: &ParamSpace) -> Result<f64> {
    let d = check_dims(fisher, space)?;
    let df = d as f64;
    let det = fisher.positive_det()?;
    let tr = fisher.inverse_trace()?;
    let v = space.volume();
    Ok(tr * (1.0 + (v * v / (2.0 * PI).powi(d as i32)).ln() / (df + 2.0) + det.ln() / (df + 2.0)))
}

/// One-parameter credible-interval MRSE as a function of size and credibility:
/// `(s² V² / 8) [1 / Q^{-1}(1/2, 1 - c) + 2/3]`.
pub fn mrse_credible_d1(s: f64, c: f64, volume: f64) -> Result<f64> {
    if !(c > 0.0 && c < 1.0) {
        return domain(format!("credibility must lie in (0, 1), got {c}"));
    }
    let q = inv_reg_upper_gamma(GammaOrder::new(0.5)?, 1.0 - c)?;
    Ok(s * s * volume * volume / 8.0 * (1.0 / q + 2.0 / 3.0))
}

/// One-parameter Fisher information tying size and credibility:
/// `F = 8 Q^{-1}(1/2, 1 - c) / (s² V²)`.
pub fn fisher_of_size_credibility_d1(s: f64, c: f64, volume: f64) -> Result<f64> {
    if !(c > 0.0 && c < 1.0) {
        return domain(format!("credibility must lie in (0, 1), got {c}"));
    }
    let q = inv_reg_upper_gamma(GammaOrder::new(0.5)?, 1.0 - c)?;
    Ok(8.0 * q / (s * s * volume * volume))
}

/// Plausible-interval size for one parameter:
/// `s = 2 / (V sqrt F) [log(V² F / 2π)]^{1/2}`.
pub fn plausible_size_d1(fisher: f64, volume: f64) -> Result<f64> {
    let arg = volume * volume * fisher / (2.0 * PI);
    if !(fisher > 0.0 && arg >= 1.0) {
        return domain(format!("no plausible interval for F = {fisher}, V = {volume}"));
    }
    Ok(2.0 / (volume * fisher.sqrt()) * arg.ln().sqrt())
}

/// Parametric plausible-interval MRSE `1/F + (s V)² / 12` with `s = s(F)`.
pub fn mrse_plausible_d1_parametric(fisher: f64, volume: f64) -> Result<f64> {
    let s = plausible_size_d1(fisher, volume)?;
    Ok(1.0 / fisher + (s * volume).powi(2) / 12.0)
}

/// `Tr{F^{-1}} <= d B^{d-1} / det F` for `Tr{F} <= B`.
pub fn trace_inverse_bound(d: usize, det: f64, trace_bound: f64) -> Result<f64> {
    if d == 0 {
        return domain("dimension must be at least 1");
    }
    if !(det > 0.0 && trace_bound > 0.0) {
        return domain(format!("need det > 0 and B > 0, got det = {det}, B = {trace_bound}"));
    }
    Ok(d as f64 * trace_bound.powi(d as i32 - 1) / det)
}

/// Trace bound `B` used when none is supplied: `Tr{F}` itself.
pub fn default_trace_bound(fisher: &FisherMatrix) -> f64 {
    fisher.trace()
}

/// Upper bound on the fixed-size credible MRSE in terms of credibility:
/// `(s0 V / V_d)² d B^{d-1} / [2q]^d · [1 + 2q / (d + 2)]`, `q = Q^{-1}(d/2, 1 - c)`.
pub fn mrse_credible_fixed_s_bound(d: usize, s0: f64, c: f64, trace_bound: f64, volume: f64) -> Result<f64> {
    if !(c > 0.0 && c < 1.0) {
        return domain(format!("credibility must lie in (0, 1), got {c}"));
    }
    let q = inv_reg_upper_gamma(half_dim(d)?, 1.0 - c)?;
    let df = d as f64;
    let lead = (s0 * volume / unit_ball_volume(d)?).powi(2);
    Ok(lead * df * trace_bound.powi(d as i32 - 1) / (2.0 * q).powi(d as i32) * (1.0 + 2.0 * q / (df + 2.0)))
}

/// Plausible MRSE in terms of credibility (exact for `d = 1`, an upper bound otherwise):
/// `d B^{d-1} V² / (2π)^d · e^{-2q} [1 + 2q / (d + 2)]`.
pub fn mrse_plausible_bound_c(d: usize, c: f64, trace_bound: f64, volume: f64) -> Result<f64> {
    if !(c > 0.0 && c < 1.0) {
        return domain(format!("credibility must lie in (0, 1), got {c}"));
    }
    let q = inv_reg_upper_gamma(half_dim(d)?, 1.0 - c)?;
    let df = d as f64;
    Ok(df * trace_bound.powi(d as i32 - 1) * volume * volume / (2.0 * PI).powi(d as i32)
        * (-2.0 * q).exp()
        * (1.0 + 2.0 * q / (df + 2.0)))
}

/// Plausible MRSE bound in terms of `det F`:
/// `d B^{d-1} / det F · [1 + (s V / V_d)^{2/d} det(F)^{1/d} / (d + 2)]` with `s = s(F)`,
/// which simplifies to `d B^{d-1} / det F · [1 + log(V² det F / (2π)^d) / (d + 2)]`.
pub fn mrse_plausible_bound_det(d: usize, det: f64, trace_bound: f64, volume: f64) -> Result<f64> {
    let lead = trace_inverse_bound(d, det, trace_bound)?;
    let log_arg = (volume * volume * det / (2.0 * PI).powi(d as i32)).ln();
    Ok(lead * (1.0 + log_arg / (d as f64 + 2.0)))
}

/// `y1(c) = e^{-2q} q`, `q = Q^{-1}(d/2, 1 - c)`; the credibility-dependent
/// factor whose maximum sets the plausible-region credibility threshold.
pub fn credibility_profile(d: usize, c: f64) -> Result<f64> {
    if !(c > 0.0 && c < 1.0) {
        return domain(format!("credibility must lie in (0, 1), got {c}"));
    }
    let q = inv_reg_upper_gamma(half_dim(d)?, 1.0 - c)?;
    Ok((-2.0 * q).exp() * q)
}

/// `y2(x) = x^{-1/2} [log(V² x / (2π)^d)]^{d/2}`; proportional to the
/// plausible-region size as a function of `x = det F`.
pub fn size_profile(d: usize, det: f64, volume: f64) -> Result<f64> {
    let log_arg = (volume * volume * det / (2.0 * PI).powi(d as i32)).ln();
    if !(det > 0.0 && log_arg >= 0.0) {
        return domain(format!("size profile undefined at det = {det}"));
    }
    Ok(log_arg.powf(d as f64 / 2.0) / det.sqrt())
}

/// `c_max = 1 - Q(d/2, 1/2)`: beyond it the plausible MRSE bound falls monotonically in `c`.
pub fn threshold_c_max(d: usize) -> Result<f64> {
    Ok(1.0 - reg_upper_gamma(half_dim(d)?, 0.5)?)
}

/// `x_max = (2πe)^d / V²`: beyond it the plausible size falls monotonically in `det F`.
pub fn threshold_det(d: usize, space: &ParamSpace) -> Result<f64> {
    if d == 0 {
        return domain("dimension must be at least 1");
    }
    let v = space.volume();
    Ok((2.0 * PI * E).powi(d as i32) / (v * v))
}
