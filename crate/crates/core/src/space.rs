use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Axis-aligned box with a uniform measure.
///
/// Used both for the parameter space (whose raw volume normalizes the
/// primitive prior) and for measurement-setting spaces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSpace {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl ParamSpace {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() {
            return domain("parameter space needs at least one dimension");
        }
        if lower.len() != upper.len() {
            return Err(Error::Dimension {
                expected: lower.len(),
                got: upper.len(),
            });
        }
        for (j, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && hi > lo) {
                return domain(format!("axis {j}: need finite lower < upper, got [{lo}, {hi}]"));
            }
        }
        Ok(Self { lower, upper })
    }

    /// Box `[0, 1]^d`.
    pub fn unit(d: usize) -> Result<Self> {
        Self::new(vec![0.0; d], vec![1.0; d])
    }

    /// Box with the given raw volume, spread evenly over `d` axes from the origin.
    pub fn with_volume(d: usize, volume: f64) -> Result<Self> {
        if !(volume > 0.0 && volume.is_finite()) {
            return domain(format!("volume must be positive, got {volume}"));
        }
        let edge = volume.powf(1.0 / d as f64);
        Self::new(vec![0.0; d], vec![edge; d])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn widths(&self) -> impl Iterator<Item = f64> + '_ {
        self.lower.iter().zip(&self.upper).map(|(lo, hi)| hi - lo)
    }

    /// Raw volume `∏ (upper_j - lower_j)`.
    pub fn volume(&self) -> f64 {
        self.widths().product()
    }

    pub fn center(&self) -> Vec<f64> {
        self.lower.iter().zip(&self.upper).map(|(lo, hi)| 0.5 * (lo + hi)).collect()
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        point.len() == self.dim()
            && point
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(x, (lo, hi))| x >= lo && x <= hi)
    }

    pub fn clamp(&self, point: &mut [f64]) {
        for (x, (lo, hi)) in point.iter_mut().zip(self.lower.iter().zip(&self.upper)) {
            *x = x.clamp(*lo, *hi);
        }
    }

    /// True if any coordinate lies within `rel_tol * width` of its bounds.
    pub fn near_boundary(&self, point: &[f64], rel_tol: f64) -> bool {
        point
            .iter()
            .zip(self.lower.iter().zip(&self.upper))
            .any(|(x, (lo, hi))| {
                let tol = rel_tol * (hi - lo);
                x - lo <= tol || hi - x <= tol
            })
    }

    pub fn check_point(&self, point: &[f64]) -> Result<()> {
        if point.len() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                got: point.len(),
            });
        }
        if !self.contains(point) {
            return domain(format!("point {point:?} outside the parameter box"));
        }
        Ok(())
    }
}
