//! Balls with a hyperplane cap removed, and the summation lemma.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::quadrature::adaptive_simpson;
use crate::specfn::{ln_gamma, unit_ball_volume};

const QUAD_TOL: f64 = 1e-10;

/// A radius-`R` ball in `d` dimensions with a cap of height `h` removed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapGeometry {
    pub d: usize,
    pub radius: f64,
    pub height: f64,
}

impl CapGeometry {
    pub fn new(d: usize, radius: f64, height: f64) -> Result<Self> {
        if d == 0 {
            return domain("dimension must be at least 1");
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return domain(format!("radius must be positive, got {radius}"));
        }
        if !(0.0..=radius).contains(&height) {
            return domain(format!("cap height must lie in [0, {radius}], got {height}"));
        }
        Ok(Self { d, radius, height })
    }
}

/// Second moment `I` about the centre, volume `V`, and `RSE = I / V`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapIntegrals {
    pub second_moment: f64,
    pub volume: f64,
    pub rse: f64,
}

/// Area of the unit `(d−2)`-sphere bounding the polar-angle slices.
fn slice_sphere_area(d: usize) -> f64 {
    let k = (d - 1) as f64;
    2.0 * (0.5 * k * std::f64::consts::PI.ln() - ln_gamma(0.5 * k)).exp()
}

/// Integrals over the truncated ball by polar-angle quadrature of the
/// removed cap, subtracted from the full-ball values.
pub fn cap_integrals(geom: &CapGeometry) -> Result<CapIntegrals> {
    let CapGeometry { d, radius: r, height: h } = *geom;
    let df = d as f64;
    let ball_v = unit_ball_volume(d)? * r.powi(d as i32);
    let ball_i = ball_v * df * r * r / (df + 2.0);
    let (cap_i, cap_v) = if h == 0.0 {
        (0.0, 0.0)
    } else if d == 1 {
        let lo = r - h;
        ((r.powi(3) - lo.powi(3)) / 3.0, h)
    } else {
        let rho = r - h;
        let top = (1.0 - h / r).clamp(-1.0, 1.0).acos();
        let area = slice_sphere_area(d);
        let sin_pow = |t: f64| if d == 2 { 1.0 } else { t.sin().powi(d as i32 - 2) };
        let scale = r.powi(d as i32 + 2);
        let i = adaptive_simpson(
            |t| sin_pow(t) * (r.powi(d as i32 + 2) - (rho / t.cos()).powi(d as i32 + 2)) / (df + 2.0),
            0.0,
            top,
            QUAD_TOL * scale,
        )?;
        let v = adaptive_simpson(
            |t| sin_pow(t) * (r.powi(d as i32) - (rho / t.cos()).powi(d as i32)) / df,
            0.0,
            top,
            QUAD_TOL * r.powi(d as i32),
        )?;
        (area * i, area * v)
    };
    let second_moment = ball_i - cap_i;
    let volume = ball_v - cap_v;
    if !(volume > 0.0) {
        return Err(Error::Numerical(format!("non-positive truncated volume {volume}")));
    }
    Ok(CapIntegrals {
        second_moment,
        volume,
        rse: second_moment / volume,
    })
}

/// Discretizes the ball into `x1`-slabs: index 0 is the half-ball `x1 ≤ 0`,
/// indices `1..=n` are slabs of width `R/n` covering `0 ≤ x1 ≤ R`.
/// Returns `(a, b)` = per-slab second moments and volumes, so that the first
/// `k+1` entries describe the ball truncated at cap height `R(1 − k/n)`.
pub fn cap_slabs(d: usize, radius: f64, n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if d == 0 || n == 0 || !(radius > 0.0) {
        return domain("cap_slabs needs d ≥ 1, n ≥ 1 and a positive radius");
    }
    let df = d as f64;
    let r2 = radius * radius;
    // cross-section of the ball at x1 = x, and the mean squared distance on it
    let slice_volume = if d == 1 { 1.0 } else { unit_ball_volume(d - 1)? };
    let section = |x: f64| slice_volume * (r2 - x * x).max(0.0).powf(0.5 * (df - 1.0));
    let moment = |x: f64| x * x + (df - 1.0) / (df + 1.0) * (r2 - x * x).max(0.0);
    let mut a = vec![0.0; n + 1];
    let mut b = vec![0.0; n + 1];
    for j in 1..=n {
        let lo = radius * (j - 1) as f64 / n as f64;
        let hi = radius * j as f64 / n as f64;
        let tol = 1e-14 * radius.powi(d as i32 + 2);
        b[j] = adaptive_simpson(section, lo, hi, tol)?;
        a[j] = adaptive_simpson(|x| section(x) * moment(x), lo, hi, tol)?;
    }
    // the half-ball is the mirror image of the slabs
    a[0] = a[1..].iter().sum();
    b[0] = b[1..].iter().sum();
    Ok((a, b))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaOutcome {
    pub holds: bool,
    /// Index of the unique minimum of the running ratio.
    pub k_star: usize,
    pub running_ratio: Vec<f64>,
}

/// Checks the lemma's conclusion on `(a_j, b_j)`, `j = 0..=N`.
///
/// Preconditions are validated, never repaired: `a0/b0` must equal
/// `Σa/Σb` to `1e-12` relative and `a_j/b_j` must strictly increase for
/// `j ≥ 1`.
pub fn lemma_check(a: &[f64], b: &[f64]) -> Result<LemmaOutcome> {
    let pre = |m: String| Err(Error::Precondition(m));
    if a.len() != b.len() {
        return pre(format!("sequence lengths differ: {} vs {}", a.len(), b.len()));
    }
    if a.len() < 3 {
        return pre("need N ≥ 2 (at least three terms)".into());
    }
    if a.iter().chain(b).any(|x| !(x.is_finite() && *x >= 0.0)) {
        return pre("terms must be finite and nonnegative".into());
    }
    if b.contains(&0.0) {
        return pre("every b_j must be positive for the ratios to exist".into());
    }
    let total = a.iter().sum::<f64>() / b.iter().sum::<f64>();
    let first = a[0] / b[0];
    if (first - total).abs() > 1e-12 * first.abs().max(total.abs()).max(f64::MIN_POSITIVE) {
        return pre(format!("a0/b0 = {first} differs from Σa/Σb = {total}"));
    }
    for j in 1..a.len() - 1 {
        if a[j] / b[j] >= a[j + 1] / b[j + 1] {
            return pre(format!("ratios not strictly increasing at j = {j}"));
        }
    }

    let n = a.len() - 1;
    let mut running = Vec::with_capacity(n + 1);
    let (mut sa, mut sb) = (0.0, 0.0);
    for j in 0..=n {
        sa += a[j];
        sb += b[j];
        running.push(sa / sb);
    }
    let below = (1..n).all(|k| running[k] < running[0]);
    let k_star = (1..n).fold(1, |best, k| if running[k] < running[best] { k } else { best });
    let unique = (1..n).filter(|&k| running[k] == running[k_star]).count() == 1;
    let descending = (1..=k_star).all(|k| running[k] < running[k - 1]);
    let ascending = (k_star..n).all(|k| running[k + 1] >= running[k]);
    Ok(LemmaOutcome {
        holds: below && unique && descending && ascending,
        k_star,
        running_ratio: running,
    })
}
