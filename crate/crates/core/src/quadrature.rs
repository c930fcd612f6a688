//! One-dimensional adaptive Simpson quadrature.

use crate::error::{Error, Result};

const MAX_DEPTH: u32 = 50;

struct Panel {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
}

fn panel(f: &impl Fn(f64) -> f64, a: f64, b: f64, fa: f64, fb: f64) -> Panel {
    let m = 0.5 * (a + b);
    let fm = f(m);
    Panel {
        a,
        b,
        fa,
        fm,
        fb,
        whole: (b - a) / 6.0 * (fa + 4.0 * fm + fb),
    }
}

fn recurse(f: &impl Fn(f64) -> f64, p: &Panel, tol: f64, depth: u32) -> Result<f64> {
    let m = 0.5 * (p.a + p.b);
    let left = panel(f, p.a, m, p.fa, p.fm);
    let right = panel(f, m, p.b, p.fm, p.fb);
    let delta = left.whole + right.whole - p.whole;
    if delta.abs() <= 15.0 * tol {
        return Ok(left.whole + right.whole + delta / 15.0);
    }
    if depth == 0 {
        return Err(Error::Numerical(format!(
            "adaptive Simpson did not converge on [{}, {}]",
            p.a, p.b
        )));
    }
    Ok(recurse(f, &left, 0.5 * tol, depth - 1)? + recurse(f, &right, 0.5 * tol, depth - 1)?)
}

/// Integrates `f` over `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (fa, fb) = (f(a), f(b));
    let top = panel(&f, a, b, fa, fb);
    // an initial split guards against symmetric integrands that fool the first estimate
    let m = 0.5 * (a + b);
    let left = panel(&f, a, m, fa, top.fm);
    let right = panel(&f, m, b, top.fm, fb);
    let v = recurse(&f, &left, 0.5 * tol, MAX_DEPTH)? + recurse(&f, &right, 0.5 * tol, MAX_DEPTH)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Numerical("non-finite integrand".into()))
    }
}
