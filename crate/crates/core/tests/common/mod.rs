//! Independent test-side oracles: Gauss–Legendre quadrature, incomplete
//! gamma by direct integration, a Fock-basis interferometer simulator and
//! random SPD matrices.
#![allow(dead_code)]

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// 5-point Gauss–Legendre nodes and weights on [-1, 1]
const GL_X: [f64; 5] = [
    0.0,
    -0.538_469_310_105_683_1,
    0.538_469_310_105_683_1,
    -0.906_179_845_938_664_0,
    0.906_179_845_938_664_0,
];
const GL_W: [f64; 5] = [
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
    0.236_926_885_056_189_1,
];

/// Composite 5-point Gauss–Legendre over `panels` equal panels.
pub fn gauss_legendre(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|p| {
            let mid = a + (p as f64 + 0.5) * h;
            GL_X.iter()
                .zip(GL_W)
                .map(|(x, w)| w * f(mid + 0.5 * h * x))
                .sum::<f64>()
                * 0.5
                * h
        })
        .sum()
}

/// `Q(a, x)` by integrating `2 u^{2a-1} e^{-u²}` (the substitution `t = u²`)
/// over `[√x, 12]` and dividing by the same integral from zero.
pub fn upper_gamma_oracle(a: f64, x: f64) -> f64 {
    let f = |u: f64| 2.0 * u.powf(2.0 * a - 1.0) * (-u * u).exp();
    let top = 12.0;
    let total = gauss_legendre(f, 0.0, top, 4000);
    gauss_legendre(f, x.sqrt(), top, 4000) / total
}

/// Bisection of the quadrature oracle: `x` with `Q(a, x) = y`.
pub fn inv_upper_gamma_oracle(a: f64, y: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, 100.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if upper_gamma_oracle(a, mid) > y {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-12 {
            break;
        }
    }
    0.5 * (lo + hi)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `A Aᵀ + 0.05 I` with Gaussian-ish entries scaled by `scale`.
pub fn random_spd(d: usize, scale: f64, rng: &mut impl Rng) -> DMatrix<f64> {
    let a = DMatrix::from_fn(d, d, |_, _| rng.random_range(-1.0..1.0));
    (&a * a.transpose() + DMatrix::identity(d, d) * 0.05) * scale
}

type Occ = [usize; 3];

/// Three-photon Fock basis in descending lexicographic order.
pub fn fock_basis() -> Vec<Occ> {
    let mut v = Vec::new();
    for n1 in (0..=3).rev() {
        for n2 in (0..=3 - n1).rev() {
            v.push([n1, n2, 3 - n1 - n2]);
        }
    }
    v
}

fn fact(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Fock-space matrix of a mode unitary (`a_j† → Σ_i U_ij a_i†`), obtained by
/// expanding the creation-operator polynomial of every basis input.
pub fn fock_matrix(u: &[[Complex64; 3]; 3]) -> Vec<Vec<Complex64>> {
    let basis = fock_basis();
    let mut out = vec![vec![Complex64::new(0.0, 0.0); basis.len()]; basis.len()];
    for (col, m) in basis.iter().enumerate() {
        let mut poly: BTreeMap<Occ, Complex64> = BTreeMap::new();
        poly.insert([0, 0, 0], Complex64::new(1.0, 0.0));
        for j in 0..3 {
            for _ in 0..m[j] {
                let mut next = BTreeMap::new();
                for (mono, c) in &poly {
                    for i in 0..3 {
                        let mut k = *mono;
                        k[i] += 1;
                        *next.entry(k).or_insert(Complex64::new(0.0, 0.0)) += c * u[i][j];
                    }
                }
                poly = next;
            }
        }
        let norm_in: f64 = m.iter().map(|&k| fact(k)).product::<f64>().sqrt();
        for (row, n) in basis.iter().enumerate() {
            let c = poly.get(n).copied().unwrap_or_default();
            let norm_out: f64 = n.iter().map(|&k| fact(k)).product::<f64>().sqrt();
            out[row][col] = c * norm_out / norm_in;
        }
    }
    out
}

pub fn fock_mul(a: &[Vec<Complex64>], b: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
    let n = a.len();
    (0..n)
        .map(|i| (0..n).map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum()).collect())
        .collect()
}

/// Outcome probabilities of `|1,1,1>` through tritter, phases, tritter.
pub fn three_path_oracle(delta1: f64, delta2: f64) -> Vec<f64> {
    let s = 1.0 / 3.0_f64.sqrt();
    let one = Complex64::new(s, 0.0);
    let w = Complex64::from_polar(s, 2.0 * std::f64::consts::PI / 3.0);
    let t = [[one, w, w], [w, one, w], [w, w, one]];
    let z = Complex64::new(0.0, 0.0);
    let d = [
        [Complex64::from_polar(1.0, delta1), z, z],
        [z, Complex64::from_polar(1.0, delta2), z],
        [z, z, Complex64::new(1.0, 0.0)],
    ];
    let tf = fock_matrix(&t);
    let total = fock_mul(&tf, &fock_mul(&fock_matrix(&d), &tf));
    let input = fock_basis().iter().position(|o| *o == [1, 1, 1]).unwrap();
    total.iter().map(|row| row[input].norm_sqr()).collect()
}

/// Information `(∂_i σ²)(∂_j σ²) / (2σ⁴)` of a zero-mean Gaussian, with the
/// variance gradient from a five-point central stencil.
pub fn gaussian_fisher_numeric(var: impl Fn(&[f64]) -> f64, p: &[f64], h: f64) -> DMatrix<f64> {
    let d = p.len();
    let at = |i: usize, k: f64| {
        let mut q = p.to_vec();
        q[i] += k * h;
        var(&q)
    };
    let grad: Vec<f64> = (0..d)
        .map(|i| (-at(i, 2.0) + 8.0 * at(i, 1.0) - 8.0 * at(i, -1.0) + at(i, -2.0)) / (12.0 * h))
        .collect();
    let v = var(p);
    DMatrix::from_fn(d, d, |i, j| grad[i] * grad[j] / (2.0 * v * v))
}
