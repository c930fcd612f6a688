use std::ops::{Add, AddAssign, Mul};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Determinants below this are treated as an information-deficient design.
pub const SINGULAR_DET: f64 = 1e-300;

/// Symmetric Fisher information matrix.
///
/// Additive over independent batches: `F(batch1 ∪ batch2) = F(batch1) + F(batch2)`.
/// Serialized as a list of rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "Vec<Vec<f64>>", try_from = "Vec<Vec<f64>>")]
pub struct FisherMatrix(DMatrix<f64>);

impl From<FisherMatrix> for Vec<Vec<f64>> {
    fn from(f: FisherMatrix) -> Self {
        f.0.row_iter().map(|r| r.iter().copied().collect()).collect()
    }
}

impl TryFrom<Vec<Vec<f64>>> for FisherMatrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        let d = rows.len();
        if rows.iter().any(|r| r.len() != d) {
            return domain("Fisher matrix rows must all have the matrix dimension");
        }
        let flat: Vec<f64> = rows.into_iter().flatten().collect();
        Self::from_row_slice(d, &flat)
    }
}

impl FisherMatrix {
    /// Wraps a square matrix, checking symmetry to `1e-10` relative.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() == 0 || m.nrows() != m.ncols() {
            return domain(format!("Fisher matrix must be square, got {}x{}", m.nrows(), m.ncols()));
        }
        if m.iter().any(|x| !x.is_finite()) {
            return domain("Fisher matrix has non-finite entries");
        }
        let scale = m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs())).max(f64::MIN_POSITIVE);
        let n = m.nrows();
        for i in 0..n {
            for j in (i + 1)..n {
                if (m[(i, j)] - m[(j, i)]).abs() > 1e-10 * scale {
                    return domain(format!("Fisher matrix not symmetric at ({i}, {j})"));
                }
            }
        }
        Ok(Self(m).symmetrized())
    }

    pub fn from_row_slice(d: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != d * d {
            return Err(Error::Dimension {
                expected: d * d,
                got: entries.len(),
            });
        }
        Self::new(DMatrix::from_row_slice(d, d, entries))
    }

    pub fn diagonal(values: &[f64]) -> Self {
        Self(DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(values)))
    }

    pub fn zeros(d: usize) -> Self {
        Self(DMatrix::zeros(d, d))
    }

    /// Builds without validation; callers guarantee symmetry.
    pub(crate) fn from_symmetric(m: DMatrix<f64>) -> Self {
        Self(m).symmetrized()
    }

    fn symmetrized(self) -> Self {
        let m = &self.0;
        Self((m + m.transpose()) * 0.5)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn det(&self) -> f64 {
        self.0.determinant()
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.0.clone().symmetric_eigenvalues().iter().copied().collect()
    }

    /// Positive definite with determinant above [`SINGULAR_DET`].
    pub fn is_positive_definite(&self) -> bool {
        self.0.clone().cholesky().is_some() && self.det() > SINGULAR_DET
    }

    pub fn is_singular(&self) -> bool {
        !self.is_positive_definite()
    }

    pub fn inverse(&self) -> Result<DMatrix<f64>> {
        let det = self.det();
        if !(det > SINGULAR_DET) {
            return Err(Error::SingularFisher { det });
        }
        match self.0.clone().cholesky() {
            Some(ch) => Ok(ch.inverse()),
            None => Err(Error::SingularFisher { det }),
        }
    }

    /// `Tr{F^{-1}}`, the Cramér–Rao value.
    pub fn inverse_trace(&self) -> Result<f64> {
        Ok(self.inverse()?.trace())
    }

    /// Checked positive determinant.
    pub fn positive_det(&self) -> Result<f64> {
        let det = self.det();
        if self.is_positive_definite() {
            Ok(det)
        } else {
            Err(Error::SingularFisher { det })
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self(&self.0 * factor)
    }
}

impl Add for FisherMatrix {
    type Output = FisherMatrix;

    fn add(self, rhs: Self) -> Self {
        Self(self.0 + rhs.0)
    }
}

impl AddAssign<&FisherMatrix> for FisherMatrix {
    fn add_assign(&mut self, rhs: &FisherMatrix) {
        self.0 += &rhs.0;
    }
}

impl Mul<f64> for &FisherMatrix {
    type Output = FisherMatrix;

    fn mul(self, rhs: f64) -> FisherMatrix {
        self.scaled(rhs)
    }
}
