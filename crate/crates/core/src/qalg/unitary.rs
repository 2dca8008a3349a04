use super::linalg::{self, CMatrix};
use crate::error::{Error, Result};

/// Accepted deviation of `U†U` from the identity.
pub const TOL_UNITARY: f64 = 1e-10;

/// Square matrix with `U†U = I` (checked on construction).
#[derive(Clone, Debug)]
pub struct UnitaryOperator {
    matrix: CMatrix,
}

impl UnitaryOperator {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let dev = linalg::unitarity_deviation(&matrix);
        if dev > TOL_UNITARY {
            return Err(Error::NotUnitary(dev));
        }
        Ok(Self { matrix })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: linalg::identity(dim),
        }
    }

    /// Swap of two `d`-dimensional factors, `|ab> -> |ba>`.
    pub fn swap(d: usize) -> Self {
        let n = d * d;
        let mut m = CMatrix::zeros(n, n);
        for a in 0..d {
            for b in 0..d {
                m[(b * d + a, a * d + b)] = linalg::ONE;
            }
        }
        Self { matrix: m }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn adjoint(&self) -> Self {
        Self {
            matrix: self.matrix.adjoint(),
        }
    }

    pub fn compose(&self, other: &UnitaryOperator) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(Self {
            matrix: &self.matrix * &other.matrix,
        })
    }

    pub fn tensor(&self, other: &UnitaryOperator) -> Self {
        Self {
            matrix: linalg::kron(&self.matrix, &other.matrix),
        }
    }
}
