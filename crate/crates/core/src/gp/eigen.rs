use faer::{Mat, Side};
use nalgebra::{DMatrix, DVector};

use super::EIGEN_FLOOR;
use crate::error::{Error, Result};

/// `R = U diag(λ) Uᵀ` for one axis, with eigenvalues clamped at
/// [`EIGEN_FLOOR`].
#[derive(Debug, Clone)]
pub struct AxisEigen {
    pub vectors: DMatrix<f64>,
    pub values: DVector<f64>,
}

impl AxisEigen {
    pub fn decompose(r: &DMatrix<f64>) -> Result<Self> {
        let n = r.nrows();
        if n == 0 || r.ncols() != n {
            return Err(Error::Input("correlation matrix must be square and nonempty".into()));
        }
        if n == 1 {
            return Ok(Self {
                vectors: DMatrix::identity(1, 1),
                values: DVector::from_element(1, r[(0, 0)].max(EIGEN_FLOOR)),
            });
        }
        let m = Mat::<f64>::from_fn(n, n, |i, j| r[(i, j)]);
        let eig = m
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Numerical(format!("eigendecomposition failed: {e:?}")))?;
        let (u, s) = (eig.U(), eig.S().column_vector());
        let values = DVector::from_fn(n, |i, _| s[i]);
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("eigendecomposition produced non-finite values".into()));
        }
        Ok(Self {
            vectors: DMatrix::from_fn(n, n, |i, j| u[(i, j)]),
            values: values.map(|v| v.max(EIGEN_FLOOR)),
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        let scaled = &self.vectors * DMatrix::from_diagonal(&self.values);
        scaled * self.vectors.transpose()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{correlation_matrix, AxisGrid, KernelSpec};

    #[test]
    fn orthogonal_and_reconstructs() {
        for spec in [KernelSpec::matern52(2.5).unwrap(), KernelSpec::exponential(4.0).unwrap()] {
            let r = correlation_matrix(&spec, &AxisGrid::lattice(17));
            let e = AxisEigen::decompose(&r).unwrap();
            let utu = e.vectors.transpose() * &e.vectors;
            assert!((utu - DMatrix::identity(17, 17)).abs().max() < 1e-8);
            assert!((e.reconstruct() - r).abs().max() < 1e-8);
        }
    }
}
