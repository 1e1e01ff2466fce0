//! Separable Gaussian-process model for lattice data.
//!
//! An `n1 × n2` image `Y` is modelled as `Y = F + E` with
//! `Vec(F) ~ N(μ 1, σ² (R2 ⊗ R1))` and iid noise of variance `η σ²`.
//! Because the covariance is a Kronecker product, the per-axis
//! eigendecompositions `R_l = U_l Λ_l U_lᵀ` diagonalise the whole
//! `N × N` problem, so the profile likelihood and the predictive
//! distribution cost `O(n1³ + n2³ + n1 n2 (n1 + n2))` instead of `O(N³)`.
//!
//! [`direct`] holds the textbook dense implementation used as an oracle.

pub mod direct;
mod eigen;
mod fast;
mod fit;
mod optim;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::kernels::KernelSpec;

pub use eigen::AxisEigen;
pub use fast::{predict, profile_loglik_fast, ProfileLik, SeparableGp};
pub use fit::{fit_mle, fit_mle_on_grid, FitOptions, MleFit};
pub use optim::{nelder_mead, NelderMeadOptions, NelderMeadResult};

/// Row-major-agnostic image container: `rows = n1`, `cols = n2`.
pub type GrayImage = DMatrix<f64>;

/// Eigenvalues below this are clamped before use.
pub const EIGEN_FLOOR: f64 = 1e-12;
/// Residual sum of squares is floored here; a hit marks the fit degenerate.
pub const S2_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GpHyperParams {
    pub kernel1: KernelSpec,
    pub kernel2: KernelSpec,
    /// Nugget `σ0² / σ²`.
    pub eta: f64,
    pub mu: f64,
    pub sigma2: f64,
}

impl GpHyperParams {
    /// Noise variance `σ0² = η σ²`.
    pub fn noise_variance(&self) -> f64 {
        self.eta * self.sigma2
    }

    pub(crate) fn validate(&self) -> crate::Result<()> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !ok(self.eta) || !ok(self.sigma2) || !self.mu.is_finite() {
            return Err(crate::Error::Input(format!(
                "hyperparameters must be finite with eta, sigma2 > 0 (eta={}, mu={}, sigma2={})",
                self.eta, self.mu, self.sigma2
            )));
        }
        if !ok(self.kernel1.range) || !ok(self.kernel2.range) {
            return Err(crate::Error::Input("kernel ranges must be positive and finite".into()));
        }
        Ok(())
    }
}

/// Predictive mean and (optionally) pointwise predictive variance.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictiveField {
    pub mean: DMatrix<f64>,
    pub variance: Option<DMatrix<f64>>,
}

/// `C` such that `C - ½ log|R̃| - (N/2) log S²` is the log of the
/// Gaussian density evaluated at the closed-form `μ̂` and `σ̂² = S²/N`.
pub fn loglik_constant(n: usize) -> f64 {
    let n = n as f64;
    -0.5 * n * (2.0 * std::f64::consts::PI).ln() - 0.5 * n + 0.5 * n * n.ln()
}

pub(crate) fn check_finite(y: &DMatrix<f64>) -> crate::Result<()> {
    if y.iter().any(|v| !v.is_finite()) {
        return Err(crate::Error::Input("image contains non-finite values".into()));
    }
    Ok(())
}
