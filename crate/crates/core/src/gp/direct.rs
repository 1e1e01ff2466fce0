//! Dense `O(N³)` evaluation of the profile likelihood and the predictive
//! distribution. Builds `R̃ = R2 ⊗ R1 + η I` explicitly; only meant for
//! checking the eigen-based path and for timing comparisons.

use nalgebra::{Cholesky, DMatrix, DVector};

use super::fast::{check_eta, ProfileLik};
use super::{check_finite, loglik_constant, GpHyperParams, PredictiveField, S2_FLOOR};
use crate::error::{Error, Result};
use crate::kernels::{correlation_matrix, AxisGrid, KernelSpec};

/// Largest `N = n1 n2` accepted.
pub const DIRECT_LIMIT: usize = 10_000;

fn guard(y: &DMatrix<f64>) -> Result<()> {
    let n = y.len();
    if n > DIRECT_LIMIT {
        return Err(Error::TooLarge { n, limit: DIRECT_LIMIT });
    }
    if n < 2 {
        return Err(Error::Input("need at least two pixels".into()));
    }
    check_finite(y)
}

/// `R2 ⊗ R1` on the integer lattice, column-major `Vec` ordering.
pub fn kron_correlation(kernel1: &KernelSpec, kernel2: &KernelSpec, n1: usize, n2: usize) -> DMatrix<f64> {
    let r1 = correlation_matrix(kernel1, &AxisGrid::lattice(n1));
    let r2 = correlation_matrix(kernel2, &AxisGrid::lattice(n2));
    r2.kronecker(&r1)
}

fn factor(kernel1: &KernelSpec, kernel2: &KernelSpec, n1: usize, n2: usize, eta: f64) -> Result<Cholesky<f64, nalgebra::Dyn>> {
    let mut rt = kron_correlation(kernel1, kernel2, n1, n2);
    for t in 0..rt.nrows() {
        rt[(t, t)] += eta;
    }
    Cholesky::new(rt).ok_or_else(|| Error::Numerical("R + eta I is not positive definite".into()))
}

fn gls_mean(chol: &Cholesky<f64, nalgebra::Dyn>, y: &DVector<f64>) -> f64 {
    let ones = DVector::from_element(y.len(), 1.0);
    let w = chol.solve(&ones);
    w.dot(y) / w.dot(&ones)
}

pub fn profile_loglik_direct(
    y: &DMatrix<f64>,
    kernel1: KernelSpec,
    kernel2: KernelSpec,
    eta: f64,
) -> Result<ProfileLik> {
    check_eta(eta)?;
    guard(y)?;
    let (n1, n2) = y.shape();
    let n = n1 * n2;
    let chol = factor(&kernel1, &kernel2, n1, n2, eta)?;
    let yv = DVector::from_column_slice(y.as_slice());
    let mu_hat = gls_mean(&chol, &yv);
    let resid = yv.add_scalar(-mu_hat);
    let raw = resid.dot(&chol.solve(&resid));
    let degenerate = !(raw > S2_FLOOR);
    let s2 = if degenerate { S2_FLOOR } else { raw };
    let log_det = 2.0 * chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>();
    Ok(ProfileLik {
        loglik: loglik_constant(n) - 0.5 * log_det - 0.5 * n as f64 * s2.ln(),
        mu_hat,
        sigma2_hat: s2 / n as f64,
        degenerate,
    })
}

/// `f* = μ 1 + R R̃⁻¹ (y - μ 1)` and `σ² diag(R - R R̃⁻¹ R)`.
pub fn predict_direct(y: &DMatrix<f64>, params: &GpHyperParams, want_variance: bool) -> Result<PredictiveField> {
    params.validate()?;
    guard(y)?;
    let (n1, n2) = y.shape();
    let r = kron_correlation(&params.kernel1, &params.kernel2, n1, n2);
    let chol = factor(&params.kernel1, &params.kernel2, n1, n2, params.eta)?;
    let yv = DVector::from_column_slice(y.as_slice());
    let alpha = chol.solve(&yv.add_scalar(-params.mu));
    let mean = (&r * alpha).add_scalar(params.mu);
    let mean = DMatrix::from_column_slice(n1, n2, mean.as_slice());
    let variance = want_variance.then(|| {
        let sol = chol.solve(&r);
        let diag: Vec<f64> = (0..r.nrows())
            .map(|t| {
                let explained = r.row(t).dot(&sol.column(t).transpose());
                (params.sigma2 * (1.0 - explained)).clamp(0.0, params.sigma2)
            })
            .collect();
        DMatrix::from_column_slice(n1, n2, &diag)
    });
    Ok(PredictiveField { mean, variance })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_pixel_hand_algebra() {
        // R̃ = [[1+η, e], [e, 1+η]] with e = exp(-1/γ)
        let (gamma, eta) = (1.0f64, 0.5f64);
        let (y1, y2) = (0.2f64, 0.8f64);
        let e = (-1.0 / gamma).exp();
        let det = (1.0 + eta).powi(2) - e * e;
        let mu = 0.5 * (y1 + y2);
        let s2 = 0.5 * (y1 - y2).powi(2) / (1.0 + eta - e);
        let expected = loglik_constant(2) - 0.5 * det.ln() - s2.ln();

        let y = DMatrix::from_row_slice(1, 2, &[y1, y2]);
        let k = KernelSpec::exponential(gamma).unwrap();
        let p = profile_loglik_direct(&y, k, k, eta).unwrap();
        assert!((p.mu_hat - mu).abs() < 1e-14);
        assert!((p.sigma2_hat - s2 / 2.0).abs() < 1e-14);
        assert!((p.loglik - expected).abs() < 1e-12);
    }

    #[test]
    fn identity_regime() {
        let y = DMatrix::from_row_slice(2, 3, &[0.1, 0.5, 0.3, 0.9, 0.2, 0.4]);
        let k = KernelSpec::matern52(1e-3).unwrap();
        let eta = 0.25;
        let p = profile_loglik_direct(&y, k, k, eta).unwrap();
        let mean = y.mean();
        let s2: f64 = y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (1.0 + eta);
        let expected = loglik_constant(6) - 3.0 * (1.0 + eta).ln() - 3.0 * s2.ln();
        assert!((p.loglik - expected).abs() < 1e-12);
        assert!((p.mu_hat - mean).abs() < 1e-14);
    }

    #[test]
    fn refuses_large() {
        let y = DMatrix::from_element(101, 100, 0.0);
        let k = KernelSpec::matern52(1.0).unwrap();
        assert!(matches!(
            profile_loglik_direct(&y, k, k, 0.1),
            Err(Error::TooLarge { n: 10100, .. })
        ));
    }
}
