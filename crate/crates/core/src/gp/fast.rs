use nalgebra::{DMatrix, DVector};

use super::{check_finite, loglik_constant, AxisEigen, GpHyperParams, PredictiveField, S2_FLOOR};
use crate::error::{Error, Result};
use crate::kernels::{correlation_matrix, AxisGrid, KernelSpec};

/// Maximised profile likelihood at fixed `(γ1, γ2, η)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileLik {
    pub loglik: f64,
    pub mu_hat: f64,
    pub sigma2_hat: f64,
    /// `S²` hit the floor (constant data).
    pub degenerate: bool,
}

/// Kernels, grids and per-axis eigendecompositions for one image shape.
#[derive(Debug, Clone)]
pub struct SeparableGp {
    kernel1: KernelSpec,
    kernel2: KernelSpec,
    r1: DMatrix<f64>,
    r2: DMatrix<f64>,
    eig1: AxisEigen,
    eig2: AxisEigen,
    /// `U_lᵀ 1`.
    u1_sum: DVector<f64>,
    u2_sum: DVector<f64>,
}

/// An image rotated into the joint eigenbasis: `Ỹ0 = U1ᵀ Y U2`.
/// Once built, each nugget value costs `O(N)`.
#[derive(Debug, Clone)]
pub struct Projected<'a> {
    gp: &'a SeparableGp,
    y0: DMatrix<f64>,
}

impl SeparableGp {
    pub fn new(kernel1: KernelSpec, kernel2: KernelSpec, grid1: &AxisGrid, grid2: &AxisGrid) -> Result<Self> {
        let r1 = correlation_matrix(&kernel1, grid1);
        let r2 = correlation_matrix(&kernel2, grid2);
        let eig1 = AxisEigen::decompose(&r1)?;
        let eig2 = AxisEigen::decompose(&r2)?;
        let u1_sum = eig1.vectors.row_sum().transpose();
        let u2_sum = eig2.vectors.row_sum().transpose();
        Ok(Self {
            kernel1,
            kernel2,
            r1,
            r2,
            eig1,
            eig2,
            u1_sum,
            u2_sum,
        })
    }

    /// Integer-lattice coordinates `1..=n` on both axes.
    pub fn on_lattice(kernel1: KernelSpec, kernel2: KernelSpec, n1: usize, n2: usize) -> Result<Self> {
        Self::new(kernel1, kernel2, &AxisGrid::lattice(n1), &AxisGrid::lattice(n2))
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.eig1.len(), self.eig2.len())
    }

    pub fn axis_eigen(&self) -> (&AxisEigen, &AxisEigen) {
        (&self.eig1, &self.eig2)
    }

    pub fn kernels(&self) -> (KernelSpec, KernelSpec) {
        (self.kernel1, self.kernel2)
    }

    /// Sum of `log(λ_i1 λ_j2 + η)` over all pixel pairs.
    pub fn log_det(&self, eta: f64) -> f64 {
        let mut acc = 0.0;
        for &l2 in self.eig2.values.iter() {
            for &l1 in self.eig1.values.iter() {
                acc += (l1 * l2 + eta).ln();
            }
        }
        acc
    }

    pub fn project<'a>(&'a self, y: &DMatrix<f64>) -> Result<Projected<'a>> {
        if y.shape() != self.shape() {
            return Err(Error::DimMismatch {
                expected: self.shape(),
                got: y.shape(),
            });
        }
        check_finite(y)?;
        let y0 = self.eig1.vectors.transpose() * y * &self.eig2.vectors;
        Ok(Projected { gp: self, y0 })
    }

    fn inv_eigen(&self, eta: f64) -> DMatrix<f64> {
        let (n1, n2) = self.shape();
        DMatrix::from_fn(n1, n2, |i, j| 1.0 / (self.eig1.values[i] * self.eig2.values[j] + eta))
    }
}

impl Projected<'_> {
    /// Generalised-least-squares mean `μ̂` at nugget `eta`.
    pub fn mu_hat(&self, eta: f64) -> f64 {
        let gp = self.gp;
        let (n1, n2) = gp.shape();
        let mut num = 0.0;
        let mut den = 0.0;
        for j in 0..n2 {
            let l2 = gp.eig2.values[j];
            let u2 = gp.u2_sum[j];
            for i in 0..n1 {
                let w = 1.0 / (gp.eig1.values[i] * l2 + eta);
                let u = gp.u1_sum[i] * u2;
                num += u * self.y0[(i, j)] * w;
                den += u * u * w;
            }
        }
        num / den
    }

    /// `Ỹ = U1ᵀ (Y - μ 1) U2`.
    fn centered(&self, mu: f64) -> DMatrix<f64> {
        let gp = self.gp;
        let shift = &gp.u1_sum * gp.u2_sum.transpose();
        &self.y0 - shift * mu
    }

    /// `S² = (y - μ1)ᵀ R̃⁻¹ (y - μ1)` at mean `mu`.
    pub fn quad_form(&self, mu: f64, eta: f64) -> f64 {
        let gp = self.gp;
        let yt = self.centered(mu);
        let mut s2 = 0.0;
        for j in 0..yt.ncols() {
            let l2 = gp.eig2.values[j];
            for i in 0..yt.nrows() {
                let v = yt[(i, j)];
                s2 += v * v / (gp.eig1.values[i] * l2 + eta);
            }
        }
        s2
    }

    pub fn profile(&self, eta: f64) -> ProfileLik {
        let gp = self.gp;
        let (n1, n2) = gp.shape();
        let n = n1 * n2;
        let mu_hat = self.mu_hat(eta);
        let raw = self.quad_form(mu_hat, eta);
        let degenerate = !(raw > S2_FLOOR);
        let s2 = if degenerate { S2_FLOOR } else { raw };
        let loglik = loglik_constant(n) - 0.5 * gp.log_det(eta) - 0.5 * n as f64 * s2.ln();
        ProfileLik {
            loglik,
            mu_hat,
            sigma2_hat: s2 / n as f64,
            degenerate,
        }
    }

    /// Predictive mean, and the pointwise predictive variance when asked.
    pub fn predict(&self, mu: f64, sigma2: f64, eta: f64, want_variance: bool) -> PredictiveField {
        let gp = self.gp;
        let (n1, n2) = gp.shape();
        let mut core = self.centered(mu);
        for j in 0..n2 {
            let l2 = gp.eig2.values[j];
            for i in 0..n1 {
                let l1 = gp.eig1.values[i];
                core[(i, j)] *= l1 * l2 / (l1 * l2 + eta);
            }
        }
        let mut mean = &gp.eig1.vectors * core * gp.eig2.vectors.transpose();
        mean.add_scalar_mut(mu);

        let variance = want_variance.then(|| {
            let a = (&gp.r1 * &gp.eig1.vectors).map(|v| v * v);
            let b = (&gp.r2 * &gp.eig2.vectors).map(|v| v * v);
            let explained = a * gp.inv_eigen(eta) * b.transpose();
            explained.map(|s| (sigma2 * (1.0 - s)).clamp(0.0, sigma2))
        });
        PredictiveField { mean, variance }
    }
}

/// Profile log-likelihood of `y` at `(γ1, γ2, η)` on the integer lattice.
pub fn profile_loglik_fast(
    y: &DMatrix<f64>,
    kernel1: KernelSpec,
    kernel2: KernelSpec,
    eta: f64,
) -> Result<ProfileLik> {
    check_eta(eta)?;
    if y.len() < 2 {
        return Err(Error::Input("need at least two pixels".into()));
    }
    let gp = SeparableGp::on_lattice(kernel1, kernel2, y.nrows(), y.ncols())?;
    Ok(gp.project(y)?.profile(eta))
}

/// Predictive mean (and variance) of the latent field given the plug-in
/// parameters.
pub fn predict(y: &DMatrix<f64>, params: &GpHyperParams, want_variance: bool) -> Result<PredictiveField> {
    params.validate()?;
    let gp = SeparableGp::on_lattice(params.kernel1, params.kernel2, y.nrows(), y.ncols())?;
    Ok(gp
        .project(y)?
        .predict(params.mu, params.sigma2, params.eta, want_variance))
}

pub(crate) fn check_eta(eta: f64) -> Result<()> {
    if !(eta.is_finite() && eta > 0.0) {
        return Err(Error::Input(format!("nugget must be positive and finite, got {eta}")));
    }
    Ok(())
}
