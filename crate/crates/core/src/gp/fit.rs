use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::fast::SeparableGp;
use super::optim::{nelder_mead, NelderMeadOptions};
use super::{check_finite, GpHyperParams};
use crate::error::{Error, Result};
use crate::kernels::{AxisGrid, KernelFamily, KernelSpec};

#[derive(Debug, Clone, Copy)]
pub struct FitOptions {
    /// Simplex refinements are run from this many of the best grid seeds.
    pub n_refine: usize,
    pub simplex: NelderMeadOptions,
    /// Range search box as multiples of (grid spacing, axis span).
    pub range_lower_spacing: f64,
    pub range_upper_span: f64,
    pub eta_bounds: (f64, f64),
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            n_refine: 3,
            simplex: NelderMeadOptions::default(),
            range_lower_spacing: 0.5,
            range_upper_span: 50.0,
            eta_bounds: (1e-10, 1e4),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MleFit {
    pub params: GpHyperParams,
    pub loglik: f64,
    /// False when no simplex run improved on its starting seed.
    pub improved: bool,
    /// The residual quadratic form hit its floor (flat data).
    pub degenerate: bool,
    pub evaluations: usize,
}

struct Axis {
    grid: AxisGrid,
    lo: f64,
    hi: f64,
    seeds: Vec<f64>,
}

impl Axis {
    fn new(grid: AxisGrid, opts: &FitOptions) -> Self {
        let x = grid.coords();
        let n = x.len();
        let (lo, hi, seeds) = if n < 2 {
            (0.0, 0.0, vec![0.0])
        } else {
            let span = x[n - 1] - x[0];
            let min_step = x.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
            let extent = span * n as f64 / (n - 1) as f64;
            let lo = (opts.range_lower_spacing * min_step).ln();
            let hi = (opts.range_upper_span * extent).ln();
            let seeds = [20.0, 5.0, 2.0]
                .iter()
                .map(|d| (extent / d).ln().clamp(lo, hi))
                .collect();
            (lo, hi, seeds)
        };
        Self { grid, lo, hi, seeds }
    }

    fn free(&self) -> bool {
        self.grid.len() > 1
    }
}

/// Profile-likelihood MLE of `(γ1, γ2, η)` on the integer lattice.
pub fn fit_mle(y: &DMatrix<f64>, family: KernelFamily) -> Result<MleFit> {
    fit_mle_on_grid(
        y,
        family,
        AxisGrid::lattice(y.nrows()),
        AxisGrid::lattice(y.ncols()),
        &FitOptions::default(),
    )
}

/// Maximises the profile likelihood over log-parameters. Every seed of the
/// coarse grid is scored; the best `n_refine` are polished by simplex
/// search. Axes of length one carry no range parameter.
pub fn fit_mle_on_grid(
    y: &DMatrix<f64>,
    family: KernelFamily,
    grid1: AxisGrid,
    grid2: AxisGrid,
    opts: &FitOptions,
) -> Result<MleFit> {
    check_finite(y)?;
    if grid1.len() != y.nrows() || grid2.len() != y.ncols() {
        return Err(Error::DimMismatch {
            expected: (grid1.len(), grid2.len()),
            got: y.shape(),
        });
    }
    if y.len() < 3 {
        return Err(Error::Input("need at least three pixels to fit".into()));
    }
    let axes = [Axis::new(grid1, opts), Axis::new(grid2, opts)];
    let (eta_lo, eta_hi) = (opts.eta_bounds.0.ln(), opts.eta_bounds.1.ln());

    // free coordinates: [log γ1]? [log γ2]? log η
    let free: Vec<usize> = (0..2).filter(|&a| axes[a].free()).collect();
    let unpack = |theta: &[f64]| -> ([f64; 2], f64) {
        let mut log_range = [0.0; 2];
        for (k, &a) in free.iter().enumerate() {
            log_range[a] = theta[k].clamp(axes[a].lo, axes[a].hi);
        }
        (log_range, theta[free.len()].clamp(eta_lo, eta_hi))
    };
    let build = |log_range: [f64; 2]| -> Result<SeparableGp> {
        let k1 = KernelSpec::new(family, log_range[0].exp())?;
        let k2 = KernelSpec::new(family, log_range[1].exp())?;
        SeparableGp::new(k1, k2, &axes[0].grid, &axes[1].grid)
    };
    let mut evaluations = 0usize;
    let mut objective = |theta: &[f64]| -> f64 {
        evaluations += 1;
        let (log_range, log_eta) = unpack(theta);
        match build(log_range).and_then(|gp| Ok(gp.project(y)?.profile(log_eta.exp()))) {
            Ok(p) if p.loglik.is_finite() => -p.loglik,
            _ => f64::INFINITY,
        }
    };

    let mut seeds: Vec<(Vec<f64>, f64)> = Vec::new();
    for &g1 in &axes[0].seeds {
        for &g2 in &axes[1].seeds {
            for eta in [0.01f64, 0.1, 1.0] {
                let mut theta = Vec::with_capacity(3);
                if axes[0].free() {
                    theta.push(g1);
                }
                if axes[1].free() {
                    theta.push(g2);
                }
                theta.push(eta.ln());
                let v = objective(&theta);
                seeds.push((theta, v));
            }
        }
    }
    seeds.sort_by(|a, b| a.1.total_cmp(&b.1));
    seeds.dedup_by(|a, b| a.0 == b.0);

    let mut best = seeds[0].clone();
    let mut improved = false;
    for (theta0, v0) in seeds.iter().take(opts.n_refine.max(1)) {
        let run = nelder_mead(&mut objective, theta0, &opts.simplex);
        if run.value < *v0 {
            improved = true;
        }
        if run.value < best.1 {
            best = (run.x, run.value);
        }
    }
    if !best.1.is_finite() {
        return Err(Error::Numerical("profile likelihood is not finite at any seed".into()));
    }
    if !improved {
        tracing::warn!("likelihood search did not improve on any seed; returning best seed");
    }

    let (log_range, log_eta) = unpack(&best.0);
    let gp = build(log_range)?;
    let eta = log_eta.exp();
    let profile = gp.project(y)?.profile(eta);
    let (kernel1, kernel2) = gp.kernels();
    Ok(MleFit {
        params: GpHyperParams {
            kernel1,
            kernel2,
            eta,
            mu: profile.mu_hat,
            sigma2: profile.sigma2_hat,
        },
        loglik: profile.loglik,
        improved,
        degenerate: profile.degenerate,
        evaluations,
    })
}
