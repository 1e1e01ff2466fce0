//! Automatic foreground threshold from the count-versus-threshold curve.
//!
//! For each tile, `c(α)` counts pixels whose normalised predictive mean
//! exceeds `α`. Its first differences `Δc` peak where the threshold crosses
//! the bulk of the background; a 1-D GP smooths them into `Δc*`, and the
//! chosen threshold is the first grid value after the peak where `Δc*`
//! has settled (consecutive change below a fraction of its spread).

use std::io::Write;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gp::{fit_mle_on_grid, FitOptions, SeparableGp};
use crate::kernels::{AxisGrid, KernelFamily};
use crate::mask::BinaryMask;

pub const DEFAULT_GRID_SIZE: usize = 100;
pub const DEFAULT_STABILIZATION: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdFlag {
    /// `max(F*) <= 0`; everything is background.
    NonPositiveMax,
    /// The field is constant; no object can be separated.
    FlatField,
    /// All differences were equal, so smoothing was skipped.
    UnsmoothedConstantDiffs,
    /// Smoothed differences have zero spread; took the step after the peak.
    ZeroSpread,
    /// No grid value met the stabilisation test; fell back to the last
    /// local maximum of the second difference.
    Fallback,
    /// Threshold was raised after an unexpectedly high object count.
    Rethresholded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdTrace {
    /// `M` equally spaced values on `[0, 1]`.
    pub alphas: Vec<f64>,
    /// `c(α_m)`, one per alpha.
    pub counts: Vec<usize>,
    /// `Δc(α_m) = c(α_{m-1}) - c(α_m)` for `m = 1..M`; entry `k` belongs to `alphas[k + 1]`.
    pub diffs: Vec<f64>,
    /// Smoothed differences, aligned with `diffs`.
    pub smoothed: Vec<f64>,
    pub tau: f64,
    /// Index into `alphas`.
    pub alpha_index: usize,
    pub alpha_star: f64,
    /// Index into `alphas` of the peak of `smoothed`.
    pub peak_index: usize,
    pub flags: Vec<ThresholdFlag>,
}

impl ThresholdTrace {
    pub fn flagged(&self, flag: ThresholdFlag) -> bool {
        self.flags.contains(&flag)
    }

    /// CSV columns `alpha,count,diff,smoothed_diff`; the first row has no
    /// differences.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["alpha", "count", "diff", "smoothed_diff"])?;
        for (m, (&a, &c)) in self.alphas.iter().zip(&self.counts).enumerate() {
            let (d, s) = match m {
                0 => (String::new(), String::new()),
                _ => (crate::io::fmt_f64(self.diffs[m - 1]), crate::io::fmt_f64(self.smoothed[m - 1])),
            };
            w.write_record([crate::io::fmt_f64(a), c.to_string(), d, s])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn max_of(field: &DMatrix<f64>) -> f64 {
    field.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// Counts `#{F / max(F) > α_m}` on `m` equally spaced thresholds in `[0, 1]`.
pub fn count_curve(field: &DMatrix<f64>, m: usize) -> Result<ThresholdTrace> {
    if m < 2 {
        return Err(Error::Input("threshold grid needs at least two points".into()));
    }
    crate::gp::check_finite(field)?;
    let alphas: Vec<f64> = (0..m).map(|k| k as f64 / (m - 1) as f64).collect();
    let peak = max_of(field);
    let mut flags = Vec::new();
    let counts: Vec<usize> = if !(peak > 0.0) {
        flags.push(ThresholdFlag::NonPositiveMax);
        vec![0; m]
    } else {
        let mut normalised: Vec<f64> = field.iter().map(|v| v / peak).collect();
        normalised.sort_by(f64::total_cmp);
        alphas
            .iter()
            .map(|&a| normalised.len() - normalised.partition_point(|&v| v <= a))
            .collect()
    };
    if peak > 0.0 && field.iter().all(|&v| v == peak) {
        flags.push(ThresholdFlag::FlatField);
    }
    let diffs: Vec<f64> = counts.windows(2).map(|w| (w[0] - w[1]) as f64).collect();
    Ok(ThresholdTrace {
        alphas,
        counts,
        smoothed: diffs.clone(),
        diffs,
        tau: 0.0,
        alpha_index: m - 1,
        alpha_star: 1.0,
        peak_index: 0,
        flags,
    })
}

/// Replaces `smoothed` with the predictive mean of a 1-D Matérn-5/2 GP
/// regression of `Δc` on the grid index, fitted by maximum likelihood.
pub fn smooth_diffs(trace: &mut ThresholdTrace) -> Result<()> {
    let n = trace.diffs.len();
    if n + 1 < 10 {
        return Err(Error::Input("smoothing needs a grid of at least 10 thresholds".into()));
    }
    let first = trace.diffs[0];
    if trace.diffs.iter().all(|&d| d == first) {
        trace.smoothed = trace.diffs.clone();
        if !trace.flagged(ThresholdFlag::UnsmoothedConstantDiffs) {
            trace.flags.push(ThresholdFlag::UnsmoothedConstantDiffs);
        }
        return Ok(());
    }
    let y = DMatrix::from_column_slice(n, 1, &trace.diffs);
    let grid = AxisGrid::lattice(n);
    let fit = fit_mle_on_grid(&y, KernelFamily::Matern52, grid.clone(), AxisGrid::lattice(1), &FitOptions::default())?;
    let p = fit.params;
    let gp = SeparableGp::new(p.kernel1, p.kernel2, &grid, &AxisGrid::lattice(1))?;
    let field = gp.project(&y)?.predict(p.mu, p.sigma2, p.eta, false);
    trace.smoothed = field.mean.as_slice().to_vec();
    Ok(())
}

/// Sample (n - 1) standard deviation.
fn sample_sd(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    if n < 2.0 {
        return 0.0;
    }
    let mean = v.iter().sum::<f64>() / n;
    (v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)).sqrt()
}

fn argmax_from(v: &[f64], start: usize) -> usize {
    let mut best = start;
    for k in start..v.len() {
        if v[k] > v[best] {
            best = k;
        }
    }
    best
}

/// Applies the stabilisation rule to `smoothed[start..]` and records the
/// choice in the trace. Returns the chosen index into `alphas`.
fn select_from(trace: &mut ThresholdTrace, start: usize, factor: f64) -> usize {
    let s = &trace.smoothed;
    let n = s.len();
    let tau = sample_sd(s);
    let peak = argmax_from(s, start);
    trace.tau = tau;
    trace.peak_index = peak + 1;

    let last = n - 1;
    let chosen = if tau == 0.0 {
        trace.flags.push(ThresholdFlag::ZeroSpread);
        (peak + 1).min(last)
    } else if let Some(k) = (peak + 1..n).find(|&k| (s[k] - s[k - 1]).abs() < factor * tau) {
        k
    } else {
        trace.flags.push(ThresholdFlag::Fallback);
        // |ΔΔc*| is defined for k >= 1; take its last local maximum after the peak
        let second: Vec<f64> = (0..n).map(|k| if k == 0 { 0.0 } else { (s[k] - s[k - 1]).abs() }).collect();
        let lo = peak + 1;
        let local_max = (lo..n)
            .rev()
            .find(|&k| {
                let left = if k > lo { second[k - 1] } else { f64::NEG_INFINITY };
                let right = if k + 1 < n { second[k + 1] } else { f64::NEG_INFINITY };
                second[k] >= left && second[k] >= right
            })
            .unwrap_or(lo.min(last));
        (local_max + 1).min(last)
    };
    let chosen = chosen.max((peak + 1).min(last));
    trace.alpha_index = chosen + 1;
    trace.alpha_star = trace.alphas[chosen + 1];
    trace.alpha_index
}

/// Chooses `α*` from a smoothed trace and stores it. `factor` is the
/// stabilisation tolerance as a fraction of the spread `τ` (default 0.05).
pub fn select_threshold(trace: &mut ThresholdTrace, factor: f64) -> f64 {
    if trace.flagged(ThresholdFlag::NonPositiveMax) || trace.flagged(ThresholdFlag::FlatField) {
        let last = trace.alphas.len() - 1;
        trace.alpha_index = last;
        trace.alpha_star = trace.alphas[last];
        trace.tau = 0.0;
        return trace.alpha_star;
    }
    select_from(trace, 0, factor);
    trace.alpha_star
}

/// Re-runs the selection restricted to thresholds above the current `α*`.
pub fn rethreshold(trace: &mut ThresholdTrace, factor: f64) -> f64 {
    let start = trace.alpha_index; // smoothed index of the next alpha up
    if start >= trace.smoothed.len() {
        return trace.alpha_star;
    }
    select_from(trace, start, factor);
    trace.flags.push(ThresholdFlag::Rethresholded);
    trace.alpha_star
}

/// `B = 1` where `F > α · max(F)`.
pub fn binarize(field: &DMatrix<f64>, alpha: f64) -> BinaryMask {
    let peak = max_of(field);
    if !(peak > 0.0) {
        return BinaryMask::empty(field.nrows(), field.ncols());
    }
    let cut = alpha * peak;
    BinaryMask(field.map(|v| v > cut))
}

/// Full per-tile threshold selection: count, smooth, select.
pub fn threshold_tile(field: &DMatrix<f64>, m: usize, factor: f64) -> Result<ThresholdTrace> {
    let mut trace = count_curve(field, m)?;
    if !trace.flagged(ThresholdFlag::NonPositiveMax) && !trace.flagged(ThresholdFlag::FlatField) {
        smooth_diffs(&mut trace)?;
    }
    select_threshold(&mut trace, factor);
    Ok(trace)
}
