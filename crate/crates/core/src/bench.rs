//! Wall-clock timing of one profile-likelihood evaluation, eigen-based
//! versus dense Cholesky, on square noisy test images.

use std::io::Write;
use std::time::Instant;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::Result;
use crate::gp::direct::profile_loglik_direct;
use crate::gp::SeparableGp;
use crate::io::fmt_f64;
use crate::kernels::{KernelFamily, KernelSpec};

pub const DEFAULT_SIDES: [usize; 4] = [10, 20, 40, 80];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Fast,
    Direct,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub n: usize,
    pub method: String,
    pub seconds: f64,
}

fn test_image(side: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DMatrix::from_fn(side, side, |i, j| {
        let (x, y) = (i as f64 / side as f64, j as f64 / side as f64);
        (6.0 * x).sin() * (4.0 * y).cos() + 0.1 * Distribution::<f64>::sample(&StandardNormal, &mut rng)
    })
}

/// Seconds for one likelihood evaluation at a fresh `(γ, η)`, including
/// the eigendecompositions the fast method needs whenever `γ` changes.
pub fn time_loglik(side: usize, family: KernelFamily, method: Method, seed: u64) -> Result<f64> {
    let y = test_image(side, seed);
    let k = KernelSpec::new(family, side as f64 / 5.0)?;
    let eta = 0.1;
    let start = Instant::now();
    let ll = match method {
        Method::Fast => SeparableGp::on_lattice(k, k, side, side)?.project(&y)?.profile(eta).loglik,
        Method::Direct => profile_loglik_direct(&y, k, k, eta)?.loglik,
    };
    let secs = start.elapsed().as_secs_f64();
    tracing::debug!(side, ?method, ll, secs, "timed likelihood");
    Ok(secs)
}

/// Best of `repeats` timings for each side, family and method.
pub fn run_bench(sides: &[usize], families: &[KernelFamily], repeats: usize, seed: u64) -> Result<Vec<BenchRow>> {
    let mut rows = Vec::new();
    for &side in sides {
        for &family in families {
            for method in [Method::Fast, Method::Direct] {
                let mut best = f64::INFINITY;
                for r in 0..repeats.max(1) {
                    best = best.min(time_loglik(side, family, method, seed + r as u64)?);
                }
                let tag = match method {
                    Method::Fast => "fast",
                    Method::Direct => "direct",
                };
                rows.push(BenchRow {
                    n: side * side,
                    method: format!("{tag}-{}", family.name()),
                    seconds: best,
                });
                tracing::info!(n = side * side, method = %rows.last().unwrap().method, seconds = best, "bench");
            }
        }
    }
    Ok(rows)
}

pub fn write_bench_csv<W: Write>(out: W, rows: &[BenchRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["N", "method", "seconds"])?;
    for r in rows {
        w.write_record([r.n.to_string(), r.method.clone(), fmt_f64(r.seconds)])?;
    }
    w.flush()?;
    Ok(())
}
