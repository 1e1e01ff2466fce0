// Solve the 1-D heat equation, compare the early profile with the
// semi-infinite erfc solution, then denoise a noisy copy of the field.

use gpseg::evaluation::rmse;
use gpseg::synthetic::{add_noise, diffusion_field, DiffusionConfig};
use gpseg::tiling::{denoise, TileLayout};
use gpseg::KernelFamily;

/// Abramowitz-Stegun 7.1.26, good to about 1.5e-7.
fn erfc(x: f64) -> f64 {
    let t = 1.0 / (1.0 + 0.3275911 * x);
    let poly = t * (0.254829592 + t * (-0.284496736 + t * (1.421413741 + t * (-1.453152027 + t * 1.061405429))));
    poly * (-x * x).exp()
}

pub fn run_example() -> gpseg::Result<()> {
    let cfg = DiffusionConfig {
        nx: 100,
        nt: 21,
        ..DiffusionConfig::default()
    };
    let f = diffusion_field(&cfg)?;
    let dx = cfg.length / (cfg.nx - 1) as f64;
    let t = cfg.t_end / (cfg.nt - 1) as f64;
    println!("x       f(x, {t})  erfc");
    for i in (0..cfg.nx).step_by(10).take(5) {
        let x = i as f64 * dx;
        println!("{x:.3}   {:.5}     {:.5}", f[(i, 1)], erfc(x / (2.0 * (cfg.diffusivity * t).sqrt())));
    }

    let noisy = add_noise(&f, 0.1, 3)?;
    let (n1, n2) = noisy.shape();
    let out = denoise(&noisy, &TileLayout::single(n1, n2), KernelFamily::Matern52, false)?;
    println!("noise 0.1 -> rmse {:.4}", rmse(&out.mean(), &f)?);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
