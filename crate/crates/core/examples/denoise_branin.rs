// Denoise a noisy Branin surface with the fast separable GP and report
// the fitted hyperparameters and the RMSE against the clean field.

use gpseg::evaluation::rmse;
use gpseg::gp::{fit_mle, predict};
use gpseg::synthetic::{add_noise, branin_field, BraninParams};
use gpseg::KernelFamily;

pub fn run_example() -> gpseg::Result<()> {
    let clean = branin_field(&BraninParams::default(), 60, 60)?;
    for sigma0 in [1.0, 5.0, 10.0] {
        let noisy = add_noise(&clean, sigma0, 7)?;
        for family in [KernelFamily::Matern52, KernelFamily::Exponential] {
            let fit = fit_mle(&noisy, family)?;
            let mean = predict(&noisy, &fit.params, false)?.mean;
            println!(
                "sigma0={sigma0:>4} {:<8} gamma=({:.2}, {:.2}) eta={:.3e} rmse={:.3}",
                family.name(),
                fit.params.kernel1.range,
                fit.params.kernel2.range,
                fit.params.eta,
                rmse(&mean, &clean)?
            );
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
