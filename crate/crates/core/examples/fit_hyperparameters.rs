// Maximum-likelihood range and nugget on data drawn from the model
// itself, for both kernel families.

use gpseg::gp::{fit_mle, AxisEigen};
use gpseg::kernels::correlation_matrix;
use gpseg::{AxisGrid, KernelFamily, KernelSpec};
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn draw(n: usize, spec: KernelSpec, eta: f64, seed: u64) -> gpseg::Result<DMatrix<f64>> {
    let e = AxisEigen::decompose(&correlation_matrix(&spec, &AxisGrid::lattice(n)))?;
    let l = &e.vectors * DMatrix::from_diagonal(&e.values.map(f64::sqrt));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut z = || Distribution::<f64>::sample(&StandardNormal, &mut rng);
    let latent = DMatrix::from_fn(n, n, |_, _| z());
    let noise = DMatrix::from_fn(n, n, |_, _| eta.sqrt() * z());
    Ok(&l * latent * l.transpose() + noise)
}

pub fn run_example() -> gpseg::Result<()> {
    for family in [KernelFamily::Matern52, KernelFamily::Exponential] {
        let truth = KernelSpec::new(family, 5.0)?;
        for seed in 0..3 {
            let y = draw(50, truth, 0.25, seed)?;
            let fit = fit_mle(&y, family)?;
            println!(
                "{:<8} seed {seed}: gamma=({:.2}, {:.2}) eta={:.3} loglik={:.2} evals={}",
                family.name(),
                fit.params.kernel1.range,
                fit.params.kernel2.range,
                fit.params.eta,
                fit.loglik,
                fit.evaluations
            );
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
