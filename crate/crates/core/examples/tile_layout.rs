// How an image is cut into tiles, which tile calibrates the shared
// hyperparameters, and the per-tile means on a brightness gradient.

use gpseg::synthetic::{add_noise, phantom_cells, ObjectShape, PhantomConfig};
use gpseg::tiling::{denoise, make_layout};
use gpseg::KernelFamily;

pub fn run_example() -> gpseg::Result<()> {
    for (n1, n2) in [(1024, 1024), (110, 40), (100, 100)] {
        let l = make_layout(n1, n2, 100);
        println!("{n1}x{n2}: grid {:?}, rows {:?}", l.grid_shape(), &l.row_sizes[..l.row_sizes.len().min(4)]);
    }

    let mut cfg = PhantomConfig::new(120, 240, 16, ObjectShape::Blob, 3);
    cfg.background_gradient = 0.3;
    let ph = phantom_cells(&cfg)?;
    let noisy = add_noise(&ph.image, 0.1, 4)?;
    let out = denoise(&noisy, &make_layout(120, 240, 60), KernelFamily::Matern52, false)?;
    println!(
        "calibration tile {} -> gamma=({:.2}, {:.2}) eta={:.3}",
        out.calibration_tile, out.kernel1.range, out.kernel2.range, out.eta
    );
    for t in &out.tiles {
        println!("tile {} ({}, {}): mu={:.3} sigma2={:.4}", t.tile.index, t.tile.row, t.tile.col, t.mu, t.sigma2);
    }
    println!("{}", serde_json::to_string(&out.layout)?);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
