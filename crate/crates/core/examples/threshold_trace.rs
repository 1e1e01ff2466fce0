// Count curve, smoothed differences and the selected threshold for a
// denoised phantom. Pass a path to also write the trace as CSV.

use gpseg::evaluation::iou;
use gpseg::synthetic::{add_noise, phantom_cells, ObjectShape, PhantomConfig};
use gpseg::thresholding::{binarize, threshold_tile};
use gpseg::tiling::{denoise, make_layout};
use gpseg::KernelFamily;

pub fn run_example() -> gpseg::Result<()> {
    let ph = phantom_cells(&PhantomConfig::new(80, 80, 6, ObjectShape::Blob, 11))?;
    let noisy = add_noise(&ph.image, 0.1, 12)?;
    let den = denoise(&noisy, &make_layout(80, 80, 100), KernelFamily::Matern52, false)?;
    let mean = den.mean();
    let trace = threshold_tile(&mean, 100, 0.05)?;

    let peak = trace.alphas[trace.peak_index];
    println!("peak of smoothed diffs at alpha={peak:.3}, tau={:.2}", trace.tau);
    println!("alpha*={:.3} flags={:?}", trace.alpha_star, trace.flags);
    let fg = binarize(&mean, trace.alpha_star);
    println!("foreground pixels {} (truth {}), IoU {:.3}", fg.count(), ph.labels.foreground().count(), iou(&ph.labels.foreground(), &fg)?);

    if let Some(path) = std::env::args().nth(1) {
        trace.write_csv(std::fs::File::create(&path)?)?;
        println!("trace written to {path}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
