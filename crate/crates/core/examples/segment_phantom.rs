// Full pipeline on a synthetic cell image: tile, denoise, threshold,
// watershed, size filter, then score against the known labels.

use gpseg::evaluation::{ap_curve, DEFAULT_AP_ALPHAS};
use gpseg::synthetic::{add_noise, phantom_cells, ObjectShape, PhantomConfig};
use gpseg::{segment_pipeline, PipelineConfig};

pub fn run_example() -> gpseg::Result<()> {
    let mut cfg = PhantomConfig::new(160, 160, 24, ObjectShape::Blob, 5);
    cfg.background_gradient = 0.1;
    let ph = phantom_cells(&cfg)?;
    for sigma0 in [0.1, 0.3] {
        let noisy = add_noise(&ph.image, sigma0, 6)?;
        let seg = segment_pipeline(&noisy, &PipelineConfig::default())?;
        let alphas: Vec<String> = seg.thresholds.iter().map(|t| format!("{:.2}", t.trace.alpha_star)).collect();
        println!(
            "sigma0={sigma0}: {} tiles, eta={:.3}, alpha* per tile [{}], {} objects (truth {})",
            seg.thresholds.len(),
            seg.denoised.eta,
            alphas.join(", "),
            seg.labels.num_objects(),
            ph.labels.num_objects()
        );
        for p in ap_curve(&ph.labels, &seg.labels, &DEFAULT_AP_ALPHAS)? {
            println!("  AP({:.2}) = {:.3}  TP={} FP={} FN={}", p.alpha, p.ap, p.tp, p.fp, p.fn_);
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
