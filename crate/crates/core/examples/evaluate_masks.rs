// IoU matching and average precision on small hand-made label masks.

use gpseg::evaluation::{ap_curve, match_masks, DEFAULT_AP_ALPHAS};
use gpseg::LabelMask;
use nalgebra::DMatrix;

pub fn run_example() -> gpseg::Result<()> {
    #[rustfmt::skip]
    let gt = LabelMask(DMatrix::from_row_slice(4, 8, &[
        1, 1, 1, 0, 0, 2, 2, 0,
        1, 1, 1, 0, 0, 2, 2, 0,
        1, 1, 1, 0, 0, 0, 0, 0,
        0, 0, 0, 0, 3, 3, 0, 0,
    ]));
    #[rustfmt::skip]
    let pred = LabelMask(DMatrix::from_row_slice(4, 8, &[
        1, 1, 0, 0, 0, 2, 2, 2,
        1, 1, 0, 0, 0, 2, 2, 2,
        1, 1, 0, 0, 0, 0, 0, 0,
        0, 0, 0, 0, 0, 0, 0, 4,
    ]));
    let m = match_masks(&gt, &pred, 0.5)?;
    for (g, p, v) in &m.pairs {
        println!("gt {g} <-> pred {p}: IoU {v:.3}");
    }
    println!("unmatched gt {:?}, unmatched pred {:?}", m.unmatched_gt, m.unmatched_pred);
    for p in ap_curve(&gt, &pred, &DEFAULT_AP_ALPHAS)? {
        println!("alpha {:.2}: TP={} FP={} FN={} AP={:.3}", p.alpha, p.tp, p.fp, p.fn_, p.ap);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
