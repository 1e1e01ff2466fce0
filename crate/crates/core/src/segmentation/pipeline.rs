use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use super::{connected_components, distance_transform, filter_small, watershed_with, WatershedOptions};
use crate::config::PipelineConfig;
use crate::error::Result;
use crate::mask::{BinaryMask, LabelMask};
use crate::thresholding::{binarize, rethreshold, threshold_tile, ThresholdTrace};
use crate::tiling::{denoise, make_layout, DenoisedTiles, Tile};

#[derive(Debug, Clone, Serialize)]
pub struct TileThreshold {
    pub tile: Tile,
    pub trace: ThresholdTrace,
    /// Connected components inside the tile's binary mask.
    pub objects: usize,
}

#[derive(Debug, Clone)]
pub struct SegmentationOutput {
    pub denoised: DenoisedTiles,
    pub thresholds: Vec<TileThreshold>,
    pub binary: BinaryMask,
    pub components: LabelMask,
    /// Watershed labels before size filtering.
    pub watershed: LabelMask,
    pub labels: LabelMask,
}

fn median(v: &[usize]) -> f64 {
    let mut s = v.to_vec();
    s.sort_unstable();
    let n = s.len();
    if n == 0 {
        0.0
    } else if n % 2 == 1 {
        s[n / 2] as f64
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2]) as f64
    }
}

/// Tile, denoise, threshold each tile, restitch, then label objects by
/// flood fill and watershed and drop small ones.
pub fn segment_pipeline(image: &DMatrix<f64>, config: &PipelineConfig) -> Result<SegmentationOutput> {
    config.validate()?;
    let (n1, n2) = image.shape();
    let layout = make_layout(n1, n2, config.tile_side);
    let denoised = denoise(image, &layout, config.kernel, false)?;

    let mut thresholds = denoised
        .tiles
        .par_iter()
        .map(|t| -> Result<TileThreshold> {
            let trace = threshold_tile(&t.field.mean, config.alpha_grid, config.stabilization)?;
            let objects = connected_components(&binarize(&t.field.mean, trace.alpha_star)).max_label() as usize;
            Ok(TileThreshold {
                tile: t.tile,
                trace,
                objects,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let typical = median(&thresholds.iter().map(|t| t.objects).collect::<Vec<_>>());
    if typical >= 1.0 {
        for (th, res) in thresholds.iter_mut().zip(&denoised.tiles) {
            if th.objects as f64 > config.rethreshold_factor * typical {
                let before = th.trace.alpha_star;
                rethreshold(&mut th.trace, config.stabilization);
                th.objects = connected_components(&binarize(&res.field.mean, th.trace.alpha_star)).max_label() as usize;
                tracing::info!(tile = th.tile.index, before, after = th.trace.alpha_star, "re-thresholded tile");
            }
        }
    }

    let tile_masks: Vec<DMatrix<bool>> = thresholds
        .iter()
        .zip(&denoised.tiles)
        .map(|(th, res)| binarize(&res.field.mean, th.trace.alpha_star).0)
        .collect();
    let binary = BinaryMask(layout.stitch(&tile_masks, false, |m| m));

    let components = connected_components(&binary);
    let dist = distance_transform(&binary);
    let ws = watershed_with(
        &dist,
        &WatershedOptions {
            merge_tolerance: config.merge_tolerance,
        },
    );
    let labels = filter_small(&ws, &config.size_filter());
    Ok(SegmentationOutput {
        denoised,
        thresholds,
        binary,
        components,
        watershed: ws,
        labels,
    })
}
