use crate::mask::LabelMask;

pub const DEFAULT_INTERIOR_FRACTION: f64 = 0.15;
pub const DEFAULT_BOUNDARY_FRACTION: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SizeFilter {
    pub interior_fraction: f64,
    pub boundary_fraction: f64,
}

impl Default for SizeFilter {
    fn default() -> Self {
        Self {
            interior_fraction: DEFAULT_INTERIOR_FRACTION,
            boundary_fraction: DEFAULT_BOUNDARY_FRACTION,
        }
    }
}

/// Per-label flag: does the object touch the image border.
pub fn touches_border(labels: &LabelMask) -> Vec<bool> {
    let (n1, n2) = labels.shape();
    let mut out = vec![false; labels.max_label() as usize + 1];
    for i in 0..n1 {
        for j in 0..n2 {
            if i == 0 || j == 0 || i + 1 == n1 || j + 1 == n2 {
                out[labels.get(i, j) as usize] = true;
            }
        }
    }
    out[0] = false;
    out
}

/// Mean pixel count over all objects, `None` when there are none.
pub fn mean_area(labels: &LabelMask) -> Option<f64> {
    let areas = labels.areas();
    let sizes: Vec<usize> = areas.iter().skip(1).copied().filter(|&a| a > 0).collect();
    (!sizes.is_empty()).then(|| sizes.iter().sum::<usize>() as f64 / sizes.len() as f64)
}

/// Removes objects with at most `interior_fraction · A` pixels (or
/// `boundary_fraction · A` if they touch the border), `A` being the mean
/// object size, then relabels `1..=K` in raster order.
pub fn filter_small(labels: &LabelMask, filter: &SizeFilter) -> LabelMask {
    match mean_area(labels) {
        None => labels.clone(),
        Some(a) => filter_small_with_mean(labels, filter, a),
    }
}

/// As [`filter_small`] with the reference mean size held fixed.
pub fn filter_small_with_mean(labels: &LabelMask, filter: &SizeFilter, mean: f64) -> LabelMask {
    let areas = labels.areas();
    let border = touches_border(labels);
    let keep: Vec<bool> = areas
        .iter()
        .zip(&border)
        .enumerate()
        .map(|(l, (&area, &edge))| {
            if l == 0 || area == 0 {
                return false;
            }
            let frac = if edge { filter.boundary_fraction } else { filter.interior_fraction };
            area as f64 > frac * mean
        })
        .collect();
    LabelMask(labels.0.map(|l| if keep[l as usize] { l } else { 0 })).relabel_sequential()
}
