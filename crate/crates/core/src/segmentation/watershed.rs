//! Flooding watershed on the negated distance map.
//!
//! Foreground pixels are visited in order of rising water level
//! (`-distance`). A pixel with no already-flooded neighbour starts a new
//! basin. Where fronts from several basins meet, a basin whose depth below
//! the current level is less than the merge tolerance is absorbed by the
//! deepest one; otherwise the pixel goes to the basin whose seed is closest
//! in Euclidean distance. Flooding stops at level 0, so background stays 0.

use nalgebra::DMatrix;

use super::distance::DistanceMap;
use crate::mask::{for_each_neighbor8, LabelMask};

/// Depth (in distance units) below which a basin is merged into its deeper neighbour.
pub const DEFAULT_MERGE_TOLERANCE: f64 = 1.0;
/// Heights within this of a basin's seed depth extend its seed plateau.
pub const PLATEAU_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy)]
pub struct WatershedOptions {
    pub merge_tolerance: f64,
}

impl Default for WatershedOptions {
    fn default() -> Self {
        Self {
            merge_tolerance: DEFAULT_MERGE_TOLERANCE,
        }
    }
}

#[derive(Debug, Clone)]
struct Basin {
    parent: usize,
    depth: f64,
    seed_sum: (f64, f64),
    seed_count: usize,
}

impl Basin {
    fn seed(&self) -> (f64, f64) {
        let n = self.seed_count as f64;
        (self.seed_sum.0 / n, self.seed_sum.1 / n)
    }
}

struct Basins(Vec<Basin>);

impl Basins {
    fn find(&mut self, mut b: usize) -> usize {
        while self.0[b].parent != b {
            let gp = self.0[self.0[b].parent].parent;
            self.0[b].parent = gp;
            b = gp;
        }
        b
    }

    /// Absorb `from` into `into` (both roots).
    fn absorb(&mut self, from: usize, into: usize) {
        if (self.0[from].depth - self.0[into].depth).abs() <= PLATEAU_TOLERANCE {
            let (s, c) = (self.0[from].seed_sum, self.0[from].seed_count);
            let dst = &mut self.0[into];
            dst.seed_sum.0 += s.0;
            dst.seed_sum.1 += s.1;
            dst.seed_count += c;
        }
        self.0[from].parent = into;
    }
}

/// Which of the meeting basins claims a contested pixel: the one with the
/// nearest seed; exact ties go to the lower index.
pub fn nearest_seed(pixel: (f64, f64), seeds: &[(usize, (f64, f64))]) -> usize {
    let mut best = (usize::MAX, f64::INFINITY);
    for &(id, (si, sj)) in seeds {
        let d = ((pixel.0 - si).powi(2) + (pixel.1 - sj).powi(2)).sqrt();
        if d < best.1 || (d == best.1 && id < best.0) {
            best = (id, d);
        }
    }
    best.0
}

pub fn watershed(dist: &DistanceMap) -> LabelMask {
    watershed_with(dist, &WatershedOptions::default())
}

pub fn watershed_with(dist: &DistanceMap, opts: &WatershedOptions) -> LabelMask {
    let (n1, n2) = dist.shape();
    let mut order: Vec<(usize, usize)> = (0..n1)
        .flat_map(|i| (0..n2).map(move |j| (i, j)))
        .filter(|&(i, j)| dist.get(i, j) > 0.0)
        .collect();
    // deepest first; raster order within a level
    order.sort_by(|a, b| dist.get(b.0, b.1).total_cmp(&dist.get(a.0, a.1)).then(a.cmp(b)));

    let mut basin_of = DMatrix::<usize>::from_element(n1, n2, usize::MAX);
    let mut basins = Basins(Vec::new());
    let mut roots: Vec<usize> = Vec::with_capacity(8);

    for &(i, j) in &order {
        let d = dist.get(i, j);
        roots.clear();
        for_each_neighbor8(i, j, n1, n2, |a, b| {
            let id = basin_of[(a, b)];
            if id != usize::MAX {
                roots.push(id);
            }
        });
        for r in roots.iter_mut() {
            *r = basins.find(*r);
        }
        roots.sort_unstable();
        roots.dedup();

        let target = if roots.is_empty() {
            basins.0.push(Basin {
                parent: basins.0.len(),
                depth: d,
                seed_sum: (0.0, 0.0),
                seed_count: 0,
            });
            basins.0.len() - 1
        } else if roots.len() == 1 {
            roots[0]
        } else {
            let deepest = *roots
                .iter()
                .max_by(|&&a, &&b| basins.0[a].depth.total_cmp(&basins.0[b].depth).then(b.cmp(&a)))
                .unwrap();
            let mut merged = false;
            for &r in roots.iter() {
                if r != deepest && basins.0[r].depth - d < opts.merge_tolerance {
                    basins.absorb(r, deepest);
                    merged = true;
                }
            }
            roots.retain(|&r| basins.0[r].parent == r);
            if merged || roots.len() == 1 {
                deepest
            } else {
                let seeds: Vec<(usize, (f64, f64))> = roots.iter().map(|&r| (r, basins.0[r].seed())).collect();
                nearest_seed((i as f64, j as f64), &seeds)
            }
        };
        basin_of[(i, j)] = target;
        let b = &mut basins.0[target];
        if (b.depth - d).abs() <= PLATEAU_TOLERANCE {
            b.seed_sum.0 += i as f64;
            b.seed_sum.1 += j as f64;
            b.seed_count += 1;
        }
    }

    let mut raw = DMatrix::<u32>::zeros(n1, n2);
    for i in 0..n1 {
        for j in 0..n2 {
            let id = basin_of[(i, j)];
            if id != usize::MAX {
                raw[(i, j)] = basins.find(id) as u32 + 1;
            }
        }
    }
    LabelMask(raw).relabel_sequential()
}
