//! Partition an image into near-square tiles, fit the range and nugget
//! parameters once, then denoise every tile with its own mean and variance.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gp::{fit_mle, MleFit, PredictiveField, SeparableGp};
use crate::kernels::{KernelFamily, KernelSpec};

/// Smallest tile side produced by [`make_layout`] (unless the whole image is smaller).
pub const MIN_TILE_SIDE: usize = 16;
pub const DEFAULT_TILE_SIDE: usize = 100;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TileLayout {
    pub n1: usize,
    pub n2: usize,
    /// Heights of the tile rows, top to bottom.
    pub row_sizes: Vec<usize>,
    /// Widths of the tile columns, left to right.
    pub col_sizes: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tile {
    pub index: usize,
    pub row: usize,
    pub col: usize,
    pub n1: usize,
    pub n2: usize,
}

impl Tile {
    pub fn view<'a>(&self, image: &'a DMatrix<f64>) -> nalgebra::DMatrixView<'a, f64> {
        image.view((self.row, self.col), (self.n1, self.n2))
    }
}

fn split_axis(n: usize, target: usize) -> Vec<usize> {
    if n < MIN_TILE_SIDE {
        return vec![n];
    }
    let wanted = n.div_ceil(target.max(1));
    let count = wanted.min(n / MIN_TILE_SIDE).max(1);
    let base = n / count;
    let extra = n % count;
    (0..count).map(|k| base + usize::from(k < extra)).collect()
}

/// Near-square tiles of side about `target`; remainders are spread so that
/// no side falls below [`MIN_TILE_SIDE`].
pub fn make_layout(n1: usize, n2: usize, target: usize) -> TileLayout {
    TileLayout {
        n1,
        n2,
        row_sizes: split_axis(n1, target),
        col_sizes: split_axis(n2, target),
    }
}

impl TileLayout {
    pub fn single(n1: usize, n2: usize) -> Self {
        Self {
            n1,
            n2,
            row_sizes: vec![n1],
            col_sizes: vec![n2],
        }
    }

    pub fn grid_shape(&self) -> (usize, usize) {
        (self.row_sizes.len(), self.col_sizes.len())
    }

    pub fn len(&self) -> usize {
        self.row_sizes.len() * self.col_sizes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Tiles in row-major order.
    pub fn tiles(&self) -> Vec<Tile> {
        let mut out = Vec::with_capacity(self.len());
        let mut row = 0;
        for &h in &self.row_sizes {
            let mut col = 0;
            for &w in &self.col_sizes {
                out.push(Tile {
                    index: out.len(),
                    row,
                    col,
                    n1: h,
                    n2: w,
                });
                col += w;
            }
            row += h;
        }
        out
    }

    pub fn validate_for(&self, shape: (usize, usize)) -> Result<()> {
        let ok = self.row_sizes.iter().sum::<usize>() == self.n1
            && self.col_sizes.iter().sum::<usize>() == self.n2
            && self.row_sizes.iter().chain(&self.col_sizes).all(|&s| s > 0);
        if !ok {
            return Err(Error::Input("tile layout does not partition its extent".into()));
        }
        if (self.n1, self.n2) != shape {
            return Err(Error::DimMismatch {
                expected: (self.n1, self.n2),
                got: shape,
            });
        }
        Ok(())
    }

    /// Reassemble per-tile matrices (in [`TileLayout::tiles`] order).
    pub fn stitch<T, F>(&self, parts: &[F], fill: T, get: impl Fn(&F) -> &DMatrix<T>) -> DMatrix<T>
    where
        T: nalgebra::Scalar + Copy,
    {
        let mut out = DMatrix::from_element(self.n1, self.n2, fill);
        for (tile, part) in self.tiles().iter().zip(parts) {
            out.view_mut((tile.row, tile.col), (tile.n1, tile.n2)).copy_from(get(part));
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct TileResult {
    pub tile: Tile,
    pub mu: f64,
    pub sigma2: f64,
    pub field: PredictiveField,
    /// The tile was constant; its mean is that constant and no fit was used.
    pub constant: bool,
}

#[derive(Debug, Clone)]
pub struct DenoisedTiles {
    pub layout: TileLayout,
    pub kernel1: KernelSpec,
    pub kernel2: KernelSpec,
    pub eta: f64,
    pub calibration_tile: usize,
    pub fit: MleFit,
    pub tiles: Vec<TileResult>,
}

impl DenoisedTiles {
    pub fn mean(&self) -> DMatrix<f64> {
        self.layout.stitch(&self.tiles, 0.0, |t| &t.field.mean)
    }

    pub fn variance(&self) -> Option<DMatrix<f64>> {
        if self.tiles.iter().any(|t| t.field.variance.is_none()) {
            return None;
        }
        Some(self.layout.stitch(&self.tiles, 0.0, |t| t.field.variance.as_ref().unwrap()))
    }
}

fn sample_variance(v: nalgebra::DMatrixView<'_, f64>) -> f64 {
    let n = v.len() as f64;
    if n < 2.0 {
        return 0.0;
    }
    let mean = v.iter().sum::<f64>() / n;
    v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)
}

/// Index of the tile with the largest sample variance (first on ties).
pub fn calibration_tile(image: &DMatrix<f64>, layout: &TileLayout) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for tile in layout.tiles() {
        let v = sample_variance(tile.view(image));
        if v > best.1 {
            best = (tile.index, v);
        }
    }
    best.0
}

pub fn denoise(image: &DMatrix<f64>, layout: &TileLayout, family: KernelFamily, want_variance: bool) -> Result<DenoisedTiles> {
    layout.validate_for(image.shape())?;
    crate::gp::check_finite(image)?;
    let tiles = layout.tiles();
    let calibration = calibration_tile(image, layout);
    let fit = fit_mle(&tiles[calibration].view(image).clone_owned(), family)?;
    let (kernel1, kernel2, eta) = (fit.params.kernel1, fit.params.kernel2, fit.params.eta);

    let mut engines = BTreeMap::new();
    for t in &tiles {
        if let std::collections::btree_map::Entry::Vacant(e) = engines.entry((t.n1, t.n2)) {
            e.insert(SeparableGp::on_lattice(kernel1, kernel2, t.n1, t.n2)?);
        }
    }

    let results = tiles
        .par_iter()
        .map(|tile| -> Result<TileResult> {
            let y = tile.view(image).clone_owned();
            let gp = &engines[&(tile.n1, tile.n2)];
            let projected = gp.project(&y)?;
            let profile = projected.profile(eta);
            let first = y[(0, 0)];
            if profile.degenerate || y.iter().all(|&v| v == first) {
                tracing::debug!(tile = tile.index, "constant tile");
                return Ok(TileResult {
                    tile: *tile,
                    mu: first,
                    sigma2: 0.0,
                    field: PredictiveField {
                        mean: DMatrix::from_element(tile.n1, tile.n2, first),
                        variance: want_variance.then(|| DMatrix::zeros(tile.n1, tile.n2)),
                    },
                    constant: true,
                });
            }
            let field = projected.predict(profile.mu_hat, profile.sigma2_hat, eta, want_variance);
            Ok(TileResult {
                tile: *tile,
                mu: profile.mu_hat,
                sigma2: profile.sigma2_hat,
                field,
                constant: false,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(DenoisedTiles {
        layout: layout.clone(),
        kernel1,
        kernel2,
        eta,
        calibration_tile: calibration,
        fit,
        tiles: results,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_1024() {
        let l = make_layout(1024, 1024, 100);
        assert_eq!(l.grid_shape(), (11, 11));
        assert!(l.row_sizes.iter().all(|&s| s == 93 || s == 94));
        assert_eq!(l.row_sizes.iter().sum::<usize>(), 1024);
    }

    #[test]
    fn layout_small_cases() {
        assert_eq!(make_layout(100, 100, 100).len(), 1);
        let l = make_layout(110, 40, 100);
        assert_eq!(l.row_sizes, vec![55, 55]);
        assert_eq!(l.col_sizes, vec![40]);
        let tiny = make_layout(10, 12, 100);
        assert_eq!(tiny.len(), 1);
        // 40 px at target 10 would give 4 tiles of 10; the floor of 16 caps it at 2
        assert_eq!(make_layout(40, 40, 10).row_sizes, vec![20, 20]);
    }

    #[test]
    fn tiles_partition() {
        let l = make_layout(203, 77, 30);
        let mut cover = DMatrix::<u8>::zeros(203, 77);
        for t in l.tiles() {
            assert!(t.n1 >= MIN_TILE_SIDE && t.n2 >= MIN_TILE_SIDE);
            for i in t.row..t.row + t.n1 {
                for j in t.col..t.col + t.n2 {
                    cover[(i, j)] += 1;
                }
            }
        }
        assert!(cover.iter().all(|&c| c == 1));
    }

    #[test]
    fn layout_json_roundtrip() {
        let l = make_layout(300, 250, 100);
        let s = serde_json::to_string(&l).unwrap();
        assert_eq!(serde_json::from_str::<TileLayout>(&s).unwrap(), l);
    }

    #[test]
    fn calibration_picks_structured_tile() {
        let mut img = DMatrix::from_element(40, 40, 0.2);
        for i in 20..40 {
            for j in 20..40 {
                img[(i, j)] = if (i + j) % 3 == 0 { 0.9 } else { 0.1 };
            }
        }
        let l = make_layout(40, 40, 20);
        assert_eq!(calibration_tile(&img, &l), 3);
    }
}
