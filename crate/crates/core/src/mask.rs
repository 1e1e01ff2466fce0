//! Binary and labelled masks over the pixel lattice.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Foreground (`true`) / background (`false`) per pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask(pub DMatrix<bool>);

impl BinaryMask {
    pub fn empty(n1: usize, n2: usize) -> Self {
        Self(DMatrix::from_element(n1, n2, false))
    }

    pub fn from_fn(n1: usize, n2: usize, f: impl FnMut(usize, usize) -> bool) -> Self {
        Self(DMatrix::from_fn(n1, n2, f))
    }

    pub fn shape(&self) -> (usize, usize) {
        self.0.shape()
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.0[(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: bool) {
        self.0[(i, j)] = v;
    }

    pub fn count(&self) -> usize {
        self.0.iter().filter(|&&v| v).count()
    }

    /// 0/1 matrix view.
    pub fn to_u8(&self) -> DMatrix<u8> {
        self.0.map(u8::from)
    }
}

/// `0` is background; objects carry labels `1..=K`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMask(pub DMatrix<u32>);

impl LabelMask {
    pub fn empty(n1: usize, n2: usize) -> Self {
        Self(DMatrix::zeros(n1, n2))
    }

    pub fn shape(&self) -> (usize, usize) {
        self.0.shape()
    }

    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.0[(i, j)]
    }

    pub fn max_label(&self) -> u32 {
        self.0.iter().copied().max().unwrap_or(0)
    }

    /// Number of distinct nonzero labels.
    pub fn num_objects(&self) -> usize {
        let mut seen: Vec<u32> = self.0.iter().copied().filter(|&l| l > 0).collect();
        seen.sort_unstable();
        seen.dedup();
        seen.len()
    }

    pub fn foreground(&self) -> BinaryMask {
        BinaryMask(self.0.map(|l| l > 0))
    }

    /// Pixel count per label, indexed by label (entry 0 is background).
    pub fn areas(&self) -> Vec<usize> {
        let mut areas = vec![0usize; self.max_label() as usize + 1];
        for &l in self.0.iter() {
            areas[l as usize] += 1;
        }
        areas
    }

    /// Renumber labels to `1..=K` in order of first appearance in raster
    /// (row-major) order.
    pub fn relabel_sequential(&self) -> LabelMask {
        let (n1, n2) = self.shape();
        let mut map = std::collections::HashMap::new();
        let mut out = DMatrix::zeros(n1, n2);
        for i in 0..n1 {
            for j in 0..n2 {
                let l = self.0[(i, j)];
                if l == 0 {
                    continue;
                }
                let next = map.len() as u32 + 1;
                out[(i, j)] = *map.entry(l).or_insert(next);
            }
        }
        LabelMask(out)
    }

    pub fn check_same_shape(&self, other: &LabelMask) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::DimMismatch {
                expected: self.shape(),
                got: other.shape(),
            });
        }
        Ok(())
    }
}

/// Visit the 8-neighbours of `(i, j)` inside an `n1 × n2` grid.
#[inline]
pub(crate) fn for_each_neighbor8(i: usize, j: usize, n1: usize, n2: usize, mut f: impl FnMut(usize, usize)) {
    let i0 = i.saturating_sub(1);
    let j0 = j.saturating_sub(1);
    let i1 = (i + 1).min(n1 - 1);
    let j1 = (j + 1).min(n2 - 1);
    for a in i0..=i1 {
        for b in j0..=j1 {
            if a != i || b != j {
                f(a, b);
            }
        }
    }
}
