use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::KernelFamily;
use crate::segmentation::{SizeFilter, DEFAULT_MERGE_TOLERANCE};
use crate::thresholding::{DEFAULT_GRID_SIZE, DEFAULT_STABILIZATION};
use crate::tiling::DEFAULT_TILE_SIDE;

/// Every knob of the segmentation pipeline. Loaded from a TOML key/value
/// file; command-line flags override file values, which override defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub kernel: KernelFamily,
    pub tile_side: usize,
    /// Number of thresholds on `[0, 1]`.
    pub alpha_grid: usize,
    /// Stabilisation tolerance as a fraction of the spread of `Δc*`.
    pub stabilization: f64,
    pub interior_fraction: f64,
    pub boundary_fraction: f64,
    /// Neighbourhood used for components and flooding; only 8 is supported.
    pub connectivity: u8,
    pub merge_tolerance: f64,
    /// A tile is re-thresholded when its object count exceeds this multiple
    /// of the median tile count.
    pub rethreshold_factor: f64,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let sf = SizeFilter::default();
        Self {
            kernel: KernelFamily::Matern52,
            tile_side: DEFAULT_TILE_SIDE,
            alpha_grid: DEFAULT_GRID_SIZE,
            stabilization: DEFAULT_STABILIZATION,
            interior_fraction: sf.interior_fraction,
            boundary_fraction: sf.boundary_fraction,
            connectivity: 8,
            merge_tolerance: DEFAULT_MERGE_TOLERANCE,
            rethreshold_factor: 3.0,
            seed: 0,
        }
    }
}

impl PipelineConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn size_filter(&self) -> SizeFilter {
        SizeFilter {
            interior_fraction: self.interior_fraction,
            boundary_fraction: self.boundary_fraction,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let frac = |v: f64| v > 0.0 && v < 1.0;
        if self.tile_side == 0 {
            return Err(Error::Config("tile_side must be positive".into()));
        }
        if self.alpha_grid < 10 {
            return Err(Error::Config("alpha_grid must be at least 10".into()));
        }
        if !(self.stabilization > 0.0) || !(self.merge_tolerance > 0.0) || !(self.rethreshold_factor > 0.0) {
            return Err(Error::Config("stabilization, merge_tolerance and rethreshold_factor must be positive".into()));
        }
        if !frac(self.interior_fraction) || !frac(self.boundary_fraction) {
            return Err(Error::Config("size-filter fractions must lie in (0, 1)".into()));
        }
        if self.connectivity != 8 {
            return Err(Error::Config(format!("connectivity {} unsupported; only 8", self.connectivity)));
        }
        Ok(())
    }
}
