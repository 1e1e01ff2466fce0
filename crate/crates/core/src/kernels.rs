//! Stationary one-dimensional correlation kernels and the per-axis
//! correlation matrices built from them.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelFamily {
    /// Matérn with roughness 5/2.
    #[default]
    Matern52,
    /// `exp(-d / γ)`.
    #[serde(alias = "exp")]
    Exponential,
}

impl KernelFamily {
    pub fn name(self) -> &'static str {
        match self {
            KernelFamily::Matern52 => "matern52",
            KernelFamily::Exponential => "exp",
        }
    }
}

impl std::str::FromStr for KernelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "matern52" | "matern" | "mat" => Ok(KernelFamily::Matern52),
            "exp" | "exponential" => Ok(KernelFamily::Exponential),
            other => Err(Error::Input(format!("unknown kernel family `{other}`"))),
        }
    }
}

impl std::fmt::Display for KernelFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A kernel family together with its range parameter γ (in pixel units).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub family: KernelFamily,
    pub range: f64,
}

impl KernelSpec {
    pub fn new(family: KernelFamily, range: f64) -> Result<Self> {
        if !(range.is_finite() && range > 0.0) {
            return Err(Error::Domain(format!("kernel range must be positive and finite, got {range}")));
        }
        Ok(Self { family, range })
    }

    pub fn matern52(range: f64) -> Result<Self> {
        Self::new(KernelFamily::Matern52, range)
    }

    pub fn exponential(range: f64) -> Result<Self> {
        Self::new(KernelFamily::Exponential, range)
    }

    /// Correlation at distance `d`. `K(0) = 1` and `K` decays strictly.
    pub fn eval(&self, d: f64) -> Result<f64> {
        if !(d >= 0.0) {
            return Err(Error::Domain(format!("kernel distance must be nonnegative, got {d}")));
        }
        Ok(self.eval_unchecked(d))
    }

    #[inline]
    pub(crate) fn eval_unchecked(&self, d: f64) -> f64 {
        match self.family {
            KernelFamily::Matern52 => {
                let s = 5f64.sqrt() * d / self.range;
                (1.0 + s + s * s / 3.0) * (-s).exp()
            }
            KernelFamily::Exponential => (-d / self.range).exp(),
        }
    }
}

/// Free function form of [`KernelSpec::eval`].
pub fn kernel_eval(spec: &KernelSpec, d: f64) -> Result<f64> {
    spec.eval(d)
}

/// Pixel coordinates along one image axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisGrid {
    coords: Vec<f64>,
}

impl AxisGrid {
    /// The integer lattice `1..=n`.
    pub fn lattice(n: usize) -> Self {
        Self {
            coords: (1..=n).map(|i| i as f64).collect(),
        }
    }

    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::Input("axis grid must have at least one coordinate".into()));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::Input("axis grid coordinates must be finite".into()));
        }
        if coords.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Input("axis grid coordinates must be strictly increasing".into()));
        }
        Ok(Self { coords })
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }
}

/// `R[i, i'] = K(|x_i - x_i'|)`: symmetric with unit diagonal.
pub fn correlation_matrix(spec: &KernelSpec, grid: &AxisGrid) -> DMatrix<f64> {
    let x = grid.coords();
    let n = x.len();
    let mut r = DMatrix::<f64>::identity(n, n);
    for j in 0..n {
        for i in (j + 1)..n {
            let v = spec.eval_unchecked((x[i] - x[j]).abs());
            r[(i, j)] = v;
            r[(j, i)] = v;
        }
    }
    r
}
