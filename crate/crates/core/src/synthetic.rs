//! Ground-truth generators: Branin surface, 1-D diffusion field, additive
//! Gaussian noise, and cell-like phantoms with exact labels.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mask::LabelMask;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BraninParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub r: f64,
    pub s: f64,
    pub t: f64,
}

impl Default for BraninParams {
    fn default() -> Self {
        Self {
            a: 1.0,
            b: 5.1 / (4.0 * PI * PI),
            c: 5.0 / PI,
            r: 6.0,
            s: 10.0,
            t: 1.0 / (8.0 * PI),
        }
    }
}

impl BraninParams {
    pub fn eval(&self, x1: f64, x2: f64) -> f64 {
        let q = x2 - self.b * x1 * x1 + self.c * x1 - self.r;
        self.a * q * q + self.s * (1.0 - self.t) * x1.cos() + self.s
    }
}

/// Branin on the uniform `n1 × n2` grid over `[-5, 10] × [0, 15]`.
pub fn branin_field(params: &BraninParams, n1: usize, n2: usize) -> Result<DMatrix<f64>> {
    if n1 < 2 || n2 < 2 {
        return Err(Error::Input("Branin grid needs at least 2 points per axis".into()));
    }
    Ok(DMatrix::from_fn(n1, n2, |i, j| {
        let x1 = -5.0 + 15.0 * i as f64 / (n1 - 1) as f64;
        let x2 = 15.0 * j as f64 / (n2 - 1) as f64;
        params.eval(x1, x2)
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiffusionConfig {
    pub diffusivity: f64,
    /// Spatial points on `[0, length]`.
    pub nx: usize,
    /// Output times on `[0, t_end]`, both ends included.
    pub nt: usize,
    pub length: f64,
    pub t_end: f64,
    /// Fixed concentration at `x = 0`.
    pub boundary: f64,
    /// Largest `D Δt / Δx²` allowed for the internal sub-steps.
    pub max_courant: f64,
}

impl Default for DiffusionConfig {
    fn default() -> Self {
        Self {
            diffusivity: 1.0,
            nx: 200,
            nt: 200,
            length: 1.0,
            t_end: 0.2,
            boundary: 1.0,
            max_courant: 0.4,
        }
    }
}

/// Explicit finite-difference solution of `∂f/∂t = D ∂²f/∂x²` with
/// `f(x, 0) = 0`, `f(0, t) = boundary`, and zero flux at `x = length`.
/// Rows are positions, columns are output times.
pub fn diffusion_field(config: &DiffusionConfig) -> Result<DMatrix<f64>> {
    let DiffusionConfig {
        diffusivity,
        nx,
        nt,
        length,
        t_end,
        boundary,
        max_courant,
    } = *config;
    if nx < 3 || nt < 2 || !(diffusivity > 0.0) || !(length > 0.0) || !(t_end > 0.0) {
        return Err(Error::Input("diffusion config needs nx >= 3, nt >= 2 and positive D, length, t_end".into()));
    }
    if !(max_courant > 0.0 && max_courant <= 0.5) {
        return Err(Error::Input("explicit scheme needs 0 < D dt/dx² <= 0.5".into()));
    }
    let dx = length / (nx - 1) as f64;
    let dt_out = t_end / (nt - 1) as f64;
    let substeps = (diffusivity * dt_out / (max_courant * dx * dx)).ceil().max(1.0) as usize;
    let lambda = diffusivity * dt_out / substeps as f64 / (dx * dx);

    let mut out = DMatrix::zeros(nx, nt);
    let mut u = vec![0.0; nx];
    u[0] = boundary;
    let mut next = u.clone();
    out.column_mut(0).copy_from_slice(&u);
    for k in 1..nt {
        for _ in 0..substeps {
            next[0] = boundary;
            for i in 1..nx - 1 {
                next[i] = u[i] + lambda * (u[i - 1] - 2.0 * u[i] + u[i + 1]);
            }
            // mirror ghost node for the no-flux end
            next[nx - 1] = u[nx - 1] + 2.0 * lambda * (u[nx - 2] - u[nx - 1]);
            std::mem::swap(&mut u, &mut next);
        }
        out.column_mut(k).copy_from_slice(&u);
    }
    Ok(out)
}

/// `field + ε` with `ε` iid `N(0, σ0²)`, reproducible from `seed`.
pub fn add_noise(field: &DMatrix<f64>, sigma0: f64, seed: u64) -> Result<DMatrix<f64>> {
    if !(sigma0 >= 0.0) || !sigma0.is_finite() {
        return Err(Error::Input(format!("noise level must be nonnegative, got {sigma0}")));
    }
    if sigma0 == 0.0 {
        return Ok(field.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, sigma0).map_err(|e| Error::Input(e.to_string()))?;
    Ok(field.map(|v| v + normal.sample(&mut rng)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ObjectShape {
    /// Uniform-intensity disc.
    #[default]
    Disc,
    /// Lobed outline with intensity falling off toward the rim.
    Blob,
}

impl std::str::FromStr for ObjectShape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "disc" => Ok(ObjectShape::Disc),
            "blob" => Ok(ObjectShape::Blob),
            other => Err(Error::Input(format!("unknown object shape `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhantomConfig {
    pub n1: usize,
    pub n2: usize,
    pub n_objects: usize,
    pub shape: ObjectShape,
    pub seed: u64,
    /// Nominal object radius range.
    pub radius: (f64, f64),
    pub object_intensity: (f64, f64),
    pub background: (f64, f64),
    /// Added to the background, growing linearly from left to right edge.
    pub background_gradient: f64,
    /// Minimum gap between object outlines; negative values allow overlaps.
    pub min_gap: f64,
    /// Minimum distance from an object outline to the image border.
    pub margin: f64,
}

impl PhantomConfig {
    pub fn new(n1: usize, n2: usize, n_objects: usize, shape: ObjectShape, seed: u64) -> Self {
        Self {
            n1,
            n2,
            n_objects,
            shape,
            seed,
            radius: (6.0, 10.0),
            object_intensity: (0.7, 1.0),
            background: (0.05, 0.15),
            background_gradient: 0.0,
            min_gap: 4.0,
            margin: 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhantomObject {
    pub center: (f64, f64),
    pub radius: f64,
    pub intensity: f64,
    /// Relative amplitude and phase of the 2- and 3-lobe outline terms.
    pub lobes: [(f64, f64); 2],
}

impl PhantomObject {
    pub fn disc(center: (f64, f64), radius: f64, intensity: f64) -> Self {
        Self {
            center,
            radius,
            intensity,
            lobes: [(0.0, 0.0); 2],
        }
    }

    /// Largest distance from the centre to the outline.
    pub fn extent(&self) -> f64 {
        self.radius * (1.0 + self.lobes[0].0 + self.lobes[1].0)
    }

    /// Outline radius in direction `theta`.
    fn rim(&self, theta: f64) -> f64 {
        let [(a2, p2), (a3, p3)] = self.lobes;
        self.radius * (1.0 + a2 * (2.0 * theta + p2).cos() + a3 * (3.0 * theta + p3).cos())
    }

    /// `rho / rim` at a pixel (inside iff `<= 1`).
    fn scaled_radius(&self, i: f64, j: f64) -> f64 {
        let (di, dj) = (i - self.center.0, j - self.center.1);
        let rho = (di * di + dj * dj).sqrt();
        if rho == 0.0 {
            0.0
        } else {
            rho / self.rim(dj.atan2(di))
        }
    }
}

#[derive(Debug, Clone)]
pub struct Phantom {
    pub image: DMatrix<f64>,
    pub labels: LabelMask,
    pub objects: Vec<PhantomObject>,
}

/// Rasterises objects over a background. Pixels claimed by several objects
/// go to the one with the smallest scaled radius.
pub fn render_objects(
    n1: usize,
    n2: usize,
    objects: &[PhantomObject],
    shape: ObjectShape,
    background: impl Fn(usize, usize) -> f64,
) -> Phantom {
    let mut image = DMatrix::from_fn(n1, n2, &background);
    let mut labels = DMatrix::<u32>::zeros(n1, n2);
    for i in 0..n1 {
        for j in 0..n2 {
            let mut owner: Option<(usize, f64)> = None;
            for (k, obj) in objects.iter().enumerate() {
                let s = obj.scaled_radius(i as f64, j as f64);
                if s <= 1.0 && owner.is_none_or(|(_, best)| s < best) {
                    owner = Some((k, s));
                }
            }
            if let Some((k, s)) = owner {
                let obj = &objects[k];
                let v = match shape {
                    ObjectShape::Disc => obj.intensity,
                    ObjectShape::Blob => obj.intensity * (1.0 - 0.25 * s * s),
                };
                image[(i, j)] = v;
                labels[(i, j)] = k as u32 + 1;
            }
        }
    }
    Phantom {
        image,
        labels: LabelMask(labels).relabel_sequential(),
        objects: objects.to_vec(),
    }
}

/// Bright objects on a dim background with exact ground-truth labels.
pub fn phantom_cells(config: &PhantomConfig) -> Result<Phantom> {
    const MAX_ATTEMPTS: usize = 10_000;
    let PhantomConfig { n1, n2, n_objects, shape, seed, .. } = *config;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bg = rng.random_range(config.background.0..=config.background.1);

    let mut objects: Vec<PhantomObject> = Vec::with_capacity(n_objects);
    let mut attempts = 0;
    while objects.len() < n_objects {
        attempts += 1;
        if attempts > MAX_ATTEMPTS {
            return Err(Error::Placement { attempts: MAX_ATTEMPTS });
        }
        let radius = rng.random_range(config.radius.0..=config.radius.1);
        let lobes = match shape {
            ObjectShape::Disc => [(0.0, 0.0); 2],
            ObjectShape::Blob => [
                (rng.random_range(0.0..0.15), rng.random_range(0.0..2.0 * PI)),
                (rng.random_range(0.0..0.1), rng.random_range(0.0..2.0 * PI)),
            ],
        };
        let mut obj = PhantomObject {
            center: (0.0, 0.0),
            radius,
            intensity: rng.random_range(config.object_intensity.0..=config.object_intensity.1),
            lobes,
        };
        let reach = obj.extent() + config.margin;
        let (lo_i, hi_i) = (reach, n1 as f64 - 1.0 - reach);
        let (lo_j, hi_j) = (reach, n2 as f64 - 1.0 - reach);
        if lo_i > hi_i || lo_j > hi_j {
            continue;
        }
        obj.center = (rng.random_range(lo_i..=hi_i), rng.random_range(lo_j..=hi_j));
        let clear = objects.iter().all(|o| {
            let d = ((o.center.0 - obj.center.0).powi(2) + (o.center.1 - obj.center.1).powi(2)).sqrt();
            d >= o.extent() + obj.extent() + config.min_gap
        });
        if clear {
            objects.push(obj);
        }
    }
    let grad = config.background_gradient;
    let denom = (n2.max(2) - 1) as f64;
    Ok(render_objects(n1, n2, &objects, shape, |_, j| bg + grad * j as f64 / denom))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn branin_minimisers() {
        let p = BraninParams::default();
        let a = p.eval(PI, 2.275);
        assert!((a - 0.397887).abs() < 1e-6, "{a}");
        assert!((p.eval(-PI, 12.275) - a).abs() < 1e-6);
        assert!((p.eval(9.42478, 2.475) - a).abs() < 1e-5);
    }

    #[test]
    fn branin_degenerate_params() {
        let p = BraninParams {
            a: 0.0,
            t: 1.0,
            ..BraninParams::default()
        };
        let f = branin_field(&p, 7, 5).unwrap();
        assert!(f.iter().all(|&v| v == p.s));
    }

    #[test]
    fn branin_grid_corners() {
        let p = BraninParams::default();
        let f = branin_field(&p, 11, 6).unwrap();
        assert_eq!(f[(0, 0)], p.eval(-5.0, 0.0));
        assert_eq!(f[(10, 5)], p.eval(10.0, 15.0));
        assert!(f.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn diffusion_initial_and_monotone() {
        let f = diffusion_field(&DiffusionConfig::default()).unwrap();
        assert_eq!(f.shape(), (200, 200));
        assert_eq!(f[(0, 0)], 1.0);
        assert!(f.column(0).iter().skip(1).all(|&v| v == 0.0));
        for t in 0..200 {
            let col = f.column(t);
            assert!(col.iter().zip(col.iter().skip(1)).all(|(a, b)| b <= a));
        }
        assert!(f.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn noise_properties() {
        let clean = DMatrix::from_element(100, 120, 0.3);
        assert_eq!(add_noise(&clean, 0.0, 1).unwrap(), clean);
        let a = add_noise(&clean, 0.2, 42).unwrap();
        let b = add_noise(&clean, 0.2, 42).unwrap();
        assert_eq!(a, b);
        let r: Vec<f64> = (a - &clean).iter().copied().collect();
        let mean = r.iter().sum::<f64>() / r.len() as f64;
        let var = r.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (r.len() - 1) as f64;
        assert!((var / 0.04 - 1.0).abs() < 0.1, "{var}");
        assert!(add_noise(&clean, -1.0, 0).is_err());
    }

    #[test]
    fn phantom_counts() {
        let empty = phantom_cells(&PhantomConfig::new(50, 50, 0, ObjectShape::Disc, 1)).unwrap();
        assert_eq!(empty.labels.max_label(), 0);
        for shape in [ObjectShape::Disc, ObjectShape::Blob] {
            let p = phantom_cells(&PhantomConfig::new(128, 128, 12, shape, 7)).unwrap();
            assert_eq!(p.labels.max_label(), 12);
            assert_eq!(p.labels.num_objects(), 12);
            assert!(p.image.iter().all(|&v| (0.0..=1.0).contains(&v)));
        }
    }

    #[test]
    fn phantom_infeasible() {
        let cfg = PhantomConfig::new(30, 30, 20, ObjectShape::Disc, 3);
        assert!(matches!(phantom_cells(&cfg), Err(Error::Placement { .. })));
    }

    #[test]
    fn phantom_is_seeded() {
        let cfg = PhantomConfig::new(64, 80, 5, ObjectShape::Blob, 11);
        let a = phantom_cells(&cfg).unwrap();
        let b = phantom_cells(&cfg).unwrap();
        assert_eq!(a.image, b.image);
        assert_eq!(a.labels, b.labels);
    }
}
