//! Exact Euclidean distance transform (separable lower-envelope method).

use nalgebra::DMatrix;

use crate::mask::BinaryMask;

/// Distance from each foreground pixel to the nearest background pixel.
/// Pixels outside the image count as background.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMap(pub DMatrix<f64>);

impl DistanceMap {
    pub fn shape(&self) -> (usize, usize) {
        self.0.shape()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(0.0, f64::max)
    }
}

/// Squared distance transform of one line: `d[q] = min_p (q - p)² + f[p]`
/// over finite `f[p]`.
fn envelope_1d(f: &[f64], d: &mut [f64], v: &mut Vec<usize>, z: &mut Vec<f64>) {
    v.clear();
    z.clear();
    for (q, &fq) in f.iter().enumerate() {
        if !fq.is_finite() {
            continue;
        }
        let qf = q as f64;
        while let Some(&p) = v.last() {
            let pf = p as f64;
            let s = ((fq + qf * qf) - (f[p] + pf * pf)) / (2.0 * (qf - pf));
            if s <= *z.last().unwrap() {
                v.pop();
                z.pop();
            } else {
                v.push(q);
                z.push(s);
                break;
            }
        }
        if v.is_empty() {
            v.push(q);
            z.push(f64::NEG_INFINITY);
        }
    }
    if v.is_empty() {
        d.iter_mut().for_each(|x| *x = f64::INFINITY);
        return;
    }
    let mut k = 0;
    for (q, out) in d.iter_mut().enumerate() {
        let qf = q as f64;
        while k + 1 < v.len() && z[k + 1] < qf {
            k += 1;
        }
        let p = v[k];
        let dp = qf - p as f64;
        *out = dp * dp + f[p];
    }
}

/// Squared Euclidean distances as exact integers stored in `f64`.
pub fn squared_distance_transform(mask: &BinaryMask) -> DMatrix<f64> {
    let (n1, n2) = mask.shape();
    let (p1, p2) = (n1 + 2, n2 + 2);
    // pad with a one-pixel background frame
    let mut g = DMatrix::from_fn(p1, p2, |i, j| {
        if i == 0 || j == 0 || i == p1 - 1 || j == p2 - 1 || !mask.get(i - 1, j - 1) {
            0.0
        } else {
            f64::INFINITY
        }
    });
    let (mut v, mut z) = (Vec::new(), Vec::new());
    let mut line = vec![0.0; p1.max(p2)];
    let mut out = vec![0.0; p1.max(p2)];
    for j in 0..p2 {
        line[..p1].copy_from_slice(g.column(j).as_slice());
        envelope_1d(&line[..p1], &mut out[..p1], &mut v, &mut z);
        g.column_mut(j).copy_from_slice(&out[..p1]);
    }
    for i in 0..p1 {
        for j in 0..p2 {
            line[j] = g[(i, j)];
        }
        envelope_1d(&line[..p2], &mut out[..p2], &mut v, &mut z);
        for j in 0..p2 {
            g[(i, j)] = out[j];
        }
    }
    g.view((1, 1), (n1, n2)).clone_owned()
}

pub fn distance_transform(mask: &BinaryMask) -> DistanceMap {
    DistanceMap(squared_distance_transform(mask).map(f64::sqrt))
}
