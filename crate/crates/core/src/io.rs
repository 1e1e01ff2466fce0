//! Image and mask files, CSV matrices, and JSON object summaries.

use std::io::Write;
use std::path::Path;

use image::{DynamicImage, ImageBuffer, Luma};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mask::LabelMask;
use crate::segmentation::touches_border;

/// 17 significant digits, so values round-trip exactly through text.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn format_err(path: &Path, msg: impl Into<String>) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        msg: msg.into(),
    }
}

/// Grayscale intensities in `[0, 1]`: 8- and 16-bit values are divided by
/// the bit-depth maximum; colour images use the unweighted channel mean.
pub fn load_image(path: &Path) -> Result<DMatrix<f64>> {
    let img = image::ImageReader::open(path)?
        .with_guessed_format()?
        .decode()
        .map_err(|e| format_err(path, format!("cannot decode image: {e}")))?;
    image_to_matrix(&img).ok_or_else(|| format_err(path, format!("unsupported pixel format {:?}", img.color())))
}

pub fn image_to_matrix(img: &DynamicImage) -> Option<DMatrix<f64>> {
    let (w, h) = (img.width() as usize, img.height() as usize);
    fn mean_of<P, const N: usize>(px: &[P], scale: f64) -> f64
    where
        P: Copy + Into<f64>,
    {
        px[..N].iter().map(|&c| c.into()).sum::<f64>() / (N as f64 * scale)
    }
    let m = match img {
        DynamicImage::ImageLuma8(b) => DMatrix::from_fn(h, w, |i, j| b.get_pixel(j as u32, i as u32).0[0] as f64 / 255.0),
        DynamicImage::ImageLumaA8(b) => DMatrix::from_fn(h, w, |i, j| b.get_pixel(j as u32, i as u32).0[0] as f64 / 255.0),
        DynamicImage::ImageLuma16(b) => DMatrix::from_fn(h, w, |i, j| b.get_pixel(j as u32, i as u32).0[0] as f64 / 65535.0),
        DynamicImage::ImageLumaA16(b) => DMatrix::from_fn(h, w, |i, j| b.get_pixel(j as u32, i as u32).0[0] as f64 / 65535.0),
        DynamicImage::ImageRgb8(b) => DMatrix::from_fn(h, w, |i, j| mean_of::<u8, 3>(&b.get_pixel(j as u32, i as u32).0, 255.0)),
        DynamicImage::ImageRgba8(b) => DMatrix::from_fn(h, w, |i, j| mean_of::<u8, 3>(&b.get_pixel(j as u32, i as u32).0, 255.0)),
        DynamicImage::ImageRgb16(b) => DMatrix::from_fn(h, w, |i, j| mean_of::<u16, 3>(&b.get_pixel(j as u32, i as u32).0, 65535.0)),
        DynamicImage::ImageRgba16(b) => DMatrix::from_fn(h, w, |i, j| mean_of::<u16, 3>(&b.get_pixel(j as u32, i as u32).0, 65535.0)),
        DynamicImage::ImageRgb32F(b) => DMatrix::from_fn(h, w, |i, j| mean_of::<f32, 3>(&b.get_pixel(j as u32, i as u32).0, 1.0)),
        DynamicImage::ImageRgba32F(b) => DMatrix::from_fn(h, w, |i, j| mean_of::<f32, 3>(&b.get_pixel(j as u32, i as u32).0, 1.0)),
        _ => return None,
    };
    Some(m)
}

/// Writes a 16-bit grayscale PNG of `values` clamped to `[0, 1]`.
pub fn save_gray16(values: &DMatrix<f64>, path: &Path) -> Result<()> {
    let (h, w) = values.shape();
    let buf: ImageBuffer<Luma<u16>, Vec<u16>> = ImageBuffer::from_fn(w as u32, h as u32, |x, y| {
        let v = values[(y as usize, x as usize)].clamp(0.0, 1.0);
        Luma([(v * 65535.0).round() as u16])
    });
    buf.save(path)?;
    Ok(())
}

/// 16-bit PNG where the pixel value is the label.
pub fn save_label_mask(mask: &LabelMask, path: &Path) -> Result<()> {
    let max = mask.max_label();
    if max > u16::MAX as u32 {
        return Err(Error::LabelOverflow(max));
    }
    let (h, w) = mask.shape();
    let buf: ImageBuffer<Luma<u16>, Vec<u16>> =
        ImageBuffer::from_fn(w as u32, h as u32, |x, y| Luma([mask.get(y as usize, x as usize) as u16]));
    buf.save_with_format(path, image::ImageFormat::Png)?;
    Ok(())
}

pub fn load_label_mask(path: &Path) -> Result<LabelMask> {
    let img = image::ImageReader::open(path)?
        .with_guessed_format()?
        .decode()
        .map_err(|e| format_err(path, format!("cannot decode mask: {e}")))?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let m = match img {
        DynamicImage::ImageLuma16(b) => DMatrix::from_fn(h, w, |i, j| b.get_pixel(j as u32, i as u32).0[0] as u32),
        DynamicImage::ImageLuma8(b) => DMatrix::from_fn(h, w, |i, j| b.get_pixel(j as u32, i as u32).0[0] as u32),
        other => return Err(format_err(path, format!("label masks must be 8/16-bit grayscale, got {:?}", other.color()))),
    };
    Ok(LabelMask(m))
}

/// Dense matrix as CSV, one image row per line.
pub fn write_matrix_csv<W: Write>(out: W, m: &DMatrix<f64>) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    for i in 0..m.nrows() {
        w.write_record(m.row(i).iter().map(|&v| fmt_f64(v)))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_matrix_csv(path: &Path) -> Result<DMatrix<f64>> {
    let mut r = csv::ReaderBuilder::new().has_headers(false).from_path(path)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|s| s.trim().parse::<f64>().map_err(|e| format_err(path, format!("bad number `{s}`: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    let n2 = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != n2) {
        return Err(format_err(path, "ragged matrix"));
    }
    Ok(DMatrix::from_fn(rows.len(), n2, |i, j| rows[i][j]))
}

/// Reads `.csv` matrices verbatim and anything else as an image.
pub fn load_field(path: &Path) -> Result<DMatrix<f64>> {
    match path.extension().and_then(|e| e.to_str()) {
        Some(ext) if ext.eq_ignore_ascii_case("csv") => read_matrix_csv(path),
        _ => load_image(path),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectSummary {
    pub label: u32,
    pub pixels: usize,
    /// `(row, col)`.
    pub centroid: (f64, f64),
    /// `(row_min, col_min, row_max, col_max)`, inclusive.
    pub bbox: (usize, usize, usize, usize),
    pub touches_border: bool,
}

pub fn object_summaries(mask: &LabelMask) -> Vec<ObjectSummary> {
    let k = mask.max_label() as usize;
    let border = touches_border(mask);
    let mut acc: Vec<Option<ObjectSummary>> = vec![None; k + 1];
    let (n1, n2) = mask.shape();
    for i in 0..n1 {
        for j in 0..n2 {
            let l = mask.get(i, j) as usize;
            if l == 0 {
                continue;
            }
            let s = acc[l].get_or_insert(ObjectSummary {
                label: l as u32,
                pixels: 0,
                centroid: (0.0, 0.0),
                bbox: (i, j, i, j),
                touches_border: border[l],
            });
            s.pixels += 1;
            s.centroid.0 += i as f64;
            s.centroid.1 += j as f64;
            s.bbox = (s.bbox.0.min(i), s.bbox.1.min(j), s.bbox.2.max(i), s.bbox.3.max(j));
        }
    }
    acc.into_iter()
        .flatten()
        .map(|mut s| {
            s.centroid.0 /= s.pixels as f64;
            s.centroid.1 /= s.pixels as f64;
            s
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summaries() {
        let m = LabelMask(DMatrix::from_row_slice(3, 4, &[1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 2, 0]));
        let mut m2 = m.clone();
        m2.0[(1, 2)] = 2;
        let s = object_summaries(&m2);
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].pixels, 2);
        assert_eq!(s[0].centroid, (0.0, 0.5));
        assert!(s[0].touches_border);
        assert_eq!(s[1].bbox, (1, 2, 2, 2));
    }

    #[test]
    fn f64_text_roundtrip() {
        for v in [0.1, 1.0 / 3.0, 1e-300, -2.5e10, std::f64::consts::PI] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
        }
    }
}
