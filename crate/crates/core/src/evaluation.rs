//! Denoising and segmentation scores: RMSE, IoU, and AP(α) under
//! one-to-one greedy matching.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mask::{BinaryMask, LabelMask};

/// IoU thresholds reported by default.
pub const DEFAULT_AP_ALPHAS: [f64; 7] = [0.5, 0.55, 0.6, 0.65, 0.7, 0.75, 0.8];

pub fn rmse(estimate: &DMatrix<f64>, truth: &DMatrix<f64>) -> Result<f64> {
    if estimate.shape() != truth.shape() {
        return Err(Error::DimMismatch {
            expected: truth.shape(),
            got: estimate.shape(),
        });
    }
    if truth.is_empty() {
        return Err(Error::Input("cannot score an empty image".into()));
    }
    let sse: f64 = estimate.iter().zip(truth.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok((sse / truth.len() as f64).sqrt())
}

/// `|g ∩ p| / |g ∪ p|`; two empty sets score 1.
pub fn iou(g: &BinaryMask, p: &BinaryMask) -> Result<f64> {
    if g.shape() != p.shape() {
        return Err(Error::DimMismatch {
            expected: g.shape(),
            got: p.shape(),
        });
    }
    let (mut inter, mut union) = (0usize, 0usize);
    for (&a, &b) in g.0.iter().zip(p.0.iter()) {
        inter += usize::from(a && b);
        union += usize::from(a || b);
    }
    Ok(if union == 0 { 1.0 } else { inter as f64 / union as f64 })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchResult {
    pub alpha: f64,
    /// `(gt_label, pred_label, IoU)` with IoU ≥ α.
    pub pairs: Vec<(u32, u32, f64)>,
    pub unmatched_gt: Vec<u32>,
    pub unmatched_pred: Vec<u32>,
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
}

impl MatchResult {
    /// No objects on either side.
    pub fn is_vacuous(&self) -> bool {
        self.tp + self.fp + self.fn_ == 0
    }
}

/// One-to-one pairing of objects, independent of α.
#[derive(Debug, Clone)]
pub struct Matching {
    gt: Vec<u32>,
    pred: Vec<u32>,
    /// Greedy pairs in descending IoU order.
    pairs: Vec<(u32, u32, f64)>,
}

impl Matching {
    /// Pairs objects greedily by descending IoU; ties go to the lower
    /// `(gt, pred)` label pair.
    pub fn new(gt: &LabelMask, pred: &LabelMask) -> Result<Self> {
        gt.check_same_shape(pred)?;
        let mut area_g: BTreeMap<u32, usize> = BTreeMap::new();
        let mut area_p: BTreeMap<u32, usize> = BTreeMap::new();
        let mut overlap: BTreeMap<(u32, u32), usize> = BTreeMap::new();
        for (&g, &p) in gt.0.iter().zip(pred.0.iter()) {
            if g > 0 {
                *area_g.entry(g).or_default() += 1;
            }
            if p > 0 {
                *area_p.entry(p).or_default() += 1;
            }
            if g > 0 && p > 0 {
                *overlap.entry((g, p)).or_default() += 1;
            }
        }
        let mut candidates: Vec<(u32, u32, f64)> = overlap
            .iter()
            .map(|(&(g, p), &inter)| {
                let union = area_g[&g] + area_p[&p] - inter;
                (g, p, inter as f64 / union as f64)
            })
            .collect();
        candidates.sort_by(|a, b| b.2.total_cmp(&a.2).then((a.0, a.1).cmp(&(b.0, b.1))));
        let mut used_g = BTreeSet::new();
        let mut used_p = BTreeSet::new();
        let mut pairs = Vec::new();
        for (g, p, v) in candidates {
            if !used_g.contains(&g) && !used_p.contains(&p) {
                used_g.insert(g);
                used_p.insert(p);
                pairs.push((g, p, v));
            }
        }
        Ok(Self {
            gt: area_g.into_keys().collect(),
            pred: area_p.into_keys().collect(),
            pairs,
        })
    }

    pub fn at(&self, alpha: f64) -> MatchResult {
        let pairs: Vec<(u32, u32, f64)> = self.pairs.iter().copied().filter(|p| p.2 >= alpha).collect();
        let mg: BTreeSet<u32> = pairs.iter().map(|p| p.0).collect();
        let mp: BTreeSet<u32> = pairs.iter().map(|p| p.1).collect();
        let unmatched_gt: Vec<u32> = self.gt.iter().copied().filter(|g| !mg.contains(g)).collect();
        let unmatched_pred: Vec<u32> = self.pred.iter().copied().filter(|p| !mp.contains(p)).collect();
        MatchResult {
            alpha,
            tp: pairs.len(),
            fp: unmatched_pred.len(),
            fn_: unmatched_gt.len(),
            pairs,
            unmatched_gt,
            unmatched_pred,
        }
    }
}

pub fn match_masks(gt: &LabelMask, pred: &LabelMask, alpha: f64) -> Result<MatchResult> {
    Ok(Matching::new(gt, pred)?.at(alpha))
}

/// `TP / (TP + FP + FN)`; 1 when there are no objects at all.
pub fn average_precision(m: &MatchResult) -> f64 {
    if m.is_vacuous() {
        return 1.0;
    }
    m.tp as f64 / (m.tp + m.fp + m.fn_) as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ApPoint {
    pub alpha: f64,
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub ap: f64,
    pub vacuous: bool,
}

pub fn ap_curve(gt: &LabelMask, pred: &LabelMask, alphas: &[f64]) -> Result<Vec<ApPoint>> {
    let matching = Matching::new(gt, pred)?;
    Ok(alphas
        .iter()
        .map(|&alpha| {
            let m = matching.at(alpha);
            ApPoint {
                alpha,
                tp: m.tp,
                fp: m.fp,
                fn_: m.fn_,
                ap: average_precision(&m),
                vacuous: m.is_vacuous(),
            }
        })
        .collect())
}

/// CSV rows `image,alpha,TP,FP,FN,AP`.
pub fn write_ap_csv<W: Write>(out: W, rows: &[(String, Vec<ApPoint>)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["image", "alpha", "TP", "FP", "FN", "AP"])?;
    for (name, curve) in rows {
        for p in curve {
            w.write_record([
                name.clone(),
                crate::io::fmt_f64(p.alpha),
                p.tp.to_string(),
                p.fp.to_string(),
                p.fn_.to_string(),
                crate::io::fmt_f64(p.ap),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn block(n1: usize, n2: usize, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> BinaryMask {
        BinaryMask::from_fn(n1, n2, |i, j| rows.contains(&i) && cols.contains(&j))
    }

    fn labels_from(blocks: &[(std::ops::Range<usize>, std::ops::Range<usize>)], n1: usize, n2: usize) -> LabelMask {
        let mut m = DMatrix::<u32>::zeros(n1, n2);
        for (k, (r, c)) in blocks.iter().enumerate() {
            for i in r.clone() {
                for j in c.clone() {
                    m[(i, j)] = k as u32 + 1;
                }
            }
        }
        LabelMask(m)
    }

    #[test]
    fn rmse_cases() {
        let t = DMatrix::from_row_slice(3, 3, &[0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]);
        assert_eq!(rmse(&t, &t).unwrap(), 0.0);
        assert!((rmse(&t.add_scalar(0.5), &t).unwrap() - 0.5).abs() < 1e-15);
        let e = DMatrix::from_row_slice(3, 3, &[0.0, 0.2, 0.5, 0.4, 0.1, 0.6, 1.0, 0.8, 0.9]);
        // squared errors .01, 0, .04, 0, .16, 0, .09, 0, 0 -> .30 / 9
        assert!((rmse(&e, &t).unwrap() - (0.30f64 / 9.0).sqrt()).abs() < 1e-15);
        assert!(rmse(&e, &DMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn iou_cases() {
        let a = block(5, 5, 1..3, 1..3);
        let b = block(5, 5, 1..3, 2..4);
        assert_eq!(iou(&a, &a).unwrap(), 1.0);
        assert_eq!(iou(&a, &block(5, 5, 3..5, 3..5)).unwrap(), 0.0);
        assert!((iou(&a, &b).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(iou(&a, &b).unwrap(), iou(&b, &a).unwrap());
        assert_eq!(iou(&BinaryMask::empty(3, 3), &BinaryMask::empty(3, 3)).unwrap(), 1.0);
    }

    #[test]
    fn identical_masks_match_fully() {
        let g = labels_from(&[(0..3, 0..3), (5..9, 5..8), (0..2, 7..10)], 10, 10);
        let m = match_masks(&g, &g, 0.5).unwrap();
        assert_eq!((m.tp, m.fp, m.fn_), (3, 0, 0));
        assert!(ap_curve(&g, &g, &DEFAULT_AP_ALPHAS).unwrap().iter().all(|p| p.ap == 1.0));
    }

    #[test]
    fn single_pair_at_iou_07() {
        // gt 10 px, pred 7 px inside it: IoU 0.7
        let g = labels_from(&[(0..1, 0..10)], 3, 12);
        let p = labels_from(&[(0..1, 0..7)], 3, 12);
        let hi = match_masks(&g, &p, 0.5).unwrap();
        assert!((hi.pairs[0].2 - 0.7).abs() < 1e-15);
        assert_eq!((hi.tp, hi.fp, hi.fn_), (1, 0, 0));
        let lo = match_masks(&g, &p, 0.8).unwrap();
        assert_eq!((lo.tp, lo.fp, lo.fn_), (0, 1, 1));
        assert_eq!(average_precision(&lo), 0.0);
    }

    #[test]
    fn two_gt_one_pred() {
        // pred covers 9 of gt-1's 10 pixels: IoU 0.9
        let g = labels_from(&[(0..1, 0..10), (2..3, 0..5)], 4, 12);
        let p = labels_from(&[(0..1, 0..9)], 4, 12);
        let m = match_masks(&g, &p, 0.5).unwrap();
        assert!((m.pairs[0].2 - 0.9).abs() < 1e-15);
        assert_eq!((m.tp, m.fp, m.fn_), (1, 0, 1));
        assert_eq!(average_precision(&m), 0.5);
        assert_eq!(m.unmatched_gt, vec![2]);
    }

    #[test]
    fn ap_arithmetic() {
        let mk = |tp, fp, fn_| MatchResult {
            alpha: 0.5,
            pairs: vec![],
            unmatched_gt: vec![],
            unmatched_pred: vec![],
            tp,
            fp,
            fn_,
        };
        assert_eq!(average_precision(&mk(1, 0, 0)), 1.0);
        assert_eq!(average_precision(&mk(0, 1, 1)), 0.0);
        assert_eq!(average_precision(&mk(1, 0, 1)), 0.5);
        assert_eq!(average_precision(&mk(0, 0, 0)), 1.0);
        assert!(mk(0, 0, 0).is_vacuous());
    }

    #[test]
    fn disjoint_predictions_score_zero() {
        let g = labels_from(&[(0..3, 0..3)], 10, 10);
        let p = labels_from(&[(6..9, 6..9)], 10, 10);
        assert!(ap_curve(&g, &p, &DEFAULT_AP_ALPHAS).unwrap().iter().all(|p| p.ap == 0.0));
    }
}
