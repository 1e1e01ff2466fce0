//! Property tests against brute-force or dense reference implementations.

use gpseg::evaluation::{ap_curve, iou, match_masks, DEFAULT_AP_ALPHAS};
use gpseg::gp::direct::{predict_direct, profile_loglik_direct};
use gpseg::gp::{fit_mle, predict, profile_loglik_fast, AxisEigen};
use gpseg::kernels::correlation_matrix;
use gpseg::segmentation::{
    connected_components, distance_transform, filter_small, filter_small_with_mean, mean_area, watershed,
    SizeFilter,
};
use gpseg::synthetic::{
    add_noise, branin_field, diffusion_field, phantom_cells, render_objects, BraninParams, DiffusionConfig,
    ObjectShape, PhantomConfig, PhantomObject,
};
use gpseg::thresholding::{binarize, count_curve};
use gpseg::tiling::{denoise, make_layout};
use gpseg::{
    segment_pipeline, AxisGrid, BinaryMask, GpHyperParams, KernelFamily, KernelSpec, LabelMask, PipelineConfig,
};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn mask_strategy(max: usize) -> impl Strategy<Value = BinaryMask> {
    (1..=max, 1..=max).prop_flat_map(|(n1, n2)| {
        proptest::collection::vec(any::<bool>(), n1 * n2)
            .prop_map(move |v| BinaryMask(DMatrix::from_vec(n1, n2, v)))
    })
}

fn labels_strategy(max: usize, k: u32) -> impl Strategy<Value = (LabelMask, LabelMask)> {
    (2..=max, 2..=max).prop_flat_map(move |(n1, n2)| {
        let one = proptest::collection::vec(0..=k, n1 * n2).prop_map(move |v| LabelMask(DMatrix::from_vec(n1, n2, v)));
        (one.clone(), one)
    })
}

fn family() -> impl Strategy<Value = KernelFamily> {
    prop_oneof![Just(KernelFamily::Matern52), Just(KernelFamily::Exponential)]
}

fn brute_distance(mask: &BinaryMask) -> DMatrix<f64> {
    let (n1, n2) = mask.shape();
    DMatrix::from_fn(n1, n2, |i, j| {
        if !mask.get(i, j) {
            return 0.0;
        }
        let (i, j) = (i as i64, j as i64);
        let mut best = i64::MAX;
        for a in -1..=n1 as i64 {
            for b in -1..=n2 as i64 {
                let inside = a >= 0 && b >= 0 && a < n1 as i64 && b < n2 as i64;
                if !inside || !mask.get(a as usize, b as usize) {
                    best = best.min((a - i).pow(2) + (b - j).pow(2));
                }
            }
        }
        (best as f64).sqrt()
    })
}

/// Union-find over 8-neighbour foreground pairs.
fn union_find_partition(mask: &BinaryMask) -> Vec<usize> {
    let (n1, n2) = mask.shape();
    let mut parent: Vec<usize> = (0..n1 * n2).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        p[x] = r;
        r
    }
    for i in 0..n1 {
        for j in 0..n2 {
            if !mask.get(i, j) {
                continue;
            }
            for (di, dj) in [(0i64, 1i64), (1, -1), (1, 0), (1, 1)] {
                let (a, b) = (i as i64 + di, j as i64 + dj);
                if a < 0 || b < 0 || a >= n1 as i64 || b >= n2 as i64 || !mask.get(a as usize, b as usize) {
                    continue;
                }
                let (x, y) = (find(&mut parent, i + j * n1), find(&mut parent, a as usize + b as usize * n1));
                parent[x] = y;
            }
        }
    }
    (0..n1 * n2).map(|t| find(&mut parent, t)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn fast_matches_direct(
        n1 in 2usize..9, n2 in 2usize..9, fam in family(),
        g1 in 0.3f64..8.0, g2 in 0.3f64..8.0, log_eta in -3.0f64..1.0, seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let y = DMatrix::from_fn(n1, n2, |_, _| Distribution::<f64>::sample(&StandardNormal, &mut rng));
        let (k1, k2) = (KernelSpec::new(fam, g1).unwrap(), KernelSpec::new(fam, g2).unwrap());
        let eta = 10f64.powf(log_eta);
        let f = profile_loglik_fast(&y, k1, k2, eta).unwrap();
        let d = profile_loglik_direct(&y, k1, k2, eta).unwrap();
        prop_assert!((f.loglik - d.loglik).abs() <= 1e-8 * (1.0 + d.loglik.abs()));
        prop_assert!((f.mu_hat - d.mu_hat).abs() <= 1e-8 * (1.0 + d.mu_hat.abs()));
        prop_assert!((f.sigma2_hat - d.sigma2_hat).abs() <= 1e-8 * d.sigma2_hat);

        let params = GpHyperParams { kernel1: k1, kernel2: k2, eta, mu: d.mu_hat, sigma2: d.sigma2_hat };
        let pf = predict(&y, &params, true).unwrap();
        let pd = predict_direct(&y, &params, true).unwrap();
        prop_assert!((&pf.mean - &pd.mean).amax() <= 1e-8 * (1.0 + pd.mean.amax()));
        let (vf, vd) = (pf.variance.unwrap(), pd.variance.unwrap());
        prop_assert!((&vf - &vd).amax() <= 1e-8 * (1.0 + vd.amax()));
        prop_assert!(vf.iter().all(|&v| (0.0..=d.sigma2_hat).contains(&v)));
    }

    #[test]
    fn loglik_transpose_invariant(n1 in 2usize..12, n2 in 2usize..12, g1 in 0.5f64..6.0, g2 in 0.5f64..6.0, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let y = DMatrix::from_fn(n1, n2, |_, _| Distribution::<f64>::sample(&StandardNormal, &mut rng));
        let (k1, k2) = (KernelSpec::matern52(g1).unwrap(), KernelSpec::matern52(g2).unwrap());
        let a = profile_loglik_fast(&y, k1, k2, 0.2).unwrap().loglik;
        let b = profile_loglik_fast(&y.transpose(), k2, k1, 0.2).unwrap().loglik;
        prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()));
    }

    #[test]
    fn distance_transform_is_exact(mask in mask_strategy(14)) {
        let d = distance_transform(&mask);
        prop_assert_eq!(d.0, brute_distance(&mask));
    }

    #[test]
    fn components_match_union_find(mask in mask_strategy(14)) {
        let labels = connected_components(&mask);
        let roots = union_find_partition(&mask);
        let (n1, n2) = mask.shape();
        let mut distinct = std::collections::HashSet::new();
        for t in 0..n1 * n2 {
            let (i, j) = (t % n1, t / n1);
            prop_assert_eq!(labels.get(i, j) != 0, mask.get(i, j));
            if mask.get(i, j) {
                distinct.insert(roots[t]);
            }
            for u in 0..n1 * n2 {
                let (a, b) = (u % n1, u / n1);
                if mask.get(i, j) && mask.get(a, b) {
                    prop_assert_eq!(roots[t] == roots[u], labels.get(i, j) == labels.get(a, b));
                }
            }
        }
        prop_assert_eq!(labels.num_objects(), distinct.len());
        prop_assert_eq!(labels.max_label() as usize, distinct.len());
    }

    #[test]
    fn watershed_partitions_foreground(mask in mask_strategy(20)) {
        let labels = watershed(&distance_transform(&mask));
        let (n1, n2) = mask.shape();
        for i in 0..n1 {
            for j in 0..n2 {
                prop_assert_eq!(labels.get(i, j) != 0, mask.get(i, j));
            }
        }
        let k = labels.max_label() as usize;
        prop_assert!(labels.areas().iter().skip(1).take(k).all(|&a| a > 0));
    }

    #[test]
    fn iou_symmetric(a in mask_strategy(10), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (n1, n2) = a.shape();
        let b = BinaryMask::from_fn(n1, n2, |_, _| rand::Rng::random_bool(&mut rng, 0.5));
        let (x, y) = (iou(&a, &b).unwrap(), iou(&b, &a).unwrap());
        prop_assert_eq!(x, y);
        prop_assert!((0.0..=1.0).contains(&x));
    }

    #[test]
    fn ap_non_increasing_and_tallies_add_up((gt, pred) in labels_strategy(10, 4)) {
        let gt = connected_components(&gt.foreground()).relabel_sequential();
        let pred = pred.relabel_sequential();
        let curve = ap_curve(&gt, &pred, &DEFAULT_AP_ALPHAS).unwrap();
        prop_assert!(curve.windows(2).all(|w| w[1].ap <= w[0].ap));
        for &alpha in &DEFAULT_AP_ALPHAS {
            let m = match_masks(&gt, &pred, alpha).unwrap();
            prop_assert_eq!(m.tp + m.fn_, gt.num_objects());
            prop_assert_eq!(m.tp + m.fp, pred.num_objects());
        }
    }

    #[test]
    fn filter_small_idempotent_with_fixed_mean(mask in mask_strategy(20)) {
        let labels = connected_components(&mask);
        let sf = SizeFilter::default();
        if let Some(a) = mean_area(&labels) {
            let once = filter_small_with_mean(&labels, &sf, a);
            prop_assert_eq!(filter_small_with_mean(&once, &sf, a), once.clone());
            prop_assert_eq!(filter_small(&labels, &sf), once);
        }
    }

    #[test]
    fn counts_non_increasing_and_binarize_monotone(n1 in 1usize..10, n2 in 1usize..10, seed in any::<u64>(), a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = DMatrix::from_fn(n1, n2, |_, _| rand::Rng::random_range(&mut rng, 0.01..1.0));
        let t = count_curve(&f, 50).unwrap();
        prop_assert!(t.counts.windows(2).all(|w| w[1] <= w[0]));
        prop_assert_eq!(*t.counts.last().unwrap(), 0);
        let (lo, hi) = (a.min(b), a.max(b));
        let (m_lo, m_hi) = (binarize(&f, lo), binarize(&f, hi));
        prop_assert!(m_lo.0.iter().zip(m_hi.0.iter()).all(|(&x, &y)| x || !y));
    }
}

/// Draws `Y = μ + σ L1 Z L2ᵀ + noise` with `L_l = U_l Λ_l^{1/2}`.
fn sample_model(n: usize, gamma: f64, eta: f64, seed: u64) -> DMatrix<f64> {
    let k = KernelSpec::matern52(gamma).unwrap();
    let e = AxisEigen::decompose(&correlation_matrix(&k, &AxisGrid::lattice(n))).unwrap();
    let l = &e.vectors * DMatrix::from_diagonal(&e.values.map(f64::sqrt));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut normal = || Distribution::<f64>::sample(&StandardNormal, &mut rng);
    let z = DMatrix::from_fn(n, n, |_, _| normal());
    let noise = DMatrix::from_fn(n, n, |_, _| eta.sqrt() * normal());
    (&l * z * l.transpose() + noise).add_scalar(0.5)
}

#[test]
fn mle_recovers_simulated_parameters() {
    let truth = [5.0f64, 5.0, 0.25];
    let mut hits = 0;
    for seed in 0..10 {
        let y = sample_model(80, 5.0, 0.25, seed);
        let p = fit_mle(&y, KernelFamily::Matern52).unwrap().params;
        let est = [p.kernel1.range, p.kernel2.range, p.eta];
        let ok = est.iter().zip(truth).all(|(&e, t)| (e.ln() - t.ln()).abs() <= 0.5 * t.ln().abs());
        hits += usize::from(ok);
    }
    assert!(hits >= 8, "{hits}/10 within tolerance");
}

#[test]
fn mle_nugget_direction() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let white = DMatrix::from_fn(30, 30, |_, _| Distribution::<f64>::sample(&StandardNormal, &mut rng));
    assert!(fit_mle(&white, KernelFamily::Matern52).unwrap().params.eta > 10.0);

    let smooth = branin_field(&BraninParams::default(), 40, 40).unwrap();
    assert!(fit_mle(&smooth, KernelFamily::Matern52).unwrap().params.eta < 1e-2);
}

#[test]
fn denoise_examples() {
    let smooth = DMatrix::from_fn(60, 50, |i, j| (i as f64 / 15.0).sin() * (j as f64 / 20.0).cos());
    let layout = make_layout(60, 50, 100);
    let out = denoise(&smooth, &layout, KernelFamily::Matern52, false).unwrap();
    assert!((out.mean() - &smooth).amax() < 0.01);

    let ph = phantom_cells(&PhantomConfig::new(100, 100, 10, ObjectShape::Blob, 9)).unwrap();
    let noisy = add_noise(&ph.image, 0.1, 10).unwrap();
    let out = denoise(&noisy, &make_layout(100, 100, 50), KernelFamily::Matern52, false).unwrap();
    let rmse = gpseg::evaluation::rmse(&out.mean(), &ph.image).unwrap();
    assert!(rmse < 0.1, "rmse {rmse}");
}

#[test]
fn tiles_share_range_but_not_mean() {
    let mut cfg = PhantomConfig::new(64, 128, 8, ObjectShape::Blob, 2);
    cfg.background_gradient = 0.5;
    let ph = phantom_cells(&cfg).unwrap();
    let noisy = add_noise(&ph.image, 0.05, 3).unwrap();
    let out = denoise(&noisy, &make_layout(64, 128, 64), KernelFamily::Matern52, false).unwrap();
    assert_eq!(out.tiles.len(), 2);
    let (a, b) = (&out.tiles[0], &out.tiles[1]);
    assert!(b.mu > a.mu + 0.1, "{} vs {}", a.mu, b.mu);
    assert_eq!(a.field.mean.shape(), b.field.mean.shape());
}

#[test]
fn noise_statistics_and_determinism() {
    let clean = DMatrix::from_element(120, 100, 0.3);
    let y = add_noise(&clean, 0.2, 77).unwrap();
    let resid = &y - &clean;
    let mean = resid.mean();
    let var = resid.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (resid.len() - 1) as f64;
    assert!((var / 0.04 - 1.0).abs() < 0.1, "variance {var}");
    assert_eq!(add_noise(&clean, 0.2, 77).unwrap(), y);
    assert_eq!(add_noise(&clean, 0.0, 77).unwrap(), clean);
}

#[test]
fn diffusion_monotone_in_space() {
    let f = diffusion_field(&DiffusionConfig::default()).unwrap();
    for t in 0..f.ncols() {
        for x in 1..f.nrows() {
            assert!(f[(x, t)] <= f[(x - 1, t)] + 1e-12);
        }
    }
}

#[test]
fn pipeline_edge_cases() {
    let cfg = PipelineConfig::default();
    let zero = DMatrix::zeros(40, 40);
    assert_eq!(segment_pipeline(&zero, &cfg).unwrap().labels.num_objects(), 0);

    // Two discs of radius 12 whose centres are 20 px apart touch along a waist.
    let objs = [PhantomObject::disc((30.0, 25.0), 12.0, 0.9), PhantomObject::disc((30.0, 45.0), 12.0, 0.9)];
    let ph = render_objects(60, 70, &objs, ObjectShape::Disc, |_, _| 0.1);
    let noisy = add_noise(&ph.image, 0.05, 4).unwrap();
    let seg = segment_pipeline(&noisy, &cfg).unwrap();
    assert_eq!(seg.labels.num_objects(), 2);
    let left = seg.labels.get(30, 25);
    for i in 0..60 {
        for j in 0..70 {
            let l = seg.labels.get(i, j);
            if l != 0 && (l == left) != (j < 35) {
                assert!((j as f64 - 35.0).abs() <= 1.0, "pixel ({i},{j}) on the wrong side");
            }
        }
    }
}
