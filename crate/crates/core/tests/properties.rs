//! Property tests for the crate-wide invariants: weight simplex and
//! invariances, gate convexity, detector output contracts, metric symmetry,
//! and the one-step algebra round trip.

use proptest::prelude::*;

use edgekit::ame::{ame_loss, weights_from_matrix, LossItem, LossMatrix, WeightVector};
use edgekit::detectors::{canny, detect, log_response, sobel, CannyParams, DetectConfig, DetectorId};
use edgekit::gate::{fuse, softmax_gate, GateWeights};
use edgekit::image::{resize_bicubic, GrayImage};
use edgekit::io::{decode_pgm, encode_pgm};
use edgekit::latent::LatentTensor;
use edgekit::metrics::{l1_loss, l2_loss, ssim_loss, SsimParams};
use edgekit::onestep::{build_vp_schedule, denoise_step, forward_diffuse};

fn image_strategy(w: usize, h: usize) -> impl Strategy<Value = GrayImage> {
    prop::collection::vec(0.0..=1.0f64, w * h)
        .prop_map(move |data| GrayImage::new(w, h, data).unwrap())
}

fn matrix_strategy(n: usize, m: usize) -> impl Strategy<Value = LossMatrix> {
    prop::collection::vec(prop::collection::vec(0.0..1.0f64, m), n)
        .prop_map(move |rows| {
            let labels = LossItem::columns(&DetectorId::ALL)[..m].to_vec();
            LossMatrix::from_rows(labels, &rows).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn weights_form_a_probability_simplex(x in matrix_strategy(6, 8)) {
        let (_, w) = weights_from_matrix(&x).unwrap();
        let sum: f64 = w.weights().iter().sum();
        prop_assert!((sum - 1.0).abs() < 1e-12);
        prop_assert!(w.weights().iter().all(|&v| (0.0..=1.0).contains(&v)));
    }

    #[test]
    fn weights_invariant_under_column_scale_and_shift(
        x in matrix_strategy(6, 4),
        col in 0usize..4,
        scale in 0.1..10.0f64,
        shift in 0.0..5.0f64,
    ) {
        let (_, base) = weights_from_matrix(&x).unwrap();
        let rows: Vec<Vec<f64>> = (0..x.n_samples())
            .map(|i| {
                (0..x.n_items())
                    .map(|j| if j == col { x.get(i, j) * scale + shift } else { x.get(i, j) })
                    .collect()
            })
            .collect();
        let modified = LossMatrix::from_rows(x.labels().to_vec(), &rows).unwrap();
        let (_, changed) = weights_from_matrix(&modified).unwrap();
        for (a, b) in base.weights().iter().zip(changed.weights()) {
            prop_assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn weights_invariant_under_row_permutation(x in matrix_strategy(5, 4), seed in 0u64..1000) {
        let (base_report, base) = weights_from_matrix(&x).unwrap();
        let mut order: Vec<usize> = (0..x.n_samples()).collect();
        // Deterministic Fisher-Yates from the seed.
        let mut state = seed.wrapping_add(1);
        for i in (1..order.len()).rev() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            order.swap(i, (state >> 33) as usize % (i + 1));
        }
        let rows: Vec<Vec<f64>> = order.iter().map(|&i| x.row(i).to_vec()).collect();
        let permuted = LossMatrix::from_rows(x.labels().to_vec(), &rows).unwrap();
        let (report, w) = weights_from_matrix(&permuted).unwrap();
        for (a, b) in base.weights().iter().zip(w.weights()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
        for (a, b) in base_report.entropies.iter().zip(&report.entropies) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn lower_entropy_never_gets_smaller_weight(x in matrix_strategy(6, 8)) {
        let (report, w) = weights_from_matrix(&x).unwrap();
        for j in 0..8 {
            for k in 0..8 {
                if report.entropies[j] < report.entropies[k] {
                    prop_assert!(w.weights()[j] >= w.weights()[k]);
                }
            }
        }
    }

    #[test]
    fn ame_is_monotone_in_each_item(
        values in prop::collection::vec(0.0..1.0f64, 8),
        raw in prop::collection::vec(0.01..1.0f64, 8),
        idx in 0usize..8,
        bump in 0.01..1.0f64,
    ) {
        let labels = LossItem::columns(&DetectorId::ALL);
        let total: f64 = raw.iter().sum();
        let weights: Vec<f64> = raw.iter().map(|v| v / total).collect();
        let w = WeightVector::new(labels.clone(), weights, false).unwrap();
        let base = ame_loss(&labels, &values, &w).unwrap();
        let mut bumped = values.clone();
        bumped[idx] += bump;
        let after = ame_loss(&labels, &bumped, &w).unwrap();
        prop_assert!(after >= base);
    }

    #[test]
    fn gate_weights_sum_to_one_and_stay_interior(l0 in -500.0..500.0f64, l1 in -500.0..500.0f64) {
        let g = softmax_gate([l0, l1]).unwrap();
        prop_assert!((g.beta_c + g.beta_h - 1.0).abs() < 1e-12);
        prop_assert!(g.beta_c > 0.0 && g.beta_c < 1.0);
        prop_assert!(g.beta_h > 0.0 && g.beta_h < 1.0);
        // Shift invariance.
        let shifted = softmax_gate([l0 + 37.5, l1 + 37.5]).unwrap();
        prop_assert!((g.beta_c - shifted.beta_c).abs() < 1e-12);
    }

    #[test]
    fn fusion_is_convex_elementwise(
        a in prop::collection::vec(-10.0..10.0f64, 12),
        b in prop::collection::vec(-10.0..10.0f64, 12),
        l0 in -20.0..20.0f64,
        l1 in -20.0..20.0f64,
    ) {
        let f_c = LatentTensor::new(3, 2, 2, a).unwrap();
        let f_h = LatentTensor::new(3, 2, 2, b).unwrap();
        let g = softmax_gate([l0, l1]).unwrap();
        let fused = fuse(&f_c, &f_h, &g).unwrap();
        for i in 0..12 {
            let lo = f_c.as_slice()[i].min(f_h.as_slice()[i]);
            let hi = f_c.as_slice()[i].max(f_h.as_slice()[i]);
            let v = fused.as_slice()[i];
            let slack = f64::EPSILON * hi.abs().max(lo.abs()).max(1.0);
            prop_assert!(v >= lo - slack && v <= hi + slack);
        }
    }

    #[test]
    fn fuse_is_linear_in_each_argument(
        a in prop::collection::vec(-5.0..5.0f64, 8),
        b in prop::collection::vec(-5.0..5.0f64, 8),
        c in prop::collection::vec(-5.0..5.0f64, 8),
        s in 0.1..3.0f64,
    ) {
        let g = GateWeights { beta_c: 0.3, beta_h: 0.7 };
        let ta = LatentTensor::new(2, 2, 2, a.clone()).unwrap();
        let tb = LatentTensor::new(2, 2, 2, b.clone()).unwrap();
        let tc = LatentTensor::new(2, 2, 2, c).unwrap();
        // fuse(a + s*b, c) = fuse(a, c) + s * fuse(b, 0)
        let combined = LatentTensor::new(
            2, 2, 2,
            a.iter().zip(&b).map(|(x, y)| x + s * y).collect(),
        ).unwrap();
        let lhs = fuse(&combined, &tc, &g).unwrap();
        let f_ac = fuse(&ta, &tc, &g).unwrap();
        let zero = LatentTensor::zeros(2, 2, 2);
        let f_b0 = fuse(&tb, &zero, &g).unwrap();
        for i in 0..8 {
            let rhs = f_ac.as_slice()[i] + s * f_b0.as_slice()[i];
            prop_assert!((lhs.as_slice()[i] - rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn metric_symmetry_and_identity(a in image_strategy(16, 16), b in image_strategy(16, 16)) {
        prop_assert_eq!(l1_loss(&a, &b).unwrap(), l1_loss(&b, &a).unwrap());
        prop_assert_eq!(l2_loss(&a, &b).unwrap(), l2_loss(&b, &a).unwrap());
        let p = SsimParams::default();
        let ab = ssim_loss(&a, &b, &p).unwrap();
        let ba = ssim_loss(&b, &a, &p).unwrap();
        prop_assert!((ab - ba).abs() < 1e-12);
        prop_assert_eq!(l1_loss(&a, &a).unwrap(), 0.0);
        if a != b {
            prop_assert!(l1_loss(&a, &b).unwrap() > 0.0);
        }
    }

    #[test]
    fn pgm_round_trip_after_quantization(img in image_strategy(9, 7)) {
        let decoded = decode_pgm(&encode_pgm(&img)).unwrap();
        for (orig, back) in img.as_slice().iter().zip(decoded.as_slice()) {
            let quantized = (orig.clamp(0.0, 1.0) * 255.0).round() / 255.0;
            prop_assert_eq!(*back, quantized);
        }
    }

    #[test]
    fn resize_identity_property(img in image_strategy(11, 6)) {
        let out = resize_bicubic(&img, 11, 6).unwrap();
        prop_assert_eq!(img, out);
    }

    #[test]
    fn one_step_round_trip(
        z in prop::collection::vec(-3.0..3.0f64, 16),
        eps in prop::collection::vec(-3.0..3.0f64, 16),
        t in 1usize..=40,
    ) {
        let s = build_vp_schedule(40, 1e-4, 0.02).unwrap();
        let z = LatentTensor::new(1, 4, 4, z).unwrap();
        let eps = LatentTensor::new(1, 4, 4, eps).unwrap();
        let z_t = forward_diffuse(&z, t, &eps, &s).unwrap();
        let back = denoise_step(&z_t, &eps, t, &s).unwrap();
        let scale = z.as_slice().iter().fold(1e-12_f64, |m, v| m.max(v.abs()));
        for i in 0..16 {
            let err = (back.as_slice()[i] - z.as_slice()[i]).abs();
            prop_assert!(err / scale < 1e-9);
        }
    }
}

proptest! {
    // Detector pipelines are heavier; keep the case count small.
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn detectors_return_unit_range_maps_of_same_dims(img in image_strategy(24, 24)) {
        let cfg = DetectConfig {
            hed_map: Some(GrayImage::constant(24, 24, 0.5).unwrap()),
            ..Default::default()
        };
        for id in DetectorId::ALL {
            let map = detect(id, &img, &cfg).unwrap();
            prop_assert_eq!(map.dims(), (24, 24));
            prop_assert!(map.as_slice().iter().all(|&v| (0.0..=1.0).contains(&v)));
        }
    }

    #[test]
    fn canny_output_is_binary(img in image_strategy(24, 24)) {
        let map = canny(&img, &CannyParams::default()).unwrap();
        prop_assert!(map.as_slice().iter().all(|&v| v == 0.0 || v == 1.0));
    }

    #[test]
    fn sobel_and_log_are_shift_invariant(img in image_strategy(16, 16), c in 0.01..0.2f64) {
        // Compress toward zero so adding c keeps the range valid.
        let base = GrayImage::new(
            16, 16,
            img.as_slice().iter().map(|v| v * 0.7).collect(),
        ).unwrap();
        let shifted = GrayImage::new(
            16, 16,
            base.as_slice().iter().map(|v| v + c).collect(),
        ).unwrap();
        let m1 = sobel(&base).magnitude;
        let m2 = sobel(&shifted).magnitude;
        for (a, b) in m1.as_slice().iter().zip(m2.as_slice()) {
            prop_assert!((a - b).abs() < 1e-9);
        }
        let l1 = log_response(&base, 1.4).unwrap().edge_map;
        let l2 = log_response(&shifted, 1.4).unwrap().edge_map;
        for (a, b) in l1.as_slice().iter().zip(l2.as_slice()) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }
}
