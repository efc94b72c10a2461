//! Independent checks of the classifier against a naive inverse DFT and
//! closed-form expressions.

use std::f64::consts::PI;

use iqft_core::exec::Execution;
use iqft_core::imageio::{GrayImage, RgbImage};
use iqft_core::iqft::{
    classify_gray_pixel, classify_phases, classify_rgb_pixel, gray_probabilities, iqft_amplitudes,
    phase_vector, segment_gray, segment_rgb_with, theta_from_threshold, thresholds_from_theta,
    AngleParams, PhaseTriple,
};
use num_complex::Complex64;
use proptest::prelude::*;

/// amp_k = (1/8) sum_j exp(-2 pi i j k / 8) exp(i (alpha a_j + beta b_j + gamma c_j)),
/// evaluated with trig calls for every term.
fn naive_idft(alpha: f64, beta: f64, gamma: f64) -> [Complex64; 8] {
    let mut out = [Complex64::new(0.0, 0.0); 8];
    for (k, slot) in out.iter_mut().enumerate() {
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..8 {
            let (a, b, c) = ((j >> 2) & 1, (j >> 1) & 1, j & 1);
            let phase = alpha * a as f64 + beta * b as f64 + gamma * c as f64;
            let twiddle = -2.0 * PI * (j * k) as f64 / 8.0;
            acc += Complex64::from_polar(1.0, phase + twiddle);
        }
        *slot = acc / 8.0;
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn amplitudes_match_naive_idft(a in 0.0..8.0*PI, b in 0.0..8.0*PI, g in 0.0..8.0*PI) {
        let d = iqft_amplitudes(&phase_vector(&PhaseTriple::new(a, b, g)));
        let want = naive_idft(a, b, g);
        for (k, (got, want)) in d.amps.iter().zip(want).enumerate() {
            prop_assert!((got - want).norm() < 1e-12, "k={} {} vs {}", k, got, want);
        }
    }

    #[test]
    fn probabilities_sum_to_one(a in -100.0..100.0f64, b in -100.0..100.0f64, g in -100.0..100.0f64) {
        let d = iqft_amplitudes(&phase_vector(&PhaseTriple::new(a, b, g)));
        let s: f64 = d.probs.iter().sum();
        prop_assert!((s - 1.0).abs() <= 1e-12);
        prop_assert!(d.probs.iter().all(|p| (0.0..=1.0).contains(p)));
    }

    #[test]
    fn phase_vector_unit_modulus(a in 0.0..8.0*PI, b in 0.0..8.0*PI, g in 0.0..8.0*PI) {
        let v = phase_vector(&PhaseTriple::new(a, b, g));
        prop_assert_eq!(v.get(0), Complex64::new(1.0, 0.0));
        for j in 0..8 {
            prop_assert!((v.get(j).norm() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn gray_probability_closure(i in 0.0..=1.0f64, theta in 1e-3..8.0*PI) {
        let [p0, p1] = gray_probabilities(i, theta);
        let (c, s) = ((i * theta).cos(), (i * theta).sin());
        // full squared-modulus forms
        let full0 = ((1.0 + c).powi(2) + s * s) / 4.0;
        let full1 = ((1.0 - c).powi(2) + s * s) / 4.0;
        prop_assert!((p0 - full0).abs() < 1e-12);
        prop_assert!((p1 - full1).abs() < 1e-12);
        prop_assert!((p0 - (1.0 + c) / 2.0).abs() < 1e-12);
        prop_assert!((p1 - (1.0 - c) / 2.0).abs() < 1e-12);
        prop_assert!((p0 + p1 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn gray_class_follows_band_parity(i in 0.0..=1.0f64, theta in 0.1..8.0*PI) {
        let set = thresholds_from_theta(theta).unwrap();
        // stay clear of the boundaries, where the tie rule decides
        prop_assume!(set.thresholds().iter().all(|t| (t - i).abs() > 1e-9));
        let label = classify_gray_pixel(i, theta).unwrap().value();
        prop_assert_eq!(label as usize, set.band_of(i) % 2);
    }

    #[test]
    fn threshold_roundtrip(ith in 0.0625..0.999f64) {
        let theta = theta_from_threshold(ith).unwrap();
        let set = thresholds_from_theta(theta).unwrap();
        prop_assert!((set.min().unwrap() - ith).abs() < 1e-12);
        for t in set.thresholds() {
            prop_assert!((t * theta).cos().abs() < 1e-12);
        }
        prop_assert!(set.thresholds().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn classification_is_pure(r in 0.0..=1.0f64, g in 0.0..=1.0f64, b in 0.0..=1.0f64, t in 0.0..4.0*PI) {
        let p = AngleParams::uniform(t).unwrap();
        let a = classify_rgb_pixel([r, g, b], &p).unwrap();
        let _ = classify_rgb_pixel([b, r, g], &p).unwrap();
        prop_assert_eq!(a, classify_rgb_pixel([r, g, b], &p).unwrap());
    }
}

#[test]
fn boundary_points_take_class0() {
    for theta in [PI, 2.0 * PI, 4.0 * PI, 1.75 * PI] {
        for &t in thresholds_from_theta(theta).unwrap().thresholds() {
            assert_eq!(
                classify_gray_pixel(t, theta).unwrap().value(),
                0,
                "theta={theta} t={t}"
            );
        }
    }
}

#[test]
fn basis_states_roundtrip() {
    for x in 0..8 {
        let xf = x as f64;
        let pt = PhaseTriple::new(PI * xf, PI * xf / 2.0, PI * xf / 4.0);
        let (label, dist) = classify_phases(&pt);
        assert_eq!(label.value() as usize, x);
        assert!((dist.probs[x] - 1.0).abs() < 1e-12);
    }
}

#[test]
fn parallel_and_sequential_are_bit_identical() {
    let img = RgbImage::from_fn(97, 61, |x, y| {
        [(x * 7 + y) as u8, ((y * 13) ^ x) as u8, (x * y) as u8]
    });
    for normalize in [true, false] {
        for t in [PI / 2.0, PI, 1.75 * PI, 4.0 * PI] {
            let p = AngleParams::new(t, t * 0.5, t * 1.5).unwrap();
            let a = segment_rgb_with(&img, &p, normalize, Execution::Sequential).unwrap();
            let b = segment_rgb_with(&img, &p, normalize, Execution::Parallel).unwrap();
            assert_eq!(a, b);
        }
    }
}

#[test]
fn concurrent_callers_agree() {
    let img = RgbImage::from_fn(40, 40, |x, y| {
        [(x * 6) as u8, (y * 6) as u8, ((x + y) * 3) as u8]
    });
    let p = AngleParams::uniform(1.25 * PI).unwrap();
    let reference = segment_rgb_with(&img, &p, true, Execution::Sequential).unwrap();
    std::thread::scope(|s| {
        let handles: Vec<_> = (0..8)
            .map(|_| s.spawn(|| segment_rgb_with(&img, &p, true, Execution::Parallel).unwrap()))
            .collect();
        for h in handles {
            assert_eq!(h.join().unwrap(), reference);
        }
    });
}

/// Three mid-intensity balls among darker and brighter ones on a black
/// background. With theta = 4pi the class-1 bands are (1/8, 3/8] and
/// (5/8, 7/8], so only objects whose intensity falls there leave class 0.
#[test]
fn multiple_thresholds_isolate_mid_band_objects() {
    let (w, h) = (120u32, 40u32);
    let balls: [(u32, f64); 6] = [
        (10, 0.05),  // darker than every threshold
        (30, 0.25),  // mid band
        (50, 0.30),  // mid band
        (70, 0.33),  // mid band
        (90, 0.50),  // between bands
        (110, 0.95), // brighter than every threshold
    ];
    let mut data = vec![0.0; (w * h) as usize];
    for y in 0..h {
        for x in 0..w {
            for &(cx, v) in &balls {
                let (dx, dy) = (x as f64 - cx as f64, y as f64 - 20.0);
                if dx * dx + dy * dy <= 64.0 {
                    data[(y * w + x) as usize] = v;
                }
            }
        }
    }
    let img = GrayImage::new(w, h, data.clone()).unwrap();
    let lm = segment_gray(&img, 4.0 * PI).unwrap();
    for (i, (&v, &l)) in data.iter().zip(lm.labels()).enumerate() {
        let mid = v > 0.125 && v <= 0.375;
        assert_eq!(l == 1, mid, "pixel {i} with intensity {v}");
    }
}
