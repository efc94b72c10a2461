use iqft_core::baselines::{
    apply_threshold, kmeans_image, kmeans_segment, otsu_segment, otsu_threshold, Histogram256,
};
use iqft_core::imageio::{to_gray, RgbImage};
use iqft_core::rng;
use proptest::prelude::*;

/// Otsu by the other route: minimize the within-class variance
/// `w0 var0 + w1 var1` by direct summation for each split.
fn brute_force_otsu(counts: &[u64; 256]) -> usize {
    let level = |i: usize| i as f64 / 255.0;
    let mut best = (f64::INFINITY, 0usize);
    for split in 0..255 {
        let (lo, hi) = counts.split_at(split + 1);
        let n0: u64 = lo.iter().sum();
        let n1: u64 = hi.iter().sum();
        if n0 == 0 || n1 == 0 {
            continue;
        }
        let class_var = |range: std::ops::Range<usize>, n: u64| {
            let mean = range
                .clone()
                .map(|i| level(i) * counts[i] as f64)
                .sum::<f64>()
                / n as f64;
            range
                .map(|i| counts[i] as f64 * (level(i) - mean).powi(2))
                .sum::<f64>()
        };
        let within = class_var(0..split + 1, n0) + class_var(split + 1..256, n1);
        if best.0.is_infinite() || within < best.0 - 1e-12 * best.0.max(1.0) {
            best = (within, split);
        }
    }
    best.1
}

fn sparse_histogram() -> impl Strategy<Value = [u64; 256]> {
    prop::collection::vec((0usize..256, 1u64..500), 2..40).prop_map(|entries| {
        let mut counts = [0u64; 256];
        for (bin, c) in entries {
            counts[bin] += c;
        }
        counts
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn otsu_matches_exhaustive_scan(counts in sparse_histogram()) {
        prop_assume!(counts.iter().filter(|&&c| c > 0).count() >= 2);
        let t = otsu_threshold(&Histogram256::from_counts(counts)).unwrap();
        let want = brute_force_otsu(&counts);
        prop_assert_eq!(t, Histogram256::upper_edge(want));
    }

    #[test]
    fn otsu_invariant_to_count_scaling(counts in sparse_histogram(), factor in 2u64..1000) {
        prop_assume!(counts.iter().filter(|&&c| c > 0).count() >= 2);
        let scaled = counts.map(|c| c * factor);
        prop_assert_eq!(
            otsu_threshold(&Histogram256::from_counts(counts)).unwrap(),
            otsu_threshold(&Histogram256::from_counts(scaled)).unwrap()
        );
    }

    #[test]
    fn kmeans_inertia_monotone_and_fixed_point(seed in 0u64..1000, k in 1usize..6) {
        let mut g = rng::seeded(seed ^ 0x5eed);
        let px: Vec<[f64; 3]> = (0..150)
            .map(|_| [rng::unit_f64(&mut g), rng::unit_f64(&mut g), rng::unit_f64(&mut g)])
            .collect();
        let r = kmeans_segment(&px, k, seed).unwrap();
        for w in r.inertia_history.windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-12), "{:?}", r.inertia_history);
        }
        prop_assert!(r.labels.iter().all(|&l| (l as usize) < k));
        // reassigning to the final centroids changes nothing
        for (p, &l) in px.iter().zip(&r.labels) {
            let d = |c: &[f64; 3]| (0..3).map(|i| (p[i] - c[i]).powi(2)).sum::<f64>();
            let own = d(&r.centroids[l as usize]);
            prop_assert!(r.centroids.iter().all(|c| d(c) >= own));
        }
    }
}

fn sq(p: &[f64; 3], c: &[f64; 3]) -> f64 {
    (0..3).map(|i| (p[i] - c[i]).powi(2)).sum()
}

/// Every 2-partition of the points that Lloyd's algorithm cannot move,
/// with its cost.
fn lloyd_fixed_points(px: &[[f64; 3]]) -> Vec<(u32, f64)> {
    let n = px.len();
    let mut out = Vec::new();
    // point 0 always in cluster 0 removes the label-swap duplicate
    for code in 1u32..(1 << (n - 1)) {
        let side = |i: usize| i > 0 && code >> (i - 1) & 1 == 1;
        let mut sums = [[0.0; 3]; 2];
        let mut counts = [0usize; 2];
        for (i, p) in px.iter().enumerate() {
            let s = usize::from(side(i));
            counts[s] += 1;
            for d in 0..3 {
                sums[s][d] += p[d];
            }
        }
        let cents = [0, 1].map(|s| sums[s].map(|v| v / counts[s] as f64));
        let stable = px.iter().enumerate().all(|(i, p)| {
            let s = usize::from(side(i));
            sq(p, &cents[s]) <= sq(p, &cents[1 - s])
        });
        if stable {
            let cost = px
                .iter()
                .enumerate()
                .map(|(i, p)| sq(p, &cents[usize::from(side(i))]))
                .sum();
            out.push((code, cost));
        }
    }
    out
}

#[test]
fn kmeans_lands_on_an_exhaustively_enumerated_fixed_point() {
    for seed in 0..5u64 {
        let mut g = rng::seeded(100 + seed);
        let px: Vec<[f64; 3]> = (0..20)
            .map(|_| {
                [
                    rng::unit_f64(&mut g),
                    rng::unit_f64(&mut g),
                    rng::unit_f64(&mut g),
                ]
            })
            .collect();
        let fixed = lloyd_fixed_points(&px);
        let global = fixed.iter().map(|f| f.1).fold(f64::INFINITY, f64::min);

        let r = kmeans_segment(&px, 2, seed).unwrap();
        let code: u32 = (1..20)
            .map(|i| u32::from(r.labels[i] != r.labels[0]) << (i - 1))
            .sum();
        let (_, cost) = fixed
            .iter()
            .find(|f| f.0 == code)
            .expect("k-means result must be a Lloyd fixed point");
        assert!((r.inertia - cost).abs() < 1e-9);
        assert!(r.inertia >= global - 1e-9);
    }
}

#[test]
fn otsu_and_kmeans_agree_on_separable_image() {
    let img = RgbImage::from_fn(30, 20, |x, y| {
        if (x / 5 + y / 4) % 3 == 0 {
            [200, 190, 210]
        } else {
            [40, 60, 50]
        }
    });
    let (_, otsu) = otsu_segment(&to_gray(&img)).unwrap();
    let (_, km) = kmeans_image(&img, 2, 7).unwrap();
    let flip = km.labels()[0] != otsu.labels()[0];
    for (i, (a, b)) in otsu.labels().iter().zip(km.labels()).enumerate() {
        assert_eq!(*a, if flip { 1 - *b } else { *b }, "pixel {i}");
    }
}

#[test]
fn otsu_foreground_is_strictly_above() {
    let img = to_gray(&RgbImage::from_fn(4, 1, |x, _| {
        [[10, 10, 10], [10, 10, 10], [240, 240, 240], [240, 240, 240]][x as usize]
    }));
    let (t, lm) = otsu_segment(&img).unwrap();
    assert_eq!(lm.labels(), &[0, 0, 1, 1]);
    assert_eq!(apply_threshold(&img, t).unwrap(), lm);
}
