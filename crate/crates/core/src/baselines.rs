//! Comparison segmenters: global Otsu thresholding and k-means on RGB.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::imageio::{GrayImage, LabelMap, RgbImage};
use crate::rng;

/// Counts of intensities quantized to the 256 levels `i/255`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Histogram256 {
    counts: [u64; 256],
}

impl Histogram256 {
    pub fn from_counts(counts: [u64; 256]) -> Self {
        Self { counts }
    }

    /// Bins each intensity at `round(I * 255)`.
    pub fn from_gray(img: &GrayImage) -> Self {
        let mut counts = [0u64; 256];
        for &v in img.data() {
            counts[Self::bin_of(v)] += 1;
        }
        Self { counts }
    }

    pub fn bin_of(intensity: f64) -> usize {
        (intensity.clamp(0.0, 1.0) * 255.0).round() as usize
    }

    pub fn bin_center(bin: usize) -> f64 {
        bin as f64 / 255.0
    }

    /// Boundary between `bin` and the next one; intensities above it fall in a higher bin.
    pub fn upper_edge(bin: usize) -> f64 {
        (bin as f64 + 0.5) / 255.0
    }

    pub fn counts(&self) -> &[u64; 256] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Threshold maximizing the between-class variance.
///
/// Class 0 holds bins `0..=i` and the returned value is the center of bin
/// `i`; pixels strictly above it are foreground. Among equal variances the
/// lowest `i` wins.
pub fn otsu_threshold(hist: &Histogram256) -> Result<f64> {
    let occupied = hist.counts.iter().filter(|&&c| c > 0).count();
    if occupied < 2 {
        return Err(Error::NoThreshold);
    }
    // Dividing out the common factor makes the result exactly invariant to count scaling.
    let g = hist.counts.iter().fold(0, |a, &c| gcd(a, c));
    let counts: Vec<f64> = hist.counts.iter().map(|&c| (c / g) as f64).collect();

    let total: f64 = counts.iter().sum();
    let sum_all: f64 = counts
        .iter()
        .enumerate()
        .map(|(i, &c)| Histogram256::bin_center(i) * c)
        .sum();

    let mut w0 = 0.0;
    let mut sum0 = 0.0;
    let mut best = (f64::NEG_INFINITY, 0usize);
    for (i, &c) in counts.iter().enumerate().take(255) {
        w0 += c;
        sum0 += Histogram256::bin_center(i) * c;
        let w1 = total - w0;
        if w0 == 0.0 || w1 == 0.0 {
            continue;
        }
        let mu0 = sum0 / w0;
        let mu1 = (sum_all - sum0) / w1;
        let between = w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
        if between > best.0 {
            best = (between, i);
        }
    }
    Ok(Histogram256::upper_edge(best.1))
}

/// Intensities closer than this to the threshold count as background.
pub const THRESHOLD_TOLERANCE: f64 = 1e-9;

/// Binary mask: 1 where intensity is above `threshold`.
pub fn apply_threshold(img: &GrayImage, threshold: f64) -> Result<LabelMap> {
    let labels = img
        .data()
        .iter()
        .map(|&v| u8::from(v > threshold + THRESHOLD_TOLERANCE))
        .collect();
    LabelMap::new(img.width(), img.height(), labels)
}

/// Otsu threshold of the image and the resulting binary segmentation.
pub fn otsu_segment(img: &GrayImage) -> Result<(f64, LabelMap)> {
    if img.is_empty() {
        return Err(Error::EmptyImage);
    }
    let t = otsu_threshold(&Histogram256::from_gray(img))?;
    Ok((t, apply_threshold(img, t)?))
}

pub const KMEANS_MAX_ITER: usize = 300;
pub const KMEANS_TOL: f64 = 1e-4;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KMeansResult {
    pub labels: Vec<u32>,
    pub centroids: Vec<[f64; 3]>,
    pub iterations: usize,
    pub inertia: f64,
    /// Inertia after each assignment step.
    pub inertia_history: Vec<f64>,
}

#[inline]
fn dist2(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    d[0] * d[0] + d[1] * d[1] + d[2] * d[2]
}

fn nearest(p: &[f64; 3], centroids: &[[f64; 3]]) -> (u32, f64) {
    let mut best = (0u32, f64::INFINITY);
    for (i, c) in centroids.iter().enumerate() {
        let d = dist2(p, c);
        if d < best.1 {
            best = (i as u32, d);
        }
    }
    best
}

/// Greedy k-means++: each new center is the best of `2 + ln k` candidates
/// drawn with probability proportional to squared distance.
fn seed_centroids(pixels: &[[f64; 3]], k: usize, rng: &mut rng::Rng) -> Vec<[f64; 3]> {
    let trials = 2 + (k as f64).ln() as usize;
    let mut centers = vec![pixels[rng::index(rng, pixels.len())]];
    let mut closest: Vec<f64> = pixels.iter().map(|p| dist2(p, &centers[0])).collect();

    while centers.len() < k {
        let potential: f64 = closest.iter().sum();
        let mut best: Option<(f64, usize, Vec<f64>)> = None;
        for _ in 0..trials {
            let cand = if potential > 0.0 {
                sample_weighted(&closest, potential, rng)
            } else {
                rng::index(rng, pixels.len())
            };
            let updated: Vec<f64> = pixels
                .iter()
                .zip(&closest)
                .map(|(p, &d)| d.min(dist2(p, &pixels[cand])))
                .collect();
            let pot: f64 = updated.iter().sum();
            if best.as_ref().is_none_or(|(b, _, _)| pot < *b) {
                best = Some((pot, cand, updated));
            }
        }
        let (_, cand, updated) = best.expect("trials >= 2");
        centers.push(pixels[cand]);
        closest = updated;
    }
    centers
}

fn sample_weighted(weights: &[f64], total: f64, rng: &mut rng::Rng) -> usize {
    let target = rng::unit_f64(rng) * total;
    let mut acc = 0.0;
    for (i, &w) in weights.iter().enumerate() {
        acc += w;
        if acc > target {
            return i;
        }
    }
    // rounding pushed the target past the running sum; take the last weighted point
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
}

/// Lloyd's algorithm on RGB triples.
///
/// Stops when no centroid moves by `KMEANS_TOL` or more, or after
/// `KMEANS_MAX_ITER` iterations. The returned labels are the nearest-centroid
/// assignment for the returned centroids (ties to the lower index). A
/// cluster that empties keeps its previous centroid.
pub fn kmeans_segment(pixels: &[[f64; 3]], k: usize, seed: u64) -> Result<KMeansResult> {
    if k == 0 || k > pixels.len() {
        return Err(Error::InvalidK {
            k,
            points: pixels.len(),
        });
    }
    let mut rng = rng::seeded(seed);
    let mut centroids = seed_centroids(pixels, k, &mut rng);
    let mut labels = vec![0u32; pixels.len()];
    let mut history = Vec::new();
    let mut iterations = 0;

    while iterations < KMEANS_MAX_ITER {
        iterations += 1;
        let mut inertia = 0.0;
        for (l, p) in labels.iter_mut().zip(pixels) {
            let (c, d) = nearest(p, &centroids);
            *l = c;
            inertia += d;
        }
        history.push(inertia);

        let mut sums = vec![[0.0f64; 3]; k];
        let mut counts = vec![0usize; k];
        for (&l, p) in labels.iter().zip(pixels) {
            let s = &mut sums[l as usize];
            s[0] += p[0];
            s[1] += p[1];
            s[2] += p[2];
            counts[l as usize] += 1;
        }
        let mut shift = 0.0f64;
        for ((c, s), &n) in centroids.iter_mut().zip(&sums).zip(&counts) {
            if n == 0 {
                continue;
            }
            let m = [s[0] / n as f64, s[1] / n as f64, s[2] / n as f64];
            shift = shift.max(dist2(c, &m).sqrt());
            *c = m;
        }
        if shift < KMEANS_TOL {
            break;
        }
    }

    let mut inertia = 0.0;
    for (l, p) in labels.iter_mut().zip(pixels) {
        let (c, d) = nearest(p, &centroids);
        *l = c;
        inertia += d;
    }
    Ok(KMeansResult {
        labels,
        centroids,
        iterations,
        inertia,
        inertia_history: history,
    })
}

/// k-means on an image's normalized RGB pixels, as a label map (`k <= 8`).
pub fn kmeans_image(img: &RgbImage, k: usize, seed: u64) -> Result<(KMeansResult, LabelMap)> {
    if img.is_empty() {
        return Err(Error::EmptyImage);
    }
    if k > 8 {
        return Err(Error::TooManyLabels(k));
    }
    let res = kmeans_segment(&img.normalized_pixels(), k, seed)?;
    let labels = res.labels.iter().map(|&l| l as u8).collect();
    let lm = LabelMap::new(img.width(), img.height(), labels)?;
    Ok((res, lm))
}
