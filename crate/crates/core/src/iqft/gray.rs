//! Single-qubit variant for grayscale images and its threshold algebra.
//!
//! One phase `gamma = I*theta` and the 2-point inverse DFT give
//! `p0 = (1 + cos(I*theta))/2` and `p1 = (1 - cos(I*theta))/2`. The classes
//! swap wherever `cos(I*theta) = 0`, so a choice of `theta` is a choice of
//! thresholds `I = m*pi/(2*theta)` for odd `m`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use super::{check_theta, SegmentLabel, TIE_TOLERANCE};
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::imageio::{GrayImage, LabelMap};

/// Class probabilities `[p0, p1]` from the 2x2 inverse transform of `[1, e^{i I theta}]`.
pub fn gray_probabilities(intensity: f64, theta: f64) -> [f64; 2] {
    let e = Complex64::from_polar(1.0, intensity * theta);
    let one = Complex64::new(1.0, 0.0);
    let p = (one + e) / 2.0;
    let q = (one - e) / 2.0;
    [p.norm_sqr().clamp(0.0, 1.0), q.norm_sqr().clamp(0.0, 1.0)]
}

#[inline]
fn gray_label(intensity: f64, theta: f64) -> u8 {
    // p0 - p1 = cos(I*theta); boundary points go to class 0
    u8::from((intensity * theta).cos() < -TIE_TOLERANCE)
}

fn check_positive_theta(theta: f64) -> Result<()> {
    check_theta("theta", theta)?;
    if theta > 0.0 {
        Ok(())
    } else {
        Err(Error::domain("theta", theta, "(0, 8*pi]"))
    }
}

pub fn classify_gray_pixel(intensity: f64, theta: f64) -> Result<SegmentLabel> {
    if !(0.0..=1.0).contains(&intensity) {
        return Err(Error::domain("intensity", intensity, "[0, 1]"));
    }
    check_positive_theta(theta)?;
    Ok(SegmentLabel(gray_label(intensity, theta)))
}

pub fn segment_gray(image: &GrayImage, theta: f64) -> Result<LabelMap> {
    segment_gray_with(image, theta, Execution::default())
}

pub fn segment_gray_with(image: &GrayImage, theta: f64, exec: Execution) -> Result<LabelMap> {
    if image.is_empty() {
        return Err(Error::EmptyImage);
    }
    check_positive_theta(theta)?;
    let labels = exec::map_items(image.data(), exec, |&i| gray_label(i, theta));
    LabelMap::new(image.width(), image.height(), labels)
}

/// Per-pixel labels plus the winning class probability.
pub(crate) fn segment_gray_detailed(
    image: &GrayImage,
    theta: f64,
    exec: Execution,
) -> Result<(LabelMap, Vec<f64>)> {
    if image.is_empty() {
        return Err(Error::EmptyImage);
    }
    check_positive_theta(theta)?;
    let out = exec::map_items(image.data(), exec, |&i| {
        let p = gray_probabilities(i, theta);
        (gray_label(i, theta), p[0].max(p[1]))
    });
    let (labels, probs) = out.into_iter().unzip();
    Ok((LabelMap::new(image.width(), image.height(), labels)?, probs))
}

/// Intensities in `(0, 1)` where the two grayscale classes are equally likely.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct ThresholdSet(Vec<f64>);

impl ThresholdSet {
    pub fn thresholds(&self) -> &[f64] {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn min(&self) -> Option<f64> {
        self.0.first().copied()
    }

    /// Index of the band of `[0, 1]` that contains `intensity`, with band 0
    /// below the first threshold. Threshold points belong to the lower band.
    pub fn band_of(&self, intensity: f64) -> usize {
        self.0.iter().take_while(|&&t| intensity > t).count()
    }
}

/// All `I_th = (4k +/- 1) * pi / (2 theta)` with `0 < I_th < 1`, ascending.
/// A boundary at `I = 1` separates nothing and is left out.
pub fn thresholds_from_theta(theta: f64) -> Result<ThresholdSet> {
    if !theta.is_finite() || theta <= 0.0 {
        return Err(Error::domain("theta", theta, "(0, inf)"));
    }
    // Working in units of pi keeps rational multiples exact: theta = 4pi gives m/8.
    let half_turns = theta / PI;
    let mut out = Vec::new();
    let mut m = 1u64;
    loop {
        let t = m as f64 / (2.0 * half_turns);
        if t >= 1.0 - 1e-12 {
            break;
        }
        out.push(t);
        m += 2;
    }
    Ok(ThresholdSet(out))
}

/// Smallest `theta` whose first threshold is `i_th`: `theta = pi / (2 i_th)`.
pub fn theta_from_threshold(i_th: f64) -> Result<f64> {
    if !(i_th > 0.0 && i_th <= 1.0) {
        return Err(Error::domain("threshold", i_th, "(0, 1]"));
    }
    Ok(PI / (2.0 * i_th))
}
