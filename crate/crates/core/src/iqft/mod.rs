//! Phase-encoding pixel classifier built on the 3-qubit inverse QFT.
//!
//! A normalized RGB pixel is turned into three relative phases
//! (`gamma = R*theta1`, `beta = G*theta2`, `alpha = B*theta3`). Those phases
//! define the product state `(|0>+e^{i alpha}|1>) (x) (|0>+e^{i beta}|1>) (x) (|0>+e^{i gamma}|1>)`,
//! whose 8 components form a [`PhaseVector8`]. Applying the 8-point inverse
//! DFT yields amplitudes over the basis states `|000>..|111>`, and the pixel
//! is labelled with the most probable basis state.
//!
//! Bit convention: for basis index `j = (a b c)_2`, `a` (most significant)
//! carries `alpha`, `b` carries `beta` and `c` carries `gamma`.

mod gray;

pub(crate) use gray::segment_gray_detailed;
pub use gray::{
    classify_gray_pixel, gray_probabilities, segment_gray, segment_gray_with, theta_from_threshold,
    thresholds_from_theta, ThresholdSet,
};

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::imageio::{LabelMap, RgbImage};

/// Probabilities closer than this to the maximum are treated as tied with it.
///
/// Inputs sitting exactly on a decision boundary (e.g. phases that are exact
/// multiples of pi/2) produce probabilities that agree only up to rounding.
/// Without a tolerance the winner would be decided by floating-point noise.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Upper bound accepted for any angle parameter.
pub const THETA_MAX: f64 = 8.0 * PI;

/// Number of basis states for three qubits.
pub const NUM_STATES: usize = 8;

const C0: Complex64 = Complex64::new(0.0, 0.0);

/// `OMEGA_POW[m] = exp(i*2*pi*m/8)`, written out so the axis-aligned roots are exact.
const OMEGA_POW: [Complex64; 8] = [
    Complex64::new(1.0, 0.0),
    Complex64::new(FRAC_1_SQRT_2, FRAC_1_SQRT_2),
    Complex64::new(0.0, 1.0),
    Complex64::new(-FRAC_1_SQRT_2, FRAC_1_SQRT_2),
    Complex64::new(-1.0, 0.0),
    Complex64::new(-FRAC_1_SQRT_2, -FRAC_1_SQRT_2),
    Complex64::new(0.0, -1.0),
    Complex64::new(FRAC_1_SQRT_2, -FRAC_1_SQRT_2),
];

/// Angle parameters scaling the red, green and blue channels into phases.
///
/// In grayscale mode only `theta1` is used.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AngleParams {
    theta1: f64,
    theta2: f64,
    theta3: f64,
}

impl AngleParams {
    pub fn new(theta1: f64, theta2: f64, theta3: f64) -> Result<Self> {
        check_theta("theta1", theta1)?;
        check_theta("theta2", theta2)?;
        check_theta("theta3", theta3)?;
        Ok(Self {
            theta1,
            theta2,
            theta3,
        })
    }

    /// Same angle for all three channels.
    pub fn uniform(theta: f64) -> Result<Self> {
        Self::new(theta, theta, theta)
    }

    pub fn theta1(&self) -> f64 {
        self.theta1
    }

    pub fn theta2(&self) -> f64 {
        self.theta2
    }

    pub fn theta3(&self) -> f64 {
        self.theta3
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.theta1, self.theta2, self.theta3]
    }
}

fn check_theta(what: &'static str, theta: f64) -> Result<()> {
    if theta.is_finite() && (0.0..=THETA_MAX).contains(&theta) {
        Ok(())
    } else {
        Err(Error::domain(what, theta, "[0, 8*pi]"))
    }
}

/// Relative phases of the three qubits.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PhaseTriple {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl PhaseTriple {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Self {
        Self { alpha, beta, gamma }
    }
}

/// Encodes a normalized RGB pixel as phases: red drives `gamma`, green
/// `beta`, blue `alpha`.
pub fn phase_encode_rgb(pixel: [f64; 3], params: &AngleParams) -> Result<PhaseTriple> {
    for (what, v) in ["red", "green", "blue"].into_iter().zip(pixel) {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::domain(what, v, "[0, 1]"));
        }
    }
    Ok(encode_unchecked(pixel, params))
}

#[inline]
fn encode_unchecked([r, g, b]: [f64; 3], params: &AngleParams) -> PhaseTriple {
    PhaseTriple {
        alpha: b * params.theta3,
        beta: g * params.theta2,
        gamma: r * params.theta1,
    }
}

/// The 8-entry unit-modulus vector `v_j = exp(i(alpha*a + beta*b + gamma*c))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseVector8([Complex64; NUM_STATES]);

impl PhaseVector8 {
    pub fn as_array(&self) -> &[Complex64; NUM_STATES] {
        &self.0
    }

    pub fn get(&self, j: usize) -> Complex64 {
        self.0[j]
    }
}

pub fn phase_vector(pt: &PhaseTriple) -> PhaseVector8 {
    let ea = Complex64::from_polar(1.0, pt.alpha);
    let eb = Complex64::from_polar(1.0, pt.beta);
    let eg = Complex64::from_polar(1.0, pt.gamma);
    let one = Complex64::new(1.0, 0.0);
    let ebg = eb * eg;
    PhaseVector8([one, eg, eb, ebg, ea, ea * eg, ea * eb, ea * ebg])
}

/// The unnormalized inverse-DFT matrix `M[k][j] = omega^(-(j*k) mod 8)`.
///
/// The classifier applies `M / 8`; `M / sqrt(8)` is unitary.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BasisMatrix([[Complex64; NUM_STATES]; NUM_STATES]);

impl BasisMatrix {
    pub const fn new() -> Self {
        let mut m = [[C0; NUM_STATES]; NUM_STATES];
        let mut k = 0;
        while k < NUM_STATES {
            let mut j = 0;
            while j < NUM_STATES {
                m[k][j] = OMEGA_POW[(NUM_STATES - (j * k) % NUM_STATES) % NUM_STATES];
                j += 1;
            }
            k += 1;
        }
        Self(m)
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.0[row][col]
    }

    /// Row `k`: the pattern of basis state `|k>` on the unit circle.
    pub fn row(&self, k: usize) -> &[Complex64; NUM_STATES] {
        &self.0[k]
    }
}

impl Default for BasisMatrix {
    fn default() -> Self {
        Self::new()
    }
}

pub const BASIS: BasisMatrix = BasisMatrix::new();

/// Amplitudes `P..W` of `|000>..|111>` and their probabilities.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AmplitudeDistribution {
    pub amps: [Complex64; NUM_STATES],
    pub probs: [f64; NUM_STATES],
}

impl AmplitudeDistribution {
    /// Most probable basis state, lowest index among ties.
    pub fn argmax(&self) -> SegmentLabel {
        SegmentLabel(argmax_lowest(&self.probs) as u8)
    }

    pub fn max_probability(&self) -> f64 {
        self.probs.iter().copied().fold(0.0, f64::max)
    }
}

pub fn iqft_amplitudes(v: &PhaseVector8) -> AmplitudeDistribution {
    let mut amps = [C0; NUM_STATES];
    let mut probs = [0.0; NUM_STATES];
    for k in 0..NUM_STATES {
        let acc: Complex64 = BASIS.row(k).iter().zip(&v.0).map(|(m, x)| m * x).sum();
        let a = acc / 8.0;
        amps[k] = a;
        probs[k] = a.norm_sqr().clamp(0.0, 1.0);
    }
    AmplitudeDistribution { amps, probs }
}

pub(crate) fn argmax_lowest(probs: &[f64]) -> usize {
    let max = probs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    probs
        .iter()
        .position(|&p| p >= max - TIE_TOLERANCE)
        .unwrap_or(0)
}

/// Index of the winning basis state: `0..=7` in RGB mode, `0..=1` in grayscale mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct SegmentLabel(u8);

impl SegmentLabel {
    pub fn new(value: u8) -> Result<Self> {
        if (value as usize) < NUM_STATES {
            Ok(Self(value))
        } else {
            Err(Error::LabelRange {
                label: value as u32,
                max: NUM_STATES as u32 - 1,
            })
        }
    }

    pub fn value(self) -> u8 {
        self.0
    }
}

impl From<SegmentLabel> for u8 {
    fn from(l: SegmentLabel) -> u8 {
        l.0
    }
}

/// Label and amplitude distribution for already-encoded phases.
pub fn classify_phases(pt: &PhaseTriple) -> (SegmentLabel, AmplitudeDistribution) {
    let dist = iqft_amplitudes(&phase_vector(pt));
    (dist.argmax(), dist)
}

/// Label of an in-range normalized pixel without re-validating it.
#[inline]
pub(crate) fn label_unchecked(pixel: [f64; 3], params: &AngleParams) -> u8 {
    classify_phases(&encode_unchecked(pixel, params)).0 .0
}

pub fn classify_rgb_pixel(pixel: [f64; 3], params: &AngleParams) -> Result<SegmentLabel> {
    let pt = phase_encode_rgb(pixel, params)?;
    Ok(classify_phases(&pt).0)
}

#[inline]
fn channel_scale(normalize: bool) -> f64 {
    if normalize {
        1.0 / 255.0
    } else {
        1.0
    }
}

#[inline]
fn classify_raw(px: &[u8], params: &AngleParams, scale: f64) -> (u8, f64) {
    let pixel = [
        px[0] as f64 * scale,
        px[1] as f64 * scale,
        px[2] as f64 * scale,
    ];
    let (label, dist) = classify_phases(&encode_unchecked(pixel, params));
    (label.0, dist.max_probability())
}

/// Labels every pixel of `image`.
///
/// With `normalize` off the raw 0..=255 intensities multiply the angles
/// directly; the resulting phases wrap many times around the circle.
pub fn segment_rgb(image: &RgbImage, params: &AngleParams, normalize: bool) -> Result<LabelMap> {
    segment_rgb_with(image, params, normalize, Execution::default())
}

pub fn segment_rgb_with(
    image: &RgbImage,
    params: &AngleParams,
    normalize: bool,
    exec: Execution,
) -> Result<LabelMap> {
    if image.is_empty() {
        return Err(Error::EmptyImage);
    }
    let scale = channel_scale(normalize);
    let labels = exec::map_chunks(image.data(), 3, exec, |px| {
        classify_raw(px, params, scale).0
    });
    LabelMap::new(image.width(), image.height(), labels)
}

/// Like [`segment_rgb_with`] but also returns each pixel's winning probability.
pub fn segment_rgb_detailed(
    image: &RgbImage,
    params: &AngleParams,
    normalize: bool,
    exec: Execution,
) -> Result<(LabelMap, Vec<f64>)> {
    if image.is_empty() {
        return Err(Error::EmptyImage);
    }
    let scale = channel_scale(normalize);
    let out = exec::map_chunks(image.data(), 3, exec, |px| classify_raw(px, params, scale));
    let (labels, probs) = out.into_iter().unzip();
    Ok((LabelMap::new(image.width(), image.height(), labels)?, probs))
}
