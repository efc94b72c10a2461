//! End-to-end runs shared by the CLI and the HTTP service: run a method on
//! an image, score it against a mask, sweep angles, count reachable labels.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::baselines;
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::imageio::{to_gray, LabelMap, RgbImage};
use crate::iqft::{self, AngleParams};
use crate::metrics::{self, EvaluationReport, GroundTruthMask};
use crate::rng;
use crate::theta::format_theta;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Rgb,
    Gray,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "rgb" => Ok(Mode::Rgb),
            "gray" | "grey" | "grayscale" => Ok(Mode::Gray),
            other => Err(Error::InvalidArgument(format!(
                "unknown mode {other:?} (expected rgb or gray)"
            ))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Rgb => "rgb",
            Mode::Gray => "gray",
        })
    }
}

/// Segmentation methods that can be benchmarked against each other.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "iqft")]
    Iqft,
    #[serde(rename = "iqft-gray")]
    IqftGray,
    #[serde(rename = "otsu")]
    Otsu,
    #[serde(rename = "kmeans")]
    KMeans,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Iqft => "iqft",
            Method::IqftGray => "iqft-gray",
            Method::Otsu => "otsu",
            Method::KMeans => "kmeans",
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "iqft" | "iqft-rgb" => Ok(Method::Iqft),
            "iqft-gray" => Ok(Method::IqftGray),
            "otsu" => Ok(Method::Otsu),
            "kmeans" | "k-means" => Ok(Method::KMeans),
            other => Err(Error::InvalidArgument(format!("unknown method {other:?}"))),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MethodConfig {
    /// Angles for the RGB classifier; `theta1` doubles as the grayscale angle.
    pub params: AngleParams,
    pub normalize: bool,
    pub k: usize,
    pub seed: u64,
    pub exec: Execution,
}

impl Default for MethodConfig {
    fn default() -> Self {
        Self {
            params: AngleParams::uniform(std::f64::consts::PI).expect("pi is a valid angle"),
            normalize: true,
            k: 2,
            seed: 0,
            exec: Execution::default(),
        }
    }
}

pub fn run_method(img: &RgbImage, method: Method, cfg: &MethodConfig) -> Result<LabelMap> {
    match method {
        Method::Iqft => iqft::segment_rgb_with(img, &cfg.params, cfg.normalize, cfg.exec),
        Method::IqftGray => iqft::segment_gray_with(&to_gray(img), cfg.params.theta1(), cfg.exec),
        Method::Otsu => Ok(baselines::otsu_segment(&to_gray(img))?.1),
        Method::KMeans => Ok(baselines::kmeans_image(img, cfg.k, cfg.seed)?.1),
    }
}

/// Runs `method` and scores it with the best label-to-class assignment.
/// `runtime_ms` covers the segmentation only.
pub fn evaluate(
    img: &RgbImage,
    mask: &GroundTruthMask,
    method: Method,
    cfg: &MethodConfig,
) -> Result<(LabelMap, EvaluationReport)> {
    check_mask_dims(img, mask)?;
    let start = Instant::now();
    let labels = run_method(img, method, cfg)?;
    let elapsed = start.elapsed().as_secs_f64() * 1e3;
    let mut report = metrics::best_binary_assignment(&labels, mask)?;
    report.runtime_ms = Some(elapsed);
    Ok((labels, report))
}

fn check_mask_dims(img: &RgbImage, mask: &GroundTruthMask) -> Result<()> {
    if img.dimensions() != mask.dimensions() {
        return Err(Error::DimensionMismatch {
            expected: img.dimensions(),
            found: mask.dimensions(),
        });
    }
    Ok(())
}

/// Labels plus each pixel's winning probability.
#[derive(Clone, Debug, PartialEq)]
pub struct SegmentOutcome {
    pub mode: Mode,
    pub labels: LabelMap,
    pub max_probs: Vec<f64>,
}

pub fn segment_detailed(
    img: &RgbImage,
    mode: Mode,
    params: &AngleParams,
    normalize: bool,
    exec: Execution,
) -> Result<SegmentOutcome> {
    let (labels, max_probs) = match mode {
        Mode::Rgb => iqft::segment_rgb_detailed(img, params, normalize, exec)?,
        Mode::Gray => iqft::segment_gray_detailed(&to_gray(img), params.theta1(), exec)?,
    };
    Ok(SegmentOutcome {
        mode,
        labels,
        max_probs,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SegmentSummary {
    /// Pixel count per label: 8 entries in RGB mode, 2 in grayscale mode.
    pub label_histogram: Vec<u64>,
    pub segment_count: usize,
    /// Mean winning probability of the pixels carrying each label.
    pub probabilities_summary: BTreeMap<u8, f64>,
}

impl SegmentOutcome {
    pub fn summary(&self) -> SegmentSummary {
        let classes = match self.mode {
            Mode::Rgb => iqft::NUM_STATES,
            Mode::Gray => 2,
        };
        let mut hist = vec![0u64; classes];
        let mut sums = vec![0.0f64; classes];
        for (&l, &p) in self.labels.labels().iter().zip(&self.max_probs) {
            hist[l as usize] += 1;
            sums[l as usize] += p;
        }
        let probabilities_summary = hist
            .iter()
            .zip(&sums)
            .enumerate()
            .filter(|(_, (&n, _))| n > 0)
            .map(|(l, (&n, &s))| (l as u8, s / n as f64))
            .collect();
        SegmentSummary {
            segment_count: hist.iter().filter(|&&n| n > 0).count(),
            label_histogram: hist,
            probabilities_summary,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub theta: f64,
    pub theta_label: String,
    pub segment_count: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub miou: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepReport {
    pub mode: Mode,
    /// Best mIOU first when a mask was given, otherwise in input order.
    pub rows: Vec<SweepRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub best_theta: Option<f64>,
}

/// Segments `img` once per angle (applied to every channel in RGB mode).
pub fn sweep(
    img: &RgbImage,
    thetas: &[f64],
    mode: Mode,
    normalize: bool,
    mask: Option<&GroundTruthMask>,
    exec: Execution,
) -> Result<SweepReport> {
    if thetas.is_empty() {
        return Err(Error::InvalidArgument("theta list is empty".into()));
    }
    if let Some(m) = mask {
        check_mask_dims(img, m)?;
    }
    let gray = (mode == Mode::Gray).then(|| to_gray(img));
    let mut rows = Vec::with_capacity(thetas.len());
    for &theta in thetas {
        let labels = match &gray {
            Some(g) => iqft::segment_gray_with(g, theta, exec)?,
            None => iqft::segment_rgb_with(img, &AngleParams::uniform(theta)?, normalize, exec)?,
        };
        let miou = mask
            .map(|m| metrics::best_binary_assignment(&labels, m).map(|r| r.miou))
            .transpose()?;
        rows.push(SweepRow {
            theta,
            theta_label: format_theta(theta),
            segment_count: metrics::count_segments(&labels),
            miou,
        });
    }
    let mut best_theta = None;
    if mask.is_some() {
        // stable: equal scores keep input order
        rows.sort_by(|a, b| {
            b.miou
                .partial_cmp(&a.miou)
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        best_theta = rows.first().map(|r| r.theta);
    }
    Ok(SweepReport {
        mode,
        rows,
        best_theta,
    })
}

/// Set of labels (as a bit set) reached by `samples` uniform random RGB triples.
///
/// Triples are drawn as consecutive (R, G, B) reals from [`rng::seeded`].
pub fn label_set_random(params: &AngleParams, samples: usize, seed: u64, exec: Execution) -> u8 {
    let mut g = rng::seeded(seed);
    let points: Vec<[f64; 3]> = (0..samples)
        .map(|_| {
            [
                rng::unit_f64(&mut g),
                rng::unit_f64(&mut g),
                rng::unit_f64(&mut g),
            ]
        })
        .collect();
    exec::label_set(points.len(), exec, |i| {
        iqft::label_unchecked(points[i], params)
    })
}

/// Number of lattice points per axis for a grid step, endpoints included.
pub fn grid_points(step: f64) -> Result<usize> {
    if !(step > 0.0 && step < 1.0) {
        return Err(Error::domain("grid step", step, "(0, 1)"));
    }
    Ok((1.0 / step + 1e-9).floor() as usize + 1)
}

/// Set of labels reached on the lattice `{0, step, 2 step, ..., 1}^3`.
pub fn label_set_grid(params: &AngleParams, step: f64, exec: Execution) -> Result<u8> {
    let n = grid_points(step)?;
    let coord = move |i: usize| (i as f64 * step).min(1.0);
    Ok(exec::label_set(n * n * n, exec, |idx| {
        let (r, rest) = (idx / (n * n), idx % (n * n));
        let (g, b) = (rest / n, rest % n);
        iqft::label_unchecked([coord(r), coord(g), coord(b)], params)
    }))
}

pub fn labels_in(set: u8) -> Vec<u8> {
    (0..8).filter(|b| set >> b & 1 == 1).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AblationResult {
    pub normalized_rate: f64,
    pub unnormalized_rate: f64,
}

/// Horizontal label-transition rate with and without intensity normalization.
pub fn normalization_ablation(
    img: &RgbImage,
    params: &AngleParams,
    exec: Execution,
) -> Result<AblationResult> {
    let norm = iqft::segment_rgb_with(img, params, true, exec)?;
    let raw = iqft::segment_rgb_with(img, params, false, exec)?;
    Ok(AblationResult {
        normalized_rate: metrics::transition_rate(&norm),
        unnormalized_rate: metrics::transition_rate(&raw),
    })
}
