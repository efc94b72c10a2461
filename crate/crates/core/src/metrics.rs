//! Binary mIOU with void exclusion, best label-to-class assignment and
//! segment statistics.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::imageio::LabelMap;

/// Ground truth with background 0, foreground 1 and void 255.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroundTruthMask {
    width: u32,
    height: u32,
    values: Vec<u8>,
}

impl GroundTruthMask {
    pub const BACKGROUND: u8 = 0;
    pub const FOREGROUND: u8 = 1;
    pub const VOID: u8 = 255;

    pub fn new(width: u32, height: u32, values: Vec<u8>) -> Result<Self> {
        if width as usize * height as usize != values.len() {
            return Err(Error::BufferLength {
                width,
                height,
                channels: 1,
                len: values.len(),
            });
        }
        let mut bad: Vec<u8> = values
            .iter()
            .copied()
            .filter(|v| !matches!(*v, Self::BACKGROUND | Self::FOREGROUND | Self::VOID))
            .collect();
        if !bad.is_empty() {
            bad.sort_unstable();
            bad.dedup();
            return Err(Error::MaskFormat { values: bad });
        }
        Ok(Self {
            width,
            height,
            values,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dimensions(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn values(&self) -> &[u8] {
        &self.values
    }

    pub fn void_count(&self) -> usize {
        self.values.iter().filter(|&&v| v == Self::VOID).count()
    }

    fn check_dims(&self, dims: (u32, u32)) -> Result<()> {
        if dims == self.dimensions() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.dimensions(),
                found: dims,
            })
        }
    }
}

/// Pixel counts over non-void pixels, foreground as the positive class.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ConfusionCounts {
    #[serde(rename = "tp")]
    pub true_pos: u64,
    #[serde(rename = "fp")]
    pub false_pos: u64,
    #[serde(rename = "fn")]
    pub false_neg: u64,
    #[serde(rename = "tn")]
    pub true_neg: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.true_pos + self.false_pos + self.false_neg + self.true_neg
    }

    fn add(&mut self, predicted_fg: bool, truth_fg: bool, n: u64) {
        match (predicted_fg, truth_fg) {
            (true, true) => self.true_pos += n,
            (true, false) => self.false_pos += n,
            (false, true) => self.false_neg += n,
            (false, false) => self.true_neg += n,
        }
    }
}

/// Confusion counts for a binary prediction (label 1 = foreground).
pub fn confusion(pred: &LabelMap, gt: &GroundTruthMask) -> Result<ConfusionCounts> {
    gt.check_dims(pred.dimensions())?;
    let mut c = ConfusionCounts::default();
    for (&p, &t) in pred.labels().iter().zip(gt.values()) {
        if p > 1 {
            return Err(Error::LabelRange {
                label: p as u32,
                max: 1,
            });
        }
        if t == GroundTruthMask::VOID {
            continue;
        }
        c.add(p == 1, t == GroundTruthMask::FOREGROUND, 1);
    }
    Ok(c)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IouScores {
    pub iou_fg: f64,
    pub iou_bg: f64,
    pub miou: f64,
}

fn iou(hit: u64, miss_a: u64, miss_b: u64) -> f64 {
    let denom = hit + miss_a + miss_b;
    if denom == 0 {
        // class absent from both prediction and truth
        1.0
    } else {
        hit as f64 / denom as f64
    }
}

/// Foreground/background IOU and their mean.
pub fn miou(counts: &ConfusionCounts) -> Result<IouScores> {
    if counts.total() == 0 {
        return Err(Error::UndefinedMetric);
    }
    let iou_fg = iou(counts.true_pos, counts.false_pos, counts.false_neg);
    let iou_bg = iou(counts.true_neg, counts.false_neg, counts.false_pos);
    Ok(IouScores {
        iou_fg,
        iou_bg,
        miou: (iou_fg + iou_bg) / 2.0,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Bg,
    Fg,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvaluationReport {
    pub iou_fg: f64,
    pub iou_bg: f64,
    pub miou: f64,
    pub assignment: BTreeMap<u8, Side>,
    pub counts: ConfusionCounts,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runtime_ms: Option<f64>,
}

/// Per-label `[background, foreground]` pixel counts over non-void pixels.
fn label_class_counts(pred: &LabelMap, gt: &GroundTruthMask) -> Result<[[u64; 2]; 8]> {
    gt.check_dims(pred.dimensions())?;
    let mut table = [[0u64; 2]; 8];
    for (&p, &t) in pred.labels().iter().zip(gt.values()) {
        if t != GroundTruthMask::VOID {
            table[p as usize][usize::from(t == GroundTruthMask::FOREGROUND)] += 1;
        }
    }
    Ok(table)
}

/// Scores a fixed label-to-class mapping. Labels missing from `assignment` count as background.
pub fn evaluate_assignment(
    pred: &LabelMap,
    gt: &GroundTruthMask,
    assignment: &BTreeMap<u8, Side>,
) -> Result<(ConfusionCounts, IouScores)> {
    let table = label_class_counts(pred, gt)?;
    let mut c = ConfusionCounts::default();
    for (label, [bg, fg]) in table.iter().enumerate() {
        let is_fg = assignment.get(&(label as u8)) == Some(&Side::Fg);
        c.add(is_fg, false, *bg);
        c.add(is_fg, true, *fg);
    }
    Ok((c, miou(&c)?))
}

/// Tries every mapping of the predicted labels onto {background, foreground}
/// and keeps the one with the highest mIOU.
///
/// Only labels that occur on non-void pixels take part. Ties go to the
/// lexicographically smallest assignment, background before foreground, in
/// ascending label order.
pub fn best_binary_assignment(pred: &LabelMap, gt: &GroundTruthMask) -> Result<EvaluationReport> {
    let table = label_class_counts(pred, gt)?;
    let present: Vec<u8> = (0..8u8)
        .filter(|&l| table[l as usize].iter().sum::<u64>() > 0)
        .collect();
    let n = present.len();
    if n == 0 {
        return Err(Error::UndefinedMetric);
    }

    let mut best: Option<(u32, ConfusionCounts, IouScores)> = None;
    // bit (n-1-i) holds the side of present[i], so counting up walks assignments lexicographically
    for code in 0..(1u32 << n) {
        let mut c = ConfusionCounts::default();
        for (i, &label) in present.iter().enumerate() {
            let is_fg = code >> (n - 1 - i) & 1 == 1;
            let [bg, fg] = table[label as usize];
            c.add(is_fg, false, bg);
            c.add(is_fg, true, fg);
        }
        let s = miou(&c)?;
        if best.as_ref().is_none_or(|(_, _, b)| s.miou > b.miou) {
            best = Some((code, c, s));
        }
    }

    let (code, counts, scores) = best.expect("at least one assignment");
    let assignment = present
        .iter()
        .enumerate()
        .map(|(i, &label)| {
            let side = if code >> (n - 1 - i) & 1 == 1 {
                Side::Fg
            } else {
                Side::Bg
            };
            (label, side)
        })
        .collect();
    Ok(EvaluationReport {
        iou_fg: scores.iou_fg,
        iou_bg: scores.iou_bg,
        miou: scores.miou,
        assignment,
        counts,
        runtime_ms: None,
    })
}

/// Number of distinct labels in the map.
pub fn count_segments(pred: &LabelMap) -> usize {
    pred.histogram().iter().filter(|&&c| c > 0).count()
}

/// Fraction of horizontally adjacent pixel pairs whose labels differ.
///
/// Zero for maps narrower than two pixels.
pub fn transition_rate(lm: &LabelMap) -> f64 {
    let w = lm.width() as usize;
    if w < 2 {
        return 0.0;
    }
    let mut changes = 0u64;
    let mut pairs = 0u64;
    for row in lm.labels().chunks_exact(w) {
        for pair in row.windows(2) {
            changes += u64::from(pair[0] != pair[1]);
        }
        pairs += (w - 1) as u64;
    }
    changes as f64 / pairs as f64
}
