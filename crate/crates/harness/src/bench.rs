//! Dataset benchmark: every method on every manifest image, scored with the
//! best label-to-class assignment.
//!
//! # CSV schema, version 1
//!
//! One header row, then one row per (image, method) in ascending id order and
//! in the order methods were requested:
//!
//! | column          | content                                                        |
//! |-----------------|----------------------------------------------------------------|
//! | `id`            | manifest entry id                                              |
//! | `method`        | `iqft`, `iqft-gray`, `otsu` or `kmeans`                        |
//! | `params`        | angles for the IQFT methods, `k=..;seed=..` for k-means, `-`   |
//! | `miou`          | best-assignment mIOU, 6 decimals                               |
//! | `iou_fg`        | foreground IOU under that assignment, 6 decimals               |
//! | `iou_bg`        | background IOU under that assignment, 6 decimals               |
//! | `segment_count` | distinct labels in the prediction                              |
//! | `fg_labels`     | labels mapped to foreground, `;`-separated, empty if none      |
//!
//! Wall-clock times are not in the CSV so that it stays byte-identical across
//! runs; they are in the JSON report.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use iqft_core::exec::{self, Execution};
use iqft_core::imageio::{decode_image_auto, load_mask};
use iqft_core::metrics::{count_segments, Side};
use iqft_core::pipeline::{evaluate, Method, MethodConfig};
use iqft_core::theta::format_theta;
use serde::Serialize;

use crate::manifest::{DatasetManifest, ManifestEntry};

pub const CSV_SCHEMA_VERSION: u32 = 1;

pub const CSV_HEADER: [&str; 8] = [
    "id",
    "method",
    "params",
    "miou",
    "iou_fg",
    "iou_bg",
    "segment_count",
    "fg_labels",
];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRow {
    pub id: String,
    pub method: Method,
    pub params: String,
    pub miou: f64,
    pub iou_fg: f64,
    pub iou_bg: f64,
    pub segment_count: usize,
    pub fg_labels: Vec<u8>,
    pub runtime_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Aggregate {
    pub method: Method,
    pub images: usize,
    pub average_miou: f64,
    pub total_runtime_ms: f64,
}

/// Fraction of images on which `iqft` scores strictly higher than `baseline`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WinRate {
    pub baseline: Method,
    pub images: usize,
    pub wins: usize,
    pub rate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchReport {
    pub schema_version: u32,
    pub theta: [String; 3],
    pub rows: Vec<BenchRow>,
    pub aggregates: Vec<Aggregate>,
    pub win_rates: Vec<WinRate>,
    /// Ids of entries without a mask.
    pub skipped: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub methods: Vec<Method>,
    pub method: MethodConfig,
}

fn method_params(method: Method, cfg: &MethodConfig) -> String {
    let t = cfg.params.as_array().map(format_theta);
    match method {
        Method::Iqft => {
            let raw = if cfg.normalize { "" } else { ";raw" };
            format!("{},{},{}{raw}", t[0], t[1], t[2])
        }
        Method::IqftGray => t[0].clone(),
        Method::Otsu => "-".to_string(),
        Method::KMeans => format!("k={};seed={}", cfg.k, cfg.seed),
    }
}

fn bench_entry(
    entry: &ManifestEntry,
    mask_path: &Path,
    cfg: &BenchConfig,
) -> Result<Vec<BenchRow>> {
    let img_bytes =
        fs::read(&entry.image).with_context(|| format!("reading {}", entry.image.display()))?;
    let img = decode_image_auto(&img_bytes)
        .with_context(|| format!("decoding {}", entry.image.display()))?;
    let mask_bytes =
        fs::read(mask_path).with_context(|| format!("reading {}", mask_path.display()))?;
    let mask =
        load_mask(&mask_bytes).with_context(|| format!("decoding {}", mask_path.display()))?;

    cfg.methods
        .iter()
        .map(|&method| {
            let (labels, report) = evaluate(&img, &mask, method, &cfg.method)
                .with_context(|| format!("{} on {:?}", method, entry.id))?;
            Ok(BenchRow {
                id: entry.id.clone(),
                method,
                params: method_params(method, &cfg.method),
                miou: report.miou,
                iou_fg: report.iou_fg,
                iou_bg: report.iou_bg,
                segment_count: count_segments(&labels),
                fg_labels: report
                    .assignment
                    .iter()
                    .filter(|(_, s)| **s == Side::Fg)
                    .map(|(l, _)| *l)
                    .collect(),
                runtime_ms: report.runtime_ms.unwrap_or(0.0),
            })
        })
        .collect()
}

/// Runs the benchmark. Images are processed concurrently when `cfg.method.exec`
/// is parallel; each image then runs its methods single-threaded.
pub fn run_bench(manifest: &DatasetManifest, cfg: &BenchConfig) -> Result<BenchReport> {
    let entries = manifest.sorted_entries();
    let skipped: Vec<String> = entries
        .iter()
        .filter(|e| e.mask.is_none())
        .map(|e| e.id.clone())
        .collect();
    let work: Vec<(&ManifestEntry, &Path)> = entries
        .iter()
        .filter_map(|e| e.mask.as_deref().map(|m| (*e, m)))
        .collect();

    let outer = cfg.method.exec;
    let inner = BenchConfig {
        methods: cfg.methods.clone(),
        method: MethodConfig {
            exec: if outer.is_parallel() {
                Execution::Sequential
            } else {
                outer
            },
            ..cfg.method
        },
    };
    let per_image = exec::map_items(&work, outer, |(e, m)| bench_entry(e, m, &inner));
    let mut rows = Vec::with_capacity(work.len() * cfg.methods.len());
    for r in per_image {
        rows.extend(r?);
    }

    Ok(BenchReport {
        schema_version: CSV_SCHEMA_VERSION,
        theta: cfg.method.params.as_array().map(format_theta),
        aggregates: aggregates(&rows, &cfg.methods),
        win_rates: win_rates(&rows, &cfg.methods),
        rows,
        skipped,
    })
}

pub fn aggregates(rows: &[BenchRow], methods: &[Method]) -> Vec<Aggregate> {
    methods
        .iter()
        .map(|&method| {
            let mine: Vec<&BenchRow> = rows.iter().filter(|r| r.method == method).collect();
            let n = mine.len();
            Aggregate {
                method,
                images: n,
                average_miou: if n == 0 {
                    0.0
                } else {
                    mine.iter().map(|r| r.miou).sum::<f64>() / n as f64
                },
                total_runtime_ms: mine.iter().map(|r| r.runtime_ms).sum(),
            }
        })
        .collect()
}

pub fn win_rates(rows: &[BenchRow], methods: &[Method]) -> Vec<WinRate> {
    if !methods.contains(&Method::Iqft) {
        return Vec::new();
    }
    let by_key: BTreeMap<(&str, Method), f64> = rows
        .iter()
        .map(|r| ((r.id.as_str(), r.method), r.miou))
        .collect();
    methods
        .iter()
        .filter(|&&m| m != Method::Iqft)
        .map(|&baseline| {
            let mut images = 0;
            let mut wins = 0;
            for r in rows.iter().filter(|r| r.method == Method::Iqft) {
                if let Some(&b) = by_key.get(&(r.id.as_str(), baseline)) {
                    images += 1;
                    wins += usize::from(r.miou > b);
                }
            }
            WinRate {
                baseline,
                images,
                wins,
                rate: if images == 0 {
                    0.0
                } else {
                    wins as f64 / images as f64
                },
            }
        })
        .collect()
}

pub fn write_csv<W: Write>(report: &BenchReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in &report.rows {
        let fg = r
            .fg_labels
            .iter()
            .map(u8::to_string)
            .collect::<Vec<_>>()
            .join(";");
        w.write_record([
            r.id.clone(),
            r.method.to_string(),
            r.params.clone(),
            format!("{:.6}", r.miou),
            format!("{:.6}", r.iou_fg),
            format!("{:.6}", r.iou_bg),
            r.segment_count.to_string(),
            fg,
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `bench.csv` and `bench.json` into `dir`, creating it if needed.
pub fn write_report(report: &BenchReport, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut csv = Vec::new();
    write_csv(report, &mut csv)?;
    fs::write(dir.join("bench.csv"), csv)?;
    let json = serde_json::to_string_pretty(report)?;
    fs::write(dir.join("bench.json"), json + "\n")?;
    Ok(())
}
