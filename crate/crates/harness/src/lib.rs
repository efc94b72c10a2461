//! Command-line experiments around `iqft-core`.
//!
//! The binary is a thin wrapper over [`run`], which takes the argument list
//! and output streams explicitly so the commands can be driven from tests.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::error::ErrorKind;
use clap::Parser;
use iqft_core::exec::Execution;
use iqft_core::imageio::{decode_image_auto, load_mask, render_labelmap, RgbImage};
use iqft_core::iqft::{theta_from_threshold, thresholds_from_theta, AngleParams};
use iqft_core::pipeline::{normalization_ablation, segment_detailed, sweep, MethodConfig, Mode};
use iqft_core::theta::format_theta;
use serde::Serialize;

pub mod bench;
pub mod cli;
pub mod manifest;
pub mod table2;

use cli::{
    AblationArgs, BenchArgs, Cli, Command, SegmentArgs, SweepArgs, Table2Args, ThresholdArgs,
};
use manifest::DatasetManifest;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Parses `args` (program name first) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{text}");
                    EXIT_USAGE
                }
            };
        }
    };
    match dispatch(cli, out, err) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            EXIT_FAILURE
        }
    }
}

fn dispatch(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let exec = if cli.sequential {
        Execution::Sequential
    } else {
        Execution::default()
    };
    match cli.command {
        Command::Segment(a) => cmd_segment(&a, exec, out),
        Command::Table2(a) => cmd_table2(&a, exec, out),
        Command::Sweep(a) => cmd_sweep(&a, exec, out),
        Command::Bench(a) => cmd_bench(&a, exec, out, err),
        Command::Thresholds(a) => cmd_thresholds(&a, out),
        Command::Ablation(a) => cmd_ablation(&a, exec, out),
    }
}

pub fn read_image(path: &Path) -> Result<RgbImage> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    decode_image_auto(&bytes).with_context(|| format!("decoding {}", path.display()))
}

#[derive(Debug, Serialize)]
struct Dimensions {
    width: u32,
    height: u32,
}

#[derive(Debug, Serialize)]
struct ThetaInfo {
    theta1: String,
    theta2: String,
    theta3: String,
    radians: [f64; 3],
}

impl ThetaInfo {
    fn new(p: &AngleParams) -> Self {
        let [a, b, c] = p.as_array();
        Self {
            theta1: format_theta(a),
            theta2: format_theta(b),
            theta3: format_theta(c),
            radians: [a, b, c],
        }
    }
}

#[derive(Debug, Serialize)]
struct Sidecar {
    dimensions: Dimensions,
    mode: Mode,
    theta: ThetaInfo,
    normalize: bool,
    #[serde(flatten)]
    summary: iqft_core::pipeline::SegmentSummary,
    runtime_ms: f64,
}

/// Path of the JSON sidecar written next to a segmentation PNG.
pub fn sidecar_path(png: &Path) -> PathBuf {
    png.with_extension("json")
}

fn cmd_segment(a: &SegmentArgs, exec: Execution, out: &mut dyn Write) -> Result<()> {
    let params = AngleParams::new(a.theta1, a.theta2, a.theta3)?;
    let img = read_image(&a.input)?;
    let normalize = !a.no_normalize;

    let start = Instant::now();
    let outcome = segment_detailed(&img, a.mode, &params, normalize, exec)?;
    let runtime_ms = start.elapsed().as_secs_f64() * 1e3;

    let png = render_labelmap(&outcome.labels)?;
    let sidecar = Sidecar {
        dimensions: Dimensions {
            width: img.width(),
            height: img.height(),
        },
        mode: a.mode,
        theta: ThetaInfo::new(&params),
        normalize,
        summary: outcome.summary(),
        runtime_ms,
    };
    let json = serde_json::to_string_pretty(&sidecar)? + "\n";
    let side = sidecar_path(&a.out);
    fs::write(&a.out, png).with_context(|| format!("writing {}", a.out.display()))?;
    fs::write(&side, json).with_context(|| format!("writing {}", side.display()))?;
    writeln!(
        out,
        "{}x{} {} segments -> {}",
        img.width(),
        img.height(),
        sidecar.summary.segment_count,
        a.out.display()
    )?;
    Ok(())
}

fn cmd_table2(a: &Table2Args, exec: Execution, out: &mut dyn Write) -> Result<()> {
    let rows = table2::run_table2(&table2::Table2Options {
        samples: (!a.grid_only).then_some(a.samples),
        seed: a.seed,
        grid_step: a.grid,
        exec,
    })?;
    if a.json {
        writeln!(out, "{}", serde_json::to_string_pretty(&rows)?)?;
        return Ok(());
    }
    writeln!(
        out,
        "{:<22} {:>8} {:>8}  labels",
        "theta1,theta2,theta3", "random", "grid"
    )?;
    for r in &rows {
        let count = |c: &Option<table2::LabelCount>| {
            c.as_ref().map_or("-".to_string(), |c| c.count.to_string())
        };
        let labels = r.grid.as_ref().or(r.random.as_ref()).map(|c| &c.labels);
        writeln!(
            out,
            "{:<22} {:>8} {:>8}  {:?}",
            r.theta.join(","),
            count(&r.random),
            count(&r.grid),
            labels.cloned().unwrap_or_default()
        )?;
    }
    Ok(())
}

fn cmd_sweep(a: &SweepArgs, exec: Execution, out: &mut dyn Write) -> Result<()> {
    let img = read_image(&a.input)?;
    let mask = match &a.mask {
        Some(p) => {
            let bytes = fs::read(p).with_context(|| format!("reading {}", p.display()))?;
            Some(load_mask(&bytes).with_context(|| format!("decoding {}", p.display()))?)
        }
        None => None,
    };
    let report = sweep(
        &img,
        &a.thetas.0,
        a.mode,
        !a.no_normalize,
        mask.as_ref(),
        exec,
    )?;
    if a.json {
        writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
        return Ok(());
    }
    if mask.is_some() {
        writeln!(out, "{:<12} {:>8} {:>8}", "theta", "segments", "miou")?;
    } else {
        writeln!(out, "{:<12} {:>8}", "theta", "segments")?;
    }
    for r in &report.rows {
        match r.miou {
            Some(m) => writeln!(
                out,
                "{:<12} {:>8} {:>8.4}",
                r.theta_label, r.segment_count, m
            )?,
            None => writeln!(out, "{:<12} {:>8}", r.theta_label, r.segment_count)?,
        }
    }
    if let Some(best) = report.best_theta {
        writeln!(out, "best: {}", format_theta(best))?;
    }
    Ok(())
}

fn cmd_bench(
    a: &BenchArgs,
    exec: Execution,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<()> {
    let t = &a.theta.0;
    let params = match t.as_slice() {
        [x] => AngleParams::uniform(*x)?,
        [x, y, z] => AngleParams::new(*x, *y, *z)?,
        _ => bail!("--theta takes one angle or three, got {}", t.len()),
    };
    let manifest = DatasetManifest::load(&a.manifest)?;
    let cfg = bench::BenchConfig {
        methods: a.methods.0.clone(),
        method: MethodConfig {
            params,
            normalize: !a.no_normalize,
            k: a.k,
            seed: a.seed,
            exec,
        },
    };
    let report = bench::run_bench(&manifest, &cfg)?;
    if !report.skipped.is_empty() {
        writeln!(
            err,
            "warning: {} entries without a mask skipped: {}",
            report.skipped.len(),
            report.skipped.join(", ")
        )?;
    }
    bench::write_report(&report, &a.out)?;
    writeln!(
        out,
        "{:<10} {:>6} {:>10} {:>12}",
        "method", "images", "mean miou", "runtime ms"
    )?;
    for g in &report.aggregates {
        writeln!(
            out,
            "{:<10} {:>6} {:>10.4} {:>12.1}",
            g.method.name(),
            g.images,
            g.average_miou,
            g.total_runtime_ms
        )?;
    }
    for w in &report.win_rates {
        writeln!(
            out,
            "iqft beats {}: {}/{} ({:.1}%)",
            w.baseline,
            w.wins,
            w.images,
            100.0 * w.rate
        )?;
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct ThresholdReport {
    theta: f64,
    theta_label: String,
    thresholds: Vec<f64>,
}

fn cmd_thresholds(a: &ThresholdArgs, out: &mut dyn Write) -> Result<()> {
    let theta = match (a.theta, a.ith) {
        (Some(t), None) => t,
        (None, Some(ith)) => theta_from_threshold(ith)?,
        _ => unreachable!("clap enforces exactly one of --theta / --ith"),
    };
    let set = thresholds_from_theta(theta)?;
    if a.json {
        let r = ThresholdReport {
            theta,
            theta_label: format_theta(theta),
            thresholds: set.thresholds().to_vec(),
        };
        writeln!(out, "{}", serde_json::to_string_pretty(&r)?)?;
        return Ok(());
    }
    if a.ith.is_some() {
        writeln!(out, "theta = {} ({theta:.6} rad)", format_theta(theta))?;
    }
    if set.is_empty() {
        writeln!(
            out,
            "no threshold in (0, 1): for theta <= pi/2 every intensity stays in class 0"
        )?;
    } else {
        let list: Vec<String> = set.thresholds().iter().map(|t| format!("{t:.4}")).collect();
        writeln!(out, "thresholds: {}", list.join(", "))?;
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct AblationRow {
    id: String,
    normalized_rate: f64,
    unnormalized_rate: f64,
}

fn cmd_ablation(a: &AblationArgs, exec: Execution, out: &mut dyn Write) -> Result<()> {
    let images: Vec<(String, PathBuf)> = match &a.manifest {
        Some(m) => DatasetManifest::load(m)?
            .sorted_entries()
            .into_iter()
            .map(|e| (e.id.clone(), e.image.clone()))
            .collect(),
        None => a
            .input
            .iter()
            .map(|p| (p.display().to_string(), p.clone()))
            .collect(),
    };
    let params = AngleParams::uniform(a.theta)?;
    let mut rows = Vec::with_capacity(images.len());
    for (id, path) in images {
        let r = normalization_ablation(&read_image(&path)?, &params, exec)?;
        rows.push(AblationRow {
            id,
            normalized_rate: r.normalized_rate,
            unnormalized_rate: r.unnormalized_rate,
        });
    }
    if a.json {
        writeln!(out, "{}", serde_json::to_string_pretty(&rows)?)?;
        return Ok(());
    }
    writeln!(
        out,
        "{:<24} {:>10} {:>12}",
        "image", "normalized", "unnormalized"
    )?;
    for r in &rows {
        writeln!(
            out,
            "{:<24} {:>10.4} {:>12.4}",
            r.id, r.normalized_rate, r.unnormalized_rate
        )?;
    }
    Ok(())
}
