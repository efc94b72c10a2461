use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand};
use iqft_core::pipeline::{Method, Mode};
use iqft_core::theta::{parse_theta, parse_theta_list};

fn theta_arg(s: &str) -> Result<f64, String> {
    parse_theta(s).map_err(|e| e.to_string())
}

/// Comma-separated angles.
#[derive(Clone, Debug, PartialEq)]
pub struct ThetaList(pub Vec<f64>);

fn theta_list_arg(s: &str) -> Result<ThetaList, String> {
    let v = parse_theta_list(s).map_err(|e| e.to_string())?;
    if v.is_empty() {
        return Err("expected at least one angle".into());
    }
    Ok(ThetaList(v))
}

fn mode_arg(s: &str) -> Result<Mode, String> {
    s.parse().map_err(|e: iqft_core::Error| e.to_string())
}

#[derive(Clone, Debug, PartialEq)]
pub struct MethodList(pub Vec<Method>);

fn methods_arg(s: &str) -> Result<MethodList, String> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let m: Method = part.parse().map_err(|e: iqft_core::Error| e.to_string())?;
        if !out.contains(&m) {
            out.push(m);
        }
    }
    if out.is_empty() {
        return Err("expected at least one method".into());
    }
    Ok(MethodList(out))
}

fn unit_interval_arg(s: &str) -> Result<f64, String> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| format!("{s:?} is not a number"))?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(format!("{v} is outside (0, 1)"))
    }
}

/// Angles accept plain radians or multiples of pi: `pi`, `3pi/4`, `3*pi/4`,
/// `1.1197pi`, `0.5`.
#[derive(Debug, Parser)]
#[command(
    name = "iqft",
    version,
    about = "IQFT-inspired image segmentation experiments"
)]
pub struct Cli {
    /// Run every kernel on the calling thread.
    #[arg(long, global = true)]
    pub sequential: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Segment one image and write the rendered label map plus a JSON sidecar.
    Segment(SegmentArgs),
    /// Count the distinct labels reachable for each angle setting of the segment-count table.
    Table2(Table2Args),
    /// Segment one image at several angles and rank them.
    Sweep(SweepArgs),
    /// Run methods over a dataset manifest and write CSV and JSON reports.
    Bench(BenchArgs),
    /// Convert between a grayscale angle and its intensity thresholds.
    Thresholds(ThresholdArgs),
    /// Compare label noise with and without intensity normalization.
    Ablation(AblationArgs),
}

#[derive(Debug, Args)]
pub struct SegmentArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value = "rgb", value_parser = mode_arg)]
    pub mode: Mode,
    /// Red-channel angle; the only angle used in gray mode.
    #[arg(long, default_value = "pi", value_parser = theta_arg)]
    pub theta1: f64,
    #[arg(long, default_value = "pi", value_parser = theta_arg)]
    pub theta2: f64,
    #[arg(long, default_value = "pi", value_parser = theta_arg)]
    pub theta3: f64,
    /// Feed raw 0..255 values to the encoder instead of [0, 1].
    #[arg(long)]
    pub no_normalize: bool,
    /// Output PNG; the sidecar goes next to it with a `.json` extension.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct Table2Args {
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also scan the lattice {0, STEP, ..., 1}^3.
    #[arg(long, value_name = "STEP", value_parser = unit_interval_arg)]
    pub grid: Option<f64>,
    /// Skip random sampling (requires --grid).
    #[arg(long, requires = "grid")]
    pub grid_only: bool,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Comma-separated angles, e.g. `3pi/4,pi,5pi/4`.
    #[arg(long, value_parser = theta_list_arg)]
    pub thetas: ThetaList,
    #[arg(long, default_value = "rgb", value_parser = mode_arg)]
    pub mode: Mode,
    #[arg(long)]
    pub mask: Option<PathBuf>,
    #[arg(long)]
    pub no_normalize: bool,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long, default_value = "iqft,otsu,kmeans", value_parser = methods_arg)]
    pub methods: MethodList,
    /// One angle for all channels, or three comma-separated.
    #[arg(long, default_value = "pi", value_parser = theta_list_arg)]
    pub theta: ThetaList,
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub no_normalize: bool,
    /// Directory for bench.csv and bench.json.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("input").required(true).args(["theta", "ith"])))]
pub struct ThresholdArgs {
    #[arg(long, value_parser = theta_arg)]
    pub theta: Option<f64>,
    /// Lowest threshold intensity in (0, 1].
    #[arg(long)]
    pub ith: Option<f64>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("source").required(true).args(["manifest", "input"])))]
pub struct AblationArgs {
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long, num_args = 1..)]
    pub input: Vec<PathBuf>,
    #[arg(long, default_value = "pi", value_parser = theta_arg)]
    pub theta: f64,
    #[arg(long)]
    pub json: bool,
}
