//! Number of distinct labels the RGB classifier can produce for a fixed set
//! of angles, estimated from random triples and from a dense lattice.

use std::f64::consts::PI;

use anyhow::{ensure, Result};
use iqft_core::exec::Execution;
use iqft_core::iqft::AngleParams;
use iqft_core::pipeline::{label_set_grid, label_set_random, labels_in};
use iqft_core::theta::format_theta;
use serde::Serialize;

/// The nine angle settings of the segment-count experiment, as
/// `(theta1, theta2, theta3)`.
pub const ROWS: [[f64; 3]; 9] = [
    [PI / 4.0; 3],
    [PI / 2.0; 3],
    [3.0 * PI / 4.0; 3],
    [PI; 3],
    [5.0 * PI / 4.0; 3],
    [3.0 * PI / 2.0; 3],
    [7.0 * PI / 4.0; 3],
    [2.0 * PI; 3],
    [PI / 4.0, PI / 2.0, PI],
];

#[derive(Clone, Debug, Serialize)]
pub struct LabelCount {
    pub count: usize,
    pub labels: Vec<u8>,
}

impl LabelCount {
    fn from_set(set: u8) -> Self {
        let labels = labels_in(set);
        Self {
            count: labels.len(),
            labels,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Table2Row {
    pub theta: [String; 3],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub random: Option<LabelCount>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<LabelCount>,
}

#[derive(Clone, Copy, Debug)]
pub struct Table2Options {
    pub samples: Option<usize>,
    pub seed: u64,
    pub grid_step: Option<f64>,
    pub exec: Execution,
}

pub fn run_table2(opts: &Table2Options) -> Result<Vec<Table2Row>> {
    ensure!(
        opts.samples.is_some() || opts.grid_step.is_some(),
        "nothing to do: give a sample count or a grid step"
    );
    if let Some(n) = opts.samples {
        ensure!(n >= 1, "sample count must be at least 1");
    }
    ROWS.iter()
        .map(|t| {
            let params = AngleParams::new(t[0], t[1], t[2])?;
            let random = opts
                .samples
                .map(|n| LabelCount::from_set(label_set_random(&params, n, opts.seed, opts.exec)));
            let grid = match opts.grid_step {
                Some(step) => Some(LabelCount::from_set(label_set_grid(
                    &params, step, opts.exec,
                )?)),
                None => None,
            };
            Ok(Table2Row {
                theta: t.map(format_theta),
                random,
                grid,
            })
        })
        .collect()
}
