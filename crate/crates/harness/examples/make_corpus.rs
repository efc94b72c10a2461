//! Writes the bundled synthetic corpus: five 128x96 scenes with gradient or
//! striped backgrounds, shaded objects, background distractors and +/-4 level
//! pixel noise, plus ground-truth masks with a void ring along every
//! foreground boundary.
//!
//!     cargo run -p iqft-harness --example make_corpus -- data/corpus

use std::fs;
use std::path::PathBuf;

use iqft_core::imageio::{encode_mask, encode_png, RgbImage};
use iqft_core::metrics::GroundTruthMask;
use iqft_core::rng;
use serde_json::json;

const W: u32 = 128;
const H: u32 = 96;
const NOISE: i32 = 4;
/// Pixels with |signed distance| below this are void.
const VOID_HALF_WIDTH: f64 = 1.0;

enum Shape {
    Disc { cx: f64, cy: f64, r: f64 },
    Rect { cx: f64, cy: f64, hw: f64, hh: f64 },
    Ellipse { cx: f64, cy: f64, a: f64, b: f64 },
}

impl Shape {
    /// Approximate signed distance, negative inside.
    fn sd(&self, x: f64, y: f64) -> f64 {
        match *self {
            Shape::Disc { cx, cy, r } => ((x - cx).powi(2) + (y - cy).powi(2)).sqrt() - r,
            Shape::Rect { cx, cy, hw, hh } => ((x - cx).abs() - hw).max((y - cy).abs() - hh),
            Shape::Ellipse { cx, cy, a, b } => {
                let n = (((x - cx) / a).powi(2) + ((y - cy) / b).powi(2)).sqrt();
                (n - 1.0) * a.min(b)
            }
        }
    }
}

struct Object {
    shape: Shape,
    color: [f64; 3],
    /// Brightness gain at the bottom-right corner relative to the top-left.
    shading: f64,
    /// Distractors are painted but belong to the background class.
    foreground: bool,
}

fn obj(shape: Shape, color: [f64; 3], shading: f64) -> Object {
    Object {
        shape,
        color,
        shading,
        foreground: true,
    }
}

fn distractor(shape: Shape, color: [f64; 3]) -> Object {
    Object {
        shape,
        color,
        shading: 0.0,
        foreground: false,
    }
}

struct Scene {
    id: &'static str,
    background: fn(f64, f64) -> [f64; 3],
    objects: Vec<Object>,
}

fn lerp(a: [f64; 3], b: [f64; 3], t: f64) -> [f64; 3] {
    [0, 1, 2].map(|i| a[i] + (b[i] - a[i]) * t)
}

fn scenes() -> Vec<Scene> {
    let (w, h) = (W as f64, H as f64);
    vec![
        Scene {
            id: "01-disc",
            background: |_, y| lerp([20.0, 30.0, 60.0], [60.0, 70.0, 120.0], y / H as f64),
            objects: vec![
                obj(
                    Shape::Disc {
                        cx: 64.0,
                        cy: 48.0,
                        r: 26.0,
                    },
                    [235.0, 200.0, 60.0],
                    -0.45,
                ),
                distractor(
                    Shape::Rect {
                        cx: 112.0,
                        cy: 14.0,
                        hw: 10.0,
                        hh: 8.0,
                    },
                    [150.0, 150.0, 170.0],
                ),
            ],
        },
        Scene {
            id: "02-card",
            background: |x, _| lerp([150.0, 160.0, 150.0], [240.0, 235.0, 225.0], x / W as f64),
            objects: vec![obj(
                Shape::Rect {
                    cx: 60.0,
                    cy: 50.0,
                    hw: 30.0,
                    hh: 20.0,
                },
                [60.0, 40.0, 35.0],
                1.2,
            )],
        },
        Scene {
            id: "03-pair",
            background: |_, _| [90.0, 140.0, 90.0],
            objects: vec![
                obj(
                    Shape::Disc {
                        cx: 38.0,
                        cy: 40.0,
                        r: 18.0,
                    },
                    [220.0, 50.0, 40.0],
                    -0.3,
                ),
                obj(
                    Shape::Disc {
                        cx: 92.0,
                        cy: 60.0,
                        r: 20.0,
                    },
                    [40.0, 60.0, 200.0],
                    0.3,
                ),
                distractor(
                    Shape::Ellipse {
                        cx: 100.0,
                        cy: 16.0,
                        a: 18.0,
                        b: 8.0,
                    },
                    [60.0, 100.0, 60.0],
                ),
            ],
        },
        Scene {
            id: "04-ellipse",
            background: |x, _| lerp([30.0; 3], [190.0; 3], x / W as f64),
            objects: vec![obj(
                Shape::Ellipse {
                    cx: 70.0,
                    cy: 48.0,
                    a: 34.0,
                    b: 22.0,
                },
                [200.0, 190.0, 170.0],
                -0.2,
            )],
        },
        Scene {
            id: "05-stripes",
            background: |x, y| {
                if ((x + y) as i64 / 8) % 2 == 0 {
                    [70.0, 90.0, 110.0]
                } else {
                    [170.0, 180.0, 190.0]
                }
            },
            objects: vec![obj(
                Shape::Rect {
                    cx: w / 2.0,
                    cy: h / 2.0,
                    hw: 22.0,
                    hh: 26.0,
                },
                [240.0, 140.0, 30.0],
                -0.3,
            )],
        },
    ]
}

fn render(scene: &Scene, seed: u64) -> (RgbImage, GroundTruthMask) {
    let mut g = rng::seeded(seed);
    let mut mask = Vec::with_capacity((W * H) as usize);
    let img = RgbImage::from_fn(W, H, |x, y| {
        let (fx, fy) = (x as f64 + 0.5, y as f64 + 0.5);
        let mut color = (scene.background)(fx, fy);
        let mut inside = false;
        let mut near_edge = false;
        for o in &scene.objects {
            let d = o.shape.sd(fx, fy);
            if d < 0.0 {
                let gain = 1.0 + o.shading * (fx / W as f64 + fy / H as f64) / 2.0;
                color = o.color.map(|v| v * gain);
                inside = o.foreground;
            }
            if o.foreground {
                near_edge |= d.abs() < VOID_HALF_WIDTH;
            }
        }
        mask.push(if near_edge {
            GroundTruthMask::VOID
        } else {
            u8::from(inside)
        });
        color.map(|v| {
            let n = rng::index(&mut g, (2 * NOISE + 1) as usize) as i32 - NOISE;
            (v.round().clamp(0.0, 255.0) as i32 + n).clamp(0, 255) as u8
        })
    });
    (
        img,
        GroundTruthMask::new(W, H, mask).expect("mask matches image size"),
    )
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(
        std::env::args()
            .nth(1)
            .unwrap_or_else(|| "data/corpus".into()),
    );
    fs::create_dir_all(&dir)?;
    let mut entries = Vec::new();
    for (i, scene) in scenes().iter().enumerate() {
        let (img, mask) = render(scene, 1000 + i as u64);
        let image = format!("{}.png", scene.id);
        let mask_name = format!("{}_mask.png", scene.id);
        fs::write(dir.join(&image), encode_png(&img)?)?;
        fs::write(dir.join(&mask_name), encode_mask(&mask)?)?;
        entries.push(json!({"id": scene.id, "image": image, "mask": mask_name}));
    }
    let manifest = json!({"root": ".", "entries": entries});
    fs::write(
        dir.join("manifest.json"),
        serde_json::to_string_pretty(&manifest)? + "\n",
    )?;
    println!("wrote {} scenes to {}", entries.len(), dir.display());
    Ok(())
}
