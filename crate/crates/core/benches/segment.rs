use std::f64::consts::PI;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use iqft_core::baselines::{kmeans_image, otsu_segment};
use iqft_core::exec::Execution;
use iqft_core::imageio::{to_gray, RgbImage};
use iqft_core::iqft::{segment_gray_with, segment_rgb_with, AngleParams};
use iqft_core::pipeline::label_set_grid;

fn test_image(side: u32) -> RgbImage {
    RgbImage::from_fn(side, side, |x, y| {
        [
            (x * 255 / side) as u8,
            (y * 255 / side) as u8,
            ((x ^ y) & 0xff) as u8,
        ]
    })
}

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn rgb(c: &mut Criterion) {
    let params = AngleParams::uniform(PI).unwrap();
    let mut group = c.benchmark_group("segment_rgb");
    for side in [128u32, 512] {
        let img = test_image(side);
        group.throughput(Throughput::Elements(u64::from(side * side)));
        for (name, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(name, side), &img, |b, img| {
                b.iter(|| segment_rgb_with(img, &params, true, exec).unwrap())
            });
        }
    }
    group.finish();
}

fn gray(c: &mut Criterion) {
    let img = to_gray(&test_image(512));
    let mut group = c.benchmark_group("segment_gray");
    for (name, exec) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| segment_gray_with(&img, 4.0 * PI, exec).unwrap())
        });
    }
    group.finish();
}

fn label_grid(c: &mut Criterion) {
    let params = AngleParams::new(PI, PI / 2.0, PI / 4.0).unwrap();
    let mut group = c.benchmark_group("label_set_grid");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| label_set_grid(&params, 0.02, exec).unwrap())
        });
    }
    group.finish();
}

fn baselines(c: &mut Criterion) {
    let img = test_image(128);
    let g = to_gray(&img);
    c.bench_function("otsu_128", |b| b.iter(|| otsu_segment(&g).unwrap()));
    c.bench_function("kmeans2_128", |b| {
        b.iter(|| kmeans_image(&img, 2, 0).unwrap())
    });
}

criterion_group!(benches, rgb, gray, label_grid, baselines);
criterion_main!(benches);
