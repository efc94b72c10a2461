//! Raster types, PNG/JPEG decoding, grayscale conversion and label-map rendering.

use std::collections::BTreeSet;
use std::io::Cursor;

use image::{ImageEncoder, RgbImage as ImgRgb};

use crate::error::{Error, Result};
use crate::metrics::GroundTruthMask;

/// Luma weights applied to normalized R, G, B.
pub const LUMA_WEIGHTS: [f64; 3] = [0.2125, 0.7154, 0.0721];

/// Colors used when rendering label `i` of a [`LabelMap`].
///
/// | label | RGB             |
/// |-------|-----------------|
/// | 0     | (0, 0, 0)       |
/// | 1     | (230, 25, 75)   |
/// | 2     | (60, 180, 75)   |
/// | 3     | (255, 225, 25)  |
/// | 4     | (0, 130, 200)   |
/// | 5     | (245, 130, 48)  |
/// | 6     | (145, 30, 180)  |
/// | 7     | (255, 255, 255) |
pub const PALETTE: [[u8; 3]; 8] = [
    [0, 0, 0],
    [230, 25, 75],
    [60, 180, 75],
    [255, 225, 25],
    [0, 130, 200],
    [245, 130, 48],
    [145, 30, 180],
    [255, 255, 255],
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ImageFormat {
    Png,
    Jpeg,
}

impl ImageFormat {
    /// Sniffs the format from the leading magic bytes.
    pub fn detect(bytes: &[u8]) -> Option<Self> {
        if bytes.starts_with(b"\x89PNG\r\n\x1a\n") {
            Some(ImageFormat::Png)
        } else if bytes.starts_with(&[0xFF, 0xD8, 0xFF]) {
            Some(ImageFormat::Jpeg)
        } else {
            None
        }
    }

    fn to_image(self) -> image::ImageFormat {
        match self {
            ImageFormat::Png => image::ImageFormat::Png,
            ImageFormat::Jpeg => image::ImageFormat::Jpeg,
        }
    }
}

fn check_len(width: u32, height: u32, channels: usize, len: usize) -> Result<()> {
    if width as usize * height as usize * channels == len {
        Ok(())
    } else {
        Err(Error::BufferLength {
            width,
            height,
            channels,
            len,
        })
    }
}

/// Row-major 8-bit RGB raster.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RgbImage {
    width: u32,
    height: u32,
    data: Vec<u8>,
}

impl RgbImage {
    pub fn new(width: u32, height: u32, data: Vec<u8>) -> Result<Self> {
        check_len(width, height, 3, data.len())?;
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> [u8; 3]) -> Self {
        let mut data = Vec::with_capacity(width as usize * height as usize * 3);
        for y in 0..height {
            for x in 0..width {
                data.extend_from_slice(&f(x, y));
            }
        }
        Self {
            width,
            height,
            data,
        }
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

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn pixel_count(&self) -> usize {
        self.width as usize * self.height as usize
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn pixel(&self, x: u32, y: u32) -> [u8; 3] {
        let i = 3 * (y as usize * self.width as usize + x as usize);
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    /// Pixels as normalized `[0, 1]` triples.
    pub fn normalized_pixels(&self) -> Vec<[f64; 3]> {
        self.data
            .chunks_exact(3)
            .map(|p| {
                [
                    p[0] as f64 / 255.0,
                    p[1] as f64 / 255.0,
                    p[2] as f64 / 255.0,
                ]
            })
            .collect()
    }
}

/// Row-major grayscale raster with intensities in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct GrayImage {
    width: u32,
    height: u32,
    data: Vec<f64>,
}

impl GrayImage {
    pub fn new(width: u32, height: u32, data: Vec<f64>) -> Result<Self> {
        check_len(width, height, 1, data.len())?;
        if let Some(&bad) = data.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::domain("intensity", bad, "[0, 1]"));
        }
        Ok(Self {
            width,
            height,
            data,
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

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }
}

/// Row-major per-pixel segment labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelMap {
    width: u32,
    height: u32,
    labels: Vec<u8>,
}

impl LabelMap {
    pub fn new(width: u32, height: u32, labels: Vec<u8>) -> Result<Self> {
        check_len(width, height, 1, labels.len())?;
        if let Some(&bad) = labels.iter().find(|&&l| l as usize >= PALETTE.len()) {
            return Err(Error::LabelRange {
                label: bad as u32,
                max: PALETTE.len() as u32 - 1,
            });
        }
        Ok(Self {
            width,
            height,
            labels,
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

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn get(&self, x: u32, y: u32) -> u8 {
        self.labels[y as usize * self.width as usize + x as usize]
    }

    /// Number of pixels per label value `0..8`.
    pub fn histogram(&self) -> [u64; 8] {
        let mut h = [0u64; 8];
        for &l in &self.labels {
            h[l as usize] += 1;
        }
        h
    }

    pub fn distinct(&self) -> BTreeSet<u8> {
        self.labels.iter().copied().collect()
    }
}

pub fn decode_image(bytes: &[u8], format: ImageFormat) -> Result<RgbImage> {
    let img = image::load_from_memory_with_format(bytes, format.to_image())
        .map_err(|e| Error::Decode(e.to_string()))?;
    let rgb = img.to_rgb8();
    let (w, h) = rgb.dimensions();
    RgbImage::new(w, h, rgb.into_raw())
}

/// Decodes PNG or JPEG, picking the format from the magic bytes.
pub fn decode_image_auto(bytes: &[u8]) -> Result<RgbImage> {
    let format = ImageFormat::detect(bytes)
        .ok_or_else(|| Error::Decode("unrecognized image signature at byte 0".into()))?;
    decode_image(bytes, format)
}

pub fn encode_png(img: &RgbImage) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    image::codecs::png::PngEncoder::new(&mut out)
        .write_image(
            img.data(),
            img.width(),
            img.height(),
            image::ExtendedColorType::Rgb8,
        )
        .map_err(|e| Error::Encode(e.to_string()))?;
    Ok(out)
}

pub fn encode_jpeg(img: &RgbImage, quality: u8) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    image::codecs::jpeg::JpegEncoder::new_with_quality(&mut out, quality)
        .write_image(
            img.data(),
            img.width(),
            img.height(),
            image::ExtendedColorType::Rgb8,
        )
        .map_err(|e| Error::Encode(e.to_string()))?;
    Ok(out)
}

/// Weighted luma of the normalized channels, clamped to `[0, 1]`.
pub fn to_gray(img: &RgbImage) -> GrayImage {
    let [wr, wg, wb] = LUMA_WEIGHTS;
    let data = img
        .data()
        .chunks_exact(3)
        .map(|p| {
            let y = wr * (p[0] as f64 / 255.0)
                + wg * (p[1] as f64 / 255.0)
                + wb * (p[2] as f64 / 255.0);
            y.clamp(0.0, 1.0)
        })
        .collect();
    GrayImage {
        width: img.width(),
        height: img.height(),
        data,
    }
}

/// Reads a ground-truth mask PNG.
///
/// Single-channel 8-bit masks must only contain 0 (background), 1
/// (foreground) and 255 (void). Paletted masks are read by palette index:
/// 0 is background, 255 is void and every other index is foreground.
pub fn load_mask(bytes: &[u8]) -> Result<GroundTruthMask> {
    let mut decoder = png::Decoder::new(Cursor::new(bytes));
    decoder.set_transformations(png::Transformations::IDENTITY);
    let mut reader = decoder
        .read_info()
        .map_err(|e| Error::Decode(e.to_string()))?;
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| Error::Decode("mask dimensions overflow".into()))?;
    let mut buf = vec![0; size];
    let info = reader
        .next_frame(&mut buf)
        .map_err(|e| Error::Decode(e.to_string()))?;
    let (w, h) = (info.width, info.height);
    let values = unpack_samples(&buf, info.line_size, w as usize, h as usize, info.bit_depth)?;
    let values = match info.color_type {
        png::ColorType::Grayscale => {
            let bad: BTreeSet<u8> = values
                .iter()
                .copied()
                .filter(|v| !matches!(v, 0 | 1 | 255))
                .collect();
            if !bad.is_empty() {
                return Err(Error::MaskFormat {
                    values: bad.into_iter().collect(),
                });
            }
            values
        }
        png::ColorType::Indexed => values
            .into_iter()
            .map(|v| match v {
                0 => GroundTruthMask::BACKGROUND,
                255 => GroundTruthMask::VOID,
                _ => GroundTruthMask::FOREGROUND,
            })
            .collect(),
        other => {
            return Err(Error::Decode(format!(
                "mask must be 8-bit grayscale or paletted, found {other:?}"
            )))
        }
    };
    GroundTruthMask::new(w, h, values)
}

fn unpack_samples(
    buf: &[u8],
    line_size: usize,
    width: usize,
    height: usize,
    depth: png::BitDepth,
) -> Result<Vec<u8>> {
    let bits = match depth {
        png::BitDepth::One => 1,
        png::BitDepth::Two => 2,
        png::BitDepth::Four => 4,
        png::BitDepth::Eight => 8,
        png::BitDepth::Sixteen => {
            return Err(Error::Decode("16-bit masks are not supported".into()))
        }
    };
    let mut out = Vec::with_capacity(width * height);
    for row in buf.chunks(line_size).take(height) {
        if bits == 8 {
            out.extend_from_slice(&row[..width]);
            continue;
        }
        let per_byte = 8 / bits;
        let mask = (1u8 << bits) - 1;
        for x in 0..width {
            let byte = row[x / per_byte];
            let shift = 8 - bits * (x % per_byte + 1);
            out.push((byte >> shift) & mask);
        }
    }
    Ok(out)
}

/// Writes a mask as an 8-bit single-channel PNG.
pub fn encode_mask(mask: &GroundTruthMask) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    image::codecs::png::PngEncoder::new(&mut out)
        .write_image(
            mask.values(),
            mask.width(),
            mask.height(),
            image::ExtendedColorType::L8,
        )
        .map_err(|e| Error::Encode(e.to_string()))?;
    Ok(out)
}

/// Renders a label map as an RGB PNG using [`PALETTE`].
pub fn render_labelmap(lm: &LabelMap) -> Result<Vec<u8>> {
    let mut data = Vec::with_capacity(lm.labels().len() * 3);
    for &l in lm.labels() {
        data.extend_from_slice(&PALETTE[l as usize]);
    }
    encode_png(&RgbImage::new(lm.width(), lm.height(), data)?)
}

/// Inverse of [`render_labelmap`].
pub fn parse_labelmap(bytes: &[u8]) -> Result<LabelMap> {
    let img = image::load_from_memory_with_format(bytes, image::ImageFormat::Png)
        .map_err(|e| Error::Decode(e.to_string()))?;
    let rgb: ImgRgb = img.to_rgb8();
    let (w, h) = rgb.dimensions();
    let labels = rgb
        .pixels()
        .map(|p| {
            PALETTE
                .iter()
                .position(|c| *c == p.0)
                .map(|i| i as u8)
                .ok_or(Error::UnknownColor(p.0))
        })
        .collect::<Result<Vec<_>>>()?;
    LabelMap::new(w, h, labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gray_png(w: u32, h: u32, values: &[u8]) -> Vec<u8> {
        let mut out = Vec::new();
        image::codecs::png::PngEncoder::new(&mut out)
            .write_image(values, w, h, image::ExtendedColorType::L8)
            .unwrap();
        out
    }

    fn paletted_png(w: u32, h: u32, indices: &[u8]) -> Vec<u8> {
        let mut out = Vec::new();
        {
            let mut enc = png::Encoder::new(&mut out, w, h);
            enc.set_color(png::ColorType::Indexed);
            enc.set_depth(png::BitDepth::Eight);
            enc.set_palette((0..=255u8).flat_map(|i| [i, i, i]).collect::<Vec<_>>());
            let mut wr = enc.write_header().unwrap();
            wr.write_image_data(indices).unwrap();
        }
        out
    }

    #[test]
    fn decode_white_pixel() {
        let img = RgbImage::new(1, 1, vec![255, 255, 255]).unwrap();
        let bytes = encode_png(&img).unwrap();
        assert_eq!(decode_image(&bytes, ImageFormat::Png).unwrap(), img);
        assert_eq!(decode_image_auto(&bytes).unwrap(), img);
    }

    #[test]
    fn decode_checkerboard_row_major() {
        let img = RgbImage::from_fn(
            2,
            2,
            |x, y| if (x + y) % 2 == 0 { [0; 3] } else { [255; 3] },
        );
        let back = decode_image(&encode_png(&img).unwrap(), ImageFormat::Png).unwrap();
        assert_eq!(
            back.data(),
            &[0, 0, 0, 255, 255, 255, 255, 255, 255, 0, 0, 0]
        );
    }

    #[test]
    fn decode_expands_grayscale_source() {
        let bytes = gray_png(2, 1, &[10, 200]);
        let img = decode_image(&bytes, ImageFormat::Png).unwrap();
        assert_eq!(img.data(), &[10, 10, 10, 200, 200, 200]);
    }

    #[test]
    fn jpeg_roundtrip_gradient() {
        let img = RgbImage::from_fn(64, 48, |x, y| {
            [(x * 4) as u8, (y * 5) as u8, ((x + y) * 2) as u8]
        });
        let bytes = encode_jpeg(&img, 100).unwrap();
        let back = decode_image(&bytes, ImageFormat::Jpeg).unwrap();
        assert_eq!(back.dimensions(), img.dimensions());
        let worst = img
            .data()
            .iter()
            .zip(back.data())
            .map(|(a, b)| (*a as i32 - *b as i32).abs())
            .max()
            .unwrap();
        assert!(worst <= 3, "max channel error {worst}");
    }

    #[test]
    fn malformed_input_is_decode_error() {
        assert!(matches!(
            decode_image(b"\x89PNG\r\n\x1a\nnot really", ImageFormat::Png),
            Err(Error::Decode(_))
        ));
        assert!(matches!(
            decode_image_auto(b"GIF89a"),
            Err(Error::Decode(_))
        ));
    }

    #[test]
    fn gray_conversion_values() {
        let img = RgbImage::new(3, 1, vec![255, 255, 255, 0, 0, 0, 0, 255, 0]).unwrap();
        let g = to_gray(&img);
        assert!((g.data()[0] - 1.0).abs() < 1e-12);
        assert_eq!(g.data()[1], 0.0);
        assert!((g.data()[2] - 0.7154).abs() < 1e-12);
        assert!((LUMA_WEIGHTS.iter().sum::<f64>() - 1.0).abs() < 1e-4);
    }

    #[test]
    fn mask_project_format() {
        let m = load_mask(&gray_png(2, 2, &[0, 0, 0, 0])).unwrap();
        assert!(m.values().iter().all(|&v| v == GroundTruthMask::BACKGROUND));

        // 4x4 with a void ring around a 2x2 foreground core
        #[rustfmt::skip]
        let vals = [
            255, 255, 255, 255,
            255,   1,   1, 255,
            255,   1,   1, 255,
            255, 255, 255, 255,
        ];
        let m = load_mask(&gray_png(4, 4, &vals)).unwrap();
        assert_eq!(m.values(), &vals);
        assert_eq!(m.void_count(), 12);
    }

    #[test]
    fn mask_rejects_unexpected_values() {
        let err = load_mask(&gray_png(3, 1, &[0, 7, 9])).unwrap_err();
        assert_eq!(err, Error::MaskFormat { values: vec![7, 9] });
    }

    #[test]
    fn paletted_mask_collapses_to_binary() {
        let m = load_mask(&paletted_png(3, 1, &[0, 7, 255])).unwrap();
        assert_eq!(m.values(), &[0, 1, 255]);
        // re-encode in project format and read again
        let again = load_mask(&encode_mask(&m).unwrap()).unwrap();
        assert_eq!(again, m);
    }

    #[test]
    fn labelmap_render_roundtrip() {
        let lm = LabelMap::new(8, 2, (0..16).map(|i| (i % 8) as u8).collect()).unwrap();
        let png = render_labelmap(&lm).unwrap();
        let img = decode_image(&png, ImageFormat::Png).unwrap();
        let colors: BTreeSet<[u8; 3]> = img
            .data()
            .chunks_exact(3)
            .map(|c| [c[0], c[1], c[2]])
            .collect();
        assert_eq!(colors.len(), 8);
        assert_eq!(parse_labelmap(&png).unwrap(), lm);

        let constant = LabelMap::new(3, 3, vec![5; 9]).unwrap();
        let img = decode_image(&render_labelmap(&constant).unwrap(), ImageFormat::Png).unwrap();
        assert!(img.data().chunks_exact(3).all(|c| c == PALETTE[5]));
    }

    #[test]
    fn palette_is_injective() {
        let set: BTreeSet<_> = PALETTE.iter().collect();
        assert_eq!(set.len(), PALETTE.len());
    }

    #[test]
    fn buffer_length_checked() {
        assert!(RgbImage::new(2, 2, vec![0; 11]).is_err());
        assert!(LabelMap::new(1, 1, vec![8]).is_err());
        assert!(GrayImage::new(1, 1, vec![1.5]).is_err());
    }
}
