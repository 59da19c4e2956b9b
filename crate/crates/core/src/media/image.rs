use std::io::Cursor;
use std::path::Path;

use super::corrupt;
use crate::error::{Error, Result};

const PNG_MAGIC: &[u8] = b"\x89PNG\r\n\x1a\n";

/// Row-major 8-bit RGB raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RasterImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl RasterImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(corrupt("image dimensions must be at least 1x1"));
        }
        if width * height * 3 != pixels.len() {
            return Err(corrupt(format!(
                "pixel buffer holds {} bytes, expected {}",
                pixels.len(),
                width * height * 3
            )));
        }
        Ok(RasterImage { width, height, pixels })
    }

    /// Fills an image from a per-pixel closure. Panics on a zero dimension.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> [u8; 3]) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        let mut pixels = Vec::with_capacity(width * height * 3);
        for y in 0..height {
            for x in 0..width {
                pixels.extend_from_slice(&f(x, y));
            }
        }
        RasterImage { width, height, pixels }
    }

    pub fn filled(width: usize, height: usize, rgb: [u8; 3]) -> Self {
        Self::from_fn(width, height, |_, _| rgb)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> [u8; 3] {
        let i = (y * self.width + x) * 3;
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, rgb: [u8; 3]) {
        let i = (y * self.width + x) * 3;
        self.pixels[i..i + 3].copy_from_slice(&rgb);
    }

    /// Luma (0.299 R + 0.587 G + 0.114 B) on the 0..=255 scale, row-major.
    pub fn to_gray(&self) -> Vec<f64> {
        self.pixels
            .chunks_exact(3)
            .map(|p| 0.299 * p[0] as f64 + 0.587 * p[1] as f64 + 0.114 * p[2] as f64)
            .collect()
    }

    /// Resamples to `width`×`height` with bilinear interpolation (pixel-center aligned).
    pub fn resize(&self, width: usize, height: usize) -> RasterImage {
        let channels: Vec<Vec<f64>> = (0..3)
            .map(|c| self.pixels.iter().skip(c).step_by(3).map(|&v| v as f64).collect())
            .collect();
        let resized: Vec<Vec<f64>> = channels
            .iter()
            .map(|ch| resample_bilinear(ch, self.width, self.height, width, height))
            .collect();
        RasterImage::from_fn(width, height, |x, y| {
            let i = y * width + x;
            [0, 1, 2].map(|c| resized[c][i].round().clamp(0.0, 255.0) as u8)
        })
    }
}

/// Bilinear resampling of a single-channel row-major plane.
pub(crate) fn resample_bilinear(
    src: &[f64],
    sw: usize,
    sh: usize,
    dw: usize,
    dh: usize,
) -> Vec<f64> {
    let mut out = Vec::with_capacity(dw * dh);
    let sx = sw as f64 / dw as f64;
    let sy = sh as f64 / dh as f64;
    for y in 0..dh {
        let fy = ((y as f64 + 0.5) * sy - 0.5).clamp(0.0, (sh - 1) as f64);
        let y0 = fy.floor() as usize;
        let y1 = (y0 + 1).min(sh - 1);
        let ty = fy - y0 as f64;
        for x in 0..dw {
            let fx = ((x as f64 + 0.5) * sx - 0.5).clamp(0.0, (sw - 1) as f64);
            let x0 = fx.floor() as usize;
            let x1 = (x0 + 1).min(sw - 1);
            let tx = fx - x0 as f64;
            // a + (b - a) t keeps flat regions exactly flat.
            let lerp = |a: f64, b: f64, t: f64| a + (b - a) * t;
            let top = lerp(src[y0 * sw + x0], src[y0 * sw + x1], tx);
            let bottom = lerp(src[y1 * sw + x0], src[y1 * sw + x1], tx);
            out.push(lerp(top, bottom, ty));
        }
    }
    out
}

pub fn load_image(path: &Path) -> Result<RasterImage> {
    let bytes = std::fs::read(path)?;
    decode_image(&bytes)
}

/// Decodes PNG or binary PPM (P6). Anything else is `UnsupportedFormat`.
pub fn decode_image(bytes: &[u8]) -> Result<RasterImage> {
    if bytes.starts_with(PNG_MAGIC) {
        decode_png(bytes)
    } else if bytes.starts_with(b"P6") {
        decode_ppm(bytes)
    } else if bytes.len() >= 2 && bytes[0] == b'P' && bytes[1].is_ascii_digit() {
        Err(Error::UnsupportedFormat(format!(
            "netpbm variant P{} (only binary P6 is supported)",
            bytes[1] as char
        )))
    } else {
        Err(Error::UnsupportedFormat("not a PNG or P6 PPM file".into()))
    }
}

fn decode_png(bytes: &[u8]) -> Result<RasterImage> {
    let mut decoder = png::Decoder::new(Cursor::new(bytes));
    decoder.set_transformations(png::Transformations::EXPAND | png::Transformations::STRIP_16);
    let mut reader = decoder.read_info().map_err(|e| corrupt(format!("png: {e}")))?;
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| corrupt("png: image too large"))?;
    let mut buf = vec![0u8; size];
    let info = reader.next_frame(&mut buf).map_err(|e| corrupt(format!("png: {e}")))?;
    let (w, h) = (info.width as usize, info.height as usize);
    let data = &buf[..info.line_size * h];
    let channels = match info.color_type {
        png::ColorType::Grayscale => 1,
        png::ColorType::GrayscaleAlpha => 2,
        png::ColorType::Rgb => 3,
        png::ColorType::Rgba => 4,
        png::ColorType::Indexed => {
            return Err(Error::UnsupportedFormat("unexpanded indexed png".into()))
        }
    };
    let mut pixels = Vec::with_capacity(w * h * 3);
    for row in data.chunks_exact(info.line_size) {
        for px in row[..w * channels].chunks_exact(channels) {
            match channels {
                1 | 2 => pixels.extend_from_slice(&[px[0], px[0], px[0]]),
                _ => pixels.extend_from_slice(&px[..3]),
            }
        }
    }
    RasterImage::new(w, h, pixels)
}

fn decode_ppm(bytes: &[u8]) -> Result<RasterImage> {
    // Header: magic, width, height, maxval separated by whitespace; `#` starts a comment.
    let mut pos = 2;
    let mut fields = [0usize; 3];
    for field in fields.iter_mut() {
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while pos < bytes.len() && bytes[pos] != b'\n' {
                        pos += 1;
                    }
                }
                Some(_) => break,
                None => return Err(corrupt("ppm: truncated header")),
            }
        }
        let start = pos;
        while pos < bytes.len() && bytes[pos].is_ascii_digit() {
            pos += 1;
        }
        if start == pos {
            return Err(corrupt("ppm: expected a decimal header field"));
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| corrupt("ppm: header field out of range"))?;
    }
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        _ => return Err(corrupt("ppm: missing whitespace after header")),
    }
    let [w, h, maxval] = fields;
    if w == 0 || h == 0 || maxval == 0 || maxval > 65535 {
        return Err(corrupt("ppm: invalid dimensions or maxval"));
    }
    let sample_bytes = if maxval > 255 { 2 } else { 1 };
    let needed = w
        .checked_mul(h)
        .and_then(|n| n.checked_mul(3 * sample_bytes))
        .ok_or_else(|| corrupt("ppm: dimensions overflow"))?;
    let payload = &bytes[pos..];
    if payload.len() < needed {
        return Err(corrupt(format!(
            "ppm: payload has {} bytes, expected {needed}",
            payload.len()
        )));
    }
    let pixels = if sample_bytes == 2 {
        // 16-bit samples are big-endian; keep the high byte.
        payload[..needed].chunks_exact(2).map(|s| s[0]).collect()
    } else {
        payload[..needed].to_vec()
    };
    RasterImage::new(w, h, pixels)
}

/// Encodes an RGB8 PNG. Output is deterministic for a given image.
pub fn encode_png(img: &RasterImage) -> Vec<u8> {
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, img.width as u32, img.height as u32);
        enc.set_color(png::ColorType::Rgb);
        enc.set_depth(png::BitDepth::Eight);
        let mut writer = enc.write_header().expect("writing to a Vec cannot fail");
        writer
            .write_image_data(&img.pixels)
            .expect("buffer length matches header");
    }
    out
}
