//! Light-field descriptors: Zernike and Fourier coefficients of the ten
//! dodecahedral silhouettes, compared under the dodecahedral rotation group.

use serde::{Deserialize, Serialize};

use super::contour::fourier_contour;
use super::normalize::NormalizedMesh;
use super::silhouette::{lightfield_projections, rotation_group, BinaryImage, VIEWS, VIEW_SIZE};
use super::zernike::zernike_magnitudes;
use crate::error::{Error, Result};
use crate::media::RasterImage;

pub const VIEW_DESCRIPTOR_LEN: usize = 45;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LightFieldDescriptor {
    /// One 45-value descriptor per view axis, in canonical axis order.
    pub views: Vec<Vec<f64>>,
}

/// 35 Zernike magnitudes followed by 10 Fourier contour magnitudes.
pub fn view_descriptor(silhouette: &BinaryImage) -> Result<Vec<f64>> {
    let mut d = zernike_magnitudes(silhouette)?;
    d.extend(fourier_contour(silhouette)?);
    Ok(d)
}

pub fn lightfield_descriptor(nm: &NormalizedMesh) -> Result<LightFieldDescriptor> {
    let views = lightfield_projections(nm)?
        .iter()
        .map(|s| view_descriptor(s).map_err(|_| Error::DegenerateMesh("empty silhouette".into())))
        .collect::<Result<Vec<_>>>()?;
    Ok(LightFieldDescriptor { views })
}

pub fn view_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// Minimum over the 60 dodecahedral rotations of the summed view distances.
pub fn lightfield_distance(a: &LightFieldDescriptor, b: &LightFieldDescriptor) -> f64 {
    let mut pair = [[0.0; VIEWS]; VIEWS];
    for (i, row) in pair.iter_mut().enumerate() {
        for (j, d) in row.iter_mut().enumerate() {
            *d = view_distance(&a.views[i], &b.views[j]);
        }
    }
    rotation_group()
        .iter()
        .map(|p| (0..VIEWS).map(|i| pair[i][p[i]]).sum::<f64>())
        .fold(f64::INFINITY, f64::min)
}

/// Dark strokes on a light background → solid silhouette. Pixels at or below
/// the Otsu threshold are strokes; background is whatever a 4-connected flood
/// from the border reaches, everything else is filled.
pub fn sketch_silhouette(sketch: &RasterImage) -> Result<BinaryImage> {
    let (w, h) = (sketch.width(), sketch.height());
    let gray: Vec<u8> = sketch.to_gray().iter().map(|g| g.round().clamp(0.0, 255.0) as u8).collect();
    let threshold = otsu_threshold(&gray).ok_or(Error::EmptyImage)?;
    let stroke: Vec<bool> = gray.iter().map(|&g| g <= threshold).collect();
    let mut outside = vec![false; w * h];
    let mut stack: Vec<usize> = (0..w)
        .flat_map(|x| [x, (h - 1) * w + x])
        .chain((0..h).flat_map(|y| [y * w, y * w + w - 1]))
        .filter(|&i| !stroke[i])
        .collect();
    while let Some(i) = stack.pop() {
        if outside[i] {
            continue;
        }
        outside[i] = true;
        let (x, y) = (i % w, i / w);
        let mut push = |j: usize| {
            if !stroke[j] && !outside[j] {
                stack.push(j);
            }
        };
        if x > 0 { push(i - 1) }
        if x + 1 < w { push(i + 1) }
        if y > 0 { push(i - w) }
        if y + 1 < h { push(i + w) }
    }
    let filled = BinaryImage { width: w, height: h, bits: outside.iter().map(|&o| !o).collect() };
    fit_to_view(&filled)
}

/// Otsu threshold over 8-bit values; `None` when the image has a single level.
pub fn otsu_threshold(values: &[u8]) -> Option<u8> {
    let mut hist = [0usize; 256];
    values.iter().for_each(|&v| hist[v as usize] += 1);
    let total = values.len() as f64;
    let sum_all: f64 = hist.iter().enumerate().map(|(i, &c)| i as f64 * c as f64).sum();
    let (mut w0, mut sum0) = (0.0, 0.0);
    let mut best: Option<(f64, u8)> = None;
    for t in 0..255 {
        w0 += hist[t] as f64;
        sum0 += t as f64 * hist[t] as f64;
        let w1 = total - w0;
        if w0 == 0.0 || w1 == 0.0 {
            continue;
        }
        let diff = sum0 / w0 - (sum_all - sum0) / w1;
        let between = w0 * w1 * diff * diff;
        if best.is_none_or(|(b, _)| between > b) {
            best = Some((between, t as u8));
        }
    }
    best.map(|(_, t)| t)
}

/// Crops to the bounding box, pads to a centred square with a 5 % margin and
/// resamples to the view resolution (bilinear, thresholded at one half).
fn fit_to_view(img: &BinaryImage) -> Result<BinaryImage> {
    let (mut x0, mut y0, mut x1, mut y1) = (usize::MAX, usize::MAX, 0, 0);
    for y in 0..img.height {
        for x in 0..img.width {
            if img.get(x, y) {
                x0 = x0.min(x);
                y0 = y0.min(y);
                x1 = x1.max(x);
                y1 = y1.max(y);
            }
        }
    }
    if x0 == usize::MAX {
        return Err(Error::EmptyImage);
    }
    let (bw, bh) = ((x1 - x0 + 1) as f64, (y1 - y0 + 1) as f64);
    let side = bw.max(bh) * 1.1;
    let (cx, cy) = (x0 as f64 + bw / 2.0, y0 as f64 + bh / 2.0);
    let scale = side / VIEW_SIZE as f64;
    let value = |x: i64, y: i64| {
        x >= 0 && y >= 0 && (x as usize) < img.width && (y as usize) < img.height && img.get(x as usize, y as usize)
    };
    let half = VIEW_SIZE as f64 / 2.0;
    Ok(BinaryImage::from_fn(VIEW_SIZE, VIEW_SIZE, |x, y| {
        // Source coordinates relative to pixel centres.
        let sx = cx + (x as f64 + 0.5 - half) * scale - 0.5;
        let sy = cy + (y as f64 + 0.5 - half) * scale - 0.5;
        let (fx, fy) = (sx.floor(), sy.floor());
        let (tx, ty) = (sx - fx, sy - fy);
        let (ix, iy) = (fx as i64, fy as i64);
        let at = |dx: i64, dy: i64| if value(ix + dx, iy + dy) { 1.0 } else { 0.0 };
        let top = at(0, 0) * (1.0 - tx) + at(1, 0) * tx;
        let bottom = at(0, 1) * (1.0 - tx) + at(1, 1) * tx;
        top * (1.0 - ty) + bottom * ty >= 0.5
    }))
}

pub fn sketch_to_lightfield_query(sketch: &RasterImage) -> Result<Vec<f64>> {
    view_descriptor(&sketch_silhouette(sketch)?)
}

/// Distance from a single sketched view to a model: its closest view.
pub fn sketch_distance(query: &[f64], model: &LightFieldDescriptor) -> f64 {
    model.views.iter().map(|v| view_distance(query, v)).fold(f64::INFINITY, f64::min)
}
