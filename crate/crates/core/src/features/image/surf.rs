//! Upright SURF: box-filter Hessian detector and 64-d Haar-wavelet descriptor.

use crate::media::RasterImage;

/// Determinant-of-Hessian threshold on the 0..=255 intensity scale.
pub const SURF_THRESHOLD: f64 = 600.0;
const OCTAVES: usize = 3;
const SCALES: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Keypoint {
    pub x: f64,
    pub y: f64,
    pub sigma: f64,
    pub response: f64,
}

struct Integral {
    w: usize,
    h: usize,
    // (w + 1) × (h + 1), zero first row and column.
    sums: Vec<f64>,
}

impl Integral {
    fn new(gray: &[f64], w: usize, h: usize) -> Self {
        let stride = w + 1;
        let mut sums = vec![0.0; stride * (h + 1)];
        for y in 0..h {
            let mut row = 0.0;
            for x in 0..w {
                row += gray[y * w + x];
                sums[(y + 1) * stride + x + 1] = sums[y * stride + x + 1] + row;
            }
        }
        Integral { w, h, sums }
    }

    /// Sum over `[x, x + cols) × [y, y + rows)`, clipped to the image.
    fn boxsum(&self, x: i64, y: i64, cols: i64, rows: i64) -> f64 {
        let x0 = x.clamp(0, self.w as i64) as usize;
        let y0 = y.clamp(0, self.h as i64) as usize;
        let x1 = (x + cols).clamp(0, self.w as i64) as usize;
        let y1 = (y + rows).clamp(0, self.h as i64) as usize;
        if x1 <= x0 || y1 <= y0 {
            return 0.0;
        }
        let s = self.w + 1;
        self.sums[y1 * s + x1] - self.sums[y0 * s + x1] - self.sums[y1 * s + x0] + self.sums[y0 * s + x0]
    }

    /// Area-normalised box-filter approximation of det(H) at `(x, y)` for filter size `size`.
    fn hessian(&self, x: i64, y: i64, size: i64) -> f64 {
        let lobe = size / 3;
        let half = (size - 1) / 2;
        let dxx = self.boxsum(x - half, y - lobe + 1, size, 2 * lobe - 1)
            - 3.0 * self.boxsum(x - lobe / 2, y - lobe + 1, lobe, 2 * lobe - 1);
        let dyy = self.boxsum(x - lobe + 1, y - half, 2 * lobe - 1, size)
            - 3.0 * self.boxsum(x - lobe + 1, y - lobe / 2, 2 * lobe - 1, lobe);
        let dxy = self.boxsum(x + 1, y - lobe, lobe, lobe) + self.boxsum(x - lobe, y + 1, lobe, lobe)
            - self.boxsum(x - lobe, y - lobe, lobe, lobe)
            - self.boxsum(x + 1, y + 1, lobe, lobe);
        let inv_area = 1.0 / (size * size) as f64;
        let (dxx, dyy, dxy) = (dxx * inv_area, dyy * inv_area, dxy * inv_area);
        dxx * dyy - 0.81 * dxy * dxy
    }

    fn haar_x(&self, x: i64, y: i64, size: i64) -> f64 {
        let h = size / 2;
        self.boxsum(x, y - h, h, size) - self.boxsum(x - h, y - h, h, size)
    }

    fn haar_y(&self, x: i64, y: i64, size: i64) -> f64 {
        let h = size / 2;
        self.boxsum(x - h, y, size, h) - self.boxsum(x - h, y - h, size, h)
    }
}

fn filter_size(octave: usize, scale: usize) -> i64 {
    3 * ((1i64 << (octave + 1)) * (scale as i64 + 1) + 1)
}

/// Hessian keypoints over 3 octaves × 4 scales with 3×3×3 non-maximum suppression.
pub fn detect_keypoints(img: &RasterImage) -> Vec<Keypoint> {
    let (w, h) = (img.width(), img.height());
    let integral = Integral::new(&img.to_gray(), w, h);
    let mut keypoints = Vec::new();
    for octave in 0..OCTAVES {
        let step = 1usize << octave;
        let (gw, gh) = (w / step, h / step);
        if gw < 3 || gh < 3 {
            break;
        }
        let layers: Vec<Vec<f64>> = (0..SCALES)
            .map(|s| {
                let size = filter_size(octave, s);
                let mut layer = Vec::with_capacity(gw * gh);
                for gy in 0..gh {
                    for gx in 0..gw {
                        layer.push(integral.hessian((gx * step) as i64, (gy * step) as i64, size));
                    }
                }
                layer
            })
            .collect();
        // The largest filter of the octave must fit inside the image.
        let border = ((filter_size(octave, SCALES - 1) as usize + 1) / (2 * step)) + 1;
        if gw <= 2 * border || gh <= 2 * border {
            continue;
        }
        for s in 1..SCALES - 1 {
            for gy in border..gh - border {
                for gx in border..gw - border {
                    let v = layers[s][gy * gw + gx];
                    if v <= SURF_THRESHOLD {
                        continue;
                    }
                    let is_max = (s - 1..=s + 1).all(|ls| {
                        (gy - 1..=gy + 1).all(|ny| {
                            (gx - 1..=gx + 1).all(|nx| {
                                (ls == s && ny == gy && nx == gx) || layers[ls][ny * gw + nx] < v
                            })
                        })
                    });
                    if is_max {
                        keypoints.push(Keypoint {
                            x: (gx * step) as f64,
                            y: (gy * step) as f64,
                            sigma: 1.2 * filter_size(octave, s) as f64 / 9.0,
                            response: v,
                        });
                    }
                }
            }
        }
    }
    keypoints
}

fn describe(integral: &Integral, kp: &Keypoint) -> Option<Vec<f64>> {
    let s = kp.sigma;
    let haar = (2.0 * s.round()).max(2.0) as i64;
    let g_sigma = 3.3 * s;
    let mut desc = Vec::with_capacity(64);
    for i in 0..4 {
        for j in 0..4 {
            let mut acc = [0.0; 4];
            for a in 0..5 {
                for b in 0..5 {
                    let u = (-10.0 + 5.0 * i as f64 + a as f64 + 0.5) * s;
                    let v = (-10.0 + 5.0 * j as f64 + b as f64 + 0.5) * s;
                    let px = (kp.x + u).round() as i64;
                    let py = (kp.y + v).round() as i64;
                    let g = (-(u * u + v * v) / (2.0 * g_sigma * g_sigma)).exp();
                    let dx = g * integral.haar_x(px, py, haar);
                    let dy = g * integral.haar_y(px, py, haar);
                    acc[0] += dx;
                    acc[1] += dx.abs();
                    acc[2] += dy;
                    acc[3] += dy.abs();
                }
            }
            desc.extend_from_slice(&acc);
        }
    }
    let norm = desc.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm < 1e-12 {
        return None;
    }
    desc.iter_mut().for_each(|v| *v /= norm);
    Some(desc)
}

/// Unit-norm 64-d descriptors of all detected keypoints (possibly none).
pub fn detect_local_descriptors(img: &RasterImage) -> Vec<Vec<f64>> {
    let integral = Integral::new(&img.to_gray(), img.width(), img.height());
    detect_keypoints(img)
        .iter()
        .filter_map(|kp| describe(&integral, kp))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disk(size: usize, cx: f64, cy: f64, r: f64) -> RasterImage {
        RasterImage::from_fn(size, size, |x, y| {
            let d = ((x as f64 - cx).powi(2) + (y as f64 - cy).powi(2)).sqrt();
            if d <= r { [0; 3] } else { [255; 3] }
        })
    }

    #[test]
    fn uniform_image_has_no_keypoints() {
        assert!(detect_local_descriptors(&RasterImage::filled(120, 90, [77, 77, 77])).is_empty());
    }

    #[test]
    fn filter_sizes_follow_octave_layout() {
        let sizes: Vec<i64> = (0..3).flat_map(|o| (0..4).map(move |s| filter_size(o, s))).collect();
        assert_eq!(sizes, vec![9, 15, 21, 27, 15, 27, 39, 51, 27, 51, 75, 99]);
    }

    #[test]
    fn box_sum_matches_naive_sum() {
        let img = RasterImage::from_fn(17, 11, |x, y| [(x * 13 + y * 7) as u8, 0, 0]);
        let gray = img.to_gray();
        let ii = Integral::new(&gray, 17, 11);
        for (x, y, c, r) in [(0, 0, 17, 11), (3, 2, 5, 4), (-4, -2, 8, 6), (15, 9, 10, 10)] {
            let mut naive = 0.0;
            for yy in y.max(0)..(y + r).min(11) {
                for xx in x.max(0)..(x + c).min(17) {
                    naive += gray[(yy * 17 + xx) as usize];
                }
            }
            assert!((ii.boxsum(x, y, c, r) - naive).abs() < 1e-9);
        }
    }

    #[test]
    fn descriptors_are_unit_norm() {
        let img = RasterImage::from_fn(160, 160, |x, y| {
            let v = ((x / 20 + y / 20) % 2) as u8 * 200 + ((x * y) % 23) as u8;
            [v, v, v]
        });
        let descs = detect_local_descriptors(&img);
        assert!(!descs.is_empty());
        for d in descs {
            assert_eq!(d.len(), 64);
            let n = d.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!((n - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn dark_disk_is_detected_at_its_centre() {
        for radius in [6.0, 12.0] {
            let (cx, cy) = (100.0, 100.0);
            let kps = detect_keypoints(&disk(200, cx, cy, radius));
            let target = radius / 1.2;
            let hit = kps.iter().any(|k| {
                let d = ((k.x - cx).powi(2) + (k.y - cy).powi(2)).sqrt();
                d <= 2.0 * k.sigma && k.sigma >= target / 2.0 && k.sigma <= target * 2.0
            });
            assert!(hit, "radius {radius}: {kps:?}");
        }
    }
}
