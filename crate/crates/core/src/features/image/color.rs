use super::partition;
use crate::media::RasterImage;

pub const GRID: usize = 8;

/// Mean RGB (0..=255) of each cell of the 8×8 grid, row-major.
pub fn cell_mean_rgb(img: &RasterImage) -> Vec<[f64; 3]> {
    let mut out = Vec::with_capacity(GRID * GRID);
    for gy in 0..GRID {
        let (y0, y1) = partition(img.height(), GRID, gy);
        for gx in 0..GRID {
            let (x0, x1) = partition(img.width(), GRID, gx);
            let mut sum = [0u64; 3];
            for y in y0..y1 {
                for x in x0..x1 {
                    let p = img.get(x, y);
                    for c in 0..3 {
                        sum[c] += p[c] as u64;
                    }
                }
            }
            let n = ((y1 - y0) * (x1 - x0)) as f64;
            out.push(sum.map(|s| s as f64 / n));
        }
    }
    out
}

/// sRGB (0..=255) to CIELAB under D65.
pub fn srgb_to_lab(rgb: [f64; 3]) -> [f64; 3] {
    let lin = rgb.map(|c| {
        let c = c / 255.0;
        if c <= 0.04045 {
            c / 12.92
        } else {
            ((c + 0.055) / 1.055).powf(2.4)
        }
    });
    let [r, g, b] = lin;
    let x = 0.4124564 * r + 0.3575761 * g + 0.1804375 * b;
    let y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b;
    let z = 0.0193339 * r + 0.1191920 * g + 0.9503041 * b;
    let f = |t: f64| {
        const D: f64 = 6.0 / 29.0;
        if t > D * D * D {
            t.cbrt()
        } else {
            t / (3.0 * D * D) + 4.0 / 29.0
        }
    };
    let (fx, fy, fz) = (f(x / 0.95047), f(y), f(z / 1.08883));
    [116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)]
}

/// 192 values: per grid cell (row-major) the L, a, b of the cell's mean colour.
pub fn average_color_grid(img: &RasterImage) -> Vec<f64> {
    cell_mean_rgb(img).into_iter().flat_map(srgb_to_lab).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn mid_gray_is_achromatic() {
        let d = average_color_grid(&RasterImage::filled(40, 30, [128, 128, 128]));
        assert_eq!(d.len(), 192);
        for cell in d.chunks(3) {
            assert_eq!(cell, &d[..3]);
            assert!(cell[1].abs() < 1e-3 && cell[2].abs() < 1e-3, "{cell:?}");
        }
    }

    #[test]
    fn red_blue_halves() {
        let img = RasterImage::from_fn(64, 48, |x, _| if x < 32 { [255, 0, 0] } else { [0, 0, 255] });
        let d = average_color_grid(&img);
        for row in 0..GRID {
            let cell = |c: usize| &d[(row * GRID + c) * 3..(row * GRID + c) * 3 + 3];
            for c in 1..4 {
                assert_eq!(cell(c), cell(0));
                assert_eq!(cell(c + 4), cell(4));
            }
            assert_ne!(cell(0), cell(4));
        }
    }

    #[test]
    fn white_is_l100() {
        let lab = srgb_to_lab([255.0; 3]);
        assert!((lab[0] - 100.0).abs() < 1e-3 && lab[1].abs() < 1e-2 && lab[2].abs() < 1e-2);
    }

    #[test]
    fn cell_means_match_pixel_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (w, h) = (53, 37);
        let img = RasterImage::from_fn(w, h, |_, _| [rng.random(), rng.random(), rng.random()]);
        let means = cell_mean_rgb(&img);
        // Oracle: walk every pixel once and bucket it by integer cell arithmetic.
        let mut sums = vec![[0.0f64; 3]; 64];
        let mut counts = vec![0.0f64; 64];
        for y in 0..h {
            for x in 0..w {
                let cx = (0..8).find(|&c| x < (c + 1) * w / 8).unwrap();
                let cy = (0..8).find(|&c| y < (c + 1) * h / 8).unwrap();
                let p = img.get(x, y);
                for c in 0..3 {
                    sums[cy * 8 + cx][c] += p[c] as f64;
                }
                counts[cy * 8 + cx] += 1.0;
            }
        }
        for i in 0..64 {
            for c in 0..3 {
                assert!((means[i][c] - sums[i][c] / counts[i]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn tiny_images_still_fill_every_cell() {
        let d = average_color_grid(&RasterImage::filled(3, 2, [10, 200, 30]));
        assert_eq!(d.len(), 192);
        assert!(d.iter().all(|v| v.is_finite()));
    }
}
