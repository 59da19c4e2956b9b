use crate::media::{resample_bilinear, RasterImage};

const CANVAS: usize = 128;
const CELL: usize = 8;
const CELLS: usize = CANVAS / CELL;
const BINS: usize = 9;
const BLOCKS: usize = CELLS - 1;
const EPS: f64 = 1e-5;
const CLIP: f64 = 0.2;

pub const HOG_LEN: usize = BLOCKS * BLOCKS * 4 * BINS;

/// Luma on `[0, 1]` resampled onto the fixed 128×128 canvas.
fn canvas(img: &RasterImage) -> Vec<f64> {
    let gray: Vec<f64> = img.to_gray().into_iter().map(|g| g / 255.0).collect();
    resample_bilinear(&gray, img.width(), img.height(), CANVAS, CANVAS)
}

/// Central-difference gradient magnitude and unsigned orientation in degrees
/// `[0, 180)` for a 128×128 plane, replicating the border.
pub fn hog_gradients(plane: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let at = |x: usize, y: usize| plane[y * CANVAS + x];
    let mut mag = Vec::with_capacity(CANVAS * CANVAS);
    let mut ang = Vec::with_capacity(CANVAS * CANVAS);
    for y in 0..CANVAS {
        for x in 0..CANVAS {
            let gx = at((x + 1).min(CANVAS - 1), y) - at(x.saturating_sub(1), y);
            let gy = at(x, (y + 1).min(CANVAS - 1)) - at(x, y.saturating_sub(1));
            mag.push(gx.hypot(gy));
            ang.push(gy.atan2(gx).to_degrees().rem_euclid(180.0));
        }
    }
    (mag, ang)
}

/// Per-cell orientation histograms (16×16 cells, row-major, 9 bins each).
/// Bin `k` is centred on `20k` degrees; votes split linearly between the two
/// nearest centres, wrapping at 180°.
pub fn hog_cell_histograms(img: &RasterImage) -> Vec<[f64; BINS]> {
    let (mag, ang) = hog_gradients(&canvas(img));
    let mut cells = vec![[0.0; BINS]; CELLS * CELLS];
    for y in 0..CANVAS {
        for x in 0..CANVAS {
            let i = y * CANVAS + x;
            if mag[i] == 0.0 {
                continue;
            }
            let pos = ang[i] / (180.0 / BINS as f64);
            let lo = pos.floor();
            let frac = pos - lo;
            let b0 = (lo as usize) % BINS;
            let b1 = (b0 + 1) % BINS;
            let cell = &mut cells[(y / CELL) * CELLS + x / CELL];
            cell[b0] += mag[i] * (1.0 - frac);
            cell[b1] += mag[i] * frac;
        }
    }
    cells
}

fn l2_hys(block: &mut [f64]) {
    let scale = |b: &mut [f64]| {
        let n = (b.iter().map(|v| v * v).sum::<f64>() + EPS * EPS).sqrt();
        b.iter_mut().for_each(|v| *v /= n);
    };
    scale(block);
    block.iter_mut().for_each(|v| *v = v.min(CLIP));
    scale(block);
}

/// 8100-value HOG: 15×15 overlapping 2×2-cell blocks, L2-Hys normalised.
pub fn hog_descriptor(img: &RasterImage) -> Vec<f64> {
    let cells = hog_cell_histograms(img);
    let mut out = Vec::with_capacity(HOG_LEN);
    for by in 0..BLOCKS {
        for bx in 0..BLOCKS {
            let mut block = Vec::with_capacity(4 * BINS);
            for (dy, dx) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                block.extend_from_slice(&cells[(by + dy) * CELLS + bx + dx]);
            }
            l2_hys(&mut block);
            out.extend(block);
        }
    }
    out
}
