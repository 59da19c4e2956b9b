use std::f64::consts::SQRT_2;

use super::partition;
use crate::media::RasterImage;

/// Minimum filter response (on the 0..1 luma scale) for a block to count as an edge.
pub const EDGE_THRESHOLD: f64 = 11.0 / 255.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeType {
    Vertical = 0,
    Horizontal = 1,
    Diagonal45 = 2,
    Diagonal135 = 3,
    NonDirectional = 4,
}

const EDGE_TYPES: [EdgeType; 5] = [
    EdgeType::Vertical,
    EdgeType::Horizontal,
    EdgeType::Diagonal45,
    EdgeType::Diagonal135,
    EdgeType::NonDirectional,
];

// Coefficients for (top-left, top-right, bottom-left, bottom-right).
const FILTERS: [[f64; 4]; 5] = [
    [1.0, -1.0, 1.0, -1.0],
    [1.0, 1.0, -1.0, -1.0],
    [SQRT_2, 0.0, 0.0, -SQRT_2],
    [0.0, SQRT_2, -SQRT_2, 0.0],
    [2.0, -2.0, -2.0, 2.0],
];

/// Classifies one 2×2 block of luma values in `[0, 1]`.
pub fn classify_block(block: [f64; 4]) -> Option<EdgeType> {
    let mut best = None;
    let mut best_response = EDGE_THRESHOLD;
    for (filter, kind) in FILTERS.iter().zip(EDGE_TYPES) {
        let response = filter.iter().zip(&block).map(|(f, a)| f * a).sum::<f64>().abs();
        if response > best_response {
            best_response = response;
            best = Some(kind);
        }
    }
    best
}

/// 80 values: for each of the 4×4 subimages (row-major) the fraction of its
/// 2×2 blocks classified as vertical, horizontal, 45°, 135° and non-directional.
pub fn edge_histogram(img: &RasterImage) -> Vec<f64> {
    let w = img.width();
    let gray: Vec<f64> = img.to_gray().into_iter().map(|g| g / 255.0).collect();
    let mut out = Vec::with_capacity(80);
    for sy in 0..4 {
        let (y0, y1) = partition(img.height(), 4, sy);
        for sx in 0..4 {
            let (x0, x1) = partition(w, 4, sx);
            let mut bins = [0.0; 5];
            let mut blocks = 0usize;
            let mut by = y0;
            while by + 1 < y1 {
                let mut bx = x0;
                while bx + 1 < x1 {
                    let block = [
                        gray[by * w + bx],
                        gray[by * w + bx + 1],
                        gray[(by + 1) * w + bx],
                        gray[(by + 1) * w + bx + 1],
                    ];
                    if let Some(kind) = classify_block(block) {
                        bins[kind as usize] += 1.0;
                    }
                    blocks += 1;
                    bx += 2;
                }
                by += 2;
            }
            if blocks > 0 {
                bins.iter_mut().for_each(|b| *b /= blocks as f64);
            }
            out.extend_from_slice(&bins);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn uniform_image_has_no_edges() {
        let d = edge_histogram(&RasterImage::filled(64, 64, [200, 10, 70]));
        assert_eq!(d.len(), 80);
        assert!(d.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn vertical_stripes_vote_vertical() {
        // Columns alternate black/white with period two pixels.
        let img = RasterImage::from_fn(64, 64, |x, _| if x % 2 == 0 { [0; 3] } else { [255; 3] });
        let d = edge_histogram(&img);
        for sub in d.chunks(5) {
            assert_eq!(sub[EdgeType::Vertical as usize], 1.0);
            assert!(sub[1..].iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn horizontal_and_diagonal_blocks() {
        assert_eq!(classify_block([1.0, 1.0, 0.0, 0.0]), Some(EdgeType::Horizontal));
        assert_eq!(classify_block([1.0, 0.0, 0.0, 0.0]), Some(EdgeType::NonDirectional));
        assert_eq!(classify_block([1.0, 0.5, 0.5, 0.0]), Some(EdgeType::Diagonal45));
        assert_eq!(classify_block([0.5, 1.0, 0.0, 0.5]), Some(EdgeType::Diagonal135));
        assert_eq!(classify_block([0.5, 0.52, 0.5, 0.5]), None);
    }

    #[test]
    fn matches_direct_filter_evaluation() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let (w, h) = (45, 38);
        let img = RasterImage::from_fn(w, h, |x, y| {
            let base = if (x / 5 + y / 7) % 2 == 0 { 40 } else { 180 };
            let n: u8 = rng.random_range(0..30);
            [base + n, base, base + n / 2]
        });
        let d = edge_histogram(&img);

        // Oracle: evaluate all five filters literally for every block.
        let luma = |x: usize, y: usize| {
            let p = img.get(x, y);
            (0.299 * p[0] as f64 + 0.587 * p[1] as f64 + 0.114 * p[2] as f64) / 255.0
        };
        let r2 = 2f64.sqrt();
        for sy in 0..4 {
            for sx in 0..4 {
                let (x0, x1) = (sx * w / 4, (sx + 1) * w / 4);
                let (y0, y1) = (sy * h / 4, (sy + 1) * h / 4);
                let mut counts = [0.0; 5];
                let mut total = 0.0;
                for by in (y0..y1 - 1).step_by(2) {
                    for bx in (x0..x1 - 1).step_by(2) {
                        let (a, b, c, e) = (luma(bx, by), luma(bx + 1, by), luma(bx, by + 1), luma(bx + 1, by + 1));
                        let r = [
                            (a - b + c - e).abs(),
                            (a + b - c - e).abs(),
                            (r2 * a - r2 * e).abs(),
                            (r2 * b - r2 * c).abs(),
                            (2.0 * a - 2.0 * b - 2.0 * c + 2.0 * e).abs(),
                        ];
                        let (mut best, mut arg) = (11.0 / 255.0, None);
                        for (k, &v) in r.iter().enumerate() {
                            if v > best {
                                best = v;
                                arg = Some(k);
                            }
                        }
                        if let Some(k) = arg {
                            counts[k] += 1.0;
                        }
                        total += 1.0;
                    }
                }
                for k in 0..5 {
                    let got = d[(sy * 4 + sx) * 5 + k];
                    assert!((got - counts[k] / total).abs() < 1e-12);
                }
            }
        }
    }
}
