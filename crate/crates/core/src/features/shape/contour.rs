use super::silhouette::BinaryImage;
use crate::error::{Error, Result};

pub const CONTOUR_SAMPLES: usize = 128;
pub const FOURIER_LEN: usize = 10;

/// Pixels of the largest 8-connected component, with its first pixel in raster order.
fn largest_component(img: &BinaryImage) -> Option<BinaryImage> {
    let (w, h) = (img.width, img.height);
    let mut label = vec![0u32; w * h];
    let mut best: Option<(usize, u32)> = None;
    let mut next = 0;
    for start in 0..w * h {
        if !img.bits[start] || label[start] != 0 {
            continue;
        }
        next += 1;
        label[start] = next;
        let mut stack = vec![start];
        let mut size = 0;
        while let Some(i) = stack.pop() {
            size += 1;
            let (x, y) = ((i % w) as i64, (i / w) as i64);
            for dy in -1..=1 {
                for dx in -1..=1 {
                    let (nx, ny) = (x + dx, y + dy);
                    if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                        continue;
                    }
                    let j = ny as usize * w + nx as usize;
                    if img.bits[j] && label[j] == 0 {
                        label[j] = next;
                        stack.push(j);
                    }
                }
            }
        }
        if best.is_none_or(|(s, _)| size > s) {
            best = Some((size, next));
        }
    }
    let (_, keep) = best?;
    Some(BinaryImage { width: w, height: h, bits: label.iter().map(|&l| l == keep).collect() })
}

// Clockwise (in image coordinates) starting west.
const MOORE: [(i64, i64); 8] = [(-1, 0), (-1, -1), (0, -1), (1, -1), (1, 0), (1, 1), (0, 1), (-1, 1)];

/// Outer boundary pixels of a single component, by Moore-neighbour tracing.
pub fn trace_contour(img: &BinaryImage) -> Vec<(usize, usize)> {
    let w = img.width as i64;
    let h = img.height as i64;
    let on = |x: i64, y: i64| x >= 0 && y >= 0 && x < w && y < h && img.get(x as usize, y as usize);
    let Some(first) = img.bits.iter().position(|&b| b) else { return Vec::new() };
    let start = ((first % img.width) as i64, (first / img.width) as i64);
    let mut contour = vec![(start.0 as usize, start.1 as usize)];
    // The raster-order first pixel always has its west neighbour unset, so
    // tracing starts with that neighbour as the backtrack.
    let mut current = start;
    let mut backtrack = 0usize;
    let mut second = None;
    for _ in 0..4 * img.bits.len() + 8 {
        let Some(d) = (1..=8).map(|k| (backtrack + k) % 8).find(|&d| on(current.0 + MOORE[d].0, current.1 + MOORE[d].1))
        else {
            break; // isolated pixel
        };
        let next = (current.0 + MOORE[d].0, current.1 + MOORE[d].1);
        if current == start {
            // Stop once the first move out of the start pixel would repeat.
            match second {
                Some(s) if s == next => break,
                None => second = Some(next),
                _ => {}
            }
        }
        // The neighbour examined just before `next` becomes the new backtrack.
        let prev = (d + 7) % 8;
        let back = (current.0 + MOORE[prev].0 - next.0, current.1 + MOORE[prev].1 - next.1);
        backtrack = MOORE.iter().position(|&m| m == back).expect("consecutive neighbours are adjacent");
        current = next;
        contour.push((current.0 as usize, current.1 as usize));
    }
    if contour.len() > 1 && contour.last() == Some(&contour[0]) {
        contour.pop();
    }
    contour
}

/// Resamples a closed polyline to `n` points equally spaced by arc length.
fn resample_closed(points: &[(f64, f64)], n: usize) -> Vec<(f64, f64)> {
    let m = points.len();
    let seg: Vec<f64> = (0..m)
        .map(|i| {
            let (a, b) = (points[i], points[(i + 1) % m]);
            (b.0 - a.0).hypot(b.1 - a.1)
        })
        .collect();
    let total: f64 = seg.iter().sum();
    if total == 0.0 {
        return vec![points[0]; n];
    }
    let mut out = Vec::with_capacity(n);
    let (mut i, mut walked) = (0, 0.0);
    for s in 0..n {
        let target = total * s as f64 / n as f64;
        while walked + seg[i] < target && i + 1 < m {
            walked += seg[i];
            i += 1;
        }
        let t = if seg[i] > 0.0 { (target - walked) / seg[i] } else { 0.0 };
        let (a, b) = (points[i], points[(i + 1) % m]);
        out.push((a.0 + (b.0 - a.0) * t, a.1 + (b.1 - a.1) * t));
    }
    out
}

/// DFT magnitudes `|F_k| / |F_0|`, `k = 1..=10`, of a real signal.
pub(crate) fn normalized_harmonics(signal: &[f64]) -> Vec<f64> {
    let n = signal.len() as f64;
    let mag = |k: usize| {
        let (mut re, mut im) = (0.0, 0.0);
        for (t, &v) in signal.iter().enumerate() {
            let a = -2.0 * std::f64::consts::PI * k as f64 * t as f64 / n;
            re += v * a.cos();
            im += v * a.sin();
        }
        re.hypot(im)
    };
    let dc = mag(0);
    if dc < 1e-12 {
        return vec![0.0; FOURIER_LEN];
    }
    (1..=FOURIER_LEN).map(|k| mag(k) / dc).collect()
}

/// Centroid-distance Fourier descriptor of the largest component's outer contour.
pub fn fourier_contour(img: &BinaryImage) -> Result<Vec<f64>> {
    let comp = largest_component(img).ok_or(Error::EmptyImage)?;
    let (mut sx, mut sy, mut n) = (0.0, 0.0, 0.0);
    for y in 0..comp.height {
        for x in 0..comp.width {
            if comp.get(x, y) {
                sx += x as f64;
                sy += y as f64;
                n += 1.0;
            }
        }
    }
    let (cx, cy) = (sx / n, sy / n);
    let contour: Vec<(f64, f64)> = trace_contour(&comp).into_iter().map(|(x, y)| (x as f64, y as f64)).collect();
    let signature: Vec<f64> = resample_closed(&contour, CONTOUR_SAMPLES)
        .into_iter()
        .map(|(x, y)| (x - cx).hypot(y - cy))
        .collect();
    Ok(normalized_harmonics(&signature))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disc(size: usize, r: f64) -> BinaryImage {
        let c = size as f64 / 2.0;
        BinaryImage::from_fn(size, size, |x, y| (x as f64 - c).hypot(y as f64 - c) <= r)
    }

    fn square(size: usize, lo: usize, hi: usize) -> BinaryImage {
        BinaryImage::from_fn(size, size, |x, y| (lo..hi).contains(&x) && (lo..hi).contains(&y))
    }

    #[test]
    fn traces_a_square_boundary() {
        let c = trace_contour(&square(10, 2, 6));
        assert_eq!(c.len(), 12);
        assert_eq!(c[0], (2, 2));
        for (x, y) in &c {
            assert!(*x == 2 || *x == 5 || *y == 2 || *y == 5);
        }
    }

    #[test]
    fn traces_thin_shapes() {
        let line = BinaryImage::from_fn(8, 3, |x, y| y == 1 && (1..7).contains(&x));
        let c = trace_contour(&line);
        // Out along the line and back.
        assert_eq!(c.len(), 10);
        let single = BinaryImage::from_fn(3, 3, |x, y| x == 1 && y == 1);
        assert_eq!(trace_contour(&single), vec![(1, 1)]);
    }

    #[test]
    fn disc_is_flat() {
        for v in fourier_contour(&disc(256, 100.0)).unwrap() {
            assert!(v < 0.01, "{v}");
        }
    }

    #[test]
    fn scale_normalized() {
        let small = BinaryImage::from_fn(256, 256, |x, y| {
            let (x, y) = (x as f64 - 128.0, y as f64 - 128.0);
            (x / 50.0).powi(2) + (y / 25.0).powi(2) <= 1.0
        });
        let large = BinaryImage::from_fn(256, 256, |x, y| {
            let (x, y) = (x as f64 - 128.0, y as f64 - 128.0);
            (x / 100.0).powi(2) + (y / 50.0).powi(2) <= 1.0
        });
        let (a, b) = (fourier_contour(&small).unwrap(), fourier_contour(&large).unwrap());
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-2, "{a:?} {b:?}");
        }
    }

    /// Centroid distance of an axis-aligned square of half-side 1, sampled by arc length.
    fn analytic_square_signature() -> Vec<f64> {
        (0..CONTOUR_SAMPLES)
            .map(|i| {
                let s = 8.0 * i as f64 / CONTOUR_SAMPLES as f64;
                let side = (s / 2.0).floor();
                let along = s - 2.0 * side - 1.0;
                1f64.hypot(along)
            })
            .collect()
    }

    #[test]
    fn square_peaks_at_fourth_harmonic() {
        let oracle = normalized_harmonics(&analytic_square_signature());
        let measured = fourier_contour(&square(256, 48, 208)).unwrap();
        let argmax = |v: &[f64]| (0..v.len()).max_by(|&a, &b| v[a].total_cmp(&v[b])).unwrap() + 1;
        assert_eq!(argmax(&oracle), 4);
        assert_eq!(argmax(&measured), 4);
        assert!((oracle[3] - measured[3]).abs() < 0.01, "{} {}", oracle[3], measured[3]);
    }

    #[test]
    fn picks_the_largest_component() {
        let img = BinaryImage::from_fn(256, 256, |x, y| {
            (x as f64 - 100.0).hypot(y as f64 - 100.0) <= 60.0 || (x > 230 && y > 230)
        });
        for v in fourier_contour(&img).unwrap() {
            assert!(v < 0.02);
        }
        assert!(matches!(fourier_contour(&BinaryImage::new(4, 4)), Err(Error::EmptyImage)));
    }
}
