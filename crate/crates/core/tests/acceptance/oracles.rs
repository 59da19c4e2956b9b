//! Descriptors recomputed by literal brute-force loops and compared with the
//! library's implementations.

use std::f64::consts::PI;

use polyseek::features::audio::{cens, hpcp, stft, CensParams, ChromaSequence, ChromaVariant};
use polyseek::features::image::{bow_histogram, cell_mean_rgb, edge_histogram, hog_cell_histograms, Codebook};
use polyseek::features::shape::{zernike_magnitudes, zernike_orders, BinaryImage};
use polyseek::media::{AudioBuffer, RasterImage};
use polyseek::store::{distance, Metric, VaIndex, VectorTable};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::Outcome;

fn noisy_image(seed: u64, w: usize, h: usize) -> RasterImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    RasterImage::from_fn(w, h, |x, y| {
        let base: u8 = if (x / 5 + y / 7) % 2 == 0 { 40 } else { 180 };
        let n: u8 = rng.random_range(0..60);
        [base + n, base + n / 3, base]
    })
}

fn luma01(img: &RasterImage, x: usize, y: usize) -> f64 {
    let p = img.get(x, y);
    (0.299 * p[0] as f64 + 0.587 * p[1] as f64 + 0.114 * p[2] as f64) / 255.0
}

fn color_means() -> f64 {
    let img = noisy_image(1, 83, 61);
    let got = cell_mean_rgb(&img);
    let mut worst: f64 = 0.0;
    for gy in 0..8 {
        for gx in 0..8 {
            let (x0, x1) = (gx * 83 / 8, (gx + 1) * 83 / 8);
            let (y0, y1) = (gy * 61 / 8, (gy + 1) * 61 / 8);
            for c in 0..3 {
                let mut s = 0.0;
                for y in y0..y1 {
                    for x in x0..x1 {
                        s += img.get(x, y)[c] as f64;
                    }
                }
                let mean = s / ((x1 - x0) * (y1 - y0)) as f64;
                worst = worst.max((got[gy * 8 + gx][c] - mean).abs());
            }
        }
    }
    worst
}

fn edge_filters() -> f64 {
    let (w, h) = (45, 38);
    let img = noisy_image(2, w, h);
    let d = edge_histogram(&img);
    let r2 = 2f64.sqrt();
    let mut worst: f64 = 0.0;
    for sy in 0..4 {
        for sx in 0..4 {
            let (x0, x1) = (sx * w / 4, (sx + 1) * w / 4);
            let (y0, y1) = (sy * h / 4, (sy + 1) * h / 4);
            let mut counts = [0.0; 5];
            let mut total = 0.0;
            for by in (y0..y1 - 1).step_by(2) {
                for bx in (x0..x1 - 1).step_by(2) {
                    let (a, b, c, e) = (luma01(&img, bx, by), luma01(&img, bx + 1, by), luma01(&img, bx, by + 1), luma01(&img, bx + 1, by + 1));
                    let responses = [
                        (a - b + c - e).abs(),
                        (a + b - c - e).abs(),
                        (r2 * a - r2 * e).abs(),
                        (r2 * b - r2 * c).abs(),
                        (2.0 * a - 2.0 * b - 2.0 * c + 2.0 * e).abs(),
                    ];
                    let (mut best, mut arg) = (11.0 / 255.0, None);
                    for (k, &v) in responses.iter().enumerate() {
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
                worst = worst.max((d[(sy * 4 + sx) * 5 + k] - counts[k] / total).abs());
            }
        }
    }
    worst
}

/// Returns (max deviation, fraction of magnitude in the 0° bin).
fn hog_binning() -> (f64, f64) {
    let img = RasterImage::from_fn(128, 128, |x, _| if x < 64 { [0; 3] } else { [255; 3] });
    let cells = hog_cell_histograms(&img);
    let plane: Vec<f64> = (0..128 * 128).map(|i| luma01(&img, i % 128, i / 128)).collect();
    let mut oracle = vec![[0.0f64; 9]; 256];
    for y in 0..128usize {
        for x in 0..128usize {
            let gx = plane[y * 128 + (x + 1).min(127)] - plane[y * 128 + x.saturating_sub(1)];
            let gy = plane[(y + 1).min(127) * 128 + x] - plane[y.saturating_sub(1) * 128 + x];
            let m = (gx * gx + gy * gy).sqrt();
            let mut a = gy.atan2(gx).to_degrees();
            while a < 0.0 {
                a += 180.0;
            }
            while a >= 180.0 {
                a -= 180.0;
            }
            let lower = (a / 20.0).floor() as usize;
            let upper_weight = a / 20.0 - lower as f64;
            oracle[(y / 8) * 16 + x / 8][lower % 9] += m * (1.0 - upper_weight);
            oracle[(y / 8) * 16 + x / 8][(lower + 1) % 9] += m * upper_weight;
        }
    }
    let worst = cells.iter().zip(&oracle).flat_map(|(c, o)| (0..9).map(move |k| (c[k] - o[k]).abs())).fold(0.0, f64::max);
    let total: f64 = cells.iter().flatten().sum();
    let bin0: f64 = cells.iter().map(|c| c[0]).sum();
    (worst, bin0 / total)
}

fn tone(freqs: &[f64], secs: f64) -> AudioBuffer {
    let n = (secs * 22050.0) as usize;
    let samples = (0..n)
        .map(|i| {
            let t = i as f64 / 22050.0;
            (freqs.iter().map(|f| (2.0 * PI * f * t).sin()).sum::<f64>() / freqs.len() as f64 * 0.8) as f32
        })
        .collect();
    AudioBuffer::new(22050, samples)
}

fn top3(m: &[f64; 12]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..12).collect();
    order.sort_by(|&a, &b| m[b].total_cmp(&m[a]));
    let mut top = order[..3].to_vec();
    top.sort();
    top
}

/// Top three pitch classes of the library HPCP and of a direct peak mapping.
fn hpcp_triad() -> (Vec<usize>, Vec<usize>) {
    let spec = stft(&tone(&[261.63, 329.63, 392.00], 1.0));
    let seq = hpcp(&spec);
    let mut mean = [0.0; 12];
    for f in &seq.frames {
        for c in 0..12 {
            mean[c] += f[c];
        }
    }
    let mut direct = [0.0; 12];
    for frame in spec.frames() {
        let max = frame.iter().cloned().fold(0.0, f64::max);
        for k in 1..frame.len() - 1 {
            let hz = k as f64 * 22050.0 / 4096.0;
            if frame[k] > frame[k - 1] && frame[k] >= frame[k + 1] && frame[k] > 1e-4 * max && (100.0..=5000.0).contains(&hz) {
                let pc = ((12.0 * (hz / 440.0).log2()).round() as i64 + 9).rem_euclid(12) as usize;
                direct[pc] += frame[k] * frame[k];
            }
        }
    }
    (top3(&mean), top3(&direct))
}

fn cens_pipeline() -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let frames: Vec<[f64; 12]> = (0..137)
        .map(|i| if i % 17 == 0 { [0.0; 12] } else { std::array::from_fn(|_| rng.random::<f64>().powi(3)) })
        .collect();
    let mut worst: f64 = 0.0;
    for params in [CensParams { window: 41, downsample: 10 }, CensParams { window: 41, downsample: 2 }] {
        let got = cens(&ChromaSequence { variant: ChromaVariant::Hpcp, frames: frames.clone() }, params);
        let (w, half) = (params.window as i64, params.window as i64 / 2);
        // 1. L1 normalise; 2. quantise; 3. smooth; 4. downsample and L2 normalise.
        let q: Vec<Vec<f64>> = frames
            .iter()
            .map(|f| {
                let s: f64 = f.iter().sum();
                f.iter()
                    .map(|v| if s > 0.0 { v / s } else { 0.0 })
                    .map(|v| [0.05, 0.1, 0.2, 0.4].iter().filter(|&&t| v >= t).count() as f64)
                    .collect()
            })
            .collect();
        let hann: Vec<f64> = (1..=w).map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / (w + 1) as f64).cos()).collect();
        let expected: Vec<Vec<f64>> = (0..q.len() as i64)
            .step_by(params.downsample)
            .map(|t| {
                let f: Vec<f64> = (0..12)
                    .map(|c| {
                        (0..w)
                            .filter_map(|j| {
                                let s = t + j - half;
                                (s >= 0 && s < q.len() as i64).then(|| hann[j as usize] * q[s as usize][c])
                            })
                            .sum()
                    })
                    .collect();
                let n = f.iter().map(|v| v * v).sum::<f64>().sqrt();
                f.iter().map(|v| if n > 0.0 { v / n } else { 0.0 }).collect()
            })
            .collect();
        if got.frames.len() != expected.len() {
            return f64::INFINITY;
        }
        for (g, e) in got.frames.iter().zip(&expected) {
            for c in 0..12 {
                worst = worst.max((g[c] - e[c]).abs());
            }
        }
    }
    worst
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

fn zernike_summation() -> f64 {
    let img = BinaryImage::from_fn(96, 80, |x, y| {
        let (dx, dy) = (x as f64 - 40.0, y as f64 - 42.0);
        (dx * dx / 900.0 + dy * dy / 400.0 <= 1.0) || (x > 55 && x < 80 && y > 20 && y < 35)
    });
    let got = zernike_magnitudes(&img).unwrap();
    let set: Vec<(f64, f64)> =
        (0..img.height).flat_map(|y| (0..img.width).map(move |x| (x, y))).filter(|&(x, y)| img.get(x, y)).map(|(x, y)| (x as f64, y as f64)).collect();
    let n = set.len() as f64;
    let cx = set.iter().map(|p| p.0).sum::<f64>() / n;
    let cy = set.iter().map(|p| p.1).sum::<f64>() / n;
    let radius = set.iter().map(|p| (p.0 - cx).hypot(p.1 - cy) + 0.5).fold(0.5, f64::max);
    let mut worst: f64 = 0.0;
    for (i, (order, rep)) in zernike_orders().into_iter().enumerate() {
        let (mut re, mut im) = (0.0, 0.0);
        for &(x, y) in &set {
            let (u, v) = ((x - cx) / radius, (cy - y) / radius);
            let rho = u.hypot(v);
            let theta = v.atan2(u);
            let radial: f64 = (0..=(order - rep) / 2)
                .map(|s| {
                    let sign = if s % 2 == 0 { 1.0 } else { -1.0 };
                    sign * factorial(order - s)
                        / (factorial(s) * factorial((order + rep) / 2 - s) * factorial((order - rep) / 2 - s))
                        * rho.powi((order - 2 * s) as i32)
                })
                .sum();
            re += radial * (rep as f64 * theta).cos();
            im -= radial * (rep as f64 * theta).sin();
        }
        let magnitude = (order as f64 + 1.0) / PI / (radius * radius) * re.hypot(im);
        worst = worst.max((got[i] - magnitude).abs());
    }
    worst
}

fn bow_assignment() -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let centroids: Vec<Vec<f64>> = (0..12).map(|_| (0..16).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    let descriptors: Vec<Vec<f64>> = (0..100).map(|_| (0..16).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    let cb = Codebook { category: "surf_bow".into(), centroids: centroids.clone() };
    let got = bow_histogram(&descriptors, &cb).unwrap();
    let mut counts = vec![0.0; 12];
    for d in &descriptors {
        let dists: Vec<f64> = centroids.iter().map(|c| c.iter().zip(d).map(|(a, b)| (a - b).powi(2)).sum()).collect();
        let best = (0..12).fold(0, |b, i| if dists[i] < dists[b] { i } else { b });
        counts[best] += 1.0;
    }
    got.iter().zip(&counts).all(|(g, c)| (g - c / 100.0).abs() < 1e-15)
}

fn chi_squared() -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let a: Vec<f64> = (0..50).map(|_| if rng.random_bool(0.3) { 0.0 } else { rng.random() }).collect();
        let b: Vec<f64> = (0..50).map(|_| if rng.random_bool(0.3) { 0.0 } else { rng.random() }).collect();
        let mut literal = 0.0;
        for i in 0..50 {
            literal += (a[i] - b[i]) * (a[i] - b[i]) / (a[i] + b[i] + 1e-10);
        }
        worst = worst.max((distance(Metric::ChiSquared, &a, &b).unwrap() - 0.5 * literal).abs());
    }
    worst
}

/// VA search must return exactly the exact-scan list while refining fewer rows.
fn va_pruning() -> (bool, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut table = VectorTable::new("t", 16, Metric::L2);
    for i in 0..2000 {
        let v: Vec<f64> = (0..16).map(|_| rng.random_range(0.0..1.0)).collect();
        table.insert_f64(&format!("{i}"), &v).unwrap();
    }
    let mut exact = true;
    let mut examined = 0;
    for bits in [1, 4, 6] {
        let va = VaIndex::build(&table, bits).unwrap();
        for _ in 0..20 {
            let q: Vec<f64> = (0..16).map(|_| rng.random_range(0.0..1.0)).collect();
            let got = va.knn(&table, &q, 5).unwrap();
            exact &= got.hits == table.knn_exact(&q, 5).unwrap().hits;
            if bits == 6 {
                examined = examined.max(got.candidates_examined);
            }
        }
    }
    (exact, examined)
}

pub fn descriptor_oracles() -> Outcome {
    let mut failures = Vec::new();
    let mut report = |name: &str, ok: bool, detail: String| {
        if !ok {
            failures.push(format!("{name} ({detail})"));
        }
    };
    let c = color_means();
    report("color grid means", c < 1e-9, format!("{c:.1e}"));
    let e = edge_filters();
    report("edge histogram filters", e < 1e-12, format!("{e:.1e}"));
    let (h, share) = hog_binning();
    report("hog binning", h < 1e-12 && (share - 1.0).abs() < 1e-12, format!("{h:.1e}, 0° share {share}"));
    let (triad, direct) = hpcp_triad();
    report("hpcp triad", triad == vec![0, 4, 7] && triad == direct, format!("{triad:?} vs {direct:?}"));
    let z = cens_pipeline();
    report("cens pipeline", z < 1e-9, format!("{z:.1e}"));
    let zr = zernike_summation();
    report("zernike summation", zr < 1e-9, format!("{zr:.1e}"));
    report("bag-of-words assignment", bow_assignment(), String::new());
    let chi = chi_squared();
    report("chi-squared", chi < 1e-12, format!("{chi:.1e}"));
    let (va_exact, examined) = va_pruning();
    report("va pruning", va_exact && examined < 2000, format!("exact {va_exact}, refined ≤ {examined}/2000"));
    Outcome::check(
        failures.is_empty(),
        if failures.is_empty() {
            "color grid, EHD filters, HOG binning, HPCP triad, CENS, Zernike, BoW, chi-squared, VA pruning match".into()
        } else {
            format!("mismatches: {}", failures.join("; "))
        },
    )
}
