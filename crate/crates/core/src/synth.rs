//! Seeded synthetic media: scene images and their alterations, tonal tracks,
//! melodies in two timbres, parametric shape classes and outline sketches.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::features::shape::primitives::{cone, cuboid, cylinder, icosphere, rotation, rotate, star_prism, torus};
use crate::media::{AudioBuffer, RasterImage, TriangleMesh, TARGET_SAMPLE_RATE};

const SR: f64 = TARGET_SAMPLE_RATE as f64;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A 128×128 scene: gradient background plus random discs and rectangles.
pub fn scene_image(seed: u64) -> RasterImage {
    let mut r = rng(seed);
    let size = 128usize;
    let c0: [f64; 3] = std::array::from_fn(|_| r.random_range(0.0..255.0));
    let c1: [f64; 3] = std::array::from_fn(|_| r.random_range(0.0..255.0));
    let angle = r.random_range(0.0..2.0 * PI);
    let (dx, dy) = (angle.cos(), angle.sin());
    let shapes: Vec<(bool, f64, f64, f64, f64, [u8; 3])> = (0..r.random_range(3..7))
        .map(|_| {
            (
                r.random_bool(0.5),
                r.random_range(0.0..size as f64),
                r.random_range(0.0..size as f64),
                r.random_range(8.0..40.0),
                r.random_range(8.0..40.0),
                std::array::from_fn(|_| r.random_range(0..=255u8)),
            )
        })
        .collect();
    RasterImage::from_fn(size, size, |x, y| {
        let (fx, fy) = (x as f64, y as f64);
        let mut px = None;
        for &(disc, cx, cy, a, b, color) in &shapes {
            let inside = if disc {
                (fx - cx).powi(2) + (fy - cy).powi(2) <= a * a
            } else {
                (fx - cx).abs() <= a / 2.0 && (fy - cy).abs() <= b / 2.0
            };
            if inside {
                px = Some(color);
            }
        }
        px.unwrap_or_else(|| {
            let t = ((fx * dx + fy * dy) / (size as f64 * 1.5) + 0.5).clamp(0.0, 1.0);
            std::array::from_fn(|c| (c0[c] + (c1[c] - c0[c]) * t).round() as u8)
        })
    })
}

/// Separable Gaussian blur with a kernel radius of ⌈3σ⌉ and clamped borders.
pub fn gaussian_blur(img: &RasterImage, sigma: f64) -> RasterImage {
    let radius = (3.0 * sigma).ceil() as i64;
    let kernel: Vec<f64> = (-radius..=radius).map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp()).collect();
    let norm: f64 = kernel.iter().sum();
    let (w, h) = (img.width() as i64, img.height() as i64);
    let pass = |src: &[[f64; 3]], horizontal: bool| -> Vec<[f64; 3]> {
        let mut out = vec![[0.0; 3]; src.len()];
        for y in 0..h {
            for x in 0..w {
                let mut acc = [0.0; 3];
                for (k, wt) in kernel.iter().enumerate() {
                    let o = k as i64 - radius;
                    let (sx, sy) = if horizontal { ((x + o).clamp(0, w - 1), y) } else { (x, (y + o).clamp(0, h - 1)) };
                    let p = src[(sy * w + sx) as usize];
                    (0..3).for_each(|c| acc[c] += wt * p[c]);
                }
                out[(y * w + x) as usize] = acc.map(|v| v / norm);
            }
        }
        out
    };
    let src: Vec<[f64; 3]> = img.pixels().chunks_exact(3).map(|p| [p[0] as f64, p[1] as f64, p[2] as f64]).collect();
    let blurred = pass(&pass(&src, true), false);
    RasterImage::from_fn(img.width(), img.height(), |x, y| {
        blurred[y * img.width() + x].map(|v| v.round().clamp(0.0, 255.0) as u8)
    })
}

/// Rotates every pixel's hue by `degrees` in HSV space.
pub fn hue_shift(img: &RasterImage, degrees: f64) -> RasterImage {
    RasterImage::from_fn(img.width(), img.height(), |x, y| {
        let [r, g, b] = img.get(x, y).map(|v| v as f64 / 255.0);
        let max = r.max(g).max(b);
        let min = r.min(g).min(b);
        let d = max - min;
        let mut h = if d == 0.0 {
            0.0
        } else if max == r {
            60.0 * ((g - b) / d).rem_euclid(6.0)
        } else if max == g {
            60.0 * ((b - r) / d + 2.0)
        } else {
            60.0 * ((r - g) / d + 4.0)
        };
        let s = if max == 0.0 { 0.0 } else { d / max };
        h = (h + degrees).rem_euclid(360.0);
        let c = max * s;
        let xx = c * (1.0 - ((h / 60.0).rem_euclid(2.0) - 1.0).abs());
        let (r1, g1, b1) = match (h / 60.0) as u32 {
            0 => (c, xx, 0.0),
            1 => (xx, c, 0.0),
            2 => (0.0, c, xx),
            3 => (0.0, xx, c),
            4 => (xx, 0.0, c),
            _ => (c, 0.0, xx),
        };
        let m = max - c;
        [r1, g1, b1].map(|v| ((v + m) * 255.0).round().clamp(0.0, 255.0) as u8)
    })
}

fn midi_hz(note: f64) -> f64 {
    440.0 * 2f64.powf((note - 69.0) / 12.0)
}

/// Short attack and release so note boundaries do not click.
fn envelope(i: usize, len: usize) -> f64 {
    let ramp = (0.01 * SR) as usize;
    let a = (i as f64 / ramp as f64).min(1.0);
    let r = ((len - i) as f64 / ramp as f64).min(1.0);
    a.min(r)
}

fn peak_normalize(samples: &mut [f64], peak: f64) {
    let m = samples.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    if m > 0.0 {
        samples.iter_mut().for_each(|v| *v *= peak / m);
    }
}

fn buffer(samples: Vec<f64>) -> AudioBuffer {
    AudioBuffer::new(TARGET_SAMPLE_RATE, samples.into_iter().map(|v| v as f32).collect())
}

/// Dense tonal texture: overlapping notes with random partials, `secs` long.
pub fn tonal_track(seed: u64, secs: f64) -> AudioBuffer {
    let mut r = rng(seed);
    let n = (secs * SR) as usize;
    let mut out = vec![0.0; n];
    let mut t = 0.0;
    while t < secs {
        let dur = r.random_range(0.08..0.35);
        for _ in 0..r.random_range(1..4) {
            let f0 = midi_hz(r.random_range(40.0..90.0f64).round());
            let partials: Vec<(f64, f64)> =
                (1..=r.random_range(1..5)).map(|k| (k as f64, r.random_range(0.2..1.0) / k as f64)).collect();
            let start = (t * SR) as usize;
            let len = ((dur * SR) as usize).min(n.saturating_sub(start));
            for i in 0..len {
                let time = i as f64 / SR;
                let env = envelope(i, len) * (-time * 3.0).exp();
                let v: f64 = partials.iter().map(|&(k, a)| a * (2.0 * PI * f0 * k * time).sin()).sum();
                out[start + i] += env * v;
            }
        }
        t += dur * r.random_range(0.6..1.0);
    }
    peak_normalize(&mut out, 0.8);
    buffer(out)
}

/// Adds white Gaussian noise at the given signal-to-noise ratio.
pub fn add_noise(audio: &AudioBuffer, snr_db: f64, seed: u64) -> AudioBuffer {
    let power = audio.samples.iter().map(|&s| (s as f64).powi(2)).sum::<f64>() / audio.len().max(1) as f64;
    let sigma = (power / 10f64.powf(snr_db / 10.0)).sqrt();
    let mut r = rng(seed);
    let noise = Normal::new(0.0, sigma.max(f64::MIN_POSITIVE)).expect("finite sigma");
    AudioBuffer::new(
        audio.sample_rate,
        audio.samples.iter().map(|&s| (s as f64 + noise.sample(&mut r)) as f32).collect(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Timbre {
    Sine,
    /// Band-limited square wave (odd harmonics, 1/n amplitudes).
    Square,
}

/// Notes as (MIDI pitch, duration in seconds) from a major scale.
pub fn melody(seed: u64, secs: f64) -> Vec<(u8, f64)> {
    const SCALE: [u8; 7] = [0, 2, 4, 5, 7, 9, 11];
    let mut r = rng(seed);
    let root = 55 + r.random_range(0..12u8);
    let mut notes = Vec::new();
    let mut t = 0.0;
    while t < secs {
        let pitch = root + SCALE[r.random_range(0..7)] + 12 * r.random_range(0..2u8);
        let dur = [0.25, 0.5, 0.5, 0.75][r.random_range(0..4)];
        notes.push((pitch, dur));
        t += dur;
    }
    notes
}

pub fn render_melody(notes: &[(u8, f64)], timbre: Timbre) -> AudioBuffer {
    let total: f64 = notes.iter().map(|n| n.1).sum();
    let mut out = vec![0.0; (total * SR) as usize + 1];
    let mut start = 0usize;
    for &(pitch, dur) in notes {
        let f0 = midi_hz(pitch as f64);
        let len = ((dur * SR) as usize).min(out.len() - start);
        let harmonics: Vec<f64> = match timbre {
            Timbre::Sine => vec![1.0],
            Timbre::Square => (1..).step_by(2).take_while(|&k| f0 * k as f64 <= 5000.0).map(|k| k as f64).collect(),
        };
        for i in 0..len {
            let time = i as f64 / SR;
            let v: f64 = harmonics.iter().map(|&k| (2.0 * PI * f0 * k * time).sin() / k).sum();
            out[start + i] += envelope(i, len) * v;
        }
        start += len;
    }
    peak_normalize(&mut out, 0.8);
    buffer(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ShapeClass {
    Sphere,
    Cube,
    Cylinder,
    Cone,
    Torus,
    Star,
}

impl ShapeClass {
    pub const ALL: [ShapeClass; 6] =
        [ShapeClass::Sphere, ShapeClass::Cube, ShapeClass::Cylinder, ShapeClass::Cone, ShapeClass::Torus, ShapeClass::Star];

    pub fn name(self) -> &'static str {
        match self {
            ShapeClass::Sphere => "sphere",
            ShapeClass::Cube => "cube",
            ShapeClass::Cylinder => "cylinder",
            ShapeClass::Cone => "cone",
            ShapeClass::Torus => "torus",
            ShapeClass::Star => "star",
        }
    }

    /// Instance `i` of the class; instances differ in their proportions.
    pub fn instance(self, i: usize) -> TriangleMesh {
        let t = i as f64;
        match self {
            ShapeClass::Sphere => icosphere(3).map_vertices(|[x, y, z]| [x * (1.0 + 0.08 * t), y, z * (1.0 - 0.05 * t)]),
            ShapeClass::Cube => cuboid(1.0, 1.0 + 0.2 * t, 1.0 - 0.1 * t),
            ShapeClass::Cylinder => cylinder(0.5, 0.8 + 0.35 * t, 48),
            ShapeClass::Cone => cone(0.5, 0.8 + 0.35 * t, 48),
            ShapeClass::Torus => torus(1.0, 0.2 + 0.07 * t, 48, 24),
            ShapeClass::Star => star_prism(5, 1.0, 0.38 + 0.04 * t, 0.25 + 0.12 * t),
        }
    }
}

/// A uniformly random rotation applied to `mesh`.
pub fn random_rotation(mesh: &TriangleMesh, seed: u64) -> TriangleMesh {
    let mut r = rng(seed);
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let axis: [f64; 3] = std::array::from_fn(|_| normal.sample(&mut r));
    let angle = r.random_range(0.3..PI);
    rotate(mesh, &rotation(axis, angle))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sketch {
    Circle,
    Square,
    Star,
}

/// Black outline on white, 400×400, stroke about 6 px.
pub fn outline_sketch(kind: Sketch) -> RasterImage {
    let size = 400usize;
    let c = size as f64 / 2.0;
    let poly: Vec<(f64, f64)> = match kind {
        Sketch::Circle => (0..128).map(|i| 2.0 * PI * i as f64 / 128.0).map(|a| (c + 140.0 * a.cos(), c + 140.0 * a.sin())).collect(),
        Sketch::Square => vec![(c - 130.0, c - 130.0), (c + 130.0, c - 130.0), (c + 130.0, c + 130.0), (c - 130.0, c + 130.0)],
        Sketch::Star => (0..10)
            .map(|i| {
                let a = PI * i as f64 / 5.0 - PI / 2.0;
                let rad = if i % 2 == 0 { 150.0 } else { 60.0 };
                (c + rad * a.cos(), c + rad * a.sin())
            })
            .collect(),
    };
    let seg_dist = |px: f64, py: f64, (ax, ay): (f64, f64), (bx, by): (f64, f64)| {
        let (vx, vy) = (bx - ax, by - ay);
        let t = (((px - ax) * vx + (py - ay) * vy) / (vx * vx + vy * vy)).clamp(0.0, 1.0);
        ((px - ax - t * vx).powi(2) + (py - ay - t * vy).powi(2)).sqrt()
    };
    RasterImage::from_fn(size, size, |x, y| {
        let (px, py) = (x as f64 + 0.5, y as f64 + 0.5);
        let d = (0..poly.len()).map(|i| seg_dist(px, py, poly[i], poly[(i + 1) % poly.len()])).fold(f64::INFINITY, f64::min);
        if d <= 3.0 { [0; 3] } else { [255; 3] }
    })
}
