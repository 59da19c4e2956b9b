//! Spherical-harmonics shape descriptor: per-shell, per-degree SH energies of a
//! solid voxelization.

use std::f64::consts::PI;
use std::sync::OnceLock;

use super::normalize::{dot, sub, triangle_area, NormalizedMesh};
use crate::error::{Error, Result};
use crate::media::TriangleMesh;

pub const VOXEL_GRID: usize = 64;
pub const SHELLS: usize = 32;
/// Samples per angular axis of the equiangular (θ, φ) grid.
pub const ANGULAR: usize = 64;
pub const MAX_DEGREE: usize = 4;
/// Blur applied to the voxel grid before shell sampling, in voxels.
pub const SMOOTHING_SIGMA: f64 = 1.0;
pub const SH_LEN: usize = SHELLS * (MAX_DEGREE + 1);
const HARMONICS: usize = (MAX_DEGREE + 1) * (MAX_DEGREE + 1);

/// Binary occupancy over [−1, 1]³, indexed `(z · n + y) · n + x`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VoxelGrid {
    pub n: usize,
    pub bits: Vec<bool>,
}

impl VoxelGrid {
    pub fn get(&self, x: usize, y: usize, z: usize) -> bool {
        self.bits[(z * self.n + y) * self.n + x]
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    fn cell(&self, c: f64) -> usize {
        (((c + 1.0) * self.n as f64 / 2.0).floor().max(0.0) as usize).min(self.n - 1)
    }

    /// Occupancy blurred by a separable Gaussian of `sigma` voxels, with
    /// empty space beyond the border.
    pub fn smoothed(&self, sigma: f64) -> DensityGrid {
        let n = self.n;
        let radius = (3.0 * sigma).ceil() as isize;
        let kernel: Vec<f64> = (-radius..=radius).map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp()).collect();
        let total: f64 = kernel.iter().sum();
        let kernel: Vec<f64> = kernel.iter().map(|k| k / total).collect();
        let mut values: Vec<f64> = self.bits.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
        for stride in [1, n, n * n] {
            let src = values.clone();
            for (i, v) in values.iter_mut().enumerate() {
                let pos = (i / stride % n) as isize;
                *v = kernel
                    .iter()
                    .zip(-radius..=radius)
                    .filter(|&(_, o)| (0..n as isize).contains(&(pos + o)))
                    .map(|(k, o)| k * src[(i as isize + o * stride as isize) as usize])
                    .sum();
            }
        }
        DensityGrid { n, values }
    }
}

/// Real-valued occupancy over [−1, 1]³ with the voxel grid's layout.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityGrid {
    pub n: usize,
    pub values: Vec<f64>,
}

impl DensityGrid {
    /// Trilinear interpolation between voxel centres.
    pub fn sample_trilinear(&self, p: [f64; 3]) -> f64 {
        let n = self.n;
        let pos = p.map(|c| ((c + 1.0) * n as f64 / 2.0 - 0.5).clamp(0.0, (n - 1) as f64));
        let i0 = pos.map(|c| (c.floor() as usize).min(n - 2));
        let t = [0, 1, 2].map(|k| pos[k] - i0[k] as f64);
        let mut v = 0.0;
        for corner in 0..8 {
            let o = [corner & 1, (corner >> 1) & 1, (corner >> 2) & 1];
            let w: f64 = (0..3).map(|k| if o[k] == 1 { t[k] } else { 1.0 - t[k] }).product();
            v += w * self.values[((i0[2] + o[2]) * n + i0[1] + o[1]) * n + i0[0] + o[0]];
        }
        v
    }
}

/// Closest point on triangle `t` to `p` (Ericson, Real-Time Collision Detection 5.1.5).
pub(crate) fn closest_point_on_triangle(p: [f64; 3], t: &[[f64; 3]; 3]) -> [f64; 3] {
    let [a, b, c] = *t;
    let ab = sub(b, a);
    let ac = sub(c, a);
    let ap = sub(p, a);
    let d1 = dot(ab, ap);
    let d2 = dot(ac, ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return a;
    }
    let bp = sub(p, b);
    let d3 = dot(ab, bp);
    let d4 = dot(ac, bp);
    if d3 >= 0.0 && d4 <= d3 {
        return b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return [0, 1, 2].map(|k| a[k] + v * ab[k]);
    }
    let cp = sub(p, c);
    let d5 = dot(ab, cp);
    let d6 = dot(ac, cp);
    if d6 >= 0.0 && d5 <= d6 {
        return c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return [0, 1, 2].map(|k| a[k] + w * ac[k]);
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return [0, 1, 2].map(|k| b[k] + w * (c[k] - b[k]));
    }
    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    [0, 1, 2].map(|k| a[k] + ab[k] * v + ac[k] * w)
}

/// Marks voxels whose centre lies within one voxel width of the surface.
fn surface_voxels(mesh: &TriangleMesh, n: usize) -> VoxelGrid {
    let mut grid = VoxelGrid { n, bits: vec![false; n * n * n] };
    let h = 2.0 / n as f64;
    let radius = h;
    for f in 0..mesh.faces.len() {
        let t = mesh.triangle(f);
        let range = |k: usize| {
            let lo = t.iter().map(|p| p[k]).fold(f64::INFINITY, f64::min) - radius;
            let hi = t.iter().map(|p| p[k]).fold(f64::NEG_INFINITY, f64::max) + radius;
            (grid.cell(lo), grid.cell(hi))
        };
        let ((x0, x1), (y0, y1), (z0, z1)) = (range(0), range(1), range(2));
        for z in z0..=z1 {
            for y in y0..=y1 {
                for x in x0..=x1 {
                    let idx = (z * n + y) * n + x;
                    if grid.bits[idx] {
                        continue;
                    }
                    let c = [x, y, z].map(|i| -1.0 + (i as f64 + 0.5) * h);
                    let q = closest_point_on_triangle(c, &t);
                    if dot(sub(q, c), sub(q, c)) <= radius * radius {
                        grid.bits[idx] = true;
                    }
                }
            }
        }
    }
    grid
}

/// Adds every voxel not 6-connected to the grid border through empty voxels.
fn fill_interior(grid: &VoxelGrid) -> VoxelGrid {
    let n = grid.n;
    let mut outside = vec![false; n * n * n];
    let mut stack = Vec::new();
    for a in 0..n {
        for b in 0..n {
            for idx in [
                (a * n + b) * n, (a * n + b) * n + n - 1,
                (a * n) * n + b, (a * n + n - 1) * n + b,
                a * n + b, ((n - 1) * n + a) * n + b,
            ] {
                if !grid.bits[idx] {
                    stack.push(idx);
                }
            }
        }
    }
    while let Some(i) = stack.pop() {
        if outside[i] || grid.bits[i] {
            continue;
        }
        outside[i] = true;
        let (x, y, z) = (i % n, (i / n) % n, i / (n * n));
        if x > 0 { stack.push(i - 1) }
        if x + 1 < n { stack.push(i + 1) }
        if y > 0 { stack.push(i - n) }
        if y + 1 < n { stack.push(i + n) }
        if z > 0 { stack.push(i - n * n) }
        if z + 1 < n { stack.push(i + n * n) }
    }
    VoxelGrid { n, bits: outside.iter().map(|&o| !o).collect() }
}

/// Solid voxelization: a one-voxel-thick band around the surface plus every
/// voxel it encloses. Open surfaces keep just the band.
pub fn voxelize(mesh: &TriangleMesh, n: usize) -> VoxelGrid {
    fill_interior(&surface_voxels(mesh, n))
}

/// θ_j = π(j + ½)/64 and φ_k = 2πk/64, row-major in j.
pub fn sample_angles() -> impl Iterator<Item = (f64, f64)> {
    (0..ANGULAR).flat_map(|j| {
        (0..ANGULAR).map(move |k| {
            (PI * (j as f64 + 0.5) / ANGULAR as f64, 2.0 * PI * k as f64 / ANGULAR as f64)
        })
    })
}

/// Shell occupancy functions: `samples[r][j · 64 + k]` at radius `(r + 1) / 32`,
/// interpolated trilinearly from the voxel grid after a light Gaussian blur
/// that suppresses voxel aliasing under rotation.
pub fn shell_samples(grid: &VoxelGrid) -> Vec<Vec<f64>> {
    let density = grid.smoothed(SMOOTHING_SIGMA);
    let dirs: Vec<[f64; 3]> = sample_angles()
        .map(|(t, p)| [t.sin() * p.cos(), t.sin() * p.sin(), t.cos()])
        .collect();
    (1..=SHELLS)
        .map(|r| {
            let radius = r as f64 / SHELLS as f64;
            dirs.iter().map(|d| density.sample_trilinear(d.map(|c| c * radius))).collect()
        })
        .collect()
}

/// Associated Legendre functions `P_l^m(x)` for `m ≤ l ≤ MAX_DEGREE`, `[l][m]`.
fn legendre(x: f64) -> [[f64; MAX_DEGREE + 1]; MAX_DEGREE + 1] {
    let mut p = [[0.0; MAX_DEGREE + 1]; MAX_DEGREE + 1];
    let s = (1.0 - x * x).max(0.0).sqrt();
    p[0][0] = 1.0;
    for m in 1..=MAX_DEGREE {
        p[m][m] = -(2.0 * m as f64 - 1.0) * s * p[m - 1][m - 1];
    }
    for m in 0..MAX_DEGREE {
        p[m + 1][m] = x * (2.0 * m as f64 + 1.0) * p[m][m];
        for l in m + 2..=MAX_DEGREE {
            p[l][m] = ((2.0 * l as f64 - 1.0) * x * p[l - 1][m] - (l + m - 1) as f64 * p[l - 2][m])
                / (l - m) as f64;
        }
    }
    p
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// Orthonormal real spherical harmonics at `(θ, φ)`, indexed `l² + l + m`.
pub fn real_harmonics(theta: f64, phi: f64) -> [f64; HARMONICS] {
    let p = legendre(theta.cos());
    let mut y = [0.0; HARMONICS];
    for l in 0..=MAX_DEGREE {
        for m in 0..=l {
            let k = ((2 * l + 1) as f64 / (4.0 * PI) * factorial(l - m) / factorial(l + m)).sqrt();
            if m == 0 {
                y[l * l + l] = k * p[l][0];
            } else {
                let base = 2f64.sqrt() * k * p[l][m];
                y[l * l + l + m] = base * (m as f64 * phi).cos();
                y[l * l + l - m] = base * (m as f64 * phi).sin();
            }
        }
    }
    y
}

/// Harmonics at every sample, pre-multiplied by the sin θ · Δθ · Δφ quadrature weight.
fn weighted_table() -> &'static [[f64; HARMONICS]] {
    static TABLE: OnceLock<Vec<[f64; HARMONICS]>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let dw = (PI / ANGULAR as f64) * (2.0 * PI / ANGULAR as f64);
        sample_angles()
            .map(|(t, p)| real_harmonics(t, p).map(|v| v * t.sin() * dw))
            .collect()
    })
}

/// `energy[r · 5 + l] = Σ_m c_{l,m}²` for each shell.
pub fn sh_energies(samples: &[Vec<f64>]) -> Vec<f64> {
    let table = weighted_table();
    let mut out = Vec::with_capacity(samples.len() * (MAX_DEGREE + 1));
    for shell in samples {
        let mut c = [0.0; HARMONICS];
        for (&f, y) in shell.iter().zip(table) {
            if f != 0.0 {
                c.iter_mut().zip(y).for_each(|(a, b)| *a += f * b);
            }
        }
        for l in 0..=MAX_DEGREE {
            out.push(c[l * l..(l + 1) * (l + 1)].iter().map(|v| v * v).sum());
        }
    }
    out
}

pub fn sh_descriptor(nm: &NormalizedMesh) -> Result<Vec<f64>> {
    let area: f64 = (0..nm.mesh.faces.len()).map(|f| triangle_area(&nm.mesh.triangle(f))).sum();
    if !(area > 0.0) {
        return Err(Error::DegenerateMesh("mesh has zero surface area".into()));
    }
    Ok(sh_energies(&shell_samples(&voxelize(&nm.mesh, VOXEL_GRID))))
}
