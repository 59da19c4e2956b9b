//! Orthographic silhouettes from the dodecahedral view axes, and the
//! rotation group acting on those axes.

use std::sync::OnceLock;

use super::normalize::{cross, dot, norm, NormalizedMesh};
use crate::error::{Error, Result};
use crate::media::TriangleMesh;

pub const VIEW_SIZE: usize = 256;
pub const VIEWS: usize = 10;
const PHI: f64 = 1.618_033_988_749_895;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryImage {
    pub width: usize,
    pub height: usize,
    pub bits: Vec<bool>,
}

impl BinaryImage {
    pub fn new(width: usize, height: usize) -> Self {
        BinaryImage { width, height, bits: vec![false; width * height] }
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> bool) -> Self {
        let bits = (0..height).flat_map(|y| (0..width).map(move |x| (x, y))).map(|(x, y)| f(x, y)).collect();
        BinaryImage { width, height, bits }
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize) {
        self.bits[y * self.width + x] = true;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }
}

/// One vertex from each antipodal pair of the dodecahedron with vertices
/// (±1, ±1, ±1), (0, ±1/φ, ±φ), (±1/φ, ±φ, 0), (±φ, 0, ±1/φ): the one whose
/// first non-zero coordinate is positive. Unit length, fixed order.
pub fn view_directions() -> [[f64; 3]; VIEWS] {
    let i = 1.0 / PHI;
    [
        [1.0, 1.0, 1.0],
        [1.0, 1.0, -1.0],
        [1.0, -1.0, 1.0],
        [1.0, -1.0, -1.0],
        [0.0, i, PHI],
        [0.0, i, -PHI],
        [i, PHI, 0.0],
        [i, -PHI, 0.0],
        [PHI, 0.0, i],
        [PHI, 0.0, -i],
    ]
    .map(|v| v.map(|c| c / 3f64.sqrt()))
}

/// Image-plane axes `(u, v)` for viewing along `dir`.
pub fn image_basis(dir: [f64; 3]) -> ([f64; 3], [f64; 3]) {
    let up = if dir[2].abs() < 0.9 { [0.0, 0.0, 1.0] } else { [1.0, 0.0, 0.0] };
    let u = cross(up, dir);
    let u = u.map(|c| c / norm(u));
    (u, cross(dir, u))
}

/// Pixel coordinate of the image-plane value `c ∈ [−1, 1]`.
fn to_pixel(c: f64) -> f64 {
    (c + 1.0) * VIEW_SIZE as f64 / 2.0 - 0.5
}

fn draw_segment(img: &mut BinaryImage, a: [f64; 2], b: [f64; 2]) {
    let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
    let steps = (len * 2.0).ceil().max(1.0) as usize;
    for s in 0..=steps {
        let t = s as f64 / steps as f64;
        let x = (a[0] + (b[0] - a[0]) * t + 0.5).floor();
        let y = (a[1] + (b[1] - a[1]) * t + 0.5).floor();
        if (0.0..VIEW_SIZE as f64).contains(&x) && (0.0..VIEW_SIZE as f64).contains(&y) {
            img.set(x as usize, y as usize);
        }
    }
}

/// Orthographic silhouette along `dir` over [−1, 1]²: a pixel is set when its
/// centre lies in some projected triangle. Triangles seen edge-on are drawn
/// as line segments so flat parts stay visible.
pub fn render_silhouette(mesh: &TriangleMesh, dir: [f64; 3]) -> BinaryImage {
    let (u, v) = image_basis(dir);
    let n = VIEW_SIZE;
    let mut img = BinaryImage::new(n, n);
    // Pixel space: x grows with u, y grows downwards with −v.
    let project = |p: [f64; 3]| [to_pixel(dot(p, u)), to_pixel(-dot(p, v))];
    for f in 0..mesh.faces.len() {
        let t = mesh.triangle(f).map(project);
        let area2 = (t[1][0] - t[0][0]) * (t[2][1] - t[0][1]) - (t[2][0] - t[0][0]) * (t[1][1] - t[0][1]);
        if area2.abs() < 1e-9 {
            for k in 0..3 {
                draw_segment(&mut img, t[k], t[(k + 1) % 3]);
            }
            continue;
        }
        let lo = |k: usize| t.iter().map(|p| p[k]).fold(f64::INFINITY, f64::min).ceil().max(0.0) as usize;
        let hi = |k: usize| {
            let h = t.iter().map(|p| p[k]).fold(f64::NEG_INFINITY, f64::max).floor();
            if h < 0.0 { None } else { Some((h as usize).min(n - 1)) }
        };
        let (Some(x1), Some(y1)) = (hi(0), hi(1)) else { continue };
        let edge = |a: [f64; 2], b: [f64; 2], x: f64, y: f64| (b[0] - a[0]) * (y - a[1]) - (b[1] - a[1]) * (x - a[0]);
        let sign = area2.signum();
        for y in lo(1)..=y1 {
            for x in lo(0)..=x1 {
                let (px, py) = (x as f64, y as f64);
                if (0..3).all(|k| sign * edge(t[k], t[(k + 1) % 3], px, py) >= 0.0) {
                    img.set(x, y);
                }
            }
        }
    }
    img
}

pub fn lightfield_projections(nm: &NormalizedMesh) -> Result<Vec<BinaryImage>> {
    if nm.mesh.faces.is_empty() {
        return Err(Error::DegenerateMesh("mesh has no faces".into()));
    }
    Ok(view_directions().iter().map(|&d| render_silhouette(&nm.mesh, d)).collect())
}

fn compose(a: &[usize; VIEWS], b: &[usize; VIEWS]) -> [usize; VIEWS] {
    std::array::from_fn(|i| a[b[i]])
}

/// Permutation of the view axes induced by rotation `m`.
fn axis_permutation(m: &[[f64; 3]; 3]) -> [usize; VIEWS] {
    let dirs = view_directions();
    std::array::from_fn(|i| {
        let d = dirs[i];
        let r = [0, 1, 2].map(|k| dot(m[k], d));
        let j = (0..VIEWS)
            .max_by(|&a, &b| dot(r, dirs[a]).abs().total_cmp(&dot(r, dirs[b]).abs()))
            .expect("ten axes");
        debug_assert!((dot(r, dirs[j]).abs() - 1.0).abs() < 1e-9);
        j
    })
}

/// The 60 rotations of the dodecahedron as permutations of the view axes:
/// `p[i]` is the axis that axis `i` is carried to. Closure of a 3-fold and a
/// 5-fold generator.
pub fn rotation_group() -> &'static [[usize; VIEWS]] {
    static GROUP: OnceLock<Vec<[usize; VIEWS]>> = OnceLock::new();
    GROUP.get_or_init(|| {
        let cyclic = [[0.0, 0.0, 1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
        let five = super::primitives::rotation([0.0, PHI, 1.0], 2.0 * std::f64::consts::PI / 5.0);
        let gens = [axis_permutation(&cyclic), axis_permutation(&five)];
        let identity: [usize; VIEWS] = std::array::from_fn(|i| i);
        let mut group = vec![identity];
        let mut frontier = vec![identity];
        while let Some(g) = frontier.pop() {
            for h in &gens {
                let p = compose(h, &g);
                if !group.contains(&p) {
                    group.push(p);
                    frontier.push(p);
                }
            }
        }
        group.sort();
        group
    })
}
