use crate::error::{Error, Result};
use crate::media::TriangleMesh;

/// A mesh translated to its surface centroid and scaled into the unit ball.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedMesh {
    pub mesh: TriangleMesh,
    pub applied_translation: [f64; 3],
    pub applied_scale: f64,
}

pub(crate) fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

pub(crate) fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn triangle_area(t: &[[f64; 3]; 3]) -> f64 {
    0.5 * norm(cross(sub(t[1], t[0]), sub(t[2], t[0])))
}

pub fn normalize_mesh(mesh: &TriangleMesh) -> Result<NormalizedMesh> {
    let mut total = 0.0;
    let mut centroid = [0.0; 3];
    for f in 0..mesh.faces.len() {
        let t = mesh.triangle(f);
        let a = triangle_area(&t);
        total += a;
        for (c, k) in centroid.iter_mut().zip(0..3) {
            *c += a * (t[0][k] + t[1][k] + t[2][k]) / 3.0;
        }
    }
    if !(total > 0.0 && total.is_finite()) {
        return Err(Error::DegenerateMesh("mesh has zero surface area".into()));
    }
    let translation = centroid.map(|c| -c / total);
    let radius = mesh
        .vertices
        .iter()
        .map(|&v| norm([v[0] + translation[0], v[1] + translation[1], v[2] + translation[2]]))
        .fold(0.0, f64::max);
    let scale = 1.0 / radius;
    let mesh = mesh.map_vertices(|v| [0, 1, 2].map(|k| (v[k] + translation[k]) * scale));
    Ok(NormalizedMesh { mesh, applied_translation: translation, applied_scale: scale })
}
