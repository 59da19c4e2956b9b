//! Procedural meshes for synthetic corpora and tests.

use std::collections::HashMap;
use std::f64::consts::PI;

use crate::media::TriangleMesh;

fn build(vertices: Vec<[f64; 3]>, faces: Vec<[usize; 3]>) -> TriangleMesh {
    TriangleMesh::new(vertices, faces).expect("generated indices are in range")
}

/// Axis-aligned box centred at the origin.
pub fn cuboid(sx: f64, sy: f64, sz: f64) -> TriangleMesh {
    let (x, y, z) = (sx / 2.0, sy / 2.0, sz / 2.0);
    let v = vec![
        [-x, -y, -z], [x, -y, -z], [x, y, -z], [-x, y, -z],
        [-x, -y, z], [x, -y, z], [x, y, z], [-x, y, z],
    ];
    let f = vec![
        [0, 2, 1], [0, 3, 2], [4, 5, 6], [4, 6, 7],
        [0, 1, 5], [0, 5, 4], [2, 3, 7], [2, 7, 6],
        [1, 2, 6], [1, 6, 5], [3, 0, 4], [3, 4, 7],
    ];
    build(v, f)
}

/// Unit icosphere: a subdivided icosahedron projected onto the sphere.
pub fn icosphere(subdivisions: usize) -> TriangleMesh {
    let p = (1.0 + 5f64.sqrt()) / 2.0;
    let unit = |v: [f64; 3]| {
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        v.map(|c| c / n)
    };
    let mut vertices: Vec<[f64; 3]> = [
        [-1.0, p, 0.0], [1.0, p, 0.0], [-1.0, -p, 0.0], [1.0, -p, 0.0],
        [0.0, -1.0, p], [0.0, 1.0, p], [0.0, -1.0, -p], [0.0, 1.0, -p],
        [p, 0.0, -1.0], [p, 0.0, 1.0], [-p, 0.0, -1.0], [-p, 0.0, 1.0],
    ]
    .into_iter()
    .map(unit)
    .collect();
    let mut faces = vec![
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ];
    for _ in 0..subdivisions {
        let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();
        let mut mid = |a: usize, b: usize, vertices: &mut Vec<[f64; 3]>| {
            *midpoints.entry((a.min(b), a.max(b))).or_insert_with(|| {
                let (u, w) = (vertices[a], vertices[b]);
                vertices.push(unit([0, 1, 2].map(|k| (u[k] + w[k]) / 2.0)));
                vertices.len() - 1
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for [a, b, c] in faces {
            let ab = mid(a, b, &mut vertices);
            let bc = mid(b, c, &mut vertices);
            let ca = mid(c, a, &mut vertices);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    build(vertices, faces)
}

/// Closed prism over a polygon in the xy-plane, extruded along z.
pub fn prism(outline: &[[f64; 2]], height: f64) -> TriangleMesh {
    let n = outline.len();
    let h = height / 2.0;
    let mut v: Vec<[f64; 3]> = outline.iter().map(|p| [p[0], p[1], -h]).collect();
    v.extend(outline.iter().map(|p| [p[0], p[1], h]));
    v.push([0.0, 0.0, -h]);
    v.push([0.0, 0.0, h]);
    let (bottom, top) = (2 * n, 2 * n + 1);
    let mut f = Vec::with_capacity(4 * n);
    for i in 0..n {
        let j = (i + 1) % n;
        f.push([i, j, n + j]);
        f.push([i, n + j, n + i]);
        f.push([bottom, j, i]);
        f.push([top, n + i, n + j]);
    }
    build(v, f)
}

pub fn cylinder(radius: f64, height: f64, segments: usize) -> TriangleMesh {
    let outline: Vec<[f64; 2]> = (0..segments)
        .map(|i| {
            let a = 2.0 * PI * i as f64 / segments as f64;
            [radius * a.cos(), radius * a.sin()]
        })
        .collect();
    prism(&outline, height)
}

/// Star-shaped prism with `points` spikes.
pub fn star_prism(points: usize, outer: f64, inner: f64, height: f64) -> TriangleMesh {
    let outline: Vec<[f64; 2]> = (0..2 * points)
        .map(|i| {
            let a = PI * i as f64 / points as f64 + PI / 2.0;
            let r = if i % 2 == 0 { outer } else { inner };
            [r * a.cos(), r * a.sin()]
        })
        .collect();
    prism(&outline, height)
}

pub fn cone(radius: f64, height: f64, segments: usize) -> TriangleMesh {
    let mut v: Vec<[f64; 3]> = (0..segments)
        .map(|i| {
            let a = 2.0 * PI * i as f64 / segments as f64;
            [radius * a.cos(), radius * a.sin(), -height / 2.0]
        })
        .collect();
    v.push([0.0, 0.0, height / 2.0]);
    v.push([0.0, 0.0, -height / 2.0]);
    let (apex, base) = (segments, segments + 1);
    let mut f = Vec::with_capacity(2 * segments);
    for i in 0..segments {
        let j = (i + 1) % segments;
        f.push([i, j, apex]);
        f.push([base, j, i]);
    }
    build(v, f)
}

pub fn torus(major: f64, minor: f64, rings: usize, sides: usize) -> TriangleMesh {
    let mut v = Vec::with_capacity(rings * sides);
    for i in 0..rings {
        let u = 2.0 * PI * i as f64 / rings as f64;
        for j in 0..sides {
            let w = 2.0 * PI * j as f64 / sides as f64;
            let r = major + minor * w.cos();
            v.push([r * u.cos(), r * u.sin(), minor * w.sin()]);
        }
    }
    let mut f = Vec::with_capacity(2 * rings * sides);
    for i in 0..rings {
        for j in 0..sides {
            let a = i * sides + j;
            let b = ((i + 1) % rings) * sides + j;
            let c = ((i + 1) % rings) * sides + (j + 1) % sides;
            let d = i * sides + (j + 1) % sides;
            f.push([a, b, c]);
            f.push([a, c, d]);
        }
    }
    build(v, f)
}

/// Rotation matrix for `angle` radians about `axis` (Rodrigues).
pub fn rotation(axis: [f64; 3], angle: f64) -> [[f64; 3]; 3] {
    let n = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
    let [x, y, z] = axis.map(|c| c / n);
    let (s, c) = angle.sin_cos();
    let t = 1.0 - c;
    [
        [t * x * x + c, t * x * y - s * z, t * x * z + s * y],
        [t * x * y + s * z, t * y * y + c, t * y * z - s * x],
        [t * x * z - s * y, t * y * z + s * x, t * z * z + c],
    ]
}

pub fn apply(m: &[[f64; 3]; 3], v: [f64; 3]) -> [f64; 3] {
    [0, 1, 2].map(|r| m[r][0] * v[0] + m[r][1] * v[1] + m[r][2] * v[2])
}

pub fn rotate(mesh: &TriangleMesh, m: &[[f64; 3]; 3]) -> TriangleMesh {
    mesh.map_vertices(|v| apply(m, v))
}
