use std::path::Path;

use super::corrupt;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh {
    pub vertices: Vec<[f64; 3]>,
    pub faces: Vec<[usize; 3]>,
}

impl TriangleMesh {
    pub fn new(vertices: Vec<[f64; 3]>, faces: Vec<[usize; 3]>) -> Result<Self> {
        let n = vertices.len();
        if let Some(bad) = faces.iter().flatten().find(|&&i| i >= n) {
            return Err(corrupt(format!("face index {bad} out of range ({n} vertices)")));
        }
        if vertices.iter().flatten().any(|c| !c.is_finite()) {
            return Err(corrupt("non-finite vertex coordinate"));
        }
        Ok(TriangleMesh { vertices, faces })
    }

    pub fn triangle(&self, face: usize) -> [[f64; 3]; 3] {
        self.faces[face].map(|i| self.vertices[i])
    }

    /// Applies `f` to every vertex.
    pub fn map_vertices(&self, f: impl Fn([f64; 3]) -> [f64; 3]) -> TriangleMesh {
        TriangleMesh {
            vertices: self.vertices.iter().map(|&v| f(v)).collect(),
            faces: self.faces.clone(),
        }
    }
}

pub fn load_mesh(path: &Path) -> Result<TriangleMesh> {
    let text = std::fs::read(path)?;
    let text = String::from_utf8(text).map_err(|_| corrupt("obj: not UTF-8"))?;
    parse_obj(&text)
}

/// Parses the `v`/`f` subset of Wavefront OBJ. Polygons are fan-triangulated
/// and every other record type is ignored.
/// Wavefront OBJ text with one `v` line per vertex and one `f` line per face.
/// Coordinates use the shortest round-trip representation.
pub fn encode_obj(mesh: &TriangleMesh) -> String {
    let mut s = String::new();
    for v in &mesh.vertices {
        s.push_str(&format!("v {} {} {}\n", v[0], v[1], v[2]));
    }
    for f in &mesh.faces {
        s.push_str(&format!("f {} {} {}\n", f[0] + 1, f[1] + 1, f[2] + 1));
    }
    s
}

pub fn parse_obj(text: &str) -> Result<TriangleMesh> {
    let mut vertices = Vec::new();
    let mut polygons: Vec<(usize, Vec<i64>)> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        let mut parts = line.split_whitespace();
        match parts.next() {
            Some("v") => {
                let coords: Vec<f64> = parts
                    .take(3)
                    .map(|p| p.parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| corrupt(format!("obj line {}: bad vertex", lineno + 1)))?;
                if coords.len() != 3 {
                    return Err(corrupt(format!("obj line {}: vertex needs 3 coordinates", lineno + 1)));
                }
                vertices.push([coords[0], coords[1], coords[2]]);
            }
            Some("f") => {
                let idx: Vec<i64> = parts
                    .map(|p| p.split('/').next().unwrap_or("").parse::<i64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| corrupt(format!("obj line {}: bad face index", lineno + 1)))?;
                if idx.len() < 3 {
                    return Err(corrupt(format!("obj line {}: face needs 3 vertices", lineno + 1)));
                }
                // Negative indices are relative to the vertices seen so far.
                polygons.push((vertices.len(), idx));
            }
            _ => {}
        }
    }
    let n = vertices.len() as i64;
    let mut faces = Vec::new();
    for (seen, poly) in polygons {
        let resolved: Vec<usize> = poly
            .iter()
            .map(|&i| {
                let abs = if i < 0 { seen as i64 + i } else { i - 1 };
                if i == 0 || abs < 0 || abs >= n {
                    Err(corrupt(format!("obj: face index {i} out of range ({n} vertices)")))
                } else {
                    Ok(abs as usize)
                }
            })
            .collect::<Result<_>>()?;
        for k in 1..resolved.len() - 1 {
            faces.push([resolved[0], resolved[k], resolved[k + 1]]);
        }
    }
    TriangleMesh::new(vertices, faces)
}
