//! Browser demo: descriptor comparison for two images, and query-by-sketch
//! over a small in-memory gallery of 3D models.
//!
//! Everything runs client side on the same extractors the engine uses. The
//! `#[wasm_bindgen]` items are thin wrappers over plain functions so the
//! logic is testable natively.

use polyseek::features::image::{average_color_grid, edge_histogram, hog_descriptor};
use polyseek::features::shape::{
    lightfield_descriptor, lightfield_projections, normalize_mesh, sketch_distance, sketch_to_lightfield_query,
    BinaryImage, LightFieldDescriptor,
};
use polyseek::features::{category, COLOR_GRID, EDGE_HISTOGRAM, HOG};
use polyseek::media::{decode_image, encode_png, parse_obj, RasterImage, TriangleMesh};
use polyseek::synth::ShapeClass;
use polyseek::Result;
use serde_json::json;
use wasm_bindgen::prelude::*;

#[derive(Debug, Clone, PartialEq)]
pub struct CategoryDistance {
    pub category: &'static str,
    pub distance: f64,
}

/// Distance between two encoded images under each global image descriptor,
/// using the metric the engine stores that category with.
pub fn image_distances(a: &[u8], b: &[u8]) -> Result<Vec<CategoryDistance>> {
    let (a, b) = (decode_image(a)?, decode_image(b)?);
    let extractors: [(&'static str, fn(&RasterImage) -> Vec<f64>); 3] =
        [(COLOR_GRID, average_color_grid), (EDGE_HISTOGRAM, edge_histogram), (HOG, hog_descriptor)];
    Ok(extractors
        .iter()
        .map(|&(name, f)| {
            let metric = category(name).expect("known category").metric;
            CategoryDistance { category: name, distance: metric.eval(&f(&a), &f(&b)) }
        })
        .collect())
}

struct Model {
    name: String,
    views: Vec<BinaryImage>,
    descriptor: LightFieldDescriptor,
}

/// Models with their ten silhouettes and light-field descriptors.
#[wasm_bindgen]
pub struct Gallery {
    models: Vec<Model>,
}

impl Gallery {
    /// One instance of every synthetic shape class.
    pub fn with_primitives() -> Self {
        let mut g = Gallery { models: Vec::new() };
        for class in ShapeClass::ALL {
            g.add_mesh(class.name(), &class.instance(0)).expect("primitives are well formed");
        }
        g
    }

    pub fn add_mesh(&mut self, name: &str, mesh: &TriangleMesh) -> Result<usize> {
        let nm = normalize_mesh(mesh)?;
        let descriptor = lightfield_descriptor(&nm)?;
        let views = lightfield_projections(&nm)?;
        self.models.push(Model { name: name.to_string(), views, descriptor });
        Ok(self.models.len() - 1)
    }

    /// Model indices by increasing distance from the sketch to each model's
    /// closest view.
    pub fn rank(&self, sketch_png: &[u8]) -> Result<Vec<(usize, f64)>> {
        let query = sketch_to_lightfield_query(&decode_image(sketch_png)?)?;
        let mut ranked: Vec<(usize, f64)> =
            self.models.iter().enumerate().map(|(i, m)| (i, sketch_distance(&query, &m.descriptor))).collect();
        ranked.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        Ok(ranked)
    }

    /// Silhouette `view` of model `index` as a black-on-white PNG.
    pub fn view(&self, index: usize, view: usize) -> Option<Vec<u8>> {
        let s = self.models.get(index)?.views.get(view)?;
        let img = RasterImage::from_fn(s.width, s.height, |x, y| if s.get(x, y) { [0; 3] } else { [255; 3] });
        Some(encode_png(&img))
    }
}

fn js_err(e: polyseek::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// JSON array of `{category, distance}` for two PNG or binary PPM files.
#[wasm_bindgen(js_name = compareImages)]
pub fn compare_images(a: &[u8], b: &[u8]) -> std::result::Result<String, JsError> {
    let rows: Vec<_> = image_distances(a, b)
        .map_err(js_err)?
        .into_iter()
        .map(|d| json!({ "category": d.category, "distance": d.distance }))
        .collect();
    Ok(serde_json::Value::from(rows).to_string())
}

#[wasm_bindgen]
impl Gallery {
    #[wasm_bindgen(constructor)]
    pub fn new() -> Gallery {
        Gallery::with_primitives()
    }

    #[wasm_bindgen(getter)]
    pub fn length(&self) -> usize {
        self.models.len()
    }

    pub fn name(&self, index: usize) -> Option<String> {
        self.models.get(index).map(|m| m.name.clone())
    }

    /// Adds a Wavefront OBJ model; returns its index.
    #[wasm_bindgen(js_name = addObj)]
    pub fn add_obj(&mut self, name: &str, text: &str) -> std::result::Result<usize, JsError> {
        let mesh = parse_obj(text).map_err(js_err)?;
        self.add_mesh(name, &mesh).map_err(js_err)
    }

    /// JSON array of `{index, name, distance}`, best first.
    #[wasm_bindgen(js_name = rankSketch)]
    pub fn rank_sketch(&self, sketch_png: &[u8]) -> std::result::Result<String, JsError> {
        let rows: Vec<_> = self
            .rank(sketch_png)
            .map_err(js_err)?
            .into_iter()
            .map(|(i, d)| json!({ "index": i, "name": self.models[i].name, "distance": d }))
            .collect();
        Ok(serde_json::Value::from(rows).to_string())
    }

    #[wasm_bindgen(js_name = viewPng)]
    pub fn view_png(&self, index: usize, view: usize) -> Option<Vec<u8>> {
        self.view(index, view)
    }
}

impl Default for Gallery {
    fn default() -> Self {
        Gallery::with_primitives()
    }
}
