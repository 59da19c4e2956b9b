//! Feature categories and the descriptor extractors behind them.

pub mod audio;
pub mod image;
pub mod shape;

use serde::{Deserialize, Serialize};

use crate::store::Metric;

pub const COLOR_GRID: &str = "color_grid";
pub const EDGE_HISTOGRAM: &str = "edge_histogram";
pub const HOG: &str = "hog";
pub const SURF_LOCAL: &str = "surf_local";
pub const SURF_BOW: &str = "surf_bow";
pub const HPCP_SHINGLE: &str = "hpcp_shingle";
pub const CENS_SHINGLE: &str = "cens_shingle";
pub const MFCC_SHINGLE: &str = "mfcc_shingle";
pub const FINGERPRINT: &str = "fingerprint";
pub const SPHERICAL_HARMONICS: &str = "spherical_harmonics";
pub const LIGHTFIELD: &str = "lightfield";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Modality {
    Image,
    Audio,
    Shape,
}

/// A named descriptor family: one table (or inverted index) and one metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Category {
    pub name: &'static str,
    pub modality: Modality,
    pub metric: Metric,
    /// Segments store several rows (shingles, views, keypoints) under `<segment>#<n>`.
    pub multi_row: bool,
    /// Whether the category is searchable from a query term.
    pub queryable: bool,
}

pub const CATEGORIES: &[Category] = &[
    Category { name: COLOR_GRID, modality: Modality::Image, metric: Metric::L2, multi_row: false, queryable: true },
    Category { name: EDGE_HISTOGRAM, modality: Modality::Image, metric: Metric::ChiSquared, multi_row: false, queryable: true },
    Category { name: HOG, modality: Modality::Image, metric: Metric::L2, multi_row: false, queryable: true },
    Category { name: SURF_LOCAL, modality: Modality::Image, metric: Metric::L2, multi_row: true, queryable: false },
    Category { name: SURF_BOW, modality: Modality::Image, metric: Metric::ChiSquared, multi_row: false, queryable: true },
    Category { name: HPCP_SHINGLE, modality: Modality::Audio, metric: Metric::L2, multi_row: true, queryable: true },
    Category { name: CENS_SHINGLE, modality: Modality::Audio, metric: Metric::L2, multi_row: true, queryable: true },
    Category { name: MFCC_SHINGLE, modality: Modality::Audio, metric: Metric::L2, multi_row: true, queryable: true },
    Category { name: FINGERPRINT, modality: Modality::Audio, metric: Metric::L1, multi_row: false, queryable: true },
    Category { name: SPHERICAL_HARMONICS, modality: Modality::Shape, metric: Metric::L2, multi_row: false, queryable: true },
    Category { name: LIGHTFIELD, modality: Modality::Shape, metric: Metric::L1, multi_row: true, queryable: true },
];

pub fn category(name: &str) -> Option<&'static Category> {
    CATEGORIES.iter().find(|c| c.name == name)
}

/// Image categories used for image, sketch and video-keyframe terms by default.
pub const DEFAULT_IMAGE_CATEGORIES: &[&str] = &[COLOR_GRID, EDGE_HISTOGRAM, HOG, SURF_BOW];

/// A fixed-dimension descriptor labelled with its category and owning segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescriptorVector {
    pub category: String,
    pub segment_id: String,
    pub values: Vec<f64>,
}

impl DescriptorVector {
    pub fn new(category: &str, segment_id: &str, values: Vec<f64>) -> Self {
        DescriptorVector { category: category.to_string(), segment_id: segment_id.to_string(), values }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }
}

/// Scales `v` to unit L2 norm; vectors with norm below 1e-9 become exactly zero.
pub(crate) fn l2_normalize(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm < 1e-9 {
        v.iter_mut().for_each(|x| *x = 0.0);
    } else {
        v.iter_mut().for_each(|x| *x /= norm);
    }
}
