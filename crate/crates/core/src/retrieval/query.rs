use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::audio::{audio_features_for_category, AudioQueryCategory};
use crate::features::{self, Modality, DEFAULT_IMAGE_CATEGORIES, LIGHTFIELD, SPHERICAL_HARMONICS};
use crate::media::{AudioBuffer, MediaType, RasterImage, TriangleMesh};

use super::fusion::WeightedCategory;

pub const DEFAULT_K: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TermType {
    Image,
    Audio,
    #[serde(rename = "MODEL_3D")]
    Model3d,
    /// Reserved; executing it fails with `UnsupportedTerm`.
    Motion,
}

/// A decoded reference document.
#[derive(Debug, Clone)]
pub enum Reference {
    /// Example image or sketch, searched with image descriptors.
    Image(RasterImage),
    Audio(AudioBuffer),
    Mesh(TriangleMesh),
    /// 2D silhouette sketch of a 3D object.
    Silhouette(RasterImage),
    Motion,
}

#[derive(Debug, Clone)]
pub struct QueryTerm {
    pub term_type: TermType,
    pub reference: Reference,
    /// Empty means the defaults for the reference kind.
    pub categories: Vec<WeightedCategory>,
    pub audio_category: Option<AudioQueryCategory>,
}

#[derive(Debug, Clone)]
pub struct QueryComponent {
    pub terms: Vec<QueryTerm>,
}

#[derive(Debug, Clone)]
pub struct Query {
    pub components: Vec<QueryComponent>,
    pub k: usize,
    pub media_filter: Option<Vec<MediaType>>,
}

impl QueryTerm {
    pub fn new(term_type: TermType, reference: Reference) -> Self {
        QueryTerm { term_type, reference, categories: Vec::new(), audio_category: None }
    }

    pub fn image(img: RasterImage) -> Self {
        Self::new(TermType::Image, Reference::Image(img))
    }

    pub fn audio(audio: AudioBuffer, category: AudioQueryCategory) -> Self {
        QueryTerm { audio_category: Some(category), ..Self::new(TermType::Audio, Reference::Audio(audio)) }
    }

    pub fn mesh(mesh: TriangleMesh) -> Self {
        Self::new(TermType::Model3d, Reference::Mesh(mesh))
    }

    pub fn silhouette(sketch: RasterImage) -> Self {
        Self::new(TermType::Model3d, Reference::Silhouette(sketch))
    }

    pub fn with_categories(mut self, categories: &[(&str, f64)]) -> Self {
        self.categories = categories
            .iter()
            .map(|(c, w)| WeightedCategory { category: c.to_string(), weight: *w })
            .collect();
        self
    }

    fn allowed(&self, name: &str) -> bool {
        let Some(cat) = features::category(name) else { return false };
        cat.queryable
            && match (&self.reference, self.term_type) {
                (Reference::Image(_), TermType::Image) => cat.modality == Modality::Image,
                (Reference::Audio(_), TermType::Audio) => cat.modality == Modality::Audio,
                (Reference::Mesh(_), TermType::Model3d) => name == SPHERICAL_HARMONICS || name == LIGHTFIELD,
                (Reference::Silhouette(_), TermType::Model3d) => name == LIGHTFIELD,
                _ => false,
            }
    }

    /// Categories with weights after applying the defaults, validated.
    pub fn resolved_categories(&self) -> Result<Vec<WeightedCategory>> {
        let reference_fits = matches!(
            (&self.reference, self.term_type),
            (Reference::Image(_), TermType::Image)
                | (Reference::Audio(_), TermType::Audio)
                | (Reference::Mesh(_) | Reference::Silhouette(_), TermType::Model3d)
                | (Reference::Motion, TermType::Motion)
        );
        if !reference_fits {
            return Err(Error::InvalidQuery(format!("reference does not match term type {:?}", self.term_type)));
        }
        if self.term_type == TermType::Motion {
            return Err(Error::UnsupportedTerm("MOTION".into()));
        }
        if self.audio_category.is_some() && self.term_type != TermType::Audio {
            return Err(Error::InvalidQuery("audio_category given for a non-audio term".into()));
        }
        let categories = if self.categories.is_empty() {
            let names: &[&str] = match &self.reference {
                Reference::Image(_) => DEFAULT_IMAGE_CATEGORIES,
                Reference::Audio(_) => audio_features_for_category(self.audio_category.unwrap_or(AudioQueryCategory::Matching)),
                Reference::Mesh(_) => &[SPHERICAL_HARMONICS],
                Reference::Silhouette(_) => &[LIGHTFIELD],
                Reference::Motion => &[],
            };
            names.iter().map(|c| WeightedCategory { category: c.to_string(), weight: 1.0 }).collect()
        } else {
            self.categories.clone()
        };
        for c in &categories {
            if features::category(&c.category).is_none() {
                return Err(Error::UnknownCategory(c.category.clone()));
            }
            if !self.allowed(&c.category) {
                return Err(Error::InvalidQuery(format!("category {} cannot be used by this term", c.category)));
            }
            if !(c.weight.is_finite() && (0.0..=1.0).contains(&c.weight)) {
                return Err(Error::InvalidQuery(format!("weight {} of {} outside [0, 1]", c.weight, c.category)));
            }
        }
        for (i, c) in categories.iter().enumerate() {
            if categories[..i].iter().any(|d| d.category == c.category) {
                return Err(Error::InvalidQuery(format!("category {} listed twice", c.category)));
            }
        }
        if !categories.iter().any(|c| c.weight > 0.0) {
            return Err(Error::InvalidQuery("a term needs at least one category with weight > 0".into()));
        }
        Ok(categories)
    }
}

impl Query {
    pub fn single(term: QueryTerm) -> Self {
        Query { components: vec![QueryComponent { terms: vec![term] }], k: DEFAULT_K, media_filter: None }
    }

    pub fn validate(&self) -> Result<()> {
        if self.components.is_empty() {
            return Err(Error::InvalidQuery("query has no components".into()));
        }
        if self.k == 0 {
            return Err(Error::InvalidQuery("k must be at least 1".into()));
        }
        for (ci, comp) in self.components.iter().enumerate() {
            if comp.terms.is_empty() {
                return Err(Error::InvalidQuery(format!("component {ci} has no terms")));
            }
            for (i, t) in comp.terms.iter().enumerate() {
                if comp.terms[..i].iter().any(|u| u.term_type == t.term_type) {
                    return Err(Error::InvalidQuery(format!(
                        "component {ci} has more than one {:?} term",
                        t.term_type
                    )));
                }
            }
        }
        Ok(())
    }
}
