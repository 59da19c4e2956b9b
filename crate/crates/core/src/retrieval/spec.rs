//! Serializable query documents. References travel base64-inline over the
//! network; local callers (CLI, scenario scripts) may name files instead.

use std::path::{Path, PathBuf};

use base64::engine::general_purpose::STANDARD;
use base64::Engine as _;
use serde::{Deserialize, Serialize};

use super::fusion::WeightedCategory;
use super::query::{Query, QueryComponent, QueryTerm, Reference, TermType, DEFAULT_K};
use crate::error::{Error, Result};
use crate::features::audio::AudioQueryCategory;
use crate::media::{decode_image, decode_wav, parse_obj, MediaType};

/// How a term's reference bytes are decoded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReferenceKind {
    Image,
    Audio,
    Mesh,
    /// 2D silhouette sketch (PNG/PPM) of a 3D object.
    Silhouette,
}

impl ReferenceKind {
    /// The kind used when a term does not name one.
    pub fn default_for(term_type: TermType) -> Option<Self> {
        match term_type {
            TermType::Image => Some(ReferenceKind::Image),
            TermType::Audio => Some(ReferenceKind::Audio),
            TermType::Model3d => Some(ReferenceKind::Mesh),
            TermType::Motion => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    #[serde(rename = "type")]
    pub term_type: TermType,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<ReferenceKind>,
    /// Base64 of the reference file's bytes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub categories: Vec<WeightedCategory>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub audio_category: Option<AudioQueryCategory>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentSpec {
    pub terms: Vec<TermSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuerySpec {
    pub components: Vec<ComponentSpec>,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub media_filter: Option<Vec<MediaType>>,
}

fn default_k() -> usize {
    DEFAULT_K
}

/// Where file references may be read from.
#[derive(Debug, Clone, Copy)]
pub enum PathPolicy<'a> {
    /// Only inline data is accepted.
    Deny,
    /// Relative paths resolve against the directory.
    Allow(&'a Path),
}

impl TermSpec {
    /// A term carrying `bytes` inline.
    pub fn inline(term_type: TermType, kind: ReferenceKind, bytes: &[u8]) -> Self {
        TermSpec {
            term_type,
            kind: Some(kind),
            data: Some(STANDARD.encode(bytes)),
            path: None,
            categories: Vec::new(),
            audio_category: None,
        }
    }

    fn bytes(&self, paths: PathPolicy) -> Result<Vec<u8>> {
        match (&self.data, &self.path, paths) {
            (Some(_), Some(_), _) => Err(Error::InvalidQuery("term has both data and path".into())),
            (Some(d), None, _) => {
                STANDARD.decode(d.trim()).map_err(|e| Error::InvalidQuery(format!("reference is not valid base64: {e}")))
            }
            (None, Some(p), PathPolicy::Allow(base)) => Ok(std::fs::read(base.join(p))?),
            (None, Some(_), PathPolicy::Deny) => Err(Error::InvalidQuery("file references are not accepted here".into())),
            (None, None, _) => Err(Error::InvalidQuery("term has no reference document".into())),
        }
    }

    pub fn decode(&self, paths: PathPolicy) -> Result<QueryTerm> {
        if self.term_type == TermType::Motion {
            return Err(Error::UnsupportedTerm("MOTION".into()));
        }
        let kind = self.kind.or_else(|| ReferenceKind::default_for(self.term_type)).expect("motion handled above");
        let bytes = self.bytes(paths)?;
        let reference = match kind {
            ReferenceKind::Image => Reference::Image(decode_image(&bytes)?),
            ReferenceKind::Silhouette => Reference::Silhouette(decode_image(&bytes)?),
            ReferenceKind::Audio => Reference::Audio(decode_wav(&bytes)?),
            ReferenceKind::Mesh => {
                let text = std::str::from_utf8(&bytes).map_err(|_| Error::CorruptFile("obj: not UTF-8".into()))?;
                Reference::Mesh(parse_obj(text)?)
            }
        };
        Ok(QueryTerm {
            term_type: self.term_type,
            reference,
            categories: self.categories.clone(),
            audio_category: self.audio_category,
        })
    }
}

impl QuerySpec {
    pub fn single(term: TermSpec) -> Self {
        QuerySpec { components: vec![ComponentSpec { terms: vec![term] }], k: DEFAULT_K, media_filter: None }
    }

    /// Decodes every reference; fails on the first undecodable one.
    pub fn decode(&self, paths: PathPolicy) -> Result<Query> {
        let components = self
            .components
            .iter()
            .map(|c| Ok(QueryComponent { terms: c.terms.iter().map(|t| t.decode(paths)).collect::<Result<_>>()? }))
            .collect::<Result<Vec<_>>>()?;
        let query = Query { components, k: self.k, media_filter: self.media_filter.clone() };
        query.validate()?;
        Ok(query)
    }
}
