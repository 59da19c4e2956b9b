//! Object and segment catalog, persisted with the table framing plus a schema id.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::binio::{Reader, Writer};
use super::table::{TABLE_MAGIC, TABLE_VERSION};
use crate::error::{Error, Result};
use crate::media::{MediaObject, MediaType};
use crate::segment::SegmentRecord;

pub const OBJECT_SCHEMA: u8 = 0x10;
pub const SEGMENT_SCHEMA: u8 = 0x11;
const OBJECT_COLUMNS: u32 = 5;
const SEGMENT_COLUMNS: u32 = 5;

/// An object with its segments, as returned by lookups.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectRecord {
    #[serde(flatten)]
    pub object: MediaObject,
    pub segments: Vec<SegmentRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CatalogEntry {
    Object(ObjectRecord),
    Segment(SegmentRecord),
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Catalog {
    objects: Vec<MediaObject>,
    object_pos: HashMap<String, usize>,
    segments: Vec<SegmentRecord>,
    segment_pos: HashMap<String, usize>,
    by_object: HashMap<String, Vec<usize>>,
}

impl Catalog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn objects(&self) -> &[MediaObject] {
        &self.objects
    }

    pub fn segments(&self) -> &[SegmentRecord] {
        &self.segments
    }

    pub fn object(&self, object_id: &str) -> Option<&MediaObject> {
        self.object_pos.get(object_id).map(|&i| &self.objects[i])
    }

    pub fn segment(&self, segment_id: &str) -> Option<&SegmentRecord> {
        self.segment_pos.get(segment_id).map(|&i| &self.segments[i])
    }

    /// Segments of an object in sequence order.
    pub fn segments_of(&self, object_id: &str) -> Vec<&SegmentRecord> {
        let mut segs: Vec<&SegmentRecord> = self
            .by_object
            .get(object_id)
            .map(|v| v.iter().map(|&i| &self.segments[i]).collect())
            .unwrap_or_default();
        segs.sort_by_key(|s| s.sequence_number);
        segs
    }

    pub fn insert_object(&mut self, object: MediaObject) -> Result<()> {
        if self.object_pos.contains_key(&object.object_id) {
            return Err(Error::DuplicateId(object.object_id));
        }
        self.object_pos.insert(object.object_id.clone(), self.objects.len());
        self.objects.push(object);
        Ok(())
    }

    pub fn insert_segment(&mut self, segment: SegmentRecord) -> Result<()> {
        if self.segment_pos.contains_key(&segment.segment_id) {
            return Err(Error::DuplicateId(segment.segment_id));
        }
        if !self.object_pos.contains_key(&segment.object_id) {
            return Err(Error::UnknownId(segment.object_id));
        }
        let i = self.segments.len();
        self.segment_pos.insert(segment.segment_id.clone(), i);
        self.by_object.entry(segment.object_id.clone()).or_default().push(i);
        self.segments.push(segment);
        Ok(())
    }

    /// Full record for an object id or a segment id.
    pub fn lookup(&self, id: &str) -> Result<CatalogEntry> {
        if let Some(object) = self.object(id) {
            return Ok(CatalogEntry::Object(self.record(object)));
        }
        self.segment(id)
            .map(|s| CatalogEntry::Segment(s.clone()))
            .ok_or_else(|| Error::UnknownId(id.to_string()))
    }

    pub fn record(&self, object: &MediaObject) -> ObjectRecord {
        ObjectRecord {
            object: object.clone(),
            segments: self.segments_of(&object.object_id).into_iter().cloned().collect(),
        }
    }

    /// Objects whose name contains `needle`, case-insensitively, in catalog order.
    pub fn search_name(&self, needle: &str) -> Vec<&MediaObject> {
        let needle = needle.to_lowercase();
        self.objects.iter().filter(|o| o.name.to_lowercase().contains(&needle)).collect()
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        let mut w = Writer::new(TABLE_MAGIC, TABLE_VERSION);
        w.u8(OBJECT_SCHEMA);
        w.u32(OBJECT_COLUMNS);
        w.u64(self.objects.len() as u64);
        for o in &self.objects {
            w.str(&o.object_id)?;
            w.str(o.media_type.as_str())?;
            w.str(&o.path.to_string_lossy())?;
            w.str(&o.name)?;
            w.u64(o.size);
        }
        w.commit(&dir.join("objects.cat"))?;

        let mut w = Writer::new(TABLE_MAGIC, TABLE_VERSION);
        w.u8(SEGMENT_SCHEMA);
        w.u32(SEGMENT_COLUMNS);
        w.u64(self.segments.len() as u64);
        for s in &self.segments {
            w.str(&s.segment_id)?;
            w.str(&s.object_id)?;
            w.u32(s.sequence_number);
            w.u64(s.start);
            w.u64(s.end);
        }
        w.commit(&dir.join("segments.cat"))
    }

    /// Reads both catalog files from `dir`; missing files mean an empty catalog.
    pub fn read(dir: &Path) -> Result<Self> {
        let mut catalog = Catalog::new();
        let objects = dir.join("objects.cat");
        if objects.exists() {
            let bytes = std::fs::read(&objects)?;
            let mut r = open(&bytes, OBJECT_SCHEMA, OBJECT_COLUMNS, "object catalog")?;
            for _ in 0..r.count(8 + 8)? {
                let object_id = r.str()?;
                let kind = r.str()?;
                let media_type = MediaType::parse(&kind)
                    .ok_or_else(|| Error::CorruptFile(format!("object catalog: media type {kind}")))?;
                let path = PathBuf::from(r.str()?);
                let name = r.str()?;
                let size = r.u64()?;
                catalog
                    .insert_object(MediaObject { object_id, media_type, path, name, size })
                    .map_err(|e| Error::CorruptFile(format!("object catalog: {e}")))?;
            }
            r.finish()?;
        }
        let segments = dir.join("segments.cat");
        if segments.exists() {
            let bytes = std::fs::read(&segments)?;
            let mut r = open(&bytes, SEGMENT_SCHEMA, SEGMENT_COLUMNS, "segment catalog")?;
            for _ in 0..r.count(4 + 20)? {
                let segment_id = r.str()?;
                let object_id = r.str()?;
                let sequence_number = r.u32()?;
                let start = r.u64()?;
                let end = r.u64()?;
                catalog
                    .insert_segment(SegmentRecord { segment_id, object_id, sequence_number, start, end })
                    .map_err(|e| Error::CorruptFile(format!("segment catalog: {e}")))?;
            }
            r.finish()?;
        }
        Ok(catalog)
    }
}

fn open<'a>(bytes: &'a [u8], schema: u8, columns: u32, what: &'static str) -> Result<Reader<'a>> {
    let (mut r, version) = Reader::open(bytes, TABLE_MAGIC, what)?;
    if version != TABLE_VERSION {
        return Err(Error::UnsupportedFormat(format!("{what} version {version}")));
    }
    let found = r.u8()?;
    if found != schema || r.u32()? != columns {
        return Err(Error::CorruptFile(format!("{what}: unexpected schema {found:#x}")));
    }
    Ok(r)
}
