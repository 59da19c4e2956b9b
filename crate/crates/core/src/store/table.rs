use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::binio::{Reader, Writer};
use super::metric::{check_non_negative, Metric};
use crate::error::{Error, Result};

pub const TABLE_MAGIC: &[u8; 4] = b"VTRS";
pub const TABLE_VERSION: u16 = 1;

/// One kNN hit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Neighbor {
    pub row_id: String,
    pub distance: f64,
}

/// Hits ascending by distance, ties broken by row id.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct KnnResult {
    pub hits: Vec<Neighbor>,
    /// Rows whose true distance was computed.
    pub candidates_examined: usize,
}

/// Ordering used by every search: distance, then row id.
pub(crate) fn hit_order(a: &Neighbor, b: &Neighbor) -> std::cmp::Ordering {
    a.distance.total_cmp(&b.distance).then_with(|| a.row_id.cmp(&b.row_id))
}

/// Fixed-dimension f32 vectors keyed by unique row ids, in insertion order.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorTable {
    category: String,
    dim: usize,
    metric: Metric,
    ids: Vec<String>,
    positions: HashMap<String, usize>,
    data: Vec<f32>,
}

impl VectorTable {
    pub fn new(category: &str, dim: usize, metric: Metric) -> Self {
        VectorTable {
            category: category.to_string(),
            dim,
            metric,
            ids: Vec::new(),
            positions: HashMap::new(),
            data: Vec::new(),
        }
    }

    pub fn category(&self) -> &str {
        &self.category
    }
    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn metric(&self) -> Metric {
        self.metric
    }
    pub fn len(&self) -> usize {
        self.ids.len()
    }
    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn row(&self, index: usize) -> &[f32] {
        &self.data[index * self.dim..(index + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = (&str, &[f32])> {
        self.ids.iter().map(String::as_str).zip(self.data.chunks_exact(self.dim.max(1)))
    }

    pub fn position(&self, row_id: &str) -> Option<usize> {
        self.positions.get(row_id).copied()
    }

    pub fn get(&self, row_id: &str) -> Option<&[f32]> {
        self.position(row_id).map(|i| self.row(i))
    }

    pub fn insert(&mut self, row_id: &str, vector: &[f32]) -> Result<()> {
        if vector.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, actual: vector.len() });
        }
        if self.positions.contains_key(row_id) {
            return Err(Error::DuplicateId(row_id.to_string()));
        }
        if row_id.len() > u16::MAX as usize {
            return Err(Error::CorruptFile("row id longer than 65535 bytes".into()));
        }
        if self.metric == Metric::ChiSquared {
            check_non_negative(vector)?;
        }
        self.positions.insert(row_id.to_string(), self.ids.len());
        self.ids.push(row_id.to_string());
        self.data.extend_from_slice(vector);
        Ok(())
    }

    /// Stores an f64 descriptor (narrowed to f32, the on-disk precision).
    pub fn insert_f64(&mut self, row_id: &str, vector: &[f64]) -> Result<()> {
        let v: Vec<f32> = vector.iter().map(|&x| x as f32).collect();
        self.insert(row_id, &v)
    }

    fn check_query(&self, query: &[f64]) -> Result<()> {
        if query.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, actual: query.len() });
        }
        if self.metric == Metric::ChiSquared {
            check_non_negative(query)?;
        }
        Ok(())
    }

    /// Distance from `query` to row `index` under the table metric.
    #[inline]
    pub fn distance_to(&self, query: &[f64], index: usize) -> f64 {
        self.metric.eval(query, self.row(index))
    }

    /// Full scan for the `k` nearest rows.
    pub fn knn_exact(&self, query: &[f64], k: usize) -> Result<KnnResult> {
        self.check_query(query)?;
        let hits: Vec<Neighbor> = (0..self.len())
            .map(|i| Neighbor { row_id: self.ids[i].clone(), distance: self.distance_to(query, i) })
            .collect();
        Ok(KnnResult { hits: top_k(hits, k), candidates_examined: self.len() })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = Writer::new(TABLE_MAGIC, TABLE_VERSION);
        w.u8(self.metric.code());
        w.u32(self.dim as u32);
        w.u64(self.len() as u64);
        for (id, row) in self.rows() {
            w.str(id)?;
            row.iter().for_each(|&v| w.f32(v));
        }
        w.commit(path)
    }

    /// Loads a table; the category is the file stem.
    pub fn read(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path)?;
        let category = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
        Self::decode(&bytes, category)
    }

    pub fn decode(bytes: &[u8], category: &str) -> Result<Self> {
        let (mut r, version) = Reader::open(bytes, TABLE_MAGIC, "vector table")?;
        if version != TABLE_VERSION {
            return Err(Error::UnsupportedFormat(format!("vector table version {version}")));
        }
        let metric = Metric::from_code(r.u8()?)
            .ok_or_else(|| Error::CorruptFile("vector table: unknown metric code".into()))?;
        let dim = r.u32()? as usize;
        let rows = r.count(2 + 4 * dim)?;
        let mut table = VectorTable::new(category, dim, metric);
        table.ids.reserve(rows);
        table.data.reserve(rows * dim);
        for _ in 0..rows {
            let id = r.str()?;
            if table.positions.insert(id.clone(), table.ids.len()).is_some() {
                return Err(Error::CorruptFile(format!("vector table: duplicate row id {id}")));
            }
            table.ids.push(id);
            for _ in 0..dim {
                table.data.push(r.f32()?);
            }
        }
        r.finish()?;
        Ok(table)
    }
}

/// Sorts by (distance, row id) and keeps the first `k`.
pub(crate) fn top_k(mut hits: Vec<Neighbor>, k: usize) -> Vec<Neighbor> {
    if k == 0 {
        return Vec::new();
    }
    if hits.len() > k {
        hits.select_nth_unstable_by(k - 1, hit_order);
        hits.truncate(k);
    }
    hits.sort_by(hit_order);
    hits
}
