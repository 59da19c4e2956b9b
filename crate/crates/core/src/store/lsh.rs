//! p-stable (Gaussian) locality-sensitive hashing for L2.

use std::collections::HashMap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::binio::{Reader, Writer};
use super::metric::Metric;
use super::table::{top_k, KnnResult, Neighbor, VectorTable};
use crate::error::{Error, Result};

pub const LSH_MAGIC: &[u8; 4] = b"LSHI";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LshParams {
    pub tables: usize,
    pub projections: usize,
    pub width: f64,
    pub seed: u64,
}

impl Default for LshParams {
    fn default() -> Self {
        LshParams { tables: 8, projections: 8, width: 4.0, seed: 42 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LshIndex {
    params: LshParams,
    dim: usize,
    rows: usize,
    /// Per table: `projections × dim` Gaussian directions.
    directions: Vec<Vec<f64>>,
    /// Per table: `projections` offsets in `[0, width)`.
    offsets: Vec<Vec<f64>>,
    buckets: Vec<HashMap<Vec<i32>, Vec<u32>>>,
}

impl LshIndex {
    /// Projections depend only on `(params, dim)`, so an index file can store the seed alone.
    fn empty(params: LshParams, dim: usize) -> Result<Self> {
        if params.tables == 0 || params.projections == 0 || !(params.width > 0.0) {
            return Err(Error::InvalidQuery(format!("invalid LSH parameters {params:?}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        let mut directions = Vec::with_capacity(params.tables);
        let mut offsets = Vec::with_capacity(params.tables);
        for _ in 0..params.tables {
            directions.push((0..params.projections * dim).map(|_| StandardNormal.sample(&mut rng)).collect());
            offsets.push((0..params.projections).map(|_| rng.random::<f64>() * params.width).collect());
        }
        Ok(LshIndex {
            params,
            dim,
            rows: 0,
            directions,
            offsets,
            buckets: vec![HashMap::new(); params.tables],
        })
    }

    pub fn build(table: &VectorTable, params: LshParams) -> Result<Self> {
        if table.metric() != Metric::L2 {
            return Err(Error::UnsupportedMetric(table.metric().to_string()));
        }
        let mut index = Self::empty(params, table.dim())?;
        for i in 0..table.len() {
            let v: Vec<f64> = table.row(i).iter().map(|&x| x as f64).collect();
            for t in 0..params.tables {
                let key = index.key(t, &v);
                index.buckets[t].entry(key).or_default().push(i as u32);
            }
        }
        index.rows = table.len();
        Ok(index)
    }

    pub fn params(&self) -> LshParams {
        self.params
    }

    /// `⌊(a·v + b) / w⌋` for each projection of table `t`.
    fn key(&self, t: usize, v: &[f64]) -> Vec<i32> {
        let w = self.params.width;
        self.directions[t]
            .chunks_exact(self.dim)
            .zip(&self.offsets[t])
            .map(|(a, b)| ((a.iter().zip(v).map(|(x, y)| x * y).sum::<f64>() + b) / w).floor() as i32)
            .collect()
    }

    pub fn is_stale(&self, table: &VectorTable) -> bool {
        self.rows != table.len() || self.dim != table.dim()
    }

    /// Rows sharing at least one bucket with `query`, ascending.
    pub fn candidates(&self, query: &[f64]) -> Vec<usize> {
        let mut rows: Vec<usize> = (0..self.params.tables)
            .filter_map(|t| self.buckets[t].get(&self.key(t, query)))
            .flatten()
            .map(|&r| r as usize)
            .collect();
        rows.sort_unstable();
        rows.dedup();
        rows
    }

    pub fn knn(&self, table: &VectorTable, query: &[f64], k: usize) -> Result<KnnResult> {
        if self.is_stale(table) {
            return Err(Error::IndexStale(table.category().to_string()));
        }
        if query.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, actual: query.len() });
        }
        let candidates = self.candidates(query);
        let hits = candidates
            .iter()
            .map(|&i| Neighbor { row_id: table.ids()[i].clone(), distance: table.distance_to(query, i) })
            .collect();
        Ok(KnnResult { hits: top_k(hits, k), candidates_examined: candidates.len() })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = Writer::new(LSH_MAGIC, 1);
        w.u32(self.params.tables as u32);
        w.u32(self.params.projections as u32);
        w.f64(self.params.width);
        w.u64(self.params.seed);
        w.u32(self.dim as u32);
        w.u64(self.rows as u64);
        for buckets in &self.buckets {
            let mut keys: Vec<&Vec<i32>> = buckets.keys().collect();
            keys.sort();
            w.u64(keys.len() as u64);
            for key in keys {
                key.iter().for_each(|&h| w.i32(h));
                let rows = &buckets[key];
                w.u32(rows.len() as u32);
                rows.iter().for_each(|&r| w.u32(r));
            }
        }
        w.commit(path)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path)?;
        let (mut r, version) = Reader::open(&bytes, LSH_MAGIC, "lsh index")?;
        if version != 1 {
            return Err(Error::UnsupportedFormat(format!("lsh index version {version}")));
        }
        let tables = r.u32()? as usize;
        let projections = r.u32()? as usize;
        let width = r.f64()?;
        let seed = r.u64()?;
        let dim = r.u32()? as usize;
        if tables > 1024 || projections > 1024 || dim.saturating_mul(projections) > 1 << 24 {
            return Err(Error::CorruptFile("lsh index: implausible parameters".into()));
        }
        let params = LshParams { tables, projections, width, seed };
        let mut index = Self::empty(params, dim).map_err(|e| Error::CorruptFile(format!("lsh index: {e}")))?;
        index.rows = r.u64()? as usize;
        for t in 0..tables {
            let n = r.count(projections * 4 + 4)?;
            for _ in 0..n {
                let key = (0..projections).map(|_| r.i32()).collect::<Result<Vec<_>>>()?;
                let len = r.u32()? as usize;
                let rows = (0..len).map(|_| r.u32()).collect::<Result<Vec<_>>>()?;
                if rows.iter().any(|&row| row as usize >= index.rows) {
                    return Err(Error::CorruptFile("lsh index: row out of range".into()));
                }
                index.buckets[t].insert(key, rows);
            }
        }
        r.finish()?;
        Ok(index)
    }
}
