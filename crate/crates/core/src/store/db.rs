//! A data directory holding the catalog, per-category tables, their indexes,
//! the fingerprint index, codebooks and calibration constants.
//!
//! ```text
//! <dir>/objects.cat, segments.cat
//! <dir>/tables/<category>.vtrs (+ .va, .lsh)
//! <dir>/codebooks/<category>.codebook
//! <dir>/fingerprint.fp
//! <dir>/manifest.json
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::catalog::Catalog;
use super::fpindex::FingerprintIndex;
use super::lsh::{LshIndex, LshParams};
use super::metric::Metric;
use super::table::{KnnResult, VectorTable};
use super::va::{VaIndex, DEFAULT_VA_BITS};
use crate::error::{Error, Result};
use crate::features::audio::FingerprintHash;
use crate::features::image::Codebook;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchStrategy {
    Exact,
    Va,
    Lsh,
    /// VA when a fresh index exists, otherwise a full scan.
    #[default]
    Auto,
}

impl SearchStrategy {
    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "exact" => Some(SearchStrategy::Exact),
            "va" => Some(SearchStrategy::Va),
            "lsh" => Some(SearchStrategy::Lsh),
            "auto" => Some(SearchStrategy::Auto),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IndexState {
    Missing,
    Stale,
    Fresh,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableStatus {
    pub category: String,
    pub dim: usize,
    pub rows: usize,
    pub metric: Metric,
    pub va: IndexState,
    pub lsh: IndexState,
}

/// Scale of the distance-to-similarity mapping for one category.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub d_max: f64,
    pub pairs: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodebookInfo {
    pub k: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    #[serde(default)]
    pub codebooks: BTreeMap<String, CodebookInfo>,
    #[serde(default)]
    pub calibration: BTreeMap<String, Calibration>,
}

#[derive(Debug)]
pub struct Store {
    dir: PathBuf,
    catalog: Catalog,
    tables: BTreeMap<String, VectorTable>,
    va: BTreeMap<String, VaIndex>,
    lsh: BTreeMap<String, LshIndex>,
    fingerprints: FingerprintIndex,
    codebooks: BTreeMap<String, Codebook>,
    manifest: Manifest,
    dirty_tables: BTreeSet<String>,
    dirty_codebooks: BTreeSet<String>,
    dirty_meta: bool,
}

fn is_category_name(name: &str) -> bool {
    !name.is_empty() && name.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_' || b == b'-')
}

impl Store {
    /// Opens (creating if needed) the store rooted at `dir`.
    pub fn open(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir.join("tables"))?;
        std::fs::create_dir_all(dir.join("codebooks"))?;
        let mut store = Store {
            dir: dir.to_path_buf(),
            catalog: Catalog::read(dir)?,
            tables: BTreeMap::new(),
            va: BTreeMap::new(),
            lsh: BTreeMap::new(),
            fingerprints: FingerprintIndex::new(),
            codebooks: BTreeMap::new(),
            manifest: Manifest::default(),
            dirty_tables: BTreeSet::new(),
            dirty_codebooks: BTreeSet::new(),
            dirty_meta: false,
        };
        let manifest = dir.join("manifest.json");
        if manifest.exists() {
            store.manifest = serde_json::from_slice(&std::fs::read(&manifest)?)
                .map_err(|e| Error::CorruptFile(format!("manifest.json: {e}")))?;
        }
        let fp = dir.join("fingerprint.fp");
        if fp.exists() {
            store.fingerprints = FingerprintIndex::read(&fp)?;
        }
        for entry in std::fs::read_dir(dir.join("tables"))? {
            let path = entry?.path();
            if path.extension().and_then(|e| e.to_str()) != Some("vtrs") {
                continue;
            }
            let table = VectorTable::read(&path)?;
            let name = table.category().to_string();
            if path.with_extension("va").exists() {
                store.va.insert(name.clone(), VaIndex::read(&path.with_extension("va"))?);
            }
            if path.with_extension("lsh").exists() {
                store.lsh.insert(name.clone(), LshIndex::read(&path.with_extension("lsh"))?);
            }
            store.tables.insert(name, table);
        }
        for entry in std::fs::read_dir(dir.join("codebooks"))? {
            let path = entry?.path();
            if path.extension().and_then(|e| e.to_str()) != Some("codebook") {
                continue;
            }
            let table = VectorTable::read(&path)?;
            let centroids = table.rows().map(|(_, v)| v.iter().map(|&x| x as f64).collect()).collect();
            let category = table.category().to_string();
            store.codebooks.insert(category.clone(), Codebook { category, centroids });
        }
        Ok(store)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn catalog(&self) -> &Catalog {
        &self.catalog
    }

    pub fn catalog_mut(&mut self) -> &mut Catalog {
        self.dirty_meta = true;
        &mut self.catalog
    }

    pub fn manifest(&self) -> &Manifest {
        &self.manifest
    }

    pub fn categories(&self) -> impl Iterator<Item = &str> {
        self.tables.keys().map(String::as_str)
    }

    pub fn table(&self, category: &str) -> Option<&VectorTable> {
        self.tables.get(category)
    }

    fn table_path(&self, category: &str, ext: &str) -> PathBuf {
        self.dir.join("tables").join(format!("{category}.{ext}"))
    }

    /// Appends a row, creating the table on first use.
    pub fn insert_vector(&mut self, category: &str, metric: Metric, row_id: &str, values: &[f64]) -> Result<()> {
        if !is_category_name(category) {
            return Err(Error::UnknownCategory(category.to_string()));
        }
        let table = self
            .tables
            .entry(category.to_string())
            .or_insert_with(|| VectorTable::new(category, values.len(), metric));
        if table.metric() != metric {
            return Err(Error::UnsupportedMetric(format!("{metric} for table {category} ({})", table.metric())));
        }
        table.insert_f64(row_id, values)?;
        self.dirty_tables.insert(category.to_string());
        Ok(())
    }

    pub fn fingerprints(&self) -> &FingerprintIndex {
        &self.fingerprints
    }

    pub fn insert_fingerprints(&mut self, segment_id: &str, hashes: &[FingerprintHash]) -> Result<()> {
        self.fingerprints.insert(segment_id, hashes)?;
        self.dirty_meta = true;
        Ok(())
    }

    pub fn codebook(&self, category: &str) -> Option<&Codebook> {
        self.codebooks.get(category)
    }

    /// Stores a codebook. Centroids are rounded to f32 so the in-memory copy
    /// equals what a reopened store will read.
    pub fn set_codebook(&mut self, mut codebook: Codebook, seed: u64) -> Result<()> {
        if !is_category_name(&codebook.category) {
            return Err(Error::UnknownCategory(codebook.category));
        }
        for c in &mut codebook.centroids {
            c.iter_mut().for_each(|v| *v = *v as f32 as f64);
        }
        let category = codebook.category.clone();
        self.manifest.codebooks.insert(category.clone(), CodebookInfo { k: codebook.k(), seed });
        self.codebooks.insert(category.clone(), codebook);
        self.dirty_codebooks.insert(category);
        self.dirty_meta = true;
        Ok(())
    }

    pub fn calibration(&self, category: &str) -> Option<Calibration> {
        self.manifest.calibration.get(category).copied()
    }

    pub fn set_calibration(&mut self, category: &str, calibration: Calibration) {
        self.manifest.calibration.insert(category.to_string(), calibration);
        self.dirty_meta = true;
    }

    pub fn status(&self) -> Vec<TableStatus> {
        let state = |fresh: Option<bool>| match fresh {
            None => IndexState::Missing,
            Some(true) => IndexState::Fresh,
            Some(false) => IndexState::Stale,
        };
        self.tables
            .values()
            .map(|t| TableStatus {
                category: t.category().to_string(),
                dim: t.dim(),
                rows: t.len(),
                metric: t.metric(),
                va: state(self.va.get(t.category()).map(|i| !i.is_stale(t))),
                lsh: state(self.lsh.get(t.category()).map(|i| !i.is_stale(t))),
            })
            .collect()
    }

    /// Rebuilds VA indexes (L2/L1 tables) and LSH indexes (L2 tables), and writes them.
    pub fn build_indexes(&mut self, va_bits: u8, lsh: LshParams) -> Result<Vec<TableStatus>> {
        self.flush()?;
        for (name, table) in &self.tables {
            if matches!(table.metric(), Metric::L2 | Metric::L1) {
                let va = VaIndex::build(table, va_bits)?;
                va.write(&self.table_path(name, "va"))?;
                self.va.insert(name.clone(), va);
            }
            if table.metric() == Metric::L2 {
                let index = LshIndex::build(table, lsh)?;
                index.write(&self.table_path(name, "lsh"))?;
                self.lsh.insert(name.clone(), index);
            }
        }
        Ok(self.status())
    }

    pub fn build_default_indexes(&mut self) -> Result<Vec<TableStatus>> {
        self.build_indexes(DEFAULT_VA_BITS, LshParams::default())
    }

    pub fn knn(&self, category: &str, query: &[f64], k: usize, strategy: SearchStrategy) -> Result<KnnResult> {
        let table = self.table(category).ok_or_else(|| Error::UnknownCategory(category.to_string()))?;
        let stale = || Error::IndexStale(category.to_string());
        match strategy {
            SearchStrategy::Exact => table.knn_exact(query, k),
            SearchStrategy::Va => self.va.get(category).ok_or_else(stale)?.knn(table, query, k),
            SearchStrategy::Lsh => self.lsh.get(category).ok_or_else(stale)?.knn(table, query, k),
            SearchStrategy::Auto => match self.va.get(category) {
                Some(va) if !va.is_stale(table) => va.knn(table, query, k),
                _ => table.knn_exact(query, k),
            },
        }
    }

    /// Writes every modified table, codebook and the catalog/manifest/fingerprints.
    pub fn flush(&mut self) -> Result<()> {
        for name in std::mem::take(&mut self.dirty_tables) {
            self.tables[&name].write(&self.table_path(&name, "vtrs"))?;
        }
        for name in std::mem::take(&mut self.dirty_codebooks) {
            let cb = &self.codebooks[&name];
            let mut table = VectorTable::new(&name, cb.dim(), Metric::L2);
            for (i, c) in cb.centroids.iter().enumerate() {
                table.insert_f64(&i.to_string(), c)?;
            }
            table.write(&self.dir.join("codebooks").join(format!("{name}.codebook")))?;
        }
        if self.dirty_meta {
            self.catalog.write(&self.dir)?;
            self.fingerprints.write(&self.dir.join("fingerprint.fp"))?;
            let json = serde_json::to_vec_pretty(&self.manifest).expect("manifest serializes");
            let tmp = self.dir.join("manifest.json.tmp");
            std::fs::write(&tmp, json)?;
            std::fs::rename(tmp, self.dir.join("manifest.json"))?;
            self.dirty_meta = false;
        }
        Ok(())
    }
}
