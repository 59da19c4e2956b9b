//! Persistent vector tables, VA-file and LSH indexes, the fingerprint
//! inverted index and the object catalog.

mod binio;
mod catalog;
mod db;
mod fpindex;
mod lsh;
mod metric;
mod table;
mod va;

pub use catalog::{Catalog, CatalogEntry, ObjectRecord, OBJECT_SCHEMA, SEGMENT_SCHEMA};
pub use db::{Calibration, CodebookInfo, IndexState, Manifest, SearchStrategy, Store, TableStatus};
pub use fpindex::{FingerprintIndex, FingerprintMatch, FP_MAGIC, MIN_VOTES, OFFSET_BIN};
pub use lsh::{LshIndex, LshParams, LSH_MAGIC};
pub use metric::{distance, Metric, CHI_SQUARED_EPS};
pub use table::{KnnResult, Neighbor, VectorTable, TABLE_MAGIC, TABLE_VERSION};
pub use va::{VaIndex, DEFAULT_VA_BITS, VA_MAGIC};
