//! Vector-approximation file: per-dimension equi-width cells give lower and
//! upper distance bounds, so candidates can be pruned without losing exactness.

use std::path::Path;

use super::binio::{Reader, Writer};
use super::metric::Metric;
use super::table::{hit_order, top_k, KnnResult, Neighbor, VectorTable};
use crate::error::{Error, Result};

pub const VA_MAGIC: &[u8; 4] = b"VAFI";
pub const DEFAULT_VA_BITS: u8 = 6;

#[derive(Debug, Clone, PartialEq)]
pub struct VaIndex {
    bits: u8,
    dim: usize,
    /// Rows covered when built; a different table length means stale.
    rows: usize,
    /// `dim × (cells + 1)` boundaries, strictly increasing per dimension.
    boundaries: Vec<f64>,
    /// One cell index per row and dimension.
    cells: Vec<u8>,
}

impl VaIndex {
    pub fn build(table: &VectorTable, bits: u8) -> Result<Self> {
        if !(1..=8).contains(&bits) {
            return Err(Error::InvalidQuery(format!("va bits must be 1..=8, got {bits}")));
        }
        match table.metric() {
            Metric::L2 | Metric::L1 => {}
            other => return Err(Error::UnsupportedMetric(other.to_string())),
        }
        let dim = table.dim();
        let n_cells = 1usize << bits;
        let mut boundaries = Vec::with_capacity(dim * (n_cells + 1));
        for d in 0..dim {
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for i in 0..table.len() {
                let v = table.row(i)[d] as f64;
                lo = lo.min(v);
                hi = hi.max(v);
            }
            if table.is_empty() {
                (lo, hi) = (0.0, 1.0);
            }
            let width = if hi > lo { (hi - lo) / n_cells as f64 } else { 1.0 };
            boundaries.push(lo);
            for j in 1..n_cells {
                boundaries.push(lo + j as f64 * width);
            }
            boundaries.push(if hi > lo { hi } else { lo + n_cells as f64 });
        }
        let mut index = VaIndex { bits, dim, rows: table.len(), boundaries, cells: Vec::new() };
        index.cells.reserve(table.len() * dim);
        for i in 0..table.len() {
            for (d, &v) in table.row(i).iter().enumerate() {
                let cell = index.cell_of(d, v as f64);
                index.cells.push(cell);
            }
        }
        Ok(index)
    }

    pub fn bits(&self) -> u8 {
        self.bits
    }

    pub fn signature_bits(&self) -> usize {
        self.dim * self.bits as usize
    }

    fn n_cells(&self) -> usize {
        1 << self.bits
    }

    pub fn dim_boundaries(&self, d: usize) -> &[f64] {
        let stride = self.n_cells() + 1;
        &self.boundaries[d * stride..(d + 1) * stride]
    }

    /// Largest cell whose lower boundary is ≤ `v`, so `lo ≤ v ≤ hi` for indexed values.
    fn cell_of(&self, d: usize, v: f64) -> u8 {
        let b = self.dim_boundaries(d);
        let upper = b.partition_point(|&x| x <= v);
        upper.saturating_sub(1).min(self.n_cells() - 1) as u8
    }

    pub fn is_stale(&self, table: &VectorTable) -> bool {
        self.rows != table.len() || self.dim != table.dim()
    }

    /// Per-row lower and upper bounds on the distance to `query`.
    fn bounds(&self, metric: Metric, query: &[f64], row: usize) -> (f64, f64) {
        let cells = &self.cells[row * self.dim..(row + 1) * self.dim];
        let (mut lb, mut ub) = (0.0, 0.0);
        for (d, (&c, &q)) in cells.iter().zip(query).enumerate() {
            let b = self.dim_boundaries(d);
            let (lo, hi) = (b[c as usize], b[c as usize + 1]);
            let near = if q < lo { lo - q } else if q > hi { q - hi } else { 0.0 };
            let far = (q - lo).abs().max((hi - q).abs());
            match metric {
                Metric::L1 => {
                    lb += near;
                    ub += far;
                }
                _ => {
                    lb += near * near;
                    ub += far * far;
                }
            }
        }
        match metric {
            Metric::L1 => (lb, ub),
            _ => (lb.sqrt(), ub.sqrt()),
        }
    }

    /// Exact kNN: filter by bounds, then refine in lower-bound order.
    pub fn knn(&self, table: &VectorTable, query: &[f64], k: usize) -> Result<KnnResult> {
        if self.is_stale(table) {
            return Err(Error::IndexStale(table.category().to_string()));
        }
        if query.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, actual: query.len() });
        }
        let metric = table.metric();
        if k == 0 || table.is_empty() {
            return Ok(KnnResult::default());
        }
        let bounds: Vec<(f64, f64)> = (0..self.rows).map(|i| self.bounds(metric, query, i)).collect();
        // Phase 1: the k-th smallest upper bound caps the answer's distances.
        let mut ubs: Vec<f64> = bounds.iter().map(|b| b.1).collect();
        let kk = k.min(ubs.len());
        let (_, kth, _) = ubs.select_nth_unstable_by(kk - 1, f64::total_cmp);
        let cap = *kth;
        let mut candidates: Vec<usize> = (0..self.rows).filter(|&i| bounds[i].0 <= cap).collect();
        candidates.sort_by(|&a, &b| bounds[a].0.total_cmp(&bounds[b].0));

        // Phase 2: refine until the next lower bound exceeds the current k-th distance.
        let mut best: Vec<Neighbor> = Vec::with_capacity(kk + 1);
        let mut examined = 0;
        for i in candidates {
            if best.len() == kk && bounds[i].0 > best[kk - 1].distance {
                break;
            }
            examined += 1;
            let hit = Neighbor { row_id: table.ids()[i].clone(), distance: table.distance_to(query, i) };
            let pos = best.partition_point(|h| hit_order(h, &hit).is_lt());
            if pos < kk {
                best.insert(pos, hit);
                best.truncate(kk);
            }
        }
        Ok(KnnResult { hits: top_k(best, k), candidates_examined: examined })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = Writer::new(VA_MAGIC, 1);
        w.u8(self.bits);
        w.u32(self.dim as u32);
        w.u64(self.rows as u64);
        self.boundaries.iter().for_each(|&b| w.f64(b));
        w.bytes(&pack_cells(&self.cells, self.bits));
        w.commit(path)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path)?;
        let (mut r, version) = Reader::open(&bytes, VA_MAGIC, "va index")?;
        if version != 1 {
            return Err(Error::UnsupportedFormat(format!("va index version {version}")));
        }
        let bits = r.u8()?;
        if !(1..=8).contains(&bits) {
            return Err(Error::CorruptFile("va index: bits out of range".into()));
        }
        let dim = r.u32()? as usize;
        let rows = r.u64()? as usize;
        let n_bounds = dim * ((1usize << bits) + 1);
        let boundaries = (0..n_bounds).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
        let total = rows.checked_mul(dim).ok_or_else(|| Error::CorruptFile("va index: size overflow".into()))?;
        let packed = r.bytes((total * bits as usize).div_ceil(8))?;
        let cells = unpack_cells(packed, bits, total);
        r.finish()?;
        Ok(VaIndex { bits, dim, rows, boundaries, cells })
    }
}

/// Packs `bits`-wide cell indices LSB-first into bytes.
pub(crate) fn pack_cells(cells: &[u8], bits: u8) -> Vec<u8> {
    let mut out = vec![0u8; (cells.len() * bits as usize).div_ceil(8)];
    for (i, &c) in cells.iter().enumerate() {
        for b in 0..bits as usize {
            if c >> b & 1 == 1 {
                let pos = i * bits as usize + b;
                out[pos / 8] |= 1 << (pos % 8);
            }
        }
    }
    out
}

pub(crate) fn unpack_cells(packed: &[u8], bits: u8, count: usize) -> Vec<u8> {
    (0..count)
        .map(|i| {
            (0..bits as usize).fold(0u8, |acc, b| {
                let pos = i * bits as usize + b;
                acc | ((packed[pos / 8] >> (pos % 8)) & 1) << b
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn table(n: usize, dim: usize, metric: Metric, seed: u64) -> VectorTable {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut t = VectorTable::new("t", dim, metric);
        for i in 0..n {
            let v: Vec<f32> = (0..dim).map(|_| rng.random::<f32>() * 4.0 - 2.0).collect();
            t.insert(&format!("{i}"), &v).unwrap();
        }
        t
    }

    #[test]
    fn matches_exact_scan() {
        for metric in [Metric::L2, Metric::L1] {
            let t = table(1000, 64, metric, 5);
            let mut rng = ChaCha8Rng::seed_from_u64(6);
            for bits in [1, 6] {
                let va = VaIndex::build(&t, bits).unwrap();
                for _ in 0..20 {
                    let q: Vec<f64> = (0..64).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect();
                    let exact = t.knn_exact(&q, 10).unwrap();
                    let approx = va.knn(&t, &q, 10).unwrap();
                    assert_eq!(approx.hits, exact.hits);
                    assert!(approx.candidates_examined <= t.len());
                }
            }
        }
    }

    #[test]
    fn boundaries_strictly_increase() {
        let mut t = table(50, 4, Metric::L2, 1);
        t.insert("const", &[0.0; 4]).unwrap();
        let va = VaIndex::build(&t, 6).unwrap();
        for d in 0..4 {
            assert!(va.dim_boundaries(d).windows(2).all(|w| w[0] < w[1]));
        }
        assert_eq!(va.signature_bits(), 24);
        let mut flat = VectorTable::new("f", 2, Metric::L2);
        flat.insert("a", &[1.0, 1.0]).unwrap();
        let va = VaIndex::build(&flat, 3).unwrap();
        assert!(va.dim_boundaries(0).windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn stale_and_unsupported() {
        let mut t = table(10, 3, Metric::L2, 2);
        let va = VaIndex::build(&t, 6).unwrap();
        t.insert("new", &[0.0; 3]).unwrap();
        assert!(matches!(va.knn(&t, &[0.0; 3], 1), Err(Error::IndexStale(_))));
        let cos = VectorTable::new("c", 3, Metric::Cosine);
        assert!(matches!(VaIndex::build(&cos, 6), Err(Error::UnsupportedMetric(_))));
    }

    #[test]
    fn prunes_clustered_data() {
        let t = table(1000, 8, Metric::L2, 9);
        let va = VaIndex::build(&t, 6).unwrap();
        let q: Vec<f64> = t.get("17").unwrap().iter().map(|&v| v as f64).collect();
        let r = va.knn(&t, &q, 5).unwrap();
        assert_eq!(r.hits[0].row_id, "17");
        assert!(r.candidates_examined < 200, "{}", r.candidates_examined);
    }

    #[test]
    fn file_round_trip() {
        let t = table(77, 5, Metric::L1, 3);
        let va = VaIndex::build(&t, 5).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.va");
        va.write(&p).unwrap();
        assert_eq!(VaIndex::read(&p).unwrap(), va);
    }

    proptest! {
        #[test]
        fn packing_round_trips(cells in proptest::collection::vec(0u8..=255, 0..200), bits in 1u8..=8) {
            let cells: Vec<u8> = cells.into_iter().map(|c| if bits == 8 { c } else { c & ((1 << bits) - 1) }).collect();
            prop_assert_eq!(unpack_cells(&pack_cells(&cells, bits), bits, cells.len()), cells);
        }

        #[test]
        fn va_equals_exact(
            rows in proptest::collection::vec(proptest::collection::vec(-3.0f32..3.0, 6), 1..80),
            q in proptest::collection::vec(-4.0f64..4.0, 6),
            k in 1usize..12,
            bits in 1u8..=8,
            l1 in any::<bool>(),
        ) {
            let mut t = VectorTable::new("p", 6, if l1 { Metric::L1 } else { Metric::L2 });
            for (i, r) in rows.iter().enumerate() {
                t.insert(&format!("{i:03}"), r).unwrap();
            }
            let va = VaIndex::build(&t, bits).unwrap();
            prop_assert_eq!(va.knn(&t, &q, k).unwrap().hits, t.knn_exact(&q, k).unwrap().hits);
        }
    }
}
