//! Rank-quality metrics over the four-point relevance scale.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_RATING: u8 = 3;
/// Ratings at or above this count as hits.
pub const HIT_RATING: u8 = 2;
pub const DEFAULT_CUTOFF: usize = 15;

pub fn check_ratings(ratings: &[u8]) -> Result<()> {
    match ratings.iter().find(|&&r| r > MAX_RATING) {
        Some(&r) => Err(Error::InvalidRating(r)),
        None => Ok(()),
    }
}

pub fn to_binary(ratings: &[u8]) -> Result<Vec<u8>> {
    check_ratings(ratings)?;
    Ok(ratings.iter().map(|&r| u8::from(r >= HIT_RATING)).collect())
}

/// Hits in the first `k` positions over `k`; missing positions count as misses.
pub fn precision_at_k(hits: &[u8], k: usize) -> f64 {
    if k == 0 {
        return 0.0;
    }
    hits.iter().take(k).filter(|&&h| h > 0).count() as f64 / k as f64
}

pub fn reciprocal_rank(hits: &[u8]) -> f64 {
    hits.iter().position(|&h| h > 0).map_or(0.0, |i| 1.0 / (i + 1) as f64)
}

/// Mean of precision@i over the hit positions i.
pub fn average_precision(hits: &[u8]) -> f64 {
    let mut found = 0usize;
    let mut sum = 0.0;
    for (i, _) in hits.iter().enumerate().filter(|(_, &h)| h > 0) {
        found += 1;
        sum += found as f64 / (i + 1) as f64;
    }
    if found == 0 { 0.0 } else { sum / found as f64 }
}

/// Gain applied to a rating in DCG.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gain {
    #[default]
    Linear,
    /// 2^rating − 1.
    Exponential,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NdcgParams {
    pub gain: Gain,
    pub log_base: f64,
}

impl Default for NdcgParams {
    fn default() -> Self {
        NdcgParams { gain: Gain::Linear, log_base: 2.0 }
    }
}

fn dcg(ratings: &[u8], k: usize, p: NdcgParams) -> f64 {
    ratings
        .iter()
        .take(k)
        .enumerate()
        .map(|(i, &r)| {
            let g = match p.gain {
                Gain::Linear => r as f64,
                Gain::Exponential => 2f64.powi(r as i32) - 1.0,
            };
            g / ((i + 2) as f64).log(p.log_base)
        })
        .sum()
}

/// DCG@k over the ideal DCG@k; 0 when every rating is 0.
pub fn ndcg_at_k(ratings: &[u8], k: usize, params: NdcgParams) -> Result<f64> {
    check_ratings(ratings)?;
    let mut ideal = ratings.to_vec();
    ideal.sort_unstable_by(|a, b| b.cmp(a));
    let idcg = dcg(&ideal, k, params);
    Ok(if idcg == 0.0 { 0.0 } else { dcg(ratings, k, params) / idcg })
}

/// All metrics of one rated result list.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub precision: f64,
    pub reciprocal_rank: f64,
    pub average_precision: f64,
    pub ndcg: f64,
    pub success: bool,
}

/// Evaluates the first `k` ratings, padding short lists with zeros.
pub fn evaluate(ratings: &[u8], k: usize, params: NdcgParams) -> Result<Metrics> {
    check_ratings(ratings)?;
    let mut top: Vec<u8> = ratings.iter().copied().take(k).collect();
    top.resize(k, 0);
    let hits = to_binary(&top)?;
    Ok(Metrics {
        precision: precision_at_k(&hits, k),
        reciprocal_rank: reciprocal_rank(&hits),
        average_precision: average_precision(&hits),
        ndcg: ndcg_at_k(&top, k, params)?,
        success: top.contains(&MAX_RATING),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const LIN: NdcgParams = NdcgParams { gain: Gain::Linear, log_base: 2.0 };

    #[test]
    fn binary_mapping() {
        assert_eq!(to_binary(&[3, 2, 1, 0]).unwrap(), vec![1, 1, 0, 0]);
        assert_eq!(to_binary(&[0; 5]).unwrap(), vec![0; 5]);
        assert_eq!(to_binary(&[3; 5]).unwrap(), vec![1; 5]);
        assert!(matches!(to_binary(&[1, 4]), Err(Error::InvalidRating(4))));
    }

    #[test]
    fn single_leading_hit() {
        let mut hits = vec![0u8; 15];
        hits[0] = 1;
        assert!((precision_at_k(&hits, 15) - 1.0 / 15.0).abs() < 1e-12);
        assert_eq!(reciprocal_rank(&hits), 1.0);
        assert_eq!(average_precision(&hits), 1.0);
    }

    #[test]
    fn no_hits() {
        let hits = [0u8; 15];
        assert_eq!((precision_at_k(&hits, 15), reciprocal_rank(&hits), average_precision(&hits)), (0.0, 0.0, 0.0));
    }

    #[test]
    fn average_precision_by_hand() {
        assert!((average_precision(&[0, 1, 0, 1]) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn ndcg_examples() {
        assert_eq!(ndcg_at_k(&[3, 3, 2, 1, 0], 15, LIN).unwrap(), 1.0);
        assert_eq!(ndcg_at_k(&[0; 15], 15, LIN).unwrap(), 0.0);
        let v = ndcg_at_k(&[0, 3], 2, LIN).unwrap();
        assert!((v - 1.0 / 3f64.log2()).abs() < 1e-12);
        assert!((v - 0.6309).abs() < 1e-4);
    }

    #[test]
    fn short_lists_are_padded() {
        let m = evaluate(&[3], 15, LIN).unwrap();
        assert!((m.precision - 1.0 / 15.0).abs() < 1e-12);
        assert!(m.success);
        assert!(!evaluate(&[2, 2], 15, LIN).unwrap().success);
    }

    /// Raising a later rating can lower AP and NDCG under their standard
    /// definitions, so monotonicity is only asserted for p@k and MRR.
    #[test]
    fn ap_and_ndcg_are_not_monotone() {
        assert!(average_precision(&[1, 0, 1]) < average_precision(&[1, 0, 0]));
        assert!(ndcg_at_k(&[3, 0, 1], 3, LIN).unwrap() < ndcg_at_k(&[3, 0, 0], 3, LIN).unwrap());
    }

    fn ratings() -> impl Strategy<Value = Vec<u8>> {
        prop::collection::vec(0u8..=3, 0..25)
    }

    proptest! {
        #[test]
        fn metrics_stay_in_unit_interval(r in ratings()) {
            let m = evaluate(&r, 15, LIN).unwrap();
            for v in [m.precision, m.reciprocal_rank, m.average_precision, m.ndcg] {
                prop_assert!((0.0..=1.0 + 1e-12).contains(&v));
            }
        }

        #[test]
        fn ndcg_ignores_swaps_of_equal_ratings(r in prop::collection::vec(0u8..=3, 2..20), i in 0usize..20, j in 0usize..20) {
            let (i, j) = (i % r.len(), j % r.len());
            let mut tied = r.clone();
            tied[j] = tied[i];
            let mut swapped = tied.clone();
            swapped.swap(i, j);
            prop_assert_eq!(ndcg_at_k(&tied, 15, LIN).unwrap(), ndcg_at_k(&swapped, 15, LIN).unwrap());
        }

        #[test]
        fn raising_a_rating_never_lowers_precision_or_rr(r in prop::collection::vec(0u8..=3, 1..20), i in 0usize..20) {
            let i = i % r.len();
            let mut up = r.clone();
            up[i] = (up[i] + 1).min(MAX_RATING);
            let (a, b) = (evaluate(&r, 15, LIN).unwrap(), evaluate(&up, 15, LIN).unwrap());
            prop_assert!(b.precision >= a.precision);
            prop_assert!(b.reciprocal_rank >= a.reciprocal_rank);
            prop_assert!(b.success >= a.success);
        }
    }
}
