//! Store, fusion and metric properties checked against independent oracles.

use std::collections::BTreeMap;

use polyseek::eval::{evaluate, to_binary, NdcgParams};
use polyseek::features::{COLOR_GRID, HOG};
use polyseek::retrieval::{
    fuse, rank, Query, QueryTerm, RawScores, RefineRequest, Retriever, ScoreMap, TermScores, WeightOverrides,
    WeightedCategory,
};
use polyseek::store::{LshIndex, LshParams, Metric, Store, VaIndex, VectorTable, DEFAULT_VA_BITS};
use polyseek::synth::scene_image;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::common::Fixture;
use crate::Outcome;

fn brute_force(rows: &[(String, Vec<f64>)], q: &[f64], k: usize) -> Vec<(String, f64)> {
    let mut all: Vec<(String, f64)> = rows
        .iter()
        .map(|(id, v)| (id.clone(), v.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()))
        .collect();
    all.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then_with(|| a.0.cmp(&b.0)));
    all.truncate(k);
    all
}

pub fn store_exactness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut table = VectorTable::new("random", 64, Metric::L2);
    let mut rows = Vec::new();
    for i in 0..1000 {
        let v: Vec<f64> = (0..64).map(|_| rng.random_range(-1.0..1.0)).collect();
        table.insert_f64(&format!("r{i:04}"), &v).unwrap();
        // The table stores f32; the oracle sees the same rounded values.
        rows.push((format!("r{i:04}"), v.iter().map(|&x| x as f32 as f64).collect::<Vec<f64>>()));
    }
    let va = VaIndex::build(&table, DEFAULT_VA_BITS).unwrap();
    let k = 10;
    let (mut va_equal, mut oracle_equal, mut examined) = (0, 0, 0);
    for _ in 0..50 {
        let q: Vec<f64> = (0..64).map(|_| rng.random_range(-1.0..1.0)).collect();
        let exact = table.knn_exact(&q, k).unwrap();
        let approx = va.knn(&table, &q, k).unwrap();
        examined += approx.candidates_examined;
        if approx.hits == exact.hits {
            va_equal += 1;
        }
        let oracle = brute_force(&rows, &q, k);
        let same = oracle.len() == exact.hits.len()
            && oracle.iter().zip(&exact.hits).all(|(o, h)| o.0 == h.row_id && (o.1 - h.distance).abs() <= 1e-12 * o.1.max(1.0));
        if same {
            oracle_equal += 1;
        }
    }
    Outcome::check(
        va_equal == 50 && oracle_equal == 50,
        format!(
            "va==exact {va_equal}/50, exact==brute force {oracle_equal}/50, mean refined {:.0} of 1000 rows",
            examined as f64 / 50.0
        ),
    )
}

pub fn lsh_recall() -> Outcome {
    let dim = 64;
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let noise = Normal::new(0.0, 0.1).unwrap();
    let centers: Vec<Vec<f64>> =
        (0..10).map(|c| (0..dim).map(|d| if d == c { 10.0 / 2f64.sqrt() } else { 0.0 }).collect()).collect();
    let mut table = VectorTable::new("clusters", dim, Metric::L2);
    for (c, center) in centers.iter().enumerate() {
        for i in 0..100 {
            let v: Vec<f64> = center.iter().map(|x| x + noise.sample(&mut rng)).collect();
            table.insert_f64(&format!("{c}-{i:03}"), &v).unwrap();
        }
    }
    let params = LshParams::default();
    let index = LshIndex::build(&table, params).unwrap();
    let mut found = 0;
    for c in &centers {
        let exact = table.knn_exact(c, 10).unwrap();
        let approx = index.knn(&table, c, 10).unwrap();
        found += exact.hits.iter().filter(|h| approx.hits.iter().any(|a| a.row_id == h.row_id)).count();
    }
    let recall = found as f64 / 100.0;
    Outcome::check(
        recall >= 0.8,
        format!(
            "recall@10 {recall:.2} (need 0.80) with L={} k={} w={} seed={}",
            params.tables, params.projections, params.width, params.seed
        ),
    )
}

fn term(cats: &[(&str, f64)], scores: &[(&str, &[(&str, f64)])]) -> TermScores {
    TermScores {
        categories: cats.iter().map(|(c, w)| WeightedCategory { category: c.to_string(), weight: *w }).collect(),
        scores: scores
            .iter()
            .map(|(c, m)| (c.to_string(), m.iter().map(|(s, v)| (s.to_string(), *v)).collect::<ScoreMap>()))
            .collect(),
    }
}

fn fused_score(raw: &RawScores, seg: &str) -> f64 {
    fuse(raw, &WeightOverrides::new()).get(seg).map_or(0.0, |v| v.0)
}

/// Failures found, each described; empty means the property held.
fn hand_built_fusion() -> Vec<String> {
    let mut bad = Vec::new();
    // OR = max.
    let a = term(&[("x", 1.0)], &[("x", &[("s", 0.9)])]);
    let b = term(&[("x", 1.0)], &[("x", &[("s", 0.2)])]);
    let or = RawScores { components: vec![vec![a.clone()], vec![b.clone()]] };
    if fused_score(&or, "s") != 0.9 {
        bad.push("OR max".into());
    }
    // AND = mean of the term scores.
    let img = term(&[("x", 1.0)], &[("x", &[("s", 0.6)])]);
    let aud = term(&[("y", 1.0)], &[("y", &[("s", 0.8)])]);
    let and = RawScores { components: vec![vec![img, aud]] };
    if fused_score(&and, "s") != (0.6 + 0.8) / 2.0 {
        bad.push("AND mean".into());
    }
    // Weighted mean with an absent category; dyadic values keep arithmetic exact.
    let t = term(&[("x", 1.0), ("y", 0.5), ("z", 0.25)], &[("x", &[("s", 0.75)]), ("y", &[("s", 0.5)]), ("z", &[])]);
    let expected = (1.0 * 0.75 + 0.5 * 0.5 + 0.25 * 0.0) / (1.0 + 0.5 + 0.25);
    if fused_score(&RawScores { components: vec![vec![t]] }, "s") != expected {
        bad.push("weighted mean".into());
    }
    // Two categories 0.8 and absent, equal weights.
    let t = term(&[("x", 1.0), ("y", 1.0)], &[("x", &[("s", 0.8)]), ("y", &[])]);
    if fused_score(&RawScores { components: vec![vec![t]] }, "s") != 0.4 {
        bad.push("absent as zero".into());
    }

    // OR monotonicity on random score maps.
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let random_term = |rng: &mut ChaCha8Rng| {
        let cats = ["p", "q", "r"];
        let n = rng.random_range(1..=3);
        TermScores {
            categories: cats[..n]
                .iter()
                .map(|c| WeightedCategory { category: c.to_string(), weight: rng.random_range(0.05..1.0) })
                .collect(),
            scores: cats[..n]
                .iter()
                .map(|c| {
                    let mut m = ScoreMap::new();
                    for s in 0..20 {
                        if rng.random_bool(0.6) {
                            m.insert(format!("s{s:02}"), rng.random_range(0.0..1.0));
                        }
                    }
                    (c.to_string(), m)
                })
                .collect(),
        }
    };
    for case in 0..200 {
        let comps: Vec<Vec<TermScores>> =
            (0..rng.random_range(1..4)).map(|_| (0..rng.random_range(1..3)).map(|_| random_term(&mut rng)).collect()).collect();
        let before = RawScores { components: comps.clone() };
        let mut more = comps;
        more.push(vec![random_term(&mut rng)]);
        let after = RawScores { components: more };
        let (fb, fa) = (fuse(&before, &WeightOverrides::new()), fuse(&after, &WeightOverrides::new()));
        if fb.iter().any(|(s, v)| fa.get(s).map_or(0.0, |x| x.0) < v.0) {
            bad.push(format!("OR monotonicity case {case}"));
        }
        let ranked = rank(fa, 100, None, |s| Some((s.to_string(), polyseek::media::MediaType::Image)));
        if ranked.windows(2).any(|w| w[0].score < w[1].score || (w[0].score == w[1].score && w[0].segment_id > w[1].segment_id)) {
            bad.push(format!("ordering case {case}"));
        }
    }
    bad
}

fn engine_fusion() -> Vec<String> {
    let mut bad = Vec::new();
    let mut fx = Fixture::new();
    fx.add_images(&(0..15).map(scene_image).collect::<Vec<_>>());
    let query = Query::single(QueryTerm::image(scene_image(40)).with_categories(&[(COLOR_GRID, 1.0), (HOG, 1.0)]));
    let r = Retriever::new(&fx.config);
    let out = r.execute(&fx.store, &query, |_| {}).unwrap();

    if r.refine(&fx.store, &out.session_id, &RefineRequest::default()).unwrap().results != out.results {
        bad.push("refine with unchanged weights".into());
    }
    let current = RefineRequest {
        weights: BTreeMap::from([(COLOR_GRID.to_string(), 1.0), (HOG.to_string(), 1.0)]),
        media_filter: None,
    };
    if r.refine(&fx.store, &out.session_id, &current).unwrap().results != out.results {
        bad.push("refine with current weights".into());
    }

    // {A:1,B:0} then {A:0,B:1} against the single-category rankings of the cached maps.
    let raw = r.session_scores(&out.session_id).unwrap();
    for (on, off) in [(COLOR_GRID, HOG), (HOG, COLOR_GRID)] {
        let req = RefineRequest {
            weights: BTreeMap::from([(on.to_string(), 1.0), (off.to_string(), 0.0)]),
            media_filter: None,
        };
        let got: Vec<(String, f64)> =
            r.refine(&fx.store, &out.session_id, &req).unwrap().results.into_iter().map(|x| (x.segment_id, x.score)).collect();
        let mut expected: Vec<(String, f64)> =
            raw.components[0][0].scores[on].iter().filter(|(_, &v)| v > 0.0).map(|(s, &v)| (s.clone(), v)).collect();
        expected.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        if got != expected {
            bad.push(format!("single-category refine on {on}"));
        }
    }

    // Reruns, with a fresh engine and a reopened store, give identical lists.
    let again = Retriever::new(&fx.config).execute(&fx.store, &query, |_| {}).unwrap();
    let reopened = Store::open(&fx.config.data_dir).unwrap();
    let third = Retriever::new(&fx.config).execute(&reopened, &query, |_| {}).unwrap();
    if again.results != out.results || third.results != out.results {
        bad.push("determinism".into());
    }
    bad
}

pub fn fusion_semantics() -> Outcome {
    let mut bad = hand_built_fusion();
    bad.extend(engine_fusion());
    Outcome::check(
        bad.is_empty(),
        if bad.is_empty() {
            "OR max, AND mean, weighted mean, 200 OR-monotonicity cases, refine idempotence and determinism all exact".into()
        } else {
            format!("violations: {}", bad.join("; "))
        },
    )
}

/// Spreadsheet-style recomputation: one column per quantity, no shared helpers.
fn oracle_metrics(ratings: &[u8]) -> [f64; 4] {
    let k = 15;
    let r: Vec<u8> = (0..k).map(|i| ratings.get(i).copied().unwrap_or(0)).collect();
    let hit: Vec<f64> = r.iter().map(|&x| if x == 2 || x == 3 { 1.0 } else { 0.0 }).collect();
    let p = hit.iter().sum::<f64>() / 15.0;
    let mut mrr = 0.0;
    for (i, h) in hit.iter().enumerate() {
        if *h == 1.0 {
            mrr = 1.0 / (i as f64 + 1.0);
            break;
        }
    }
    let mut cumulative = vec![0.0; k];
    let mut running = 0.0;
    for i in 0..k {
        running += hit[i];
        cumulative[i] = running / (i as f64 + 1.0);
    }
    let total_hits: f64 = hit.iter().sum();
    let ap = if total_hits == 0.0 { 0.0 } else { (0..k).map(|i| cumulative[i] * hit[i]).sum::<f64>() / total_hits };
    let discount = |i: usize| (i as f64 + 2.0).ln() / 2f64.ln();
    let dcg: f64 = (0..k).map(|i| r[i] as f64 / discount(i)).sum();
    let mut sorted = r.clone();
    sorted.sort();
    sorted.reverse();
    let idcg: f64 = (0..k).map(|i| sorted[i] as f64 / discount(i)).sum();
    let ndcg = if idcg > 0.0 { dcg / idcg } else { 0.0 };
    [p, mrr, ap, ndcg]
}

pub fn metric_correctness() -> Outcome {
    let binary_ok = to_binary(&[3, 2, 1, 0]).unwrap() == vec![1, 1, 0, 0];
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let len = rng.random_range(0..=25);
        let ratings: Vec<u8> = (0..len).map(|_| rng.random_range(0..=3)).collect();
        let m = evaluate(&ratings, 15, NdcgParams::default()).unwrap();
        let o = oracle_metrics(&ratings);
        for (got, want) in [m.precision, m.reciprocal_rank, m.average_precision, m.ndcg].iter().zip(o) {
            worst = worst.max((got - want).abs());
        }
    }
    Outcome::check(
        binary_ok && worst <= 1e-9,
        format!("binary mapping [3,2,1,0]->[1,1,0,0] {binary_ok}, max deviation over 1000 lists {worst:.1e} (tolerance 1e-9)"),
    )
}
