//! Planted-ground-truth retrieval scenarios over synthetic corpora.

use polyseek::features::audio::AudioQueryCategory;
use polyseek::features::{CENS_SHINGLE, SPHERICAL_HARMONICS};
use polyseek::features::shape::{normalize_mesh, sh_descriptor};
use polyseek::retrieval::{aggregate_objects, Query, QueryTerm, Retriever, ScoredResult};
use polyseek::synth::{
    add_noise, gaussian_blur, hue_shift, melody, outline_sketch, random_rotation, render_melody, scene_image,
    tonal_track, ShapeClass, Sketch, Timbre,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::common::Fixture;
use crate::Outcome;

/// Hue rotation used for the altered copies, in degrees.
pub const HUE_SHIFT: f64 = 20.0;

fn run(fx: &Fixture, r: &Retriever, term: QueryTerm) -> Vec<ScoredResult> {
    r.execute(&fx.store, &Query::single(term), |_| {}).expect("query runs").results
}

fn top_object(results: &[ScoredResult]) -> Option<&str> {
    results.first().map(|x| x.object_id.as_str())
}

pub fn fingerprint_excerpts() -> Outcome {
    let mut fx = Fixture::new();
    let tracks: Vec<_> = (0..20).map(|i| tonal_track(1000 + i, 12.0)).collect();
    let ids = fx.add_audio(&tracks);
    let r = Retriever::new(&fx.config);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut clean, mut noisy) = (0, 0);
    let mut misses = Vec::new();
    let len = 3 * 22050;
    for (i, track) in tracks.iter().enumerate() {
        let start = rng.random_range(0..track.len() - len);
        let excerpt = track.slice(start, start + len);
        let hit = |audio| top_object(&run(&fx, &r, QueryTerm::audio(audio, AudioQueryCategory::Fingerprint))) == Some(ids[i].as_str());
        if hit(excerpt.clone()) {
            clean += 1;
        } else {
            misses.push(format!("clean#{i}"));
        }
        if hit(add_noise(&excerpt, 20.0, 500 + i as u64)) {
            noisy += 1;
        } else {
            misses.push(format!("noisy#{i}"));
        }
    }
    Outcome::check(
        clean == 20 && noisy >= 18,
        format!("rank-1 clean {clean}/20 (need 20), 20 dB SNR {noisy}/20 (need 18) {misses:?}"),
    )
}

pub fn melody_matching() -> Outcome {
    let mut fx = Fixture::new();
    let notes: Vec<_> = (0..10).map(|i| melody(200 + i, 12.0)).collect();
    let sine: Vec<_> = notes.iter().map(|n| render_melody(n, Timbre::Sine)).collect();
    let square: Vec<_> = notes.iter().map(|n| render_melody(n, Timbre::Square)).collect();
    let sine_ids = fx.add_audio(&sine);
    let square_ids = fx.add_audio(&square);
    let r = Retriever::new(&fx.config);
    let mut found = 0;
    let mut ranks = Vec::new();
    for (i, q) in sine.iter().enumerate() {
        let term = QueryTerm::audio(q.clone(), AudioQueryCategory::Matching).with_categories(&[(CENS_SHINGLE, 1.0)]);
        let objects = aggregate_objects(&run(&fx, &r, term));
        let rank = objects.iter().position(|o| o.object_id == square_ids[i]).map(|p| p + 1);
        debug_assert!(objects.iter().any(|o| o.object_id == sine_ids[i]));
        if rank.is_some_and(|k| k <= 3) {
            found += 1;
        }
        ranks.push(rank.map_or("-".to_string(), |k| k.to_string()));
    }
    Outcome::check(found >= 8, format!("other timbre in top 3: {found}/10 (need 8), ranks [{}]", ranks.join(",")))
}

pub fn near_duplicates() -> Outcome {
    let mut fx = Fixture::with_config(|_| {});
    let images: Vec<_> = (0..200).map(scene_image).collect();
    let segs = fx.add_images(&images);
    let r = Retriever::new(&fx.config);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut blurred, mut shifted) = (0, 0);
    for _ in 0..20 {
        let i = rng.random_range(0..images.len());
        let first = |img| run(&fx, &r, QueryTerm::image(img)).first().map(|x| x.segment_id.clone());
        if first(gaussian_blur(&images[i], 2.0)).as_ref() == Some(&segs[i]) {
            blurred += 1;
        }
        if first(hue_shift(&images[i], HUE_SHIFT)).as_ref() == Some(&segs[i]) {
            shifted += 1;
        }
    }
    Outcome::check(
        blurred >= 18 && shifted >= 18,
        format!("rank-1 blurred(σ=2) {blurred}/20, hue-shifted({HUE_SHIFT}°) {shifted}/20 (need 18 each)"),
    )
}

fn shape_corpus(fx: &mut Fixture) -> Vec<(ShapeClass, usize, String)> {
    let mut meshes = Vec::new();
    let mut keys = Vec::new();
    for class in ShapeClass::ALL {
        for v in 0..5 {
            meshes.push((format!("{}_{v}", class.name()), class.instance(v)));
            keys.push((class, v));
        }
    }
    let segs = fx.add_meshes(&meshes);
    keys.into_iter().zip(segs).map(|((c, v), s)| (c, v, s)).collect()
}

fn relative_difference(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    diff / a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn shape_by_example() -> Outcome {
    let mut fx = Fixture::new();
    let corpus = shape_corpus(&mut fx);
    let r = Retriever::new(&fx.config);
    let mut hits = 0;
    let mut worst: f64 = 0.0;
    for (t, (class, v, seg)) in corpus.iter().enumerate() {
        let mesh = class.instance(*v);
        let turned = random_rotation(&mesh, 900 + t as u64);
        let base = sh_descriptor(&normalize_mesh(&mesh).unwrap()).unwrap();
        let rotated = sh_descriptor(&normalize_mesh(&turned).unwrap()).unwrap();
        worst = worst.max(relative_difference(&base, &rotated));
        let results = run(&fx, &r, QueryTerm::mesh(turned).with_categories(&[(SPHERICAL_HARMONICS, 1.0)]));
        if results.first().map(|x| &x.segment_id) == Some(seg) {
            hits += 1;
        }
    }
    Outcome::check(
        hits == 30 && worst <= 0.05,
        format!("rank-1 {hits}/30 (need 30), max relative descriptor change {worst:.4} (tolerance 0.05)"),
    )
}

pub fn shape_by_sketch() -> Outcome {
    let mut fx = Fixture::new();
    let corpus = shape_corpus(&mut fx);
    let r = Retriever::new(&fx.config);
    let mut correct = 0;
    let mut got = Vec::new();
    for (sketch, want) in [(Sketch::Circle, ShapeClass::Sphere), (Sketch::Square, ShapeClass::Cube), (Sketch::Star, ShapeClass::Star)] {
        let results = run(&fx, &r, QueryTerm::silhouette(outline_sketch(sketch)));
        let class = results
            .first()
            .and_then(|top| corpus.iter().find(|(_, _, s)| *s == top.segment_id))
            .map(|(c, _, _)| *c);
        if class == Some(want) {
            correct += 1;
        }
        got.push(format!("{sketch:?}->{}", class.map_or("none", |c| c.name())));
    }
    Outcome::check(correct >= 2, format!("matching class first {correct}/3 (need 2): {}", got.join(", ")))
}
