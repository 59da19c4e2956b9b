//! End-to-end acceptance suite. Each criterion prints one PASS/FAIL line with
//! its measurement; the process exits non-zero if any criterion fails.
//!
//! Run: cargo test -p polyseek-core --test acceptance

#[path = "../common/mod.rs"]
mod common;

mod media;
mod oracles;
mod properties;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

/// Result of one criterion: whether it held and what was measured.
pub struct Outcome {
    pub pass: bool,
    pub detail: String,
}

impl Outcome {
    pub fn check(pass: bool, detail: impl Into<String>) -> Self {
        Outcome { pass, detail: detail.into() }
    }
}

struct Criterion {
    name: &'static str,
    limit: Duration,
    run: fn() -> Outcome,
}

const fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

fn main() {
    // `cargo test -- --list` and filters are passed through by cargo; honour a plain name filter.
    let filter: Option<String> = std::env::args().skip(1).find(|a| !a.starts_with('-'));
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let criteria = [
        Criterion { name: "store exactness", limit: secs(10), run: properties::store_exactness },
        Criterion { name: "lsh recall", limit: secs(10), run: properties::lsh_recall },
        Criterion { name: "fingerprint excerpts", limit: secs(120), run: media::fingerprint_excerpts },
        Criterion { name: "melody matching", limit: secs(120), run: media::melody_matching },
        Criterion { name: "near-duplicate images", limit: secs(120), run: media::near_duplicates },
        Criterion { name: "3d query by example", limit: secs(180), run: media::shape_by_example },
        Criterion { name: "3d query by sketch", limit: secs(60), run: media::shape_by_sketch },
        Criterion { name: "fusion semantics", limit: secs(120), run: properties::fusion_semantics },
        Criterion { name: "metric correctness", limit: secs(60), run: properties::metric_correctness },
        Criterion { name: "descriptor oracles", limit: secs(120), run: oracles::descriptor_oracles },
    ];
    let mut failed = 0;
    let mut ran = 0;
    for c in criteria.iter().filter(|c| filter.as_deref().is_none_or(|f| c.name.contains(f))) {
        ran += 1;
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(c.run))
            .unwrap_or_else(|e| {
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                Outcome::check(false, format!("panicked: {msg}"))
            });
        let elapsed = start.elapsed();
        let in_time = elapsed <= c.limit;
        let pass = outcome.pass && in_time;
        if !pass {
            failed += 1;
        }
        println!(
            "{} {:<24} {} [{:.1}s / {}s{}]",
            if pass { "PASS" } else { "FAIL" },
            c.name,
            outcome.detail,
            elapsed.as_secs_f64(),
            c.limit.as_secs(),
            if in_time { "" } else { ", over time limit" }
        );
    }
    println!("acceptance: {} of {ran} criteria passed", ran - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
