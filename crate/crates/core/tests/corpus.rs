use std::time::Instant;

use pgcl::corpus::Corpus;

#[test]
fn every_fixture_meets_its_golden_expectations() {
    let corpus = Corpus::builtin();
    let mut failures = Vec::new();
    for f in &corpus.fixtures {
        let t = Instant::now();
        for o in f.run_golden() {
            if !o.passed {
                failures.push(o.to_string());
            }
        }
        eprintln!("{:<24} {:>8.2?}", f.id, t.elapsed());
    }
    assert!(failures.is_empty(), "{}", failures.join("\n"));
}

#[test]
fn fixture_ids_are_unique_and_listed() {
    let corpus = Corpus::builtin();
    let mut ids: Vec<_> = corpus.fixtures.iter().map(|f| f.id.as_str()).collect();
    for want in [
        "negative-binomial",
        "demonic-fair-walk",
        "fair-in-the-limit",
        "escaping-spline",
        "lazy-loper",
        "very-lazy-loper-flat",
        "very-lazy-loper-nested",
        "biased-walk",
        "appC-counterexample",
        "appD-additivity",
        "mod3-walk",
        "appG-program-12",
        "2d-srw",
    ] {
        assert!(ids.contains(&want), "missing {want}");
    }
    let n = ids.len();
    ids.sort();
    ids.dedup();
    assert_eq!(ids.len(), n);
}
