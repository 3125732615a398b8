use pgcl_demo::{check, run_simulation, wp};

const ADDITIVITY: &str = include_str!("../../core/fixtures/appD-additivity/program.pgcl");
const WALK: &str = include_str!("../../core/fixtures/negative-binomial/program.pgcl");
const WALK_CERT: &str = include_str!("../../core/fixtures/negative-binomial/ast-new.cert");

#[test]
fn wp_prints_exact_values() {
    let out = wp(ADDITIVITY, "iverson(x = 1)", "", 64).unwrap();
    assert!(out.starts_with("wp = 1/3 (exact)\n"), "{out}");
    assert!(out.contains("awp = "));
}

#[test]
fn wp_reports_parse_errors() {
    let e = wp("x := ", "1", "", 64).unwrap_err();
    assert!(e.starts_with("program:"), "{e}");
    assert!(wp(ADDITIVITY, "1", "", 0).is_err());
}

#[test]
fn check_passes_and_fails() {
    let (verdict, report) = check(WALK, WALK_CERT, "x=0..50").unwrap();
    assert_eq!(verdict, "PASS-ON-DOMAIN", "{report}");
    let bad = WALK_CERT.replace("prob = 1/2", "prob = 3/4");
    let (verdict, _) = check(WALK, &bad, "x=0..50").unwrap();
    assert_eq!(verdict, "FAIL");
}

#[test]
fn simulation_is_seeded_and_capped() {
    let a = run_simulation(WALK, "x=3", "left", 500, 10_000, 4).unwrap();
    assert_eq!(a, run_simulation(WALK, "x=3", "left", 500, 10_000, 4).unwrap());
    assert!(run_simulation(WALK, "x=3", "left", 10_000_000, 10, 4).is_err());
    assert!(run_simulation(WALK, "x=3", "sideways", 10, 10, 4).is_err());
}
