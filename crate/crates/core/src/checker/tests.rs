use super::*;
use crate::parser::{parse_certificate, parse_domain, parse_expr, parse_program};

fn r(s: &str) -> Rational {
    s.parse().unwrap()
}

fn grid(max: &str) -> PdGrid {
    PdGrid::new(r("1/4"), r(max)).unwrap()
}

fn check(prog: &str, cert: &str, dom: &str) -> Report {
    let (lp, _) = LoopSpec::from_program(&parse_program(prog).unwrap()).unwrap();
    let cert = parse_certificate(cert).unwrap();
    check_certificate(&lp, &cert, &CheckConfig::new(parse_domain(dom).unwrap())).unwrap()
}

#[test]
fn pd_shape_examples() {
    let e = |s: &str| parse_expr(s).unwrap();
    assert_eq!(check_pd_shape(&e("1/2"), &e("1"), &grid("100")).overall(), Verdict::PassOnDomain);
    assert_eq!(check_pd_shape(&e("1/(v+1)"), &e("1"), &grid("1000")).overall(), Verdict::PassOnDomain);
    let bad = check_pd_shape(&e("1/3"), &e("2-v"), &grid("3"));
    let entry = bad.entry("d-positive").unwrap();
    assert_eq!(entry.verdict, Verdict::Fail);
    assert_eq!(entry.counterexample, Some(Witness::GridPoint(r("2"))));
    let rising = check_pd_shape(&e("min(1, v/4)"), &e("1"), &grid("8"));
    assert_eq!(rising.entry("p-antitone").unwrap().verdict, Verdict::Fail);
    assert_eq!(rising.entry("p-range").unwrap().verdict, Verdict::PassOnDomain);
}

#[test]
fn negative_binomial_passes() {
    let rep = check(
        "while (x != 0) { {x := x-1} [1/2] {skip} }",
        "kind = ast-new\ninvariant = is_int(x) & x >= 0\nvariant = abs(x)\nprob = 1/2\ndecrease = 1",
        "x=0..200",
    );
    assert_eq!(rep.overall(), Verdict::PassOnDomain, "{rep}");
    assert!(rep.warnings.is_empty());
}

#[test]
fn affine_variant_for_fair_in_the_limit_fails() {
    let rep = check(
        "while (x != 0) { q := x/(2*x+1); {x := x-1} [q] {x := x+1} }",
        "kind = ast-new\ninvariant = true\nvariant = x\nprob = 1/3\ndecrease = 1",
        "x=1..50",
    );
    let e = rep.entry("super-martingale").unwrap();
    assert_eq!(e.verdict, Verdict::Fail, "{rep}");
    // At x = 1: x + 1/(2x+1) = 4/3.
    assert_eq!(e.counterexample, Some(Witness::State(State::from_pairs([("x", 1.into())]))));
    assert!(e.detail.contains("4/3"), "{}", e.detail);
}

#[test]
fn lazy_loper_passes() {
    let rep = check(
        "while (x != 0) { { {x := x+1} [1/2] {x := x-1} } [1/x] {skip} }",
        "kind = ast-new\ninvariant = is_int(x) & x >= 0\nvariant = x\nprob = min(1, 1/(2*v))\ndecrease = 1",
        "x=0..100",
    );
    assert_eq!(rep.overall(), Verdict::PassOnDomain, "{rep}");
}

#[test]
fn old_rule_examples() {
    let rep = check(
        "x := 1; while (x != 0) { {x := mod(x+1, 3)} [1/2] {x := mod(x-1, 3)} }",
        "kind = ast-old\ninvariant = is_int(x) & x >= 0 & x <= 2\nvint = x\nlow = 0\nhigh = 2\neps = 1/2",
        "x=0..2",
    );
    assert_eq!(rep.overall(), Verdict::PassOnDomain, "{rep}");
    let rep = check(
        "while (x != 0) { {x := x+1} [1/2] {x := x-1} }",
        "kind = ast-old\ninvariant = is_int(x) & x >= 0\nvint = x\nlow = 0\nhigh = 100\neps = 1/2",
        "x=0..200",
    );
    let e = rep.entry("variant-bounds").unwrap();
    assert_eq!(e.verdict, Verdict::Fail);
    assert_eq!(e.counterexample, Some(Witness::State(State::from_pairs([("x", 101.into())]))));
}

#[test]
fn nonterm_examples() {
    let walk = "while (x > 0) { {x := x-1} [1/3] {x := x+1} }";
    let rep = check(
        walk,
        "kind = non-termination\ninvariant = is_int(x) & x>=0\nmartingale = (pow(2,x)-1)/pow(2,x-1)\nbound = 2",
        "x=0..60",
    );
    assert_eq!(rep.overall(), Verdict::PassOnDomain, "{rep}");

    let srw = "while (x != 0) { {x := x+1} [1/2] {x := x-1} }";
    let rep = check(srw, "kind = non-termination\ninvariant = true\nmartingale = x\nbound = 10", "x=0..200");
    let e = rep.entry("bounded-on-domain").unwrap();
    assert_eq!(e.verdict, Verdict::Fail);
    assert_eq!(e.counterexample, Some(Witness::State(State::from_pairs([("x", 11.into())]))));

    let rep = check(walk, "kind = non-termination\ninvariant = true\nmartingale = 1\nbound = 2", "x=0..10");
    assert_eq!(rep.entry("non-constant").unwrap().verdict, Verdict::Fail);

    let nested = parse_program("while (x > 0) { while (y > 0) { y := y - 1 }; x := x - 1 }").unwrap();
    let (lp, _) = LoopSpec::from_program(&nested).unwrap();
    let Certificate::NonTerm(c) =
        parse_certificate("kind = non-termination\ninvariant = true\nmartingale = x\nbound = 2").unwrap()
    else {
        unreachable!()
    };
    let cfg = CheckConfig::new(parse_domain("x=0..3, y=0..1").unwrap());
    assert_eq!(check_nonterm(&lp, &c, &cfg), Err(CheckError::LoopNotAllowed));
}

#[test]
fn ranking_progress_functions() {
    let (p, d) = derive_pd_from_ranking(&r("1"), &r("1")).unwrap();
    assert_eq!(d, Expr::lit(r("1/2")));
    assert_eq!(p.to_string(), "ite(v >= 1, 1 / (2 * v - 1), 1)");
    let (p, _) = derive_pd_from_ranking(&r("1/2"), &r("1")).unwrap();
    assert_eq!(p.eval(&v_state(&r("1"))).unwrap(), r("1/3"));
    assert!(derive_pd_from_ranking(&r("2"), &r("1")).is_err());
    assert!(derive_pd_from_ranking(&r("0"), &r("1")).is_err());
    let (p, d) = derive_pd_from_ranking(&r("1/3"), &r("5/2")).unwrap();
    assert_eq!(check_pd_shape(&p, &d, &grid("50")).overall(), Verdict::PassOnDomain);
}

#[test]
fn report_rendering() {
    let rep = check(
        "while (x != 0) { {x := x-1} [1/2] {skip} }",
        "kind = ast-new\ninvariant = true\nvariant = x\nprob = 1/2\ndecrease = 1",
        "x=-1..3",
    );
    let lines = rep.machine_lines();
    assert!(lines.contains(&"condition variant-positive FAIL state x=-1".to_string()), "{lines:?}");
    assert!(lines.contains(&"condition p-range PASS-ON-DOMAIN".to_string()));
    assert!(rep.to_string().starts_with("ast-new: FAIL"));
}

#[test]
fn grid_is_extended_to_cover_variant() {
    let (lp, _) =
        LoopSpec::from_program(&parse_program("while (x != 0) { {x := x-1} [1/2] {skip} }").unwrap()).unwrap();
    let Certificate::New(c) =
        parse_certificate("kind = ast-new\ninvariant = x >= 0\nvariant = x\nprob = 1/2\ndecrease = 1").unwrap()
    else {
        unreachable!()
    };
    let mut cfg = CheckConfig::new(parse_domain("x=0..30").unwrap());
    cfg.pd_grid = grid("10");
    let rep = check_new_rule(&lp, &c, &cfg).unwrap();
    assert_eq!(rep.overall(), Verdict::PassOnDomain);
    assert_eq!(rep.warnings.len(), 1, "{:?}", rep.warnings);
}
