use proptest::prelude::*;

use pgcl::operational::{simulate, Scheduler};
use pgcl::parser::{parse_domain, parse_expr, parse_program, pretty_print};
use pgcl::strategies::{self, expr, nonneg_expr, program, rational, simple_bexpr, state};
use pgcl::syntax::{harmonic, BExpr, BinOp, CmpOp, Expr, Name, Program, Rational};
use pgcl::transformer::{loop_value_iteration, Expectation, Fuel};

const CASES: u32 = 1000;

fn run(name: &str) {
    let (_, f) = strategies::PROPERTIES.iter().find(|(n, _)| *n == name).expect("known property");
    if let Err(e) = f(CASES) {
        panic!("{name}: {e}");
    }
}

#[test]
fn wp_monotone() {
    run("wp-monotone");
}

#[test]
fn wp_scaling() {
    run("wp-scaling");
}

#[test]
fn wp_below_awp() {
    run("wp-below-awp");
}

#[test]
fn monus_awp_inequality() {
    run("monus-awp-inequality");
}

#[test]
fn supermartingale_monus_equivalence() {
    run("super-martingale-monus-equivalence");
}

#[test]
fn value_iteration_monotone() {
    run("value-iteration-monotone");
}

#[test]
fn wp_one_at_most_one() {
    run("wp-one-at-most-one");
}

proptest! {
    #![proptest_config(ProptestConfig { cases: CASES, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn print_then_parse_is_identity(p in program(true)) {
        let text = pretty_print(&p);
        let back = parse_program(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert_eq!(back, p, "{}", text);
    }

    #[test]
    fn expr_display_reparses(e in expr()) {
        let text = e.to_string();
        prop_assert_eq!(parse_expr(&text).unwrap(), e, "{}", text);
    }

    #[test]
    fn substitution_is_update(e in expr(), by in expr(), s in state()) {
        let x = Name::new("x");
        let lhs = e.substitute(&x, &by).eval(&s).unwrap();
        let rhs = e.eval(&s.with(&x, by.eval(&s).unwrap())).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn rational_reciprocal(a in rational(-50, 50, 9), b in rational(-50, 50, 9)) {
        prop_assume!(!a.is_zero() && !b.is_zero());
        let q = a.checked_div(&b).unwrap();
        prop_assert!((q.clone() * b.checked_div(&a).unwrap()).is_one());
        prop_assert_eq!(q.recip().unwrap(), b.checked_div(&a).unwrap());
    }

    #[test]
    fn floor_ceil_bracket(a in rational(-50, 50, 9)) {
        prop_assert!(a.floor() <= a && a <= a.ceil());
        prop_assert!(a.ceil() - a.floor() <= Rational::one());
        prop_assert!(a.floor().is_integer() && a.ceil().is_integer());
    }

    #[test]
    fn iverson_is_zero_or_one(b in simple_bexpr(), s in state()) {
        let v = Expr::iverson(b).eval(&s).unwrap();
        prop_assert!(v.is_zero() || v.is_one());
    }

    #[test]
    fn monus_is_nonnegative(e in nonneg_expr(), s in state()) {
        prop_assert!(!e.eval(&s).unwrap().is_negative());
    }

    #[test]
    fn harmonic_increases(n in 0usize..400) {
        let step = Rational::new(1, n as i64 + 1).unwrap();
        prop_assert_eq!(harmonic(n + 1), harmonic(n) + step);
    }
}

/// `while (0 < x & x < 6) { x := x + a [p] x := x - b } [] {...}` style walks,
/// whose every reachable state within a few iterations stays in a known box.
fn walk() -> impl Strategy<Value = Program> {
    let step = || (-2i64..=2).prop_map(|d| Program::assign("x", Expr::bin(BinOp::Add, Expr::var("x"), Expr::int(d))));
    let arm = move || {
        (step(), 1i64..=3, step()).prop_map(|(a, n, b)| Program::pchoice(a, Expr::lit(Rational::new(n, 4).unwrap()), b))
    };
    (arm(), arm()).prop_map(|(l, r)| {
        let g = BExpr::and(
            BExpr::cmp(CmpOp::Gt, Expr::var("x"), Expr::int(0)),
            BExpr::cmp(CmpOp::Lt, Expr::var("x"), Expr::int(6)),
        );
        Program::while_loop(g, Program::dchoice(l, r))
    })
}

fn schedulers() -> Vec<Scheduler> {
    ["left", "right", "alternate", "random", "greedy-min(x)"].iter().map(|s| s.parse().unwrap()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, failure_persistence: None, ..ProptestConfig::default() })]

    /// Every scheduler terminates at least as often as the demonic lower
    /// bound after `k` unfoldings predicts, up to sampling error.
    #[test]
    fn schedulers_respect_demonic_bound(p in walk(), x0 in 1i64..=5, seed in any::<u64>()) {
        let (_, g, body) = p.split_loop().unwrap();
        let dom = parse_domain("x=-20..25").unwrap();
        let init = pgcl::parser::parse_state(&format!("x={x0}")).unwrap();
        let k = 8;
        let vi = loop_value_iteration(g, body, &Expectation::one(), &dom, k, Fuel::DEFAULT).unwrap();
        let bound = vi.get(&init).to_f64();
        let n = 400u64;
        for sch in schedulers() {
            let s = simulate(&p, &init, &sch, n, 10_000, seed).unwrap();
            let frac = s.termination_fraction.to_f64();
            let sigma = (bound * (1.0 - bound) / n as f64).sqrt() + 1e-3;
            prop_assert!(frac >= bound - 3.0 * sigma, "{sch}: fraction {frac} below bound {bound}");
        }
    }

    #[test]
    fn simulation_is_seed_deterministic(p in walk(), seed in any::<u64>()) {
        let init = pgcl::parser::parse_state("x=3").unwrap();
        let sch = Scheduler::Random;
        let a = simulate(&p, &init, &sch, 300, 1_000, seed).unwrap();
        let b = simulate(&p, &init, &sch, 300, 1_000, seed).unwrap();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn simulation_ignores_thread_count() {
    let p = parse_program("while (x > 0) { {x := x - 1} [1/2] {x := x + 1} }").unwrap();
    let init = pgcl::parser::parse_state("x=1").unwrap();
    let go = |n: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .unwrap()
            .install(|| simulate(&p, &init, &Scheduler::Left, 3000, 5000, 7).unwrap())
    };
    assert_eq!(go(1), go(4));
}

#[test]
fn counterexample_loop_stops_half_the_time() {
    let p = parse_program(include_str!("../fixtures/appC-counterexample/program.pgcl")).unwrap();
    let (prefix, g, body) = p.split_loop().unwrap();
    let dom = parse_domain("x=0..2").unwrap();
    let init = pgcl::syntax::fold_prefix(&prefix, &pgcl::State::new()).unwrap();
    for k in 1..=10 {
        let t = loop_value_iteration(g, body, &Expectation::one(), &dom, k, Fuel::DEFAULT).unwrap();
        assert_eq!(t.get(&init), Rational::new(1, 2).unwrap(), "iters {k}");
    }
}
