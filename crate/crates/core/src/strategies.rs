//! proptest strategies for random expressions, programs and states, plus
//! the expectation-transformer properties that both this crate's tests and
//! the acceptance run exercise.
//!
//! Generated programs never fail at run time: division is by nonzero
//! literals only, probabilities are clamped into `[0, 1]` by construction,
//! and only variables in [`VARS`] occur, all bound by [`state`].

use proptest::prelude::*;
use proptest::strategy::BoxedStrategy;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

use crate::parser::Domain;
use crate::syntax::{BExpr, BinOp, CmpOp, Expr, Name, Program, Rational, State, UnaryFn};
use crate::transformer::{
    awp_eval, expected_value, loop_value_iteration_with, wp_eval, Choice, Expectation, Fuel, IterOptions, Precision,
};

pub const VARS: [&str; 2] = ["x", "y"];

pub fn rational(lo: i64, hi: i64, max_den: i64) -> impl Strategy<Value = Rational> + Clone {
    (lo..=hi, 1..=max_den).prop_map(|(n, d)| Rational::new(n, d).expect("nonzero denominator"))
}

/// Probability with denominator at most 6, endpoints included.
pub fn probability() -> impl Strategy<Value = Rational> + Clone {
    (1i64..=6).prop_flat_map(|d| (0..=d, Just(d))).prop_map(|(n, d)| Rational::new(n, d).expect("d >= 1"))
}

/// Binds every variable of [`VARS`] to a small integer or half-integer.
pub fn state() -> impl Strategy<Value = State> + Clone {
    prop::collection::vec(rational(-8, 8, 2), VARS.len())
        .prop_map(|vals| State::from_pairs(VARS.iter().copied().zip(vals)))
}

fn var() -> impl Strategy<Value = Expr> + Clone {
    prop::sample::select(&VARS[..]).prop_map(Expr::var)
}

fn cmp_op() -> impl Strategy<Value = CmpOp> + Clone {
    prop::sample::select(&[CmpOp::Lt, CmpOp::Le, CmpOp::Eq, CmpOp::Ne, CmpOp::Ge, CmpOp::Gt][..])
}

/// Arithmetic expressions that evaluate without error on any state binding
/// [`VARS`]; values may be negative.
pub fn expr() -> BoxedStrategy<Expr> {
    let leaf = prop_oneof![rational(-5, 5, 3).prop_map(Expr::lit), var()];
    leaf.prop_recursive(3, 16, 2, |inner| {
        let op = prop::sample::select(&[BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Min, BinOp::Max, BinOp::Monus][..]);
        prop_oneof![
            (op, inner.clone(), inner.clone()).prop_map(|(op, a, b)| Expr::bin(op, a, b)),
            inner.clone().prop_map(|a| Expr::Neg(Box::new(a))),
            inner.clone().prop_map(|a| Expr::unary(UnaryFn::Abs, a)),
            (inner.clone(), rational(1, 4, 2)).prop_map(|(a, d)| Expr::bin(BinOp::Div, a, Expr::lit(d))),
            (simple_bexpr(), inner.clone(), inner.clone()).prop_map(|(c, a, b)| Expr::ite(c, a, b)),
        ]
    })
    .boxed()
}

/// Comparisons of variables and literals joined by boolean connectives.
pub fn simple_bexpr() -> BoxedStrategy<BExpr> {
    let atom = prop_oneof![
        (cmp_op(), var(), rational(-4, 4, 1)).prop_map(|(op, a, c)| BExpr::cmp(op, a, Expr::lit(c))),
        (cmp_op(), var(), var()).prop_map(|(op, a, b)| BExpr::cmp(op, a, b)),
        var().prop_map(BExpr::IsInt),
        Just(BExpr::True),
        Just(BExpr::False),
    ];
    atom.prop_recursive(2, 6, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| BExpr::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| BExpr::or(a, b)),
            inner.prop_map(BExpr::not),
        ]
    })
    .boxed()
}

/// Boolean expressions whose comparisons use arbitrary [`expr`]s.
pub fn bexpr() -> BoxedStrategy<BExpr> {
    let atom = prop_oneof![
        (cmp_op(), expr(), expr()).prop_map(|(op, a, b)| BExpr::cmp(op, a, b)),
        expr().prop_map(BExpr::IsInt),
        Just(BExpr::True),
        Just(BExpr::False),
    ];
    atom.prop_recursive(2, 6, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| BExpr::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| BExpr::or(a, b)),
            inner.prop_map(BExpr::not),
        ]
    })
    .boxed()
}

/// Non-negative expressions, usable as post-expectations.
pub fn nonneg_expr() -> BoxedStrategy<Expr> {
    let leaf = prop_oneof![
        rational(0, 5, 3).prop_map(Expr::lit),
        expr().prop_map(|e| Expr::unary(UnaryFn::Abs, e)),
        simple_bexpr().prop_map(Expr::iverson),
        (expr(), expr()).prop_map(|(a, b)| Expr::bin(BinOp::Monus, a, b)),
    ];
    leaf.prop_recursive(2, 8, 2, |inner| {
        let op = prop::sample::select(&[BinOp::Add, BinOp::Mul, BinOp::Min, BinOp::Max][..]);
        prop_oneof![
            (op, inner.clone(), inner.clone()).prop_map(|(op, a, b)| Expr::bin(op, a, b)),
            (simple_bexpr(), inner.clone(), inner.clone()).prop_map(|(c, a, b)| Expr::ite(c, a, b)),
        ]
    })
    .boxed()
}

/// Probability annotations: a literal, or a guarded pick between two.
fn prob_expr() -> BoxedStrategy<Expr> {
    prop_oneof![
        3 => probability().prop_map(Expr::lit),
        1 => (simple_bexpr(), probability(), probability())
            .prop_map(|(c, a, b)| Expr::ite(c, Expr::lit(a), Expr::lit(b))),
    ]
    .boxed()
}

fn assign() -> BoxedStrategy<Program> {
    (prop::sample::select(&VARS[..]), expr()).prop_map(|(x, e)| Program::Assign(Name::new(x), e)).boxed()
}

/// Loop-free programs over [`VARS`]; `demonic` allows demonic choice.
pub fn loop_free_program(demonic: bool) -> BoxedStrategy<Program> {
    let leaf = prop_oneof![1 => Just(Program::Skip), 4 => assign()];
    leaf.prop_recursive(3, 12, 3, move |inner| {
        let mut arms: Vec<(u32, BoxedStrategy<Program>)> = vec![
            (2, prop::collection::vec(inner.clone(), 2..=3).prop_map(Program::seq_all).boxed()),
            (1, (simple_bexpr(), inner.clone(), inner.clone()).prop_map(|(g, a, b)| Program::ite(g, a, b)).boxed()),
            (2, (inner.clone(), prob_expr(), inner.clone()).prop_map(|(a, p, b)| Program::pchoice(a, p, b)).boxed()),
        ];
        if demonic {
            arms.push((2, (inner.clone(), inner).prop_map(|(a, b)| Program::dchoice(a, b)).boxed()));
        }
        prop::strategy::Union::new_weighted(arms)
    })
    .boxed()
}

/// `while (g) { body }` over [`VARS`] with a loop-free body.
pub fn simple_loop(demonic: bool) -> BoxedStrategy<(BExpr, Program)> {
    (simple_bexpr(), loop_free_program(demonic)).boxed()
}

/// Loop-free programs, or such a program followed by a loop.
pub fn program(demonic: bool) -> BoxedStrategy<Program> {
    prop_oneof![
        3 => loop_free_program(demonic),
        1 => (loop_free_program(demonic), simple_loop(demonic))
            .prop_map(|(pre, (g, body))| Program::seq(pre, Program::while_loop(g, body))),
    ]
    .boxed()
}

/// Discrete distribution with 1 to 5 outcomes: `(weight, value)` pairs with
/// positive integer weights.
pub fn distribution() -> impl Strategy<Value = Vec<(u32, Rational)>> + Clone {
    prop::collection::vec((1u32..=5, rational(-6, 6, 3)), 1..=5)
}

/// `x := v_1 [w_1/W] (x := v_2 [...] ...)`, realising `dist` as a program.
pub fn distribution_program(dist: &[(u32, Rational)]) -> Program {
    let mut rest: u32 = dist.iter().map(|(w, _)| w).sum();
    let mut arms: Vec<(Rational, Program)> = Vec::new();
    for (w, v) in dist {
        let p = Rational::new(i64::from(*w), i64::from(rest)).expect("rest >= w >= 1");
        arms.push((p, Program::assign("x", Expr::lit(v.clone()))));
        rest -= w;
    }
    let (_, last) = arms.pop().expect("nonempty distribution");
    arms.into_iter().rev().fold(last, |acc, (p, a)| Program::pchoice(a, Expr::lit(p), acc))
}

fn runner(cases: u32) -> TestRunner {
    let config = Config { cases, failure_persistence: None, max_global_rejects: cases * 20, ..Config::default() };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn check<S: Strategy>(
    cases: u32,
    strat: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    runner(cases).run(&strat, test).map_err(|e| e.to_string())
}

fn fail(msg: String) -> TestCaseError {
    TestCaseError::fail(msg)
}

const FUEL: u32 = 6;

fn wp(p: &Program, f: &Expr, s: &State) -> Result<Rational, TestCaseError> {
    let fuel = Fuel::new(FUEL).expect("positive");
    wp_eval(p, &Expectation::Expr(f.clone()), s, fuel).map(|w| w.value).map_err(|e| fail(e.to_string()))
}

fn awp(p: &Program, f: &Expr, s: &State) -> Result<Rational, TestCaseError> {
    awp_eval(p, &Expectation::Expr(f.clone()), s).map_err(|e| fail(e.to_string()))
}

/// `f <= g` implies `wp(C, f) <= wp(C, g)`, with `g = f + h` for
/// non-negative `h`. Programs may contain a loop (fuel-limited).
pub fn wp_monotone(cases: u32) -> Result<(), String> {
    check(cases, (program(true), nonneg_expr(), nonneg_expr(), state()), |(c, f, h, s)| {
        let g = Expr::bin(BinOp::Add, f.clone(), h);
        let (a, b) = (wp(&c, &f, &s)?, wp(&c, &g, &s)?);
        prop_assert!(a <= b, "wp(f) = {a} > wp(f + h) = {b}");
        Ok(())
    })
}

/// `wp(C, c * f) = c * wp(C, f)` exactly, for loop-free `C` and `c >= 0`.
pub fn wp_scaling(cases: u32) -> Result<(), String> {
    check(cases, (loop_free_program(true), nonneg_expr(), rational(0, 7, 4), state()), |(c, f, k, s)| {
        let scaled = Expr::bin(BinOp::Mul, Expr::lit(k.clone()), f.clone());
        let (a, b) = (wp(&c, &scaled, &s)?, wp(&c, &f, &s)?);
        prop_assert_eq!(a, k * b);
        Ok(())
    })
}

/// `wp <= awp` on loop-free programs, with equality when there is no
/// demonic choice.
pub fn wp_below_awp(cases: u32) -> Result<(), String> {
    check(cases, (loop_free_program(true), nonneg_expr(), state()), |(c, f, s)| {
        let (lo, hi) = (wp(&c, &f, &s)?, awp(&c, &f, &s)?);
        prop_assert!(lo <= hi, "wp = {lo} > awp = {hi}");
        if !c.has_demonic_choice() {
            prop_assert_eq!(lo, hi);
        }
        Ok(())
    })
}

/// `H - awp(C, V)` truncated at 0 is at most `wp(C, H monus V)`.
pub fn monus_awp_inequality(cases: u32) -> Result<(), String> {
    check(cases, (loop_free_program(true), nonneg_expr(), rational(1, 12, 2), state()), |(c, v, h, s)| {
        let lhs = h.monus(&awp(&c, &v, &s)?);
        let rhs = wp(&c, &Expr::bin(BinOp::Monus, Expr::lit(h.clone()), v), &s)?;
        prop_assert!(lhs <= rhs, "H monus awp = {lhs} > wp(H monus V) = {rhs} at H = {h}");
        Ok(())
    })
}

/// For a finite distribution realised as a program and a current value
/// `f0`: `f0 >= E[x]` iff `H monus f0 <= E[H monus x]` for every `H` of a
/// ladder that includes one `H` above every value involved.
pub fn supermartingale_monus_equivalence(cases: u32) -> Result<(), String> {
    let ladder = prop::collection::vec(rational(1, 8, 2), 0..4);
    check(cases, (distribution(), rational(-6, 6, 3), ladder), |(dist, f0, mut hs)| {
        let prog = distribution_program(&dist);
        let empty = State::new();
        let mean = expected_value(&prog, &Expr::var("x"), &empty, Choice::Demonic).map_err(|e| fail(e.to_string()))?;
        let top = dist.iter().map(|(_, v)| v.abs()).fold(f0.abs(), Rational::max);
        hs.push(top + Rational::one());
        let is_super = f0 >= mean;
        let mut all = true;
        for h in &hs {
            let post = Expr::bin(BinOp::Monus, Expr::lit(h.clone()), Expr::var("x"));
            let rhs = wp(&prog, &post, &empty)?;
            let holds = h.monus(&f0) <= rhs;
            prop_assert!(!is_super || holds, "super-martingale but fails at H = {h}");
            all &= holds;
        }
        prop_assert_eq!(is_super, all, "mean {} vs f0 {}", mean, f0);
        Ok(())
    })
}

fn small_domain() -> Domain {
    crate::parser::parse_domain("x=-3..3, y=-2..2").expect("valid domain")
}

/// Exact value iterates never decrease in `k` and, for post-expectation 1,
/// never exceed 1.
pub fn value_iteration_monotone(cases: u32) -> Result<(), String> {
    let dom = small_domain();
    check(cases, (simple_loop(true), prop_oneof![Just(None), nonneg_expr().prop_map(Some)]), |((g, body), f)| {
        let one = f.is_none();
        let post = f.map(Expectation::Expr).unwrap_or_else(Expectation::one);
        let opts = IterOptions { iters: 5, fuel: Fuel::DEFAULT, precision: Precision::Exact };
        let mut prev: Option<Vec<Rational>> = None;
        let mut bad = None;
        loop_value_iteration_with(&g, &body, &post, &dom, &opts, |k, t| {
            if let Some(p) = &prev {
                for (i, (a, b)) in p.iter().zip(t.values()).enumerate() {
                    if a > b && bad.is_none() {
                        bad = Some(format!("X_{} > X_{k} at {}", k - 1, t.domain().state_at(i)));
                    }
                }
            }
            if one && bad.is_none() {
                if let Some(v) = t.values().iter().find(|v| **v > Rational::one()) {
                    bad = Some(format!("X_{k} = {v} exceeds 1"));
                }
            }
            prev = Some(t.values().to_vec());
        })
        .map_err(|e| fail(e.to_string()))?;
        match bad {
            Some(m) => Err(fail(m)),
            None => Ok(()),
        }
    })
}

/// `wp(C, 1) <= 1`, loops included.
pub fn wp_one_at_most_one(cases: u32) -> Result<(), String> {
    check(cases, (program(true), state()), |(c, s)| {
        let v = wp(&c, &Expr::int(1), &s)?;
        prop_assert!(v <= Rational::one(), "wp(C, 1) = {v}");
        prop_assert!(!v.is_negative());
        Ok(())
    })
}

/// Runs a property for the given number of cases.
pub type Property = fn(u32) -> Result<(), String>;

/// Every transformer property above, by name.
pub const PROPERTIES: &[(&str, Property)] = &[
    ("wp-monotone", wp_monotone),
    ("wp-scaling", wp_scaling),
    ("wp-below-awp", wp_below_awp),
    ("monus-awp-inequality", monus_awp_inequality),
    ("super-martingale-monus-equivalence", supermartingale_monus_equivalence),
    ("value-iteration-monotone", value_iteration_monotone),
    ("wp-one-at-most-one", wp_one_at_most_one),
];
