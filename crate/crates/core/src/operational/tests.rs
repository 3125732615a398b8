use super::*;
use crate::parser::{parse_expr, parse_program, parse_state};

fn prog(s: &str) -> Program {
    parse_program(s).unwrap()
}

fn init(s: &str) -> State {
    parse_state(s).unwrap()
}

#[test]
fn skip_terminates_in_one_step() {
    let m = Machine::new(&Program::Skip, &init("x=3"), &Scheduler::Left).unwrap();
    let mut c = m.start();
    let mut rng = RngStream::new(0);
    assert_eq!(step_config(&m, &mut c, &mut rng), Ok(Step::Terminated));
    assert_eq!(m.state(&c), init("x=3"));
}

#[test]
fn walk_at_zero_stops_after_guard() {
    let p = prog("while (x != 0) { {x := x+1} [1/2] {x := x-1} }");
    let out = run_trial(&p, &init("x=0"), &Scheduler::Left, 10, 1).unwrap();
    assert_eq!(out, TrialOutcome::Terminated { state: init("x=0"), steps: 1 });
}

#[test]
fn demonic_body_follows_scheduler() {
    let p = prog("{x := x-1} [0] { {x := x+1} [] {skip} }");
    let run = |s: Scheduler| run_trial(&p, &init("x=1"), &s, 100, 9).unwrap();
    let TrialOutcome::Terminated { state, .. } = run(Scheduler::Right) else { panic!() };
    assert_eq!(state, init("x=1"));
    let TrialOutcome::Terminated { state, .. } = run(Scheduler::Left) else { panic!() };
    assert_eq!(state, init("x=2"));
    let greedy = Scheduler::GreedyMin(parse_expr("x").unwrap());
    let TrialOutcome::Terminated { state, .. } = run(greedy) else { panic!() };
    assert_eq!(state, init("x=1"));
}

#[test]
fn alternate_scheduler_counts_per_trial() {
    let p = prog("{x := x+1} [] {x := x+10}; {x := x+1} [] {x := x+10}; {x := x+1} [] {x := x+10}");
    let TrialOutcome::Terminated { state, .. } = run_trial(&p, &init("x=0"), &Scheduler::Alternate, 100, 0).unwrap()
    else {
        panic!()
    };
    assert_eq!(state, init("x=12"));
}

#[test]
fn censoring_and_errors() {
    let spin = prog("while (true) { skip }");
    assert_eq!(run_trial(&spin, &State::new(), &Scheduler::Left, 1000, 0).unwrap(), TrialOutcome::Censored);
    let geo = prog("while (x != 0) { {x := 0} [1/2] {skip} }");
    for seed in 0..20 {
        let out = run_trial(&geo, &init("x=1"), &Scheduler::Left, 10_000, seed).unwrap();
        assert!(matches!(out, TrialOutcome::Terminated { ref state, .. } if *state == init("x=0")));
    }
    let bad = prog("{skip} [x] {skip}");
    assert!(matches!(run_trial(&bad, &init("x=2"), &Scheduler::Left, 10, 0).unwrap(), TrialOutcome::Errored(_)));
    let unbound = prog("x := y");
    let s = simulate(&unbound, &State::new(), &Scheduler::Left, 3, 10, 0).unwrap();
    assert_eq!((s.errored, s.terminated), (3, 0));
    assert!(s.first_error.unwrap().contains("trial 0"));
}

#[test]
fn greedy_needs_loop_free_branches() {
    let p = prog("{ while (x > 0) { x := x - 1 } } [] { skip }");
    let g = Scheduler::GreedyMin(parse_expr("x").unwrap());
    assert_eq!(simulate(&p, &init("x=1"), &g, 1, 10, 0), Err(SimError::GreedyNeedsLoopFree));
}

#[test]
fn program_12_terminates() {
    let p = prog("c := 1; x := 0; while (c = 1) { {c := 0} [1/2] {x := x+2} }; {x := x+1} [] {skip}");
    let s = simulate(&p, &State::new(), &Scheduler::Random, 200, 10_000, 5).unwrap();
    assert_eq!(s.terminated, 200);
}

#[test]
fn summary_is_deterministic() {
    let p = prog("while (x != 0) { {x := x+1} [1/2] {x := x-1} }");
    let a = simulate(&p, &init("x=1"), &Scheduler::Left, 1000, 500, 42).unwrap();
    let b = simulate(&p, &init("x=1"), &Scheduler::Left, 1000, 500, 42).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.terminated + a.censored + a.errored, 1000);
    let c = simulate(&p, &init("x=1"), &Scheduler::Left, 1000, 500, 43).unwrap();
    assert_ne!(a.termination_fraction, c.termination_fraction);
}

#[test]
fn scheduler_names_round_trip() {
    for s in ["left", "right", "alternate", "random", "greedy-min(-x)", "greedy-min(x + 2 * y)"] {
        let sch: Scheduler = s.parse().unwrap();
        assert_eq!(sch.to_string().parse::<Scheduler>().unwrap(), sch);
    }
    assert!("greedy".parse::<Scheduler>().is_err());
}

#[test]
fn wilson_interval() {
    let (lo, hi) = wilson95(50, 100);
    assert!((lo - 0.4038).abs() < 1e-3 && (hi - 0.5962).abs() < 1e-3, "{lo} {hi}");
    assert_eq!(wilson95(0, 10).0, 0.0);
}

#[test]
fn symbolic_lookahead_matches_evaluator() {
    use crate::transformer::{expected_value, Choice};
    let body = prog("{x := x-1} [1/3] { if (x > 2) { {x := 2*x} [] {x := x+1} } else { y := x; x := y - 5 } }");
    let e = parse_expr("x * x - 3").unwrap();
    let sym = machine::symbolic_wp_for_tests(&body, &e).unwrap();
    for x in -4..8 {
        let s = init(&format!("x={x}, y=0"));
        assert_eq!(sym.eval(&s).unwrap(), expected_value(&body, &e, &s, Choice::Demonic).unwrap());
    }
}
