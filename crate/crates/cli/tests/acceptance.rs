//! One line per acceptance criterion, each with its tolerance and timing.
//! Runs without the libtest harness so the lines always reach the log.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use pgcl::operational::{simulate, SimSummary};
use pgcl::parser::{parse_domain, parse_program, parse_state};
use pgcl::strategies::PROPERTIES;
use pgcl::transformer::{loop_value_iteration, Expectation, Fuel};
use pgcl::{Program, Rational};
use pgcl_cli::{run, EXIT_FAIL, EXIT_PASS};

fn fx(id: &str, file: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/fixtures")
        .join(id)
        .join(file)
        .to_string_lossy()
        .into_owned()
}

fn program(id: &str) -> Program {
    parse_program(&std::fs::read_to_string(fx(id, "program.pgcl")).unwrap()).unwrap()
}

fn pgcl(args: &[&str]) -> (i32, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(std::iter::once("pgcl").chain(args.iter().copied()), &mut out, &mut err);
    out.extend(err);
    (code, String::from_utf8(out).unwrap())
}

fn check(id: &str, cert: &str, domain: &str, extra: &[&str]) -> (i32, String, Duration) {
    let (p, c) = (fx(id, "program.pgcl"), fx(id, cert));
    let mut args = vec!["check", &p, &c, "--domain", domain];
    args.extend_from_slice(extra);
    let t = Instant::now();
    let (code, out) = pgcl(&args);
    (code, out, t.elapsed())
}

/// Pass/fail plus a one-line explanation.
type Outcome = (bool, String);

fn criterion_1() -> Outcome {
    let suite = [
        ("negative-binomial", "x=0..500"),
        ("demonic-fair-walk", "x=0..500"),
        ("fair-in-the-limit", "x=0..300"),
        ("escaping-spline", "x=0..500"),
        ("lazy-loper", "x=0..300"),
        ("1dsrw", "x=-200..200"),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (id, dom) in suite {
        let (code, _, dt) = check(id, "ast-new.cert", dom, &[]);
        let good = code == EXIT_PASS && dt < Duration::from_secs(10);
        ok &= good;
        parts.push(format!("{id} {} {:.2}s", if good { "pass" } else { "FAIL" }, dt.as_secs_f64()));
    }
    (ok, format!("new rule PASS-ON-DOMAIN, each < 10s: {}", parts.join(", ")))
}

fn criterion_2() -> Outcome {
    let (c1, o1, _) = check("fair-in-the-limit", "affine.cert", "x=0..300", &[]);
    let a = c1 == EXIT_FAIL
        && o1.lines().any(|l| l.contains("FAIL") && l.contains("super-martingale") && l.contains("at x="));
    let (c2, o2, _) = check("biased-walk", "tempting.cert", "x=0..60", &[]);
    let b = c2 == EXIT_FAIL && o2.lines().any(|l| l.contains("FAIL") && l.contains("d-positive") && l.contains("v=2"));
    let (c3, o3, _) = check("1dsrw", "ast-old.cert", "x=0..200", &[]);
    let c = c3 == EXIT_FAIL && o3.lines().any(|l| l.contains("FAIL") && l.contains("variant-bounds"));
    (a && b && c, format!("affine V fails super-martingale with a state: {a}; d=2-v fails at v=2: {b}; old rule on 1dSRW fails High: {c}"))
}

fn criterion_3() -> Outcome {
    let (code, _, dt) = check("biased-walk", "nonterm.cert", "x=0..60", &[]);
    (code == EXIT_PASS, format!("non-termination certificate on x=0..60: exit {code} in {:.2}s", dt.as_secs_f64()))
}

fn criterion_4() -> Outcome {
    let (code, _, dt) = check("mod3-walk", "ast-old.cert", "x=0..2", &[]);
    (
        code == EXIT_PASS,
        format!("old rule with VInt=x, Low=0, High=2, eps=1/2: exit {code} in {:.2}s", dt.as_secs_f64()),
    )
}

fn viter_at(id: &str, dom: &str, init: &str, iters: usize) -> Rational {
    let p = program(id);
    let (prefix, g, body) = p.split_loop().unwrap();
    let t =
        loop_value_iteration(g, body, &Expectation::one(), &parse_domain(dom).unwrap(), iters, Fuel::DEFAULT).unwrap();
    t.get(&pgcl::syntax::fold_prefix(&prefix, &parse_state(init).unwrap()).unwrap())
}

fn criterion_5() -> Outcome {
    let half = Rational::new(1, 2).unwrap();

    let t = Instant::now();
    let half_stop = (2..=12).all(|k| viter_at("appC-counterexample", "x=0..2", "", k) == half);
    let dt_c = t.elapsed();

    // Gambler's ruin: down with q = 1/3, up with p = 2/3, so ruin from x is (q/p)^x.
    let oracle = (1.0_f64 / 3.0 / (2.0 / 3.0)).powi(1);
    let t = Instant::now();
    let biased = viter_at("biased-walk", "x=0..200", "x=1", 10_000).to_f64();
    let dt_b = t.elapsed();
    let b_ok = biased <= oracle && biased >= oracle - 5e-3;

    let t = Instant::now();
    let geo = viter_at("geometric", "x=0..1", "x=1", 10);
    let dt_g = t.elapsed();
    let two = Rational::from_integer(2);
    let g_ok = geo == Rational::one() - two.pow(-10).unwrap();

    let limit = Duration::from_secs(60);
    let ok = half_stop && b_ok && g_ok && dt_c.max(dt_b).max(dt_g) < limit;
    (
        ok,
        format!(
            "appC-counterexample iters 2..12 = 1/2: {half_stop} ({:.2}s); biased walk {biased:.6} in [{:.3}, {oracle}] ({:.2}s); geometric = {geo} ({:.2}s)",
            dt_c.as_secs_f64(),
            oracle - 5e-3,
            dt_b.as_secs_f64(),
            dt_g.as_secs_f64()
        ),
    )
}

/// Root of f^3 - 2f + 1 in [0, 0.9] by bisection: the termination
/// probability when every call pushes two more.
fn stack_walk_oracle() -> f64 {
    let g = |f: f64| f * f * f - 2.0 * f + 1.0;
    let (mut lo, mut hi) = (0.0_f64, 0.9_f64);
    for _ in 0..200 {
        let mid = (lo + hi) / 2.0;
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Probability that a fair walk from 1 reaches 0 within `k` moves.
fn srw_first_passage(k: usize) -> f64 {
    let mut dist = vec![0.0_f64; k + 3];
    dist[1] = 1.0;
    let mut absorbed = 0.0;
    for _ in 0..k {
        let mut next = vec![0.0_f64; k + 3];
        for (x, &m) in dist.iter().enumerate().skip(1) {
            if m == 0.0 {
                continue;
            }
            next[x - 1] += m / 2.0;
            if x + 1 < next.len() {
                next[x + 1] += m / 2.0;
            }
        }
        absorbed += next[0];
        next[0] = 0.0;
        dist = next;
    }
    absorbed
}

fn sim(id: &str, init: &str, sch: &str, trials: u64, cap: u64, seed: u64) -> (SimSummary, Duration) {
    let t = Instant::now();
    let s = simulate(&program(id), &parse_state(init).unwrap(), &sch.parse().unwrap(), trials, cap, seed).unwrap();
    (s, t.elapsed())
}

fn criterion_6() -> Outcome {
    let limit = Duration::from_secs(120);
    let oracle = stack_walk_oracle();
    let (s, dt1) = sim("demonic-stack-walk", "x=1", "greedy-min(-x)", 200_000, 100_000, 42);
    let f1 = s.termination_fraction.to_f64();
    let a = (f1 - oracle).abs() <= 0.01 && dt1 < limit;

    // A run that leaves after k body executions takes 3k + 1 machine steps,
    // so a cap of 10^4 steps admits exactly 3333 executions.
    let cap = 10_000u64;
    let k = ((cap - 1) / 3) as usize;
    let srw = srw_first_passage(k);
    let (s, dt2) = sim("1dsrw", "x=1", "left", 100_000, cap, 1);
    let f2 = s.termination_fraction.to_f64();
    let b = (f2 - srw).abs() <= 0.01 && dt2 < limit;
    (
        a && b,
        format!(
            "stack walk {f1:.4} vs {oracle:.4} ({:.1}s); 1dSRW {f2:.4} vs horizon-{k} oracle {srw:.4} ({:.1}s); tolerance 0.01",
            dt1.as_secs_f64(),
            dt2.as_secs_f64()
        ),
    )
}

fn criterion_7() -> Outcome {
    let (cap, trials, seed) = (10_000_000, 50_000, 2024);
    let (flat, dt1) = sim("very-lazy-loper-flat", "x=1, n=1", "left", trials, cap, seed);
    let (nested, dt2) = sim("very-lazy-loper-nested", "x=1, n=1", "left", trials, cap, seed);
    let (a, b) = (flat.wilson95, nested.wilson95);
    let overlap = a.0 <= b.1 && b.0 <= a.1;
    (
        overlap,
        format!(
            "flat [{:.4}, {:.4}] ({:.1}s) vs nested [{:.4}, {:.4}] ({:.1}s), cap {cap}",
            a.0,
            a.1,
            dt1.as_secs_f64(),
            b.0,
            b.1,
            dt2.as_secs_f64()
        ),
    )
}

fn criterion_8() -> Outcome {
    let cases = 1000;
    let mut failed = Vec::new();
    let t = Instant::now();
    for (name, prop) in PROPERTIES {
        if let Err(e) = prop(cases) {
            failed.push(format!("{name}: {}", e.lines().next().unwrap_or("")));
        }
    }
    let detail = if failed.is_empty() { "all hold".to_string() } else { failed.join("; ") };
    (
        failed.is_empty(),
        format!("{} properties x {cases} cases: {detail} ({:.1}s)", PROPERTIES.len(), t.elapsed().as_secs_f64()),
    )
}

fn criterion_9() -> Outcome {
    let p = fx("appD-additivity", "program.pgcl");
    let got: Vec<String> = ["iverson(x = 1)", "iverson(x = 0)", "iverson(x = 1) + iverson(x = 0)"]
        .iter()
        .map(|post| pgcl(&["wp", &p, "--post", post]).1.lines().next().unwrap_or("").to_string())
        .collect();
    let want = ["wp = 1/3 (exact)", "wp = 1/3 (exact)", "wp = 1 (exact)"];
    (got == want, format!("printed {got:?}"))
}

fn criterion_10() -> Outcome {
    let p = fx("demonic-stack-walk", "program.pgcl");
    let base = [
        "simulate",
        &p,
        "--init",
        "x=1",
        "--scheduler",
        "greedy-min(-x)",
        "--trials",
        "20000",
        "--max-steps",
        "10000",
        "--seed",
        "3",
    ];
    let with = |threads: &str| {
        let mut a = base.to_vec();
        a.extend(["--threads", threads]);
        pgcl(&a)
    };
    let runs = [with("1"), with("4"), with("1"), pgcl(&base)];
    let same = runs.iter().all(|r| r == &runs[0]) && runs[0].0 == EXIT_PASS;
    (same, format!("4 runs (threads 1, 4, 1, default) byte-identical: {same}"))
}

fn main() {
    let criteria: [(u32, fn() -> Outcome); 10] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
        (10, criterion_10),
    ];
    let mut failures = 0;
    for (n, f) in criteria {
        let t = Instant::now();
        let (ok, detail) = f();
        failures += usize::from(!ok);
        println!("criterion {n}: {} [{:.1}s] {detail}", if ok { "PASS" } else { "FAIL" }, t.elapsed().as_secs_f64());
    }
    if failures > 0 {
        println!("{failures} criteria failed");
        std::process::exit(1);
    }
}
