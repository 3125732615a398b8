//! WebAssembly entry points for the static page in `www/`.
//!
//! Each operation takes program text and options as strings and returns the
//! same text the command line would print. The plain functions are usable
//! natively; the `js_` wrappers turn errors into JavaScript exceptions.

use wasm_bindgen::prelude::*;

use pgcl::checker::{check_certificate, CheckConfig, LoopSpec};
use pgcl::operational::{simulate, Scheduler};
use pgcl::parser::{parse_certificate, parse_domain, parse_expr, parse_program, parse_state};
use pgcl::transformer::{awp_eval, wp_eval, Expectation, Fuel};

/// Runs capped for an interactive page.
pub const MAX_TRIALS: u64 = 100_000;
pub const MAX_STEPS: u64 = 1_000_000;

/// wp of `post` at `state`, plus awp when the program is loop-free.
pub fn wp(program: &str, post: &str, state: &str, fuel: u32) -> Result<String, String> {
    let prog = parse_program(program).map_err(|e| format!("program: {e}"))?;
    let post = Expectation::Expr(parse_expr(post).map_err(|e| format!("post: {e}"))?);
    let state = parse_state(state).map_err(|e| format!("state: {e}"))?;
    let fuel = Fuel::new(fuel).ok_or("fuel must be at least 1")?;
    let w = wp_eval(&prog, &post, &state, fuel).map_err(|e| format!("wp: {e}"))?;
    let mut out = format!("wp = {w}\n");
    if prog.is_loop_free() {
        let a = awp_eval(&prog, &post, &state).map_err(|e| format!("awp: {e}"))?;
        out.push_str(&format!("awp = {a} (exact)\n"));
    }
    Ok(out)
}

/// Checks `certificate` for the loop of `program` on `domain` with default
/// H samples, grid and fuel. Returns the verdict word and the report.
pub fn check(program: &str, certificate: &str, domain: &str) -> Result<(String, String), String> {
    let prog = parse_program(program).map_err(|e| format!("program: {e}"))?;
    let cert = parse_certificate(certificate).map_err(|e| format!("certificate: {e}"))?;
    let (lp, _) = LoopSpec::from_program(&prog).map_err(|e| format!("program: {e}"))?;
    let cfg = CheckConfig::new(parse_domain(domain).map_err(|e| format!("domain: {e}"))?);
    let report = check_certificate(&lp, &cert, &cfg).map_err(|e| format!("check: {e}"))?;
    Ok((report.overall().to_string(), report.to_string()))
}

/// Seeded simulation summary.
pub fn run_simulation(
    program: &str,
    init: &str,
    scheduler: &str,
    trials: u64,
    max_steps: u64,
    seed: u64,
) -> Result<String, String> {
    if trials > MAX_TRIALS || max_steps > MAX_STEPS {
        return Err(format!("the page allows at most {MAX_TRIALS} trials of {MAX_STEPS} steps"));
    }
    let prog = parse_program(program).map_err(|e| format!("program: {e}"))?;
    let init = parse_state(init).map_err(|e| format!("init: {e}"))?;
    let sch: Scheduler = scheduler.parse().map_err(|e| format!("scheduler: {e}"))?;
    let s = simulate(&prog, &init, &sch, trials, max_steps, seed).map_err(|e| format!("simulate: {e}"))?;
    Ok(s.to_string())
}

#[wasm_bindgen(js_name = wp)]
pub fn js_wp(program: &str, post: &str, state: &str, fuel: u32) -> Result<String, JsError> {
    wp(program, post, state, fuel).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = check)]
pub fn js_check(program: &str, certificate: &str, domain: &str) -> Result<String, JsError> {
    check(program, certificate, domain).map(|(_, r)| r).map_err(|e| JsError::new(&e))
}

/// `seed` arrives as a JavaScript number, so it is limited to 2^53.
#[wasm_bindgen(js_name = simulate)]
pub fn js_simulate(
    program: &str,
    init: &str,
    scheduler: &str,
    trials: u32,
    max_steps: u32,
    seed: f64,
) -> Result<String, JsError> {
    run_simulation(program, init, scheduler, u64::from(trials), u64::from(max_steps), seed as u64)
        .map_err(|e| JsError::new(&e))
}
