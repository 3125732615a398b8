//! Proof obligations of the termination rules, discharged state by state
//! over a finite domain.
//!
//! A `PASS-ON-DOMAIN` verdict means every obligation held at every domain
//! state where the guard and invariant hold. It is evidence about those
//! states, not a proof for the whole (infinite) state space. Each inequality
//! is compared against an exact value or a lower bound of its right-hand
//! side; a failure against a mere lower bound is reported as `INCONCLUSIVE`.

mod report;

pub use report::{Entry, Report, Verdict, Witness};

use std::fmt;
use std::str::FromStr;

use crate::par::par_map;
use crate::parser::{Certificate, CertificateNew, CertificateNonTerm, CertificateOld, Domain, RESERVED_VAR};
use crate::syntax::{BExpr, BinOp, CmpOp, Expr, Name, Program, Rational, State};
use crate::transformer::{awp_eval, wp_eval, Expectation, Fuel, WpResult};
use report::{Outcome, Tally};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CheckError {
    #[error("program is not a loop (optionally preceded by assignments)")]
    NotALoop,
    #[error("the non-termination certificate needs a loop-free body")]
    LoopNotAllowed,
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

/// `while (guard) { body }`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoopSpec {
    pub guard: BExpr,
    pub body: Program,
}

impl LoopSpec {
    pub fn new(guard: BExpr, body: Program) -> Self {
        LoopSpec { guard, body }
    }

    /// Splits a program of the form `x := e; ...; while (G) { body }` into
    /// the loop and its straight-line prefix.
    pub fn from_program(p: &Program) -> Result<(LoopSpec, Vec<(Name, Expr)>), CheckError> {
        let (prefix, g, body) = p.split_loop().ok_or(CheckError::NotALoop)?;
        Ok((LoopSpec::new(g.clone(), body.clone()), prefix))
    }
}

/// Grid `v = step, 2*step, ..., max` on which `p` and `d` are checked.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PdGrid {
    pub step: Rational,
    pub max: Rational,
}

impl PdGrid {
    pub fn new(step: Rational, max: Rational) -> Result<Self, CheckError> {
        if !step.is_positive() {
            return Err(CheckError::InvalidConfig(format!("grid step must be positive, got {step}")));
        }
        Ok(PdGrid { step, max })
    }

    pub fn points(&self) -> impl Iterator<Item = Rational> + '_ {
        let n = self.max.checked_div(&self.step).map(|r| r.floor()).and_then(|r| r.to_i64()).unwrap_or(0);
        (1..=n.max(0)).map(move |i| &self.step * &Rational::from_integer(i))
    }
}

impl Default for PdGrid {
    fn default() -> Self {
        PdGrid { step: Rational::new(1, 4).unwrap(), max: Rational::from_integer(10_000) }
    }
}

impl fmt::Display for PdGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "step={},max={}", self.step, self.max)
    }
}

/// Parses `step=1/4,max=10000`; either key may be omitted.
impl FromStr for PdGrid {
    type Err = CheckError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut g = PdGrid::default();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let bad = || CheckError::InvalidConfig(format!("bad grid entry `{part}`"));
            let (k, v) = part.split_once('=').ok_or_else(bad)?;
            let v: Rational = v.trim().parse().map_err(|_| bad())?;
            match k.trim() {
                "step" => g.step = v,
                "max" => g.max = v,
                _ => return Err(bad()),
            }
        }
        PdGrid::new(g.step, g.max)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckConfig {
    pub domain: Domain,
    /// Constants `H` for the sampled form of the super-martingale condition.
    pub h_samples: Vec<Rational>,
    pub pd_grid: PdGrid,
    pub fuel: Fuel,
}

impl CheckConfig {
    pub fn new(domain: Domain) -> Self {
        CheckConfig { domain, h_samples: default_h_samples(), pd_grid: PdGrid::default(), fuel: Fuel::DEFAULT }
    }

    fn validate(&self) -> Result<(), CheckError> {
        if self.h_samples.is_empty() || self.h_samples.iter().any(|h| !h.is_positive()) {
            return Err(CheckError::InvalidConfig("H samples must be a nonempty list of positive values".into()));
        }
        Ok(())
    }
}

pub fn default_h_samples() -> Vec<Rational> {
    [1, 10, 100, 1000, 10_000].into_iter().map(Rational::from_integer).collect()
}

fn v_state(v: &Rational) -> State {
    State::from_pairs([(RESERVED_VAR, v.clone())])
}

fn le(lhs: &Rational, rhs: &WpResult, what: impl FnOnce() -> String) -> Outcome {
    if *lhs <= rhs.value {
        Outcome::Holds
    } else if rhs.exact {
        Outcome::Fails(what())
    } else {
        Outcome::Unknown(format!("{} (right side is a fuel-limited lower bound)", what()))
    }
}

fn lit(r: Rational) -> Expr {
    Expr::lit(r)
}

/// Checks `0 < p(v) <= 1`, `d(v) > 0` and that both are antitone on the grid.
pub fn check_pd_shape(p: &Expr, d: &Expr, grid: &PdGrid) -> Report {
    let mut report = Report::new("p/d shape");
    let mut p_range = Tally::new("p-range");
    let mut d_pos = Tally::new("d-positive");
    let mut p_anti = Tally::new("p-antitone");
    let mut d_anti = Tally::new("d-antitone");
    let mut prev: Option<(Rational, Option<Rational>, Option<Rational>)> = None;
    let mut points = 0usize;
    for v in grid.points() {
        points += 1;
        let s = v_state(&v);
        let at = || Witness::GridPoint(v.clone());
        let pv = p.eval(&s);
        let dv = d.eval(&s);
        match &pv {
            Ok(x) if x.is_positive() && *x <= Rational::one() => p_range.record(at, Outcome::Holds),
            Ok(x) => p_range.record(at, Outcome::Fails(format!("p(v) = {x} is not in (0, 1]"))),
            Err(e) => p_range.record(at, Outcome::Fails(format!("p(v): {e}"))),
        }
        match &dv {
            Ok(x) if x.is_positive() => d_pos.record(at, Outcome::Holds),
            Ok(x) => d_pos.record(at, Outcome::Fails(format!("d(v) = {x} is not positive"))),
            Err(e) => d_pos.record(at, Outcome::Fails(format!("d(v): {e}"))),
        }
        let (pv, dv) = (pv.ok(), dv.ok());
        if let Some((u, pu, du)) = &prev {
            if let (Some(a), Some(b)) = (pu, &pv) {
                let o = if b <= a { Outcome::Holds } else { Outcome::Fails(format!("p({u}) = {a} < p(v) = {b}")) };
                p_anti.record(at, o);
            }
            if let (Some(a), Some(b)) = (du, &dv) {
                let o = if b <= a { Outcome::Holds } else { Outcome::Fails(format!("d({u}) = {a} < d(v) = {b}")) };
                d_anti.record(at, o);
            }
        }
        prev = Some((v, pv, dv));
    }
    if points == 0 {
        report.warnings.push(format!("p/d grid {grid} has no points"));
    }
    for t in [p_range, d_pos, p_anti, d_anti] {
        report.entries.push(t.finish("grid points"));
    }
    report
}

/// Evaluates guard and invariant everywhere, then `f` at the states where
/// both hold, in parallel; tallies results in domain order.
fn per_state<F>(report: &mut Report, lp: &LoopSpec, inv: &BExpr, cfg: &CheckConfig, names: &[&str], f: F) -> usize
where
    F: Fn(&State) -> Vec<Outcome> + Sync + Send,
{
    let states: Vec<State> = cfg.domain.states().collect();
    let results = par_map(states.len(), |i| {
        let s = &states[i];
        let active = lp.guard.eval(s).and_then(|g| Ok(g && inv.eval(s)?));
        match active {
            Ok(true) => Some(Ok(f(s))),
            Ok(false) => None,
            Err(e) => Some(Err(e.to_string())),
        }
    });
    let mut tallies: Vec<Tally> = names.iter().map(|n| Tally::new(n)).collect();
    let mut eval_errors = Tally::new("guard-invariant-eval");
    let mut active = 0;
    for (s, r) in states.iter().zip(results) {
        let at = || Witness::State(s.clone());
        match r {
            None => {}
            Some(Err(e)) => eval_errors.record(at, Outcome::Fails(e)),
            Some(Ok(outcomes)) => {
                active += 1;
                for (t, o) in tallies.iter_mut().zip(outcomes) {
                    t.record(at, o);
                }
            }
        }
    }
    let eval_entry = eval_errors.finish("states");
    if eval_entry.verdict != Verdict::PassOnDomain {
        report.entries.push(eval_entry);
    }
    report.entries.extend(tallies.into_iter().map(|t| t.finish("states")));
    if active == 0 {
        report.warnings.push("no domain state satisfies guard and invariant; conditions hold vacuously".into());
    }
    active
}

fn invariant_preserved(body: &Program, inv: &BExpr, s: &State, fuel: Fuel) -> Outcome {
    match wp_eval(body, &Expectation::Expr(Expr::iverson(inv.clone())), s, fuel) {
        Ok(w) => le(&Rational::one(), &w, || format!("wp(body, [I]) = {} < 1", w.value)),
        Err(e) => Outcome::Fails(e.to_string()),
    }
}

/// Conditions of the quasi-variant rule: the invariant is preserved, the
/// variant is positive inside the loop, the variant drops by `d` with
/// probability at least `p`, and it is a super-martingale.
pub fn check_new_rule(lp: &LoopSpec, cert: &CertificateNew, cfg: &CheckConfig) -> Result<Report, CheckError> {
    cfg.validate()?;
    let mut report = Report::new("ast-new");

    // The grid has to reach every variant value the domain produces.
    let mut grid = cfg.pd_grid.clone();
    let max_v = cfg
        .domain
        .states()
        .filter(|s| matches!(lp.guard.eval(s), Ok(true)) && matches!(cert.invariant.eval(s), Ok(true)))
        .filter_map(|s| cert.variant.eval(&s).ok())
        .max();
    if let Some(m) = max_v {
        if m > grid.max {
            let n = m.checked_div(&grid.step).expect("positive step").ceil();
            let new_max = &n * &grid.step;
            report.warnings.push(format!(
                "p/d grid max {} is below the largest variant value {m}; extended to {new_max}",
                grid.max
            ));
            grid.max = new_max;
        }
    }
    report.extend(check_pd_shape(&cert.prob, &cert.decrease, &grid));

    let loop_free = lp.body.is_loop_free();
    let sm_name = if loop_free { "super-martingale" } else { "super-martingale-sampled-H" };
    let names = ["invariant", "variant-positive", "progress", sm_name];
    let fuel = cfg.fuel;
    let v_expr = &cert.variant;
    per_state(&mut report, lp, &cert.invariant, cfg, &names, |s| {
        let inv = invariant_preserved(&lp.body, &cert.invariant, s, fuel);
        let v = match v_expr.eval(s) {
            Ok(v) => v,
            Err(e) => {
                let msg = format!("V: {e}");
                return vec![inv, Outcome::Fails(msg.clone()), Outcome::Fails(msg.clone()), Outcome::Fails(msg)];
            }
        };
        let positive =
            if v.is_positive() { Outcome::Holds } else { Outcome::Fails(format!("V = {v} is not positive")) };

        let progress = (|| {
            let vs = v_state(&v);
            let p = cert.prob.eval(&vs).map_err(|e| format!("p(V): {e}"))?;
            let d = cert.decrease.eval(&vs).map_err(|e| format!("d(V): {e}"))?;
            let target = &v - &d;
            let post = Expr::iverson(BExpr::cmp(CmpOp::Le, v_expr.clone(), lit(target.clone())));
            let w = wp_eval(&lp.body, &Expectation::Expr(post), s, fuel).map_err(|e| e.to_string())?;
            Ok::<_, String>(le(&p, &w, || format!("Pr[V <= {target}] after body = {} < p(V) = {p}", w.value)))
        })()
        .unwrap_or_else(Outcome::Fails);

        let sm = if loop_free {
            match awp_eval(&lp.body, &Expectation::Expr(v_expr.clone()), s) {
                Ok(a) if a <= v => Outcome::Holds,
                Ok(a) => Outcome::Fails(format!("awp(body, V) = {} > V = {}", a.display_with_decimal(), v)),
                Err(e) => Outcome::Fails(e.to_string()),
            }
        } else {
            let mut out = Outcome::Holds;
            for h in &cfg.h_samples {
                let post = Expr::bin(BinOp::Monus, lit(h.clone()), v_expr.clone());
                let lhs = h.monus(&v);
                let o = match wp_eval(&lp.body, &Expectation::Expr(post), s, fuel) {
                    Ok(w) => le(&lhs, &w, || format!("H = {h}: wp(body, H - V) = {} < H - V = {lhs}", w.value)),
                    Err(e) => Outcome::Fails(e.to_string()),
                };
                match o {
                    Outcome::Holds => {}
                    Outcome::Fails(_) => {
                        out = o;
                        break;
                    }
                    Outcome::Unknown(_) => {
                        if matches!(out, Outcome::Holds) {
                            out = o;
                        }
                    }
                }
            }
            out
        };
        vec![inv, positive, progress, sm]
    });
    if !loop_free {
        let hs: Vec<String> = cfg.h_samples.iter().map(Rational::to_string).collect();
        report.warnings.push(format!(
            "loop body contains a loop: super-martingale condition checked only for H in {{{}}}",
            hs.join(", ")
        ));
    }
    Ok(report)
}

/// Conditions of the bounded integer variant rule.
pub fn check_old_rule(lp: &LoopSpec, cert: &CertificateOld, cfg: &CheckConfig) -> Result<Report, CheckError> {
    cfg.validate()?;
    let mut report = Report::new("ast-old");
    let names = ["invariant", "variant-bounds", "progress"];
    let fuel = cfg.fuel;
    per_state(&mut report, lp, &cert.invariant, cfg, &names, |s| {
        let inv = invariant_preserved(&lp.body, &cert.invariant, s, fuel);
        let n = match cert.vint.eval(s) {
            Ok(n) => n,
            Err(e) => {
                let msg = format!("VInt: {e}");
                return vec![inv, Outcome::Fails(msg.clone()), Outcome::Fails(msg)];
            }
        };
        let bounds = if !n.is_integer() {
            Outcome::Fails(format!("VInt = {n} is not an integer"))
        } else if n <= cert.low || n > cert.high {
            Outcome::Fails(format!("VInt = {n} outside ({}, {}]", cert.low, cert.high))
        } else {
            Outcome::Holds
        };
        let post = Expr::iverson(BExpr::cmp(CmpOp::Lt, cert.vint.clone(), lit(n.clone())));
        let progress = match wp_eval(&lp.body, &Expectation::Expr(post), s, fuel) {
            Ok(w) => le(&cert.eps, &w, || format!("Pr[VInt < {n}] after body = {} < eps = {}", w.value, cert.eps)),
            Err(e) => Outcome::Fails(e.to_string()),
        };
        vec![inv, bounds, progress]
    });
    Ok(report)
}

/// Conditions of the non-termination certificate: a bounded, non-constant
/// exact martingale that is positive inside the loop.
pub fn check_nonterm(lp: &LoopSpec, cert: &CertificateNonTerm, cfg: &CheckConfig) -> Result<Report, CheckError> {
    cfg.validate()?;
    if !lp.body.is_loop_free() {
        return Err(CheckError::LoopNotAllowed);
    }
    let mut report = Report::new("non-termination");
    let names = ["invariant", "variant-positive", "bounded-on-domain", "exact-martingale"];
    let fuel = cfg.fuel;
    let v_expr = &cert.martingale;
    per_state(&mut report, lp, &cert.invariant, cfg, &names, |s| {
        let inv = invariant_preserved(&lp.body, &cert.invariant, s, fuel);
        let v = match v_expr.eval(s) {
            Ok(v) => v,
            Err(e) => {
                let msg = format!("V: {e}");
                return vec![inv, Outcome::Fails(msg.clone()), Outcome::Fails(msg.clone()), Outcome::Fails(msg)];
            }
        };
        let positive =
            if v.is_positive() { Outcome::Holds } else { Outcome::Fails(format!("V = {v} is not positive")) };
        let bounded = if v.is_negative() || v > cert.bound {
            Outcome::Fails(format!("V = {v} outside [0, {}]", cert.bound))
        } else {
            Outcome::Holds
        };
        let post = Expectation::Expr(v_expr.clone());
        let martingale = match (wp_eval(&lp.body, &post, s, fuel), awp_eval(&lp.body, &post, s)) {
            (Ok(w), Ok(a)) if w.value == v && a == v => Outcome::Holds,
            (Ok(w), Ok(a)) => Outcome::Fails(format!("wp = {}, V = {v}, awp = {a}", w.value)),
            (Err(e), _) | (_, Err(e)) => Outcome::Fails(e.to_string()),
        };
        vec![inv, positive, bounded, martingale]
    });

    // Non-constancy is a property of V on the invariant, not of single states.
    let mut first: Option<(State, Rational)> = None;
    let mut witness = None;
    for s in cfg.domain.states() {
        if !matches!(cert.invariant.eval(&s), Ok(true)) {
            continue;
        }
        let Ok(v) = v_expr.eval(&s) else { continue };
        match &first {
            None => first = Some((s, v)),
            Some((s0, v0)) if *v0 != v => {
                witness = Some(format!("V({s0}) = {v0}, V({s}) = {v}"));
                break;
            }
            _ => {}
        }
    }
    report.entries.push(match (witness, first) {
        (Some(d), _) => {
            Entry { name: "non-constant".into(), verdict: Verdict::PassOnDomain, counterexample: None, detail: d }
        }
        (None, Some((s, v))) => Entry {
            name: "non-constant".into(),
            verdict: Verdict::Fail,
            counterexample: Some(Witness::State(s)),
            detail: format!("V = {v} at every invariant state of the domain"),
        },
        (None, None) => Entry {
            name: "non-constant".into(),
            verdict: Verdict::Fail,
            counterexample: Some(Witness::State(State::new())),
            detail: "no domain state satisfies the invariant".into(),
        },
    });
    Ok(report)
}

pub fn check_certificate(lp: &LoopSpec, cert: &Certificate, cfg: &CheckConfig) -> Result<Report, CheckError> {
    match cert {
        Certificate::New(c) => check_new_rule(lp, c, cfg),
        Certificate::Old(c) => check_old_rule(lp, c, cfg),
        Certificate::NonTerm(c) => check_nonterm(lp, c, cfg),
    }
}

/// Progress functions obtained from a ranking super-martingale that drops by
/// at least `eps` in expectation and is at least `r_star` inside the loop:
/// `d(v) = eps/2` and `p(v) = eps / (2 max(v, r_star) - eps)`.
pub fn derive_pd_from_ranking(eps: &Rational, r_star: &Rational) -> Result<(Expr, Expr), CheckError> {
    if !eps.is_positive() || r_star < eps {
        return Err(CheckError::InvalidParameters(format!(
            "need r_star >= eps > 0, got eps = {eps}, r_star = {r_star}"
        )));
    }
    let two = Rational::from_integer(2);
    let v = Expr::var(RESERVED_VAR);
    let above = Expr::bin(
        BinOp::Div,
        lit(eps.clone()),
        Expr::bin(BinOp::Sub, Expr::bin(BinOp::Mul, Expr::int(2), v.clone()), lit(eps.clone())),
    );
    let below = eps.checked_div(&(&(&two * r_star) - eps)).expect("2 r_star - eps >= eps > 0");
    let p = Expr::ite(BExpr::cmp(CmpOp::Ge, v, lit(r_star.clone())), above, lit(below));
    let d = lit(eps.checked_div(&two).expect("nonzero"));
    Ok((p, d))
}

#[cfg(test)]
mod tests;
