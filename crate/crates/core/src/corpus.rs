//! Bundled fixture programs with pinned expectations.
//!
//! Each fixture is a directory holding `fixture.toml`, the program text and
//! any certificates it references. The same layout can be loaded from disk
//! with [`Corpus::load_dir`], which is how golden runs over an edited copy
//! work.
//!
//! ```toml
//! title = "negative binomial loop"
//! notes = "..."
//! program = "program.pgcl"
//! init = "x=5"
//!
//! [[check]]
//! certificate = "ast-new.cert"
//! domain = "x=0..500"
//! expect = "PASS-ON-DOMAIN"
//! ```
//!
//! `[[wp]]`, `[[viter]]` and `[[simulate]]` tables pin other results; see
//! the case structs for their fields.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::Deserialize;

use crate::checker::{check_certificate, CheckConfig, LoopSpec, PdGrid, Verdict};
use crate::operational::{simulate, Scheduler};
use crate::parser::{parse_certificate, parse_domain, parse_expr, parse_program, parse_state};
use crate::syntax::{fold_prefix, Program, Rational, State};
use crate::transformer::{awp_eval, loop_value_iteration, wp_eval, Expectation, Fuel};

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("fixture `{id}`: {message}")]
    Manifest { id: String, message: String },
    #[error("fixture `{id}` has no file `{file}`")]
    MissingFile { id: String, file: String },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub title: String,
    pub notes: String,
    pub program: String,
    /// Default initial state, e.g. `"x=1, n=1"`.
    #[serde(default)]
    pub init: String,
    #[serde(default)]
    pub check: Vec<CheckCase>,
    #[serde(default)]
    pub wp: Vec<WpCase>,
    #[serde(default)]
    pub viter: Vec<ViterCase>,
    #[serde(default)]
    pub simulate: Vec<SimCase>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckCase {
    pub certificate: String,
    pub domain: String,
    /// `PASS-ON-DOMAIN`, `FAIL` or `INCONCLUSIVE`.
    pub expect: String,
    pub h_samples: Option<String>,
    pub pd_grid: Option<String>,
    pub fuel: Option<u32>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WpCase {
    pub post: String,
    #[serde(default)]
    pub state: String,
    pub fuel: Option<u32>,
    /// Exact expected `wp` value.
    pub expect: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ViterCase {
    pub init: String,
    pub domain: String,
    pub iters: usize,
    pub post: Option<String>,
    pub fuel: Option<u32>,
    pub expect: Option<String>,
    pub min: Option<String>,
    pub max: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimCase {
    pub init: String,
    pub scheduler: String,
    pub trials: u64,
    pub max_steps: u64,
    pub seed: u64,
    pub min_fraction: Option<String>,
    pub max_fraction: Option<String>,
}

#[derive(Debug, Clone)]
pub struct Fixture {
    pub id: String,
    pub manifest: Manifest,
    files: BTreeMap<String, String>,
}

impl Fixture {
    fn new(id: &str, files: BTreeMap<String, String>) -> Result<Self, CorpusError> {
        let text = files
            .get("fixture.toml")
            .ok_or_else(|| CorpusError::MissingFile { id: id.into(), file: "fixture.toml".into() })?;
        let manifest: Manifest =
            toml::from_str(text).map_err(|e| CorpusError::Manifest { id: id.into(), message: e.to_string() })?;
        let f = Fixture { id: id.into(), manifest, files };
        let mut referenced = vec![&f.manifest.program];
        referenced.extend(f.manifest.check.iter().map(|c| &c.certificate));
        for name in referenced {
            f.file(name)?;
        }
        Ok(f)
    }

    pub fn file(&self, name: &str) -> Result<&str, CorpusError> {
        self.files
            .get(name)
            .map(String::as_str)
            .ok_or_else(|| CorpusError::MissingFile { id: self.id.clone(), file: name.into() })
    }

    pub fn program_source(&self) -> &str {
        &self.files[&self.manifest.program]
    }

    pub fn program(&self) -> Result<Program, crate::parser::ParseError> {
        parse_program(self.program_source())
    }

    pub fn case_count(&self) -> usize {
        let m = &self.manifest;
        m.check.len() + m.wp.len() + m.viter.len() + m.simulate.len()
    }

    /// Re-derives every pinned expectation of this fixture.
    pub fn run_golden(&self) -> Vec<GoldenOutcome> {
        let mut out = Vec::new();
        let mut record = |case: String, r: Result<String, String>| {
            let (passed, detail) = match r {
                Ok(d) => (true, d),
                Err(d) => (false, d),
            };
            out.push(GoldenOutcome { fixture: self.id.clone(), case, passed, detail });
        };
        let prog = match self.program() {
            Ok(p) => p,
            Err(e) => {
                record("parse".into(), Err(format!("program does not parse: {e}")));
                return out;
            }
        };
        for c in &self.manifest.check {
            record(format!("check {}", c.certificate), self.golden_check(&prog, c));
        }
        for c in &self.manifest.wp {
            record(format!("wp {}", c.post), golden_wp(&prog, c));
        }
        for c in &self.manifest.viter {
            record(format!("viter {} iters={}", c.init, c.iters), golden_viter(&prog, c));
        }
        for c in &self.manifest.simulate {
            record(format!("simulate {} {}", c.scheduler, c.init), golden_sim(&prog, c));
        }
        out
    }

    fn golden_check(&self, prog: &Program, c: &CheckCase) -> Result<String, String> {
        let expect = Verdict::parse(&c.expect).ok_or_else(|| format!("unknown verdict `{}`", c.expect))?;
        let (lp, _) = LoopSpec::from_program(prog).map_err(|e| e.to_string())?;
        let cert = parse_certificate(self.file(&c.certificate).map_err(|e| e.to_string())?)
            .map_err(|e| format!("certificate: {e}"))?;
        let mut cfg = CheckConfig::new(parse_domain(&c.domain).map_err(|e| e.to_string())?);
        if let Some(h) = &c.h_samples {
            cfg.h_samples = parse_rational_list(h)?;
        }
        if let Some(g) = &c.pd_grid {
            cfg.pd_grid = g.parse::<PdGrid>().map_err(|e| e.to_string())?;
        }
        cfg.fuel = fuel_of(c.fuel)?;
        let report = check_certificate(&lp, &cert, &cfg).map_err(|e| e.to_string())?;
        let got = report.overall();
        if got == expect {
            Ok(got.as_str().into())
        } else {
            Err(format!("expected {}, got {}", expect.as_str(), got.as_str()))
        }
    }
}

fn parse_rational_list(s: &str) -> Result<Vec<Rational>, String> {
    s.split(',').map(|t| t.trim().parse::<Rational>().map_err(|e| e.to_string())).collect()
}

fn fuel_of(f: Option<u32>) -> Result<Fuel, String> {
    match f {
        None => Ok(Fuel::DEFAULT),
        Some(n) => Fuel::new(n).ok_or_else(|| "fuel must be at least 1".to_string()),
    }
}

fn rat(s: &str) -> Result<Rational, String> {
    s.parse::<Rational>().map_err(|e| e.to_string())
}

fn golden_wp(prog: &Program, c: &WpCase) -> Result<String, String> {
    let post = Expectation::Expr(parse_expr(&c.post).map_err(|e| e.to_string())?);
    let state = parse_state(&c.state).map_err(|e| e.to_string())?;
    let w = wp_eval(prog, &post, &state, fuel_of(c.fuel)?).map_err(|e| e.to_string())?;
    let expect = rat(&c.expect)?;
    if w.value != expect {
        return Err(format!("expected wp = {expect}, got {w}"));
    }
    if prog.is_loop_free() {
        // Also exercises the angelic reading; it must dominate.
        let a = awp_eval(prog, &post, &state).map_err(|e| e.to_string())?;
        if a < w.value {
            return Err(format!("awp {a} below wp {}", w.value));
        }
    }
    Ok(format!("wp = {w}"))
}

fn golden_viter(prog: &Program, c: &ViterCase) -> Result<String, String> {
    let (prefix, guard, body) = prog.split_loop().ok_or("program is not a loop")?;
    let init = fold_prefix(&prefix, &parse_state(&c.init).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let dom = parse_domain(&c.domain).map_err(|e| e.to_string())?;
    let post = match &c.post {
        Some(p) => Expectation::Expr(parse_expr(p).map_err(|e| e.to_string())?),
        None => Expectation::one(),
    };
    let t = loop_value_iteration(guard, body, &post, &dom, c.iters, fuel_of(c.fuel)?).map_err(|e| e.to_string())?;
    let v = t.get(&init);
    if let Some(e) = &c.expect {
        if v != rat(e)? {
            return Err(format!("expected {e}, got {v}"));
        }
    }
    if let Some(lo) = &c.min {
        if v < rat(lo)? {
            return Err(format!("{v} is below {lo}"));
        }
    }
    if let Some(hi) = &c.max {
        if v > rat(hi)? {
            return Err(format!("{v} is above {hi}"));
        }
    }
    Ok(v.display_with_decimal())
}

fn golden_sim(prog: &Program, c: &SimCase) -> Result<String, String> {
    let sch: Scheduler = c.scheduler.parse().map_err(|e: crate::operational::ParseSchedulerError| e.to_string())?;
    let init: State = parse_state(&c.init).map_err(|e| e.to_string())?;
    let s = simulate(prog, &init, &sch, c.trials, c.max_steps, c.seed).map_err(|e| e.to_string())?;
    if s.errored > 0 {
        return Err(format!("{} trials errored: {}", s.errored, s.first_error.unwrap_or_default()));
    }
    let f = &s.termination_fraction;
    if let Some(lo) = &c.min_fraction {
        if *f < rat(lo)? {
            return Err(format!("termination fraction {f} is below {lo}"));
        }
    }
    if let Some(hi) = &c.max_fraction {
        if *f > rat(hi)? {
            return Err(format!("termination fraction {f} is above {hi}"));
        }
    }
    Ok(format!("{}/{} terminated", s.terminated, s.trials))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoldenOutcome {
    pub fixture: String,
    pub case: String,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for GoldenOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "ok" } else { "MISMATCH" };
        write!(f, "{tag} {}: {}: {}", self.fixture, self.case, self.detail)
    }
}

#[derive(Debug, Clone)]
pub struct Corpus {
    pub fixtures: Vec<Fixture>,
}

macro_rules! builtin {
    ($( $id:literal => [$($file:literal),* $(,)?] ),* $(,)?) => {
        &[$( ($id, &[$( ($file, include_str!(concat!("../fixtures/", $id, "/", $file))) ),*]) ),*]
    };
}

type Files = &'static [(&'static str, &'static str)];

const BUILTIN: &[(&str, Files)] = builtin![
    "negative-binomial" => ["fixture.toml", "program.pgcl", "ast-new.cert"],
    "demonic-fair-walk" => ["fixture.toml", "program.pgcl", "ast-new.cert"],
    "demonic-stack-walk" => ["fixture.toml", "program.pgcl"],
    "fair-in-the-limit" => ["fixture.toml", "program.pgcl", "ast-new.cert", "affine.cert"],
    "escaping-spline" => ["fixture.toml", "program.pgcl", "ast-new.cert"],
    "lazy-loper" => ["fixture.toml", "program.pgcl", "ast-new.cert"],
    "very-lazy-loper-flat" => ["fixture.toml", "program.pgcl"],
    "very-lazy-loper-nested" => ["fixture.toml", "program.pgcl", "ast-new.cert"],
    "very-lazy-loper-inner" => ["fixture.toml", "program.pgcl", "ast-new.cert", "prob-one-over-v.cert"],
    "biased-walk" => ["fixture.toml", "program.pgcl", "nonterm.cert", "tempting.cert"],
    "1dsrw" => ["fixture.toml", "program.pgcl", "ast-new.cert", "ast-old.cert"],
    "mod3-walk" => ["fixture.toml", "program.pgcl", "ast-old.cert"],
    "appC-counterexample" => ["fixture.toml", "program.pgcl"],
    "appD-additivity" => ["fixture.toml", "program.pgcl"],
    "appG-program-12" => ["fixture.toml", "program.pgcl"],
    "geometric" => ["fixture.toml", "program.pgcl"],
    "2d-srw" => ["fixture.toml", "program.pgcl"],
];

impl Corpus {
    /// The fixtures compiled into the library.
    pub fn builtin() -> Self {
        let fixtures = BUILTIN
            .iter()
            .map(|(id, files)| {
                let files = files.iter().map(|(n, t)| (n.to_string(), t.to_string())).collect();
                Fixture::new(id, files).unwrap_or_else(|e| panic!("bundled fixture is broken: {e}"))
            })
            .collect();
        Corpus { fixtures }
    }

    /// Loads every subdirectory of `dir` that has a `fixture.toml`, in
    /// name order.
    pub fn load_dir(dir: &Path) -> Result<Self, CorpusError> {
        fn io(p: &Path) -> impl FnOnce(std::io::Error) -> CorpusError + '_ {
            move |source| CorpusError::Io { path: p.display().to_string(), source }
        }
        let mut dirs: Vec<_> = std::fs::read_dir(dir)
            .map_err(io(dir))?
            .filter_map(Result::ok)
            .map(|e| e.path())
            .filter(|p| p.join("fixture.toml").is_file())
            .collect();
        dirs.sort();
        let mut fixtures = Vec::new();
        for d in dirs {
            let id = d.file_name().unwrap_or_default().to_string_lossy().into_owned();
            let mut files = BTreeMap::new();
            for entry in std::fs::read_dir(&d).map_err(io(&d))? {
                let p = entry.map_err(io(&d))?.path();
                if p.is_file() {
                    let name = p.file_name().unwrap_or_default().to_string_lossy().into_owned();
                    files.insert(name, std::fs::read_to_string(&p).map_err(io(&p))?);
                }
            }
            fixtures.push(Fixture::new(&id, files)?);
        }
        Ok(Corpus { fixtures })
    }

    pub fn get(&self, id: &str) -> Option<&Fixture> {
        self.fixtures.iter().find(|f| f.id == id)
    }

    /// Golden outcomes for every fixture, in corpus order.
    pub fn run_golden(&self) -> Vec<GoldenOutcome> {
        self.fixtures.iter().flat_map(Fixture::run_golden).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_fixtures_parse() {
        let c = Corpus::builtin();
        assert_eq!(c.fixtures.len(), BUILTIN.len());
        for f in &c.fixtures {
            f.program().unwrap_or_else(|e| panic!("{}: {e}", f.id));
            for chk in &f.manifest.check {
                parse_certificate(f.file(&chk.certificate).unwrap()).unwrap_or_else(|e| panic!("{}: {e}", f.id));
            }
            assert!(f.case_count() > 0, "{} pins nothing", f.id);
        }
    }

    #[test]
    fn unknown_manifest_key_is_rejected() {
        let files = BTreeMap::from([
            ("fixture.toml".to_string(), "title = \"t\"\nnotes = \"n\"\nprogram = \"p\"\ncolour = 1\n".to_string()),
            ("p".to_string(), "skip".to_string()),
        ]);
        assert!(matches!(Fixture::new("x", files), Err(CorpusError::Manifest { .. })));
    }

    #[test]
    fn missing_certificate_is_reported() {
        let manifest = "title = \"t\"\nnotes = \"n\"\nprogram = \"p\"\n[[check]]\ncertificate = \"c\"\ndomain = \"x=0..1\"\nexpect = \"FAIL\"\n";
        let files =
            BTreeMap::from([("fixture.toml".to_string(), manifest.to_string()), ("p".to_string(), "skip".to_string())]);
        assert!(matches!(Fixture::new("x", files), Err(CorpusError::MissingFile { .. })));
    }
}
