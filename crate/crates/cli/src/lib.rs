//! The `pgcl` command line.
//!
//! Exit codes: 0 pass (or success), 1 fail, 2 inconclusive, 3 usage or
//! input error. [`run`] is the whole program minus process exit, so tests
//! can drive it in-process.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{ArgGroup, Args, Parser, Subcommand};

use pgcl::checker::{check_certificate, default_h_samples, CheckConfig, LoopSpec, PdGrid, Verdict};
use pgcl::corpus::Corpus;
use pgcl::operational::{simulate, Scheduler};
use pgcl::parser::{parse_certificate, parse_domain, parse_expr, parse_program, parse_state};
use pgcl::syntax::fold_prefix;
use pgcl::transformer::{awp_eval, loop_value_iteration, wp_eval, Expectation, Fuel};
use pgcl::{Program, Rational};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;
pub const EXIT_USAGE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "pgcl", version, about = "Expectation transformers, termination certificates and simulation for pGCL")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a termination certificate for a loop over a finite domain.
    Check(CheckArgs),
    /// Evaluate wp (and awp, when loop-free) of a post-expectation at a state.
    Wp(WpArgs),
    /// Value iteration of the top-level loop over a finite domain.
    Viter(ViterArgs),
    /// Seeded Monte-Carlo estimate of the termination probability.
    Simulate(SimulateArgs),
    /// List the bundled fixtures or re-check their pinned expectations.
    Corpus(CorpusArgs),
}

#[derive(Debug, Args)]
struct CheckArgs {
    program: PathBuf,
    certificate: PathBuf,
    /// e.g. "x=0..200, n=1..50" or "x=0..10:1/2"
    #[arg(long)]
    domain: String,
    /// Comma-separated H values for loops whose body contains a loop.
    #[arg(long, default_value = "1,10,100,1000,10000")]
    h_samples: String,
    #[arg(long, default_value = "step=1/4,max=10000")]
    pd_grid: String,
    #[arg(long, default_value_t = 64)]
    fuel: u32,
}

#[derive(Debug, Args)]
struct WpArgs {
    program: PathBuf,
    #[arg(long)]
    post: String,
    #[arg(long, default_value = "")]
    state: String,
    #[arg(long, default_value_t = 64)]
    fuel: u32,
}

#[derive(Debug, Args)]
struct ViterArgs {
    program: PathBuf,
    #[arg(long)]
    domain: String,
    #[arg(long, default_value_t = 1000)]
    iters: usize,
    #[arg(long, default_value = "1")]
    post: String,
    #[arg(long, default_value_t = 64)]
    fuel: u32,
    /// Print the value at this state only; without it the whole table is printed.
    #[arg(long)]
    init: Option<String>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    program: PathBuf,
    #[arg(long, default_value = "")]
    init: String,
    #[arg(long, default_value = "left")]
    scheduler: String,
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    #[arg(long, default_value_t = 100_000)]
    max_steps: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads; results do not depend on it. Defaults to all cores.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("mode").required(true).args(["list", "run_golden"])))]
struct CorpusArgs {
    #[arg(long)]
    list: bool,
    #[arg(long)]
    run_golden: bool,
    /// Read fixtures from this directory instead of the bundled copy.
    #[arg(long)]
    dir: Option<PathBuf>,
}

/// Error carrying the exit code to use.
struct Exit(i32, String);

fn usage(msg: impl std::fmt::Display) -> Exit {
    Exit(EXIT_USAGE, msg.to_string())
}

fn read(path: &Path) -> Result<String, Exit> {
    std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))
}

fn read_program(path: &Path) -> Result<Program, Exit> {
    parse_program(&read(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn fuel(n: u32) -> Result<Fuel, Exit> {
    Fuel::new(n).ok_or_else(|| usage("--fuel must be at least 1"))
}

fn verdict_exit(v: Verdict) -> i32 {
    match v {
        Verdict::PassOnDomain => EXIT_PASS,
        Verdict::Fail => EXIT_FAIL,
        Verdict::Inconclusive => EXIT_INCONCLUSIVE,
    }
}

/// Runs the command line `args` (including the program name), writing
/// normal output to `out` and diagnostics to `err`. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = match cli.command {
        Command::Check(a) => cmd_check(&a),
        Command::Wp(a) => cmd_wp(&a),
        Command::Viter(a) => cmd_viter(&a),
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Corpus(a) => cmd_corpus(&a),
    };
    match result {
        Ok((code, text)) => {
            let _ = out.write_all(text.as_bytes());
            code
        }
        Err(Exit(code, msg)) => {
            let _ = writeln!(err, "error: {msg}");
            code
        }
    }
}

type Outcome = Result<(i32, String), Exit>;

fn cmd_check(a: &CheckArgs) -> Outcome {
    let prog = read_program(&a.program)?;
    let cert_path = &a.certificate;
    let cert = parse_certificate(&read(cert_path)?).map_err(|e| usage(format!("{}: {e}", cert_path.display())))?;
    let (lp, prefix) = LoopSpec::from_program(&prog).map_err(usage)?;
    let mut cfg = CheckConfig::new(parse_domain(&a.domain).map_err(usage)?);
    cfg.h_samples = parse_h_samples(&a.h_samples)?;
    cfg.pd_grid = a.pd_grid.parse::<PdGrid>().map_err(usage)?;
    cfg.fuel = fuel(a.fuel)?;
    let report = check_certificate(&lp, &cert, &cfg).map_err(usage)?;
    let mut text = String::new();
    if !prefix.is_empty() {
        let names: Vec<_> = prefix.iter().map(|(x, _)| x.as_str()).collect();
        let _ =
            writeln!(text, "note: leading assignments to {} ignored; the rules apply to the loop", names.join(", "));
    }
    text.push_str(&report.to_string());
    Ok((verdict_exit(report.overall()), text))
}

fn parse_h_samples(s: &str) -> Result<Vec<Rational>, Exit> {
    if s.trim().is_empty() {
        return Ok(default_h_samples());
    }
    s.split(',').map(|t| t.trim().parse::<Rational>().map_err(|e| usage(format!("--h-samples: {e}")))).collect()
}

fn cmd_wp(a: &WpArgs) -> Outcome {
    let prog = read_program(&a.program)?;
    let post = Expectation::Expr(parse_expr(&a.post).map_err(|e| usage(format!("--post: {e}")))?);
    let state = parse_state(&a.state).map_err(usage)?;
    let w = wp_eval(&prog, &post, &state, fuel(a.fuel)?).map_err(usage)?;
    let mut text = format!("wp = {w}\n");
    if prog.is_loop_free() {
        let v = awp_eval(&prog, &post, &state).map_err(usage)?;
        let _ = writeln!(text, "awp = {v} (exact)");
    }
    Ok((EXIT_PASS, text))
}

fn cmd_viter(a: &ViterArgs) -> Outcome {
    let prog = read_program(&a.program)?;
    let (prefix, guard, body) = prog
        .split_loop()
        .ok_or_else(|| usage("value iteration needs a top-level while loop, optionally preceded by assignments"))?;
    let dom = parse_domain(&a.domain).map_err(usage)?;
    let post = Expectation::Expr(parse_expr(&a.post).map_err(|e| usage(format!("--post: {e}")))?);
    let table = loop_value_iteration(guard, body, &post, &dom, a.iters, fuel(a.fuel)?).map_err(usage)?;
    let text = match &a.init {
        Some(init) => {
            let s = fold_prefix(&prefix, &parse_state(init).map_err(usage)?).map_err(usage)?;
            if dom.index_of(&s).is_none() {
                return Err(usage(format!("initial state {s} lies outside the domain")));
            }
            format!("{}\n", table.get(&s).display_with_decimal())
        }
        None => table.iter().map(|(s, v)| format!("{s}\t{}\n", v.display_with_decimal())).collect(),
    };
    Ok((EXIT_PASS, text))
}

fn cmd_simulate(a: &SimulateArgs) -> Outcome {
    let prog = read_program(&a.program)?;
    let init = parse_state(&a.init).map_err(usage)?;
    let sch: Scheduler = a.scheduler.parse().map_err(usage)?;
    let go = || simulate(&prog, &init, &sch, a.trials, a.max_steps, a.seed).map_err(usage);
    let summary = match a.threads {
        None => go()?,
        Some(0) => return Err(usage("--threads must be at least 1")),
        Some(n) => rayon::ThreadPoolBuilder::new().num_threads(n).build().map_err(usage)?.install(go)?,
    };
    let mut text = String::new();
    let _ = writeln!(text, "scheduler              {sch}");
    let _ = writeln!(text, "max steps              {}", a.max_steps);
    let _ = writeln!(text, "seed                   {}", a.seed);
    text.push_str(&summary.to_string());
    Ok((EXIT_PASS, text))
}

fn cmd_corpus(a: &CorpusArgs) -> Outcome {
    let corpus = match &a.dir {
        Some(d) => Corpus::load_dir(d).map_err(usage)?,
        None => Corpus::builtin(),
    };
    let mut text = String::new();
    if a.list {
        for f in &corpus.fixtures {
            let _ = writeln!(text, "{} ({})", f.id, f.manifest.title);
            let _ = writeln!(text, "    {}", f.manifest.notes);
        }
        return Ok((EXIT_PASS, text));
    }
    let outcomes = corpus.run_golden();
    let failed: Vec<_> = outcomes.iter().filter(|o| !o.passed).collect();
    for o in &outcomes {
        let _ = writeln!(text, "{o}");
    }
    let _ = writeln!(text, "{} of {} golden expectations hold", outcomes.len() - failed.len(), outcomes.len());
    if failed.is_empty() {
        Ok((EXIT_PASS, text))
    } else {
        let mut ids: Vec<_> = failed.iter().map(|o| o.fixture.as_str()).collect();
        ids.dedup();
        let _ = writeln!(text, "mismatched fixtures: {}", ids.join(", "));
        Ok((EXIT_FAIL, text))
    }
}
