use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::syntax::{
    apply_binary, apply_unary, BExpr, BinOp, CmpOp, EvalError, Expr, Name, Program, Rational, State, UnaryFn,
};

use super::rng::{rng_bernoulli, RngStream, Uniform};
use super::scheduler::Scheduler;
use super::{RuntimeError, SimError};

pub(crate) type StmtId = u32;
/// Runtime errors are rare; boxing keeps the hot path's results small.
pub(crate) type Fault = Box<RuntimeError>;

#[cold]
fn fault(e: EvalError) -> Fault {
    Box::new(e.into())
}
type Slot = u32;

/// Expression with variables resolved to slots.
#[derive(Debug, Clone)]
enum CExpr {
    Lit(Rational),
    Slot(Slot),
    /// `slot + c`, by far the most common assignment right-hand side.
    SlotPlus(Slot, Rational),
    Neg(Box<CExpr>),
    Bin(BinOp, Box<CExpr>, Box<CExpr>),
    Un(UnaryFn, Box<CExpr>),
    Ite(Box<CBExpr>, Box<CExpr>, Box<CExpr>),
    Iverson(Box<CBExpr>),
}

#[derive(Debug, Clone)]
enum CBExpr {
    Const(bool),
    Cmp(CmpOp, CExpr, CExpr),
    Not(Box<CBExpr>),
    And(Box<CBExpr>, Box<CBExpr>),
    Or(Box<CBExpr>, Box<CBExpr>),
    IsInt(CExpr),
}

/// A probability that is the same at every state, ready for sampling.
#[derive(Debug, Clone)]
enum Prob {
    Dynamic(CExpr),
    Never,
    Always,
    /// `a/b` with `b` in `u64`: `k < a` for `k` uniform below `b`.
    Fixed {
        a: u64,
        b: Uniform,
    },
    Big(Rational),
}

#[derive(Debug, Clone)]
enum Node {
    Skip,
    Assign(Slot, CExpr),
    Seq(Vec<StmtId>),
    If(CBExpr, StmtId, StmtId),
    PChoice(StmtId, Prob, StmtId),
    /// Branches and, for greedy scheduling, how to compare them.
    DChoice(StmtId, StmtId, Option<Box<Lookahead>>),
    While(CBExpr, StmtId),
}

/// Greedy decision at a demonic choice: go left iff the expected value of
/// the scheduler's expression after the left branch is not larger.
#[derive(Debug, Clone)]
enum Lookahead {
    /// The comparison does not depend on the state.
    Fixed(bool),
    Compare(CExpr, CExpr),
}

/// `sum of coeff * slot + constant`, if `e` has that shape.
fn affine(e: &CExpr, out: &mut BTreeMap<Slot, Rational>, scale: &Rational, constant: &mut Rational) -> bool {
    match e {
        CExpr::Lit(r) => *constant = &*constant + &(scale * r),
        CExpr::Slot(s) => {
            let c = out.entry(*s).or_insert_with(Rational::zero);
            *c = &*c + scale;
        }
        CExpr::SlotPlus(s, k) => {
            return affine(&CExpr::Slot(*s), out, scale, constant)
                && affine(&CExpr::Lit(k.clone()), out, scale, constant)
        }
        CExpr::Neg(a) => return affine(a, out, &-scale, constant),
        CExpr::Bin(BinOp::Add, a, b) => return affine(a, out, scale, constant) && affine(b, out, scale, constant),
        CExpr::Bin(BinOp::Sub, a, b) => return affine(a, out, scale, constant) && affine(b, out, &-scale, constant),
        CExpr::Bin(BinOp::Mul, a, b) => match (&**a, &**b) {
            (CExpr::Lit(k), other) | (other, CExpr::Lit(k)) => return affine(other, out, &(scale * k), constant),
            _ => return false,
        },
        _ => return false,
    }
    true
}

/// A program compiled for repeated execution under one scheduler.
#[derive(Debug, Clone)]
pub struct Machine {
    nodes: Vec<Node>,
    root: StmtId,
    names: Vec<Name>,
    init: Vec<Option<Rational>>,
    scheduler: Scheduler,
}

/// Pending statements, variable values and step count of one run.
#[derive(Debug, Clone)]
pub struct Config {
    continuation: Vec<StmtId>,
    slots: Vec<Option<Rational>>,
    steps: u64,
    alternate: bool,
}

impl Config {
    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn is_terminated(&self) -> bool {
        self.continuation.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    Running,
    Terminated,
}

struct Compiler {
    nodes: Vec<Node>,
    bound: BTreeSet<Name>,
    slots: HashMap<Name, Slot>,
    names: Vec<Name>,
}

impl Compiler {
    fn slot(&mut self, n: &Name) -> Slot {
        if let Some(&s) = self.slots.get(n) {
            return s;
        }
        let s = self.names.len() as Slot;
        self.names.push(n.clone());
        self.slots.insert(n.clone(), s);
        s
    }

    fn expr(&mut self, e: &Expr) -> CExpr {
        match e {
            Expr::Lit(r) => CExpr::Lit(r.clone()),
            Expr::Var(n) => CExpr::Slot(self.slot(n)),
            Expr::Neg(a) => CExpr::Neg(Box::new(self.expr(a))),
            Expr::Binary(op, a, b) => {
                let (a, b) = (self.expr(a), self.expr(b));
                match (op, &a, &b) {
                    (BinOp::Add, CExpr::Slot(s), CExpr::Lit(c)) | (BinOp::Add, CExpr::Lit(c), CExpr::Slot(s)) => {
                        CExpr::SlotPlus(*s, c.clone())
                    }
                    (BinOp::Sub, CExpr::Slot(s), CExpr::Lit(c)) => CExpr::SlotPlus(*s, -c),
                    _ => CExpr::Bin(*op, Box::new(a), Box::new(b)),
                }
            }
            Expr::Unary(f, a) => CExpr::Un(*f, Box::new(self.expr(a))),
            Expr::Ite(c, t, e) => CExpr::Ite(Box::new(self.bexpr(c)), Box::new(self.expr(t)), Box::new(self.expr(e))),
            Expr::Iverson(b) => CExpr::Iverson(Box::new(self.bexpr(b))),
        }
    }

    fn bexpr(&mut self, b: &BExpr) -> CBExpr {
        match b {
            BExpr::True => CBExpr::Const(true),
            BExpr::False => CBExpr::Const(false),
            BExpr::Cmp(op, a, c) => CBExpr::Cmp(*op, self.expr(a), self.expr(c)),
            BExpr::Not(a) => CBExpr::Not(Box::new(self.bexpr(a))),
            BExpr::And(a, c) => CBExpr::And(Box::new(self.bexpr(a)), Box::new(self.bexpr(c))),
            BExpr::Or(a, c) => CBExpr::Or(Box::new(self.bexpr(a)), Box::new(self.bexpr(c))),
            BExpr::IsInt(e) => CBExpr::IsInt(self.expr(e)),
        }
    }

    fn prob(&mut self, e: &Expr) -> Prob {
        if !e.free_vars().is_empty() {
            return Prob::Dynamic(self.expr(e));
        }
        match e.eval(&State::new()) {
            Ok(p) if p.is_zero() => Prob::Never,
            Ok(p) if p.is_one() => Prob::Always,
            Ok(p) if p.is_positive() && p < Rational::one() => match p.as_small() {
                Some((a, b)) => Prob::Fixed { a: a as u64, b: Uniform::new(b as u64) },
                None => Prob::Big(p),
            },
            // Out of range or failing: report it when (and if) it is reached.
            _ => Prob::Dynamic(self.expr(e)),
        }
    }

    fn lookahead(&mut self, ea: &Expr, eb: &Expr) -> Lookahead {
        let (ca, cb) = (self.expr(ea), self.expr(eb));
        // Folding is only safe when evaluation could not fail, i.e. every
        // variable involved is bound from the start.
        let all_bound = ea.free_vars().iter().chain(eb.free_vars().iter()).all(|n| self.bound.contains(n));
        let mut coeffs = BTreeMap::new();
        let mut constant = Rational::zero();
        if all_bound
            && affine(&ca, &mut coeffs, &Rational::one(), &mut constant)
            && affine(&cb, &mut coeffs, &-Rational::one(), &mut constant)
            && coeffs.values().all(Rational::is_zero)
        {
            return Lookahead::Fixed(!constant.is_positive());
        }
        Lookahead::Compare(ca, cb)
    }

    fn push(&mut self, n: Node) -> StmtId {
        self.nodes.push(n);
        (self.nodes.len() - 1) as StmtId
    }

    fn stmt(&mut self, p: &Program, sch: &Scheduler) -> Result<StmtId, SimError> {
        let node = match p {
            Program::Skip => Node::Skip,
            Program::Assign(x, e) => {
                let s = self.slot(x);
                Node::Assign(s, self.expr(e))
            }
            Program::Seq(ps) => {
                let ids = ps.iter().map(|q| self.stmt(q, sch)).collect::<Result<_, _>>()?;
                Node::Seq(ids)
            }
            Program::If(g, a, b) => {
                let g = self.bexpr(g);
                Node::If(g, self.stmt(a, sch)?, self.stmt(b, sch)?)
            }
            Program::PChoice(a, pe, b) => {
                let prob = self.prob(pe);
                Node::PChoice(self.stmt(a, sch)?, prob, self.stmt(b, sch)?)
            }
            Program::DChoice(a, b) => {
                let lookahead = match sch {
                    Scheduler::GreedyMin(e) => {
                        let ea = symbolic_wp(a, e).ok_or(SimError::GreedyNeedsLoopFree)?;
                        let eb = symbolic_wp(b, e).ok_or(SimError::GreedyNeedsLoopFree)?;
                        Some(Box::new(self.lookahead(&ea, &eb)))
                    }
                    _ => None,
                };
                Node::DChoice(self.stmt(a, sch)?, self.stmt(b, sch)?, lookahead)
            }
            Program::While(g, body) => {
                let g = self.bexpr(g);
                Node::While(g, self.stmt(body, sch)?)
            }
        };
        Ok(self.push(node))
    }
}

/// Expected value of `e` after the loop-free `p`, as an expression over the
/// state before `p`, with nested demonic choices taken as the minimum.
fn symbolic_wp(p: &Program, e: &Expr) -> Option<Expr> {
    Some(match p {
        Program::Skip => e.clone(),
        Program::Assign(x, rhs) => e.substitute(x, rhs),
        Program::Seq(ps) => {
            let mut acc = e.clone();
            for q in ps.iter().rev() {
                acc = symbolic_wp(q, &acc)?;
            }
            acc
        }
        Program::If(g, a, b) => Expr::ite(g.clone(), symbolic_wp(a, e)?, symbolic_wp(b, e)?),
        Program::PChoice(a, pe, b) => {
            let one_minus = Expr::bin(BinOp::Sub, Expr::int(1), pe.clone());
            Expr::bin(
                BinOp::Add,
                Expr::bin(BinOp::Mul, pe.clone(), symbolic_wp(a, e)?),
                Expr::bin(BinOp::Mul, one_minus, symbolic_wp(b, e)?),
            )
        }
        Program::DChoice(a, b) => Expr::bin(BinOp::Min, symbolic_wp(a, e)?, symbolic_wp(b, e)?),
        Program::While(..) => return None,
    })
}

impl Machine {
    /// Compiles `prog`; `init` supplies the starting values.
    pub fn new(prog: &Program, init: &State, scheduler: &Scheduler) -> Result<Self, SimError> {
        let bound = init.iter().map(|(n, _)| n.clone()).collect();
        let mut c = Compiler { nodes: Vec::new(), bound, slots: HashMap::new(), names: Vec::new() };
        for (n, _) in init.iter() {
            c.slot(n);
        }
        let root = c.stmt(prog, scheduler)?;
        let mut slots = vec![None; c.names.len()];
        for (n, v) in init.iter() {
            slots[c.slots[n] as usize] = Some(v.clone());
        }
        Ok(Machine { nodes: c.nodes, root, names: c.names, init: slots, scheduler: scheduler.clone() })
    }

    pub fn scheduler(&self) -> &Scheduler {
        &self.scheduler
    }

    pub fn start(&self) -> Config {
        Config { continuation: vec![self.root], slots: self.init.clone(), steps: 0, alternate: false }
    }

    /// Resets `c` to the initial configuration, reusing its buffers.
    pub fn restart(&self, c: &mut Config) {
        c.continuation.clear();
        c.continuation.push(self.root);
        c.slots.clone_from(&self.init);
        c.steps = 0;
        c.alternate = false;
    }

    /// The variables bound in `c`.
    pub fn state(&self, c: &Config) -> State {
        let mut s = State::new();
        for (n, v) in self.names.iter().zip(&c.slots) {
            if let Some(v) = v {
                s.set(n.clone(), v.clone());
            }
        }
        s
    }

    /// Dispatches the next pending statement.
    pub fn step(&self, c: &mut Config, rng: &mut RngStream) -> Result<Step, RuntimeError> {
        self.step_fast(c, rng).map_err(|f| *f)
    }

    #[inline]
    pub(crate) fn step_fast(&self, c: &mut Config, rng: &mut RngStream) -> Result<Step, Fault> {
        let Some(id) = c.continuation.pop() else { return Ok(Step::Terminated) };
        c.steps += 1;
        match &self.nodes[id as usize] {
            Node::Skip => {}
            Node::Assign(x, e) => {
                let v = self.eval(e, &c.slots)?;
                c.slots[*x as usize] = Some(v);
            }
            Node::Seq(ids) => c.continuation.extend(ids.iter().rev()),
            Node::If(g, a, b) => {
                let next = if self.test(g, &c.slots)? { *a } else { *b };
                c.continuation.push(next);
            }
            Node::PChoice(a, prob, b) => {
                let left = self.choose(prob, &c.slots, rng)?;
                c.continuation.push(if left { *a } else { *b });
            }
            Node::DChoice(a, b, look) => {
                let left = self.resolve(look, c, rng)?;
                c.continuation.push(if left { *a } else { *b });
            }
            Node::While(g, body) => {
                if self.test(g, &c.slots)? {
                    c.continuation.push(id);
                    c.continuation.push(*body);
                }
            }
        }
        Ok(if c.continuation.is_empty() { Step::Terminated } else { Step::Running })
    }

    /// Runs until termination or until `max_steps` statements have been
    /// dispatched in total. Counts steps exactly as repeated [`Machine::step`]
    /// would, but hands a chosen branch straight to the next iteration
    /// instead of round-tripping it through the continuation.
    pub(crate) fn run_until(&self, c: &mut Config, rng: &mut RngStream, max_steps: u64) -> Result<Step, Fault> {
        let mut next: Option<StmtId> = None;
        let mut steps = c.steps;
        let result = loop {
            let id = match next.take() {
                Some(id) => id,
                None => match c.continuation.pop() {
                    Some(id) => id,
                    None => break Ok(Step::Terminated),
                },
            };
            if steps >= max_steps {
                c.continuation.push(id);
                break Ok(Step::Running);
            }
            steps += 1;
            match &self.nodes[id as usize] {
                Node::Skip => {}
                Node::Assign(x, e) => match self.eval(e, &c.slots) {
                    Ok(v) => c.slots[*x as usize] = Some(v),
                    Err(f) => break Err(f),
                },
                Node::Seq(ids) => {
                    c.continuation.extend(ids[1..].iter().rev());
                    next = Some(ids[0]);
                }
                Node::If(g, a, b) => match self.test(g, &c.slots) {
                    Ok(t) => next = Some(if t { *a } else { *b }),
                    Err(f) => break Err(f),
                },
                Node::PChoice(a, prob, b) => match self.choose(prob, &c.slots, rng) {
                    Ok(left) => next = Some(if left { *a } else { *b }),
                    Err(f) => break Err(f),
                },
                Node::DChoice(a, b, look) => match self.resolve(look, c, rng) {
                    Ok(left) => next = Some(if left { *a } else { *b }),
                    Err(f) => break Err(f),
                },
                Node::While(g, body) => match self.test(g, &c.slots) {
                    Ok(true) => {
                        c.continuation.push(id);
                        next = Some(*body);
                    }
                    Ok(false) => {}
                    Err(f) => break Err(f),
                },
            }
        };
        if let Some(id) = next {
            c.continuation.push(id);
        }
        c.steps = steps;
        result
    }

    #[inline]
    fn choose(&self, prob: &Prob, slots: &[Option<Rational>], rng: &mut RngStream) -> Result<bool, Fault> {
        Ok(match prob {
            Prob::Never => false,
            Prob::Always => true,
            Prob::Fixed { a, b } => b.sample(rng) < *a,
            Prob::Big(p) => rng_bernoulli(p, rng),
            Prob::Dynamic(e) => {
                let p = self.eval(e, slots)?;
                if p.is_negative() || p > Rational::one() {
                    return Err(Box::new(RuntimeError::ProbabilityOutOfRange(p)));
                }
                rng_bernoulli(&p, rng)
            }
        })
    }

    #[inline]
    fn resolve(&self, look: &Option<Box<Lookahead>>, c: &mut Config, rng: &mut RngStream) -> Result<bool, Fault> {
        Ok(match (&self.scheduler, look) {
            (Scheduler::Left, _) => true,
            (Scheduler::Right, _) => false,
            (Scheduler::Alternate, _) => {
                c.alternate = !c.alternate;
                c.alternate
            }
            (Scheduler::Random, _) => rng.below(2) < 1,
            (Scheduler::GreedyMin(_), Some(look)) => match &**look {
                Lookahead::Fixed(left) => *left,
                Lookahead::Compare(ea, eb) => self.eval(ea, &c.slots)? <= self.eval(eb, &c.slots)?,
            },
            (Scheduler::GreedyMin(_), None) => unreachable!("lookahead compiled for greedy scheduler"),
        })
    }

    #[inline]
    fn load<'a>(&self, s: Slot, slots: &'a [Option<Rational>]) -> Result<&'a Rational, Fault> {
        match &slots[s as usize] {
            Some(v) => Ok(v),
            None => Err(self.unbound(s)),
        }
    }

    #[cold]
    fn unbound(&self, s: Slot) -> Fault {
        Box::new(EvalError::UnboundVariable(self.names[s as usize].to_string()).into())
    }

    fn eval(&self, e: &CExpr, slots: &[Option<Rational>]) -> Result<Rational, Fault> {
        Ok(match e {
            CExpr::Lit(r) => r.clone(),
            CExpr::Slot(s) => self.load(*s, slots)?.clone(),
            CExpr::SlotPlus(s, c) => self.load(*s, slots)? + c,
            CExpr::Neg(a) => -self.eval(a, slots)?,
            CExpr::Bin(op, a, b) => apply_binary(*op, self.eval(a, slots)?, self.eval(b, slots)?).map_err(fault)?,
            CExpr::Un(f, a) => apply_unary(*f, self.eval(a, slots)?).map_err(fault)?,
            CExpr::Ite(c, t, f) => {
                if self.test(c, slots)? {
                    self.eval(t, slots)?
                } else {
                    self.eval(f, slots)?
                }
            }
            CExpr::Iverson(b) => {
                if self.test(b, slots)? {
                    Rational::one()
                } else {
                    Rational::zero()
                }
            }
        })
    }

    fn test(&self, b: &CBExpr, slots: &[Option<Rational>]) -> Result<bool, Fault> {
        Ok(match b {
            CBExpr::Const(v) => *v,
            CBExpr::Cmp(op, a, c) => match (a, c) {
                (CExpr::Slot(s), CExpr::Lit(k)) => op.holds(self.load(*s, slots)?, k),
                _ => op.holds(&self.eval(a, slots)?, &self.eval(c, slots)?),
            },
            CBExpr::Not(a) => !self.test(a, slots)?,
            CBExpr::And(a, c) => self.test(a, slots)? && self.test(c, slots)?,
            CBExpr::Or(a, c) => self.test(a, slots)? || self.test(c, slots)?,
            CBExpr::IsInt(e) => self.eval(e, slots)?.is_integer(),
        })
    }
}

#[cfg(test)]
pub(crate) fn symbolic_wp_for_tests(p: &Program, e: &Expr) -> Option<Expr> {
    symbolic_wp(p, e)
}
