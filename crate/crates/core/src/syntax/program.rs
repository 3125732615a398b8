use std::collections::BTreeSet;

use super::{BExpr, EvalError, Expr, Name, State};

/// pGCL statements.
///
/// `Seq` is kept flat: it always holds at least two statements and none of
/// them is itself a `Seq`. Build sequences with [`Program::seq`] or
/// [`Program::seq_all`] to maintain that shape.
/// Leading straight-line assignments, in order.
pub type Prefix = Vec<(Name, Expr)>;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Program {
    Skip,
    Assign(Name, Expr),
    Seq(Vec<Program>),
    If(BExpr, Box<Program>, Box<Program>),
    /// Left branch with the given probability, right branch otherwise.
    PChoice(Box<Program>, Expr, Box<Program>),
    /// Demonic choice.
    DChoice(Box<Program>, Box<Program>),
    While(BExpr, Box<Program>),
}

impl Program {
    pub fn assign(var: &str, e: Expr) -> Self {
        Program::Assign(Name::new(var), e)
    }

    pub fn seq(a: Program, b: Program) -> Self {
        Program::seq_all(vec![a, b])
    }

    pub fn seq_all(parts: Vec<Program>) -> Self {
        let mut flat = Vec::with_capacity(parts.len());
        for p in parts {
            match p {
                Program::Seq(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        match flat.len() {
            0 => Program::Skip,
            1 => flat.pop().unwrap(),
            _ => Program::Seq(flat),
        }
    }

    pub fn ite(g: BExpr, a: Program, b: Program) -> Self {
        Program::If(g, Box::new(a), Box::new(b))
    }

    pub fn pchoice(a: Program, p: Expr, b: Program) -> Self {
        Program::PChoice(Box::new(a), p, Box::new(b))
    }

    pub fn dchoice(a: Program, b: Program) -> Self {
        Program::DChoice(Box::new(a), Box::new(b))
    }

    pub fn while_loop(g: BExpr, body: Program) -> Self {
        Program::While(g, Box::new(body))
    }

    pub fn is_loop_free(&self) -> bool {
        match self {
            Program::Skip | Program::Assign(..) => true,
            Program::Seq(ps) => ps.iter().all(Program::is_loop_free),
            Program::If(_, a, b) | Program::PChoice(a, _, b) | Program::DChoice(a, b) => {
                a.is_loop_free() && b.is_loop_free()
            }
            Program::While(..) => false,
        }
    }

    pub fn has_demonic_choice(&self) -> bool {
        match self {
            Program::Skip | Program::Assign(..) => false,
            Program::Seq(ps) => ps.iter().any(Program::has_demonic_choice),
            Program::If(_, a, b) | Program::PChoice(a, _, b) => a.has_demonic_choice() || b.has_demonic_choice(),
            Program::DChoice(..) => true,
            Program::While(_, b) => b.has_demonic_choice(),
        }
    }

    /// Every variable read or assigned.
    pub fn free_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<Name>) {
        match self {
            Program::Skip => {}
            Program::Assign(x, e) => {
                out.insert(x.clone());
                e.collect_vars(out);
            }
            Program::Seq(ps) => ps.iter().for_each(|p| p.collect_vars(out)),
            Program::If(g, a, b) => {
                g.collect_vars(out);
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Program::PChoice(a, p, b) => {
                p.collect_vars(out);
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Program::DChoice(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Program::While(g, b) => {
                g.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    /// Splits `x := e; ...; while (G) { body }` into its straight-line
    /// assignment prefix and the trailing loop.
    pub fn split_loop(&self) -> Option<(Prefix, &BExpr, &Program)> {
        match self {
            Program::While(g, body) => Some((Vec::new(), g, body)),
            Program::Seq(ps) => {
                let (last, prefix) = ps.split_last()?;
                let Program::While(g, body) = last else { return None };
                let mut assigns = Vec::new();
                for p in prefix {
                    match p {
                        Program::Assign(x, e) => assigns.push((x.clone(), e.clone())),
                        Program::Skip => {}
                        _ => return None,
                    }
                }
                Some((assigns, g, body))
            }
            _ => None,
        }
    }
}

/// Initial state for a loop whose straight-line prefix was split off by
/// [`Program::split_loop`]. Prefix assignments run in order on `init`, but
/// variables bound in `init` keep their given values.
pub fn fold_prefix(prefix: &[(Name, Expr)], init: &State) -> Result<State, EvalError> {
    let mut s = init.clone();
    for (x, e) in prefix {
        let v = e.eval(&s)?;
        if !init.contains(x.as_str()) {
            s.set(x.clone(), v);
        }
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{BinOp, CmpOp};

    #[test]
    fn seq_flattens() {
        let a = Program::assign("x", Expr::int(1));
        let s = Program::seq(Program::seq(a.clone(), Program::Skip), a.clone());
        assert_eq!(s, Program::Seq(vec![a.clone(), Program::Skip, a]));
        assert_eq!(Program::seq_all(vec![]), Program::Skip);
    }

    #[test]
    fn free_vars_examples() {
        let x = Expr::var("x");
        let walk = Program::pchoice(
            Program::assign("x", Expr::bin(BinOp::Sub, x.clone(), Expr::int(1))),
            Expr::lit(crate::Rational::new(1, 2).unwrap()),
            Program::Skip,
        );
        let names: Vec<_> = walk.free_vars().into_iter().map(|n| n.to_string()).collect();
        assert_eq!(names, ["x"]);
        assert!(Program::Skip.free_vars().is_empty());

        let q = Expr::bin(
            BinOp::Div,
            x.clone(),
            Expr::bin(BinOp::Add, Expr::bin(BinOp::Mul, Expr::int(2), x.clone()), Expr::int(1)),
        );
        let body = Program::seq(Program::assign("q", q), walk);
        let names: Vec<_> = body.free_vars().into_iter().map(|n| n.to_string()).collect();
        assert_eq!(names, ["q", "x"]);
    }

    #[test]
    fn split_loop_prefix() {
        let lp = Program::while_loop(BExpr::cmp(CmpOp::Ne, Expr::var("x"), Expr::int(0)), Program::Skip);
        let p = Program::seq(Program::assign("x", Expr::int(1)), lp.clone());
        let (prefix, _, body) = p.split_loop().unwrap();
        assert_eq!(prefix.len(), 1);
        assert_eq!(body, &Program::Skip);
        assert!(Program::seq(lp, Program::Skip).split_loop().is_none());
    }
}
