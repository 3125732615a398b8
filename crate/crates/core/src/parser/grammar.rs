use crate::syntax::{BExpr, BinOp, CmpOp, Expr, Name, Program, UnaryFn};

use super::lexer::{tokenize, Spanned, Tok};
use super::ParseError;

const KEYWORDS: &[&str] = &[
    "skip", "if", "else", "while", "true", "false", "min", "max", "monus", "abs", "pow", "mod", "harmonic", "floor",
    "ceil", "ite", "iverson", "is_int",
];

pub(crate) struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    pub(crate) fn new(src: &str) -> PResult<Self> {
        Ok(Parser { toks: tokenize(src)?, pos: 0 })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn advance(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, message: impl Into<String>) -> PResult<T> {
        let s = &self.toks[self.pos];
        Err(ParseError::Syntax { line: s.line, col: s.col, message: message.into() })
    }

    fn unexpected<T>(&self, wanted: &str) -> PResult<T> {
        self.error(format!("expected {wanted}, found {}", self.peek().describe()))
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Tok, wanted: &str) -> PResult<()> {
        if self.eat(&t) {
            Ok(())
        } else {
            self.unexpected(wanted)
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    pub(crate) fn expect_eof(&self) -> PResult<()> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            self.unexpected("end of input")
        }
    }

    // ---- statements ----

    pub(crate) fn program(&mut self) -> PResult<Program> {
        let p = self.stmt()?;
        self.expect_eof()?;
        Ok(p)
    }

    fn stmt(&mut self) -> PResult<Program> {
        let mut parts = vec![self.atom_stmt()?];
        while self.eat(&Tok::Semi) {
            // Tolerate a trailing `;` before `}` or end of input.
            if matches!(self.peek(), Tok::RBrace | Tok::Eof) {
                break;
            }
            parts.push(self.atom_stmt()?);
        }
        Ok(Program::seq_all(parts))
    }

    fn block(&mut self) -> PResult<Program> {
        self.expect(Tok::LBrace, "`{`")?;
        let p = self.stmt()?;
        self.expect(Tok::RBrace, "`;` or `}`")?;
        Ok(p)
    }

    fn atom_stmt(&mut self) -> PResult<Program> {
        match self.peek().clone() {
            Tok::Ident(s) if s == "skip" => {
                self.advance();
                Ok(Program::Skip)
            }
            Tok::Ident(s) if s == "while" => {
                self.advance();
                self.expect(Tok::LParen, "`(` after `while`")?;
                let g = self.bexpr()?;
                self.expect(Tok::RParen, "`)`")?;
                let body = self.block()?;
                Ok(Program::while_loop(g, body))
            }
            Tok::Ident(s) if s == "if" => {
                self.advance();
                self.expect(Tok::LParen, "`(` after `if`")?;
                let g = self.bexpr()?;
                self.expect(Tok::RParen, "`)`")?;
                let then = self.block()?;
                if !self.is_keyword("else") {
                    return self.unexpected("`else`");
                }
                self.advance();
                let other = self.block()?;
                Ok(Program::ite(g, then, other))
            }
            Tok::LBrace => {
                let left = self.block()?;
                self.expect(Tok::LBracket, "`[` (a choice between blocks)")?;
                if self.eat(&Tok::RBracket) {
                    let right = self.block()?;
                    return Ok(Program::dchoice(left, right));
                }
                let p = self.expr()?;
                self.expect(Tok::RBracket, "`]` after probability")?;
                let right = self.block()?;
                Ok(Program::pchoice(left, p, right))
            }
            Tok::Ident(name) => {
                if KEYWORDS.contains(&name.as_str()) {
                    return self.error(format!("unexpected keyword `{name}`"));
                }
                self.advance();
                self.expect(Tok::Assign, "`:=`")?;
                let e = self.expr()?;
                Ok(Program::Assign(Name::new(&name), e))
            }
            _ => self.unexpected("a statement"),
        }
    }

    // ---- arithmetic ----

    pub(crate) fn expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.advance();
            let rhs = self.term()?;
            lhs = Expr::bin(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.advance();
            let rhs = self.unary()?;
            lhs = Expr::bin(op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> PResult<Expr> {
        if self.eat(&Tok::Minus) {
            // `-` immediately followed by a numeral is a negative literal.
            if let Tok::Num(r) = self.peek().clone() {
                self.advance();
                return Ok(Expr::Lit(-r));
            }
            let inner = self.unary()?;
            return Ok(Expr::Neg(Box::new(inner)));
        }
        self.expr_atom()
    }

    fn call_args<const N: usize>(&mut self, fname: &str) -> PResult<[Expr; N]> {
        self.expect(Tok::LParen, &format!("`(` after `{fname}`"))?;
        let mut args = Vec::with_capacity(N);
        for i in 0..N {
            if i > 0 {
                self.expect(Tok::Comma, &format!("`,` in `{fname}` arguments"))?;
            }
            args.push(self.expr()?);
        }
        self.expect(Tok::RParen, &format!("`)` closing `{fname}`"))?;
        Ok(args.try_into().unwrap_or_else(|_| unreachable!()))
    }

    fn expr_atom(&mut self) -> PResult<Expr> {
        match self.peek().clone() {
            Tok::Num(r) => {
                self.advance();
                Ok(Expr::Lit(r))
            }
            Tok::LParen => {
                self.advance();
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                let binary = match name.as_str() {
                    "min" => Some(BinOp::Min),
                    "max" => Some(BinOp::Max),
                    "monus" => Some(BinOp::Monus),
                    "pow" => Some(BinOp::Pow),
                    "mod" => Some(BinOp::Mod),
                    _ => None,
                };
                let unary = match name.as_str() {
                    "abs" => Some(UnaryFn::Abs),
                    "harmonic" => Some(UnaryFn::Harmonic),
                    "floor" => Some(UnaryFn::Floor),
                    "ceil" => Some(UnaryFn::Ceil),
                    _ => None,
                };
                if let Some(op) = binary {
                    self.advance();
                    let [a, b] = self.call_args::<2>(&name)?;
                    return Ok(Expr::bin(op, a, b));
                }
                if let Some(f) = unary {
                    self.advance();
                    let [a] = self.call_args::<1>(&name)?;
                    return Ok(Expr::unary(f, a));
                }
                match name.as_str() {
                    "ite" => {
                        self.advance();
                        self.expect(Tok::LParen, "`(` after `ite`")?;
                        let c = self.bexpr()?;
                        self.expect(Tok::Comma, "`,` in `ite` arguments")?;
                        let t = self.expr()?;
                        self.expect(Tok::Comma, "`,` in `ite` arguments")?;
                        let e = self.expr()?;
                        self.expect(Tok::RParen, "`)` closing `ite`")?;
                        Ok(Expr::ite(c, t, e))
                    }
                    "iverson" => {
                        self.advance();
                        self.expect(Tok::LParen, "`(` after `iverson`")?;
                        let b = self.bexpr()?;
                        self.expect(Tok::RParen, "`)` closing `iverson`")?;
                        Ok(Expr::iverson(b))
                    }
                    "true" | "false" | "is_int" => {
                        self.error(format!("boolean `{name}` where an arithmetic expression is expected"))
                    }
                    kw if KEYWORDS.contains(&kw) => self.error(format!("unexpected keyword `{kw}`")),
                    _ => {
                        self.advance();
                        Ok(Expr::Var(Name::new(&name)))
                    }
                }
            }
            _ => self.unexpected("an arithmetic expression"),
        }
    }

    // ---- boolean ----

    pub(crate) fn bexpr(&mut self) -> PResult<BExpr> {
        let mut lhs = self.band()?;
        while self.eat(&Tok::Pipe) {
            let rhs = self.band()?;
            lhs = BExpr::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn band(&mut self) -> PResult<BExpr> {
        let mut lhs = self.bnot()?;
        while self.eat(&Tok::Amp) {
            let rhs = self.bnot()?;
            lhs = BExpr::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn bnot(&mut self) -> PResult<BExpr> {
        if self.eat(&Tok::Bang) {
            return Ok(BExpr::not(self.bnot()?));
        }
        self.batom()
    }

    fn batom(&mut self) -> PResult<BExpr> {
        match self.peek().clone() {
            Tok::Ident(s) if s == "true" => {
                self.advance();
                Ok(BExpr::True)
            }
            Tok::Ident(s) if s == "false" => {
                self.advance();
                Ok(BExpr::False)
            }
            Tok::Ident(s) if s == "is_int" => {
                self.advance();
                let [e] = self.call_args::<1>("is_int")?;
                Ok(BExpr::IsInt(e))
            }
            Tok::LParen => {
                // Either a parenthesised boolean or a comparison whose left
                // side starts with `(`; try the former, then backtrack.
                let save = self.pos;
                self.advance();
                if let Ok(b) = self.bexpr() {
                    if self.eat(&Tok::RParen) && !self.at_arith_continuation() {
                        return Ok(b);
                    }
                }
                self.pos = save;
                self.comparison()
            }
            _ => self.comparison(),
        }
    }

    fn at_arith_continuation(&self) -> bool {
        matches!(
            self.peek(),
            Tok::Plus | Tok::Minus | Tok::Star | Tok::Slash | Tok::Lt | Tok::Le | Tok::Eq | Tok::Ne | Tok::Ge | Tok::Gt
        )
    }

    fn comparison(&mut self) -> PResult<BExpr> {
        let lhs = self.expr()?;
        let op = match self.peek() {
            Tok::Lt => CmpOp::Lt,
            Tok::Le => CmpOp::Le,
            Tok::Eq => CmpOp::Eq,
            Tok::Ne => CmpOp::Ne,
            Tok::Ge => CmpOp::Ge,
            Tok::Gt => CmpOp::Gt,
            _ => return self.unexpected("a comparison operator (a boolean condition is required here)"),
        };
        self.advance();
        let rhs = self.expr()?;
        Ok(BExpr::cmp(op, lhs, rhs))
    }
}
