use std::collections::{BTreeMap, BTreeSet};

use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use super::ParseError;

pub const KEYWORDS: &[&str] = &[
    "skip", "stop", "wait", "select", "true", "false", "and", "or", "not", "sqrt", "system",
];

/// Parses either a bare process or a `system NAME { ... }` block.
pub fn parse(text: &str) -> Result<Process, ParseError> {
    let mut p = Parser::new(text)?;
    let proc = if p.peek_kw("system") {
        p.system()?.body
    } else {
        p.proc()?
    };
    p.expect_eof()?;
    Ok(proc)
}

/// Parses a `system NAME { ... }` block, keeping its name.
pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    let mut p = Parser::new(text)?;
    let prog = if p.peek_kw("system") {
        p.system()?
    } else {
        Program {
            name: "main".to_string(),
            body: p.proc()?,
        }
    };
    p.expect_eof()?;
    Ok(prog)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

type PResult<T> = Result<T, ParseError>;

fn later(a: ParseError, b: ParseError) -> ParseError {
    match (&a, &b) {
        (
            ParseError::Syntax {
                line: l1, col: c1, ..
            },
            ParseError::Syntax {
                line: l2, col: c2, ..
            },
        ) if (l2, c2) > (l1, c1) => b,
        _ => a,
    }
}

impl Parser {
    fn new(text: &str) -> PResult<Parser> {
        Ok(Parser {
            toks: tokenize(text)?,
            pos: 0,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> PResult<T> {
        let t = &self.toks[self.pos];
        let found = match &t.tok {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Num(n) => format!("`{n}`"),
            Tok::Sym(s) => format!("`{s}`"),
            Tok::Eof => "end of input".to_string(),
        };
        Err(ParseError::Syntax {
            line: t.line,
            col: t.col,
            msg: format!("{}, found {found}", msg.into()),
        })
    }

    fn peek_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn peek_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == kw)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.peek_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.peek_kw(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> PResult<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.err(format!("expected `{s}`"))
        }
    }

    fn expect_eof(&self) -> PResult<()> {
        if matches!(self.peek(), Tok::Eof) {
            Ok(())
        } else {
            self.err("expected end of input")
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.bump();
                Ok(s)
            }
            _ => self.err("expected identifier"),
        }
    }

    fn number(&mut self) -> PResult<f64> {
        match *self.peek() {
            Tok::Num(n) => {
                self.bump();
                Ok(n)
            }
            _ => self.err("expected number"),
        }
    }

    fn system(&mut self) -> PResult<Program> {
        self.eat_kw("system");
        let name = self.ident()?;
        self.expect_sym("{")?;
        let mut comps = Vec::new();
        loop {
            let label = match (self.peek().clone(), self.peek_at(1).clone()) {
                (Tok::Ident(s), Tok::Sym(":")) if !KEYWORDS.contains(&s.as_str()) => {
                    self.bump();
                    self.bump();
                    Some(s)
                }
                _ => None,
            };
            let body = self.proc()?;
            let name = label.unwrap_or_else(|| format!("P{}", comps.len() + 1));
            comps.push(Component { name, body });
            if !self.eat_sym("||") {
                break;
            }
        }
        self.expect_sym("}")?;
        check_components(&comps)?;
        Ok(Program {
            name,
            body: Process::Parallel(comps),
        })
    }

    fn proc(&mut self) -> PResult<Process> {
        let mut items = vec![self.ichoice()?];
        while self.eat_sym(";") {
            items.push(self.ichoice()?);
        }
        Ok(Process::seq_all(items))
    }

    fn ichoice(&mut self) -> PResult<Process> {
        let mut items = vec![self.guarded()?];
        while self.eat_sym("|~|") {
            items.push(self.guarded()?);
        }
        let mut acc = items.pop().expect("at least one alternative");
        while let Some(p) = items.pop() {
            acc = Process::ichoice(p, acc);
        }
        Ok(acc)
    }

    fn guarded(&mut self) -> PResult<Process> {
        let start = self.pos;
        if let Some(p) = self.try_unit_keyword()? {
            return Ok(p);
        }
        // `b -> P` is tried first; a parenthesised process is the fallback.
        let guard_err = match self.bexpr() {
            Ok(b) if self.eat_sym("->") => {
                let body = self.guarded()?;
                return Ok(Process::guard(b, body));
            }
            Ok(_) => self.err::<()>("expected `->` after guard").unwrap_err(),
            Err(e) => e,
        };
        self.pos = start;
        if self.peek_sym("(") {
            return self.group().map_err(|e| later(e, guard_err));
        }
        Err(guard_err)
    }

    fn try_unit_keyword(&mut self) -> PResult<Option<Process>> {
        if self.eat_kw("skip") {
            return Ok(Some(Process::Skip));
        }
        if self.eat_kw("stop") {
            return Ok(Some(Process::Stop));
        }
        if self.eat_kw("wait") {
            let d = self.number()?;
            return Ok(Some(Process::Wait(d)));
        }
        if self.eat_kw("select") {
            let hs = self.handlers()?;
            return Ok(Some(Process::CommChoice(hs)));
        }
        if self.peek_sym("<") {
            return self.continuous().map(Some);
        }
        if let (Tok::Ident(x), Tok::Sym(s)) = (self.peek().clone(), self.peek_at(1).clone()) {
            if KEYWORDS.contains(&x.as_str()) {
                return Ok(None);
            }
            match s {
                ":=" => {
                    self.bump();
                    self.bump();
                    return Ok(Some(Process::Assign(x, self.expr()?)));
                }
                "?" => {
                    self.bump();
                    self.bump();
                    return Ok(Some(Process::Input(x, self.ident()?)));
                }
                "!" => {
                    self.bump();
                    self.bump();
                    return Ok(Some(Process::Output(x, self.expr()?)));
                }
                _ => {}
            }
        }
        Ok(None)
    }

    fn group(&mut self) -> PResult<Process> {
        self.expect_sym("(")?;
        let body = self.proc()?;
        self.expect_sym(")")?;
        if self.eat_sym("*") {
            self.expect_sym("{")?;
            let n = self.number()?;
            if n < 1.0 || n.fract() != 0.0 || n > u32::MAX as f64 {
                return self.err("repetition bound must be a positive integer");
            }
            self.expect_sym("}")?;
            return Ok(Process::repeat(body, n as u64));
        }
        Ok(body)
    }

    fn continuous(&mut self) -> PResult<Process> {
        self.expect_sym("<")?;
        let mut vars = Vec::new();
        let mut rhs = Vec::new();
        loop {
            let x = self.ident()?;
            self.expect_sym("'")?;
            self.expect_sym("=")?;
            vars.push(x);
            rhs.push(self.expr()?);
            if !self.eat_sym(",") {
                break;
            }
        }
        self.expect_sym("&")?;
        let dom = self.bexpr()?;
        self.expect_sym(">")?;
        let spec = DdeSpec::new(vars, rhs);
        if self.eat_sym("|>") {
            let hs = self.handlers()?;
            return Ok(Process::DdeInterrupt(spec, dom, hs));
        }
        Ok(Process::Dde(spec, dom))
    }

    fn handlers(&mut self) -> PResult<Vec<(CommEvent, Process)>> {
        self.expect_sym("[")?;
        let mut out = Vec::new();
        loop {
            let chan = self.ident()?;
            let ev = if self.eat_sym("?") {
                CommEvent::Input {
                    chan,
                    var: self.ident()?,
                }
            } else if self.eat_sym("!") {
                CommEvent::Output {
                    chan,
                    expr: self.expr()?,
                }
            } else {
                return self.err("expected `?` or `!` in communication handler");
            };
            self.expect_sym("->")?;
            self.expect_sym("(")?;
            let body = self.proc()?;
            self.expect_sym(")")?;
            out.push((ev, body));
            if !self.eat_sym(",") {
                break;
            }
        }
        self.expect_sym("]")?;
        Ok(out)
    }

    fn bexpr(&mut self) -> PResult<BoolExpr> {
        let mut acc = self.band()?;
        while self.eat_kw("or") {
            acc = BoolExpr::or(acc, self.band()?);
        }
        Ok(acc)
    }

    fn band(&mut self) -> PResult<BoolExpr> {
        let mut acc = self.bnot()?;
        while self.eat_kw("and") {
            acc = BoolExpr::and(acc, self.bnot()?);
        }
        Ok(acc)
    }

    fn bnot(&mut self) -> PResult<BoolExpr> {
        if self.eat_kw("not") {
            return Ok(BoolExpr::not(self.bnot()?));
        }
        self.batom()
    }

    fn batom(&mut self) -> PResult<BoolExpr> {
        if self.eat_kw("true") {
            return Ok(BoolExpr::True);
        }
        if self.eat_kw("false") {
            return Ok(BoolExpr::False);
        }
        let start = self.pos;
        let mut paren_err = None;
        if self.eat_sym("(") {
            match self.bexpr() {
                Ok(b) if self.eat_sym(")") => return Ok(b),
                Ok(_) => paren_err = Some(self.err::<()>("expected `)`").unwrap_err()),
                Err(e) => paren_err = Some(e),
            }
            self.pos = start;
        }
        let res = (|| {
            let a = self.expr()?;
            let op = match self.peek() {
                Tok::Sym("<") => CmpOp::Lt,
                Tok::Sym("<=") => CmpOp::Le,
                Tok::Sym(">") => CmpOp::Gt,
                Tok::Sym(">=") => CmpOp::Ge,
                Tok::Sym("==") => CmpOp::Eq,
                Tok::Sym("!=") => CmpOp::Ne,
                _ => return self.err("expected comparison operator"),
            };
            self.bump();
            let b = self.expr()?;
            Ok(BoolExpr::Cmp(a, op, b))
        })();
        match (res, paren_err) {
            (Ok(b), _) => Ok(b),
            (Err(e), Some(p)) => Err(later(p, e)),
            (Err(e), None) => Err(e),
        }
    }

    fn expr(&mut self) -> PResult<Expr> {
        let mut acc = self.term()?;
        loop {
            let op = if self.eat_sym("+") {
                BinOp::Add
            } else if self.eat_sym("-") {
                BinOp::Sub
            } else {
                return Ok(acc);
            };
            acc = Expr::bin(op, acc, self.term()?);
        }
    }

    fn term(&mut self) -> PResult<Expr> {
        let mut acc = self.unary()?;
        loop {
            let op = if self.eat_sym("*") {
                BinOp::Mul
            } else if self.eat_sym("/") {
                BinOp::Div
            } else {
                return Ok(acc);
            };
            acc = Expr::bin(op, acc, self.unary()?);
        }
    }

    fn unary(&mut self) -> PResult<Expr> {
        if self.eat_sym("-") {
            // A minus sign directly on a literal is part of the literal.
            if let Tok::Num(n) = *self.peek() {
                if !matches!(self.peek_at(1), Tok::Sym("^")) {
                    self.bump();
                    return Ok(Expr::Num(-n));
                }
            }
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> PResult<Expr> {
        let base = self.primary()?;
        if self.eat_sym("^") {
            let exp = self.unary()?;
            return Ok(Expr::bin(BinOp::Pow, base, exp));
        }
        Ok(base)
    }

    fn primary(&mut self) -> PResult<Expr> {
        match self.peek().clone() {
            Tok::Num(n) => {
                self.bump();
                Ok(Expr::Num(n))
            }
            Tok::Sym("(") => {
                self.bump();
                let e = self.expr()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            Tok::Ident(s) if s == "sqrt" => {
                self.bump();
                self.expect_sym("(")?;
                let e = self.expr()?;
                self.expect_sym(")")?;
                Ok(Expr::Sqrt(Box::new(e)))
            }
            Tok::Ident(_) => {
                let x = self.ident()?;
                if self.eat_sym("@") {
                    let r = self.number()?;
                    return Ok(Expr::Delayed(x, r));
                }
                Ok(Expr::Var(x))
            }
            _ => self.err("expected expression"),
        }
    }
}

fn check_components(comps: &[Component]) -> PResult<()> {
    let mut names = BTreeSet::new();
    for c in comps {
        if !names.insert(c.name.clone()) {
            return Err(ParseError::DuplicateComponent(c.name.clone()));
        }
    }
    let mut owner: BTreeMap<String, &str> = BTreeMap::new();
    for c in comps {
        for x in c.body.written_vars() {
            if let Some(prev) = owner.insert(x.clone(), &c.name) {
                return Err(ParseError::DuplicateVariable {
                    var: x,
                    first: prev.to_string(),
                    second: c.name.clone(),
                });
            }
        }
    }
    Ok(())
}
