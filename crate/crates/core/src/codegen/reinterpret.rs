//! Reads emitted SystemC back into a discrete process by matching the
//! statement templates and inlining the helper functions.

use std::collections::BTreeMap;

use super::blocks::{euler_spec, lower, Block, EulerLoop};
use super::cpp::unident;
use super::emit::{EmitUnit, TimeUnit};
use super::templates::{self as tpl, match_at, tokenize, Captures};
use crate::syntax::{BinOp, BoolExpr, CmpOp, CommEvent, Component, Expr, Process, Program};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("reinterpretation failed: {0}")]
pub struct ReinterpretError(pub String);

type Res<T> = Result<T, ReinterpretError>;

fn fail<T>(msg: impl Into<String>) -> Res<T> {
    Err(ReinterpretError(msg.into()))
}

struct Helper {
    params: Vec<String>,
    body: Vec<String>,
    is_bool: bool,
}

struct Ctx {
    helpers: BTreeMap<String, Helper>,
    tables: BTreeMap<String, Vec<CommEvent>>,
}

fn parse_helpers(src: &str) -> Res<BTreeMap<String, Helper>> {
    let toks = tokenize(src);
    let mut out = BTreeMap::new();
    let mut i = 0;
    while i < toks.len() {
        if toks[i] != "inline" {
            i += 1;
            continue;
        }
        let ty = toks.get(i + 1).map(String::as_str);
        let Some(name) = toks.get(i + 2).cloned() else {
            return fail("truncated helper");
        };
        let mut j = i + 4;
        let mut params = Vec::new();
        while toks.get(j).map(String::as_str) == Some("double") {
            params.push(toks[j + 1].clone());
            j += 2;
            if toks.get(j).map(String::as_str) == Some(",") {
                j += 1;
            }
        }
        if toks.get(j..j + 3) != Some(&[")".into(), "{".into(), "return".into()][..]) {
            return fail(format!("malformed helper {name}"));
        }
        j += 3;
        let start = j;
        while j < toks.len() && toks[j] != ";" {
            j += 1;
        }
        out.insert(
            name,
            Helper {
                params,
                body: toks[start..j].to_vec(),
                is_bool: ty == Some("bool"),
            },
        );
        i = j;
    }
    Ok(out)
}

/// Recursive-descent reader for the C++ expressions the emitter writes.
struct ExprReader<'a> {
    toks: &'a [String],
    pos: usize,
    cx: &'a Ctx,
    /// Inside a helper body names are parameters and stay as written.
    params: Option<&'a [String]>,
}

fn is_number(t: &str) -> bool {
    t.starts_with(|c: char| c.is_ascii_digit() || c == '.')
}

fn cmp_op(t: &str) -> Option<CmpOp> {
    Some(match t {
        "<" => CmpOp::Lt,
        "<=" => CmpOp::Le,
        ">" => CmpOp::Gt,
        ">=" => CmpOp::Ge,
        "==" => CmpOp::Eq,
        "!=" => CmpOp::Ne,
        _ => return None,
    })
}

fn number(t: &str) -> Res<f64> {
    t.parse().or_else(|_| fail(format!("bad number {t}")))
}

impl<'a> ExprReader<'a> {
    fn new(toks: &'a [String], cx: &'a Ctx, params: Option<&'a [String]>) -> ExprReader<'a> {
        ExprReader {
            toks,
            pos: 0,
            cx,
            params,
        }
    }

    fn peek(&self) -> Option<&str> {
        self.toks.get(self.pos).map(String::as_str)
    }

    fn peek_at(&self, k: usize) -> Option<&str> {
        self.toks.get(self.pos + k).map(String::as_str)
    }

    fn next(&mut self) -> Res<String> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t.map_or_else(|| fail("unexpected end of expression"), Ok)
    }

    fn expect(&mut self, t: &str) -> Res<()> {
        let got = self.next()?;
        if got == t {
            Ok(())
        } else {
            fail(format!("expected {t}, found {got}"))
        }
    }

    fn finish<T>(&self, v: T) -> Res<T> {
        match self.peek() {
            None => Ok(v),
            Some(t) => fail(format!("trailing token {t} in {}", self.toks.join(" "))),
        }
    }

    fn expr(&mut self) -> Res<Expr> {
        let mut acc = self.term()?;
        while let Some(op @ ("+" | "-")) = self.peek() {
            let op = if op == "+" { BinOp::Add } else { BinOp::Sub };
            self.pos += 1;
            acc = Expr::bin(op, acc, self.term()?);
        }
        Ok(acc)
    }

    fn term(&mut self) -> Res<Expr> {
        let mut acc = self.unary()?;
        while let Some(op @ ("*" | "/")) = self.peek() {
            let op = if op == "*" { BinOp::Mul } else { BinOp::Div };
            self.pos += 1;
            acc = Expr::bin(op, acc, self.unary()?);
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Res<Expr> {
        if self.peek() == Some("-") {
            self.pos += 1;
            if let Some(t) = self.peek().filter(|t| is_number(t)) {
                let c = number(t)?;
                self.pos += 1;
                return Ok(Expr::Num(-c));
            }
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.primary()
    }

    fn args(&mut self) -> Res<Vec<Expr>> {
        self.expect("(")?;
        let mut out = Vec::new();
        if self.peek() == Some(")") {
            self.pos += 1;
            return Ok(out);
        }
        loop {
            out.push(self.expr()?);
            match self.next()?.as_str() {
                "," => continue,
                ")" => return Ok(out),
                t => return fail(format!("unexpected {t} in argument list")),
            }
        }
    }

    fn helper_call(&mut self, name: &str, want_bool: bool) -> Res<Option<Inlined>> {
        let Some(h) = self.cx.helpers.get(name) else {
            return Ok(None);
        };
        if h.is_bool != want_bool || self.peek_at(1) != Some("(") {
            return Ok(None);
        }
        self.pos += 1;
        let args = self.args()?;
        if args.len() != h.params.len() {
            return fail(format!("{name} takes {} arguments", h.params.len()));
        }
        let map: BTreeMap<&str, Expr> = h.params.iter().map(String::as_str).zip(args).collect();
        let sub = |x: &str| map.get(x).cloned();
        let mut r = ExprReader::new(&h.body, self.cx, Some(&h.params));
        Ok(Some(if h.is_bool {
            let b = r.boolean()?;
            Inlined::Bool(r.finish(b)?.substitute(&sub))
        } else {
            let e = r.expr()?;
            Inlined::Num(r.finish(e)?.substitute(&sub))
        }))
    }

    fn primary(&mut self) -> Res<Expr> {
        let t = self.peek().map(str::to_string);
        let Some(t) = t else {
            return fail("unexpected end of expression");
        };
        if is_number(&t) {
            self.pos += 1;
            return Ok(Expr::Num(number(&t)?));
        }
        if t == "(" {
            self.pos += 1;
            let e = self.expr()?;
            self.expect(")")?;
            return Ok(e);
        }
        if let Some(Inlined::Num(e)) = self.helper_call(&t, false)? {
            return Ok(e);
        }
        self.pos += 1;
        match t.as_str() {
            "pow" | "sqrt" if self.peek() == Some("(") => {
                let mut a = self.args()?;
                return match (t.as_str(), a.len()) {
                    ("sqrt", 1) => Ok(Expr::Sqrt(Box::new(a.remove(0)))),
                    ("pow", 2) => {
                        let b = a.remove(1);
                        Ok(Expr::bin(BinOp::Pow, a.remove(0), b))
                    }
                    _ => fail(format!("wrong arity for {t}")),
                };
            }
            _ => {}
        }
        if !t.starts_with(|c: char| c.is_ascii_alphabetic() || c == '_') {
            return fail(format!("unexpected token {t}"));
        }
        if let Some(params) = self.params {
            if !params.contains(&t) {
                return fail(format!("helper body names {t}, which is not a parameter"));
            }
            return Ok(Expr::Var(t));
        }
        if self.peek() == Some(".") && self.peek_at(1) == Some("at") {
            self.pos += 2;
            self.expect("(")?;
            let r = number(&self.next()?)?;
            self.expect(")")?;
            return Ok(Expr::Delayed(unident(&t), r));
        }
        Ok(Expr::Var(unident(&t)))
    }

    fn boolean(&mut self) -> Res<BoolExpr> {
        let mut acc = self.conj()?;
        while self.peek() == Some("||") {
            self.pos += 1;
            acc = BoolExpr::or(acc, self.conj()?);
        }
        Ok(acc)
    }

    fn conj(&mut self) -> Res<BoolExpr> {
        let mut acc = self.negation()?;
        while self.peek() == Some("&&") {
            self.pos += 1;
            acc = BoolExpr::and(acc, self.negation()?);
        }
        Ok(acc)
    }

    fn negation(&mut self) -> Res<BoolExpr> {
        if self.peek() == Some("!") {
            self.pos += 1;
            self.expect("(")?;
            let b = self.boolean()?;
            self.expect(")")?;
            return Ok(BoolExpr::not(b));
        }
        self.atom()
    }

    fn atom(&mut self) -> Res<BoolExpr> {
        match self.peek() {
            Some("true") => {
                self.pos += 1;
                return Ok(BoolExpr::True);
            }
            Some("false") => {
                self.pos += 1;
                return Ok(BoolExpr::False);
            }
            Some("(") => {
                let save = self.pos;
                self.pos += 1;
                if let Ok(b) = self.boolean() {
                    if self.peek() == Some(")") {
                        self.pos += 1;
                        let continues = self
                            .peek()
                            .is_some_and(|t| cmp_op(t).is_some() || matches!(t, "+" | "-" | "*" | "/"));
                        if !continues {
                            return Ok(b);
                        }
                    }
                }
                self.pos = save;
            }
            Some(t) => {
                let t = t.to_string();
                if let Some(Inlined::Bool(b)) = self.helper_call(&t, true)? {
                    return Ok(b);
                }
            }
            None => return fail("unexpected end of condition"),
        }
        let a = self.expr()?;
        let op = self.next()?;
        let Some(op) = cmp_op(&op) else {
            return fail(format!("expected a comparison, found {op}"));
        };
        let b = self.expr()?;
        Ok(BoolExpr::cmp(a, op, b))
    }
}

enum Inlined {
    Bool(BoolExpr),
    Num(Expr),
}

fn ident_of(caps: &Captures, name: &str) -> Res<String> {
    match caps.get(name).map(Vec::as_slice) {
        Some([t]) => Ok(t.clone()),
        other => fail(format!("hole {name} should be one identifier, found {other:?}")),
    }
}

fn count_of(caps: &Captures, name: &str) -> Res<u64> {
    let t = ident_of(caps, name)?;
    t.parse().or_else(|_| fail(format!("bad count {t}")))
}

impl Ctx {
    fn expr(&self, toks: &[String]) -> Res<Expr> {
        let mut r = ExprReader::new(toks, self, None);
        let e = r.expr()?;
        r.finish(e)
    }

    fn boolean(&self, toks: &[String]) -> Res<BoolExpr> {
        let mut r = ExprReader::new(toks, self, None);
        let b = r.boolean()?;
        r.finish(b)
    }

    fn duration(&self, caps: &Captures, d: &str, tu: &str) -> Res<f64> {
        let unit: TimeUnit = ident_of(caps, tu)?
            .parse()
            .or_else(|e: super::emit::UnknownTimeUnit| fail(e.to_string()))?;
        Ok(number(&ident_of(caps, d)?)? / unit.per_sec())
    }

    fn comm_event(&self, toks: &[String]) -> Res<CommEvent> {
        if let Some((caps, end)) = match_at(tpl::RECV, toks, 0) {
            if end == toks.len() {
                return Ok(CommEvent::Input {
                    chan: unident(&ident_of(&caps, "ch")?),
                    var: unident(&ident_of(&caps, "x")?),
                });
            }
        }
        if let Some((caps, end)) = match_at(tpl::SEND, toks, 0) {
            if end == toks.len() {
                return Ok(CommEvent::Output {
                    chan: unident(&ident_of(&caps, "ch")?),
                    expr: self.expr(&caps["e"])?,
                });
            }
        }
        fail(format!("unrecognized communication: {}", toks.join(" ")))
    }

    /// Bodies of consecutive `case` blocks.
    fn cases(toks: &[String]) -> Res<Vec<Vec<String>>> {
        let mut out = Vec::new();
        let mut pos = 0;
        while pos < toks.len() {
            let Some((caps, end)) = match_at(tpl::CASE, toks, pos) else {
                return fail(format!("expected a case at {}", toks[pos..].join(" ")));
            };
            if ident_of(&caps, "j")? != out.len().to_string() {
                return fail("cases out of order");
            }
            out.push(caps["body"].clone());
            pos = end;
        }
        Ok(out)
    }

    fn handlers(&self, caps: &Captures) -> Res<Vec<(CommEvent, Vec<Block>)>> {
        let io = ident_of(caps, "io")?;
        let Some(events) = self.tables.get(&io) else {
            return fail(format!("no member function {io}"));
        };
        let bodies = Ctx::cases(&caps["cases"])?;
        if bodies.len() != events.len() {
            return fail(format!("{io} has {} handlers, dispatch has {}", events.len(), bodies.len()));
        }
        events
            .iter()
            .zip(bodies)
            .map(|(ev, body)| Ok((ev.clone(), self.stmts(&body)?)))
            .collect()
    }

    fn euler_loop(&self, caps: &Captures) -> Res<EulerLoop> {
        let n = self.boolean(&caps["nb"])?;
        let np = self.boolean(&caps["np"])?;
        let steps = count_of(caps, "n")?;
        let wait = self.duration(caps, "h", "tu")?;
        let mut assigns = Vec::new();
        for b in self.stmts(&caps["euler"])? {
            match b {
                Block::Assign(x, e) => assigns.push(Process::Assign(x, e)),
                other => return fail(format!("unexpected {other:?} in an Euler step")),
            }
        }
        let h = match assigns.first() {
            Some(Process::Assign(_, Expr::Bin(BinOp::Add, _, step))) => match &**step {
                Expr::Bin(BinOp::Mul, h, _) => match **h {
                    Expr::Num(h) => h,
                    _ => return fail("Euler step without a literal step size"),
                },
                _ => return fail("malformed Euler step"),
            },
            _ => return fail("malformed Euler step"),
        };
        if (h - wait).abs() > 1e-9 * h.abs().max(1.0) {
            return fail(format!("Euler step {h} disagrees with wait {wait}"));
        }
        let body = Process::seq_all(std::iter::once(Process::Wait(h)).chain(assigns));
        let Some((h, spec)) = euler_spec(&body) else {
            return fail("Euler step does not match x = x + h * f");
        };
        Ok(EulerLoop {
            n,
            np,
            spec,
            h,
            steps,
        })
    }

    fn stmt(&self, toks: &[String], pos: usize) -> Res<(Option<Block>, usize)> {
        let head = toks[pos].as_str();
        let m = |t: &str| match_at(t, toks, pos);
        let (block, (_, end)) = match head {
            "// code for input statement" => {
                let Some(hit) = m(&tpl::input()) else {
                    return fail("malformed input statement");
                };
                let b = Block::Input {
                    chan: unident(&ident_of(&hit.0, "ch")?),
                    var: unident(&ident_of(&hit.0, "x")?),
                };
                (b, hit)
            }
            "// code for output statement" => {
                let Some(hit) = m(&tpl::output()) else {
                    return fail("malformed output statement");
                };
                let b = Block::Output {
                    chan: unident(&ident_of(&hit.0, "ch")?),
                    expr: self.expr(&hit.0["e"])?,
                };
                (b, hit)
            }
            "// code for delayed continuous statement" => {
                let Some(hit) = m(tpl::CONTINUOUS) else {
                    return fail("malformed continuous statement");
                };
                (Block::Continuous(self.euler_loop(&hit.0)?), hit)
            }
            "// code for communication choice statement" => {
                let Some(hit) = m(tpl::CHOICE) else {
                    return fail("malformed communication choice");
                };
                (Block::Choice(self.handlers(&hit.0)?), hit)
            }
            "// code for communication interrupt statement" => {
                let Some(hit) = m(tpl::INTERRUPT) else {
                    return fail("malformed communication interrupt");
                };
                let lp = self.euler_loop(&hit.0)?;
                (Block::Interrupt(lp, self.handlers(&hit.0)?), hit)
            }
            c if c.starts_with("//") => return Ok((None, pos + 1)),
            "if" if toks.get(pos + 2).map(String::as_str) == Some("rand") => {
                let Some(hit) = m(tpl::ICHOICE) else {
                    return fail("malformed nondeterministic choice");
                };
                let b = Block::IChoice(self.stmts(&hit.0["p"])?, self.stmts(&hit.0["q"])?);
                (b, hit)
            }
            "if" => {
                let Some(hit) = m(tpl::GUARD) else {
                    return fail("malformed guard");
                };
                let b = Block::Guard(self.boolean(&hit.0["b"])?, self.stmts(&hit.0["body"])?);
                (b, hit)
            }
            "int" => {
                let Some(hit) = m(tpl::REPEAT) else {
                    return fail("malformed repetition");
                };
                let i = ident_of(&hit.0, "i")?;
                let body = &hit.0["body"];
                let tail = [i, "++".to_string(), ";".to_string()];
                let Some(body) = body.strip_suffix(&tail[..]) else {
                    return fail("repetition body does not end with its increment");
                };
                let b = Block::Repeat(self.stmts(body)?, count_of(&hit.0, "n")?);
                (b, hit)
            }
            "wait" => {
                let Some(hit) = m(tpl::WAIT) else {
                    return fail("malformed wait");
                };
                (Block::Wait(self.duration(&hit.0, "d", "tu")?), hit)
            }
            "return" => {
                let Some(hit) = m(tpl::STOP) else {
                    return fail("malformed return");
                };
                (Block::Stop, hit)
            }
            _ => {
                let Some(hit) = m(tpl::ASSIGN) else {
                    return fail(format!("unrecognized statement at {}", toks[pos..].join(" ")));
                };
                let x = unident(&ident_of(&hit.0, "x")?);
                (Block::Assign(x, self.expr(&hit.0["e"])?), hit)
            }
        };
        Ok((Some(block), end))
    }

    fn stmts(&self, toks: &[String]) -> Res<Vec<Block>> {
        let mut out = Vec::new();
        let mut pos = 0;
        while pos < toks.len() {
            let (b, next) = self.stmt(toks, pos)?;
            out.extend(b);
            pos = next;
        }
        if out.is_empty() {
            out.push(Block::Skip);
        }
        Ok(out)
    }
}

/// Token range of the brace block opening at `open`.
fn brace_block(toks: &[String], open: usize) -> Res<(usize, usize)> {
    let mut depth = 0;
    for (k, t) in toks.iter().enumerate().skip(open) {
        match t.as_str() {
            "{" => depth += 1,
            "}" => {
                depth -= 1;
                if depth == 0 {
                    return Ok((open + 1, k));
                }
            }
            _ => {}
        }
    }
    fail("unbalanced braces")
}

/// The discrete program described by `unit`.
pub fn reinterpret(unit: &EmitUnit) -> Res<Program> {
    let mut cx = Ctx {
        helpers: parse_helpers(&unit.helpers)?,
        tables: BTreeMap::new(),
    };
    let toks = tokenize(&unit.header);
    let mut system = None;
    let mut order = Vec::new();
    let mut bodies: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    let mut i = 0;
    while i < toks.len() {
        let at = |k: usize| toks.get(i + k).map(String::as_str);
        match toks[i].as_str() {
            "SC_MODULE" if at(1) == Some("(") => system = toks.get(i + 2).cloned(),
            "SC_THREAD" if at(1) == Some("(") => order.push(toks[i + 2].clone()),
            "void" => {
                if let Some((caps, end)) = match_at(tpl::IO_FN, &toks, i) {
                    let events = Ctx::cases(&caps["cases"])?
                        .iter()
                        .map(|c| cx.comm_event(c))
                        .collect::<Res<Vec<_>>>()?;
                    cx.tables.insert(ident_of(&caps, "io")?, events);
                    i = end;
                    continue;
                }
                if at(2) == Some("(") && at(3) == Some(")") && at(4) == Some("{") {
                    let range = brace_block(&toks, i + 4)?;
                    bodies.insert(toks[i + 1].clone(), range);
                    i = range.1 + 1;
                    continue;
                }
            }
            _ => {}
        }
        i += 1;
    }
    let Some(system) = system else {
        return fail("no SC_MODULE");
    };
    let mut comps = Vec::new();
    for name in order {
        let Some(&(a, b)) = bodies.get(&name) else {
            return fail(format!("thread {name} has no body"));
        };
        let body = lower(&cx.stmts(&toks[a..b])?);
        comps.push(Component {
            name: unident(&name),
            body,
        });
    }
    let body = match comps.as_slice() {
        [c] if c.name == "main" => c.body.clone(),
        _ => Process::Parallel(comps),
    };
    Ok(Program {
        name: unident(&system),
        body,
    })
}
