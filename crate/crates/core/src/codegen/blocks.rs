//! Statement-level view of a discretized process, grouping the readiness
//! handshakes and Euler loops that map onto one code template.

use crate::discretize::{
    choice_handshake, euler_loop, input_handshake, interrupt_loop, output_handshake, set_flags,
    own_flags, waiting_condition,
};
use crate::syntax::{BinOp, BoolExpr, CommEvent, DdeSpec, Expr, Process};

#[derive(Debug, Clone, PartialEq)]
pub struct EulerLoop {
    /// `N(B, eps)`.
    pub n: BoolExpr,
    /// `N'(B, eps)`.
    pub np: BoolExpr,
    pub spec: DdeSpec,
    pub h: f64,
    pub steps: u64,
}

impl EulerLoop {
    pub fn guard(&self) -> BoolExpr {
        crate::discretize::and_simpl(self.n.clone(), self.np.clone())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Block {
    Skip,
    Stop,
    Assign(String, Expr),
    Wait(f64),
    Guard(BoolExpr, Vec<Block>),
    IChoice(Vec<Block>, Vec<Block>),
    Repeat(Vec<Block>, u64),
    Input { chan: String, var: String },
    Output { chan: String, expr: Expr },
    Choice(Vec<(CommEvent, Vec<Block>)>),
    Continuous(EulerLoop),
    Interrupt(EulerLoop, Vec<(CommEvent, Vec<Block>)>),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CodegenError {
    #[error("cannot generate code for {0}")]
    UnsupportedNode(String),
}

fn split_guard(g: &BoolExpr) -> (BoolExpr, BoolExpr) {
    match g {
        BoolExpr::And(a, b) => ((**a).clone(), (**b).clone()),
        other => (other.clone(), BoolExpr::True),
    }
}

/// `(x, f)` from `x := x + h * (f)`.
fn euler_update(p: &Process, h: f64) -> Option<(String, String, Expr)> {
    let Process::Assign(target, Expr::Bin(BinOp::Add, x, step)) = p else {
        return None;
    };
    let Expr::Var(x) = &**x else { return None };
    let Expr::Bin(BinOp::Mul, hh, f) = &**step else {
        return None;
    };
    (**hh == Expr::Num(h)).then(|| (target.clone(), x.clone(), (**f).clone()))
}

/// Recovers the system of one Euler step `wait h; x := x + h * f`.
pub(crate) fn euler_spec(body: &Process) -> Option<(f64, DdeSpec)> {
    let stmts = body.flatten_seq();
    let (Process::Wait(h), rest) = stmts.split_first()? else {
        return None;
    };
    let h = *h;
    if rest.len() == 1 {
        let (target, x, f) = euler_update(rest[0], h)?;
        return (target == x).then(|| (h, DdeSpec::scalar(&x, f)));
    }
    let half = rest.len() / 2;
    let mut vars = Vec::new();
    let mut rhs = Vec::new();
    for p in &rest[..half] {
        let (target, x, f) = euler_update(p, h)?;
        if target != format!("{x}_next") {
            return None;
        }
        vars.push(x);
        rhs.push(f);
    }
    Some((h, DdeSpec::new(vars, rhs)))
}

fn strip_resets(hs: &[(CommEvent, Process)]) -> Option<Vec<(CommEvent, Process)>> {
    let reset = set_flags(&own_flags(hs), 0.0);
    hs.iter()
        .map(|(ev, q)| match q {
            Process::Seq(a, b) if **a == reset => Some((ev.clone(), (**b).clone())),
            _ => None,
        })
        .collect()
}

fn handler_blocks(hs: Vec<(CommEvent, Process)>) -> Result<Vec<(CommEvent, Vec<Block>)>, CodegenError> {
    hs.into_iter()
        .map(|(ev, q)| Ok((ev, blocks(&q)?)))
        .collect()
}

fn as_input(p: &Process) -> Option<Block> {
    let stmts = p.flatten_seq();
    let [_, Process::Input(chan, var), _] = stmts.as_slice() else {
        return None;
    };
    (input_handshake(chan, var) == *p).then(|| Block::Input {
        chan: chan.clone(),
        var: var.clone(),
    })
}

fn as_output(p: &Process) -> Option<Block> {
    let stmts = p.flatten_seq();
    let [_, Process::Output(chan, e), _] = stmts.as_slice() else {
        return None;
    };
    (output_handshake(chan, e.clone()) == *p).then(|| Block::Output {
        chan: chan.clone(),
        expr: e.clone(),
    })
}

fn as_choice(p: &Process) -> Result<Option<Block>, CodegenError> {
    let Process::Seq(_, b) = p else { return Ok(None) };
    let Process::CommChoice(hs) = &**b else {
        return Ok(None);
    };
    let Some(inner) = strip_resets(hs) else {
        return Ok(None);
    };
    if choice_handshake(inner.clone()) != *p {
        return Ok(None);
    }
    Ok(Some(Block::Choice(handler_blocks(inner)?)))
}

fn as_continuous(p: &Process) -> Option<Block> {
    let Process::Seq(a, _) = p else { return None };
    let Process::Repeat(body, steps) = &**a else {
        return None;
    };
    let Process::Guard(g, step) = &**body else {
        return None;
    };
    let (h, spec) = euler_spec(step)?;
    let (n, np) = split_guard(g);
    if euler_loop(g.clone(), &spec, h, *steps) != *p {
        return None;
    }
    Some(Block::Continuous(EulerLoop {
        n,
        np,
        spec,
        h,
        steps: *steps,
    }))
}

fn as_interrupt(p: &Process) -> Result<Option<Block>, CodegenError> {
    let stmts = p.flatten_seq();
    let Some(Process::Guard(_, choice)) = stmts.iter().rev().nth(1) else {
        return Ok(None);
    };
    let Process::CommChoice(hs) = &**choice else {
        return Ok(None);
    };
    let Some(inner) = strip_resets(hs) else {
        return Ok(None);
    };
    let Some(Process::Repeat(body, steps)) = stmts.iter().find(|q| matches!(q, Process::Repeat(..)))
    else {
        return Ok(None);
    };
    let Process::Guard(g1, step) = &**body else {
        return Ok(None);
    };
    let Some((h, spec)) = euler_spec(step) else {
        return Ok(None);
    };
    let waiting = waiting_condition(&inner);
    let g = match g1 {
        w if *w == waiting => BoolExpr::True,
        BoolExpr::And(g, w) if **w == waiting => (**g).clone(),
        _ => return Ok(None),
    };
    if interrupt_loop(g.clone(), &spec, h, *steps, inner.clone()) != *p {
        return Ok(None);
    }
    let (n, np) = split_guard(&g);
    let lp = EulerLoop {
        n,
        np,
        spec,
        h,
        steps: *steps,
    };
    Ok(Some(Block::Interrupt(lp, handler_blocks(inner)?)))
}

/// Groups `p` into code-generation units.
pub fn blocks(p: &Process) -> Result<Vec<Block>, CodegenError> {
    if let Some(b) = as_input(p).or_else(|| as_output(p)).or_else(|| as_continuous(p)) {
        return Ok(vec![b]);
    }
    if let Some(b) = as_choice(p)? {
        return Ok(vec![b]);
    }
    if let Some(b) = as_interrupt(p)? {
        return Ok(vec![b]);
    }
    Ok(match p {
        Process::Skip => vec![Block::Skip],
        Process::Stop => vec![Block::Stop],
        Process::Assign(x, e) => vec![Block::Assign(x.clone(), e.clone())],
        Process::Wait(d) => vec![Block::Wait(*d)],
        Process::Input(ch, x) => vec![Block::Input {
            chan: ch.clone(),
            var: x.clone(),
        }],
        Process::Output(ch, e) => vec![Block::Output {
            chan: ch.clone(),
            expr: e.clone(),
        }],
        Process::Seq(a, b) => {
            let mut out = blocks(a)?;
            out.extend(blocks(b)?);
            out
        }
        Process::Guard(g, q) => vec![Block::Guard(g.clone(), blocks(q)?)],
        Process::IChoice(a, b) => vec![Block::IChoice(blocks(a)?, blocks(b)?)],
        Process::Repeat(q, n) => vec![Block::Repeat(blocks(q)?, *n)],
        Process::CommChoice(hs) => vec![Block::Choice(handler_blocks(hs.clone())?)],
        Process::Dde(..) | Process::DdeInterrupt(..) => {
            return Err(CodegenError::UnsupportedNode(
                "continuous statement; discretize first".into(),
            ))
        }
        Process::Parallel(_) => {
            return Err(CodegenError::UnsupportedNode("nested parallel composition".into()))
        }
    })
}

fn lower_handlers(hs: &[(CommEvent, Vec<Block>)]) -> Vec<(CommEvent, Process)> {
    hs.iter().map(|(ev, q)| (ev.clone(), lower(q))).collect()
}

/// Inverse of [`blocks`].
pub fn lower(bs: &[Block]) -> Process {
    Process::seq_all(bs.iter().map(|b| match b {
        Block::Skip => Process::Skip,
        Block::Stop => Process::Stop,
        Block::Assign(x, e) => Process::Assign(x.clone(), e.clone()),
        Block::Wait(d) => Process::Wait(*d),
        Block::Guard(g, q) => Process::guard(g.clone(), lower(q)),
        Block::IChoice(a, c) => Process::ichoice(lower(a), lower(c)),
        Block::Repeat(q, n) => Process::repeat(lower(q), *n),
        Block::Input { chan, var } => input_handshake(chan, var),
        Block::Output { chan, expr } => output_handshake(chan, expr.clone()),
        Block::Choice(hs) => choice_handshake(lower_handlers(hs)),
        Block::Continuous(l) => euler_loop(l.guard(), &l.spec, l.h, l.steps),
        Block::Interrupt(l, hs) => interrupt_loop(l.guard(), &l.spec, l.h, l.steps, lower_handlers(hs)),
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::discretize;
    use crate::syntax::parse;

    fn round_trip(src: &str) -> Vec<Block> {
        let q = discretize(&parse(src).unwrap(), 0.1, 0.2, 1.0).unwrap();
        let bs = blocks(&q).unwrap();
        assert_eq!(lower(&bs), q);
        bs
    }

    #[test]
    fn handshakes_are_grouped() {
        let bs = round_trip("ch?x; ch!x + 1");
        assert_eq!(bs.len(), 2);
        assert!(matches!(&bs[0], Block::Input { chan, var } if chan == "ch" && var == "x"));
        assert!(matches!(&bs[1], Block::Output { .. }));
    }

    #[test]
    fn euler_loops_are_grouped() {
        let bs = round_trip("x := 1; <x' = -x & x > 0.5>; y := 2");
        assert_eq!(bs.len(), 3);
        let Block::Continuous(l) = &bs[1] else { panic!("{bs:?}") };
        assert_eq!(l.steps, 10);
        assert_eq!(l.h, 0.1);
        assert_eq!(l.spec.vars, vec!["x".to_string()]);
        assert_ne!(l.np, BoolExpr::True);
    }

    #[test]
    fn vector_loops_are_grouped() {
        let bs = round_trip("<x' = y, y' = -x & true>");
        let Block::Continuous(l) = &bs[0] else { panic!("{bs:?}") };
        assert_eq!(l.spec.dim(), 2);
    }

    #[test]
    fn choices_and_interrupts_are_grouped() {
        let bs = round_trip("select [a?x -> (skip), b!1 -> (c?y)]");
        let Block::Choice(hs) = &bs[0] else { panic!("{bs:?}") };
        assert_eq!(hs.len(), 2);
        assert!(matches!(hs[1].1[0], Block::Input { .. }));
        let bs = round_trip("<x' = 1 & x < 3> |> [a?x -> (skip), b!x -> (c?y)]");
        assert_eq!(bs.len(), 1);
        assert!(matches!(&bs[0], Block::Interrupt(_, hs) if hs.len() == 2));
        let bs = round_trip("<x' = 1 & true> |> [a!x -> (skip)]");
        assert!(matches!(&bs[0], Block::Interrupt(l, _) if l.n == BoolExpr::True));
    }

    #[test]
    fn continuous_statements_are_rejected() {
        let err = blocks(&parse("<x' = 1 & true>").unwrap()).unwrap_err();
        assert!(matches!(err, CodegenError::UnsupportedNode(_)));
    }
}
