use std::collections::HashMap;

use crate::syntax::{
    BinOp, BoolExpr, CmpOp, CommEvent, DdeSpec, EvalError, Expr, Process,
};
use crate::Ticks;

pub type NodeId = usize;

/// Expression with variables resolved to slots.
#[derive(Debug, Clone)]
pub enum CExpr {
    Num(f64),
    Var(usize),
    Delayed(usize, f64),
    Neg(Box<CExpr>),
    Bin(BinOp, Box<CExpr>, Box<CExpr>),
    Sqrt(Box<CExpr>),
}

impl CExpr {
    pub fn eval(
        &self,
        cur: &impl Fn(usize) -> f64,
        del: &impl Fn(usize, f64) -> f64,
    ) -> Result<f64, EvalError> {
        Ok(match self {
            CExpr::Num(c) => *c,
            CExpr::Var(i) => cur(*i),
            CExpr::Delayed(i, r) => del(*i, *r),
            CExpr::Neg(a) => -a.eval(cur, del)?,
            CExpr::Sqrt(a) => {
                let v = a.eval(cur, del)?;
                if v < 0.0 {
                    return Err(EvalError::SqrtNegative(v));
                }
                v.sqrt()
            }
            CExpr::Bin(op, a, b) => {
                let x = a.eval(cur, del)?;
                let y = b.eval(cur, del)?;
                match op {
                    BinOp::Add => x + y,
                    BinOp::Sub => x - y,
                    BinOp::Mul => x * y,
                    BinOp::Div => {
                        if y == 0.0 {
                            return Err(EvalError::DivByZero);
                        }
                        x / y
                    }
                    BinOp::Pow => {
                        let v = x.powf(y);
                        if v.is_nan() || (v.is_infinite() && x.is_finite() && y.is_finite()) {
                            return Err(EvalError::PowDomain(x, y));
                        }
                        v
                    }
                }
            }
        })
    }
}

#[derive(Debug, Clone)]
pub enum CBool {
    True,
    False,
    Cmp(CExpr, CmpOp, CExpr),
    Not(Box<CBool>),
    And(Box<CBool>, Box<CBool>),
    Or(Box<CBool>, Box<CBool>),
}

impl CBool {
    pub fn eval(
        &self,
        cur: &impl Fn(usize) -> f64,
        del: &impl Fn(usize, f64) -> f64,
    ) -> Result<bool, EvalError> {
        Ok(match self {
            CBool::True => true,
            CBool::False => false,
            CBool::Cmp(a, op, b) => op.holds(a.eval(cur, del)?, b.eval(cur, del)?),
            CBool::Not(a) => !a.eval(cur, del)?,
            CBool::And(a, b) => a.eval(cur, del)? && b.eval(cur, del)?,
            CBool::Or(a, b) => a.eval(cur, del)? || b.eval(cur, del)?,
        })
    }

    /// `|lhs - rhs|` for every ordering atom; equality atoms are skipped.
    pub fn atom_margins(
        &self,
        cur: &impl Fn(usize) -> f64,
        del: &impl Fn(usize, f64) -> f64,
        out: &mut Vec<f64>,
    ) -> Result<(), EvalError> {
        match self {
            CBool::True | CBool::False => {}
            CBool::Cmp(_, CmpOp::Eq | CmpOp::Ne, _) => {}
            CBool::Cmp(a, _, b) => out.push((a.eval(cur, del)? - b.eval(cur, del)?).abs()),
            CBool::Not(a) => a.atom_margins(cur, del, out)?,
            CBool::And(a, b) | CBool::Or(a, b) => {
                a.atom_margins(cur, del, out)?;
                b.atom_margins(cur, del, out)?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub enum CEvent {
    Input { chan: usize, var: usize },
    Output { chan: usize, expr: CExpr },
}

impl CEvent {
    pub fn chan(&self) -> usize {
        match self {
            CEvent::Input { chan, .. } | CEvent::Output { chan, .. } => *chan,
        }
    }

    pub fn is_output(&self) -> bool {
        matches!(self, CEvent::Output { .. })
    }
}

#[derive(Debug, Clone)]
pub struct CDde {
    pub vars: Vec<usize>,
    pub rhs: Vec<CExpr>,
    pub dom: CBool,
    pub spec: DdeSpec,
    pub dom_src: BoolExpr,
}

#[derive(Debug, Clone)]
pub enum Node {
    Skip,
    Stop,
    Assign { var: usize, expr: CExpr, src: Expr },
    Wait(Ticks),
    Input { chan: usize, var: usize },
    Output { chan: usize, expr: CExpr },
    Seq(NodeId, NodeId),
    Guard { cond: CBool, body: NodeId, src: BoolExpr },
    IChoice(NodeId, NodeId),
    Repeat(NodeId, u64),
    Choice(Vec<(CEvent, NodeId)>),
    Dde { dde: CDde, handlers: Vec<(CEvent, NodeId)> },
}

/// A process lowered to an arena of nodes with resolved variable and channel slots.
#[derive(Debug, Clone)]
pub struct Compiled {
    pub vars: Vec<String>,
    pub chans: Vec<String>,
    pub nodes: Vec<Node>,
    /// Component names and root nodes.
    pub roots: Vec<(String, NodeId)>,
    pub delay: Option<f64>,
    var_index: HashMap<String, usize>,
    chan_index: HashMap<String, usize>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CompileError {
    #[error("nested parallel composition")]
    NestedParallel,
}

impl Compiled {
    pub fn new(p: &Process) -> Result<Compiled, CompileError> {
        let vars = p.all_vars();
        let var_index = vars.iter().enumerate().map(|(i, v)| (v.clone(), i)).collect();
        let (ins, outs) = p.channel_uses();
        let mut chans: Vec<String> = ins.union(&outs).cloned().collect();
        chans.sort();
        let chan_index = chans.iter().enumerate().map(|(i, c)| (c.clone(), i)).collect();
        let mut c = Compiled {
            vars,
            chans,
            nodes: Vec::new(),
            roots: Vec::new(),
            delay: p.delay(),
            var_index,
            chan_index,
        };
        for comp in p.components() {
            let root = c.lower(&comp.body)?;
            c.roots.push((comp.name.clone(), root));
        }
        Ok(c)
    }

    pub fn var(&self, name: &str) -> Option<usize> {
        self.var_index.get(name).copied()
    }

    pub fn chan(&self, name: &str) -> Option<usize> {
        self.chan_index.get(name).copied()
    }

    fn push(&mut self, n: Node) -> NodeId {
        self.nodes.push(n);
        self.nodes.len() - 1
    }

    pub fn expr(&self, e: &Expr) -> CExpr {
        match e {
            Expr::Num(c) => CExpr::Num(*c),
            Expr::Var(x) => CExpr::Var(self.var_index[x]),
            Expr::Delayed(x, r) => CExpr::Delayed(self.var_index[x], *r),
            Expr::Neg(a) => CExpr::Neg(Box::new(self.expr(a))),
            Expr::Sqrt(a) => CExpr::Sqrt(Box::new(self.expr(a))),
            Expr::Bin(op, a, b) => CExpr::Bin(*op, Box::new(self.expr(a)), Box::new(self.expr(b))),
        }
    }

    pub fn bool(&self, b: &BoolExpr) -> CBool {
        match b {
            BoolExpr::True => CBool::True,
            BoolExpr::False => CBool::False,
            BoolExpr::Cmp(a, op, c) => CBool::Cmp(self.expr(a), *op, self.expr(c)),
            BoolExpr::Not(a) => CBool::Not(Box::new(self.bool(a))),
            BoolExpr::And(a, c) => CBool::And(Box::new(self.bool(a)), Box::new(self.bool(c))),
            BoolExpr::Or(a, c) => CBool::Or(Box::new(self.bool(a)), Box::new(self.bool(c))),
        }
    }

    fn event(&self, ev: &CommEvent) -> CEvent {
        match ev {
            CommEvent::Input { chan, var } => CEvent::Input {
                chan: self.chan_index[chan],
                var: self.var_index[var],
            },
            CommEvent::Output { chan, expr } => CEvent::Output {
                chan: self.chan_index[chan],
                expr: self.expr(expr),
            },
        }
    }

    fn handlers(&mut self, hs: &[(CommEvent, Process)]) -> Result<Vec<(CEvent, NodeId)>, CompileError> {
        let mut out = Vec::new();
        for (ev, q) in hs {
            let ev = self.event(ev);
            let body = self.lower(q)?;
            out.push((ev, body));
        }
        Ok(out)
    }

    fn lower(&mut self, p: &Process) -> Result<NodeId, CompileError> {
        let node = match p {
            Process::Skip => Node::Skip,
            Process::Stop => Node::Stop,
            Process::Assign(x, e) => Node::Assign {
                var: self.var_index[x],
                expr: self.expr(e),
                src: e.clone(),
            },
            Process::Wait(d) => Node::Wait(Ticks::from_secs(*d)),
            Process::Input(ch, x) => Node::Input {
                chan: self.chan_index[ch],
                var: self.var_index[x],
            },
            Process::Output(ch, e) => Node::Output {
                chan: self.chan_index[ch],
                expr: self.expr(e),
            },
            Process::Seq(a, b) => {
                let a = self.lower(a)?;
                let b = self.lower(b)?;
                Node::Seq(a, b)
            }
            Process::Guard(b, q) => {
                let body = self.lower(q)?;
                Node::Guard {
                    cond: self.bool(b),
                    body,
                    src: b.clone(),
                }
            }
            Process::IChoice(a, b) => {
                let a = self.lower(a)?;
                let b = self.lower(b)?;
                Node::IChoice(a, b)
            }
            Process::Repeat(q, n) => {
                let body = self.lower(q)?;
                Node::Repeat(body, *n)
            }
            Process::CommChoice(hs) => Node::Choice(self.handlers(hs)?),
            Process::Dde(spec, dom) | Process::DdeInterrupt(spec, dom, _) => {
                let handlers = match p {
                    Process::DdeInterrupt(_, _, hs) => self.handlers(hs)?,
                    _ => Vec::new(),
                };
                Node::Dde {
                    dde: CDde {
                        vars: spec.vars.iter().map(|x| self.var_index[x]).collect(),
                        rhs: spec.rhs.iter().map(|e| self.expr(e)).collect(),
                        dom: self.bool(dom),
                        spec: spec.clone(),
                        dom_src: dom.clone(),
                    },
                    handlers,
                }
            }
            Process::Parallel(_) => return Err(CompileError::NestedParallel),
        };
        Ok(self.push(node))
    }

    pub fn has_dde(&self) -> bool {
        self.nodes.iter().any(|n| matches!(n, Node::Dde { .. }))
    }
}
