use std::collections::BTreeSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(String),
    /// `x@r`: value of `x` at `now - r`.
    Delayed(String, f64),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Sqrt(Box<Expr>),
}

impl Expr {
    pub fn num(c: f64) -> Expr {
        Expr::Num(c)
    }

    pub fn var(name: &str) -> Expr {
        Expr::Var(name.to_string())
    }

    pub fn delayed(name: &str, r: f64) -> Expr {
        Expr::Delayed(name.to_string(), r)
    }

    pub fn bin(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr::Bin(op, Box::new(a), Box::new(b))
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        Expr::bin(BinOp::Add, a, b)
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        Expr::bin(BinOp::Sub, a, b)
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        Expr::bin(BinOp::Mul, a, b)
    }

    /// Calls `f` on every node, parents first.
    pub fn visit(&self, f: &mut impl FnMut(&Expr)) {
        f(self);
        match self {
            Expr::Num(_) | Expr::Var(_) | Expr::Delayed(..) => {}
            Expr::Neg(a) | Expr::Sqrt(a) => a.visit(f),
            Expr::Bin(_, a, b) => {
                a.visit(f);
                b.visit(f);
            }
        }
    }

    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |e| {
            if let Expr::Var(x) = e {
                out.insert(x.clone());
            }
        });
        out
    }

    pub fn delayed_refs(&self) -> Vec<(String, f64)> {
        let mut out = Vec::new();
        self.visit(&mut |e| {
            if let Expr::Delayed(x, r) = e {
                out.push((x.clone(), *r));
            }
        });
        out
    }

    /// Replaces every `Var(x)` by `f(x)` when it returns `Some`.
    pub fn substitute(&self, f: &impl Fn(&str) -> Option<Expr>) -> Expr {
        match self {
            Expr::Var(x) => f(x).unwrap_or_else(|| self.clone()),
            Expr::Num(_) | Expr::Delayed(..) => self.clone(),
            Expr::Neg(a) => Expr::Neg(Box::new(a.substitute(f))),
            Expr::Sqrt(a) => Expr::Sqrt(Box::new(a.substitute(f))),
            Expr::Bin(op, a, b) => Expr::bin(*op, a.substitute(f), b.substitute(f)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
        }
    }

    pub fn negate(self) -> CmpOp {
        match self {
            CmpOp::Lt => CmpOp::Ge,
            CmpOp::Le => CmpOp::Gt,
            CmpOp::Gt => CmpOp::Le,
            CmpOp::Ge => CmpOp::Lt,
            CmpOp::Eq => CmpOp::Ne,
            CmpOp::Ne => CmpOp::Eq,
        }
    }

    pub fn holds(self, a: f64, b: f64) -> bool {
        match self {
            CmpOp::Lt => a < b,
            CmpOp::Le => a <= b,
            CmpOp::Gt => a > b,
            CmpOp::Ge => a >= b,
            CmpOp::Eq => a == b,
            CmpOp::Ne => a != b,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BoolExpr {
    True,
    False,
    Cmp(Expr, CmpOp, Expr),
    Not(Box<BoolExpr>),
    And(Box<BoolExpr>, Box<BoolExpr>),
    Or(Box<BoolExpr>, Box<BoolExpr>),
}

impl BoolExpr {
    pub fn cmp(a: Expr, op: CmpOp, b: Expr) -> BoolExpr {
        BoolExpr::Cmp(a, op, b)
    }

    pub fn and(a: BoolExpr, b: BoolExpr) -> BoolExpr {
        BoolExpr::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: BoolExpr, b: BoolExpr) -> BoolExpr {
        BoolExpr::Or(Box::new(a), Box::new(b))
    }

    pub fn not(a: BoolExpr) -> BoolExpr {
        BoolExpr::Not(Box::new(a))
    }

    /// Left-nested conjunction; `True` for an empty list.
    pub fn all(items: impl IntoIterator<Item = BoolExpr>) -> BoolExpr {
        items
            .into_iter()
            .reduce(BoolExpr::and)
            .unwrap_or(BoolExpr::True)
    }

    pub fn visit_exprs(&self, f: &mut impl FnMut(&Expr)) {
        match self {
            BoolExpr::True | BoolExpr::False => {}
            BoolExpr::Cmp(a, _, b) => {
                a.visit(f);
                b.visit(f);
            }
            BoolExpr::Not(a) => a.visit_exprs(f),
            BoolExpr::And(a, b) | BoolExpr::Or(a, b) => {
                a.visit_exprs(f);
                b.visit_exprs(f);
            }
        }
    }

    pub fn atoms(&self) -> Vec<(&Expr, CmpOp, &Expr)> {
        let mut out = Vec::new();
        fn go<'a>(b: &'a BoolExpr, out: &mut Vec<(&'a Expr, CmpOp, &'a Expr)>) {
            match b {
                BoolExpr::True | BoolExpr::False => {}
                BoolExpr::Cmp(a, op, c) => out.push((a, *op, c)),
                BoolExpr::Not(a) => go(a, out),
                BoolExpr::And(a, c) | BoolExpr::Or(a, c) => {
                    go(a, out);
                    go(c, out);
                }
            }
        }
        go(self, &mut out);
        out
    }

    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit_exprs(&mut |e| {
            if let Expr::Var(x) = e {
                out.insert(x.clone());
            }
        });
        out
    }

    pub fn delayed_refs(&self) -> Vec<(String, f64)> {
        let mut out = Vec::new();
        self.visit_exprs(&mut |e| {
            if let Expr::Delayed(x, r) = e {
                out.push((x.clone(), *r));
            }
        });
        out
    }

    pub fn substitute(&self, f: &impl Fn(&str) -> Option<Expr>) -> BoolExpr {
        match self {
            BoolExpr::True | BoolExpr::False => self.clone(),
            BoolExpr::Cmp(a, op, b) => BoolExpr::Cmp(a.substitute(f), *op, b.substitute(f)),
            BoolExpr::Not(a) => BoolExpr::not(a.substitute(f)),
            BoolExpr::And(a, b) => BoolExpr::and(a.substitute(f), b.substitute(f)),
            BoolExpr::Or(a, b) => BoolExpr::or(a.substitute(f), b.substitute(f)),
        }
    }

    /// Pushes negations down to the atoms.
    pub fn nnf(&self) -> BoolExpr {
        self.nnf_polar(false)
    }

    fn nnf_polar(&self, negate: bool) -> BoolExpr {
        match (self, negate) {
            (BoolExpr::True, false) | (BoolExpr::False, true) => BoolExpr::True,
            (BoolExpr::True, true) | (BoolExpr::False, false) => BoolExpr::False,
            (BoolExpr::Cmp(a, op, b), n) => {
                let op = if n { op.negate() } else { *op };
                BoolExpr::Cmp(a.clone(), op, b.clone())
            }
            (BoolExpr::Not(a), n) => a.nnf_polar(!n),
            (BoolExpr::And(a, b), false) => BoolExpr::and(a.nnf_polar(false), b.nnf_polar(false)),
            (BoolExpr::And(a, b), true) => BoolExpr::or(a.nnf_polar(true), b.nnf_polar(true)),
            (BoolExpr::Or(a, b), false) => BoolExpr::or(a.nnf_polar(false), b.nnf_polar(false)),
            (BoolExpr::Or(a, b), true) => BoolExpr::and(a.nnf_polar(true), b.nnf_polar(true)),
        }
    }
}

/// One side of a communication offered by a choice or an interrupt.
#[derive(Debug, Clone, PartialEq)]
pub enum CommEvent {
    Input { chan: String, var: String },
    Output { chan: String, expr: Expr },
}

impl CommEvent {
    pub fn chan(&self) -> &str {
        match self {
            CommEvent::Input { chan, .. } | CommEvent::Output { chan, .. } => chan,
        }
    }

    pub fn is_input(&self) -> bool {
        matches!(self, CommEvent::Input { .. })
    }

    pub fn to_process(&self) -> Process {
        match self {
            CommEvent::Input { chan, var } => Process::Input(chan.clone(), var.clone()),
            CommEvent::Output { chan, expr } => Process::Output(chan.clone(), expr.clone()),
        }
    }
}

/// Right-hand side of a (possibly vector) delay differential equation.
#[derive(Debug, Clone, PartialEq)]
pub struct DdeSpec {
    pub vars: Vec<String>,
    pub rhs: Vec<Expr>,
}

impl DdeSpec {
    pub fn new(vars: Vec<String>, rhs: Vec<Expr>) -> DdeSpec {
        assert_eq!(vars.len(), rhs.len(), "one rhs per variable");
        DdeSpec { vars, rhs }
    }

    pub fn scalar(var: &str, rhs: Expr) -> DdeSpec {
        DdeSpec::new(vec![var.to_string()], vec![rhs])
    }

    pub fn dim(&self) -> usize {
        self.vars.len()
    }

    /// The delay constant used by the right-hand side, if any.
    pub fn delay(&self) -> Option<f64> {
        self.rhs
            .iter()
            .flat_map(|e| e.delayed_refs())
            .map(|(_, r)| r)
            .next()
    }

    pub fn index_of(&self, var: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == var)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub name: String,
    pub body: Process,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Process {
    Skip,
    /// Terminates the component without deadlock.
    Stop,
    Assign(String, Expr),
    Wait(f64),
    Input(String, String),
    Output(String, Expr),
    Seq(Box<Process>, Box<Process>),
    Guard(BoolExpr, Box<Process>),
    IChoice(Box<Process>, Box<Process>),
    Repeat(Box<Process>, u64),
    CommChoice(Vec<(CommEvent, Process)>),
    Dde(DdeSpec, BoolExpr),
    DdeInterrupt(DdeSpec, BoolExpr, Vec<(CommEvent, Process)>),
    Parallel(Vec<Component>),
}

impl Process {
    pub fn seq(a: Process, b: Process) -> Process {
        Process::Seq(Box::new(a), Box::new(b))
    }

    /// Right-nested sequence; `Skip` for an empty list.
    pub fn seq_all(items: impl IntoIterator<Item = Process>) -> Process {
        let mut items: Vec<Process> = items.into_iter().collect();
        let Some(mut acc) = items.pop() else {
            return Process::Skip;
        };
        while let Some(p) = items.pop() {
            acc = Process::seq(p, acc);
        }
        acc
    }

    pub fn guard(b: BoolExpr, p: Process) -> Process {
        Process::Guard(b, Box::new(p))
    }

    pub fn ichoice(a: Process, b: Process) -> Process {
        Process::IChoice(Box::new(a), Box::new(b))
    }

    pub fn repeat(p: Process, n: u64) -> Process {
        Process::Repeat(Box::new(p), n)
    }

    pub fn assign(x: &str, e: Expr) -> Process {
        Process::Assign(x.to_string(), e)
    }

    /// Flattens nested `Seq` nodes into a statement list.
    pub fn flatten_seq(&self) -> Vec<&Process> {
        let mut out = Vec::new();
        fn go<'a>(p: &'a Process, out: &mut Vec<&'a Process>) {
            match p {
                Process::Seq(a, b) => {
                    go(a, out);
                    go(b, out);
                }
                other => out.push(other),
            }
        }
        go(self, &mut out);
        out
    }

    /// Sequential components: the parallel branches, or the process itself.
    pub fn components(&self) -> Vec<Component> {
        match self {
            Process::Parallel(cs) => cs.clone(),
            p => vec![Component {
                name: "main".to_string(),
                body: p.clone(),
            }],
        }
    }

    /// Calls `f` on every sub-process, parents first.
    pub fn visit(&self, f: &mut impl FnMut(&Process)) {
        f(self);
        match self {
            Process::Skip
            | Process::Stop
            | Process::Assign(..)
            | Process::Wait(_)
            | Process::Input(..)
            | Process::Output(..)
            | Process::Dde(..) => {}
            Process::Seq(a, b) | Process::IChoice(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            Process::Guard(_, a) | Process::Repeat(a, _) => a.visit(f),
            Process::CommChoice(hs) | Process::DdeInterrupt(_, _, hs) => {
                for (_, q) in hs {
                    q.visit(f);
                }
            }
            Process::Parallel(cs) => {
                for c in cs {
                    c.body.visit(f);
                }
            }
        }
    }

    /// Variables written by assignment, input, or continuous evolution.
    pub fn written_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |p| match p {
            Process::Assign(x, _) | Process::Input(_, x) => {
                out.insert(x.clone());
            }
            Process::Dde(spec, _) | Process::DdeInterrupt(spec, _, _) => {
                out.extend(spec.vars.iter().cloned());
            }
            _ => {}
        });
        self.visit(&mut |p| {
            if let Process::CommChoice(hs) | Process::DdeInterrupt(_, _, hs) = p {
                for (ev, _) in hs {
                    if let CommEvent::Input { var, .. } = ev {
                        out.insert(var.clone());
                    }
                }
            }
        });
        out
    }

    /// Variables evolved by some continuous statement.
    pub fn continuous_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |p| {
            if let Process::Dde(spec, _) | Process::DdeInterrupt(spec, _, _) = p {
                out.extend(spec.vars.iter().cloned());
            }
        });
        out
    }

    /// All variables mentioned anywhere, in first-seen order.
    pub fn all_vars(&self) -> Vec<String> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        let mut push = |x: &str| {
            if seen.insert(x.to_string()) {
                out.push(x.to_string());
            }
        };
        self.visit(&mut |p| {
            let mut exprs: Vec<&Expr> = Vec::new();
            let mut bools: Vec<&BoolExpr> = Vec::new();
            match p {
                Process::Assign(x, e) => {
                    push(x);
                    exprs.push(e);
                }
                Process::Input(_, x) => push(x),
                Process::Output(_, e) => exprs.push(e),
                Process::Guard(b, _) => bools.push(b),
                Process::Dde(spec, b) | Process::DdeInterrupt(spec, b, _) => {
                    for x in &spec.vars {
                        push(x);
                    }
                    exprs.extend(spec.rhs.iter());
                    bools.push(b);
                }
                _ => {}
            }
            if let Process::CommChoice(hs) | Process::DdeInterrupt(_, _, hs) = p {
                for (ev, _) in hs {
                    match ev {
                        CommEvent::Input { var, .. } => push(var),
                        CommEvent::Output { expr, .. } => exprs.push(expr),
                    }
                }
            }
            for e in exprs {
                e.visit(&mut |n| match n {
                    Expr::Var(x) | Expr::Delayed(x, _) => push(x),
                    _ => {}
                });
            }
            for b in bools {
                b.visit_exprs(&mut |n| match n {
                    Expr::Var(x) | Expr::Delayed(x, _) => push(x),
                    _ => {}
                });
            }
        });
        out
    }

    /// Channels used for input and output respectively.
    pub fn channel_uses(&self) -> (BTreeSet<String>, BTreeSet<String>) {
        let mut ins = BTreeSet::new();
        let mut outs = BTreeSet::new();
        self.visit(&mut |p| match p {
            Process::Input(ch, _) => {
                ins.insert(ch.clone());
            }
            Process::Output(ch, _) => {
                outs.insert(ch.clone());
            }
            Process::CommChoice(hs) | Process::DdeInterrupt(_, _, hs) => {
                for (ev, _) in hs {
                    if ev.is_input() {
                        ins.insert(ev.chan().to_string());
                    } else {
                        outs.insert(ev.chan().to_string());
                    }
                }
            }
            _ => {}
        });
        (ins, outs)
    }

    /// The program-wide delay constant: the first delay found in a continuous
    /// statement, otherwise in any other delayed reference.
    pub fn delay(&self) -> Option<f64> {
        let mut in_dde = None;
        let mut other = None;
        self.visit(&mut |p| {
            let mut note = |refs: Vec<(String, f64)>| {
                if other.is_none() {
                    other = refs.first().map(|&(_, r)| r);
                }
            };
            match p {
                Process::Dde(spec, _) | Process::DdeInterrupt(spec, _, _) => {
                    if in_dde.is_none() {
                        in_dde = spec.delay();
                    }
                }
                Process::Assign(_, e) | Process::Output(_, e) => note(e.delayed_refs()),
                Process::Guard(b, _) => note(b.delayed_refs()),
                _ => {}
            }
            if let Process::CommChoice(hs) = p {
                for (ev, _) in hs {
                    if let CommEvent::Output { expr, .. } = ev {
                        note(expr.delayed_refs());
                    }
                }
            }
        });
        in_dde.or(other)
    }
}

/// A named top-level system.
#[derive(Debug, Clone, PartialEq)]
pub struct Program {
    pub name: String,
    pub body: Process,
}
