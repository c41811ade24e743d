use super::ast::*;

pub fn print(p: &Process) -> String {
    match p {
        Process::Parallel(cs) => print_system("main", cs),
        _ => proc_str(p, 0),
    }
}

pub fn print_program(prog: &Program) -> String {
    match &prog.body {
        Process::Parallel(cs) => print_system(&prog.name, cs),
        other => proc_str(other, 0),
    }
}

fn print_system(name: &str, cs: &[Component]) -> String {
    let mut out = format!("system {name} {{\n");
    for (i, c) in cs.iter().enumerate() {
        if i > 0 {
            out.push_str("||\n");
        }
        out.push_str(&format!("  {}:\n    {}\n", c.name, proc_str(&c.body, 0)));
    }
    out.push_str("}\n");
    out
}

fn paren(s: String, wrap: bool) -> String {
    if wrap {
        format!("({s})")
    } else {
        s
    }
}

fn proc_prec(p: &Process) -> u8 {
    match p {
        Process::Seq(..) => 1,
        Process::IChoice(..) => 2,
        Process::Guard(..) => 3,
        _ => 4,
    }
}

fn proc_str(p: &Process, min: u8) -> String {
    let s = match p {
        Process::Skip => "skip".to_string(),
        Process::Stop => "stop".to_string(),
        Process::Assign(x, e) => format!("{x} := {}", expr_str(e)),
        Process::Wait(d) => format!("wait {}", num_str(*d)),
        Process::Input(ch, x) => format!("{ch}?{x}"),
        Process::Output(ch, e) => format!("{ch}!{}", expr_str(e)),
        Process::Seq(a, b) => format!("{}; {}", proc_str(a, 2), proc_str(b, 1)),
        Process::IChoice(a, b) => format!("{} |~| {}", proc_str(a, 3), proc_str(b, 2)),
        Process::Guard(g, body) => format!("{} -> {}", bool_str(g), proc_str(body, 3)),
        Process::Repeat(body, n) => format!("({})*{{{n}}}", proc_str(body, 0)),
        Process::CommChoice(hs) => format!("select {}", handlers_str(hs)),
        Process::Dde(spec, dom) => dde_str(spec, dom),
        Process::DdeInterrupt(spec, dom, hs) => {
            format!("{} |> {}", dde_str(spec, dom), handlers_str(hs))
        }
        Process::Parallel(cs) => print_system("main", cs),
    };
    paren(s, proc_prec(p) < min)
}

fn dde_str(spec: &DdeSpec, dom: &BoolExpr) -> String {
    let odes: Vec<String> = spec
        .vars
        .iter()
        .zip(&spec.rhs)
        .map(|(x, e)| format!("{x}' = {}", expr_str(e)))
        .collect();
    format!("<{} & {}>", odes.join(", "), bool_str(dom))
}

fn handlers_str(hs: &[(CommEvent, Process)]) -> String {
    let items: Vec<String> = hs
        .iter()
        .map(|(ev, q)| format!("{} -> ({})", event_str(ev), proc_str(q, 0)))
        .collect();
    format!("[{}]", items.join(", "))
}

pub fn event_str(ev: &CommEvent) -> String {
    match ev {
        CommEvent::Input { chan, var } => format!("{chan}?{var}"),
        CommEvent::Output { chan, expr } => format!("{chan}!{}", expr_str(expr)),
    }
}

pub fn num_str(c: f64) -> String {
    format!("{c}")
}

fn bool_prec(b: &BoolExpr) -> u8 {
    match b {
        BoolExpr::Or(..) => 1,
        BoolExpr::And(..) => 2,
        BoolExpr::Not(..) => 3,
        _ => 4,
    }
}

pub fn bool_str(b: &BoolExpr) -> String {
    bool_str_prec(b, 0)
}

fn bool_str_prec(b: &BoolExpr, min: u8) -> String {
    let s = match b {
        BoolExpr::True => "true".to_string(),
        BoolExpr::False => "false".to_string(),
        BoolExpr::Cmp(a, op, c) => format!("{} {} {}", expr_str(a), op.symbol(), expr_str(c)),
        BoolExpr::Not(a) => format!("not {}", bool_str_prec(a, 3)),
        BoolExpr::And(a, c) => format!("{} and {}", bool_str_prec(a, 2), bool_str_prec(c, 3)),
        BoolExpr::Or(a, c) => format!("{} or {}", bool_str_prec(a, 1), bool_str_prec(c, 2)),
    };
    paren(s, bool_prec(b) < min)
}

fn expr_prec(e: &Expr) -> u8 {
    match e {
        Expr::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
        Expr::Bin(BinOp::Mul | BinOp::Div, ..) => 2,
        Expr::Neg(_) => 3,
        Expr::Num(c) if c.is_sign_negative() => 3,
        Expr::Bin(BinOp::Pow, ..) => 4,
        _ => 5,
    }
}

pub fn expr_str(e: &Expr) -> String {
    expr_str_prec(e, 0)
}

fn expr_str_prec(e: &Expr, min: u8) -> String {
    let s = match e {
        Expr::Num(c) => num_str(*c),
        Expr::Var(x) => x.clone(),
        Expr::Delayed(x, r) => format!("{x}@{}", num_str(*r)),
        Expr::Neg(a) => match **a {
            Expr::Num(_) => format!("-({})", expr_str(a)),
            _ => format!("-{}", expr_str_prec(a, 3)),
        },
        Expr::Sqrt(a) => format!("sqrt({})", expr_str(a)),
        Expr::Bin(op, a, b) => {
            let (l, r) = match op {
                BinOp::Add | BinOp::Sub => (1, 2),
                BinOp::Mul | BinOp::Div => (2, 3),
                BinOp::Pow => (5, 3),
            };
            format!("{} {} {}", expr_str_prec(a, l), op.symbol(), expr_str_prec(b, r))
        }
    };
    paren(s, expr_prec(e) < min)
}
