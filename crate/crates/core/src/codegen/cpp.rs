//! C++ rendering of expressions and identifiers.

use crate::syntax::{BinOp, BoolExpr, Expr};

const RESERVED: &[&str] = &[
    "alignas", "alignof", "and", "asm", "auto", "bool", "break", "case", "catch", "char",
    "class", "const", "continue", "default", "delete", "do", "double", "else", "enum",
    "explicit", "export", "extern", "false", "float", "for", "friend", "goto", "if", "inline",
    "int", "long", "main", "mutable", "namespace", "new", "not", "operator", "or", "pow",
    "private", "protected", "public", "rand", "register", "return", "short", "signed",
    "sizeof", "sqrt", "static", "struct", "switch", "template", "this", "throw", "true", "try",
    "typedef", "typename", "union", "unsigned", "using", "virtual", "void", "volatile", "wait",
    "while",
];

/// A valid C++ identifier for a model name; reserved words get a trailing underscore.
pub fn ident(name: &str) -> String {
    if RESERVED.contains(&name) {
        format!("{name}_")
    } else {
        name.to_string()
    }
}

/// Inverse of [`ident`].
pub fn unident(name: &str) -> String {
    match name.strip_suffix('_') {
        Some(base) if RESERVED.contains(&base) => base.to_string(),
        _ => name.to_string(),
    }
}

/// Numeric literal; integral values print as integers.
pub fn num(c: f64) -> String {
    if c.is_finite() && c == c.trunc() && c.abs() < 1e15 {
        format!("{c:.0}")
    } else {
        format!("{c:?}")
    }
}

/// Literal that C++ reads as a double.
fn float_num(c: f64) -> String {
    let s = num(c);
    if s.contains(['.', 'e', 'i', 'N']) {
        s
    } else {
        format!("{s}.0")
    }
}

/// How variables and delayed references are spelled in a given context.
pub trait Names {
    fn var(&self, x: &str) -> String;
    fn delayed(&self, x: &str, r: f64) -> String;
}

/// Thread code: plain members, and `x.at(r)` for delayed references.
pub struct Members;

impl Names for Members {
    fn var(&self, x: &str) -> String {
        ident(x)
    }

    fn delayed(&self, x: &str, r: f64) -> String {
        format!("{}.at({})", ident(x), num(r))
    }
}

/// Helper bodies: parameters named after the variable, `x_r` for its delayed value.
pub struct Params;

impl Names for Params {
    fn var(&self, x: &str) -> String {
        ident(x)
    }

    fn delayed(&self, x: &str, _r: f64) -> String {
        format!("{}_r", ident(x))
    }
}

fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
        Expr::Bin(BinOp::Mul | BinOp::Div, ..) => 2,
        Expr::Neg(_) => 3,
        Expr::Num(c) if c.is_sign_negative() => 3,
        _ => 5,
    }
}

pub fn expr(e: &Expr, names: &dyn Names) -> String {
    expr_prec(e, 0, false, names)
}

/// Under a division every literal is written as a double.
fn expr_prec(e: &Expr, min: u8, float: bool, names: &dyn Names) -> String {
    let sub = |e: &Expr, min: u8| expr_prec(e, min, float, names);
    let s = match e {
        Expr::Num(c) if float => float_num(*c),
        Expr::Num(c) => num(*c),
        Expr::Var(x) => names.var(x),
        Expr::Delayed(x, r) => names.delayed(x, *r),
        Expr::Neg(a) => match **a {
            Expr::Num(_) => format!("-({})", sub(a, 0)),
            _ => match sub(a, 3) {
                inner if inner.starts_with('-') => format!("-({inner})"),
                inner => format!("-{inner}"),
            },
        },
        Expr::Sqrt(a) => format!("sqrt({})", sub(a, 0)),
        Expr::Bin(BinOp::Pow, a, b) => format!("pow({}, {})", sub(a, 0), sub(b, 0)),
        Expr::Bin(BinOp::Div, a, b) => format!(
            "{} / {}",
            expr_prec(a, 2, true, names),
            expr_prec(b, 3, true, names)
        ),
        Expr::Bin(op, a, b) => {
            let (l, r) = match op {
                BinOp::Add | BinOp::Sub => (1, 2),
                _ => (2, 3),
            };
            format!("{} {} {}", sub(a, l), op.symbol(), sub(b, r))
        }
    };
    if prec(e) < min {
        format!("({s})")
    } else {
        s
    }
}

fn bool_prec(b: &BoolExpr) -> u8 {
    match b {
        BoolExpr::Or(..) => 1,
        BoolExpr::And(..) => 2,
        _ => 4,
    }
}

pub fn boolean(b: &BoolExpr, names: &dyn Names) -> String {
    bool_str(b, 0, names)
}

fn bool_str(b: &BoolExpr, min: u8, names: &dyn Names) -> String {
    let s = match b {
        BoolExpr::True => "true".to_string(),
        BoolExpr::False => "false".to_string(),
        BoolExpr::Cmp(a, op, c) => {
            format!("{} {} {}", expr(a, names), op.symbol(), expr(c, names))
        }
        BoolExpr::Not(a) => format!("!({})", boolean(a, names)),
        BoolExpr::And(a, c) => {
            format!("{} && {}", bool_str(a, 2, names), bool_str(c, 3, names))
        }
        BoolExpr::Or(a, c) => format!("{} || {}", bool_str(a, 1, names), bool_str(c, 2, names)),
    };
    if bool_prec(b) < min {
        format!("({s})")
    } else {
        s
    }
}

/// `secs` expressed in a unit with `per_sec` ticks per second, without float
/// noise when the result is integral.
pub fn duration(secs: f64, per_sec: f64) -> String {
    let v = secs * per_sec;
    let r = v.round();
    if (v - r).abs() <= 1e-9 * r.abs().max(1.0) {
        format!("{r:.0}")
    } else {
        format!("{v:?}")
    }
}
