use crate::Scalar;

use super::ast::{BinOp, BoolExpr, Expr};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("unknown variable {0}")]
    UnknownVar(String),
    #[error("no history for {0}@{1}")]
    NoHistory(String, f64),
    #[error("division by zero")]
    DivByZero,
    #[error("square root of negative value {0}")]
    SqrtNegative(f64),
    #[error("power {0}^{1} is undefined")]
    PowDomain(f64, f64),
}

/// Variable lookup used by point evaluation.
pub trait Valuation<S> {
    fn value(&self, x: &str) -> Option<S>;
    fn delayed(&self, x: &str, r: f64) -> Option<S>;
}

pub fn eval_expr<S: Scalar>(e: &Expr, env: &dyn Valuation<S>) -> Result<S, EvalError> {
    Ok(match e {
        Expr::Num(c) => S::lit(*c),
        Expr::Var(x) => env.value(x).ok_or_else(|| EvalError::UnknownVar(x.clone()))?,
        Expr::Delayed(x, r) => env
            .delayed(x, *r)
            .ok_or_else(|| EvalError::NoHistory(x.clone(), *r))?,
        Expr::Neg(a) => -eval_expr(a, env)?,
        Expr::Sqrt(a) => {
            let v = eval_expr(a, env)?;
            if v < S::zero() {
                return Err(EvalError::SqrtNegative(v.to_f64_lossy()));
            }
            v.sqrt()
        }
        Expr::Bin(op, a, b) => {
            let (x, y) = (eval_expr(a, env)?, eval_expr(b, env)?);
            match op {
                BinOp::Add => x + y,
                BinOp::Sub => x - y,
                BinOp::Mul => x * y,
                BinOp::Div => {
                    if y == S::zero() {
                        return Err(EvalError::DivByZero);
                    }
                    x / y
                }
                BinOp::Pow => {
                    let v = x.powf(y);
                    if v.is_nan() || (v.is_infinite() && x.is_finite() && y.is_finite()) {
                        return Err(EvalError::PowDomain(x.to_f64_lossy(), y.to_f64_lossy()));
                    }
                    v
                }
            }
        }
    })
}

pub fn eval_bool<S: Scalar>(b: &BoolExpr, env: &dyn Valuation<S>) -> Result<bool, EvalError> {
    Ok(match b {
        BoolExpr::True => true,
        BoolExpr::False => false,
        BoolExpr::Cmp(a, op, c) => {
            let (x, y) = (eval_expr(a, env)?, eval_expr(c, env)?);
            op.holds(x.to_f64_lossy(), y.to_f64_lossy())
        }
        BoolExpr::Not(a) => !eval_bool(a, env)?,
        BoolExpr::And(a, c) => eval_bool(a, env)? && eval_bool(c, env)?,
        BoolExpr::Or(a, c) => eval_bool(a, env)? || eval_bool(c, env)?,
    })
}

impl<S: Copy> Valuation<S> for std::collections::HashMap<String, S> {
    fn value(&self, x: &str) -> Option<S> {
        self.get(x).copied()
    }

    fn delayed(&self, _x: &str, _r: f64) -> Option<S> {
        None
    }
}
