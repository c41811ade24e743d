use std::collections::HashMap;

use super::{DomainError, Interval};
use crate::syntax::{BinOp, Expr};
use crate::Scalar;

/// Per-dimension intervals, e.g. the neighbourhood `N(x, d)` of a state.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalBox<S> {
    pub dims: Vec<Interval<S>>,
}

impl<S: Scalar> IntervalBox<S> {
    pub fn new(dims: Vec<Interval<S>>) -> IntervalBox<S> {
        IntervalBox { dims }
    }

    /// Box of radius `r` around `center` in every dimension.
    pub fn ball(center: &[S], r: S) -> IntervalBox<S> {
        IntervalBox {
            dims: center.iter().map(|&c| Interval::ball(c, r)).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dims.len()
    }

    pub fn width(&self) -> S {
        self.dims
            .iter()
            .map(Interval::width)
            .fold(S::zero(), S::max)
    }

    pub fn mid(&self) -> Vec<S> {
        self.dims.iter().map(Interval::mid).collect()
    }

    pub fn inflate(&self, eps: S) -> IntervalBox<S> {
        IntervalBox {
            dims: self.dims.iter().map(|i| i.inflate(eps)).collect(),
        }
    }

    pub fn contains(&self, x: &[S]) -> bool {
        x.len() == self.dims.len() && self.dims.iter().zip(x).all(|(i, &v)| i.contains(v))
    }
}

/// Variable enclosures used by [`eval_interval`].
pub trait IntervalEnv<S> {
    fn current(&self, x: &str) -> Option<Interval<S>>;
    fn delayed(&self, x: &str) -> Option<Interval<S>>;
}

impl<S: Scalar> IntervalEnv<S> for HashMap<String, Interval<S>> {
    fn current(&self, x: &str) -> Option<Interval<S>> {
        self.get(x).copied()
    }

    fn delayed(&self, _x: &str) -> Option<Interval<S>> {
        None
    }
}

/// Natural interval extension of `e`.
pub fn eval_interval<S: Scalar>(
    e: &Expr,
    env: &dyn IntervalEnv<S>,
) -> Result<Interval<S>, DomainError> {
    Ok(match e {
        Expr::Num(c) => {
            let v = S::lit(*c);
            if v.to_f64_lossy() == *c {
                Interval::point(v)
            } else {
                Interval::point(v).inflate(S::zero())
            }
        }
        Expr::Var(x) => env
            .current(x)
            .ok_or_else(|| DomainError::UnknownVar(x.clone()))?,
        Expr::Delayed(x, _) => env
            .delayed(x)
            .ok_or_else(|| DomainError::NoDelayed(x.clone()))?,
        Expr::Neg(a) => -eval_interval(a, env)?,
        Expr::Sqrt(a) => eval_interval(a, env)?.sqrt()?,
        Expr::Bin(op, a, b) => {
            let x = eval_interval(a, env)?;
            let y = eval_interval(b, env)?;
            match op {
                BinOp::Add => x + y,
                BinOp::Sub => x - y,
                BinOp::Mul => x * y,
                BinOp::Div => (x / y)?,
                BinOp::Pow => x.pow(&y)?,
            }
        }
    })
}
