//! Closed intervals with outward rounding, natural interval extension of
//! expressions, and the error-slope fixed point used by the step-size check.

mod eval;
mod slope;

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::Scalar;

pub use eval::{eval_interval, IntervalBox, IntervalEnv};
pub use slope::{min_error_slope, slope_bound, SlopeError, SlopeProblem, MAX_SLOPE_ITERS};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DomainError {
    #[error("division by an interval containing zero")]
    DivByZero,
    #[error("square root of an interval reaching below zero ({0})")]
    SqrtNegative(f64),
    #[error("power undefined on the given box")]
    Pow,
    #[error("unknown variable {0}")]
    UnknownVar(String),
    #[error("no enclosure for delayed reference {0}")]
    NoDelayed(String),
}

/// A closed interval `[lo, hi]`.
#[derive(Clone, Copy, PartialEq)]
pub struct Interval<S> {
    lo: S,
    hi: S,
}

impl<S: fmt::Debug> fmt::Debug for Interval<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:?}, {:?}]", self.lo, self.hi)
    }
}

impl<S: Scalar> fmt::Display for Interval<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

fn down<S: Scalar>(x: S, exact: bool) -> S {
    if exact || x.is_infinite() {
        x
    } else {
        x - (x.abs() * S::epsilon() + S::min_positive_value())
    }
}

fn up<S: Scalar>(x: S, exact: bool) -> S {
    if exact || x.is_infinite() {
        x
    } else {
        x + (x.abs() * S::epsilon() + S::min_positive_value())
    }
}

fn sum_exact<S: Scalar>(a: S, b: S, s: S) -> bool {
    // TwoSum error term.
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    err == S::zero() && s.is_finite()
}

fn prod_exact<S: Scalar>(a: S, b: S, p: S) -> bool {
    p.is_finite() && a.mul_add(b, -p) == S::zero()
}

impl<S: Scalar> Interval<S> {
    /// Panics if `lo > hi` or either bound is NaN.
    pub fn new(lo: S, hi: S) -> Interval<S> {
        assert!(lo <= hi, "invalid interval [{lo}, {hi}]");
        Interval { lo, hi }
    }

    pub fn try_new(lo: S, hi: S) -> Option<Interval<S>> {
        (lo <= hi).then_some(Interval { lo, hi })
    }

    pub fn point(x: S) -> Interval<S> {
        Interval::new(x, x)
    }

    /// `[c - r, c + r]`, rounded outward.
    pub fn ball(c: S, r: S) -> Interval<S> {
        let lo = c - r;
        let hi = c + r;
        Interval::new(down(lo, sum_exact(c, -r, lo)), up(hi, sum_exact(c, r, hi)))
    }

    pub fn lo(&self) -> S {
        self.lo
    }

    pub fn hi(&self) -> S {
        self.hi
    }

    pub fn width(&self) -> S {
        self.hi - self.lo
    }

    pub fn mid(&self) -> S {
        self.lo + (self.hi - self.lo) / S::lit(2.0)
    }

    /// Largest absolute value in the interval.
    pub fn mag(&self) -> S {
        self.lo.abs().max(self.hi.abs())
    }

    pub fn contains(&self, x: S) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_interval(&self, other: &Interval<S>) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn inflate(&self, eps: S) -> Interval<S> {
        Interval::new(down(self.lo - eps, false), up(self.hi + eps, false))
    }

    pub fn hull(&self, other: &Interval<S>) -> Interval<S> {
        Interval::new(self.lo.min(other.lo), self.hi.max(other.hi))
    }

    pub fn sqrt(&self) -> Result<Interval<S>, DomainError> {
        if self.lo < S::zero() {
            return Err(DomainError::SqrtNegative(self.lo.to_f64_lossy()));
        }
        let lo = self.lo.sqrt();
        let hi = self.hi.sqrt();
        let lo_exact = lo.mul_add(lo, -self.lo) == S::zero();
        let hi_exact = hi.mul_add(hi, -self.hi) == S::zero();
        Ok(Interval::new(down(lo, lo_exact).max(S::zero()), up(hi, hi_exact)))
    }

    /// Integer power with the even-power sign handling.
    pub fn powi(&self, n: i32) -> Interval<S> {
        if n == 0 {
            return Interval::point(S::one());
        }
        if n < 0 {
            let base = self.powi(-n);
            if base.contains(S::zero()) {
                return Interval::new(S::neg_infinity(), S::infinity());
            }
            return Interval::point(S::one()).div_checked(&base).expect("nonzero divisor");
        }
        let mut acc = *self;
        for _ in 1..n {
            acc = acc * *self;
        }
        if n % 2 == 0 && acc.lo < S::zero() {
            acc = Interval::new(S::zero(), acc.hi);
        }
        acc
    }

    pub fn pow(&self, exp: &Interval<S>) -> Result<Interval<S>, DomainError> {
        if exp.lo == exp.hi && exp.lo.fract() == S::zero() && exp.lo.abs() < S::lit(64.0) {
            let n = exp.lo.to_i32().ok_or(DomainError::Pow)?;
            let r = self.powi(n);
            if r.lo.is_infinite() && r.hi.is_infinite() {
                return Err(DomainError::Pow);
            }
            return Ok(r);
        }
        if self.lo <= S::zero() {
            return Err(DomainError::Pow);
        }
        let corners = [
            self.lo.powf(exp.lo),
            self.lo.powf(exp.hi),
            self.hi.powf(exp.lo),
            self.hi.powf(exp.hi),
        ];
        let lo = corners.iter().copied().fold(S::infinity(), S::min);
        let hi = corners.iter().copied().fold(S::neg_infinity(), S::max);
        // powf is not correctly rounded; widen by a few ulps.
        let slack = S::lit(4.0) * S::epsilon();
        let widen = |x: S, dir: S| if x.is_finite() { x + dir * x.abs() * slack } else { x };
        Ok(Interval::new(
            down(widen(lo, -S::one()), false),
            up(widen(hi, S::one()), false),
        ))
    }

    pub fn div_checked(&self, rhs: &Interval<S>) -> Result<Interval<S>, DomainError> {
        if rhs.contains(S::zero()) {
            return Err(DomainError::DivByZero);
        }
        let cands = [
            (self.lo, rhs.lo),
            (self.lo, rhs.hi),
            (self.hi, rhs.lo),
            (self.hi, rhs.hi),
        ];
        let mut lo = S::infinity();
        let mut hi = S::neg_infinity();
        for (a, b) in cands {
            let q = a / b;
            let exact = q.is_finite() && q.mul_add(b, -a) == S::zero();
            lo = lo.min(down(q, exact));
            hi = hi.max(up(q, exact));
        }
        Ok(Interval::new(lo, hi))
    }
}

impl<S: Scalar> Add for Interval<S> {
    type Output = Interval<S>;
    fn add(self, rhs: Interval<S>) -> Interval<S> {
        let lo = self.lo + rhs.lo;
        let hi = self.hi + rhs.hi;
        // inf - inf: the bound is unconstrained.
        let lo = if lo.is_nan() { S::neg_infinity() } else { lo };
        let hi = if hi.is_nan() { S::infinity() } else { hi };
        Interval::new(
            down(lo, sum_exact(self.lo, rhs.lo, lo)),
            up(hi, sum_exact(self.hi, rhs.hi, hi)),
        )
    }
}

impl<S: Scalar> Sub for Interval<S> {
    type Output = Interval<S>;
    fn sub(self, rhs: Interval<S>) -> Interval<S> {
        self + (-rhs)
    }
}

impl<S: Scalar> Neg for Interval<S> {
    type Output = Interval<S>;
    fn neg(self) -> Interval<S> {
        Interval::new(-self.hi, -self.lo)
    }
}

impl<S: Scalar> Mul for Interval<S> {
    type Output = Interval<S>;
    fn mul(self, rhs: Interval<S>) -> Interval<S> {
        let cands = [
            (self.lo, rhs.lo),
            (self.lo, rhs.hi),
            (self.hi, rhs.lo),
            (self.hi, rhs.hi),
        ];
        let mut lo = S::infinity();
        let mut hi = S::neg_infinity();
        for (a, b) in cands {
            let p = a * b;
            // 0 * inf would be NaN; the product of a zero bound is zero.
            let p = if p.is_nan() { S::zero() } else { p };
            let exact = prod_exact(a, b, p);
            lo = lo.min(down(p, exact));
            hi = hi.max(up(p, exact));
        }
        Interval::new(lo, hi)
    }
}

impl<S: Scalar> Div for Interval<S> {
    type Output = Result<Interval<S>, DomainError>;
    fn div(self, rhs: Interval<S>) -> Result<Interval<S>, DomainError> {
        self.div_checked(&rhs)
    }
}
