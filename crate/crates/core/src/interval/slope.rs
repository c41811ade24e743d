use super::{eval_interval, DomainError, Interval, IntervalEnv};
use crate::syntax::{eval_expr, DdeSpec, EvalError, Valuation};
use crate::Scalar;

pub const MAX_SLOPE_ITERS: usize = 100;

/// Relative spacing of the grid the returned slope is snapped to.
const GRID_STEP: f64 = 1e-6;
const MAX_GRID_WALK: usize = 100_000;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SlopeError {
    #[error("slope iteration did not converge (last value {last})")]
    NoConvergence { last: f64 },
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Inputs of one error-slope bound: the Euler step from `y_n` with delayed state `y_delayed`.
#[derive(Debug, Clone)]
pub struct SlopeProblem<'a, S> {
    pub spec: &'a DdeSpec,
    /// Variables read by the right-hand side but held constant during the step.
    pub params: &'a [(String, S)],
    pub y_n: &'a [S],
    pub y_delayed: &'a [S],
    pub d_n: S,
    pub d_delayed: S,
    /// Nominal slope of the delayed state, `f(y_{n-m}, y_{n-2m})`.
    pub g_center: &'a [S],
    pub e_delayed: S,
    pub h: S,
    pub sigma: S,
    /// Iterates above this value count as divergence.
    pub cap: S,
}

struct PointEnv<'a, S> {
    spec: &'a DdeSpec,
    params: &'a [(String, S)],
    cur: &'a [S],
    del: &'a [S],
}

impl<S: Scalar> Valuation<S> for PointEnv<'_, S> {
    fn value(&self, x: &str) -> Option<S> {
        match self.spec.index_of(x) {
            Some(i) => Some(self.cur[i]),
            None => self.params.iter().find(|(n, _)| n == x).map(|(_, v)| *v),
        }
    }

    fn delayed(&self, x: &str, _r: f64) -> Option<S> {
        match self.spec.index_of(x) {
            Some(i) => Some(self.del[i]),
            None => self.params.iter().find(|(n, _)| n == x).map(|(_, v)| *v),
        }
    }
}

struct BoxEnv<'a, S> {
    spec: &'a DdeSpec,
    params: &'a [(String, S)],
    cur: Vec<Interval<S>>,
    del: Vec<Interval<S>>,
}

impl<S: Scalar> IntervalEnv<S> for BoxEnv<'_, S> {
    fn current(&self, x: &str) -> Option<Interval<S>> {
        match self.spec.index_of(x) {
            Some(i) => Some(self.cur[i]),
            None => self
                .params
                .iter()
                .find(|(n, _)| n == x)
                .map(|(_, v)| Interval::point(*v)),
        }
    }

    fn delayed(&self, x: &str) -> Option<Interval<S>> {
        match self.spec.index_of(x) {
            Some(i) => Some(self.del[i]),
            None => self
                .params
                .iter()
                .find(|(n, _)| n == x)
                .map(|(_, v)| Interval::point(*v)),
        }
    }
}

impl<'a, S: Scalar> SlopeProblem<'a, S> {
    /// `f(y_n, y_{n-m})`, the nominal Euler slope.
    pub fn f_center(&self) -> Result<Vec<S>, EvalError> {
        let env = PointEnv {
            spec: self.spec,
            params: self.params,
            cur: self.y_n,
            del: self.y_delayed,
        };
        self.spec.rhs.iter().map(|e| eval_expr(e, &env)).collect()
    }

    /// `σ` plus an upper bound of `‖f(x + t·f̂, x_r + t·ĝ) − f(y_n, y_{n−m})‖`
    /// with `f̂` ranging over the ball of radius `e` around the nominal slope.
    pub fn phi(&self, center: &[S], e: S) -> Result<S, DomainError> {
        let t = Interval::new(S::zero(), self.h);
        let cur = (0..self.spec.dim())
            .map(|i| Interval::ball(self.y_n[i], self.d_n) + t * Interval::ball(center[i], e))
            .collect();
        let del = (0..self.spec.dim())
            .map(|i| {
                Interval::ball(self.y_delayed[i], self.d_delayed)
                    + t * Interval::ball(self.g_center[i], self.e_delayed)
            })
            .collect();
        let env = BoxEnv {
            spec: self.spec,
            params: self.params,
            cur,
            del,
        };
        let mut sq = Interval::point(S::zero());
        for (i, rhs) in self.spec.rhs.iter().enumerate() {
            let dev = eval_interval(rhs, &env)? - Interval::point(center[i]);
            let m = Interval::point(dev.mag());
            sq = sq + m * m;
        }
        let norm = sq.sqrt()?.hi();
        Ok((Interval::point(self.sigma) + Interval::point(norm)).hi())
    }
}

/// Least slope bound `e` with `phi(e) <= e`, found by Kleene iteration from
/// `phi(0)` and snapped upward to a fixed geometric grid starting at `σ`.
pub fn min_error_slope<S: Scalar>(sp: &SlopeProblem<'_, S>) -> Result<S, SlopeError> {
    let center = sp.f_center()?;
    slope_bound(sp, &center)
}

/// As [`min_error_slope`] with a precomputed nominal slope.
pub fn slope_bound<S: Scalar>(sp: &SlopeProblem<'_, S>, center: &[S]) -> Result<S, SlopeError> {
    let diverged = |e: S| !e.is_finite() || e > sp.cap;
    let mut e = sp.phi(center, S::zero())?;
    let mut converged = false;
    for _ in 0..MAX_SLOPE_ITERS {
        if diverged(e) {
            return Err(SlopeError::NoConvergence {
                last: e.to_f64_lossy(),
            });
        }
        let next = sp.phi(center, e)?;
        let stop = next <= e * (S::one() + S::lit(GRID_STEP));
        e = next;
        if stop {
            converged = true;
            break;
        }
    }
    if !converged || diverged(e) {
        return Err(SlopeError::NoConvergence {
            last: e.to_f64_lossy(),
        });
    }
    let grid = |j: usize| -> S {
        sp.sigma * (S::lit(j as f64) * S::lit(GRID_STEP).ln_1p()).exp()
    };
    let ratio = (e / sp.sigma).max(S::one());
    let mut j = (ratio.ln() / S::lit(GRID_STEP).ln_1p())
        .floor()
        .to_usize()
        .unwrap_or(0);
    while j > 0 && grid(j) > e {
        j -= 1;
    }
    for _ in 0..MAX_GRID_WALK {
        let c = grid(j);
        if diverged(c) {
            break;
        }
        if sp.phi(center, c)? <= c {
            return Ok(c);
        }
        j += 1;
    }
    Err(SlopeError::NoConvergence {
        last: e.to_f64_lossy(),
    })
}
