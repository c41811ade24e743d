//! Validated forward-Euler simulation with local error bounds and the
//! halving search for a step size that keeps every error tube below a precision.

use std::fmt::Write as _;

use crate::interval::{min_error_slope, SlopeError, SlopeProblem};
use crate::syntax::{eval_expr, DdeSpec, EvalError, Valuation};
use crate::Scalar;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StepError {
    #[error("no valid step size after {halvings} halvings (last failure at step {last_step})")]
    MaxHalvings { halvings: u32, last_step: usize },
    #[error("step size {h} does not divide the delay {r}")]
    NotDivisor { h: f64, r: f64 },
    #[error("evaluation failed at t={time}: {err}")]
    Eval { time: f64, err: EvalError },
    #[error("interval evaluation failed at t={time}: {msg}")]
    Domain { time: f64, msg: String },
    #[error("right-hand sides evolve different variables")]
    MismatchedVars,
    #[error("empty schedule")]
    EmptySchedule,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepConfig<S> {
    /// Precision every error tube must respect.
    pub eps_dde: S,
    pub t_end: f64,
    pub sigma: S,
    pub max_halvings: u32,
    /// Error bound of the initial state.
    pub d0: S,
    /// Slope iterates above this count as divergence.
    pub slope_cap: S,
    /// Largest number of Euler steps over `[-r, t_end]` a candidate may take.
    pub max_steps: usize,
}

pub const DEFAULT_MAX_STEPS: usize = 1 << 18;

impl<S: Scalar> StepConfig<S> {
    /// Whether step `h` keeps a run from `-r` to `t_end` within `max_steps`.
    pub fn affordable(&self, r: f64, h: f64) -> bool {
        (r + self.t_end) / h <= self.max_steps as f64
    }

    pub fn new(eps_dde: S, t_end: f64) -> StepConfig<S> {
        StepConfig {
            eps_dde,
            t_end,
            sigma: S::lit(1e-9),
            max_halvings: 40,
            d0: S::zero(),
            slope_cap: S::lit(1e6),
            max_steps: DEFAULT_MAX_STEPS,
        }
    }
}

/// Which right-hand side runs over a time span.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduleSegment {
    pub dde: usize,
    pub start: f64,
    pub end: f64,
}

/// Time stamps, Euler states, error bounds and error slopes of one simulation.
///
/// Index `j` holds step `n = j - m`; the first `m + 1` entries cover the constant
/// initial function on `[-r, 0]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimLists<S> {
    pub vars: Vec<String>,
    pub h: f64,
    pub m: usize,
    pub t: Vec<f64>,
    pub y: Vec<Vec<S>>,
    pub d: Vec<S>,
    /// Error slope of the step leaving each index; one shorter than `t`.
    pub e: Vec<S>,
    /// Nominal Euler slope of the step leaving each index; one shorter than `t`.
    pub slope: Vec<Vec<S>>,
}

impl<S: Scalar> SimLists<S> {
    pub fn new(vars: Vec<String>, x0: &[S], d0: S, r: f64, h: f64) -> Result<SimLists<S>, StepError> {
        let ratio = r / h;
        let m = ratio.round();
        if m < 1.0 || (ratio - m).abs() > 1e-9 * ratio {
            return Err(StepError::NotDivisor { h, r });
        }
        let m = m as usize;
        let n = m + 1;
        let mut d = vec![S::zero(); n];
        d[m] = d0;
        Ok(SimLists {
            vars,
            h,
            m,
            t: (0..n).map(|j| (j as f64 - m as f64) * h).collect(),
            y: vec![x0.to_vec(); n],
            d,
            e: vec![S::zero(); m],
            slope: vec![vec![S::zero(); x0.len()]; m],
        })
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn last_time(&self) -> f64 {
        *self.t.last().expect("lists are never empty")
    }

    /// Entries from time 0 onwards.
    pub fn from_zero(&self) -> std::ops::Range<usize> {
        self.m..self.len()
    }

    /// Per-dimension hull of the error balls at `j` and `j + 1`.
    pub fn hull(&self, j: usize) -> Vec<(S, S)> {
        (0..self.vars.len())
            .map(|k| {
                let (a, b) = (self.y[j][k], self.y[j + 1][k]);
                let (da, db) = (self.d[j], self.d[j + 1]);
                ((a - da).min(b - db), (a + da).max(b + db))
            })
            .collect()
    }

    /// CSV with header `t,<vars>,bound`, from time 0 onwards; `bound` is the error radius.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t");
        for v in &self.vars {
            out.push(',');
            out.push_str(v);
        }
        out.push_str(",bound\n");
        for j in self.from_zero() {
            let _ = write!(out, "{}", self.t[j]);
            for x in &self.y[j] {
                let _ = write!(out, ",{x}");
            }
            let _ = writeln!(out, ",{}", self.d[j]);
        }
        out
    }
}

struct StepEnv<'a, S> {
    spec: &'a DdeSpec,
    params: &'a [(String, S)],
    cur: &'a [S],
    del: &'a [S],
}

impl<S: Scalar> Valuation<S> for StepEnv<'_, S> {
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

pub fn rhs_at<S: Scalar>(
    f: &DdeSpec,
    params: &[(String, S)],
    y_n: &[S],
    y_delayed: &[S],
) -> Result<Vec<S>, EvalError> {
    let env = StepEnv {
        spec: f,
        params,
        cur: y_n,
        del: y_delayed,
    };
    f.rhs.iter().map(|e| eval_expr(e, &env)).collect()
}

/// `y_n + h·f(y_n, y_{n-m})`.
pub fn euler_step<S: Scalar>(
    y_n: &[S],
    y_delayed: &[S],
    f: &DdeSpec,
    params: &[(String, S)],
    h: S,
) -> Result<Vec<S>, EvalError> {
    let slope = rhs_at(f, params, y_n, y_delayed)?;
    Ok(y_n.iter().zip(&slope).map(|(&y, &s)| y + h * s).collect())
}

/// Largest per-dimension diameter of the hull of two error balls.
pub fn hull_width<S: Scalar>(y_n: &[S], d_n: S, y_next: &[S], d_next: S) -> S {
    y_n.iter()
        .zip(y_next)
        .map(|(&a, &b)| (a + d_n).max(b + d_next) - (a - d_n).min(b - d_next))
        .fold(S::zero(), |acc, w| acc.max(w))
}

/// Outcome of extending the lists over one span.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Check {
    Valid,
    /// The step leaving this list index broke the precision or had no slope bound.
    Invalid { at: usize },
}

/// Extends `lists` with validated Euler steps until `span_end`, stopping at the first
/// step whose error tube is wider than `cfg.eps_dde`.
pub fn check_stepsize<S: Scalar>(
    f: &DdeSpec,
    params: &[(String, S)],
    span_end: f64,
    lists: &mut SimLists<S>,
    cfg: &StepConfig<S>,
) -> Result<Check, StepError> {
    let h = lists.h;
    let hs = S::lit(h);
    let m = lists.m;
    let tol = h * 1e-9;
    while lists.last_time() < span_end - tol {
        let n = lists.len() - 1;
        let time = lists.t[n];
        let y_n = lists.y[n].clone();
        let y_del = lists.y[n - m].clone();
        let slope = rhs_at(f, params, &y_n, &y_del).map_err(|err| StepError::Eval { time, err })?;
        let y_next: Vec<S> = y_n.iter().zip(&slope).map(|(&y, &s)| y + hs * s).collect();
        let zero = vec![S::zero(); y_n.len()];
        let (g_center, e_del) = if n - m >= m {
            (lists.slope[n - m].as_slice(), lists.e[n - m])
        } else {
            (zero.as_slice(), S::zero())
        };
        let sp = SlopeProblem {
            spec: f,
            params,
            y_n: &y_n,
            y_delayed: &y_del,
            d_n: lists.d[n],
            d_delayed: lists.d[n - m],
            g_center,
            e_delayed: e_del,
            h: hs,
            sigma: cfg.sigma,
            cap: cfg.slope_cap,
        };
        let e = match min_error_slope(&sp) {
            Ok(e) => e,
            Err(SlopeError::NoConvergence { .. }) => return Ok(Check::Invalid { at: n }),
            Err(SlopeError::Eval(err)) => return Err(StepError::Eval { time, err }),
            Err(SlopeError::Domain(err)) => {
                return Err(StepError::Domain {
                    time,
                    msg: err.to_string(),
                })
            }
        };
        let d_next = lists.d[n] + hs * e;
        if hull_width(&y_n, lists.d[n], &y_next, d_next) > cfg.eps_dde {
            return Ok(Check::Invalid { at: n });
        }
        lists.e.push(e);
        lists.slope.push(slope);
        lists.t.push((n + 1 - m) as f64 * h);
        lists.y.push(y_next);
        lists.d.push(d_next);
    }
    Ok(Check::Valid)
}

/// A validated step size and the simulation that justified it.
#[derive(Debug, Clone, PartialEq)]
pub struct StepResult<S> {
    pub h: f64,
    pub halvings: u32,
    pub lists: SimLists<S>,
}

/// Step size for one right-hand side from a constant initial function `x0`.
pub fn com_stepsize_one<S: Scalar>(
    f: &DdeSpec,
    params: &[(String, S)],
    x0: &[S],
    r: f64,
    cfg: &StepConfig<S>,
) -> Result<StepResult<S>, StepError> {
    let schedule = [ScheduleSegment {
        dde: 0,
        start: 0.0,
        end: cfg.t_end,
    }];
    com_stepsize_multi(std::slice::from_ref(f), params, &schedule, x0, r, cfg)
}

/// Step size valid for every segment of `schedule` in order, the lists being
/// threaded across segment boundaries; any failure restarts from time 0 with `h/2`.
pub fn com_stepsize_multi<S: Scalar>(
    fs: &[DdeSpec],
    params: &[(String, S)],
    schedule: &[ScheduleSegment],
    x0: &[S],
    r: f64,
    cfg: &StepConfig<S>,
) -> Result<StepResult<S>, StepError> {
    let first = fs.first().ok_or(StepError::EmptySchedule)?;
    if schedule.is_empty() {
        return Err(StepError::EmptySchedule);
    }
    if fs.iter().any(|f| f.vars != first.vars) {
        return Err(StepError::MismatchedVars);
    }
    let mut h = r;
    let mut last_step = 0;
    for halvings in 0..=cfg.max_halvings {
        if !cfg.affordable(r, h) {
            return Err(StepError::MaxHalvings { halvings, last_step });
        }
        let mut lists = SimLists::new(first.vars.clone(), x0, cfg.d0, r, h)?;
        let mut failed = None;
        for seg in schedule {
            if let Check::Invalid { at } = check_stepsize(&fs[seg.dde], params, seg.end, &mut lists, cfg)? {
                failed = Some(at - lists.m);
                break;
            }
        }
        match failed {
            None => return Ok(StepResult { h, halvings, lists }),
            Some(at) => last_step = at,
        }
        h /= 2.0;
    }
    Err(StepError::MaxHalvings {
        halvings: cfg.max_halvings,
        last_step,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::Expr;

    fn neg_x() -> DdeSpec {
        DdeSpec::scalar("x", Expr::Neg(Box::new(Expr::var("x"))))
    }

    #[test]
    fn euler_examples() {
        let zero = DdeSpec::scalar("x", Expr::Num(0.0));
        assert_eq!(euler_step(&[3.0], &[1.0], &zero, &[], 0.1).unwrap(), vec![3.0]);
        let y: Vec<f64> = euler_step(&[1.0], &[1.0], &neg_x(), &[], 0.1).unwrap();
        assert!((y[0] - 0.9).abs() < 1e-15);
    }

    #[test]
    fn hull_width_examples() {
        assert_eq!(hull_width(&[0.0], 0.0, &[0.0], 0.0), 0.0);
        let w: f64 = hull_width(&[4.5], 0.01, &[4.526], 0.012);
        assert!((w - 0.048).abs() < 1e-12);
        assert_eq!(w, hull_width(&[4.526], 0.012, &[4.5], 0.01));
    }

    #[test]
    fn lists_start_with_constant_prehistory() {
        let l = SimLists::new(vec!["x".into()], &[2.0], 0.0, 0.1, 0.025).unwrap();
        assert_eq!(l.m, 4);
        assert_eq!(l.len(), 5);
        assert!((l.t[0] + 0.1).abs() < 1e-15);
        assert_eq!(l.t[4], 0.0);
        assert!(SimLists::new(vec!["x".into()], &[2.0], 0.0, 0.1, 0.03).is_err());
    }

    #[test]
    fn zero_dynamics_accept_the_delay() {
        let f = DdeSpec::scalar("x", Expr::Num(0.0));
        let cfg = StepConfig::new(0.1, 1.0);
        let res = com_stepsize_one(&f, &[], &[4.5], 0.1, &cfg).unwrap();
        assert_eq!(res.h, 0.1);
        for j in res.lists.from_zero() {
            let n = (j - res.lists.m) as f64;
            assert!((res.lists.d[j] - n * 0.1 * 1e-9).abs() < 1e-20);
        }
    }

    #[test]
    fn stiff_dynamics_fail_immediately() {
        let f = DdeSpec::scalar("x", Expr::mul(Expr::Num(100.0), Expr::var("x")));
        let cfg = StepConfig::new(0.01, 1.0);
        let mut lists = SimLists::new(vec!["x".into()], &[1.0], 0.0, 1.0, 1.0).unwrap();
        let check = check_stepsize(&f, &[], 1.0, &mut lists, &cfg).unwrap();
        assert_eq!(check, Check::Invalid { at: lists.m });
    }

    #[test]
    fn decay_step_is_on_the_halving_lattice() {
        let cfg = StepConfig::new(0.5, 1.0);
        let res = com_stepsize_one(&neg_x(), &[], &[1.0], 0.1, &cfg).unwrap();
        assert_eq!(res.h, 0.1 / 2f64.powi(res.halvings as i32));
        let end = res.lists.len() - 1;
        assert!((res.lists.t[end] - 1.0).abs() < 1e-9);
        // Closed form e^{-t} lies within the error ball at every grid point.
        for j in res.lists.from_zero() {
            let exact = (-res.lists.t[j]).exp();
            assert!((res.lists.y[j][0] - exact).abs() <= res.lists.d[j] + 1e-12);
        }
    }

    #[test]
    fn two_zero_segments_keep_the_delay() {
        let f = DdeSpec::scalar("x", Expr::Num(0.0));
        let cfg = StepConfig::new(0.1, 2.0);
        let sched = [
            ScheduleSegment { dde: 0, start: 0.0, end: 1.0 },
            ScheduleSegment { dde: 1, start: 1.0, end: 2.0 },
        ];
        let res = com_stepsize_multi(&[f.clone(), f], &[], &sched, &[1.0], 0.1, &cfg).unwrap();
        assert_eq!(res.h, 0.1);
    }

    #[test]
    fn csv_has_header_and_rows() {
        let f = DdeSpec::scalar("x", Expr::Num(0.0));
        let res = com_stepsize_one(&f, &[], &[1.0], 0.5, &StepConfig::new(0.1, 1.0)).unwrap();
        let csv = res.lists.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("t,x,bound"));
        assert_eq!(lines.count(), 3);
    }
}
