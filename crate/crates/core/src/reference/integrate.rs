use super::history::{hermite, History};
use crate::syntax::{eval_bool, eval_expr, BoolExpr, DdeSpec, EvalError, Valuation};
use crate::Scalar;

pub const EXIT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum IntegrateError {
    #[error("evaluation failed at t={time}: {err}")]
    Eval { time: f64, err: EvalError },
    #[error("step {dt} must be positive and not exceed the delay {delay}")]
    BadStep { dt: f64, delay: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exit {
    DomainExit(f64),
    TimeOut,
}

/// Knots of a dense solution; values between knots use cubic Hermite interpolation.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseSegment<S> {
    pub vars: Vec<String>,
    pub knots: Vec<f64>,
    pub states: Vec<Vec<S>>,
    pub slopes: Vec<Vec<S>>,
}

impl<S: Scalar> DenseSegment<S> {
    pub fn value_at(&self, t: f64) -> Vec<S> {
        let n = self.knots.len();
        if n == 1 || t <= self.knots[0] {
            return self.states[0].clone();
        }
        if t >= self.knots[n - 1] {
            return self.states[n - 1].clone();
        }
        let i = self.knots.partition_point(|&k| k <= t) - 1;
        let (t0, t1) = (self.knots[i], self.knots[i + 1]);
        let s = S::lit((t - t0) / (t1 - t0));
        (0..self.vars.len())
            .map(|j| {
                hermite(
                    self.states[i][j],
                    self.states[i + 1][j],
                    self.slopes[i][j],
                    self.slopes[i + 1][j],
                    S::lit(t1 - t0),
                    s,
                )
            })
            .collect()
    }

    pub fn end_time(&self) -> f64 {
        *self.knots.last().expect("segment has a knot")
    }

    pub fn end_state(&self) -> &[S] {
        self.states.last().expect("segment has a knot")
    }
}

/// One classical Runge-Kutta step; returns the new state and the slopes at both ends.
pub fn rk4_step<S: Scalar, E>(
    t: f64,
    dt: f64,
    x: &[S],
    f: &mut impl FnMut(f64, &[S], &mut [S]) -> Result<(), E>,
) -> Result<(Vec<S>, Vec<S>, Vec<S>), E> {
    let n = x.len();
    let h = S::lit(dt);
    let half = S::lit(0.5);
    let mut k1 = vec![S::zero(); n];
    let mut k2 = vec![S::zero(); n];
    let mut k3 = vec![S::zero(); n];
    let mut k4 = vec![S::zero(); n];
    let mut tmp = vec![S::zero(); n];
    f(t, x, &mut k1)?;
    for i in 0..n {
        tmp[i] = x[i] + half * h * k1[i];
    }
    f(t + 0.5 * dt, &tmp, &mut k2)?;
    for i in 0..n {
        tmp[i] = x[i] + half * h * k2[i];
    }
    f(t + 0.5 * dt, &tmp, &mut k3)?;
    for i in 0..n {
        tmp[i] = x[i] + h * k3[i];
    }
    f(t + dt, &tmp, &mut k4)?;
    let sixth = S::lit(1.0 / 6.0);
    let two = S::lit(2.0);
    let x_new: Vec<S> = (0..n)
        .map(|i| x[i] + h * sixth * (k1[i] + two * k2[i] + two * k3[i] + k4[i]))
        .collect();
    let mut k_end = vec![S::zero(); n];
    f(t + dt, &x_new, &mut k_end)?;
    Ok((x_new, k1, k_end))
}

/// Bisection for the first time in `(lo, hi]` where `holds` becomes false,
/// given `holds(lo)` and `!holds(hi)`.
pub fn find_exit<E>(
    mut lo: f64,
    mut hi: f64,
    tol: f64,
    holds: &mut impl FnMut(f64) -> Result<bool, E>,
) -> Result<f64, E> {
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if holds(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

struct StageEnv<'a, S> {
    spec: &'a DdeSpec,
    x: &'a [S],
    t: f64,
    hist: &'a [History<S>],
}

impl<S: Scalar> Valuation<S> for StageEnv<'_, S> {
    fn value(&self, name: &str) -> Option<S> {
        self.spec.index_of(name).map(|i| self.x[i])
    }

    fn delayed(&self, name: &str, r: f64) -> Option<S> {
        self.spec
            .index_of(name)
            .map(|i| self.hist[i].value_at(self.t - r))
    }
}

/// Integrates `spec` from `t0` with the given per-variable histories until `t_max`
/// or until `domain` stops holding, using fixed RK4 steps of size `dt`.
pub fn integrate_dde<S: Scalar>(
    spec: &DdeSpec,
    init: &[History<S>],
    domain: &BoolExpr,
    t0: f64,
    t_max: f64,
    dt: f64,
) -> Result<(DenseSegment<S>, Exit), IntegrateError> {
    let delay = spec.delay().unwrap_or(f64::INFINITY);
    if !(dt > 0.0) || dt > delay {
        return Err(IntegrateError::BadStep { dt, delay });
    }
    let mut hist: Vec<History<S>> = init.to_vec();
    let rhs = |t: f64, x: &[S], out: &mut [S], hist: &[History<S>]| {
        let env = StageEnv { spec, x, t, hist };
        for (o, e) in out.iter_mut().zip(&spec.rhs) {
            *o = eval_expr(e, &env).map_err(|err| IntegrateError::Eval { time: t, err })?;
        }
        Ok::<(), IntegrateError>(())
    };
    let inside = |t: f64, x: &[S], hist: &[History<S>]| {
        let env = StageEnv { spec, x, t, hist };
        eval_bool(domain, &env).map_err(|err| IntegrateError::Eval { time: t, err })
    };

    let mut x: Vec<S> = hist.iter().map(|h| h.value_at(t0)).collect();
    let mut k0 = vec![S::zero(); spec.dim()];
    rhs(t0, &x, &mut k0, &hist)?;
    let mut seg = DenseSegment {
        vars: spec.vars.clone(),
        knots: vec![t0],
        states: vec![x.clone()],
        slopes: vec![k0],
    };
    if !inside(t0, &x, &hist)? {
        return Ok((seg, Exit::DomainExit(t0)));
    }
    let mut t = t0;
    while t < t_max {
        let step = dt.min(t_max - t);
        let t1 = if t_max - t <= dt { t_max } else { t + step };
        let (x1, ka, kb) = {
            let h = &hist;
            rk4_step(t, t1 - t, &x, &mut |s, y: &[S], out: &mut [S]| rhs(s, y, out, h))?
        };
        if !inside(t1, &x1, &hist)? {
            let span = S::lit(t1 - t);
            let interp = |s: f64| -> Vec<S> {
                let u = S::lit((s - t) / (t1 - t));
                (0..x.len())
                    .map(|i| hermite(x[i], x1[i], ka[i], kb[i], span, u))
                    .collect()
            };
            let tf = find_exit(t, t1, EXIT_TOLERANCE, &mut |s| inside(s, &interp(s), &hist))?;
            let xf = interp(tf);
            let mut kf = vec![S::zero(); spec.dim()];
            rhs(tf, &xf, &mut kf, &hist)?;
            seg.knots.push(tf);
            seg.states.push(xf);
            seg.slopes.push(kf);
            return Ok((seg, Exit::DomainExit(tf)));
        }
        for (i, h) in hist.iter_mut().enumerate() {
            h.push_hermite(t, t1, x[i], x1[i], ka[i], kb[i]);
        }
        seg.knots.push(t1);
        seg.states.push(x1.clone());
        seg.slopes.push(kb);
        x = x1;
        t = t1;
    }
    Ok((seg, Exit::TimeOut))
}
