//! Property bodies shared by the suites and the acceptance run.

use std::collections::HashMap;

use dhcsp_core::bisim::{build_ts, max_bisim, BisimRelation, TsOptions};
use dhcsp_core::interval::{eval_interval, Interval};
use dhcsp_core::reference::run_reference;
use dhcsp_core::stepsize::{com_stepsize_one, hull_width, SimLists, StepConfig};
use dhcsp_core::syntax::*;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestError, TestRunner};

use super::gen;
use super::recheck::recheck;

pub type PropResult = Result<(), TestCaseError>;

/// Runs `test` on `cases` values of `strategy`; the shrunk failure otherwise.
pub fn run_cases<S: Strategy>(cases: u32, strategy: S, test: impl Fn(S::Value) -> PropResult) -> Result<(), String>
where
    S::Value: std::fmt::Debug,
{
    let mut runner = TestRunner::new(Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    });
    runner.run(&strategy, test).map_err(|e| match e {
        TestError::Fail(why, v) => format!("{why} for {v:?}"),
        TestError::Abort(why) => format!("aborted: {why}"),
    })
}

pub fn round_trip(p: Process) -> PropResult {
    let text = print(&p);
    prop_assert_eq!(parse(&text).unwrap(), p, "{}", text);
    Ok(())
}

pub fn enclosure(e: Expr, bx: [(f64, f64); 2], pt: [f64; 2]) -> PropResult {
    let ienv: HashMap<String, Interval<f64>> = [("x", bx[0]), ("y", bx[1])]
        .into_iter()
        .map(|(k, (lo, hi))| (k.to_string(), Interval::new(lo, hi)))
        .collect();
    let penv: HashMap<String, f64> = [("x".to_string(), pt[0]), ("y".to_string(), pt[1])].into();
    let (Ok(iv), Ok(v)) = (eval_interval(&e, &ienv), eval_expr::<f64>(&e, &penv)) else {
        return Ok(());
    };
    if v.is_finite() {
        prop_assert!(iv.contains(v), "{:?} at {:?}: {} not in {:?}", e, pt, v, iv);
    }
    Ok(())
}

/// `x' = -x` from 1: the validated Euler run ends within its bound of `e^-1`.
pub fn euler_decay() -> Result<(), String> {
    let spec = DdeSpec::scalar("x", Expr::Neg(Box::new(Expr::var("x"))));
    let cfg = StepConfig::new(0.1, 1.0);
    let res = com_stepsize_one(&spec, &[], &[1.0], 1.0, &cfg).map_err(|e| e.to_string())?;
    let l = &res.lists;
    let n = l.len() - 1;
    let exact = (-1.0f64).exp();
    if (l.t[n] - 1.0).abs() > 1e-12 {
        return Err(format!("run ends at {}", l.t[n]));
    }
    if (l.y[n][0] - exact).abs() > l.d[n] {
        return Err(format!("|{} - e^-1| exceeds {}", l.y[n][0], l.d[n]));
    }
    lists_sound(l, 0.1)
}

pub fn lists_sound(lists: &SimLists<f64>, eps_dde: f64) -> Result<(), String> {
    if let Some(w) = lists.d.windows(2).find(|w| w[1] < w[0]) {
        return Err(format!("bounds decrease: {w:?}"));
    }
    for j in lists.from_zero().skip(1) {
        let width = hull_width(&lists.y[j - 1], lists.d[j - 1], &lists.y[j], lists.d[j]);
        if width > eps_dde {
            return Err(format!("hull width {width} at {}", lists.t[j]));
        }
    }
    Ok(())
}

/// Samples of `xs` at `times` outside the hull of neighbouring error balls.
pub fn tube_violations(lists: &SimLists<f64>, times: &[f64], xs: &[f64]) -> Vec<f64> {
    let mut bad = Vec::new();
    let mut j = lists.from_zero().start;
    for (&t, &x) in times.iter().zip(xs) {
        while j + 1 < lists.t.len() && lists.t[j + 1] < t - 1e-12 {
            j += 1;
        }
        if j + 1 >= lists.t.len() {
            break;
        }
        let (lo, hi) = lists.hull(j)[0];
        if x < lo - 1e-12 || x > hi + 1e-12 {
            bad.push(t);
        }
    }
    bad
}

/// Validated runs of a linear DDE keep their bounds and contain the reference flow.
pub fn validated_linear((a, b, x0, eps): (f64, f64, f64, f64)) -> PropResult {
    let src = format!("<x' = {a} * x + {b} * x@0.1 & true>");
    let Process::Dde(spec, _) = parse(&src).unwrap() else { unreachable!() };
    let res = com_stepsize_one(&spec, &[], &[x0], 0.1, &StepConfig::new(eps, 1.0)).unwrap();
    let k = (0.1 / res.h).log2().round();
    prop_assert!((res.h - 0.1 / 2f64.powf(k)).abs() < 1e-15);
    lists_sound(&res.lists, eps).map_err(TestCaseError::fail)?;

    let tr = run_reference(&parse(&format!("x := {x0}; {src}")).unwrap(), &[], 1.0, 1e-3, 0).unwrap();
    let xi = tr.var_index("x").unwrap();
    let times: Vec<f64> = tr.times.iter().map(|t| t.secs()).collect();
    let xs: Vec<f64> = tr.samples.iter().map(|s| s[xi]).collect();
    prop_assert_eq!(tube_violations(&res.lists, &times, &xs), Vec::<f64>::new());
    Ok(())
}

pub fn relation(p: &Process, q: &Process, eps: f64) -> Result<BisimRelation, TestCaseError> {
    let opts = TsOptions::default();
    let l = build_ts(p, &[], gen::GRID, 2.0, opts).unwrap();
    let r = build_ts(q, &[], gen::GRID, 2.0, opts).unwrap();
    let rel = max_bisim(&l, &r, gen::GRID, eps);
    recheck(&l, &r, &rel).map_err(TestCaseError::fail)?;
    Ok(rel)
}

pub fn reflexive(p: Process) -> PropResult {
    prop_assert!(relation(&p, &p, 0.0)?.accepted, "{}", print(&p));
    Ok(())
}

pub fn eps_monotone((p, q, e1, grow): (Process, Process, f64, f64)) -> PropResult {
    let small = relation(&p, &q, e1)?;
    let large = relation(&p, &q, e1 + grow)?;
    prop_assert!(!small.accepted || large.accepted);
    prop_assert!(small.pairs.iter().all(|&(a, b)| large.contains(a, b)));
    Ok(())
}
