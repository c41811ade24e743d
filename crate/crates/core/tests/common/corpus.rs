//! Small process pairs for the termination and fixed-point checks.

use std::time::{Duration, Instant};

use dhcsp_core::bisim::{check_approx_bisim, TsOptions};
use dhcsp_core::discretize::discretize;
use dhcsp_core::syntax::parse;

use super::recheck::recheck;

/// `(left, right, h, eps, t_end)`; `right = None` pairs the left side with its discretization.
pub const CORPUS: [(&str, Option<&str>, f64, f64, f64); 20] = [
    ("skip", Some("skip"), 0.1, 0.0, 1.0),
    ("x := 1; wait 1", Some("x := 1.05; wait 1"), 0.5, 0.1, 1.0),
    ("x := 1; wait 1", Some("x := 1.3; wait 1"), 0.5, 0.1, 1.0),
    ("wait 1; x := 1", Some("wait 1.1; x := 1"), 0.1, 0.5, 2.0),
    ("wait 1; x := 1", Some("wait 1.3; x := 1"), 0.1, 0.5, 2.0),
    ("x := 1 |~| x := 2", Some("x := 1 |~| x := 2"), 0.1, 0.0, 1.0),
    ("x := 1 |~| x := 2", Some("x := 1"), 0.1, 0.5, 1.0),
    ("(wait 0.2; x := x + 1)*{4}", Some("(wait 0.2; x := x + 1.01)*{4}"), 0.2, 0.1, 1.0),
    ("system S { wait 1; ch!1 || ch?x }", Some("system S { wait 1.1; ch!1 || ch?x }"), 0.1, 0.0, 2.0),
    ("system S { wait 1; ch!1 || ch?x }", Some("system S { wait 1; dh!1 || dh?x }"), 0.5, 10.0, 2.0),
    ("system S { (wait 0.5; c!1)*{2} || (c?x; x := x + 1)*{2} }", Some("system S { (wait 0.5; c!1)*{2} || (c?x; x := x + 1)*{2} }"), 0.25, 0.0, 1.5),
    ("system S { select [a!1 -> (skip), b!2 -> (skip)] || a?x }", Some("system S { a!1 || a?x }"), 0.1, 0.0, 1.0),
    ("x := 1; (x > 0 -> x := -x) |~| skip", Some("x := 1; x := -1 |~| skip"), 0.1, 0.0, 1.0),
    ("x := 1; <x' = -x & true>", Some("x := 1; (wait 0.01; x := x + 0.01 * -x)*{100}"), 0.01, 0.01, 1.0),
    ("x := 1; <x' = -x & true>", Some("x := 1; (wait 0.1; x := x + 0.1 * -x)*{10}"), 0.1, 0.001, 1.0),
    ("x := 0; <x' = 1 & x < 0.5>; y := 1", None, 0.05, 0.1, 1.0),
    ("x := 1; <x' = -x + 0.5 * x@0.1 & true>", None, 0.05, 0.1, 1.0),
    ("system S { x := 0; <x' = 1 & true> |> [c!x -> (skip)] || wait 0.5; c?y }", None, 0.05, 0.1, 1.0),
    ("system S { x := 0; <x' = 1 & x < 0.3>; c!x || c?y }", None, 0.05, 0.1, 1.0),
    ("x := 2; (<x' = -x & x > 1>; x := 2)*{2}", None, 0.05, 0.2, 2.0),
];

pub const BUDGET: usize = 200_000;

/// Checks every pair; the verdicts in corpus order.
pub fn check_corpus() -> Result<Vec<bool>, String> {
    let opts = TsOptions {
        dt_ref: 1e-3,
        state_budget: BUDGET,
    };
    let mut verdicts = Vec::new();
    for (i, (a, b, h, eps, t_end)) in CORPUS.into_iter().enumerate() {
        let left = parse(a).map_err(|e| format!("pair {i}: {e}"))?;
        let right = match b {
            Some(b) => parse(b).map_err(|e| format!("pair {i}: {e}"))?,
            None => discretize(&left, h, eps, t_end).map_err(|e| format!("pair {i}: {e}"))?,
        };
        let start = Instant::now();
        let v = check_approx_bisim(&left, &right, &[], h, eps, t_end, opts).map_err(|e| format!("pair {i}: {e}"))?;
        if start.elapsed() > Duration::from_secs(60) {
            return Err(format!("pair {i} took {:?}", start.elapsed()));
        }
        if v.source.len() > BUDGET || v.target.len() > BUDGET {
            return Err(format!("pair {i} exceeds the state budget"));
        }
        recheck(&v.source, &v.target, &v.relation).map_err(|e| format!("pair {i}: {e}"))?;
        verdicts.push(v.accepted);
    }
    Ok(verdicts)
}
