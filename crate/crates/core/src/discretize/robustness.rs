//! Empirical robustness estimates from reference runs.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::exec::{drive, Compiled, Node, NodeId, RunError, SeededChooser};
use crate::reference::ReferenceMachine;
use crate::syntax::{CommEvent, Process};
use crate::Ticks;

/// Smallest margin observed at one guard.
#[derive(Debug, Clone, PartialEq)]
pub struct GuardMargin {
    pub node: NodeId,
    pub guard: String,
    pub time: f64,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RobustnessReport {
    /// Longest time a flow spends within `eps` of its domain boundary before leaving it.
    pub delta: f64,
    /// Smallest distance between an evaluated guard and its threshold.
    pub eps: f64,
    pub margins: Vec<GuardMargin>,
    pub warnings: Vec<String>,
}

/// Variables and channels whose values can depend on a continuous evolution.
pub fn continuous_dependent_vars(p: &Process) -> BTreeSet<String> {
    let mut dep = p.continuous_vars();
    let mut chans: BTreeSet<String> = BTreeSet::new();
    loop {
        let before = dep.len() + chans.len();
        p.visit(&mut |q| {
            let touches = |e: &crate::syntax::Expr, dep: &BTreeSet<String>| {
                e.vars().iter().any(|x| dep.contains(x))
                    || e.delayed_refs().iter().any(|(x, _)| dep.contains(x))
            };
            let mut event = |ev: &CommEvent, dep: &mut BTreeSet<String>| match ev {
                CommEvent::Output { chan, expr } => {
                    if touches(expr, dep) {
                        chans.insert(chan.clone());
                    }
                }
                CommEvent::Input { chan, var } => {
                    if chans.contains(chan) {
                        dep.insert(var.clone());
                    }
                }
            };
            match q {
                Process::Assign(x, e) if touches(e, &dep) => {
                    dep.insert(x.clone());
                }
                Process::Input(ch, x) => event(
                    &CommEvent::Input {
                        chan: ch.clone(),
                        var: x.clone(),
                    },
                    &mut dep,
                ),
                Process::Output(ch, e) => event(
                    &CommEvent::Output {
                        chan: ch.clone(),
                        expr: e.clone(),
                    },
                    &mut dep,
                ),
                Process::CommChoice(hs) | Process::DdeInterrupt(_, _, hs) => {
                    for (ev, _) in hs {
                        event(ev, &mut dep);
                    }
                }
                _ => {}
            }
        });
        if dep.len() + chans.len() == before {
            return dep;
        }
    }
}

/// Runs the reference semantics `n_runs` times and measures how close guards
/// and domain boundaries come to flipping.
pub fn estimate_robustness(
    p: &Process,
    init: &[(String, f64)],
    t_end: f64,
    n_runs: u64,
    dt_ref: f64,
) -> Result<RobustnessReport, RunError> {
    let prog = Arc::new(Compiled::new(p)?);
    let dependent = continuous_dependent_vars(p);
    let mut margins: Vec<GuardMargin> = Vec::new();
    let mut exits: Vec<(Ticks, NodeId, Vec<Vec<f64>>, Vec<Ticks>)> = Vec::new();
    for seed in 0..n_runs.max(1) {
        let mut m = ReferenceMachine::new(prog.clone(), init, dt_ref).with_guard_log();
        let trace = drive(
            &mut m,
            Ticks::from_secs(t_end),
            Ticks::from_secs(dt_ref),
            &mut SeededChooser::new(seed),
        )?;
        for ev in m.guard_log.take().unwrap_or_default() {
            let Node::Guard { src, .. } = &prog.nodes[ev.node] else {
                continue;
            };
            if !src.vars().iter().any(|x| dependent.contains(x)) {
                continue;
            }
            let Some(&least) = ev.margins.iter().min_by(|a, b| a.total_cmp(b)) else {
                continue;
            };
            match margins.iter_mut().find(|g| g.node == ev.node) {
                Some(g) if g.margin <= least => {}
                Some(g) => {
                    g.margin = least;
                    g.time = ev.time.secs();
                }
                None => margins.push(GuardMargin {
                    node: ev.node,
                    guard: crate::syntax::bool_str(src),
                    time: ev.time.secs(),
                    margin: least,
                }),
            }
        }
        for rec in &m.exit_log {
            exits.push((rec.time, rec.node, trace.samples.clone(), trace.times.clone()));
        }
    }
    let eps = margins
        .iter()
        .map(|g| g.margin)
        .fold(f64::INFINITY, f64::min);
    let mut warnings = Vec::new();
    if eps.is_infinite() {
        warnings.push("no guard depends on a continuous variable".to_string());
    } else if eps == 0.0 {
        warnings.push("a guard was evaluated exactly on its threshold".to_string());
    }

    let mut delta: f64 = 0.0;
    for (time, node, samples, times) in &exits {
        let Node::Dde { dde, .. } = &prog.nodes[*node] else {
            continue;
        };
        let end = times.partition_point(|t| t <= time);
        let mut entered = time.secs();
        for k in (0..end).rev() {
            let row = &samples[k];
            let cur = |i: usize| row[i];
            let del = |i: usize, _r: f64| row[i];
            let mut ms = Vec::new();
            if dde.dom.atom_margins(&cur, &del, &mut ms).is_err() {
                break;
            }
            if ms.iter().all(|&m| m >= eps) {
                break;
            }
            entered = times[k].secs();
        }
        delta = delta.max(time.secs() - entered);
    }
    margins.sort_by(|a, b| a.margin.total_cmp(&b.margin));
    Ok(RobustnessReport {
        delta,
        eps,
        margins,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;

    #[test]
    fn single_guard_margin() {
        let p = parse("x := 0; <x' = 1 & x < 6>; x >= 5.9 -> skip").unwrap();
        let rep = estimate_robustness(&p, &[], 10.0, 1, 1e-3).unwrap();
        assert_eq!(rep.margins.len(), 1);
        assert!((rep.eps - 0.1).abs() < 1e-6, "{}", rep.eps);
        assert!(rep.delta > 0.0);
    }

    #[test]
    fn guards_on_discrete_state_are_ignored() {
        let p = parse("x := 6; x >= 5.9 -> skip").unwrap();
        let rep = estimate_robustness(&p, &[], 1.0, 1, 1e-2).unwrap();
        assert!(rep.eps.is_infinite());
        assert_eq!(rep.delta, 0.0);
        assert_eq!(rep.warnings.len(), 1);
    }

    #[test]
    fn dependency_flows_through_channels() {
        let p = parse(
            "system S { <d' = 1 & true> |> [wl!d -> (skip)] || wait 1; wl?x; y := x + 1; z := 3 }",
        )
        .unwrap();
        let dep = continuous_dependent_vars(&p);
        assert!(dep.contains("d") && dep.contains("x") && dep.contains("y"));
        assert!(!dep.contains("z"));
    }

    #[test]
    fn water_tank_margins() {
        let src = std::fs::read_to_string(concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/../../models/watertank.dhcsp"
        ))
        .unwrap();
        let p = parse(&src).unwrap();
        let rep = estimate_robustness(&p, &[], 10.0, 1, 1e-3).unwrap();
        assert!(rep.eps > 0.19 && rep.eps < 0.24, "{rep:?}");
        assert_eq!(rep.delta, 0.0);
    }
}
