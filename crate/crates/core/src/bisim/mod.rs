//! Delta-cycle interpreter for discrete processes, transition systems and the
//! (h, eps)-approximate bisimulation check.

mod discrete;
mod relation;
mod ts;

pub use discrete::{run_discrete, DiscreteMachine};
pub use relation::{
    distance, labels_match, max_bisim, shared_columns, BisimRelation, CexStep, Side, Violation,
};
pub use ts::{
    build_ts, explore, NodeEnd, TransitionSystem, TsError, TsLabel, TsNode, TsOptions,
    DEFAULT_STATE_BUDGET,
};

use crate::syntax::Process;

#[derive(Debug, Clone, PartialEq)]
pub struct BisimVerdict {
    pub accepted: bool,
    /// Largest distance between the two systems at equal times, over shared variables.
    pub max_deviation: f64,
    pub relation: BisimRelation,
    pub source: TransitionSystem,
    pub target: TransitionSystem,
}

/// For every node of `a`, the closest node of `b` at the same time; the worst of those.
pub fn max_aligned_deviation(a: &TransitionSystem, b: &TransitionSystem) -> f64 {
    let cols = shared_columns(a, b);
    let mut worst: f64 = 0.0;
    for na in &a.nodes {
        let best = b
            .nodes
            .iter()
            .filter(|nb| nb.now == na.now)
            .map(|nb| distance(&cols, &na.vals, &nb.vals))
            .fold(f64::INFINITY, f64::min);
        if best.is_finite() {
            worst = worst.max(best);
        }
    }
    worst
}

/// Builds both transition systems with time step `h` on `[0, t_end]` and decides
/// whether they are (h, eps)-approximately bisimilar.
pub fn check_approx_bisim(
    src: &Process,
    dis: &Process,
    init: &[(String, f64)],
    h: f64,
    eps: f64,
    t_end: f64,
    opts: TsOptions,
) -> Result<BisimVerdict, TsError> {
    let source = build_ts(src, init, h, t_end, opts)?;
    let target = build_ts(dis, init, h, t_end, opts)?;
    let relation = max_bisim(&source, &target, h, eps);
    Ok(BisimVerdict {
        accepted: relation.accepted,
        max_deviation: max_aligned_deviation(&source, &target),
        relation,
        source,
        target,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;
    use crate::Ticks;

    fn check(a: &str, b: &str, h: f64, eps: f64, t_end: f64) -> BisimVerdict {
        check_approx_bisim(
            &parse(a).unwrap(),
            &parse(b).unwrap(),
            &[],
            h,
            eps,
            t_end,
            TsOptions::default(),
        )
        .unwrap()
    }

    #[test]
    fn skip_is_bisimilar_to_itself() {
        assert!(check("skip", "skip", 0.1, 0.0, 1.0).accepted);
    }

    #[test]
    fn duration_gap_beyond_h_is_rejected() {
        let v = check("wait 1; x := 1", "wait 1.3; x := 1", 0.1, 0.5, 2.0);
        assert!(!v.accepted);
        assert!(!v.relation.counterexample.is_empty());
        assert!(check("wait 1; x := 1", "wait 1.1; x := 1", 0.1, 0.5, 2.0).accepted);
    }

    #[test]
    fn value_offset_is_rejected_at_the_start() {
        let v = check("x := 1; wait 1", "x := 1.3; wait 1", 0.5, 0.1, 1.0);
        assert!(!v.accepted);
        let first = &v.relation.counterexample[0];
        assert_eq!(first.time, Ticks::ZERO);
        assert!(check("x := 1; wait 1", "x := 1.05; wait 1", 0.5, 0.1, 1.0).accepted);
    }

    #[test]
    fn communications_must_agree() {
        let a = "system S { wait 1; ch!1 || ch?x }";
        assert!(check(a, a, 0.5, 0.0, 2.0).accepted);
        let b = "system S { wait 1; dh!1 || dh?x }";
        assert!(!check(a, b, 0.5, 10.0, 2.0).accepted);
    }

    #[test]
    fn time_slide_before_an_action() {
        let a = "system S { wait 1; ch!1 || ch?x }";
        let b = "system S { wait 1.1; ch!1 || ch?x }";
        assert!(check(a, b, 0.1, 0.0, 2.0).accepted);
        assert!(!check(a, b, 0.05, 0.0, 2.0).accepted);
    }

    #[test]
    fn internal_choice_needs_both_branches() {
        let a = "x := 1 |~| x := 2";
        assert!(check(a, a, 0.1, 0.0, 1.0).accepted);
        assert!(!check(a, "x := 1", 0.1, 0.5, 1.0).accepted);
    }

    #[test]
    fn flow_versus_euler() {
        let src = "x := 1; <x' = -x & true>";
        let dis = "x := 1; (wait 0.01; x := x + 0.01 * -x)*{100}";
        let v = check(src, dis, 0.01, 0.01, 1.0);
        assert!(v.accepted, "{:?}", v.relation.counterexample);
        assert!(v.max_deviation < 0.002 && v.max_deviation > 0.0);
        assert!(!check(src, dis, 0.01, 1e-4, 1.0).accepted);
    }
}
