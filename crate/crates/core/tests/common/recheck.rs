//! Standalone re-verification of an approximate bisimulation relation.

use std::collections::HashSet;

use dhcsp_core::bisim::{BisimRelation, TransitionSystem, TsLabel};
use dhcsp_core::Ticks;

struct View<'a> {
    this: &'a TransitionSystem,
    other: &'a TransitionSystem,
    /// `(column in this, column in other)` for shared variables.
    cols: Vec<(usize, usize)>,
    h: i64,
    eps: f64,
    /// Pairs as `(node of this, node of other)`.
    rel: HashSet<(usize, usize)>,
}

impl View<'_> {
    fn dist(&self, a: usize, b: usize) -> f64 {
        let (va, vb) = (&self.this.nodes[a].vals, &self.other.nodes[b].vals);
        self.cols.iter().map(|&(i, j)| (va[i] - vb[j]).powi(2)).sum::<f64>().sqrt()
    }

    fn related(&self, a: usize, b: usize) -> bool {
        self.rel.contains(&(a, b))
    }

    fn comm_match(&self, x: &TsLabel, y: &TsLabel) -> bool {
        match (x, y) {
            (TsLabel::Tau, TsLabel::Tau) => true,
            (TsLabel::Comm { chan: c, value: v }, TsLabel::Comm { chan: d, value: w }) => {
                c == d && (v - w).abs() <= self.eps
            }
            _ => false,
        }
    }

    /// `b` and the nodes reached from it by internal steps.
    fn tau_closure(&self, b: usize) -> Vec<usize> {
        let mut seen = vec![b];
        let mut i = 0;
        while i < seen.len() {
            for (l, n) in &self.other.succ[seen[i]] {
                if *l == TsLabel::Tau && !seen.contains(n) {
                    seen.push(*n);
                }
            }
            i += 1;
        }
        seen
    }

    /// Nodes reached from `b` by chained delays whose total is within `h` of `t`,
    /// passing only through nodes that do not overtake `target` by more than `eps`.
    fn delay_answers(&self, b: usize, t: i64, target: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut todo = vec![(b, 0i64)];
        while let Some((n, acc)) = todo.pop() {
            for (l, m) in &self.other.succ[n] {
                let TsLabel::Duration(d) = l else { continue };
                let total = acc + d.0;
                if total > t + self.h {
                    continue;
                }
                if (t - total).abs() <= self.h {
                    out.push(*m);
                }
                let before = self.other.nodes[*m].now < self.this.nodes[target].now;
                if total < t + self.h && (before || self.dist(target, *m) <= self.eps) {
                    todo.push((*m, total));
                }
            }
        }
        out
    }

    fn answered(&self, a: usize, label: &TsLabel, a2: usize, b: usize) -> bool {
        let starts = if *label == TsLabel::Tau { vec![b] } else { self.tau_closure(b) };
        starts.into_iter().any(|s| match label {
            TsLabel::Duration(t) => {
                (t.0 <= self.h && self.related(a2, s))
                    || self.delay_answers(s, t.0, a2).into_iter().any(|m| self.related(a2, m))
            }
            _ => {
                let direct = (*label == TsLabel::Tau && self.related(a2, s))
                    || self.other.succ[s]
                        .iter()
                        .any(|(l, m)| self.comm_match(label, l) && self.related(a2, *m));
                let after_short_delay = self.other.succ[s].iter().any(|(l, m)| {
                    matches!(l, TsLabel::Duration(d) if d.0 > 0 && d.0 <= self.h)
                        && self.related(a, *m)
                        && self.other.succ[*m]
                            .iter()
                            .any(|(l2, m2)| self.comm_match(label, l2) && self.related(a2, *m2))
                });
                direct || after_short_delay
            }
        })
    }

    fn check_pair(&self, a: usize, b: usize) -> Result<(), String> {
        let (na, nb) = (&self.this.nodes[a], &self.other.nodes[b]);
        if (na.now.0 - nb.now.0).abs() > self.h {
            return Err(format!("({a}, {b}): times {} and {} too far apart", na.now, nb.now));
        }
        if self.dist(a, b) > self.eps {
            return Err(format!("({a}, {b}): distance {} exceeds {}", self.dist(a, b), self.eps));
        }
        for (label, a2) in &self.this.succ[a] {
            if !self.answered(a, label, *a2, b) {
                return Err(format!("({a}, {b}): move {label} to {a2} is unanswered"));
            }
        }
        Ok(())
    }
}

fn shared(a: &TransitionSystem, b: &TransitionSystem) -> Vec<(usize, usize)> {
    a.vars
        .iter()
        .enumerate()
        .filter_map(|(i, v)| b.vars.iter().position(|w| w == v).map(|j| (i, j)))
        .collect()
}

/// Checks both clauses for every retained pair, in both directions, and the
/// acceptance condition on initial nodes.
pub fn recheck(l: &TransitionSystem, r: &TransitionSystem, rel: &BisimRelation) -> Result<(), String> {
    let h = Ticks::from_secs(rel.h).0;
    let fwd = View {
        this: l,
        other: r,
        cols: shared(l, r),
        h,
        eps: rel.eps,
        rel: rel.pairs.iter().copied().collect(),
    };
    let bwd = View {
        this: r,
        other: l,
        cols: shared(r, l),
        h,
        eps: rel.eps,
        rel: rel.pairs.iter().map(|&(a, b)| (b, a)).collect(),
    };
    for &(a, b) in &rel.pairs {
        fwd.check_pair(a, b).map_err(|e| format!("left {e}"))?;
        bwd.check_pair(b, a).map_err(|e| format!("right {e}"))?;
    }
    let covered = |v: &View| v.this.initial.iter().all(|&a| v.other.initial.iter().any(|&b| v.related(a, b)));
    let initial_ok = covered(&fwd) && covered(&bwd);
    if initial_ok != rel.accepted {
        return Err(format!("verdict {} but initial coverage {initial_ok}", rel.accepted));
    }
    Ok(())
}
