use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use super::ts::{TransitionSystem, TsLabel};
use crate::Ticks;

/// Which transition system made the unmatched move.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// Valuations farther apart than `eps`, or times farther apart than `h`.
    Distance { value: f64, time_gap: Ticks },
    /// A move of one side has no admissible answer on the other.
    Unmatched { side: Side, label: TsLabel },
}

/// One pair along a counterexample, with the reason it cannot be related.
#[derive(Debug, Clone, PartialEq)]
pub struct CexStep {
    pub left: usize,
    pub right: usize,
    pub time: Ticks,
    pub violation: Violation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BisimRelation {
    pub h: f64,
    pub eps: f64,
    /// Retained pairs `(left node, right node)`; the relation is read symmetrically.
    pub pairs: Vec<(usize, usize)>,
    pub accepted: bool,
    pub rounds: usize,
    pub counterexample: Vec<CexStep>,
}

impl BisimRelation {
    pub fn contains(&self, a: usize, b: usize) -> bool {
        self.pairs.binary_search(&(a, b)).is_ok()
    }

    /// Counterexample as CSV with header `t,left,right,violation`.
    pub fn counterexample_csv(&self) -> String {
        let mut out = String::from("t,left,right,violation\n");
        for s in &self.counterexample {
            let why = match &s.violation {
                Violation::Distance { value, time_gap } => {
                    format!("distance {value} time gap {}", time_gap.secs())
                }
                Violation::Unmatched { side, label } => {
                    let side = match side {
                        Side::Left => "left",
                        Side::Right => "right",
                    };
                    format!("unmatched {side} move {label}")
                }
            };
            let _ = writeln!(out, "{},{},{},{why}", s.time.secs(), s.left, s.right);
        }
        out
    }
}

/// Column pairs of the variables present in both systems.
pub fn shared_columns(a: &TransitionSystem, b: &TransitionSystem) -> Vec<(usize, usize)> {
    a.vars
        .iter()
        .enumerate()
        .filter_map(|(i, x)| b.vars.iter().position(|y| y == x).map(|j| (i, j)))
        .collect()
}

/// L2 distance over the shared columns.
pub fn distance(cols: &[(usize, usize)], a: &[f64], b: &[f64]) -> f64 {
    cols.iter()
        .map(|&(i, j)| (a[i] - b[j]).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Communication labels match when channels agree and values are within `eps`.
pub fn labels_match(a: &TsLabel, b: &TsLabel, eps: f64) -> bool {
    match (a, b) {
        (TsLabel::Tau, TsLabel::Tau) => true,
        (TsLabel::Comm { chan: c1, value: v1 }, TsLabel::Comm { chan: c2, value: v2 }) => {
            c1 == c2 && (v1 - v2).abs() <= eps
        }
        _ => false,
    }
}

struct Ctx<'a> {
    l: &'a TransitionSystem,
    r: &'a TransitionSystem,
    cols: Vec<(usize, usize)>,
    h: Ticks,
    eps: f64,
}

impl Ctx<'_> {
    fn dist(&self, side: Side, this: &[f64], other: &[f64]) -> f64 {
        match side {
            Side::Left => distance(&self.cols, this, other),
            Side::Right => distance(&self.cols, other, this),
        }
    }

    fn sys(&self, side: Side) -> (&TransitionSystem, &TransitionSystem) {
        match side {
            Side::Left => (self.l, self.r),
            Side::Right => (self.r, self.l),
        }
    }

    /// Whether the move `label` to `a2` of node `a` on `side` is answered from `b`,
    /// possibly after internal steps of the other side.
    /// `rel(x, y)` is orientation-aware: `x` lives on `side`. On failure, returns a
    /// successor pair whose removal caused it, if any.
    fn answered(
        &self,
        side: Side,
        label: &TsLabel,
        a: usize,
        a2: usize,
        b: usize,
        rel: &impl Fn(usize, usize) -> bool,
    ) -> Result<(), Option<(usize, usize)>> {
        let (_, other) = self.sys(side);
        let mut blame = None;
        let mut stack = vec![b];
        let mut seen = HashSet::new();
        while let Some(b) = stack.pop() {
            if !seen.insert(b) {
                continue;
            }
            match self.answered_from(side, label, a, a2, b, rel) {
                Ok(()) => return Ok(()),
                Err(x) => blame = blame.or(x),
            }
            if *label != TsLabel::Tau {
                stack.extend(
                    other.succ[b]
                        .iter()
                        .filter(|(l, _)| *l == TsLabel::Tau)
                        .map(|&(_, b2)| b2),
                );
            }
        }
        Err(blame)
    }

    fn answered_from(
        &self,
        side: Side,
        label: &TsLabel,
        a: usize,
        a2: usize,
        b: usize,
        rel: &impl Fn(usize, usize) -> bool,
    ) -> Result<(), Option<(usize, usize)>> {
        let (_, other) = self.sys(side);
        let mut blame = None;
        match label {
            TsLabel::Duration(t) => {
                if *t <= self.h && rel(a2, b) {
                    return Ok(());
                }
                // Delays on the other side may span several chunks.
                let (this, _) = self.sys(side);
                let target = &this.nodes[a2];
                let mut stack = vec![(b, Ticks::ZERO)];
                while let Some((node, acc)) = stack.pop() {
                    for (l2, b2) in &other.succ[node] {
                        let TsLabel::Duration(t2) = l2 else { continue };
                        let acc2 = acc + *t2;
                        if acc2.0 > t.0 + self.h.0 {
                            continue;
                        }
                        if (t.0 - acc2.0).abs() <= self.h.0 {
                            if rel(a2, *b2) {
                                return Ok(());
                            }
                            blame.get_or_insert((a2, *b2));
                        }
                        let nb = &other.nodes[*b2];
                        let held = nb.now < target.now
                            || self.dist(side, &target.vals, &nb.vals) <= self.eps;
                        if held && acc2.0 < t.0 + self.h.0 {
                            stack.push((*b2, acc2));
                        }
                    }
                }
            }
            TsLabel::Tau | TsLabel::Comm { .. } => {
                if *label == TsLabel::Tau && rel(a2, b) {
                    return Ok(());
                }
                for (l2, b2) in &other.succ[b] {
                    if labels_match(label, l2, self.eps) {
                        if rel(a2, *b2) {
                            return Ok(());
                        }
                        blame.get_or_insert((a2, *b2));
                    }
                }
                for (l2, bs) in &other.succ[b] {
                    let TsLabel::Duration(t) = l2 else { continue };
                    if t.0 <= 0 || *t > self.h || !rel(a, *bs) {
                        continue;
                    }
                    for (l3, b2) in &other.succ[*bs] {
                        if labels_match(label, l3, self.eps) {
                            if rel(a2, *b2) {
                                return Ok(());
                            }
                            blame.get_or_insert((a2, *b2));
                        }
                    }
                }
            }
        }
        Err(blame)
    }

    /// First violated clause of the pair `(a, b)` under `rel`, with a blamed successor.
    fn check(
        &self,
        a: usize,
        b: usize,
        rel: &impl Fn(usize, usize) -> bool,
    ) -> Option<(Violation, Option<(usize, usize)>)> {
        for (label, a2) in &self.l.succ[a] {
            if let Err(blame) = self.answered(Side::Left, label, a, *a2, b, rel) {
                let v = Violation::Unmatched {
                    side: Side::Left,
                    label: label.clone(),
                };
                return Some((v, blame));
            }
        }
        let flipped = |x: usize, y: usize| rel(y, x);
        for (label, b2) in &self.r.succ[b] {
            if let Err(blame) = self.answered(Side::Right, label, b, *b2, a, &flipped) {
                let v = Violation::Unmatched {
                    side: Side::Right,
                    label: label.clone(),
                };
                return Some((v, blame.map(|(y, x)| (x, y))));
            }
        }
        None
    }

    fn close(&self, a: usize, b: usize) -> Result<(), Violation> {
        let (na, nb) = (&self.l.nodes[a], &self.r.nodes[b]);
        let gap = Ticks((na.now.0 - nb.now.0).abs());
        let value = distance(&self.cols, &na.vals, &nb.vals);
        if gap <= self.h && value <= self.eps {
            Ok(())
        } else {
            Err(Violation::Distance {
                value,
                time_gap: gap,
            })
        }
    }
}

/// Greatest (h, eps)-approximate bisimulation between two transition systems.
///
/// Starts from every pair whose valuations are within `eps` over the shared
/// variables and whose times are within `h`, then deletes pairs violating the
/// action or the duration clause until nothing changes. Accepted when every
/// initial node of each side is related to some initial node of the other.
pub fn max_bisim(l: &TransitionSystem, r: &TransitionSystem, h: f64, eps: f64) -> BisimRelation {
    let ctx = Ctx {
        l,
        r,
        cols: shared_columns(l, r),
        h: Ticks::from_secs(h),
        eps,
    };
    let mut by_time: Vec<usize> = (0..r.nodes.len()).collect();
    by_time.sort_by_key(|&j| r.nodes[j].now);
    let mut alive: HashSet<(usize, usize)> = HashSet::new();
    for (a, na) in l.nodes.iter().enumerate() {
        let lo = Ticks(na.now.0 - ctx.h.0);
        let start = by_time.partition_point(|&j| r.nodes[j].now < lo);
        for &b in &by_time[start..] {
            if r.nodes[b].now.0 > na.now.0 + ctx.h.0 {
                break;
            }
            if ctx.close(a, b).is_ok() {
                alive.insert((a, b));
            }
        }
    }

    let mut removed: HashMap<(usize, usize), (usize, Violation, Option<(usize, usize)>)> =
        HashMap::new();
    let mut rounds = 0;
    loop {
        rounds += 1;
        let mut order: Vec<(usize, usize)> = alive.iter().copied().collect();
        order.sort_unstable();
        let rel = |x: usize, y: usize| alive.contains(&(x, y));
        let dead: Vec<_> = order
            .into_iter()
            .filter_map(|(a, b)| ctx.check(a, b, &rel).map(|(v, blame)| ((a, b), v, blame)))
            .collect();
        if dead.is_empty() {
            break;
        }
        for (pair, v, blame) in dead {
            alive.remove(&pair);
            removed.insert(pair, (rounds, v, blame));
        }
    }

    let related = |x: usize, ys: &[usize], flip: bool| {
        ys.iter().any(|&y| {
            let p = if flip { (y, x) } else { (x, y) };
            alive.contains(&p)
        })
    };
    let accepted = l.initial.iter().all(|&a| related(a, &r.initial, false))
        && r.initial.iter().all(|&b| related(b, &l.initial, true));

    let mut counterexample = Vec::new();
    if !accepted {
        let start = l
            .initial
            .iter()
            .flat_map(|&a| r.initial.iter().map(move |&b| (a, b)))
            .find(|p| !alive.contains(p));
        let mut cur = start;
        let mut seen = HashSet::new();
        while let Some((a, b)) = cur {
            if !seen.insert((a, b)) {
                break;
            }
            let time = l.nodes[a].now.min(r.nodes[b].now);
            match removed.get(&(a, b)) {
                Some((_, v, blame)) => {
                    counterexample.push(CexStep {
                        left: a,
                        right: b,
                        time,
                        violation: v.clone(),
                    });
                    cur = *blame;
                }
                None => {
                    let violation = match ctx.close(a, b) {
                        Err(v) => v,
                        Ok(()) => break,
                    };
                    counterexample.push(CexStep {
                        left: a,
                        right: b,
                        time,
                        violation,
                    });
                    cur = None;
                }
            }
        }
    }

    let mut pairs: Vec<(usize, usize)> = alive.into_iter().collect();
    pairs.sort_unstable();
    BisimRelation {
        h,
        eps,
        pairs,
        accepted,
        rounds,
        counterexample,
    }
}
