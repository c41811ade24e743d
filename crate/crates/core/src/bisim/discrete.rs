use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use crate::exec::{
    drive, CEvent, CExpr, Chooser, Compiled, Event, Label, Machine, Node, NodeId, RunError,
    SeededChooser, Settled, Trace,
};
use crate::syntax::Process;
use crate::Ticks;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Frame {
    Exec(NodeId),
    Loop(NodeId, u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Status {
    Ready,
    /// Suspended until the next delta boundary.
    Delta,
    Sleeping(Ticks),
    Blocked(NodeId),
    Stopped,
    Done,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Comp {
    stack: Vec<Frame>,
    status: Status,
}

#[derive(Debug, Clone, Copy)]
struct Offer {
    comp: usize,
    handler: Option<usize>,
}

/// Delta-cycle interpreter for processes without continuous statements.
///
/// Reads see committed values only. An assignment schedules a write and
/// suspends its component until the next delta boundary, where all pending
/// writes are committed together. `x@r` reads the value held just before
/// `now - r`; lookups at or before time zero see the value at the end of time zero.
#[derive(Debug, Clone)]
pub struct DiscreteMachine {
    prog: Arc<Compiled>,
    comps: Vec<Comp>,
    vals: Vec<f64>,
    init: Vec<f64>,
    pending: Vec<(usize, f64)>,
    /// Commit history per variable, oldest first.
    hist: Vec<Vec<(Ticks, f64)>>,
    now: Ticks,
    ready_comm: Option<(Offer, Offer)>,
    /// Executed assignments with their time, when enabled.
    pub assign_log: Option<Vec<(Ticks, NodeId)>>,
}

impl DiscreteMachine {
    pub fn new(prog: Arc<Compiled>, init: &[(String, f64)]) -> Result<DiscreteMachine, RunError> {
        if prog.has_dde() {
            return Err(RunError::Unsupported(
                "continuous statement in a discrete process".into(),
            ));
        }
        let mut vals = vec![0.0; prog.vars.len()];
        for (x, v) in init {
            if let Some(i) = prog.var(x) {
                vals[i] = *v;
            }
        }
        let comps = prog
            .roots
            .iter()
            .map(|&(_, root)| Comp {
                stack: vec![Frame::Exec(root)],
                status: Status::Ready,
            })
            .collect();
        Ok(DiscreteMachine {
            hist: vec![Vec::new(); vals.len()],
            init: vals.clone(),
            prog,
            comps,
            vals,
            pending: Vec::new(),
            now: Ticks::ZERO,
            ready_comm: None,
            assign_log: None,
        })
    }

    pub fn with_assign_log(mut self) -> DiscreteMachine {
        self.assign_log = Some(Vec::new());
        self
    }

    pub fn program(&self) -> &Compiled {
        &self.prog
    }

    pub fn value(&self, name: &str) -> Option<f64> {
        self.prog.var(name).map(|i| self.vals[i])
    }

    fn delayed(&self, var: usize, r: f64) -> f64 {
        let s = self.now.0 - Ticks::from_secs(r).0;
        let h = &self.hist[var];
        let k = if s <= 0 {
            h.partition_point(|&(t, _)| t.0 <= 0)
        } else {
            h.partition_point(|&(t, _)| t.0 < s)
        };
        if k == 0 {
            self.init[var]
        } else {
            h[k - 1].1
        }
    }

    fn eval(&self, e: &CExpr) -> Result<f64, RunError> {
        e.eval(&|i| self.vals[i], &|i, r| self.delayed(i, r))
            .map_err(|err| RunError::Eval { time: self.now, err })
    }

    fn tau(&self, log: &mut Vec<Event>) {
        log.push(Event {
            time: self.now,
            label: Label::Tau,
        });
    }

    fn run_comp(
        &mut self,
        i: usize,
        chooser: &mut dyn Chooser,
        log: &mut Vec<Event>,
    ) -> Result<(), RunError> {
        let prog = Arc::clone(&self.prog);
        while let Some(frame) = self.comps[i].stack.pop() {
            let id = match frame {
                Frame::Loop(body, left) => {
                    if left > 0 {
                        self.comps[i].stack.push(Frame::Loop(body, left - 1));
                        self.comps[i].stack.push(Frame::Exec(body));
                    }
                    continue;
                }
                Frame::Exec(id) => id,
            };
            match &prog.nodes[id] {
                Node::Skip => self.tau(log),
                Node::Stop => {
                    self.comps[i].stack.clear();
                    self.comps[i].status = Status::Stopped;
                    return Ok(());
                }
                Node::Assign { var, expr, .. } => {
                    let v = self.eval(expr)?;
                    self.pending.push((*var, v));
                    if let Some(l) = &mut self.assign_log {
                        l.push((self.now, id));
                    }
                    self.tau(log);
                    self.comps[i].status = Status::Delta;
                    return Ok(());
                }
                Node::Wait(d) => {
                    if d.0 > 0 {
                        self.comps[i].status = Status::Sleeping(self.now + *d);
                        return Ok(());
                    }
                }
                Node::Input { .. } | Node::Output { .. } | Node::Choice(_) => {
                    self.comps[i].status = Status::Blocked(id);
                    return Ok(());
                }
                Node::Seq(a, b) => {
                    self.comps[i].stack.push(Frame::Exec(*b));
                    self.comps[i].stack.push(Frame::Exec(*a));
                }
                Node::Guard { cond, body, .. } => {
                    let holds = cond
                        .eval(&|k| self.vals[k], &|k, r| self.delayed(k, r))
                        .map_err(|err| RunError::Eval { time: self.now, err })?;
                    self.tau(log);
                    if holds {
                        self.comps[i].stack.push(Frame::Exec(*body));
                    }
                }
                Node::IChoice(a, b) => {
                    let pick = if chooser.choose(2) == 0 { *a } else { *b };
                    self.tau(log);
                    self.comps[i].stack.push(Frame::Exec(pick));
                }
                Node::Repeat(body, n) => self.comps[i].stack.push(Frame::Loop(*body, *n)),
                Node::Dde { .. } => {
                    return Err(RunError::Unsupported(
                        "continuous statement in a discrete process".into(),
                    ))
                }
            }
        }
        self.comps[i].status = Status::Done;
        Ok(())
    }

    fn offers(&self) -> Vec<(usize, bool, Offer)> {
        let mut out = Vec::new();
        for (comp, c) in self.comps.iter().enumerate() {
            let Status::Blocked(node) = c.status else {
                continue;
            };
            let plain = Offer {
                comp,
                handler: None,
            };
            match &self.prog.nodes[node] {
                Node::Input { chan, .. } => out.push((*chan, false, plain)),
                Node::Output { chan, .. } => out.push((*chan, true, plain)),
                Node::Choice(hs) => {
                    for (k, (ev, _)) in hs.iter().enumerate() {
                        let o = Offer {
                            comp,
                            handler: Some(k),
                        };
                        out.push((ev.chan(), ev.is_output(), o));
                    }
                }
                _ => {}
            }
        }
        out
    }

    fn find_match(&self) -> Option<(Offer, Offer)> {
        let all = self.offers();
        for ch in 0..self.prog.chans.len() {
            for &(wc, w_out, w) in &all {
                if wc != ch || !w_out {
                    continue;
                }
                if let Some(&(_, _, r)) = all
                    .iter()
                    .find(|&&(rc, r_out, r)| rc == ch && !r_out && r.comp != w.comp)
                {
                    return Some((w, r));
                }
            }
        }
        None
    }

    fn resolve(&self, o: Offer) -> (CEvent, Option<NodeId>) {
        let Status::Blocked(node) = self.comps[o.comp].status else {
            unreachable!("offer from an inactive component")
        };
        match (&self.prog.nodes[node], o.handler) {
            (Node::Input { chan, var }, None) => (
                CEvent::Input {
                    chan: *chan,
                    var: *var,
                },
                None,
            ),
            (Node::Output { chan, expr }, None) => (
                CEvent::Output {
                    chan: *chan,
                    expr: expr.clone(),
                },
                None,
            ),
            (Node::Choice(hs), Some(k)) => (hs[k].0.clone(), Some(hs[k].1)),
            _ => unreachable!("offer does not match its node"),
        }
    }

    fn commit(&mut self) {
        for (var, v) in std::mem::take(&mut self.pending) {
            self.vals[var] = v;
            self.hist[var].push((self.now, v));
        }
        for c in &mut self.comps {
            if c.status == Status::Delta {
                c.status = Status::Ready;
            }
        }
    }

    fn prune(&mut self) {
        let Some(r) = self.prog.delay else {
            for h in &mut self.hist {
                let n = h.len();
                if n > 1 {
                    h.drain(..n - 1);
                }
            }
            return;
        };
        let keep = self.now.0 - Ticks::from_secs(r).0;
        for h in &mut self.hist {
            let k = h.partition_point(|&(t, _)| t.0 < keep && t.0 > 0);
            let zero_end = h.partition_point(|&(t, _)| t.0 <= 0);
            if k > zero_end + 1 {
                h.drain(zero_end..k - 1);
            }
        }
    }
}

impl Machine for DiscreteMachine {
    fn var_names(&self) -> &[String] {
        &self.prog.vars
    }

    fn now(&self) -> Ticks {
        self.now
    }

    fn values(&self) -> &[f64] {
        &self.vals
    }

    fn settle(
        &mut self,
        chooser: &mut dyn Chooser,
        log: &mut Vec<Event>,
    ) -> Result<Settled, RunError> {
        loop {
            for i in 0..self.comps.len() {
                if self.comps[i].status == Status::Ready {
                    self.run_comp(i, chooser, log)?;
                }
            }
            if let Some(m) = self.find_match() {
                self.ready_comm = Some(m);
                return Ok(Settled::CommReady);
            }
            let delta = self.comps.iter().any(|c| c.status == Status::Delta);
            if self.pending.is_empty() && !delta {
                break;
            }
            self.commit();
        }
        let mut next: Option<Ticks> = None;
        let mut blocked = Vec::new();
        for (c, (name, _)) in self.comps.iter().zip(&self.prog.roots) {
            match c.status {
                Status::Sleeping(w) => next = Some(next.map_or(w, |n| n.min(w))),
                Status::Blocked(_) => blocked.push(name.clone()),
                _ => {}
            }
        }
        Ok(if next.is_some() {
            Settled::NeedsTime { next }
        } else if blocked.is_empty() {
            Settled::Finished
        } else {
            Settled::Deadlock(blocked)
        })
    }

    fn fire(&mut self, log: &mut Vec<Event>) -> Result<(), RunError> {
        let (w, r) = self
            .ready_comm
            .take()
            .expect("fire called without a ready communication");
        let (w_ev, w_next) = self.resolve(w);
        let (r_ev, r_next) = self.resolve(r);
        let value = match &w_ev {
            CEvent::Output { expr, .. } => self.eval(expr)?,
            CEvent::Input { .. } => unreachable!("writer offers an output"),
        };
        if let CEvent::Input { var, .. } = r_ev {
            self.pending.push((var, value));
        }
        for (offer, next) in [(w, w_next), (r, r_next)] {
            let comp = &mut self.comps[offer.comp];
            if let Some(body) = next {
                comp.stack.push(Frame::Exec(body));
            }
            comp.status = Status::Delta;
        }
        log.push(Event {
            time: self.now,
            label: Label::Comm {
                chan: self.prog.chans[w_ev.chan()].clone(),
                value,
            },
        });
        Ok(())
    }

    fn advance(
        &mut self,
        target: Ticks,
        grid: Ticks,
        sample: &mut dyn FnMut(Ticks, &[f64]),
    ) -> Result<Ticks, RunError> {
        let start = self.now;
        let mut g = start.next_multiple(grid);
        while g < target {
            sample(g, &self.vals);
            g = g.next_multiple(grid);
        }
        self.now = target;
        for c in &mut self.comps {
            if c.status == Status::Sleeping(target) {
                c.status = Status::Ready;
            }
        }
        self.prune();
        Ok(target)
    }

    fn control_key(&self) -> u64 {
        let mut h = DefaultHasher::new();
        self.comps.hash(&mut h);
        for (var, v) in &self.pending {
            var.hash(&mut h);
            v.to_bits().hash(&mut h);
        }
        h.finish()
    }
}

/// Runs a discrete process up to `t_end`, sampling every `grid` seconds.
pub fn run_discrete(
    p: &Process,
    init: &[(String, f64)],
    t_end: f64,
    grid: f64,
    seed: u64,
) -> Result<Trace, RunError> {
    let prog = Arc::new(Compiled::new(p)?);
    let mut m = DiscreteMachine::new(prog, init)?;
    drive(
        &mut m,
        Ticks::from_secs(t_end),
        Ticks::from_secs(grid),
        &mut SeededChooser::new(seed),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;

    fn run(src: &str, t_end: f64, grid: f64) -> Trace {
        run_discrete(&parse(src).unwrap(), &[], t_end, grid, 0).unwrap()
    }

    #[test]
    fn assign_then_wait() {
        let tr = run("x := 1; wait 1", 2.0, 1.0);
        assert_eq!(tr.events[0].label, Label::Tau);
        assert_eq!(tr.events[1].label, Label::Delay(Ticks::from_secs(1.0)));
        assert_eq!(tr.events.len(), 2);
        assert_eq!(tr.column("x").unwrap(), vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn reads_see_committed_values() {
        let tr = run("system S { x := 1 || y := x + 1 }", 0.0, 1.0);
        assert_eq!(tr.column("y").unwrap(), vec![1.0]);
        let tr = run("x := 1; y := x + 1", 0.0, 1.0);
        assert_eq!(tr.column("y").unwrap(), vec![2.0]);
    }

    #[test]
    fn racing_readers_synchronise_once() {
        let tr = run("system S { ch!3 || select [ch?x -> (skip), ch?y -> (skip)] }", 1.0, 1.0);
        let comms = tr.comm_events();
        assert_eq!(comms.len(), 1);
        assert_eq!(tr.column("x").unwrap()[0], 3.0);
        assert_eq!(tr.column("y").unwrap()[0], 0.0);
    }

    #[test]
    fn delayed_reads_use_the_left_limit() {
        // Euler for x' = -x@1 with h = 0.5 and constant prehistory 1:
        // y1 = 1 - 0.5, y2 = 0.5 - 0.5, y3 = 0 - 0.5 * y0, y4 = -0.5 - 0.5 * y1.
        let tr = run("x := 1; (wait 0.5; x := x + 0.5 * -x@1)*{4}", 2.0, 0.5);
        let x = tr.column("x").unwrap();
        assert_eq!(x, vec![1.0, 0.5, 0.0, -0.5, -0.75]);
    }

    #[test]
    fn continuous_statements_are_rejected() {
        let err = run_discrete(&parse("<x' = 1 & true>").unwrap(), &[], 1.0, 0.1, 0).unwrap_err();
        assert!(matches!(err, RunError::Unsupported(_)));
    }

    #[test]
    fn deadlock_is_reported() {
        let err = run_discrete(&parse("system S { ch?x || skip }").unwrap(), &[], 1.0, 0.1, 0)
            .unwrap_err();
        assert!(matches!(err, RunError::Deadlock { .. }));
    }

    #[test]
    fn assign_log_records_times() {
        let p = parse("(wait 0.5; x := x + 1)*{2}").unwrap();
        let prog = Arc::new(Compiled::new(&p).unwrap());
        let mut m = DiscreteMachine::new(prog, &[]).unwrap().with_assign_log();
        drive(&mut m, Ticks::from_secs(1.0), Ticks::from_secs(0.5), &mut SeededChooser::new(0))
            .unwrap();
        let times: Vec<f64> = m.assign_log.unwrap().iter().map(|(t, _)| t.secs()).collect();
        assert_eq!(times, vec![0.5, 1.0]);
    }
}
