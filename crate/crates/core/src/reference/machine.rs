use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use super::history::{hermite, History};
use super::integrate::{find_exit, rk4_step, EXIT_TOLERANCE};
use crate::exec::{
    CEvent, CExpr, Chooser, Compiled, Event, Label, Machine, Node, NodeId, RunError, Settled,
};
use crate::syntax::EvalError;
use crate::Ticks;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Frame {
    Exec(NodeId),
    Loop(NodeId, u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Status {
    Ready,
    Sleeping(Ticks),
    Evolving(NodeId),
    Blocked(NodeId),
    Stopped,
    Done,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Comp {
    stack: Vec<Frame>,
    status: Status,
}

/// One evaluation of a guard, with the distance of each ordering atom to its boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct GuardEval {
    pub time: Ticks,
    pub node: NodeId,
    pub holds: bool,
    pub margins: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DomainExitRecord {
    pub time: Ticks,
    pub node: NodeId,
}

#[derive(Debug, Clone, Copy)]
struct Offer {
    comp: usize,
    /// Index into the handler list; `None` for a plain input or output node.
    handler: Option<usize>,
}

#[derive(Debug, Clone, Copy)]
struct Match {
    writer: Offer,
    reader: Offer,
}

/// Dense-time interpreter: assignments and communications take no time, waits
/// advance the clock and continuous statements are integrated with RK4.
#[derive(Debug, Clone)]
pub struct ReferenceMachine {
    prog: Arc<Compiled>,
    comps: Vec<Comp>,
    vals: Vec<f64>,
    hist: Vec<History<f64>>,
    now: Ticks,
    dt: Ticks,
    pending: Option<Match>,
    pub guard_log: Option<Vec<GuardEval>>,
    pub exit_log: Vec<DomainExitRecord>,
    /// Continuous statements entered with their domain holding.
    pub entry_log: Vec<(Ticks, NodeId)>,
}

impl ReferenceMachine {
    /// `init` gives starting values; unlisted variables start at zero.
    pub fn new(prog: Arc<Compiled>, init: &[(String, f64)], dt_ref: f64) -> ReferenceMachine {
        let mut vals = vec![0.0; prog.vars.len()];
        for (x, v) in init {
            if let Some(i) = prog.var(x) {
                vals[i] = *v;
            }
        }
        let hist = vals.iter().map(|&v| History::constant(0.0, v)).collect();
        let dt_ref = prog.delay.map_or(dt_ref, |r| dt_ref.min(r));
        let comps = prog
            .roots
            .iter()
            .map(|&(_, root)| Comp {
                stack: vec![Frame::Exec(root)],
                status: Status::Ready,
            })
            .collect();
        ReferenceMachine {
            prog,
            comps,
            vals,
            hist,
            now: Ticks::ZERO,
            dt: Ticks::from_secs(dt_ref).max(Ticks(1)),
            pending: None,
            guard_log: None,
            exit_log: Vec::new(),
            entry_log: Vec::new(),
        }
    }

    pub fn with_guard_log(mut self) -> ReferenceMachine {
        self.guard_log = Some(Vec::new());
        self
    }

    pub fn program(&self) -> &Compiled {
        &self.prog
    }

    pub fn value(&self, name: &str) -> Option<f64> {
        self.prog.var(name).map(|i| self.vals[i])
    }

    /// Value of a variable at an earlier time, from the retained history window.
    pub fn value_at(&self, name: &str, t: f64) -> Option<f64> {
        self.prog.var(name).map(|i| self.hist[i].value_at(t))
    }

    fn eval(&self, e: &CExpr) -> Result<f64, RunError> {
        let t = self.now.secs();
        e.eval(&|i| self.vals[i], &|i, r| self.hist[i].value_at(t - r))
            .map_err(|err| RunError::Eval { time: self.now, err })
    }

    fn set(&mut self, var: usize, v: f64) {
        self.vals[var] = v;
        self.hist[var].push_const(self.now.secs(), v);
    }

    fn tau(&self, log: &mut Vec<Event>) {
        log.push(Event {
            time: self.now,
            label: Label::Tau,
        });
    }

    /// Runs component `i` until it blocks, sleeps, evolves or terminates.
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
                    self.set(*var, v);
                    self.tau(log);
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
                    let t = self.now.secs();
                    let cur = |k: usize| self.vals[k];
                    let del = |k: usize, r: f64| self.hist[k].value_at(t - r);
                    let holds = cond
                        .eval(&cur, &del)
                        .map_err(|err| RunError::Eval { time: self.now, err })?;
                    if let Some(guards) = &mut self.guard_log {
                        let mut margins = Vec::new();
                        cond.atom_margins(&cur, &del, &mut margins)
                            .map_err(|err| RunError::Eval { time: self.now, err })?;
                        let rec = GuardEval {
                            time: self.now,
                            node: id,
                            holds,
                            margins,
                        };
                        guards.push(rec);
                    }
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
                Node::Dde { dde, .. } => {
                    let t = self.now.secs();
                    let inside = dde
                        .dom
                        .eval(&|k| self.vals[k], &|k, r| self.hist[k].value_at(t - r))
                        .map_err(|err| RunError::Eval { time: self.now, err })?;
                    if inside {
                        self.entry_log.push((self.now, id));
                        self.comps[i].status = Status::Evolving(id);
                        return Ok(());
                    }
                    self.exit_log.push(DomainExitRecord {
                        time: self.now,
                        node: id,
                    });
                    self.tau(log);
                }
            }
        }
        self.comps[i].status = Status::Done;
        Ok(())
    }

    fn offers(&self, comp: usize, out: &mut Vec<(usize, bool, Offer)>) {
        let node = match self.comps[comp].status {
            Status::Blocked(id) | Status::Evolving(id) => id,
            _ => return,
        };
        let plain = Offer {
            comp,
            handler: None,
        };
        match &self.prog.nodes[node] {
            Node::Input { chan, .. } => out.push((*chan, false, plain)),
            Node::Output { chan, .. } => out.push((*chan, true, plain)),
            Node::Choice(hs) | Node::Dde { handlers: hs, .. } => {
                for (k, (ev, _)) in hs.iter().enumerate() {
                    let offer = Offer {
                        comp,
                        handler: Some(k),
                    };
                    out.push((ev.chan(), ev.is_output(), offer));
                }
            }
            _ => {}
        }
    }

    fn find_match(&self) -> Option<Match> {
        let mut all = Vec::new();
        for c in 0..self.comps.len() {
            self.offers(c, &mut all);
        }
        for ch in 0..self.prog.chans.len() {
            for &(wc, w_out, w) in &all {
                if wc != ch || !w_out {
                    continue;
                }
                let reader = all
                    .iter()
                    .find(|&&(rc, r_out, r)| rc == ch && !r_out && r.comp != w.comp);
                if let Some(&(_, _, r)) = reader {
                    return Some(Match {
                        writer: w,
                        reader: r,
                    });
                }
            }
        }
        None
    }

    /// The event and continuation of an offer.
    fn resolve(&self, o: Offer) -> (CEvent, Option<NodeId>) {
        let node = match self.comps[o.comp].status {
            Status::Blocked(id) | Status::Evolving(id) => id,
            _ => unreachable!("offer from an inactive component"),
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
            (Node::Choice(hs) | Node::Dde { handlers: hs, .. }, Some(k)) => {
                (hs[k].0.clone(), Some(hs[k].1))
            }
            _ => unreachable!("offer does not match its node"),
        }
    }

    fn evolving(&self) -> Vec<(usize, NodeId)> {
        self.comps
            .iter()
            .enumerate()
            .filter_map(|(i, c)| match c.status {
                Status::Evolving(id) => Some((i, id)),
                _ => None,
            })
            .collect()
    }

    fn prune(&mut self) {
        let keep = match self.prog.delay {
            Some(r) => self.now.secs() - r - 4.0 * self.dt.secs(),
            None => self.now.secs(),
        };
        for h in &mut self.hist {
            h.prune_before(keep);
        }
    }
}

struct StepResult {
    t0: f64,
    t1: f64,
    x0: Vec<f64>,
    x1: Vec<f64>,
    k0: Vec<f64>,
    k1: Vec<f64>,
}

impl StepResult {
    fn interpolate(&self, t: f64) -> Vec<f64> {
        let span = self.t1 - self.t0;
        let s = ((t - self.t0) / span).clamp(0.0, 1.0);
        (0..self.x0.len())
            .map(|k| hermite(self.x0[k], self.x1[k], self.k0[k], self.k1[k], span, s))
            .collect()
    }
}

/// Continuous part of the evolving components flattened into one state vector.
struct Lockstep<'a> {
    slots: Vec<usize>,
    pos: Vec<Option<usize>>,
    rhs: Vec<&'a CExpr>,
}

impl<'a> Lockstep<'a> {
    fn new(prog: &'a Compiled, active: &[(usize, NodeId)]) -> Lockstep<'a> {
        let mut slots = Vec::new();
        let mut rhs = Vec::new();
        for &(_, id) in active {
            if let Node::Dde { dde, .. } = &prog.nodes[id] {
                slots.extend(&dde.vars);
                rhs.extend(dde.rhs.iter());
            }
        }
        let mut pos = vec![None; prog.vars.len()];
        for (k, &s) in slots.iter().enumerate() {
            pos[s] = Some(k);
        }
        Lockstep { slots, pos, rhs }
    }

    fn eval(
        &self,
        t: f64,
        x: &[f64],
        vals: &[f64],
        hist: &[History<f64>],
        out: &mut [f64],
    ) -> Result<(), EvalError> {
        let cur = |s: usize| self.pos[s].map_or(vals[s], |k| x[k]);
        let del = |s: usize, r: f64| hist[s].value_at(t - r);
        for (o, e) in out.iter_mut().zip(&self.rhs) {
            *o = e.eval(&cur, &del)?;
        }
        Ok(())
    }
}

impl ReferenceMachine {
    /// Whether every evolving component is still inside its domain with state `x` at `t`.
    fn inside_all(
        &self,
        active: &[(usize, NodeId)],
        ls: &Lockstep<'_>,
        t: f64,
        x: &[f64],
    ) -> Result<Option<usize>, EvalError> {
        let cur = |s: usize| ls.pos[s].map_or(self.vals[s], |k| x[k]);
        let del = |s: usize, r: f64| self.hist[s].value_at(t - r);
        for (n, &(_, id)) in active.iter().enumerate() {
            if let Node::Dde { dde, .. } = &self.prog.nodes[id] {
                if !dde.dom.eval(&cur, &del)? {
                    return Ok(Some(n));
                }
            }
        }
        Ok(None)
    }

    /// One RK4 step from `self.now` to `t1` without committing it.
    fn trial_step(&self, ls: &Lockstep<'_>, t1: Ticks) -> Result<StepResult, RunError> {
        let (t0s, t1s) = (self.now.secs(), t1.secs());
        let x0: Vec<f64> = ls.slots.iter().map(|&s| self.vals[s]).collect();
        let (vals, hist) = (&self.vals, &self.hist);
        let (x1, k0, k1) = rk4_step(t0s, t1s - t0s, &x0, &mut |t, x: &[f64], out: &mut [f64]| {
            ls.eval(t, x, vals, hist, out)
        })
        .map_err(|err| RunError::Eval { time: self.now, err })?;
        Ok(StepResult { t0: t0s, t1: t1s, x0, x1, k0, k1 })
    }

    fn commit(&mut self, ls: &Lockstep<'_>, st: &StepResult, t1: Ticks) {
        for (k, &s) in ls.slots.iter().enumerate() {
            self.hist[s].push_hermite(st.t0, st.t1, st.x0[k], st.x1[k], st.k0[k], st.k1[k]);
            self.vals[s] = st.x1[k];
        }
        self.now = t1;
    }

    fn emit_samples(
        &self,
        from: Ticks,
        to: Ticks,
        start: Ticks,
        end: Ticks,
        grid: Ticks,
        ls: &Lockstep<'_>,
        sample: &mut dyn FnMut(Ticks, &[f64]),
    ) {
        let mut g = from.next_multiple(grid);
        let mut buf = self.vals.clone();
        while g <= to && g < end {
            if g > start {
                for &s in &ls.slots {
                    buf[s] = self.hist[s].value_at(g.secs());
                }
                sample(g, &buf);
            }
            g = g.next_multiple(grid);
        }
    }
}

impl Machine for ReferenceMachine {
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
        for i in 0..self.comps.len() {
            if self.comps[i].status == Status::Ready {
                self.run_comp(i, chooser, log)?;
            }
        }
        if let Some(m) = self.find_match() {
            self.pending = Some(m);
            return Ok(Settled::CommReady);
        }
        let mut next: Option<Ticks> = None;
        let mut active = false;
        let mut blocked = Vec::new();
        for (c, (name, _)) in self.comps.iter().zip(&self.prog.roots) {
            match c.status {
                Status::Sleeping(w) => {
                    next = Some(next.map_or(w, |n| n.min(w)));
                    active = true;
                }
                Status::Evolving(_) => active = true,
                Status::Blocked(_) => blocked.push(name.clone()),
                Status::Ready | Status::Stopped | Status::Done => {}
            }
        }
        Ok(if active {
            Settled::NeedsTime { next }
        } else if blocked.is_empty() {
            Settled::Finished
        } else {
            Settled::Deadlock(blocked)
        })
    }

    fn fire(&mut self, log: &mut Vec<Event>) -> Result<(), RunError> {
        let m = self.pending.take().expect("fire called without a ready communication");
        let (w_ev, w_next) = self.resolve(m.writer);
        let (r_ev, r_next) = self.resolve(m.reader);
        let value = match &w_ev {
            CEvent::Output { expr, .. } => self.eval(expr)?,
            CEvent::Input { .. } => unreachable!("writer offers an output"),
        };
        if let CEvent::Input { var, .. } = r_ev {
            self.set(var, value);
        }
        for (offer, next) in [(m.writer, w_next), (m.reader, r_next)] {
            let comp = &mut self.comps[offer.comp];
            if let Some(body) = next {
                comp.stack.push(Frame::Exec(body));
            }
            comp.status = Status::Ready;
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
        let active = self.evolving();
        let prog = Arc::clone(&self.prog);
        let ls = Lockstep::new(&prog, &active);
        while self.now < target {
            let t0 = self.now;
            let t1 = (t0 + self.dt).min(target);
            if ls.slots.is_empty() {
                self.now = t1;
                self.emit_samples(t0, t1, start, target, grid, &ls, sample);
                continue;
            }
            let st = self.trial_step(&ls, t1)?;
            let exit = self
                .inside_all(&active, &ls, st.t1, &st.x1)
                .map_err(|err| RunError::Eval { time: t1, err })?;
            let Some(first) = exit else {
                self.commit(&ls, &st, t1);
                self.emit_samples(t0, t1, start, target, grid, &ls, sample);
                self.prune();
                continue;
            };
            let mut probe = |t: f64| -> Result<bool, EvalError> {
                let x = st.interpolate(t);
                Ok(self.inside_all(&active, &ls, t, &x)?.is_none())
            };
            let tf = find_exit(st.t0, st.t1, EXIT_TOLERANCE, &mut probe)
                .map_err(|err| RunError::Eval { time: t0, err })?;
            let tf = Ticks((tf * Ticks::PER_SEC as f64).ceil() as i64)
                .max(t0 + Ticks(1))
                .min(t1);
            let short = self.trial_step(&ls, tf)?;
            self.commit(&ls, &short, tf);
            self.emit_samples(t0, tf, start, tf, grid, &ls, sample);
            let mut exited = Vec::new();
            for &(c, id) in &active {
                let single = [(c, id)];
                let out = self
                    .inside_all(&single, &ls, tf.secs(), &short.x1)
                    .map_err(|err| RunError::Eval { time: tf, err })?;
                if out.is_some() {
                    exited.push((c, id));
                }
            }
            if exited.is_empty() {
                exited.push(active[first]);
            }
            for (c, id) in exited {
                self.comps[c].status = Status::Ready;
                self.exit_log.push(DomainExitRecord { time: tf, node: id });
            }
            break;
        }
        for c in &mut self.comps {
            if c.status == Status::Sleeping(self.now) {
                c.status = Status::Ready;
            }
        }
        Ok(self.now)
    }

    fn control_key(&self) -> u64 {
        let mut h = DefaultHasher::new();
        self.comps.hash(&mut h);
        h.finish()
    }
}
