use std::collections::{HashMap, VecDeque};
use std::fmt::{self, Write as _};
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use super::discrete::DiscreteMachine;
use crate::exec::{Compiled, Label, Machine, ReplayChooser, RunError, Settled};
use crate::reference::ReferenceMachine;
use crate::syntax::Process;
use crate::Ticks;

pub const DEFAULT_STATE_BUDGET: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub enum TsLabel {
    /// From the initial state to a settled state; present only when settling
    /// the initial state takes internal steps.
    Tau,
    Comm { chan: String, value: f64 },
    Duration(Ticks),
}

impl fmt::Display for TsLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TsLabel::Tau => f.write_str("tau"),
            TsLabel::Comm { chan, value } => write!(f, "{chan}.{value}"),
            TsLabel::Duration(d) => write!(f, "{}", d.secs()),
        }
    }
}

/// Why a node has no successors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeEnd {
    Finished,
    Deadlock,
    Horizon,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TsNode {
    pub now: Ticks,
    pub vals: Vec<f64>,
    pub end: Option<NodeEnd>,
}

/// Finite, tau-compressed transition system. Apart from the initial node,
/// nodes are settled states: every zero-time internal step has been taken.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionSystem {
    pub vars: Vec<String>,
    pub nodes: Vec<TsNode>,
    pub succ: Vec<Vec<(TsLabel, usize)>>,
    pub initial: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TsError {
    #[error("state budget of {0} nodes exceeded")]
    StateBudgetExceeded(usize),
    #[error(transparent)]
    Run(#[from] RunError),
}

#[derive(Debug, Clone, Copy)]
pub struct TsOptions {
    /// Integration step of the reference interpreter for processes with continuous statements.
    pub dt_ref: f64,
    pub state_budget: usize,
}

impl Default for TsOptions {
    fn default() -> TsOptions {
        TsOptions {
            dt_ref: crate::reference::DEFAULT_DT_REF,
            state_budget: DEFAULT_STATE_BUDGET,
        }
    }
}

impl TransitionSystem {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.succ.iter().map(Vec::len).sum()
    }

    /// Nodes as CSV with header `id,t,end,<vars>`.
    pub fn nodes_csv(&self) -> String {
        let mut out = String::from("id,t,end");
        for v in &self.vars {
            out.push(',');
            out.push_str(v);
        }
        out.push('\n');
        for (i, n) in self.nodes.iter().enumerate() {
            let end = match n.end {
                None => "",
                Some(NodeEnd::Finished) => "finished",
                Some(NodeEnd::Deadlock) => "deadlock",
                Some(NodeEnd::Horizon) => "horizon",
            };
            let _ = write!(out, "{i},{},{end}", n.now.secs());
            for x in &n.vals {
                let _ = write!(out, ",{x}");
            }
            out.push('\n');
        }
        out
    }

    /// Edges as CSV with header `from,to,kind,label`.
    pub fn edges_csv(&self) -> String {
        let mut out = String::from("from,to,kind,label\n");
        for (i, es) in self.succ.iter().enumerate() {
            for (l, j) in es {
                let kind = match l {
                    TsLabel::Tau => "tau",
                    TsLabel::Comm { .. } => "comm",
                    TsLabel::Duration(_) => "delay",
                };
                let _ = writeln!(out, "{i},{j},{kind},{l}");
            }
        }
        out
    }
}

/// Every settled outcome reachable from `m`, one per resolution of internal choices.
/// Also reports whether any internal step was taken.
fn outcomes<M: Machine>(m: &M) -> Result<(Vec<(M, Settled)>, bool), RunError> {
    let mut out = Vec::new();
    let mut moved = false;
    let mut prefix = Some(Vec::new());
    while let Some(p) = prefix {
        let mut ch = ReplayChooser::new(p);
        let mut m2 = m.clone();
        let mut log = Vec::new();
        let s = m2.settle(&mut ch, &mut log)?;
        moved |= !log.is_empty() || s == Settled::CommReady;
        out.push((m2, s));
        prefix = ch.next_prefix();
    }
    Ok((out, moved))
}

fn state_key<M: Machine>(m: &M) -> u64 {
    let mut h = std::collections::hash_map::DefaultHasher::new();
    m.control_key().hash(&mut h);
    m.now().hash(&mut h);
    for v in m.values() {
        v.to_bits().hash(&mut h);
    }
    h.finish()
}

struct Builder<M> {
    ts: TransitionSystem,
    index: HashMap<u64, usize>,
    queue: VecDeque<(usize, M, Settled)>,
    budget: usize,
}

impl<M: Machine> Builder<M> {
    fn intern(&mut self, m: M, s: Settled) -> Result<usize, TsError> {
        let key = state_key(&m);
        if let Some(&i) = self.index.get(&key) {
            return Ok(i);
        }
        if self.ts.nodes.len() >= self.budget {
            return Err(TsError::StateBudgetExceeded(self.budget));
        }
        let i = self.ts.nodes.len();
        self.ts.nodes.push(TsNode {
            now: m.now(),
            vals: m.values().to_vec(),
            end: None,
        });
        self.ts.succ.push(Vec::new());
        self.index.insert(key, i);
        self.queue.push_back((i, m, s));
        Ok(i)
    }
}

/// Explores `m` up to `horizon`, cutting time into chunks of at most `step`.
pub fn explore<M: Machine>(
    m: M,
    step: Ticks,
    horizon: Ticks,
    budget: usize,
) -> Result<TransitionSystem, TsError> {
    let mut b = Builder {
        ts: TransitionSystem {
            vars: m.var_names().to_vec(),
            nodes: Vec::new(),
            succ: Vec::new(),
            initial: Vec::new(),
        },
        index: HashMap::new(),
        queue: VecDeque::new(),
        budget,
    };
    let (first, moved) = outcomes(&m)?;
    if first.len() == 1 && !moved {
        let (m2, s) = first.into_iter().next().expect("one outcome");
        let i = b.intern(m2, s)?;
        b.ts.initial.push(i);
    } else {
        b.ts.nodes.push(TsNode {
            now: m.now(),
            vals: m.values().to_vec(),
            end: None,
        });
        b.ts.succ.push(Vec::new());
        b.ts.initial.push(0);
        for (m2, s) in first {
            let j = b.intern(m2, s)?;
            if !b.ts.succ[0].iter().any(|(_, k)| *k == j) {
                b.ts.succ[0].push((TsLabel::Tau, j));
            }
        }
    }
    while let Some((i, m, s)) = b.queue.pop_front() {
        let (next, label) = match s {
            Settled::CommReady => {
                let mut m2 = m;
                let mut log = Vec::new();
                m2.fire(&mut log)?;
                let label = match log.pop().map(|e| e.label) {
                    Some(Label::Comm { chan, value }) => TsLabel::Comm { chan, value },
                    other => unreachable!("fire logged {other:?}"),
                };
                (m2, label)
            }
            Settled::NeedsTime { next } => {
                let now = m.now();
                if now >= horizon {
                    b.ts.nodes[i].end = Some(NodeEnd::Horizon);
                    continue;
                }
                let mut target = (now + step).min(horizon);
                if let Some(n) = next {
                    target = target.min(n);
                }
                let mut m2 = m;
                let reached = m2.advance(target, step, &mut |_, _| {})?;
                (m2, TsLabel::Duration(reached - now))
            }
            Settled::Finished => {
                b.ts.nodes[i].end = Some(NodeEnd::Finished);
                continue;
            }
            Settled::Deadlock(_) => {
                b.ts.nodes[i].end = Some(NodeEnd::Deadlock);
                continue;
            }
        };
        for (m3, s3) in outcomes(&next)?.0 {
            let j = b.intern(m3, s3)?;
            let edge = (label.clone(), j);
            if !b.ts.succ[i].contains(&edge) {
                b.ts.succ[i].push(edge);
            }
        }
    }
    Ok(b.ts)
}

/// Transition system of `p` on `[0, t_end]` with time chunks of `step` seconds.
/// Processes with continuous statements run on the reference interpreter.
pub fn build_ts(
    p: &Process,
    init: &[(String, f64)],
    step: f64,
    t_end: f64,
    opts: TsOptions,
) -> Result<TransitionSystem, TsError> {
    let prog = Arc::new(Compiled::new(p).map_err(RunError::from)?);
    let step_t = Ticks::from_secs(step);
    let horizon = Ticks::from_secs(t_end);
    if prog.has_dde() {
        let m = ReferenceMachine::new(prog, init, opts.dt_ref.min(step));
        explore(m, step_t, horizon, opts.state_budget)
    } else {
        let m = DiscreteMachine::new(prog, init)?;
        explore(m, step_t, horizon, opts.state_budget)
    }
}
