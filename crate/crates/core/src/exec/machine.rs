use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::program::CompileError;
use super::trace::{Event, Label, Trace};
use crate::syntax::EvalError;
use crate::Ticks;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RunError {
    #[error("deadlock at t={time}: blocked components {blocked:?}")]
    Deadlock { time: Ticks, blocked: Vec<String> },
    #[error("evaluation failed at t={time}: {err}")]
    Eval { time: Ticks, err: EvalError },
    #[error("unsupported construct: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Compile(#[from] CompileError),
}

/// Resolves internal choices.
pub trait Chooser {
    fn choose(&mut self, n: usize) -> usize;
}

pub struct SeededChooser(ChaCha8Rng);

impl SeededChooser {
    pub fn new(seed: u64) -> SeededChooser {
        SeededChooser(ChaCha8Rng::seed_from_u64(seed))
    }
}

impl Chooser for SeededChooser {
    fn choose(&mut self, n: usize) -> usize {
        self.0.gen_range(0..n)
    }
}

/// Always takes the first alternative.
pub struct FirstChooser;

impl Chooser for FirstChooser {
    fn choose(&mut self, _n: usize) -> usize {
        0
    }
}

/// Replays a prefix of choices, then takes the first alternative, recording
/// every decision so that all branches can be enumerated depth-first.
#[derive(Debug, Clone, Default)]
pub struct ReplayChooser {
    prefix: Vec<usize>,
    taken: Vec<usize>,
    arities: Vec<usize>,
}

impl ReplayChooser {
    pub fn new(prefix: Vec<usize>) -> ReplayChooser {
        ReplayChooser {
            prefix,
            taken: Vec::new(),
            arities: Vec::new(),
        }
    }

    /// The prefix of the next unexplored branch, if any.
    pub fn next_prefix(&self) -> Option<Vec<usize>> {
        let i = (0..self.taken.len())
            .rev()
            .find(|&i| self.taken[i] + 1 < self.arities[i])?;
        let mut p = self.taken[..i].to_vec();
        p.push(self.taken[i] + 1);
        Some(p)
    }

    pub fn made_choices(&self) -> bool {
        !self.taken.is_empty()
    }
}

impl Chooser for ReplayChooser {
    fn choose(&mut self, n: usize) -> usize {
        let pos = self.taken.len();
        let c = self.prefix.get(pos).copied().unwrap_or(0).min(n - 1);
        self.taken.push(c);
        self.arities.push(n);
        c
    }
}

/// Outcome of running all zero-time activity at the current instant.
#[derive(Debug, Clone, PartialEq)]
pub enum Settled {
    /// A communication is enabled; call [`Machine::fire`].
    CommReady,
    /// Time must pass; `next` is the earliest scheduled wake-up, if any.
    NeedsTime { next: Option<Ticks> },
    Finished,
    /// Only blocked components remain.
    Deadlock(Vec<String>),
}

/// Common interface of the dense-time and delta-cycle interpreters.
pub trait Machine: Clone {
    fn var_names(&self) -> &[String];
    fn now(&self) -> Ticks;
    fn values(&self) -> &[f64];
    fn settle(&mut self, chooser: &mut dyn Chooser, log: &mut Vec<Event>)
        -> Result<Settled, RunError>;
    fn fire(&mut self, log: &mut Vec<Event>) -> Result<(), RunError>;
    /// Lets time pass up to `target` (earlier if a continuous evolution exits its domain),
    /// reporting samples at multiples of `grid` strictly between the start and the end.
    fn advance(
        &mut self,
        target: Ticks,
        grid: Ticks,
        sample: &mut dyn FnMut(Ticks, &[f64]),
    ) -> Result<Ticks, RunError>;
    /// Hash of the control state of every component.
    fn control_key(&self) -> u64;
}

/// Runs `m` up to `horizon`, sampling the flow at multiples of `grid`.
pub fn drive<M: Machine>(
    m: &mut M,
    horizon: Ticks,
    grid: Ticks,
    chooser: &mut dyn Chooser,
) -> Result<Trace, RunError> {
    let mut trace = Trace::new(m.var_names().to_vec());
    loop {
        let s = m.settle(chooser, &mut trace.events)?;
        if s == Settled::CommReady {
            m.fire(&mut trace.events)?;
            continue;
        }
        let now = m.now();
        if now.is_multiple_of(grid) {
            trace.push_sample(now, m.values());
        }
        match s {
            Settled::CommReady => unreachable!(),
            Settled::Finished => break,
            Settled::Deadlock(blocked) => {
                if now >= horizon {
                    break;
                }
                return Err(RunError::Deadlock { time: now, blocked });
            }
            Settled::NeedsTime { next } => {
                if now >= horizon {
                    break;
                }
                let target = next.map_or(horizon, |n| n.min(horizon));
                let reached = m.advance(target, grid, &mut |t, v| trace.push_sample(t, v))?;
                trace.events.push(Event {
                    time: now,
                    label: Label::Delay(reached - now),
                });
            }
        }
    }
    let mut t = m.now();
    while t < horizon {
        t = t.next_multiple(grid).min(horizon);
        if t.is_multiple_of(grid) {
            trace.push_sample(t, m.values());
        }
    }
    Ok(trace)
}
