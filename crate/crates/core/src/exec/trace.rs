use std::fmt::{self, Write as _};

use crate::Ticks;

#[derive(Debug, Clone, PartialEq)]
pub enum Label {
    Tau,
    Comm { chan: String, value: f64 },
    Delay(Ticks),
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Tau => f.write_str("tau"),
            Label::Comm { chan, value } => write!(f, "{chan}.{value}"),
            Label::Delay(d) => write!(f, "delay {d}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    pub time: Ticks,
    pub label: Label,
}

/// Sampled flow plus the event log of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub vars: Vec<String>,
    pub times: Vec<Ticks>,
    pub samples: Vec<Vec<f64>>,
    pub events: Vec<Event>,
}

impl Trace {
    pub fn new(vars: Vec<String>) -> Trace {
        Trace {
            vars,
            times: Vec::new(),
            samples: Vec::new(),
            events: Vec::new(),
        }
    }

    /// Appends a sample; a sample at the last recorded time replaces it.
    pub fn push_sample(&mut self, t: Ticks, vals: &[f64]) {
        if let Some(&last) = self.times.last() {
            if last == t {
                *self.samples.last_mut().expect("sample present") = vals.to_vec();
                return;
            }
            debug_assert!(t > last);
        }
        self.times.push(t);
        self.samples.push(vals.to_vec());
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.var_index(name)?;
        Some(self.samples.iter().map(|s| s[i]).collect())
    }

    pub fn comm_events(&self) -> Vec<&Event> {
        self.events
            .iter()
            .filter(|e| matches!(e.label, Label::Comm { .. }))
            .collect()
    }

    /// Flow as CSV with header `t,<var1>,...`.
    pub fn flow_csv(&self) -> String {
        let mut out = String::from("t");
        for v in &self.vars {
            out.push(',');
            out.push_str(v);
        }
        out.push('\n');
        for (t, s) in self.times.iter().zip(&self.samples) {
            let _ = write!(out, "{}", t.secs());
            for x in s {
                let _ = write!(out, ",{x}");
            }
            out.push('\n');
        }
        out
    }

    /// Event log as CSV with header `t,label`.
    pub fn events_csv(&self) -> String {
        let mut out = String::from("t,label\n");
        for e in &self.events {
            let _ = writeln!(out, "{},{}", e.time.secs(), e.label);
        }
        out
    }
}
