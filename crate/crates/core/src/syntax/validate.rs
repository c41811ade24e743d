use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::ast::*;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub message: String,
}

impl Diagnostic {
    fn new(message: impl Into<String>) -> Diagnostic {
        Diagnostic {
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ValidateOptions {
    /// Accept Euler assignments reading `x@r` and readiness-flag variables.
    pub discretized: bool,
}

pub fn validate(p: &Process) -> Vec<Diagnostic> {
    validate_with(p, ValidateOptions::default())
}

pub fn validate_with(p: &Process, opts: ValidateOptions) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    let comps = p.components();
    for c in &comps {
        c.body.visit(&mut |q| {
            if matches!(q, Process::Parallel(_)) {
                diags.push(Diagnostic::new(format!(
                    "component {}: nested parallel composition",
                    c.name
                )));
            }
        });
    }
    check_channels(&comps, &mut diags);

    let declared = p.written_vars();
    let mut delays: Vec<f64> = Vec::new();
    p.visit(&mut |q| check_node(q, &declared, opts, &mut delays, &mut diags));
    let mut distinct: Vec<f64> = Vec::new();
    for r in delays {
        if !(r > 0.0 && r.is_finite()) {
            diags.push(Diagnostic::new(format!("delay {r} must be positive")));
        } else if !distinct.contains(&r) {
            distinct.push(r);
        }
    }
    if distinct.len() > 1 {
        let list: Vec<String> = distinct.iter().map(|r| r.to_string()).collect();
        diags.push(Diagnostic::new(format!(
            "delayed references use different delays: {}",
            list.join(", ")
        )));
    }

    let (ins, outs) = p.channel_uses();
    let channels: BTreeSet<&String> = ins.iter().chain(outs.iter()).collect();
    for x in p.all_vars() {
        for ch in &channels {
            if !opts.discretized && (x == format!("{ch}_r") || x == format!("{ch}_w")) {
                diags.push(Diagnostic::new(format!(
                    "variable {x} clashes with the readiness flag of channel {ch}"
                )));
            }
        }
    }
    diags
}

fn check_channels(comps: &[Component], diags: &mut Vec<Diagnostic>) {
    let mut readers: BTreeMap<String, Vec<&str>> = BTreeMap::new();
    let mut writers: BTreeMap<String, Vec<&str>> = BTreeMap::new();
    for c in comps {
        let (ins, outs) = c.body.channel_uses();
        for ch in ins {
            readers.entry(ch).or_default().push(&c.name);
        }
        for ch in outs {
            writers.entry(ch).or_default().push(&c.name);
        }
    }
    let channels: BTreeSet<&String> = readers.keys().chain(writers.keys()).collect();
    for ch in channels {
        let r = readers.get(ch).map(Vec::as_slice).unwrap_or(&[]);
        let w = writers.get(ch).map(Vec::as_slice).unwrap_or(&[]);
        if w.len() > 1 {
            diags.push(Diagnostic::new(format!("channel {ch}: multiple writers")));
        }
        if r.len() > 1 {
            diags.push(Diagnostic::new(format!("channel {ch}: multiple readers")));
        }
        if w.is_empty() {
            diags.push(Diagnostic::new(format!("channel {ch}: no writer")));
        }
        if r.is_empty() {
            diags.push(Diagnostic::new(format!("channel {ch}: no reader")));
        }
        if r.len() == 1 && w.len() == 1 && r[0] == w[0] {
            diags.push(Diagnostic::new(format!(
                "channel {ch}: read and written by the same component {}",
                r[0]
            )));
        }
    }
}

fn check_node(
    q: &Process,
    declared: &BTreeSet<String>,
    opts: ValidateOptions,
    delays: &mut Vec<f64>,
    diags: &mut Vec<Diagnostic>,
) {
    let outside = |refs: Vec<(String, f64)>, delays: &mut Vec<f64>, diags: &mut Vec<Diagnostic>| {
        for (x, r) in refs {
            delays.push(r);
            if !opts.discretized {
                diags.push(Diagnostic::new(format!(
                    "delayed reference {x}@{r} outside a continuous statement"
                )));
            }
        }
    };
    match q {
        Process::Assign(_, e) | Process::Output(_, e) => outside(e.delayed_refs(), delays, diags),
        Process::Guard(b, _) => outside(b.delayed_refs(), delays, diags),
        Process::Wait(d) if !(*d >= 0.0 && d.is_finite()) => {
            diags.push(Diagnostic::new(format!("wait duration {d} must be non-negative")));
        }
        Process::Repeat(_, 0) => {
            diags.push(Diagnostic::new("repetition bound must be positive"));
        }
        _ => {}
    }
    if let Process::CommChoice(hs) | Process::DdeInterrupt(_, _, hs) = q {
        for (ev, _) in hs {
            if let CommEvent::Output { expr, .. } = ev {
                outside(expr.delayed_refs(), delays, diags);
            }
        }
    }
    if let Process::Dde(spec, dom) | Process::DdeInterrupt(spec, dom, _) = q {
        let mut seen = BTreeSet::new();
        for x in &spec.vars {
            if !seen.insert(x) {
                diags.push(Diagnostic::new(format!(
                    "variable {x} evolves twice in one continuous statement"
                )));
            }
        }
        for e in &spec.rhs {
            for x in e.vars() {
                if !declared.contains(&x) {
                    diags.push(Diagnostic::new(format!(
                        "right-hand side references undeclared variable {x}"
                    )));
                }
            }
            for (x, r) in e.delayed_refs() {
                delays.push(r);
                if !declared.contains(&x) {
                    diags.push(Diagnostic::new(format!(
                        "right-hand side references undeclared variable {x}@{r}"
                    )));
                }
            }
        }
        for x in dom.vars() {
            if !declared.contains(&x) {
                diags.push(Diagnostic::new(format!(
                    "domain of continuous statement references undeclared variable {x}"
                )));
            }
        }
        if !dom.delayed_refs().is_empty() && !opts.discretized {
            diags.push(Diagnostic::new(
                "domain of continuous statement uses a delayed reference",
            ));
        }
    }
}
