//! Replaces continuous statements by guarded forward-Euler loops and
//! communications by flag-guarded handshakes.

mod neighborhood;
mod robustness;

pub use neighborhood::{
    and_simpl, euler_increment, not_simpl, shifted, shrink, widen, NeighborhoodError,
    NeighborhoodKind, NeighborhoodPredicate,
};
pub use robustness::{continuous_dependent_vars, estimate_robustness, GuardMargin, RobustnessReport};

use crate::syntax::{BoolExpr, CmpOp, CommEvent, Component, DdeSpec, Expr, Process};

pub fn reader_flag(chan: &str) -> String {
    format!("{chan}_r")
}

pub fn writer_flag(chan: &str) -> String {
    format!("{chan}_w")
}

/// Flag raised by the side offering `ev`, and the flag of its partner.
pub fn flags_of(ev: &CommEvent) -> (String, String) {
    match ev {
        CommEvent::Input { chan, .. } => (reader_flag(chan), writer_flag(chan)),
        CommEvent::Output { chan, .. } => (writer_flag(chan), reader_flag(chan)),
    }
}

/// Number of Euler iterations covering `t_end`; a partial step counts as a full one.
pub fn iterations(t_end: f64, h: f64) -> u64 {
    ((t_end / h) - 1e-9).ceil().max(1.0) as u64
}

/// Assignments of one Euler step. Vector systems go through `<x>_next`
/// temporaries so that every component reads the old state.
pub fn euler_assignments(spec: &DdeSpec, h: f64) -> Vec<Process> {
    let inc = euler_increment(spec, h);
    if inc.len() == 1 {
        let (x, e) = inc.into_iter().next().expect("one variable");
        return vec![Process::Assign(x, e)];
    }
    let mut out: Vec<Process> = inc
        .iter()
        .map(|(x, e)| Process::Assign(format!("{x}_next"), e.clone()))
        .collect();
    out.extend(
        spec.vars
            .iter()
            .map(|x| Process::assign(x, Expr::var(&format!("{x}_next")))),
    );
    out
}

fn flag_is(x: &str, v: f64) -> BoolExpr {
    BoolExpr::cmp(Expr::var(x), CmpOp::Eq, Expr::Num(v))
}

/// `f_1 := v; ...; f_n := v`.
pub fn set_flags(flags: &[String], v: f64) -> Process {
    Process::seq_all(flags.iter().map(|f| Process::assign(f, Expr::Num(v))))
}

/// Own readiness flags of a handler list, without repetitions, in order.
pub fn own_flags(hs: &[(CommEvent, Process)]) -> Vec<String> {
    let mut own: Vec<String> = Vec::new();
    for (ev, _) in hs {
        let (mine, _) = flags_of(ev);
        if !own.contains(&mine) {
            own.push(mine);
        }
    }
    own
}

/// Every own flag raised while no partner is ready.
pub fn waiting_condition(hs: &[(CommEvent, Process)]) -> BoolExpr {
    BoolExpr::all(hs.iter().map(|(ev, _)| {
        let (mine, partner) = flags_of(ev);
        and_simpl(flag_is(&mine, 1.0), flag_is(&partner, 0.0))
    }))
}

/// Some handler whose partner is ready too.
pub fn ready_condition(hs: &[(CommEvent, Process)]) -> BoolExpr {
    hs.iter()
        .map(|(ev, _)| {
            let (mine, partner) = flags_of(ev);
            BoolExpr::and(flag_is(&mine, 1.0), flag_is(&partner, 1.0))
        })
        .reduce(BoolExpr::or)
        .unwrap_or(BoolExpr::False)
}

fn euler_body(spec: &DdeSpec, h: f64) -> Process {
    let mut steps = vec![Process::Wait(h)];
    steps.extend(euler_assignments(spec, h));
    Process::seq_all(steps)
}

fn reset_handlers(hs: Vec<(CommEvent, Process)>) -> Vec<(CommEvent, Process)> {
    let own = own_flags(&hs);
    hs.into_iter()
        .map(|(ev, q)| (ev, Process::seq(set_flags(&own, 0.0), q)))
        .collect()
}

/// `ch_r := 1; ch?x; ch_r := 0`.
pub fn input_handshake(chan: &str, var: &str) -> Process {
    let f = reader_flag(chan);
    Process::seq_all([
        Process::assign(&f, Expr::Num(1.0)),
        Process::Input(chan.to_string(), var.to_string()),
        Process::assign(&f, Expr::Num(0.0)),
    ])
}

/// `ch_w := 1; ch!e; ch_w := 0`.
pub fn output_handshake(chan: &str, e: Expr) -> Process {
    let f = writer_flag(chan);
    Process::seq_all([
        Process::assign(&f, Expr::Num(1.0)),
        Process::Output(chan.to_string(), e),
        Process::assign(&f, Expr::Num(0.0)),
    ])
}

/// Raises every own flag, then offers the handlers; each continuation first lowers the flags.
/// `hs` carries the already discretized continuations.
pub fn choice_handshake(hs: Vec<(CommEvent, Process)>) -> Process {
    let own = own_flags(&hs);
    Process::seq(set_flags(&own, 1.0), Process::CommChoice(reset_handlers(hs)))
}

/// Guarded Euler loop of `n` steps followed by the guarded stop.
pub fn euler_loop(g: BoolExpr, spec: &DdeSpec, h: f64, n: u64) -> Process {
    Process::seq(
        Process::repeat(Process::guard(g.clone(), euler_body(spec, h)), n),
        Process::guard(g, Process::Stop),
    )
}

/// Euler loop that yields as soon as a partner of one of the handlers is ready.
/// `hs` carries the already discretized continuations.
pub fn interrupt_loop(
    g: BoolExpr,
    spec: &DdeSpec,
    h: f64,
    n: u64,
    hs: Vec<(CommEvent, Process)>,
) -> Process {
    let own = own_flags(&hs);
    let waiting = waiting_condition(&hs);
    let ready = ready_condition(&hs);
    Process::seq_all([
        set_flags(&own, 1.0),
        Process::repeat(
            Process::guard(and_simpl(g.clone(), waiting.clone()), euler_body(spec, h)),
            n,
        ),
        Process::guard(
            and_simpl(not_simpl(g.clone()), waiting.clone()),
            set_flags(&own, 0.0),
        ),
        Process::guard(ready, Process::CommChoice(reset_handlers(hs))),
        Process::guard(and_simpl(g, waiting), Process::Stop),
    ])
}

/// `N(B, eps) and N'(B, eps)` for a continuous statement.
pub fn domain_guard(
    spec: &DdeSpec,
    dom: &BoolExpr,
    eps: f64,
    h: f64,
) -> Result<BoolExpr, NeighborhoodError> {
    let n = widen(dom, eps)?.pred;
    let np = shifted(dom, eps, h, spec)?.pred;
    Ok(and_simpl(n, np))
}

struct Ctx {
    h: f64,
    eps: f64,
    n: u64,
}

impl Ctx {
    fn handlers(
        &self,
        hs: &[(CommEvent, Process)],
    ) -> Result<Vec<(CommEvent, Process)>, NeighborhoodError> {
        hs.iter()
            .map(|(ev, q)| Ok((ev.clone(), self.proc(q)?)))
            .collect()
    }

    fn proc(&self, p: &Process) -> Result<Process, NeighborhoodError> {
        Ok(match p {
            Process::Skip | Process::Stop | Process::Assign(..) | Process::Wait(_) => p.clone(),
            Process::Input(ch, x) => input_handshake(ch, x),
            Process::Output(ch, e) => output_handshake(ch, e.clone()),
            Process::Seq(a, b) => Process::seq(self.proc(a)?, self.proc(b)?),
            Process::Guard(b, q) => Process::guard(b.clone(), self.proc(q)?),
            Process::IChoice(a, b) => Process::ichoice(self.proc(a)?, self.proc(b)?),
            Process::Repeat(q, n) => Process::repeat(self.proc(q)?, *n),
            Process::CommChoice(hs) => choice_handshake(self.handlers(hs)?),
            Process::Dde(spec, dom) => {
                let g = domain_guard(spec, dom, self.eps, self.h)?;
                euler_loop(g, spec, self.h, self.n)
            }
            Process::DdeInterrupt(spec, dom, hs) => {
                let g = domain_guard(spec, dom, self.eps, self.h)?;
                interrupt_loop(g, spec, self.h, self.n, self.handlers(hs)?)
            }
            Process::Parallel(cs) => Process::Parallel(
                cs.iter()
                    .map(|c| {
                        Ok(Component {
                            name: c.name.clone(),
                            body: self.proc(&c.body)?,
                        })
                    })
                    .collect::<Result<Vec<_>, NeighborhoodError>>()?,
            ),
        })
    }
}

/// The discrete process approximating `p` with step `h` and precision `eps` up to `t_end`.
pub fn discretize(p: &Process, h: f64, eps: f64, t_end: f64) -> Result<Process, NeighborhoodError> {
    let ctx = Ctx {
        h,
        eps,
        n: iterations(t_end, h),
    };
    ctx.proc(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse, print, validate_with, ValidateOptions};

    fn has_dde(p: &Process) -> bool {
        let mut found = false;
        p.visit(&mut |q| {
            found |= matches!(q, Process::Dde(..) | Process::DdeInterrupt(..));
        });
        found
    }

    #[test]
    fn skip_is_unchanged() {
        assert_eq!(discretize(&Process::Skip, 0.1, 0.1, 1.0).unwrap(), Process::Skip);
    }

    #[test]
    fn unconstrained_dde_becomes_forty_steps() {
        let p = parse("<d' = 2.0 - 3.14 * 0.18 ^ 2 * sqrt(9.8 * (d + d@0.1)) & true>").unwrap();
        let q = discretize(&p, 0.025, 0.2, 1.0).unwrap();
        let Process::Seq(lp, tail) = &q else { panic!("{q:?}") };
        let Process::Repeat(body, 40) = &**lp else { panic!("{lp:?}") };
        let Process::Guard(BoolExpr::True, step) = &**body else { panic!("{body:?}") };
        assert_eq!(
            print(step),
            "wait 0.025; d := d + 0.025 * (2 - 3.14 * 0.18 ^ 2 * sqrt(9.8 * (d + d@0.1)))"
        );
        assert_eq!(**tail, Process::guard(BoolExpr::True, Process::Stop));
    }

    #[test]
    fn communications_get_readiness_flags() {
        let q = discretize(&parse("ch?x").unwrap(), 0.1, 0.1, 1.0).unwrap();
        assert_eq!(print(&q), "ch_r := 1; ch?x; ch_r := 0");
        let q = discretize(&parse("ch!x + 1").unwrap(), 0.1, 0.1, 1.0).unwrap();
        assert_eq!(print(&q), "ch_w := 1; ch!x + 1; ch_w := 0");
    }

    #[test]
    fn water_tank_discretisation() {
        let src = std::fs::read_to_string(concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/../../models/watertank.dhcsp"
        ))
        .unwrap();
        let p = parse(&src).unwrap();
        let q = discretize(&p, 0.025, 0.2, 10.0).unwrap();
        assert!(!has_dde(&q));
        let opts = ValidateOptions { discretized: true };
        assert_eq!(validate_with(&q, opts), vec![]);
        let text = print(&q);
        for flag in ["wl_w := 1", "wl_r := 1", "cv_w := 1", "cv_r := 1"] {
            assert!(text.contains(flag), "{flag} missing");
        }
        assert_eq!(text.matches(")*{400}").count(), 2);
        assert_eq!(parse(&text).unwrap(), q);
    }

    #[test]
    fn iteration_count_rounds_up() {
        assert_eq!(iterations(1.0, 0.025), 40);
        assert_eq!(iterations(1.0, 0.3), 4);
        assert_eq!(iterations(10.0, 0.0125), 800);
    }

    #[test]
    fn vector_steps_use_temporaries() {
        let spec = DdeSpec::new(
            vec!["x".into(), "y".into()],
            vec![Expr::var("y"), Expr::var("x")],
        );
        let text: Vec<String> = euler_assignments(&spec, 0.5).iter().map(print).collect();
        assert_eq!(
            text,
            vec!["x_next := x + 0.5 * y", "y_next := y + 0.5 * x", "x := x_next", "y := y_next"]
        );
    }
}
