//! Dense-time reference semantics used as ground truth.

mod history;
mod integrate;
mod machine;

use std::sync::Arc;

pub use history::{hermite, History, Piece, PieceKind};
pub use integrate::{
    find_exit, integrate_dde, rk4_step, DenseSegment, Exit, IntegrateError, EXIT_TOLERANCE,
};
pub use machine::{DomainExitRecord, GuardEval, ReferenceMachine};

use crate::exec::{drive, Compiled, RunError, SeededChooser, Trace};
use crate::syntax::Process;
use crate::Ticks;

pub const DEFAULT_DT_REF: f64 = 1e-4;

/// Runs `p` from `init` up to time `t_end`, sampling the flow every `dt_ref`.
pub fn run_reference(
    p: &Process,
    init: &[(String, f64)],
    t_end: f64,
    dt_ref: f64,
    seed: u64,
) -> Result<Trace, RunError> {
    let prog = Arc::new(Compiled::new(p)?);
    let mut m = ReferenceMachine::new(prog, init, dt_ref);
    drive(
        &mut m,
        Ticks::from_secs(t_end),
        Ticks::from_secs(dt_ref),
        &mut SeededChooser::new(seed),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Label;
    use crate::syntax::parse;

    fn run(src: &str, t_end: f64, dt: f64) -> Trace {
        run_reference(&parse(src).unwrap(), &[], t_end, dt, 0).unwrap()
    }

    #[test]
    fn skip_parallel_skip_logs_two_taus() {
        let tr = run("system S { skip || skip }", 1.0, 0.1);
        let taus = tr.events.iter().filter(|e| e.label == Label::Tau).count();
        assert_eq!(taus, 2);
        assert_eq!(tr.times.first(), Some(&Ticks::ZERO));
        assert_eq!(tr.times.last(), Some(&Ticks::from_secs(1.0)));
    }

    #[test]
    fn forced_synchronisation() {
        let tr = run("system S { wait 1; ch!2 || ch?x }", 2.0, 0.25);
        let comms = tr.comm_events();
        assert_eq!(comms.len(), 1);
        assert_eq!(comms[0].time, Ticks::from_secs(1.0));
        assert_eq!(
            comms[0].label,
            Label::Comm {
                chan: "ch".into(),
                value: 2.0
            }
        );
        let x = tr.column("x").unwrap();
        let at = |t: f64| tr.times.iter().position(|&s| s == Ticks::from_secs(t)).unwrap();
        assert_eq!(x[at(0.75)], 0.0);
        assert_eq!(x[at(1.0)], 2.0);
        assert_eq!(x[at(2.0)], 2.0);
    }

    #[test]
    fn exponential_decay_through_the_machine() {
        let tr = run("x := 1; <x' = -x & true>", 1.0, 1e-3);
        let x = tr.column("x").unwrap();
        assert!((x.last().unwrap() - (-1.0f64).exp()).abs() < 1e-8);
    }

    #[test]
    fn domain_exit_continues_with_successor() {
        let tr = run("x := 0; <x' = 1 & x < 0.3>; y := x", 1.0, 0.01);
        let y = tr.column("y").unwrap();
        assert!((y.last().unwrap() - 0.3).abs() < 1e-8);
    }

    #[test]
    fn interrupt_preempts_evolution() {
        let tr = run(
            "system S { x := 0; <x' = 1 & true> |> [c!x -> (skip)] || wait 0.5; c?y }",
            1.0,
            0.01,
        );
        let comms = tr.comm_events();
        assert_eq!(comms.len(), 1);
        assert_eq!(comms[0].time, Ticks::from_secs(0.5));
        let y = tr.column("y").unwrap();
        assert!((y.last().unwrap() - 0.5).abs() < 1e-12);
        let x = tr.column("x").unwrap();
        assert!((x.last().unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn open_valve_first_step() {
        // d(0.025) from d = 4.5 on [-0.1, 0]; slope 1.0445478 at t = 0.
        let tr = run(
            "d := 4.5; <d' = 2.0 - 3.14 * 0.18 ^ 2 * sqrt(9.8 * (d + d@0.1)) & true>",
            0.025,
            2.5e-4,
        );
        let d = *tr.column("d").unwrap().last().unwrap();
        assert!((d - 4.52611).abs() < 1e-3);
    }

    #[test]
    fn deadlock_is_reported() {
        let err = run_reference(&parse("system S { a?x || b?y }").unwrap(), &[], 1.0, 0.1, 0)
            .unwrap_err();
        assert!(matches!(err, RunError::Deadlock { .. }));
    }

    #[test]
    fn same_seed_same_trace() {
        let p = parse("(x := 1 |~| x := 2; wait 0.1)*{20}").unwrap();
        let a = run_reference(&p, &[], 3.0, 0.05, 9).unwrap();
        let b = run_reference(&p, &[], 3.0, 0.05, 9).unwrap();
        assert_eq!(a, b);
    }
}
