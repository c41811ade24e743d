//! End-to-end runs: step size, discretization, bisimulation check, robustness
//! estimate and SystemC emission.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::Arc;

use crate::bisim::{check_approx_bisim, run_discrete, BisimVerdict, DiscreteMachine, TsError, TsOptions};
use crate::codegen::{emit_module, reinterpret, CodegenError, EmitConfig, EmitUnit, ReinterpretError, TimeUnit};
use crate::discretize::{
    discretize, estimate_robustness, euler_assignments, NeighborhoodError, RobustnessReport,
};
use crate::exec::{drive, Compiled, Node, RunError, SeededChooser, Trace};
use crate::reference::{run_reference, ReferenceMachine, DEFAULT_DT_REF};
use crate::stepsize::{check_stepsize, Check, ScheduleSegment, SimLists, StepConfig, StepError};
use crate::syntax::{validate_with, DdeSpec, Diagnostic, Process, Program, ValidateOptions};
use crate::Ticks;

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    /// Global precision.
    pub eps: f64,
    /// Precision of the Euler error tubes; `eps / 2` when unset.
    pub eps_dde: Option<f64>,
    pub t_end: f64,
    pub sigma: f64,
    pub max_halvings: u32,
    pub dt_ref: f64,
    pub seed: u64,
    pub time_unit: TimeUnit,
    pub state_budget: usize,
    /// Seeded reference runs behind the robustness estimate; 0 skips it.
    pub robustness_runs: u64,
}

impl Default for PipelineConfig {
    fn default() -> PipelineConfig {
        PipelineConfig {
            eps: 0.2,
            eps_dde: None,
            t_end: 10.0,
            sigma: 1e-9,
            max_halvings: 40,
            dt_ref: DEFAULT_DT_REF,
            seed: 0,
            time_unit: TimeUnit::Ms,
            state_budget: crate::bisim::DEFAULT_STATE_BUDGET,
            robustness_runs: 20,
        }
    }
}

impl PipelineConfig {
    pub fn eps_dde(&self) -> f64 {
        self.eps_dde.unwrap_or(self.eps / 2.0)
    }

    pub fn check(&self) -> Result<(), PipelineError> {
        let bad = |msg: String| Err(PipelineError::Config(msg));
        if !(self.eps > 0.0) {
            return bad(format!("eps must be positive, got {}", self.eps));
        }
        if !(self.t_end > 0.0) {
            return bad(format!("time bound must be positive, got {}", self.t_end));
        }
        if !(self.dt_ref > 0.0) {
            return bad(format!("dt_ref must be positive, got {}", self.dt_ref));
        }
        if let Some(e) = self.eps_dde {
            if !(e > 0.0 && e < self.eps) {
                return bad(format!("eps_dde must lie in (0, eps), got {e}"));
            }
        }
        Ok(())
    }

    pub fn ts_options(&self) -> TsOptions {
        TsOptions {
            dt_ref: self.dt_ref,
            state_budget: self.state_budget,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("invalid model:\n{}", .0.iter().map(|d| format!("  {d}")).collect::<Vec<_>>().join("\n"))]
    Invalid(Vec<Diagnostic>),
    #[error("the model has no continuous statement")]
    NoDde,
    #[error(transparent)]
    Step(#[from] StepError),
    #[error(transparent)]
    Neighborhood(#[from] NeighborhoodError),
    #[error(transparent)]
    Run(#[from] RunError),
    #[error(transparent)]
    Ts(#[from] TsError),
    #[error(transparent)]
    Codegen(#[from] CodegenError),
    #[error(transparent)]
    Reinterpret(#[from] ReinterpretError),
}

/// Right-hand sides over one variable vector, with the segments during which
/// each of them ran and the validated simulation along that schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct DdeGroup {
    pub vars: Vec<String>,
    pub specs: Vec<DdeSpec>,
    pub schedule: Vec<ScheduleSegment>,
    pub lists: SimLists<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepsizeReport {
    pub h: f64,
    pub halvings: u32,
    pub eps_dde: f64,
    pub groups: Vec<DdeGroup>,
}

/// Distinct continuous dynamics of `p`, in order of appearance.
pub fn dde_specs(p: &Process) -> Vec<DdeSpec> {
    let mut out: Vec<DdeSpec> = Vec::new();
    p.visit(&mut |q| {
        if let Process::Dde(spec, _) | Process::DdeInterrupt(spec, _, _) = q {
            if !out.contains(spec) {
                out.push(spec.clone());
            }
        }
    });
    out
}

/// Validates `p`; models without continuous statements may use the names and
/// delayed references a discretization introduces.
pub fn validate_model(p: &Process) -> Vec<Diagnostic> {
    let opts = ValidateOptions {
        discretized: dde_specs(p).is_empty(),
    };
    validate_with(p, opts)
}

/// Largest step candidate: the delay, or the time bound for delay-free models.
pub fn base_step(p: &Process, t_end: f64) -> f64 {
    p.delay().unwrap_or(t_end)
}

/// Which right-hand side each executed Euler step of `discrete` used.
/// Returns `(end time of the step, index into specs)` in execution order, and
/// the sampled trace of the run.
fn euler_steps(
    discrete: &Process,
    specs: &[DdeSpec],
    h: f64,
    t_end: f64,
    seed: u64,
) -> Result<(Vec<(f64, usize)>, Trace), RunError> {
    let prog = Arc::new(Compiled::new(discrete)?);
    let keys: Vec<(String, crate::syntax::Expr)> = specs
        .iter()
        .map(|s| match euler_assignments(s, h).swap_remove(0) {
            Process::Assign(x, e) => (x, e),
            _ => unreachable!("Euler steps start with an assignment"),
        })
        .collect();
    let mut m = DiscreteMachine::new(prog.clone(), &[])?.with_assign_log();
    let trace = drive(
        &mut m,
        Ticks::from_secs(t_end),
        Ticks::from_secs(h),
        &mut SeededChooser::new(seed),
    )?;
    let mut steps = Vec::new();
    for &(t, id) in m.assign_log.as_deref().unwrap_or(&[]) {
        if let Node::Assign { var, src, .. } = &prog.nodes[id] {
            let name = &prog.vars[*var];
            if let Some(j) = keys.iter().position(|(x, e)| x == name && e == src) {
                steps.push((t.secs(), j));
            }
        }
    }
    Ok((steps, trace))
}

fn schedule_of(steps: &[(f64, usize)], h: f64) -> Vec<ScheduleSegment> {
    let mut out: Vec<ScheduleSegment> = Vec::new();
    for &(t, j) in steps {
        match out.last_mut() {
            Some(seg) if seg.dde == j => seg.end = t,
            Some(seg) => {
                let start = seg.end;
                out.push(ScheduleSegment { dde: j, start, end: t });
            }
            None => out.push(ScheduleSegment {
                dde: j,
                start: (t - h).max(0.0),
                end: t,
            }),
        }
    }
    out
}

fn value_at(trace: &Trace, var: &str, t: f64) -> f64 {
    let Some(k) = trace.var_index(var) else {
        return 0.0;
    };
    let at = Ticks::from_secs(t);
    trace
        .times
        .iter()
        .rposition(|&s| s <= at)
        .map_or(0.0, |i| trace.samples[i][k])
}

/// Halving search for a step size validated along the modes a discrete run
/// actually visits. Every candidate re-derives the schedule from a run of the
/// program discretized with that candidate.
pub fn program_stepsize(p: &Process, cfg: &PipelineConfig) -> Result<StepsizeReport, PipelineError> {
    let specs = dde_specs(p);
    if specs.is_empty() {
        return Err(PipelineError::NoDde);
    }
    let mut groups: Vec<(Vec<String>, Vec<usize>)> = Vec::new();
    for (j, s) in specs.iter().enumerate() {
        match groups.iter_mut().find(|(vars, _)| *vars == s.vars) {
            Some((_, members)) => members.push(j),
            None => groups.push((s.vars.clone(), vec![j])),
        }
    }
    let base = base_step(p, cfg.t_end);
    let eps_dde = cfg.eps_dde();
    let mut step_cfg = StepConfig::new(eps_dde, cfg.t_end);
    step_cfg.sigma = cfg.sigma;
    step_cfg.max_halvings = cfg.max_halvings;

    let candidate = |h: f64| -> Result<Candidate, PipelineError> {
        let q = discretize(p, h, cfg.eps, cfg.t_end)?;
        let (steps, trace) = euler_steps(&q, &specs, h, cfg.t_end, cfg.seed)?;
        let mut coverage: Vec<usize> = steps.iter().map(|&(_, j)| j).collect();
        coverage.sort_unstable();
        coverage.dedup();
        let mut done = Vec::new();
        for (vars, members) in &groups {
            let local: Vec<(f64, usize)> = steps
                .iter()
                .filter_map(|&(t, j)| members.iter().position(|&m| m == j).map(|k| (t, k)))
                .collect();
            let schedule = schedule_of(&local, h);
            let Some(first) = schedule.first() else {
                continue;
            };
            let group_specs: Vec<DdeSpec> = members.iter().map(|&j| specs[j].clone()).collect();
            let x0: Vec<f64> = vars.iter().map(|x| value_at(&trace, x, first.start)).collect();
            let mut others: Vec<String> = group_specs
                .iter()
                .flat_map(|s| s.rhs.iter().flat_map(|e| e.vars()))
                .filter(|x| !vars.contains(x))
                .collect();
            others.sort();
            others.dedup();
            let params: Vec<(String, f64)> = others
                .into_iter()
                .map(|x| {
                    let v = value_at(&trace, &x, first.start);
                    (x, v)
                })
                .collect();
            let mut lists = SimLists::new(vars.clone(), &x0, step_cfg.d0, base, h)?;
            for seg in &schedule {
                if let Check::Invalid { at } =
                    check_stepsize(&group_specs[seg.dde], &params, seg.end, &mut lists, &step_cfg)?
                {
                    return Ok(Candidate {
                        groups: Err(at - lists.m),
                        coverage,
                    });
                }
            }
            done.push(DdeGroup {
                vars: vars.clone(),
                specs: group_specs,
                schedule,
                lists,
            });
        }
        Ok(Candidate {
            groups: Ok(done),
            coverage,
        })
    };

    // Accept a valid candidate once its run reaches every dynamics the
    // reference run reaches, or once halving stops changing what it reaches.
    // The widened domains can keep the discrete run in a mode for longer.
    let reached = reference_coverage(p, &specs, cfg)?;
    let mut last_step = 0;
    let mut prev: Option<(f64, u32, Vec<DdeGroup>, Vec<usize>)> = None;
    for halvings in 0..=cfg.max_halvings {
        let h = base / 2f64.powi(halvings as i32);
        if !step_cfg.affordable(base, h) {
            return Err(StepError::MaxHalvings { halvings, last_step }.into());
        }
        let cur = candidate(h)?;
        let groups = match cur.groups {
            Ok(groups) => groups,
            Err(at) => {
                last_step = at;
                prev = None;
                continue;
            }
        };
        if let Some((ph, pk, pgroups, pcov)) = prev.take() {
            if pcov == cur.coverage {
                return Ok(StepsizeReport {
                    h: ph,
                    halvings: pk,
                    eps_dde,
                    groups: pgroups,
                });
            }
        }
        if reached.iter().all(|j| cur.coverage.contains(j)) {
            return Ok(StepsizeReport {
                h,
                halvings,
                eps_dde,
                groups,
            });
        }
        if !cur.coverage.is_empty() {
            prev = Some((h, halvings, groups, cur.coverage));
        }
    }
    Err(StepError::MaxHalvings {
        halvings: cfg.max_halvings,
        last_step,
    }
    .into())
}

/// Indices into `specs` of the dynamics the reference run evolves in.
fn reference_coverage(p: &Process, specs: &[DdeSpec], cfg: &PipelineConfig) -> Result<Vec<usize>, RunError> {
    let prog = Arc::new(Compiled::new(p)?);
    let mut m = ReferenceMachine::new(prog.clone(), &[], cfg.dt_ref);
    drive(
        &mut m,
        Ticks::from_secs(cfg.t_end),
        Ticks::from_secs(cfg.t_end),
        &mut SeededChooser::new(cfg.seed),
    )?;
    let mut out: Vec<usize> = m
        .entry_log
        .iter()
        .filter_map(|&(_, id)| match &prog.nodes[id] {
            Node::Dde { dde, .. } => specs.iter().position(|s| *s == dde.spec),
            _ => None,
        })
        .collect();
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

struct Candidate {
    groups: Result<Vec<DdeGroup>, usize>,
    coverage: Vec<usize>,
}

/// Step size used for models without continuous statements: the shortest wait,
/// or the time bound.
fn discrete_step(p: &Process, t_end: f64) -> f64 {
    let mut h = t_end;
    p.visit(&mut |q| {
        if let Process::Wait(d) = q {
            if *d > 0.0 {
                h = h.min(*d);
            }
        }
    });
    h
}

/// Step size for `p`: the validated search result when `p` has continuous
/// statements, otherwise the shortest wait.
pub fn derive_step(p: &Process, cfg: &PipelineConfig) -> Result<(f64, Option<StepsizeReport>), PipelineError> {
    match program_stepsize(p, cfg) {
        Ok(s) => Ok((s.h, Some(s))),
        Err(PipelineError::NoDde) => Ok((discrete_step(p, cfg.t_end), None)),
        Err(e) => Err(e),
    }
}

/// Traces of the source, of its discretization and of the process read back
/// from the generated SystemC, all sampled every `dt_ref`.
#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    pub reference: Trace,
    pub discrete: Trace,
    pub systemc: Trace,
}

impl Simulation {
    /// Variables present in all three traces, except readiness flags and Euler temporaries.
    pub fn columns(&self) -> Vec<String> {
        self.reference
            .vars
            .iter()
            .filter(|x| self.discrete.var_index(x).is_some() && self.systemc.var_index(x).is_some())
            .cloned()
            .collect()
    }

    /// Largest `|reference - discrete|` over samples at equal times.
    pub fn max_deviation(&self, var: &str) -> f64 {
        aligned(&self.reference, &self.discrete, var)
            .map(|(_, a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// `t` and, per variable, the reference, discrete and SystemC values and the
    /// `eps` envelope around the SystemC value.
    pub fn to_csv(&self, eps: f64) -> String {
        let cols = self.columns();
        let mut out = String::from("t");
        for x in &cols {
            let _ = write!(out, ",{x}_ref,{x}_dis,{x}_sc,{x}_sc_lo,{x}_sc_hi");
        }
        out.push('\n');
        let last = |tr: &Trace| -> HashMap<Ticks, usize> {
            tr.times.iter().enumerate().map(|(i, &t)| (t, i)).collect()
        };
        let (dis, sc) = (last(&self.discrete), last(&self.systemc));
        let col = |tr: &Trace| -> Vec<usize> {
            cols.iter().map(|x| tr.var_index(x).expect("shared column")).collect()
        };
        let (cr, cd, cs) = (col(&self.reference), col(&self.discrete), col(&self.systemc));
        for (i, &t) in self.reference.times.iter().enumerate() {
            if self.reference.times.get(i + 1) == Some(&t) {
                continue;
            }
            let (Some(&jd), Some(&js)) = (dis.get(&t), sc.get(&t)) else {
                continue;
            };
            let _ = write!(out, "{}", t.secs());
            for k in 0..cols.len() {
                let r = self.reference.samples[i][cr[k]];
                let d = self.discrete.samples[jd][cd[k]];
                let s = self.systemc.samples[js][cs[k]];
                let _ = write!(out, ",{r},{d},{s},{},{}", s - eps, s + eps);
            }
            out.push('\n');
        }
        out
    }
}

/// `(time, a, b)` for the last sample of `var` at each time present in both traces.
pub fn aligned<'a>(a: &'a Trace, b: &'a Trace, var: &str) -> impl Iterator<Item = (Ticks, f64, f64)> + 'a {
    let ka = a.var_index(var);
    let kb = b.var_index(var);
    let mut j = 0;
    a.times.iter().enumerate().filter_map(move |(i, &t)| {
        let (ka, kb) = (ka?, kb?);
        if a.times.get(i + 1) == Some(&t) {
            return None;
        }
        while j < b.times.len() && (b.times[j] < t || b.times.get(j + 1) == Some(&t)) {
            j += 1;
        }
        (b.times.get(j) == Some(&t)).then(|| (t, a.samples[i][ka], b.samples[j][kb]))
    })
}

pub fn simulate(prog: &Program, discrete: &Process, cfg: &PipelineConfig) -> Result<Simulation, PipelineError> {
    let reference = run_reference(&prog.body, &[], cfg.t_end, cfg.dt_ref, cfg.seed)?;
    let dis = run_discrete(discrete, &[], cfg.t_end, cfg.dt_ref, cfg.seed)?;
    let unit = emit(prog, discrete, cfg)?;
    let back = reinterpret(&unit)?;
    let systemc = run_discrete(&back.body, &[], cfg.t_end, cfg.dt_ref, cfg.seed)?;
    Ok(Simulation {
        reference,
        discrete: dis,
        systemc,
    })
}

/// SystemC for the discretization of `prog`.
pub fn emit(prog: &Program, discrete: &Process, cfg: &PipelineConfig) -> Result<EmitUnit, CodegenError> {
    let dprog = Program {
        name: prog.name.clone(),
        body: discrete.clone(),
    };
    emit_module(
        &dprog,
        &EmitConfig {
            time_unit: cfg.time_unit,
            t_end: cfg.t_end,
            seed: cfg.seed,
        },
    )
}

#[derive(Debug, Clone)]
pub struct PipelineReport {
    pub h: f64,
    pub stepsize: Option<StepsizeReport>,
    pub discretized: Process,
    pub verdict: BisimVerdict,
    pub robustness: Option<RobustnessReport>,
    pub unit: EmitUnit,
    /// The generated code read back behaves like the discretized process on every tested seed.
    pub systemc_matches: bool,
}

impl PipelineReport {
    pub fn accepted(&self) -> bool {
        self.verdict.accepted && self.systemc_matches
    }

    pub fn summary(&self, cfg: &PipelineConfig) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "h = {}", self.h);
        if let Some(s) = &self.stepsize {
            let _ = writeln!(out, "halvings = {}", s.halvings);
            let _ = writeln!(out, "eps_dde = {}", s.eps_dde);
            for g in &s.groups {
                let dmax = g.lists.d.iter().cloned().fold(0.0, f64::max);
                let _ = writeln!(
                    out,
                    "dde {} : {} segments, max error bound {dmax:.6}",
                    g.vars.join(","),
                    g.schedule.len()
                );
            }
        }
        let _ = writeln!(out, "eps = {}", cfg.eps);
        let _ = writeln!(out, "time_bound = {}", cfg.t_end);
        let _ = writeln!(
            out,
            "bisimulation = {}",
            if self.verdict.accepted { "accepted" } else { "rejected" }
        );
        let _ = writeln!(out, "max_deviation = {:.6}", self.verdict.max_deviation);
        let _ = writeln!(
            out,
            "states = {} source, {} discrete",
            self.verdict.source.len(),
            self.verdict.target.len()
        );
        if let Some(r) = &self.robustness {
            let _ = writeln!(out, "robust_delta = {}", r.delta);
            let _ = writeln!(out, "robust_eps = {}", r.eps);
            for w in &r.warnings {
                let _ = writeln!(out, "warning = {w}");
            }
        }
        let _ = writeln!(
            out,
            "systemc_readback = {}",
            if self.systemc_matches { "matches" } else { "differs" }
        );
        for (name, _) in self.unit.files() {
            let _ = writeln!(out, "file = {name}");
        }
        out
    }
}

/// Seeds on which the read-back SystemC process is compared with the discretization.
pub const READBACK_SEEDS: u64 = 3;

pub fn run_pipeline(prog: &Program, cfg: &PipelineConfig) -> Result<PipelineReport, PipelineError> {
    cfg.check()?;
    let diags = validate_model(&prog.body);
    if !diags.is_empty() {
        return Err(PipelineError::Invalid(diags));
    }
    let (h, stepsize) = derive_step(&prog.body, cfg)?;
    let discretized = discretize(&prog.body, h, cfg.eps, cfg.t_end)?;
    let verdict = check_approx_bisim(&prog.body, &discretized, &[], h, cfg.eps, cfg.t_end, cfg.ts_options())?;
    let robustness = if cfg.robustness_runs > 0 && !dde_specs(&prog.body).is_empty() {
        Some(estimate_robustness(&prog.body, &[], cfg.t_end, cfg.robustness_runs, cfg.dt_ref)?)
    } else {
        None
    };
    let unit = emit(prog, &discretized, cfg)?;
    let back = reinterpret(&unit)?;
    let mut systemc_matches = true;
    for seed in 0..READBACK_SEEDS {
        let a = run_discrete(&discretized, &[], cfg.t_end, h, seed)?;
        let b = run_discrete(&back.body, &[], cfg.t_end, h, seed)?;
        systemc_matches &= a == b;
    }
    Ok(PipelineReport {
        h,
        stepsize,
        discretized,
        verdict,
        robustness,
        unit,
        systemc_matches,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse, parse_program};

    #[test]
    fn schedules_merge_consecutive_steps() {
        let steps = [(0.1, 0), (0.2, 0), (0.3, 1), (0.4, 1), (0.5, 0)];
        let s = schedule_of(&steps, 0.1);
        assert_eq!(s.len(), 3);
        assert_eq!((s[0].start, s[0].end), (0.0, 0.2));
        assert_eq!((s[1].dde, s[1].start, s[1].end), (1, 0.2, 0.4));
        assert_eq!((s[2].dde, s[2].end), (0, 0.5));
    }

    #[test]
    fn zero_dynamics_keep_the_delay() {
        let p = parse("x := 1; <x' = 0 * x@0.1 & true>").unwrap();
        let cfg = PipelineConfig {
            t_end: 1.0,
            ..PipelineConfig::default()
        };
        let s = program_stepsize(&p, &cfg).unwrap();
        assert_eq!(s.h, 0.1);
        assert_eq!(s.halvings, 0);
        assert_eq!(s.groups[0].lists.y[0], vec![1.0]);
    }

    #[test]
    fn modes_switch_in_the_schedule() {
        let p = parse("x := 1; <x' = -x & x > 0.5>; <x' = 1 & x < 1>").unwrap();
        let cfg = PipelineConfig {
            t_end: 2.0,
            eps: 0.1,
            ..PipelineConfig::default()
        };
        let s = program_stepsize(&p, &cfg).unwrap();
        let g = &s.groups[0];
        assert_eq!(g.specs.len(), 2);
        assert!(g.schedule.len() >= 2);
        assert_eq!(g.schedule[0].dde, 0);
        assert_eq!(g.schedule[1].dde, 1);
        assert_eq!(g.schedule[0].end, g.schedule[1].start);
    }

    #[test]
    fn discrete_models_need_no_stepsize() {
        let prog = parse_program("system S { A: wait 0.5; ch!1 || B: ch?x }").unwrap();
        let cfg = PipelineConfig {
            t_end: 1.0,
            ..PipelineConfig::default()
        };
        let r = run_pipeline(&prog, &cfg).unwrap();
        assert!(r.stepsize.is_none());
        assert_eq!(r.h, 0.5);
        assert!(r.accepted());
        assert!(r.robustness.is_none());
    }

    #[test]
    fn skip_is_accepted() {
        let prog = parse_program("system S { A: skip }").unwrap();
        let r = run_pipeline(&prog, &PipelineConfig::default()).unwrap();
        assert!(r.accepted());
        assert!(r.summary(&PipelineConfig::default()).contains("bisimulation = accepted"));
    }

    #[test]
    fn bad_configs_are_reported() {
        let prog = parse_program("system S { A: skip }").unwrap();
        for cfg in [
            PipelineConfig { eps: 0.0, ..PipelineConfig::default() },
            PipelineConfig { t_end: -1.0, ..PipelineConfig::default() },
            PipelineConfig { eps_dde: Some(0.3), ..PipelineConfig::default() },
        ] {
            assert!(matches!(run_pipeline(&prog, &cfg), Err(PipelineError::Config(_))));
        }
    }

    #[test]
    fn invalid_models_are_reported() {
        let prog = parse_program("system S { A: ch!1 }").unwrap();
        assert!(matches!(
            run_pipeline(&prog, &PipelineConfig::default()),
            Err(PipelineError::Invalid(_))
        ));
    }
}
