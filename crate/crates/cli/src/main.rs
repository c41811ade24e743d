//! `dhcsp`: check, discretize, simulate and compile dHCSP models.
//!
//! Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success; for `bisim` and `pipeline`, the discretization was accepted |
//! | 1 | a stage rejected: bisimulation failed or the generated code reads back differently |
//! | 2 | bad command line or configuration |
//! | 3 | the model cannot be read, parsed or validated, or lacks what the command needs |
//! | 4 | the step-size search gave up |
//! | 5 | any other failure: I/O, evaluation errors, state budget, code generation |

mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use dhcsp_core::bisim::check_approx_bisim;
use dhcsp_core::discretize::discretize;
use dhcsp_core::pipeline::{self, derive_step, program_stepsize, run_pipeline, validate_model, PipelineError};
use dhcsp_core::syntax::{parse_program, print_program, Program};

use config::RunConfig;

pub const EXIT_REJECTED: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_MODEL: u8 = 3;
pub const EXIT_STEPSIZE: u8 = 4;
pub const EXIT_RUNTIME: u8 = 5;

#[derive(Parser)]
#[command(name = "dhcsp", version, about = "Toolchain for delay hybrid CSP models")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse and validate a model.
    Check(Common),
    /// Search for a validated Euler step size and write the error-bound lists.
    Stepsize(Common),
    /// Discretize a model.
    Discretize {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        step: Step,
        /// Print the discretized model in the module syntax.
        #[arg(long)]
        emit_discrete: bool,
    },
    /// Write reference, discrete and generated-code traces as CSV.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        step: Step,
    },
    /// Check the model against its discretization for approximate bisimilarity.
    Bisim {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        step: Step,
        /// Compare with this discrete model instead of the discretization.
        #[arg(long)]
        against: Option<PathBuf>,
        /// Write both transition systems and the counterexample as CSV.
        #[arg(long)]
        dump_ts: bool,
    },
    /// Generate SystemC for the discretized model.
    Emit {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        step: Step,
    },
    /// Step size, discretization, bisimulation check, robustness estimate and code generation.
    Pipeline {
        #[command(flatten)]
        common: Common,
        /// Seeded runs behind the robustness estimate; 0 skips it.
        #[arg(long)]
        robustness_runs: Option<u64>,
    },
}

#[derive(Args)]
struct Common {
    /// Model file; defaults to `source` in the configuration file.
    source: Option<PathBuf>,
    /// Configuration file of `key = value` lines.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Global precision.
    #[arg(long)]
    eps: Option<f64>,
    /// Precision of the Euler error bounds; half of `--eps` by default.
    #[arg(long)]
    eps_dde: Option<f64>,
    /// Time bound in seconds.
    #[arg(long)]
    time_bound: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Sampling and integration step of the reference interpreter.
    #[arg(long)]
    dt_ref: Option<f64>,
    /// Threshold on the growth of the error bounds.
    #[arg(long)]
    sigma: Option<f64>,
    /// SystemC time unit of the generated code, e.g. SC_MS.
    #[arg(long)]
    time_unit: Option<String>,
    /// Largest transition system explored by the bisimulation check.
    #[arg(long)]
    state_budget: Option<usize>,
}

#[derive(Args)]
struct Step {
    /// Step size; searched for when omitted.
    #[arg(long)]
    h: Option<f64>,
}

struct Failure {
    code: u8,
    err: anyhow::Error,
}

impl Failure {
    fn new(code: u8, err: impl Into<anyhow::Error>) -> Failure {
        Failure { code, err: err.into() }
    }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Failure {
        let code = match &e {
            PipelineError::Config(_) => EXIT_USAGE,
            PipelineError::Invalid(_) | PipelineError::NoDde => EXIT_MODEL,
            PipelineError::Step(_) => EXIT_STEPSIZE,
            _ => EXIT_RUNTIME,
        };
        Failure::new(code, e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Failure {
        Failure::new(EXIT_RUNTIME, e)
    }
}

type Outcome = Result<bool, Failure>;

impl Common {
    fn resolve(&self) -> Result<RunConfig, Failure> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path).map_err(|e| Failure::new(EXIT_USAGE, e))?,
            None => RunConfig::default(),
        };
        let p = &mut cfg.pipeline;
        if let Some(v) = self.eps {
            p.eps = v;
        }
        if let Some(v) = self.eps_dde {
            p.eps_dde = Some(v);
        }
        if let Some(v) = self.time_bound {
            p.t_end = v;
        }
        if let Some(v) = self.seed {
            p.seed = v;
        }
        if let Some(v) = self.dt_ref {
            p.dt_ref = v;
        }
        if let Some(v) = self.sigma {
            p.sigma = v;
        }
        if let Some(v) = self.state_budget {
            p.state_budget = v;
        }
        if let Some(v) = &self.time_unit {
            p.time_unit = v.parse().map_err(|e| Failure::new(EXIT_USAGE, e))?;
        }
        if let Some(v) = &self.source {
            cfg.source = Some(v.clone());
        }
        if let Some(v) = &self.out {
            cfg.out = Some(v.clone());
        }
        cfg.pipeline.check()?;
        Ok(cfg)
    }
}

fn load_model(path: &Path) -> Result<Program, Failure> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(|e| Failure::new(EXIT_MODEL, e))?;
    parse_program(&text).map_err(|e| Failure::new(EXIT_MODEL, anyhow!("{}: {e}", path.display())))
}

fn model(cfg: &RunConfig) -> Result<Program, Failure> {
    let path = cfg
        .source
        .as_deref()
        .ok_or_else(|| Failure::new(EXIT_USAGE, anyhow!("no model given; pass a file or set `source`")))?;
    let prog = load_model(path)?;
    let diags = validate_model(&prog.body);
    if !diags.is_empty() {
        return Err(PipelineError::Invalid(diags).into());
    }
    Ok(prog)
}

fn out_dir(cfg: &RunConfig) -> PathBuf {
    cfg.out.clone().unwrap_or_else(|| PathBuf::from("out"))
}

fn write(dir: &Path, name: &str, text: &str) -> Result<PathBuf, Failure> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, text)?;
    Ok(path)
}

fn step_size(prog: &Program, step: &Step, cfg: &RunConfig) -> Result<f64, Failure> {
    match step.h {
        Some(h) if h > 0.0 => Ok(h),
        Some(h) => Err(Failure::new(EXIT_USAGE, anyhow!("--h must be positive, got {h}"))),
        None => Ok(derive_step(&prog.body, &cfg.pipeline)?.0),
    }
}

fn discretized(prog: &Program, h: f64, cfg: &RunConfig) -> Result<Program, Failure> {
    let body = discretize(&prog.body, h, cfg.pipeline.eps, cfg.pipeline.t_end).map_err(PipelineError::from)?;
    Ok(Program {
        name: prog.name.clone(),
        body,
    })
}

fn cmd_check(common: &Common) -> Outcome {
    let cfg = common.resolve()?;
    let prog = model(&cfg)?;
    println!("{}: ok ({})", prog.name, cfg.source.as_deref().unwrap_or(Path::new("")).display());
    Ok(true)
}

fn cmd_stepsize(common: &Common) -> Outcome {
    let cfg = common.resolve()?;
    let prog = model(&cfg)?;
    let s = program_stepsize(&prog.body, &cfg.pipeline)?;
    println!("h = {}", s.h);
    println!("halvings = {}", s.halvings);
    println!("eps_dde = {}", s.eps_dde);
    for g in &s.groups {
        let name = format!("stepsize_{}.csv", g.vars.join("_"));
        match &cfg.out {
            Some(dir) => println!("file = {}", write(dir, &name, &g.lists.to_csv())?.display()),
            None => print!("# {}\n{}", g.vars.join(","), g.lists.to_csv()),
        }
    }
    Ok(true)
}

fn cmd_discretize(common: &Common, step: &Step, emit_discrete: bool) -> Outcome {
    let cfg = common.resolve()?;
    let prog = model(&cfg)?;
    let h = step_size(&prog, step, &cfg)?;
    let q = discretized(&prog, h, &cfg)?;
    let text = print_program(&q);
    if emit_discrete {
        print!("{text}");
        return Ok(true);
    }
    println!("h = {h}");
    if let Some(dir) = &cfg.out {
        println!("file = {}", write(dir, "discrete.dhcsp", &text)?.display());
    }
    Ok(true)
}

fn cmd_simulate(common: &Common, step: &Step) -> Outcome {
    let cfg = common.resolve()?;
    let prog = model(&cfg)?;
    let h = step_size(&prog, step, &cfg)?;
    let q = discretized(&prog, h, &cfg)?;
    let sim = pipeline::simulate(&prog, &q.body, &cfg.pipeline)?;
    let csv = sim.to_csv(cfg.pipeline.eps);
    match &cfg.out {
        Some(dir) => {
            println!("h = {h}");
            for x in sim.columns() {
                println!("max_deviation {x} = {:.6}", sim.max_deviation(&x));
            }
            println!("file = {}", write(dir, "simulation.csv", &csv)?.display());
        }
        None => print!("{csv}"),
    }
    Ok(true)
}

fn cmd_bisim(common: &Common, step: &Step, against: Option<&Path>, dump_ts: bool) -> Outcome {
    let cfg = common.resolve()?;
    let prog = model(&cfg)?;
    let h = step_size(&prog, step, &cfg)?;
    let target = match against {
        Some(path) => load_model(path)?,
        None => discretized(&prog, h, &cfg)?,
    };
    let p = &cfg.pipeline;
    let opts = dhcsp_core::bisim::TsOptions {
        dt_ref: p.dt_ref,
        state_budget: p.state_budget,
    };
    let v = check_approx_bisim(&prog.body, &target.body, &[], h, p.eps, p.t_end, opts)
        .map_err(PipelineError::from)?;
    println!("h = {h}");
    println!("bisimulation = {}", if v.accepted { "accepted" } else { "rejected" });
    println!("max_deviation = {:.6}", v.max_deviation);
    println!("states = {} source, {} target", v.source.len(), v.target.len());
    println!("rounds = {}", v.relation.rounds);
    if let Some(first) = v.relation.counterexample.first() {
        println!("counterexample_time = {}", first.time.secs());
    }
    if dump_ts {
        let dir = out_dir(&cfg);
        for (name, text) in [
            ("source_nodes.csv", v.source.nodes_csv()),
            ("source_edges.csv", v.source.edges_csv()),
            ("target_nodes.csv", v.target.nodes_csv()),
            ("target_edges.csv", v.target.edges_csv()),
            ("counterexample.csv", v.relation.counterexample_csv()),
        ] {
            println!("file = {}", write(&dir, name, &text)?.display());
        }
    }
    Ok(v.accepted)
}

fn cmd_emit(common: &Common, step: &Step) -> Outcome {
    let cfg = common.resolve()?;
    let prog = model(&cfg)?;
    let h = step_size(&prog, step, &cfg)?;
    let q = discretized(&prog, h, &cfg)?;
    let unit = pipeline::emit(&prog, &q.body, &cfg.pipeline).map_err(PipelineError::from)?;
    println!("h = {h}");
    for path in unit.write_to(&out_dir(&cfg))? {
        println!("file = {}", path.display());
    }
    Ok(true)
}

fn cmd_pipeline(common: &Common, robustness_runs: Option<u64>) -> Outcome {
    let mut cfg = common.resolve()?;
    if let Some(n) = robustness_runs {
        cfg.pipeline.robustness_runs = n;
    }
    let prog = model(&cfg)?;
    let report = run_pipeline(&prog, &cfg.pipeline)?;
    let dir = out_dir(&cfg);
    report.unit.write_to(&dir)?;
    let discrete = Program {
        name: prog.name.clone(),
        body: report.discretized.clone(),
    };
    write(&dir, "discrete.dhcsp", &print_program(&discrete))?;
    if let Some(s) = &report.stepsize {
        for g in &s.groups {
            write(&dir, &format!("stepsize_{}.csv", g.vars.join("_")), &g.lists.to_csv())?;
        }
    }
    let summary = report.summary(&cfg.pipeline);
    write(&dir, "report.txt", &summary)?;
    print!("{summary}");
    println!("out = {}", dir.display());
    Ok(report.accepted())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.cmd {
        Cmd::Check(c) => cmd_check(c),
        Cmd::Stepsize(c) => cmd_stepsize(c),
        Cmd::Discretize {
            common,
            step,
            emit_discrete,
        } => cmd_discretize(common, step, *emit_discrete),
        Cmd::Simulate { common, step } => cmd_simulate(common, step),
        Cmd::Bisim {
            common,
            step,
            against,
            dump_ts,
        } => cmd_bisim(common, step, against.as_deref(), *dump_ts),
        Cmd::Emit { common, step } => cmd_emit(common, step),
        Cmd::Pipeline {
            common,
            robustness_runs,
        } => cmd_pipeline(common, *robustness_runs),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_REJECTED),
        Err(f) => {
            eprintln!("error: {:#}", f.err);
            ExitCode::from(f.code)
        }
    }
}
