//! Toolchain for delay hybrid CSP (dHCSP) models.
//!
//! The crate covers the full path from a textual model to a SystemC skeleton:
//!
//! * [`syntax`]: AST, parser, printer and validator.
//! * [`interval`]: interval arithmetic and the slope bound used by the step-size search.
//! * [`reference`]: a dense-time interpreter used as ground truth.
//! * [`stepsize`]: validated Euler simulation and the step-size search.
//! * [`discretize`]: the DDE-to-Euler program transformation and robustness estimates.
//! * [`bisim`]: the discrete interpreter, transition-system construction and the
//!   approximate bisimulation check.
//! * [`codegen`]: SystemC emission and its re-interpretation.
//! * [`pipeline`]: end-to-end orchestration used by the command-line tool.

pub mod bisim;
pub mod codegen;
pub mod discretize;
pub mod exec;
pub mod interval;
pub mod pipeline;
pub mod reference;
pub mod scalar;
pub mod stepsize;
pub mod syntax;
pub mod time;

pub use scalar::Scalar;
pub use time::Ticks;

pub type Interval64 = interval::Interval<f64>;
pub type Interval32 = interval::Interval<f32>;
pub type SimLists64 = stepsize::SimLists<f64>;
pub type SimLists32 = stepsize::SimLists<f32>;
pub type StepConfig64 = stepsize::StepConfig<f64>;
