//! SystemC generation from discretized processes, and a reader that turns the
//! generated text back into a process.

mod blocks;
pub mod cpp;
mod emit;
mod reinterpret;
pub mod templates;

pub use blocks::{blocks, lower, Block, CodegenError, EulerLoop};
pub use emit::{emit_module, emit_stmt, EmitConfig, EmitUnit, TimeUnit, UnknownTimeUnit};
pub use reinterpret::{reinterpret, ReinterpretError};
