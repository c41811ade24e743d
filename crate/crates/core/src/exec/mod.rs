//! Machinery shared by the dense-time and the delta-cycle interpreters.

mod machine;
mod program;
mod trace;

pub use machine::{
    drive, Chooser, FirstChooser, Machine, ReplayChooser, RunError, SeededChooser, Settled,
};
pub use program::{CBool, CDde, CEvent, CExpr, CompileError, Compiled, Node, NodeId};
pub use trace::{Event, Label, Trace};
