//! Untimed reference semantics for the supported RVV 1.0 subset.
//!
//! Registers are plain byte arrays in the canonical element order; memory is
//! a sparse byte map. This is the oracle every other model is compared to.

mod decode;
mod exec;
mod instr;
mod program;
mod vtype;

pub use decode::decode_line;
pub use exec::{exec_flat, DestWrite, ExecEffect, FlatMachineState};
pub use instr::{ArithOp, CmpOp, OpClass, SlideDir, Src, VReg, VectorInstr, WideOp};
pub use program::{run_program, LogEntry, ProgramTrace, RunResult, TraceLine};
pub use vtype::{set_vtype, vlmax, CsrState, Eew, Lmul, VType, DEFAULT_VLEN};
