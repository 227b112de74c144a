use std::fmt;
use std::path::Path;

use super::decode_line;
use super::exec::{exec_flat, ExecEffect, FlatMachineState};
use super::instr::VectorInstr;
use super::vtype::CsrState;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TraceLine {
    /// 1-based source line, 0 for generated instructions.
    pub line: usize,
    pub instr: VectorInstr,
}

/// A decoded instruction sequence, in program order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ProgramTrace {
    pub lines: Vec<TraceLine>,
}

impl ProgramTrace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let instr = decode_line(body).map_err(|e| match e {
                Error::Decode { msg, .. } => Error::Decode { line: i + 1, msg },
                other => other,
            })?;
            lines.push(TraceLine { line: i + 1, instr });
        }
        Ok(ProgramTrace { lines })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn push(&mut self, instr: VectorInstr) {
        self.lines.push(TraceLine { line: 0, instr });
    }

    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }

    pub fn instrs(&self) -> impl Iterator<Item = &VectorInstr> {
        self.lines.iter().map(|l| &l.instr)
    }
}

impl FromIterator<VectorInstr> for ProgramTrace {
    fn from_iter<I: IntoIterator<Item = VectorInstr>>(iter: I) -> Self {
        ProgramTrace { lines: iter.into_iter().map(|instr| TraceLine { line: 0, instr }).collect() }
    }
}

impl fmt::Display for ProgramTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.lines {
            writeln!(f, "{}", l.instr)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogEntry {
    pub index: usize,
    pub line: usize,
    pub csr: CsrState,
    pub effect: ExecEffect,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub state: FlatMachineState,
    pub csr: CsrState,
    pub log: Vec<LogEntry>,
}

/// Runs the trace on the flat oracle in program order.
pub fn run_program(trace: &ProgramTrace, state: FlatMachineState) -> Result<RunResult> {
    let mut csr = CsrState::new(state.vlen())?;
    let mut state = state;
    let mut log = Vec::with_capacity(trace.len());
    for (index, tl) in trace.lines.iter().enumerate() {
        let effect = exec_flat(&tl.instr, &mut state, &mut csr).map_err(|e| Error::Decode {
            line: tl.line,
            msg: format!("instruction {index} `{}`: {e}", tl.instr),
        })?;
        log.push(LogEntry { index, line: tl.line, csr, effect });
    }
    Ok(RunResult { state, csr, log })
}
