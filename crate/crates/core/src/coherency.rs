//! Scalar/vector memory coherency.
//!
//! The scalar core keeps a write-through L1 data cache, so backing memory is
//! always current for the vector unit. Vector stores invalidate overlapping
//! scalar cache lines, and issue is gated by three ordering rules:
//!
//! 1. scalar loads wait for in-flight vector stores,
//! 2. scalar stores wait for in-flight vector loads and stores,
//! 3. vector loads and stores wait for pending scalar stores.

use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::rvv::{Eew, FlatMachineState, Lmul, ProgramTrace, VReg, VType, VectorInstr};
use crate::timing::{simulate_with, DispatcherModel, SimOptions, TimingConfig};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MemKind {
    ScalarLoad,
    ScalarStore,
    VectorLoad,
    VectorStore,
}

/// Which ordering rule held an operation back.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rule {
    ScalarLoadAfterVectorStore,
    ScalarStoreAfterVectorAccess,
    VectorAfterScalarStore,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MemEvent {
    pub kind: MemKind,
    pub range: Range<u64>,
    pub issue: u64,
    pub completion: u64,
}

/// Residency-only model of a set-associative write-through cache with LRU.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CacheModel {
    line_bytes: u64,
    ways: usize,
    /// Per set, line addresses from least to most recently used.
    sets: Vec<Vec<u64>>,
}

impl CacheModel {
    pub fn new(line_bytes: u64, sets: usize, ways: usize) -> Result<Self> {
        if line_bytes == 0 || !line_bytes.is_power_of_two() || sets == 0 || !sets.is_power_of_two() || ways == 0 {
            return Err(Error::Config(format!("bad cache geometry: {line_bytes} B lines, {sets} sets, {ways} ways")));
        }
        Ok(CacheModel { line_bytes, ways, sets: vec![Vec::with_capacity(ways); sets] })
    }

    /// 32 KiB, 8-way, with the given line size in bits.
    pub fn with_line_bits(line_bits: u64) -> Result<Self> {
        let line_bytes = line_bits / 8;
        let ways = 8;
        let sets = (32 * 1024 / line_bytes.max(1)) as usize / ways;
        Self::new(line_bytes, sets.max(1), ways)
    }

    pub fn line_bytes(&self) -> u64 {
        self.line_bytes
    }

    fn line_of(&self, addr: u64) -> u64 {
        addr / self.line_bytes
    }

    fn set_of(&self, line: u64) -> usize {
        (line as usize) & (self.sets.len() - 1)
    }

    pub fn is_resident(&self, addr: u64) -> bool {
        let line = self.line_of(addr);
        self.sets[self.set_of(line)].contains(&line)
    }

    /// Looks up `addr`, allocating on a miss. Returns whether it hit.
    pub fn access(&mut self, addr: u64) -> bool {
        let line = self.line_of(addr);
        let ways = self.ways;
        let set = self.set_of(line);
        let set = &mut self.sets[set];
        if let Some(pos) = set.iter().position(|l| *l == line) {
            let l = set.remove(pos);
            set.push(l);
            true
        } else {
            if set.len() == ways {
                set.remove(0);
            }
            set.push(line);
            false
        }
    }

    pub fn resident_lines(&self) -> usize {
        self.sets.iter().map(Vec::len).sum()
    }
}

/// Drops every resident line overlapping `range`; returns their base addresses.
pub fn on_vector_store(range: Range<u64>, cache: &mut CacheModel) -> Vec<u64> {
    if range.is_empty() {
        return Vec::new();
    }
    let first = cache.line_of(range.start);
    let last = cache.line_of(range.end - 1);
    let mut out = Vec::new();
    for line in first..=last {
        let set = cache.set_of(line);
        if let Some(pos) = cache.sets[set].iter().position(|l| *l == line) {
            cache.sets[set].remove(pos);
            out.push(line * cache.line_bytes);
        }
    }
    out
}

/// In-flight memory operations, tracked per instruction.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PendingOps {
    pub vector_loads: Vec<(u64, Range<u64>)>,
    pub vector_stores: Vec<(u64, Range<u64>)>,
    pub scalar_stores: Vec<(u64, u64)>,
}

impl PendingOps {
    pub fn is_empty(&self) -> bool {
        self.vector_loads.is_empty() && self.vector_stores.is_empty() && self.scalar_stores.is_empty()
    }

    pub fn retire(&mut self, id: u64) {
        self.vector_loads.retain(|(i, _)| *i != id);
        self.vector_stores.retain(|(i, _)| *i != id);
        self.scalar_stores.retain(|(i, _)| *i != id);
    }
}

pub fn blocking_rule(kind: MemKind, pending: &PendingOps) -> Option<Rule> {
    match kind {
        MemKind::ScalarLoad if !pending.vector_stores.is_empty() => Some(Rule::ScalarLoadAfterVectorStore),
        MemKind::ScalarStore if !pending.vector_loads.is_empty() || !pending.vector_stores.is_empty() => {
            Some(Rule::ScalarStoreAfterVectorAccess)
        }
        MemKind::VectorLoad | MemKind::VectorStore if !pending.scalar_stores.is_empty() => {
            Some(Rule::VectorAfterScalarStore)
        }
        _ => None,
    }
}

pub fn can_issue(kind: MemKind, pending: &PendingOps) -> bool {
    blocking_rule(kind, pending).is_none()
}

/// A load that returned something other than the latest program-order store.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// Index of the offending load in the trace.
    pub instr_index: usize,
    pub addr: u64,
    pub expected: u8,
    pub observed: u8,
    pub cycle: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LitmusVerdict {
    pub schedules: usize,
    pub loads_checked: u64,
    /// First violation found, with the seed that produced it.
    pub counterexample: Option<(u64, Violation)>,
}

impl LitmusVerdict {
    pub fn passed(&self) -> bool {
        self.counterexample.is_none()
    }
}

#[derive(Debug, Clone)]
pub struct LitmusConfig {
    pub timing: TimingConfig,
    pub seed: u64,
    pub schedules: usize,
    /// Upper bound of random extra delay injected per memory beat and scalar store.
    pub max_jitter: u32,
    /// Turning this off drops the scalar/vector ordering rules (negative control).
    pub enforce_rules: bool,
}

impl LitmusConfig {
    pub fn new(timing: TimingConfig) -> Self {
        LitmusConfig { timing, seed: 0, schedules: 100, max_jitter: 6, enforce_rules: true }
    }
}

/// Runs `trace` under `schedules` randomized delay schedules and checks that every
/// load byte observes the latest program-order store.
pub fn check_litmus(trace: &ProgramTrace, init: &FlatMachineState, cfg: &LitmusConfig) -> Result<LitmusVerdict> {
    let results: Vec<Result<(u64, u64, Option<Violation>)>> = (0..cfg.schedules as u64)
        .into_par_iter()
        .map(|i| {
            let seed = cfg.seed.wrapping_add(i.wrapping_mul(0x9e37_79b9_7f4a_7c15));
            let opts = SimOptions {
                jitter: Some((seed, cfg.max_jitter)),
                enforce_coherency: cfg.enforce_rules,
                check_oracle: cfg.enforce_rules,
                ..SimOptions::default()
            };
            let out = simulate_with(trace, init.clone(), &cfg.timing, &DispatcherModel::Ideal, &opts)?;
            Ok((seed, out.loads_checked, out.violations.into_iter().next()))
        })
        .collect();
    let mut verdict = LitmusVerdict { schedules: cfg.schedules, loads_checked: 0, counterexample: None };
    for r in results {
        let (seed, checked, v) = r?;
        verdict.loads_checked += checked;
        if verdict.counterexample.is_none() {
            if let Some(v) = v {
                verdict.counterexample = Some((seed, v));
            }
        }
    }
    Ok(verdict)
}

/// Random scalar/vector store-load interleaving over a small shared region.
pub fn random_litmus_trace(rng: &mut impl Rng, vlen: usize, events: usize) -> (ProgramTrace, FlatMachineState) {
    let region = 0x1000u64;
    let span = 64u64;
    let mut t = ProgramTrace::new();
    let vl = rng.gen_range(1..=8);
    let eew = Eew::ALL[rng.gen_range(0..4)];
    t.push(VectorInstr::Config { avl: vl, vtype: VType::new(eew, Lmul::M1) });
    for _ in 0..events {
        let addr = region + rng.gen_range(0..span);
        let base = region + rng.gen_range(0..span / 2);
        let reg = VReg::new(rng.gen_range(1..8)).expect("in range");
        let instr = match rng.gen_range(0..6) {
            0 | 1 => VectorInstr::ScalarStore { addr, val: rng.gen() },
            2 => VectorInstr::ScalarLoad { addr },
            3 => VectorInstr::Load { eew, vd: reg, base, stride: None, masked: false },
            4 => VectorInstr::Store { eew, vs3: reg, base, stride: None, masked: false },
            _ => VectorInstr::Arith {
                op: crate::rvv::ArithOp::Add,
                vd: reg,
                src: crate::rvv::Src::X(rng.gen_range(1..5)),
                vs2: Some(reg),
                masked: false,
            },
        };
        t.push(instr);
    }
    let mut init = FlatMachineState::new(vlen);
    for a in 0..span + 64 {
        init.write_byte(region + a, rng.gen());
    }
    (t, init)
}

/// Seeded batch of random litmus traces, each checked under `per_trace` schedules.
pub fn explore(cfg: &LitmusConfig, traces: usize, per_trace: usize, events: usize) -> Result<LitmusVerdict> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let cases: Vec<(ProgramTrace, FlatMachineState, u64)> = (0..traces)
        .map(|_| {
            let (t, init) = random_litmus_trace(&mut rng, cfg.timing.layout.vlen, events);
            (t, init, rng.gen())
        })
        .collect();
    let verdicts: Vec<Result<LitmusVerdict>> = cases
        .par_iter()
        .map(|(t, init, seed)| check_litmus(t, init, &LitmusConfig { seed: *seed, schedules: per_trace, ..cfg.clone() }))
        .collect();
    let mut total = LitmusVerdict { schedules: 0, loads_checked: 0, counterexample: None };
    for v in verdicts {
        let v = v?;
        total.schedules += v.schedules;
        total.loads_checked += v.loads_checked;
        if total.counterexample.is_none() {
            total.counterexample = v.counterexample;
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pending(vl: bool, vs: bool, ss: bool) -> PendingOps {
        PendingOps {
            vector_loads: if vl { vec![(1, 0..8)] } else { vec![] },
            vector_stores: if vs { vec![(2, 0..8)] } else { vec![] },
            scalar_stores: if ss { vec![(3, 4)] } else { vec![] },
        }
    }

    #[test]
    fn issue_rules() {
        assert!(!can_issue(MemKind::ScalarLoad, &pending(false, true, false)));
        assert!(!can_issue(MemKind::ScalarStore, &pending(true, false, false)));
        assert!(!can_issue(MemKind::ScalarStore, &pending(false, true, false)));
        assert!(can_issue(MemKind::VectorLoad, &PendingOps::default()));
        assert!(!can_issue(MemKind::VectorLoad, &pending(false, false, true)));
        assert!(!can_issue(MemKind::VectorStore, &pending(false, false, true)));
        assert!(can_issue(MemKind::ScalarLoad, &pending(true, false, true)));
        assert!(can_issue(MemKind::VectorStore, &pending(true, true, false)));
    }

    #[test]
    fn exhaustive_rule_table() {
        for bits in 0..8 {
            let p = pending(bits & 1 != 0, bits & 2 != 0, bits & 4 != 0);
            let (vl, vs, ss) = (bits & 1 != 0, bits & 2 != 0, bits & 4 != 0);
            assert_eq!(can_issue(MemKind::ScalarLoad, &p), !vs);
            assert_eq!(can_issue(MemKind::ScalarStore, &p), !vl && !vs);
            assert_eq!(can_issue(MemKind::VectorLoad, &p), !ss);
            assert_eq!(can_issue(MemKind::VectorStore, &p), !ss);
        }
    }

    #[test]
    fn invalidation() {
        let mut c = CacheModel::new(16, 4, 2).unwrap();
        assert!(!c.access(0x100));
        assert!(c.access(0x10f));
        assert_eq!(on_vector_store(0x100..0x110, &mut c), vec![0x100]);
        assert!(!c.is_resident(0x100));
        assert!(on_vector_store(0x400..0x480, &mut c).is_empty());
        c.access(0x200);
        // store touching only the last byte of the line
        assert_eq!(on_vector_store(0x20f..0x218, &mut c), vec![0x200]);
        assert!(on_vector_store(0x0..0x0, &mut c).is_empty());
    }

    #[test]
    fn lru_eviction() {
        let mut c = CacheModel::new(16, 1, 2).unwrap();
        c.access(0x00);
        c.access(0x10);
        c.access(0x00);
        c.access(0x20); // evicts 0x10
        assert!(c.is_resident(0x00));
        assert!(!c.is_resident(0x10));
        assert_eq!(c.resident_lines(), 2);
    }
}
