//! Cycle-stepped model of the lane-based vector unit.
//!
//! Functional results are produced at dispatch, in program order, by running
//! the flat semantics on registers read back out of the lane-split image and
//! writing only the touched bytes back in. The cycle model then replays the
//! same instruction stream against bank ports, operand queues, unit queues
//! and the memory ordering rules. Lanes run in lockstep, so bank traffic is
//! tracked for lane 0 only.

use std::collections::{BTreeMap, HashMap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{DispatcherModel, TimingConfig};
use super::stats::{rule_index, CycleStats, InstrTiming};
use crate::banks::{arbitrate, AccessRequest, ArbRecord, ConflictStats, Requester};
use crate::coherency::{blocking_rule, on_vector_store, CacheModel, MemEvent, MemKind, PendingOps, Violation};
use crate::layout::{plan_reshuffle, EewTag, LaneImage};
use crate::rvv::{
    exec_flat, run_program, ArithOp, CsrState, Eew, FlatMachineState, ProgramTrace, SlideDir, Src, VReg, VectorInstr,
    WideOp,
};
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct SimOptions {
    /// `(seed, max)`: adds up to `max` random cycles to memory beats and scalar stores.
    pub jitter: Option<(u64, u32)>,
    /// Disabling this drops the scalar/vector ordering rules (negative control).
    pub enforce_coherency: bool,
    /// Compare the final state with the flat oracle.
    pub check_oracle: bool,
    pub record_arbitration: bool,
    /// Cycles without any progress before reporting a deadlock.
    pub watchdog: u64,
    /// Encodings of the initial registers. By default non-zero registers are e64.
    pub initial_tags: Option<[EewTag; 32]>,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            jitter: None,
            enforce_coherency: true,
            check_oracle: true,
            record_arbitration: false,
            watchdog: 20_000,
            initial_tags: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimOutcome {
    pub stats: CycleStats,
    pub state: FlatMachineState,
    pub tags: [EewTag; 32],
    /// One entry per trace line.
    pub timeline: Vec<InstrTiming>,
    pub arb_log: Vec<ArbRecord>,
    pub mem_events: Vec<MemEvent>,
    pub loads_checked: u64,
    pub violations: Vec<Violation>,
}

/// Runs `trace` and checks the result against the flat oracle.
pub fn simulate(
    trace: &ProgramTrace,
    state: FlatMachineState,
    cfg: &TimingConfig,
    dispatcher: &DispatcherModel,
) -> Result<(CycleStats, FlatMachineState)> {
    let out = simulate_with(trace, state, cfg, dispatcher, &SimOptions::default())?;
    Ok((out.stats, out.state))
}

pub fn simulate_with(
    trace: &ProgramTrace,
    state: FlatMachineState,
    cfg: &TimingConfig,
    dispatcher: &DispatcherModel,
    opts: &SimOptions,
) -> Result<SimOutcome> {
    cfg.validate()?;
    dispatcher.validate()?;
    if state.vlen() != cfg.layout.vlen {
        return Err(Error::Config(format!(
            "state VLEN {} does not match configured VLEN {}",
            state.vlen(),
            cfg.layout.vlen
        )));
    }
    let oracle = if opts.check_oracle { Some(run_program(trace, state.clone())?) } else { None };
    let mut eng = Engine::new(trace, state, cfg, dispatcher, opts)?;
    eng.run()?;
    let out = eng.finish();
    if let Some(o) = oracle {
        if let Some(r) = (0..32).find(|r| out.state.vreg(*r) != o.state.vreg(*r)) {
            return Err(Error::Divergence(format!("v{r} differs from the oracle")));
        }
        if out.state.memory() != o.state.memory() {
            return Err(Error::Divergence("memory differs from the oracle".into()));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Unit {
    Valu,
    Vmfpu,
    Sldu,
    Vlsu,
}

const UNITS: [Unit; 4] = [Unit::Valu, Unit::Vmfpu, Unit::Sldu, Unit::Vlsu];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Elementwise,
    Reduction,
    Load,
    Store,
    Reshuffle,
}

/// Contiguous run of lane-0 VRF words.
#[derive(Debug, Clone, Copy)]
struct Stream {
    base: usize,
    len: usize,
}

impl Stream {
    fn contains(&self, w: usize) -> bool {
        w >= self.base && w < self.base + self.len
    }
}

#[derive(Debug, Clone)]
struct Slot {
    req: Requester,
    words: Stream,
    fetched: usize,
    deps: Vec<Option<u64>>,
}

impl Slot {
    /// Words needed before beat `beat` can execute.
    fn need(&self, beat: usize, beats: usize) -> usize {
        ((beat + 1) * self.words.len).div_ceil(beats).min(self.words.len)
    }

    fn consumed(&self, executed: usize, beats: usize) -> usize {
        if executed == 0 {
            0
        } else {
            self.need(executed - 1, beats)
        }
    }
}

#[derive(Debug, Clone)]
struct WriteStream {
    req: Requester,
    words: Stream,
    written: Vec<bool>,
    enqueued: usize,
    pipe: VecDeque<(u64, usize)>,
    waw: Vec<Option<u64>>,
    war: Vec<Vec<u64>>,
}

impl WriteStream {
    fn is_written(&self, w: usize) -> bool {
        !self.words.contains(w) || self.written[w - self.words.base]
    }

    fn done(&self) -> bool {
        self.enqueued == self.words.len && self.pipe.is_empty()
    }
}

#[derive(Debug, Clone)]
struct Inflight {
    index: Option<usize>,
    unit: Unit,
    kind: Kind,
    beats: usize,
    executed: usize,
    slots: Vec<Slot>,
    write: Option<WriteStream>,
    lat: u64,
    start_after: u64,
    blockers: Vec<u64>,
    /// Consumers must wait for full completion instead of chaining.
    serial: bool,
    beat_flops: Vec<u64>,
    /// Memory bytes per beat, in access order.
    mem_beats: Vec<Vec<(u64, u8)>>,
    /// Elements accessed per beat (strided bandwidth).
    beat_elems: Vec<usize>,
    strided: bool,
    commits_left: usize,
    red_write_at: Option<u64>,
    eew: Eew,
    first_beat: Option<u64>,
}

impl Inflight {
    fn complete(&self) -> bool {
        self.executed == self.beats && self.write.as_ref().is_none_or(WriteStream::done) && self.commits_left == 0
    }
}

struct PendingScalarStore {
    id: u64,
    addr: u64,
    val: u8,
    commit_at: u64,
}

struct Engine<'a> {
    trace: &'a ProgramTrace,
    cfg: &'a TimingConfig,
    dispatcher: &'a DispatcherModel,
    opts: &'a SimOptions,
    now: u64,
    pc: usize,
    disp_ready: f64,
    next_id: u64,
    csr: CsrState,
    scratch: FlatMachineState,
    image: LaneImage,
    timed_mem: HashMap<u64, u8>,
    inflight: BTreeMap<u64, Inflight>,
    queues: [VecDeque<u64>; 4],
    busy_until: [u64; 4],
    last_writer: Vec<Option<u64>>,
    readers: Vec<Vec<u64>>,
    pending: PendingOps,
    scalar_stores: Vec<PendingScalarStore>,
    store_commits: Vec<(u64, u64, Vec<(u64, u8)>)>,
    cache: Option<CacheModel>,
    rng: Option<(ChaCha8Rng, u32)>,
    stats: CycleStats,
    timeline: Vec<InstrTiming>,
    arb_log: Vec<ArbRecord>,
    mem_events: Vec<MemEvent>,
    mem_event_of: HashMap<u64, usize>,
    loads_checked: u64,
    violations: Vec<Violation>,
    last_progress: u64,
}

fn unit_idx(u: Unit) -> usize {
    UNITS.iter().position(|x| *x == u).expect("known unit")
}

fn default_tags(state: &FlatMachineState) -> [EewTag; 32] {
    let mut tags = [EewTag::Uninit; 32];
    for (r, t) in tags.iter_mut().enumerate() {
        if state.vreg(r).iter().any(|b| *b != 0) {
            *t = EewTag::Encoded(Eew::E64);
        }
    }
    tags
}

fn emul(eew: Eew, csr: &CsrState) -> usize {
    (eew.bytes() * csr.vtype.lmul.factor() / csr.vtype.sew.bytes()).clamp(1, 8)
}

impl<'a> Engine<'a> {
    fn new(
        trace: &'a ProgramTrace,
        state: FlatMachineState,
        cfg: &'a TimingConfig,
        dispatcher: &'a DispatcherModel,
        opts: &'a SimOptions,
    ) -> Result<Self> {
        let tags = opts.initial_tags.unwrap_or_else(|| default_tags(&state));
        let regs: Vec<&[u8]> = (0..32).map(|r| state.vreg(r)).collect();
        let image = LaneImage::from_flat(cfg.layout, &regs, &tags)?;
        let words = (32 * cfg.layout.bytes_per_lane()).div_ceil(8);
        let cache = match dispatcher {
            DispatcherModel::ScalarCore(p) => Some(CacheModel::with_line_bits(u64::from(p.dcache_line_bits))?),
            DispatcherModel::Ideal => None,
        };
        let timed_mem = state.memory().into_iter().collect();
        Ok(Engine {
            trace,
            cfg,
            dispatcher,
            opts,
            now: 0,
            pc: 0,
            disp_ready: 0.0,
            next_id: 0,
            csr: CsrState::new(state.vlen())?,
            scratch: state,
            image,
            timed_mem,
            inflight: BTreeMap::new(),
            queues: Default::default(),
            busy_until: [0; 4],
            last_writer: vec![None; words],
            readers: vec![Vec::new(); words],
            pending: PendingOps::default(),
            scalar_stores: Vec::new(),
            store_commits: Vec::new(),
            cache,
            rng: opts.jitter.map(|(seed, max)| (ChaCha8Rng::seed_from_u64(seed), max)),
            stats: CycleStats {
                lanes: cfg.lanes(),
                conflicts: ConflictStats::new(cfg.banks.banks_per_lane),
                ..Default::default()
            },
            timeline: Vec::with_capacity(trace.len()),
            arb_log: Vec::new(),
            mem_events: Vec::new(),
            mem_event_of: HashMap::new(),
            loads_checked: 0,
            violations: Vec::new(),
            last_progress: 0,
        })
    }

    fn jitter(&mut self) -> u64 {
        match &mut self.rng {
            Some((rng, max)) if *max > 0 => u64::from(rng.gen_range(0..=*max)),
            _ => 0,
        }
    }

    fn finished(&self) -> bool {
        self.pc >= self.trace.len()
            && self.inflight.is_empty()
            && self.scalar_stores.is_empty()
            && self.store_commits.is_empty()
    }

    fn run(&mut self) -> Result<()> {
        while !self.finished() {
            let mut progress = self.commit();
            progress |= self.execute()?;
            progress |= self.retire();
            progress |= self.access_banks();
            progress |= self.dispatch()?;
            if progress {
                self.last_progress = self.now;
            } else if self.now - self.last_progress > self.opts.watchdog {
                return Err(Error::Deadlock(self.now));
            }
            self.now += 1;
        }
        self.stats.cycles = self.now;
        Ok(())
    }

    fn finish(self) -> SimOutcome {
        let mut state = self.scratch;
        let mut tags = [EewTag::Uninit; 32];
        for (r, t) in tags.iter_mut().enumerate() {
            let flat = self.image.read_flat(r);
            state.vreg_mut(r).copy_from_slice(&flat);
            *t = self.image.tag(r);
        }
        // timed memory is what the hardware actually holds
        let stale: Vec<(u64, u8)> = state.memory();
        for (a, _) in stale {
            state.write_byte(a, 0);
        }
        for (a, v) in &self.timed_mem {
            state.write_byte(*a, *v);
        }
        SimOutcome {
            stats: self.stats,
            state,
            tags,
            timeline: self.timeline,
            arb_log: self.arb_log,
            mem_events: self.mem_events,
            loads_checked: self.loads_checked,
            violations: self.violations,
        }
    }

    // ---- memory side ----

    fn commit(&mut self) -> bool {
        let now = self.now;
        let mut progress = false;
        let mut i = 0;
        while i < self.scalar_stores.len() {
            if self.scalar_stores[i].commit_at <= now {
                let s = self.scalar_stores.remove(i);
                self.timed_mem.insert(s.addr, s.val);
                self.pending.retire(s.id);
                self.close_event(s.id);
                progress = true;
            } else {
                i += 1;
            }
        }
        let mut i = 0;
        while i < self.store_commits.len() {
            if self.store_commits[i].0 <= now {
                let (_, id, bytes) = self.store_commits.remove(i);
                for (a, v) in bytes {
                    self.timed_mem.insert(a, v);
                }
                if let Some(f) = self.inflight.get_mut(&id) {
                    f.commits_left -= 1;
                }
                progress = true;
            } else {
                i += 1;
            }
        }
        progress
    }

    fn observe(&mut self, index: usize, addr: u64, expected: u8, observed: u8) {
        self.loads_checked += 1;
        if expected != observed {
            self.violations.push(Violation { instr_index: index, addr, expected, observed, cycle: self.now });
        }
    }

    fn close_event(&mut self, id: u64) {
        if let Some(e) = self.mem_event_of.remove(&id) {
            self.mem_events[e].completion = self.now;
        }
    }

    // ---- execution ----

    fn exec_candidate(&self, u: Unit) -> Option<u64> {
        self.queues[unit_idx(u)]
            .iter()
            .copied()
            .find(|id| self.inflight.get(id).is_some_and(|f| f.executed < f.beats))
    }

    fn execute(&mut self) -> Result<bool> {
        let mut progress = false;
        for u in UNITS {
            let ui = unit_idx(u);
            if self.busy_until[ui] > self.now {
                continue;
            }
            let Some(id) = self.exec_candidate(u) else { continue };
            let ready = {
                let f = &self.inflight[&id];
                self.now > f.start_after
                    && f.blockers.iter().all(|b| !self.inflight.contains_key(b))
                    && f.slots.iter().all(|s| s.fetched >= s.need(f.executed, f.beats))
                    && f.write.as_ref().is_none_or(|w| w.pipe.len() < f.lat as usize + 2)
            };
            if !ready {
                continue;
            }
            progress = true;
            let now = self.now;
            let jit = if u == Unit::Vlsu { self.jitter() } else { 0 };
            let f = self.inflight.get_mut(&id).expect("candidate exists");
            let beat = f.executed;
            f.executed += 1;
            f.first_beat.get_or_insert(now);
            match u {
                Unit::Vmfpu => self.stats.fpu_busy_cycles += 1,
                Unit::Valu => self.stats.valu_busy_cycles += 1,
                _ => {}
            }
            self.stats.flops += f.beat_flops.get(beat).copied().unwrap_or(0);
            let mut cost = 1u64;
            if matches!(f.kind, Kind::Load | Kind::Store) {
                let elems = f.beat_elems[beat];
                let bytes = f.mem_beats[beat].len();
                cost = if f.strided { elems as u64 } else { bytes.div_ceil(self.cfg.vlsu_bandwidth()) as u64 };
                cost = cost.max(1) + jit;
            }
            if f.kind == Kind::Store {
                let data = std::mem::take(&mut f.mem_beats[beat]);
                f.commits_left += 1;
                self.store_commits.push((now + 1, id, data));
            }
            let mut loads = Vec::new();
            if f.kind == Kind::Load {
                loads = std::mem::take(&mut f.mem_beats[beat]);
            }
            let index = f.index;
            let beats = f.beats;
            let lat = f.lat;
            if let Some(w) = f.write.as_mut() {
                if f.kind != Kind::Reduction {
                    let target = ((beat + 1) * w.words.len).div_ceil(beats).min(w.words.len);
                    while w.enqueued < target {
                        w.pipe.push_back((now + lat, w.enqueued));
                        w.enqueued += 1;
                    }
                }
            }
            if f.kind == Kind::Reduction && f.executed == f.beats {
                let alu = u64::from(self.cfg.alu_lat);
                let l = self.cfg.lanes();
                let steps = u64::from(l.trailing_zeros()) + 1;
                let step = u64::from(self.cfg.sldu_lat + self.cfg.alu_lat + self.cfg.reduction_step_overhead);
                let inter = steps * step;
                let simd = u64::from((64 / f.eew.bits()).trailing_zeros()) * alu;
                let intra_end = now + alu;
                let end = intra_end + inter + simd;
                f.red_write_at = Some(end);
                self.stats.reduction_intra += intra_end - f.first_beat.unwrap_or(now);
                self.stats.reduction_inter += inter;
                self.stats.reduction_simd += simd;
                self.busy_until[unit_idx(Unit::Sldu)] = self.busy_until[unit_idx(Unit::Sldu)].max(intra_end + inter);
                self.busy_until[ui] = end;
            } else {
                self.busy_until[ui] = self.busy_until[ui].max(now + cost);
            }
            if let Some(index) = index {
                for (a, expected) in loads {
                    let observed = self.timed_mem.get(&a).copied().unwrap_or(0);
                    self.observe(index, a, expected, observed);
                }
            }
        }
        // reductions that finished their tree hand the result to the write port
        for f in self.inflight.values_mut() {
            if let (Some(at), Some(w)) = (f.red_write_at, f.write.as_mut()) {
                if at <= self.now && w.enqueued == 0 {
                    w.pipe.push_back((at, 0));
                    w.enqueued = 1;
                    progress = true;
                }
            }
        }
        Ok(progress)
    }

    fn retire(&mut self) -> bool {
        let done: Vec<u64> = self.inflight.iter().filter(|(_, f)| f.complete()).map(|(id, _)| *id).collect();
        for id in &done {
            let f = self.inflight.remove(id).expect("listed");
            self.queues[unit_idx(f.unit)].retain(|x| x != id);
            self.pending.retire(*id);
            self.close_event(*id);
            if let Some(i) = f.index {
                self.timeline[i].complete = self.now;
                self.timeline[i].first_beat = f.first_beat;
            }
        }
        !done.is_empty()
    }

    // ---- VRF bank ports ----

    fn word_written(&self, writer: u64, w: usize) -> bool {
        match self.inflight.get(&writer) {
            None => true,
            Some(f) if f.serial => false,
            Some(f) => f.write.as_ref().is_none_or(|ws| ws.is_written(w)),
        }
    }

    fn word_read(&self, reader: u64, w: usize) -> bool {
        match self.inflight.get(&reader) {
            None => true,
            Some(f) => f.slots.iter().all(|s| !s.words.contains(w) || s.fetched > w - s.words.base),
        }
    }

    fn request_of(&self, word: usize, write: bool, requester: Requester, age: u64) -> AccessRequest {
        let bpl = self.cfg.layout.bytes_per_lane();
        let addr = word * 8;
        AccessRequest { lane: 0, register: addr / bpl, offset: addr % bpl, write, requester, age }
    }

    fn access_banks(&mut self) -> bool {
        // (request, instruction, slot index or None for the write port)
        let mut reqs: Vec<(AccessRequest, u64, Option<usize>)> = Vec::new();
        for u in UNITS {
            let queue = &self.queues[unit_idx(u)];
            let mut claimed: Vec<(Requester, usize)> = Vec::new();
            for id in queue.iter() {
                let f = &self.inflight[id];
                let started = self.now >= f.start_after && f.blockers.iter().all(|b| !self.inflight.contains_key(b));
                for (si, s) in f.slots.iter().enumerate() {
                    if s.fetched == s.words.len || claimed.contains(&(s.req, si)) {
                        continue;
                    }
                    claimed.push((s.req, si));
                    let next_beat = f.executed < f.beats && s.fetched < s.need(f.executed, f.beats);
                    let full = s.fetched - s.consumed(f.executed, f.beats) >= self.cfg.operand_queue_depth;
                    if !started || (full && !next_beat) {
                        continue;
                    }
                    let w = s.words.base + s.fetched;
                    if let Some(Some(dep)) = s.deps.get(s.fetched) {
                        if !self.word_written(*dep, w) {
                            continue;
                        }
                    }
                    reqs.push((self.request_of(w, false, s.req, *id), *id, Some(si)));
                }
            }
            // one write port per unit, oldest pending result first
            for id in queue.iter() {
                let f = &self.inflight[id];
                let Some(ws) = f.write.as_ref() else { continue };
                let Some(&(ready, pos)) = ws.pipe.front() else { continue };
                if ready <= self.now {
                    let w = ws.words.base + pos;
                    let waw_ok = ws.waw[pos].is_none_or(|d| self.word_written(d, w));
                    let war_ok = ws.war[pos].iter().all(|r| self.word_read(*r, w));
                    if waw_ok && war_ok {
                        reqs.push((self.request_of(w, true, ws.req, *id), *id, None));
                    }
                }
                break;
            }
        }
        if reqs.is_empty() {
            return false;
        }
        let plain: Vec<AccessRequest> = reqs.iter().map(|r| r.0).collect();
        let (granted, stalled) = arbitrate(&plain, &self.cfg.banks, &self.cfg.layout, &mut self.stats.conflicts);
        if self.opts.record_arbitration {
            for (list, ok) in [(&granted, true), (&stalled, false)] {
                for r in list {
                    let bank = r.bank(&self.cfg.banks, &self.cfg.layout);
                    self.arb_log.push(ArbRecord { cycle: self.now, bank, request: *r, granted: ok });
                }
            }
        }
        for g in &granted {
            let (_, id, slot) = *reqs.iter().find(|(r, _, _)| r == g).expect("granted request was issued");
            let f = self.inflight.get_mut(&id).expect("requester in flight");
            match slot {
                Some(si) => f.slots[si].fetched += 1,
                None => {
                    let ws = f.write.as_mut().expect("write port");
                    let (_, pos) = ws.pipe.pop_front().expect("pending write");
                    ws.written[pos] = true;
                }
            }
        }
        !granted.is_empty()
    }

    // ---- dispatch ----

    fn slot_cost(&self, vector: bool) -> f64 {
        match self.dispatcher {
            DispatcherModel::Ideal => 1.0,
            DispatcherModel::ScalarCore(p) => 1.0 + if vector { p.base_gap } else { 0.0 },
        }
    }

    fn advance_dispatch(&mut self, cost: f64) {
        let now = self.now as f64;
        if self.disp_ready < now {
            self.disp_ready = now;
        }
        self.disp_ready += cost;
        self.stats.dispatched += 1;
        self.pc += 1;
    }

    fn coherency_blocked(&mut self, kind: MemKind) -> bool {
        if !self.opts.enforce_coherency {
            return false;
        }
        match blocking_rule(kind, &self.pending) {
            Some(rule) => {
                self.stats.coherency_stalls[rule_index(rule)] += 1;
                true
            }
            None => false,
        }
    }

    fn push_timeline(&mut self, index: usize, complete: bool) {
        debug_assert_eq!(self.timeline.len(), index);
        let now = self.now;
        self.timeline.push(InstrTiming { index, dispatch: now, first_beat: None, complete: if complete { now } else { 0 } });
    }

    fn dispatch(&mut self) -> Result<bool> {
        if self.pc >= self.trace.len() || (self.now as f64) < self.disp_ready {
            return Ok(false);
        }
        let index = self.pc;
        let line = self.trace.lines[index].line;
        let instr = self.trace.lines[index].instr;
        let wrap = |e: Error| match e {
            Error::Illegal(msg) | Error::Layout(msg) => Error::Decode { line, msg },
            other => other,
        };
        match instr {
            VectorInstr::Config { .. } => {
                exec_flat(&instr, &mut self.scratch, &mut self.csr).map_err(wrap)?;
                self.push_timeline(index, true);
                let c = self.slot_cost(true);
                self.advance_dispatch(c);
            }
            VectorInstr::ScalarOp | VectorInstr::Fence => {
                self.push_timeline(index, true);
                let c = self.slot_cost(false);
                self.advance_dispatch(c);
            }
            VectorInstr::Barrier => {
                if !self.inflight.is_empty() || !self.scalar_stores.is_empty() || !self.store_commits.is_empty() {
                    self.stats.dispatcher_stall_cycles += 1;
                    return Ok(false);
                }
                self.push_timeline(index, true);
                let c = self.slot_cost(false);
                self.advance_dispatch(c);
            }
            VectorInstr::ScalarLoad { addr } => {
                if self.coherency_blocked(MemKind::ScalarLoad) {
                    return Ok(false);
                }
                let expected = self.scratch.read_byte(addr);
                let forwarded = self.scalar_stores.iter().rev().find(|s| s.addr == addr).map(|s| s.val);
                let observed = forwarded.unwrap_or_else(|| self.timed_mem.get(&addr).copied().unwrap_or(0));
                self.observe(index, addr, expected, observed);
                exec_flat(&instr, &mut self.scratch, &mut self.csr).map_err(wrap)?;
                let mut cost = self.slot_cost(false);
                if let (Some(cache), DispatcherModel::ScalarCore(p)) = (self.cache.as_mut(), self.dispatcher) {
                    if !cache.access(addr) {
                        cost += p.miss_penalty();
                    }
                }
                self.mem_events.push(MemEvent { kind: MemKind::ScalarLoad, range: addr..addr + 1, issue: self.now, completion: self.now });
                self.push_timeline(index, true);
                self.advance_dispatch(cost);
            }
            VectorInstr::ScalarStore { addr, val } => {
                if self.coherency_blocked(MemKind::ScalarStore) {
                    return Ok(false);
                }
                exec_flat(&instr, &mut self.scratch, &mut self.csr).map_err(wrap)?;
                let id = self.alloc_id();
                // the store buffer drains in order
                let earliest = self.scalar_stores.last().map_or(0, |s| s.commit_at);
                let commit_at = (self.now + u64::from(self.cfg.scalar_store_latency) + self.jitter()).max(earliest);
                self.scalar_stores.push(PendingScalarStore { id, addr, val, commit_at });
                self.pending.scalar_stores.push((id, addr));
                self.open_event(id, MemKind::ScalarStore, addr..addr + 1);
                self.push_timeline(index, true);
                let c = self.slot_cost(false);
                self.advance_dispatch(c);
            }
            _ => return self.dispatch_vector(index, instr).map_err(wrap),
        }
        Ok(true)
    }

    fn alloc_id(&mut self) -> u64 {
        self.next_id += 1;
        self.next_id
    }

    fn open_event(&mut self, id: u64, kind: MemKind, range: std::ops::Range<u64>) {
        self.mem_event_of.insert(id, self.mem_events.len());
        self.mem_events.push(MemEvent { kind, range, issue: self.now, completion: self.now });
    }

    fn unit_of(instr: &VectorInstr) -> Unit {
        match instr {
            VectorInstr::Arith { op, .. } if op.uses_multiplier() => Unit::Vmfpu,
            VectorInstr::Widening { op: WideOp::Mul, .. } => Unit::Vmfpu,
            VectorInstr::Slide { .. } => Unit::Sldu,
            VectorInstr::Load { .. } | VectorInstr::Store { .. } => Unit::Vlsu,
            _ => Unit::Valu,
        }
    }

    /// Register groups read or written by `instr`, as `(base, count)`.
    fn footprint(instr: &VectorInstr, csr: &CsrState) -> Vec<(usize, usize)> {
        let m = csr.vtype.lmul.factor();
        let sew = csr.vtype.sew;
        let wide = emul(sew.double().unwrap_or(Eew::E64), csr);
        let v = |r: &VReg, n: usize| (r.idx(), n.min(32 - r.idx()));
        let src = |s: &Src, n: usize| match s {
            Src::V(r) => Some(v(r, n)),
            _ => None,
        };
        let mut out: Vec<(usize, usize)> = match instr {
            VectorInstr::Arith { vd, src: s, vs2, .. } => {
                let mut g = vec![v(vd, m)];
                g.extend(src(s, m));
                g.extend(vs2.map(|r| v(&r, m)));
                g
            }
            VectorInstr::Widening { vd, src: s, vs2, wide_vs2, .. } => {
                let mut g = vec![v(vd, wide), v(vs2, if *wide_vs2 { wide } else { m })];
                g.extend(src(s, m));
                g
            }
            VectorInstr::Narrowing { vd, src: s, vs2, .. } => {
                let mut g = vec![v(vd, m), v(vs2, wide)];
                g.extend(src(s, m));
                g
            }
            VectorInstr::MaskGen { vd, src: s, vs2, .. } => {
                let mut g = vec![v(vd, 1), v(vs2, m)];
                g.extend(src(s, m));
                g
            }
            VectorInstr::Slide { vd, vs2, .. } => vec![v(vd, m), v(vs2, m)],
            VectorInstr::Reduction { vd, vs2, vs1, .. } => vec![v(vd, 1), v(vs2, m), v(vs1, 1)],
            VectorInstr::Load { eew, vd, .. } => vec![v(vd, emul(*eew, csr))],
            VectorInstr::Store { eew, vs3, .. } => vec![v(vs3, emul(*eew, csr))],
            _ => Vec::new(),
        };
        if instr.is_masked() {
            out.push((0, 1));
        }
        out
    }

    fn stream(&self, reg: VReg, eew: Eew, elems: usize) -> Stream {
        let bpl = self.cfg.layout.bytes_per_lane();
        let lanes = self.cfg.lanes();
        let start = reg.idx() * bpl;
        let lb = (elems * eew.bytes()).div_ceil(lanes).min((32 - reg.idx()) * bpl);
        if lb == 0 {
            return Stream { base: start / 8, len: 0 };
        }
        Stream { base: start / 8, len: (start + lb - 1) / 8 - start / 8 + 1 }
    }

    /// Beat of element `e` within a stream of `eew` elements starting at `reg`.
    fn beat_of(&self, reg: VReg, eew: Eew, e: usize, beats: usize) -> usize {
        let bpl = self.cfg.layout.bytes_per_lane();
        let skew = (reg.idx() * bpl) % 8;
        ((skew + (e / self.cfg.lanes()) * eew.bytes()) / 8).min(beats.saturating_sub(1))
    }

    fn dispatch_vector(&mut self, index: usize, instr: VectorInstr) -> Result<bool> {
        let unit = Self::unit_of(&instr);
        if self.queues[unit_idx(unit)].len() >= self.cfg.unit_queue_depth {
            self.stats.dispatcher_stall_cycles += 1;
            return Ok(false);
        }
        let mem_kind = match instr {
            VectorInstr::Load { .. } => Some(MemKind::VectorLoad),
            VectorInstr::Store { .. } => Some(MemKind::VectorStore),
            _ => None,
        };
        if let Some(k) = mem_kind {
            if self.coherency_blocked(k) {
                return Ok(false);
            }
        }

        // functional step on registers read back from the lane image
        for (base, n) in Self::footprint(&instr, &self.csr) {
            for r in base..base + n {
                let flat = self.image.read_flat(r);
                self.scratch.vreg_mut(r).copy_from_slice(&flat);
            }
        }
        let vl = self.csr.vl;
        let mut active: Vec<bool> = vec![true; vl];
        if instr.is_masked() {
            let bits = self.image.mask_bits(vl)?;
            for (i, b) in bits.iter().enumerate() {
                if *b != self.scratch.mask_bit(i) {
                    return Err(Error::Divergence(format!("mask bit {i} differs between encodings")));
                }
            }
            active = bits;
        }
        let effect = exec_flat(&instr, &mut self.scratch, &mut self.csr)?;

        let serial = matches!(instr, VectorInstr::Narrowing { vd, vs2, .. } if vd == vs2);
        let mut blockers = Vec::new();
        if serial {
            self.stats.narrow_same_reg += 1;
            blockers.extend(self.inflight.keys().copied());
        }
        let vlenb = self.cfg.layout.vlenb();
        if let Some(d) = &effect.dest {
            for k in 0..d.regs {
                if !d.any_in_register(k) {
                    continue;
                }
                let r = d.base.idx() + k;
                let vr = VReg::new(r as u32)?;
                let full = d.covers_register(k);
                if let Some(op) = plan_reshuffle(vr, self.image.tag(r), d.eew, full) {
                    self.image.reshuffle(&op)?;
                    self.stats.reshuffles += 1;
                    blockers.push(self.issue_reshuffle(vr));
                }
                self.image.write_partial(r, d.eew, self.scratch.vreg(r), &d.written[k * vlenb..(k + 1) * vlenb]);
            }
        }

        // timing record
        let sew = self.csr.vtype.sew;
        let id = self.alloc_id();
        let mut reads: Vec<(Requester, Stream)> = Vec::new();
        let mut dest: Option<(Stream, Eew)> = None;
        let mut kind = Kind::Elementwise;
        let mut beats_from_reads = false;
        let mut lat = match unit {
            Unit::Vmfpu => self.cfg.fpu_lat,
            Unit::Valu => self.cfg.alu_lat,
            Unit::Sldu => self.cfg.sldu_lat,
            Unit::Vlsu => self.cfg.memory_latency,
        };
        let mut flops_per_elem = 0;
        let mut mem_eew = sew;
        let mut strided = false;
        let vreq = |n: usize, u: Unit| match u {
            Unit::Vmfpu => [Requester::VmfpuOpA, Requester::VmfpuOpB, Requester::VmfpuOpC][n.min(2)],
            Unit::Valu => Requester::Valu,
            Unit::Sldu => Requester::Sldu,
            Unit::Vlsu => Requester::Vlsu,
        };
        match instr {
            VectorInstr::Arith { op, vd, src, vs2, .. } => {
                let mut srcs = Vec::new();
                if let Src::V(r) = src {
                    srcs.push(r);
                }
                srcs.extend(vs2);
                if op.accumulates() {
                    srcs.push(vd);
                }
                for (n, r) in srcs.into_iter().enumerate() {
                    reads.push((vreq(n, unit), self.stream(r, sew, vl)));
                }
                dest = Some((self.stream(vd, sew, vl), sew));
                if op.is_float() {
                    flops_per_elem = op.flops_per_element();
                }
                debug_assert!(op != ArithOp::Mv || vs2.is_none());
            }
            VectorInstr::Widening { vd, src, vs2, wide_vs2, .. } => {
                let w = sew.double().unwrap_or(Eew::E64);
                let mut n = 0;
                if let Src::V(r) = src {
                    reads.push((vreq(n, unit), self.stream(r, sew, vl)));
                    n += 1;
                }
                reads.push((vreq(n, unit), self.stream(vs2, if wide_vs2 { w } else { sew }, vl)));
                dest = Some((self.stream(vd, w, vl), w));
            }
            VectorInstr::Narrowing { vd, src, vs2, .. } => {
                let w = sew.double().unwrap_or(Eew::E64);
                reads.push((Requester::Valu, self.stream(vs2, w, vl)));
                if let Src::V(r) = src {
                    reads.push((Requester::Valu, self.stream(r, sew, vl)));
                }
                dest = Some((self.stream(vd, sew, vl), sew));
            }
            VectorInstr::MaskGen { vd, src, vs2, .. } => {
                reads.push((Requester::Valu, self.stream(vs2, sew, vl)));
                if let Src::V(r) = src {
                    reads.push((Requester::Valu, self.stream(r, sew, vl)));
                }
                dest = Some((self.stream(vd, Eew::E8, vl.div_ceil(8)), Eew::E8));
                beats_from_reads = true;
            }
            VectorInstr::Slide { dir, vd, vs2, offset, .. } => {
                let span = match dir {
                    SlideDir::Up => vl,
                    SlideDir::Down => (vl + offset).min(self.csr.vlmax()),
                };
                reads.push((Requester::Sldu, self.stream(vs2, sew, span)));
                dest = Some((self.stream(vd, sew, vl), sew));
            }
            VectorInstr::Reduction { vd, vs2, vs1, .. } => {
                kind = Kind::Reduction;
                reads.push((Requester::Valu, self.stream(vs2, sew, vl)));
                reads.push((Requester::Valu, self.stream(vs1, sew, vl.min(1))));
                dest = Some((self.stream(vd, sew, vl.min(1)), sew));
                beats_from_reads = true;
                lat = self.cfg.alu_lat;
            }
            VectorInstr::Load { eew, vd, stride, .. } => {
                kind = Kind::Load;
                mem_eew = eew;
                strided = stride.is_some_and(|s| s != eew.bytes() as i64);
                dest = Some((self.stream(vd, eew, vl), eew));
            }
            VectorInstr::Store { eew, vs3, stride, .. } => {
                kind = Kind::Store;
                mem_eew = eew;
                strided = stride.is_some_and(|s| s != eew.bytes() as i64);
                reads.push((Requester::Vlsu, self.stream(vs3, eew, vl)));
                lat = 1;
            }
            _ => unreachable!("scalar entries are handled by the dispatcher"),
        }
        if instr.is_masked() {
            reads.push((Requester::Masku, self.stream(VReg::V0, Eew::E8, vl.div_ceil(8))));
        }
        let beats = if beats_from_reads || dest.is_none() {
            reads.first().map_or(0, |(_, s)| s.len)
        } else {
            dest.as_ref().map_or(0, |(s, _)| s.len)
        };

        let mut beat_flops = Vec::new();
        let mut beat_elems = Vec::new();
        let mut mem_beats = Vec::new();
        if beats > 0 {
            let main_reg = match instr {
                VectorInstr::Load { vd, .. } => vd,
                VectorInstr::Store { vs3, .. } => vs3,
                VectorInstr::Arith { vd, .. } => vd,
                _ => VReg::V0,
            };
            if flops_per_elem > 0 {
                beat_flops = vec![0; beats];
                for e in (0..vl).filter(|e| active[*e]) {
                    beat_flops[self.beat_of(main_reg, sew, e, beats)] += flops_per_elem;
                }
            }
            if matches!(kind, Kind::Load | Kind::Store) {
                beat_elems = vec![0; beats];
                mem_beats = vec![Vec::new(); beats];
                let bytes = if kind == Kind::Load { &effect.loads } else { &effect.stores };
                let eb = mem_eew.bytes();
                for (n, e) in (0..vl).filter(|e| active[*e]).enumerate() {
                    let b = self.beat_of(main_reg, mem_eew, e, beats);
                    beat_elems[b] += 1;
                    mem_beats[b].extend_from_slice(&bytes[n * eb..(n + 1) * eb]);
                }
                let lo = bytes.iter().map(|(a, _)| *a).min().unwrap_or(0);
                let hi = bytes.iter().map(|(a, _)| *a + 1).max().unwrap_or(0);
                if kind == Kind::Load {
                    self.pending.vector_loads.push((id, lo..hi));
                    self.open_event(id, MemKind::VectorLoad, lo..hi);
                } else {
                    self.pending.vector_stores.push((id, lo..hi));
                    self.open_event(id, MemKind::VectorStore, lo..hi);
                    if let Some(cache) = self.cache.as_mut() {
                        self.stats.cache_invalidations += on_vector_store(lo..hi, cache).len() as u64;
                    }
                }
            }
        }

        let slots: Vec<Slot> = reads
            .into_iter()
            .filter(|(_, s)| s.len > 0)
            .map(|(req, words)| Slot { req, words, fetched: 0, deps: Vec::new() })
            .collect();
        let write = dest.filter(|(s, _)| s.len > 0 && beats > 0).map(|(words, _)| WriteStream {
            req: match unit {
                Unit::Vmfpu => Requester::VmfpuResult,
                Unit::Valu => Requester::Valu,
                Unit::Sldu => Requester::Sldu,
                Unit::Vlsu => Requester::Vlsu,
            },
            words,
            written: vec![false; words.len],
            enqueued: 0,
            pipe: VecDeque::new(),
            waw: Vec::new(),
            war: Vec::new(),
        });
        let f = Inflight {
            index: Some(index),
            unit,
            kind,
            beats,
            executed: 0,
            slots,
            write,
            lat: u64::from(lat),
            start_after: self.now + u64::from(self.cfg.startup_latency),
            blockers,
            serial,
            beat_flops,
            mem_beats,
            beat_elems,
            strided,
            commits_left: 0,
            red_write_at: None,
            eew: sew,
            first_beat: None,
        };
        self.insert(id, f);
        self.push_timeline(index, false);
        let c = self.slot_cost(true);
        self.advance_dispatch(c);
        Ok(true)
    }

    /// Queues an SLDU pass that re-encodes the whole of `reg`.
    fn issue_reshuffle(&mut self, reg: VReg) -> u64 {
        let id = self.alloc_id();
        let bpl = self.cfg.layout.bytes_per_lane();
        let start = reg.idx() * bpl;
        let words = Stream { base: start / 8, len: (start + bpl - 1) / 8 - start / 8 + 1 };
        let f = Inflight {
            index: None,
            unit: Unit::Sldu,
            kind: Kind::Reshuffle,
            beats: words.len,
            executed: 0,
            slots: vec![Slot { req: Requester::Sldu, words, fetched: 0, deps: Vec::new() }],
            write: Some(WriteStream {
                req: Requester::Sldu,
                words,
                written: vec![false; words.len],
                enqueued: 0,
                pipe: VecDeque::new(),
                waw: Vec::new(),
                war: Vec::new(),
            }),
            lat: u64::from(self.cfg.sldu_lat),
            start_after: self.now,
            blockers: Vec::new(),
            serial: false,
            beat_flops: Vec::new(),
            mem_beats: Vec::new(),
            beat_elems: Vec::new(),
            strided: false,
            commits_left: 0,
            red_write_at: None,
            eew: Eew::E8,
            first_beat: None,
        };
        self.insert(id, f);
        id
    }

    /// Records operand hazards against earlier instructions and enqueues `f`.
    fn insert(&mut self, id: u64, mut f: Inflight) {
        for s in f.slots.iter_mut() {
            s.deps = (0..s.words.len)
                .map(|p| {
                    let w = s.words.base + p;
                    self.readers[w].push(id);
                    self.last_writer[w].filter(|d| *d != id)
                })
                .collect();
        }
        if let Some(ws) = f.write.as_mut() {
            ws.waw = (0..ws.words.len).map(|p| self.last_writer[ws.words.base + p]).collect();
            ws.war = (0..ws.words.len)
                .map(|p| {
                    let w = ws.words.base + p;
                    let rs: Vec<u64> = self.readers[w].drain(..).filter(|r| *r != id).collect();
                    self.last_writer[w] = Some(id);
                    rs
                })
                .collect();
        }
        self.queues[unit_idx(f.unit)].push_back(id);
        self.inflight.insert(id, f);
    }
}
