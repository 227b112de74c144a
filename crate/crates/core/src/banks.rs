//! Banked per-lane VRF storage: address map, single-port arbitration and the
//! crossbar area model.

use std::collections::HashSet;

use crate::layout::LayoutConfig;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BankConfig {
    pub banks_per_lane: usize,
    pub bank_word_bytes: usize,
    /// Masters attached to each lane's crossbar (area model only).
    pub masters_per_lane: usize,
}

impl Default for BankConfig {
    fn default() -> Self {
        BankConfig { banks_per_lane: 8, bank_word_bytes: 8, masters_per_lane: 5 }
    }
}

impl BankConfig {
    pub fn validate(&self) -> Result<()> {
        if self.banks_per_lane == 0 || !self.banks_per_lane.is_power_of_two() {
            return Err(Error::Config(format!("banks_per_lane {} must be a power of two", self.banks_per_lane)));
        }
        if self.bank_word_bytes != 8 {
            return Err(Error::Config("bank words are 8 bytes wide".into()));
        }
        if self.masters_per_lane == 0 {
            return Err(Error::Config("masters_per_lane must be at least 1".into()));
        }
        Ok(())
    }
}

/// Bank holding byte `offset` of `register`'s slice in any lane.
///
/// Registers sit back to back in each lane's local address space, with no
/// per-register skew.
pub fn bank_of(register: usize, offset: usize, cfg: &BankConfig, layout: &LayoutConfig) -> Result<usize> {
    let bpl = layout.bytes_per_lane();
    if offset >= bpl {
        return Err(Error::Layout(format!("offset {offset} outside the {bpl}-byte lane slice")));
    }
    if register >= 32 {
        return Err(Error::Layout(format!("register {register} out of range")));
    }
    Ok(bank_of_addr(register * bpl + offset, cfg))
}

#[inline]
pub fn bank_of_addr(lane_addr: usize, cfg: &BankConfig) -> usize {
    (lane_addr / cfg.bank_word_bytes) % cfg.banks_per_lane
}

/// VRF masters, highest arbitration priority first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Requester {
    VmfpuOpA,
    VmfpuOpB,
    VmfpuOpC,
    VmfpuResult,
    Valu,
    Sldu,
    Masku,
    Vlsu,
}

impl Requester {
    pub const ALL: [Requester; 8] = [
        Requester::VmfpuOpA,
        Requester::VmfpuOpB,
        Requester::VmfpuOpC,
        Requester::VmfpuResult,
        Requester::Valu,
        Requester::Sldu,
        Requester::Masku,
        Requester::Vlsu,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Requester::VmfpuOpA => "vmfpu-a",
            Requester::VmfpuOpB => "vmfpu-b",
            Requester::VmfpuOpC => "vmfpu-c",
            Requester::VmfpuResult => "vmfpu-wb",
            Requester::Valu => "valu",
            Requester::Sldu => "sldu",
            Requester::Masku => "masku",
            Requester::Vlsu => "vlsu",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AccessRequest {
    pub lane: usize,
    pub register: usize,
    /// Byte offset within the register's lane slice.
    pub offset: usize,
    pub write: bool,
    pub requester: Requester,
    /// Creation order; older requests win ties within a requester.
    pub age: u64,
}

impl AccessRequest {
    pub fn bank(&self, cfg: &BankConfig, layout: &LayoutConfig) -> usize {
        bank_of_addr(self.register * layout.bytes_per_lane() + self.offset, cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ConflictStats {
    pub grants_per_bank: Vec<u64>,
    pub stalls_per_bank: Vec<u64>,
    pub stalls_per_requester: [u64; 8],
    pub total_stalls: u64,
}

impl ConflictStats {
    pub fn new(banks: usize) -> Self {
        ConflictStats { grants_per_bank: vec![0; banks], stalls_per_bank: vec![0; banks], ..Default::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ArbRecord {
    pub cycle: u64,
    pub bank: usize,
    pub request: AccessRequest,
    pub granted: bool,
}

/// Resolves one cycle of requests: at most one grant per `(lane, bank)`,
/// chosen by requester priority, then age.
pub fn arbitrate(
    requests: &[AccessRequest],
    cfg: &BankConfig,
    layout: &LayoutConfig,
    stats: &mut ConflictStats,
) -> (Vec<AccessRequest>, Vec<AccessRequest>) {
    let mut order: Vec<(usize, usize, &AccessRequest)> =
        requests.iter().map(|r| (r.lane, r.bank(cfg, layout), r)).collect();
    order.sort_by_key(|(lane, bank, r)| (*lane, *bank, r.requester, r.age));
    let mut busy: HashSet<(usize, usize)> = HashSet::new();
    let mut granted = Vec::new();
    let mut stalled = Vec::new();
    if stats.grants_per_bank.len() < cfg.banks_per_lane {
        *stats = ConflictStats::new(cfg.banks_per_lane);
    }
    for (lane, bank, r) in order {
        if busy.insert((lane, bank)) {
            stats.grants_per_bank[bank] += 1;
            granted.push(*r);
        } else {
            stats.stalls_per_bank[bank] += 1;
            stats.stalls_per_requester[r.requester as usize] += 1;
            stats.total_stalls += 1;
            stalled.push(*r);
        }
    }
    (granted, stalled)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XbarTopology {
    /// One crossbar per lane, local to the lane's banks.
    Split,
    /// Every master of every lane reaches every bank.
    Mono,
}

/// Relative crossbar area in master-bank connection units.
pub fn xbar_area(masters_per_lane: u64, lanes: u64, topology: XbarTopology) -> u64 {
    let banks = 8;
    match topology {
        XbarTopology::Split => masters_per_lane * banks * lanes,
        XbarTopology::Mono => masters_per_lane * banks * lanes * lanes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn layout(l: usize) -> LayoutConfig {
        LayoutConfig::new(l, 4096).unwrap()
    }

    fn req(lane: usize, register: usize, offset: usize, requester: Requester, age: u64) -> AccessRequest {
        AccessRequest { lane, register, offset, write: false, requester, age }
    }

    #[test]
    fn bank_examples() {
        let b = BankConfig::default();
        assert_eq!(bank_of(0, 0, &b, &layout(16)).unwrap(), 0);
        assert_eq!(bank_of(1, 0, &b, &layout(16)).unwrap(), 4);
        assert!(bank_of(0, 32, &b, &layout(16)).is_err());
        // vl = 16 elements of e64 on 16 lanes: one word per lane, always bank 0
        for elem in 0..16 {
            let m = crate::layout::map_byte(elem, 0, crate::rvv::Eew::E64, &layout(16)).unwrap();
            assert_eq!(bank_of(0, m.offset, &b, &layout(16)).unwrap(), 0);
        }
    }

    #[test]
    fn long_vectors_cover_all_banks() {
        let b = BankConfig::default();
        for l in [1, 2, 4, 8, 16] {
            let lay = layout(l);
            let words = lay.bytes_per_lane() / 8;
            let vl = l * b.banks_per_lane.min(words);
            for reg in 0..32 {
                let mut banks = HashSet::new();
                for elem in (0..vl).filter(|e| e % l == 0) {
                    let m = crate::layout::map_byte(elem, 0, crate::rvv::Eew::E64, &lay).unwrap();
                    banks.insert(bank_of(reg, m.offset, &b, &lay).unwrap());
                }
                assert_eq!(banks.len(), b.banks_per_lane.min(words), "l={l} reg={reg}");
            }
        }
    }

    #[test]
    fn arbitration_examples() {
        let b = BankConfig::default();
        let lay = layout(16);
        let mut st = ConflictStats::new(8);
        let (g, s) = arbitrate(&[req(0, 0, 0, Requester::Valu, 0), req(0, 1, 0, Requester::Valu, 1)], &b, &lay, &mut st);
        assert_eq!((g.len(), s.len()), (2, 0));

        let mut w = req(0, 2, 0, Requester::Vlsu, 0);
        w.write = true;
        let r = req(0, 0, 0, Requester::VmfpuOpA, 5);
        let (g, s) = arbitrate(&[w, r], &b, &lay, &mut st);
        assert_eq!(g, vec![r]);
        assert_eq!(s, vec![w]);
        assert_eq!(st.stalls_per_requester[Requester::Vlsu as usize], 1);

        // three FMA operands in bank 0 drain over three cycles
        let mut pending = vec![
            req(0, 0, 0, Requester::VmfpuOpA, 0),
            req(0, 2, 0, Requester::VmfpuOpB, 0),
            req(0, 4, 0, Requester::VmfpuOpC, 0),
        ];
        let mut cycles = 0;
        while !pending.is_empty() {
            let (g, s) = arbitrate(&pending, &b, &lay, &mut st);
            assert_eq!(g.len(), 1);
            pending = s;
            cycles += 1;
        }
        assert_eq!(cycles, 3);
    }

    #[test]
    fn xbar_examples() {
        assert_eq!(xbar_area(5, 4, XbarTopology::Split), 160);
        assert_eq!(xbar_area(5, 4, XbarTopology::Mono), 640);
        assert_eq!(xbar_area(5, 16, XbarTopology::Split), 640);
        assert_eq!(xbar_area(5, 16, XbarTopology::Mono), 10240);
    }

    proptest! {
        #[test]
        fn arbitration_invariants(reqs in proptest::collection::vec((0usize..4, 0usize..32, 0usize..32, 0usize..8), 0..40)) {
            let b = BankConfig::default();
            let lay = layout(16);
            let reqs: Vec<AccessRequest> = reqs
                .iter()
                .enumerate()
                .map(|(i, (lane, reg, off, who))| req(*lane, *reg, *off, Requester::ALL[*who], i as u64))
                .collect();
            let mut st = ConflictStats::new(8);
            let (g, s) = arbitrate(&reqs, &b, &lay, &mut st);
            prop_assert_eq!(g.len() + s.len(), reqs.len());
            let mut seen = HashSet::new();
            for r in &g {
                prop_assert!(seen.insert((r.lane, r.bank(&b, &lay))));
            }
            // work conservation: every stalled request's bank was granted to someone
            for r in &s {
                prop_assert!(seen.contains(&(r.lane, r.bank(&b, &lay))));
            }
            // a fixed request set drains in at most max-per-bank cycles
            let mut pending = reqs.clone();
            let mut rounds = 0;
            while !pending.is_empty() {
                pending = arbitrate(&pending, &b, &lay, &mut st).1;
                rounds += 1;
            }
            let mut per_bank = std::collections::HashMap::new();
            for r in &reqs {
                *per_bank.entry((r.lane, r.bank(&b, &lay))).or_insert(0) += 1;
            }
            prop_assert_eq!(rounds, per_bank.values().copied().max().unwrap_or(0));
        }

        #[test]
        fn mono_over_split_is_lane_count(m in 1u64..64, l in 1u64..64) {
            let split = xbar_area(m, l, XbarTopology::Split);
            let mono = xbar_area(m, l, XbarTopology::Mono);
            prop_assert_eq!(mono, split * l);
        }
    }
}
