use crate::banks::ConflictStats;
use crate::coherency::Rule;

/// Counters collected by one timed run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CycleStats {
    pub cycles: u64,
    pub lanes: usize,
    pub flops: u64,
    pub dispatched: u64,
    /// Cycles in which the multiplier unit executed a beat.
    pub fpu_busy_cycles: u64,
    pub valu_busy_cycles: u64,
    pub conflicts: ConflictStats,
    pub reshuffles: u64,
    /// Narrowing instructions that overwrote their own wide source.
    pub narrow_same_reg: u64,
    pub reduction_intra: u64,
    pub reduction_inter: u64,
    pub reduction_simd: u64,
    /// Dispatch stalls per ordering rule, in [`Rule`] order.
    pub coherency_stalls: [u64; 3],
    pub cache_invalidations: u64,
    pub dispatcher_stall_cycles: u64,
}

impl CycleStats {
    pub fn bank_conflict_stalls(&self) -> u64 {
        self.conflicts.total_stalls
    }

    pub fn flop_per_cycle(&self) -> f64 {
        if self.cycles == 0 {
            0.0
        } else {
            self.flops as f64 / self.cycles as f64
        }
    }

    /// Fraction of the 2 flop/cycle/lane FMA peak actually achieved.
    pub fn utilization(&self) -> f64 {
        if self.lanes == 0 {
            return 0.0;
        }
        self.flop_per_cycle() / (2.0 * self.lanes as f64)
    }

    pub fn coherency_stalls_for(&self, rule: Rule) -> u64 {
        self.coherency_stalls[rule_index(rule)]
    }
}

pub(crate) fn rule_index(rule: Rule) -> usize {
    match rule {
        Rule::ScalarLoadAfterVectorStore => 0,
        Rule::ScalarStoreAfterVectorAccess => 1,
        Rule::VectorAfterScalarStore => 2,
    }
}

/// Per-instruction milestones, in cycles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InstrTiming {
    pub index: usize,
    pub dispatch: u64,
    pub first_beat: Option<u64>,
    pub complete: u64,
}
