//! Closed-form performance models.

use super::config::{DispatcherModel, TimingConfig};
use crate::rvv::Eew;

/// Phase breakdown of an integer sum reduction over `vl_bytes` bytes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReductionTiming {
    pub intra: u64,
    pub inter: u64,
    pub simd: u64,
    pub total: u64,
    /// Lower bound: one word per lane per cycle, then one step per tree level.
    pub ideal: u64,
}

fn log2(x: usize) -> u64 {
    u64::from(x.max(1).trailing_zeros())
}

/// Ideal cycle count for reducing `vl_bytes` bytes on `lanes` lanes.
pub fn ideal_reduction_cycles(vl_bytes: usize, lanes: usize) -> u64 {
    vl_bytes.div_ceil(8 * lanes) as u64 + 1 + log2(lanes)
}

/// Analytic reduction estimate with the engine's latencies.
pub fn reduction_timing(vl_bytes: usize, eew: Eew, cfg: &TimingConfig) -> ReductionTiming {
    let l = cfg.lanes();
    let intra = vl_bytes.div_ceil(8 * l) as u64 + u64::from(cfg.alu_lat);
    let step = u64::from(cfg.sldu_lat + cfg.alu_lat + cfg.reduction_step_overhead);
    let inter = (log2(l) + 1) * step;
    let simd = log2(64 / eew.bits() as usize) * u64::from(cfg.alu_lat);
    ReductionTiming { intra, inter, simd, total: intra + inter + simd, ideal: ideal_reduction_cycles(vl_bytes, l) }
}

/// Throughput when one `n`-element FMA issues every `gap` cycles.
pub fn issue_limit_perf(n: usize, gap: f64) -> f64 {
    2.0 * n as f64 / gap
}

/// Attainable flop/cycle at arithmetic intensity `ai` (flop/byte).
pub fn roofline(ai: f64, cfg: &TimingConfig) -> f64 {
    (2.0 * cfg.lanes() as f64).min(cfg.roof_bandwidth() * ai)
}

/// Arithmetic intensity of an `n` x `n` double-precision matmul.
pub fn fmatmul_intensity(n: usize) -> f64 {
    2.0 * (n as f64).powi(3) / (3.0 * 8.0 * (n as f64).powi(2))
}

/// Mean cycles between consecutive vector FMAs when each takes `slots` trace lines.
pub fn dispatcher_gap(model: &DispatcherModel, slots: usize) -> f64 {
    let slots = slots as f64;
    match model {
        DispatcherModel::Ideal => slots,
        DispatcherModel::ScalarCore(p) => {
            slots + p.base_gap + f64::from(p.loads_per_iter) * p.miss_rate() * p.miss_penalty()
        }
    }
}
