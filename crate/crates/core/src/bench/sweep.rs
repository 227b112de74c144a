use rayon::prelude::*;

use super::kernels::{generate, output, reference, Kernel};
use super::report::ReportRow;
use crate::timing::{simulate_with, CycleStats, DispatcherModel, SimOptions, TimingConfig};
use crate::{Error, Result};

/// Result of one timed, verified kernel run.
#[derive(Debug, Clone)]
pub struct KernelRun {
    pub kernel: Kernel,
    pub stats: CycleStats,
    /// Cycles of the measured region (whole program unless the kernel marks one).
    pub cycles: u64,
}

impl KernelRun {
    pub fn flop_per_cycle(&self) -> f64 {
        if self.cycles == 0 {
            0.0
        } else {
            self.stats.flops as f64 / self.cycles as f64
        }
    }
}

pub fn run_kernel(kernel: Kernel, cfg: &TimingConfig, dispatcher: &DispatcherModel, seed: u64) -> Result<KernelRun> {
    let inst = generate(kernel, cfg.layout.vlen, seed)?;
    let out = simulate_with(&inst.trace, inst.init.clone(), cfg, dispatcher, &SimOptions::default())?;
    if output(&inst, &out.state) != reference(&inst) {
        return Err(Error::Divergence(format!("{} result differs from the dense reference", kernel.name())));
    }
    let cycles = match kernel {
        Kernel::Dotp { .. } => {
            let start = out.timeline[inst.measure_from].dispatch;
            out.timeline[inst.measure_from + 1].complete + 1 - start
        }
        _ => out.stats.cycles,
    };
    Ok(KernelRun { kernel, stats: out.stats, cycles })
}

/// Cartesian sweep over lane counts, sizes and dispatchers.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub kernel: String,
    pub lanes: Vec<usize>,
    pub sizes: Vec<usize>,
    pub dispatchers: Vec<DispatcherModel>,
    pub base: TimingConfig,
    pub seed: u64,
}

pub fn sweep(spec: &SweepSpec) -> Result<Vec<ReportRow>> {
    let mut points = Vec::new();
    for &l in &spec.lanes {
        for &n in &spec.sizes {
            for d in &spec.dispatchers {
                points.push((l, n, *d));
            }
        }
    }
    points
        .into_par_iter()
        .map(|(l, n, d)| {
            let mut cfg = spec.base.clone();
            cfg.layout = crate::layout::LayoutConfig::new(l, spec.base.layout.vlen)?;
            let kernel = Kernel::parse(&spec.kernel, n)?;
            let run = run_kernel(kernel, &cfg, &d, spec.seed)?;
            let ideality = if d == DispatcherModel::Ideal {
                1.0
            } else {
                let ideal = run_kernel(kernel, &cfg, &DispatcherModel::Ideal, spec.seed)?;
                run.flop_per_cycle() / ideal.flop_per_cycle().max(f64::MIN_POSITIVE)
            };
            Ok(ReportRow {
                kernel: kernel.name().into(),
                lanes: l,
                vlen: cfg.layout.vlen,
                size: n,
                dispatcher: d.label(),
                cycles: run.cycles,
                flops: run.stats.flops,
                flop_per_cycle: run.flop_per_cycle(),
                utilization: run.flop_per_cycle() / (2.0 * l as f64),
                ideality,
                conflicts: run.stats.bank_conflict_stalls(),
                reshuffles: run.stats.reshuffles,
            })
        })
        .collect()
}
