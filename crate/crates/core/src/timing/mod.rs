//! Cycle-level timing: the stepped engine, its configuration and the
//! closed-form models it is compared with.

mod analytic;
mod config;
mod engine;
mod stats;

pub use analytic::{
    dispatcher_gap, fmatmul_intensity, ideal_reduction_cycles, issue_limit_perf, reduction_timing, roofline,
    ReductionTiming,
};
pub use config::{load_config, parse_config, DispatcherModel, ScalarCoreParams, TimingConfig};
pub use engine::{simulate, simulate_with, SimOptions, SimOutcome};
pub use stats::{CycleStats, InstrTiming};
