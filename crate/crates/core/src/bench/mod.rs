//! Benchmark kernels, sweeps and CSV reporting.

mod kernels;
mod report;
mod sweep;

pub use kernels::{generate, output, read_f64s, reference, Kernel, KernelInstance, A_BASE, B_BASE, C_BASE};
pub use report::{write_csv, ReportRow};
pub use sweep::{run_kernel, sweep, KernelRun, SweepSpec};
