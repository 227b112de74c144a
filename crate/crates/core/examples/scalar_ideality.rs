//! How a real scalar host core, with its D-cache line and AXI width,
//! throttles a small matmul compared to an ideal instruction feed.

use vlanesim::bench::{run_kernel, Kernel};
use vlanesim::timing::{DispatcherModel, ScalarCoreParams, TimingConfig};

fn main() -> vlanesim::Result<()> {
    let cfg = TimingConfig::with_lanes(16)?;
    let kernel = Kernel::Fmatmul { n: 16, gap: 2 };
    let ideal = run_kernel(kernel, &cfg, &DispatcherModel::Ideal, 1)?.flop_per_cycle();
    println!("ideal feed: {ideal:.2} flop/cycle");
    println!("line\\axi    64   128   256   512");
    for line in [128, 256, 512] {
        let mut row = format!("{line:>8}");
        for axi in [64, 128, 256, 512] {
            if axi > line {
                row += "     -";
                continue;
            }
            let d = DispatcherModel::ScalarCore(ScalarCoreParams::calibrated(line, axi));
            let p = run_kernel(kernel, &cfg, &d, 1)?.flop_per_cycle();
            row += &format!(" {:>5.3}", p / ideal);
        }
        println!("{row}");
    }
    Ok(())
}
