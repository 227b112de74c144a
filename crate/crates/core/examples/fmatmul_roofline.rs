//! Matrix multiply throughput against the roofline for several lane
//! counts and problem sizes.

use vlanesim::bench::{run_kernel, Kernel};
use vlanesim::timing::{fmatmul_intensity, issue_limit_perf, roofline, DispatcherModel, TimingConfig};

fn main() -> vlanesim::Result<()> {
    println!("lanes   n  flop/B  roof  issue  measured  util");
    for lanes in [2, 4, 8, 16] {
        let cfg = TimingConfig::with_lanes(lanes)?;
        for n in [16, 32, 64] {
            let run = run_kernel(Kernel::Fmatmul { n, gap: 4 }, &cfg, &DispatcherModel::Ideal, 7)?;
            let ai = fmatmul_intensity(n);
            println!(
                "{lanes:>5} {n:>3} {ai:>7.2} {:>5.1} {:>6.1} {:>9.2} {:>5.3}",
                roofline(ai, &cfg),
                issue_limit_perf(n, 4.0),
                run.flop_per_cycle(),
                run.stats.utilization()
            );
        }
    }
    Ok(())
}
