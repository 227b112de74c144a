//! Dot-product reduction latency for a few sizes and element widths,
//! next to the ideal bound.

use vlanesim::bench::{run_kernel, Kernel};
use vlanesim::rvv::Eew;
use vlanesim::timing::{ideal_reduction_cycles, DispatcherModel, TimingConfig};

fn main() -> vlanesim::Result<()> {
    println!("lanes bytes  e8  e16  e32  e64 ideal");
    for lanes in [2, 4, 8, 16] {
        let cfg = TimingConfig::with_lanes(lanes)?;
        for bytes in [64, 512, 4096] {
            let mut row = format!("{lanes:>5} {bytes:>5}");
            for eew in Eew::ALL {
                let r = run_kernel(Kernel::Dotp { bytes, eew }, &cfg, &DispatcherModel::Ideal, 1)?;
                row += &format!(" {:>4}", r.cycles);
            }
            row += &format!(" {:>5}", ideal_reduction_cycles(bytes, lanes));
            println!("{row}");
        }
    }
    Ok(())
}
