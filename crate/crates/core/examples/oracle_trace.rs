//! Parse a small trace, run it on the functional model and on the timed
//! lane model, and show that both end in the same state.

use vlanesim::rvv::{run_program, Eew, FlatMachineState, ProgramTrace, VReg};
use vlanesim::timing::{simulate_with, DispatcherModel, SimOptions, TimingConfig};

const TRACE: &str = "
vsetvli 16 e32 m1 tu mu
vle32 v1, base=0x1000
vadd.vx v2, v1, 7
vmul.vv v3, v2, v1
vsetvli 4 e64 m1 tu mu       # partial write at a new width
vadd.vv v3, v3, v1
vmslt.vx v0, 100, v3
vmv.vx v4, -1, v0.t
vse64 v4, base=0x2000
";

fn main() -> vlanesim::Result<()> {
    let trace = ProgramTrace::parse(TRACE)?;
    let mut init = FlatMachineState::new(512);
    for i in 0..64u64 {
        init.write_byte(0x1000 + i, (i * 3 % 17) as u8);
    }

    let oracle = run_program(&trace, init.clone())?;
    let cfg = TimingConfig::new(4, 512)?;
    let timed = simulate_with(&trace, init, &cfg, &DispatcherModel::Ideal, &SimOptions::default())?;
    assert_eq!(timed.state, oracle.state);

    let v4 = VReg::new(4)?;
    let elems: Vec<u64> = (0..4).map(|i| oracle.state.elem(v4, Eew::E64, i)).collect();
    println!("v4 = {elems:x?}");
    println!("{} cycles, {} reshuffles", timed.stats.cycles, timed.stats.reshuffles);
    for t in &timed.timeline {
        println!("  #{:<2} dispatch {:>3} complete {:>3}", t.index, t.dispatch, t.complete);
    }
    Ok(())
}
