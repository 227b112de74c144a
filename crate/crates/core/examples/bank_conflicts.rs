//! Short vectors leave each register on a single bank, so back-to-back
//! FMAs fight over ports. Compare vl = lanes against a full register.

use vlanesim::rvv::{ArithOp, Eew, FlatMachineState, Lmul, ProgramTrace, Src, VReg, VType, VectorInstr};
use vlanesim::timing::{simulate_with, DispatcherModel, SimOptions, TimingConfig};

fn fma_chain(vl: usize) -> ProgramTrace {
    let mut t = ProgramTrace::new();
    t.push(VectorInstr::Config { avl: vl, vtype: VType::new(Eew::E64, Lmul::M1) });
    for i in 0..64u32 {
        let vd = VReg::new(1 + i % 10).unwrap();
        let a = VReg::new(11 + i % 7).unwrap();
        let b = VReg::new(20 + i % 9).unwrap();
        t.push(VectorInstr::Arith { op: ArithOp::FMacc, vd, src: Src::V(a), vs2: Some(b), masked: false });
    }
    t
}

fn main() -> vlanesim::Result<()> {
    let cfg = TimingConfig::with_lanes(16)?;
    for vl in [16, 32, 64] {
        let out = simulate_with(
            &fma_chain(vl),
            FlatMachineState::new(cfg.layout.vlen),
            &cfg,
            &DispatcherModel::Ideal,
            &SimOptions::default(),
        )?;
        let s = &out.stats;
        println!(
            "vl {vl:>3}: {:>5} cycles, {:>4} bank stalls, {:>5.1}% of peak",
            s.cycles,
            s.bank_conflict_stalls(),
            100.0 * s.utilization()
        );
        println!("         stalls per bank {:?}", s.conflicts.stalls_per_bank);
    }
    Ok(())
}
