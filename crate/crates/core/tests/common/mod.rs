#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use vlanesim::rvv::{
    exec_flat, ArithOp, CmpOp, CsrState, Eew, FlatMachineState, Lmul, ProgramTrace, SlideDir, Src, VReg, VType,
    VectorInstr, WideOp,
};

pub const REGION: u64 = 0x8000;

fn vreg(rng: &mut impl Rng, align: usize) -> VReg {
    let slots = 32 / align;
    VReg::new((rng.gen_range(0..slots) * align) as u32).unwrap()
}

fn lmul(rng: &mut impl Rng) -> Lmul {
    [Lmul::M1, Lmul::M2, Lmul::M4, Lmul::M8][rng.gen_range(0..4)]
}

fn scalar(rng: &mut impl Rng, vector_ok: bool, align: usize) -> Src {
    match rng.gen_range(0..if vector_ok { 3 } else { 2 }) {
        0 => Src::X(rng.gen_range(-9..40)),
        1 => Src::F(f64::from(rng.gen_range(-8i32..8)) * 0.5),
        _ => Src::V(vreg(rng, align)),
    }
}

fn candidate(rng: &mut impl Rng, csr: &CsrState) -> VectorInstr {
    let m = csr.vtype.lmul.factor();
    let masked = rng.gen_bool(0.25);
    let vl = csr.vl;
    match rng.gen_range(0..100) {
        0..=7 => {
            let sew = Eew::ALL[rng.gen_range(0..4)];
            let lm = lmul(rng);
            let vt = VType { sew, lmul: lm, ta: rng.gen(), ma: rng.gen() };
            let max = lm.factor() * csr.vlen / sew.bits() as usize;
            VectorInstr::Config { avl: rng.gen_range(0..=max + 3), vtype: vt }
        }
        8..=32 => {
            let ops = [
                ArithOp::Add,
                ArithOp::Sub,
                ArithOp::And,
                ArithOp::Or,
                ArithOp::Xor,
                ArithOp::Mul,
                ArithOp::Macc,
                ArithOp::Mv,
                ArithOp::FAdd,
                ArithOp::FMul,
                ArithOp::FMacc,
            ];
            let op = *ops.choose(rng).unwrap();
            let vs2 = if op == ArithOp::Mv { None } else { Some(vreg(rng, m)) };
            VectorInstr::Arith { op, vd: vreg(rng, m), src: scalar(rng, true, m), vs2, masked }
        }
        33..=42 => {
            let wide_vs2 = rng.gen();
            let w = (2 * m).min(8);
            VectorInstr::Widening {
                op: if rng.gen() { WideOp::Add } else { WideOp::Mul },
                vd: vreg(rng, w),
                src: scalar(rng, true, m),
                vs2: vreg(rng, if wide_vs2 { w } else { m }),
                wide_vs2,
                masked,
            }
        }
        43..=50 => {
            let w = (2 * m).min(8);
            let vs2 = vreg(rng, w);
            let vd = if rng.gen_bool(0.3) { vs2 } else { vreg(rng, m) };
            VectorInstr::Narrowing { vd, src: scalar(rng, true, m), vs2, masked }
        }
        51..=56 => VectorInstr::MaskGen {
            op: if rng.gen() { CmpOp::Eq } else { CmpOp::Lt },
            vd: vreg(rng, 1),
            src: scalar(rng, true, m),
            vs2: vreg(rng, m),
            masked,
        },
        57..=63 => VectorInstr::Slide {
            dir: if rng.gen() { SlideDir::Up } else { SlideDir::Down },
            vd: vreg(rng, m),
            vs2: vreg(rng, m),
            offset: rng.gen_range(0..=vl + 2),
            masked,
        },
        64..=69 => VectorInstr::Reduction { vd: vreg(rng, 1), vs2: vreg(rng, m), vs1: vreg(rng, 1), masked },
        70..=79 => {
            let eew = Eew::ALL[rng.gen_range(0..4)];
            let stride = if rng.gen_bool(0.3) { Some(rng.gen_range(1..24)) } else { None };
            let base = REGION + rng.gen_range(0..256);
            if rng.gen() {
                VectorInstr::Load { eew, vd: vreg(rng, m), base, stride, masked }
            } else {
                VectorInstr::Store { eew, vs3: vreg(rng, m), base, stride, masked }
            }
        }
        80..=87 => VectorInstr::ScalarLoad { addr: REGION + rng.gen_range(0..512) },
        88..=95 => VectorInstr::ScalarStore { addr: REGION + rng.gen_range(0..512), val: rng.gen() },
        96..=97 => VectorInstr::ScalarOp,
        _ => VectorInstr::Barrier,
    }
}

/// Random legal program of `len` lines and a random initial state.
///
/// Registers start as e64 data; the first two lines configure the unit and
/// build a mask in v0 so later masked instructions have one to read.
pub fn random_program(seed: u64, vlen: usize, len: usize) -> (ProgramTrace, FlatMachineState) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut init = FlatMachineState::new(vlen);
    for r in 1..32 {
        for b in init.vreg_mut(r).iter_mut() {
            *b = rng.gen();
        }
        init.vreg_mut(r)[0] |= 1;
    }
    for a in 0..1024 {
        init.write_byte(REGION + a, rng.gen());
    }
    let mut t = ProgramTrace::new();
    let mut st = init.clone();
    let mut csr = CsrState::new(vlen).unwrap();
    let first = VectorInstr::Config { avl: rng.gen_range(1..=vlen / 8), vtype: VType::new(Eew::E8, Lmul::M1) };
    let mask = VectorInstr::MaskGen { op: CmpOp::Lt, vd: VReg::V0, src: Src::X(64), vs2: VReg::new(1).unwrap(), masked: false };
    for i in [first, mask] {
        exec_flat(&i, &mut st, &mut csr).unwrap();
        t.push(i);
    }
    while t.len() < len {
        let c = candidate(&mut rng, &csr);
        let mut s2 = st.clone();
        let mut c2 = csr;
        if exec_flat(&c, &mut s2, &mut c2).is_ok() {
            st = s2;
            csr = c2;
            t.push(c);
        }
    }
    (t, init)
}
