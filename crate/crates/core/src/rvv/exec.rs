use std::collections::HashMap;

use super::instr::{ArithOp, CmpOp, SlideDir, Src, VReg, VectorInstr, WideOp};
use super::vtype::{set_vtype, CsrState, Eew};
use crate::{Error, Result};

/// Flat architectural state: 32 registers in canonical byte order plus sparse memory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlatMachineState {
    vlen: usize,
    vregs: Vec<Vec<u8>>,
    /// Zero bytes are never stored, so map equality is memory equality.
    mem: HashMap<u64, u8>,
}

impl FlatMachineState {
    pub fn new(vlen: usize) -> Self {
        FlatMachineState { vlen, vregs: vec![vec![0; vlen / 8]; 32], mem: HashMap::new() }
    }

    pub fn vlen(&self) -> usize {
        self.vlen
    }

    pub fn vlenb(&self) -> usize {
        self.vlen / 8
    }

    pub fn vreg(&self, r: usize) -> &[u8] {
        &self.vregs[r]
    }

    pub fn vreg_mut(&mut self, r: usize) -> &mut [u8] {
        &mut self.vregs[r]
    }

    pub fn read_byte(&self, addr: u64) -> u8 {
        self.mem.get(&addr).copied().unwrap_or(0)
    }

    pub fn write_byte(&mut self, addr: u64, val: u8) {
        if val == 0 {
            self.mem.remove(&addr);
        } else {
            self.mem.insert(addr, val);
        }
    }

    pub fn write_bytes(&mut self, addr: u64, bytes: &[u8]) {
        for (i, b) in bytes.iter().enumerate() {
            self.write_byte(addr.wrapping_add(i as u64), *b);
        }
    }

    pub fn read_bytes(&self, addr: u64, len: usize) -> Vec<u8> {
        (0..len).map(|i| self.read_byte(addr.wrapping_add(i as u64))).collect()
    }

    /// Non-zero memory bytes, sorted by address.
    pub fn memory(&self) -> Vec<(u64, u8)> {
        let mut v: Vec<_> = self.mem.iter().map(|(a, b)| (*a, *b)).collect();
        v.sort_unstable();
        v
    }

    /// Element `i` of the register group starting at `base`, zero-extended.
    pub fn elem(&self, base: VReg, eew: Eew, i: usize) -> u64 {
        let eb = eew.bytes();
        let off = i * eb;
        let reg = &self.vregs[base.idx() + off / self.vlenb()];
        let o = off % self.vlenb();
        let mut buf = [0u8; 8];
        buf[..eb].copy_from_slice(&reg[o..o + eb]);
        u64::from_le_bytes(buf)
    }

    pub fn set_elem(&mut self, base: VReg, eew: Eew, i: usize, val: u64) {
        let eb = eew.bytes();
        let off = i * eb;
        let vlenb = self.vlenb();
        let reg = &mut self.vregs[base.idx() + off / vlenb];
        let o = off % vlenb;
        reg[o..o + eb].copy_from_slice(&val.to_le_bytes()[..eb]);
    }

    /// Copy of the registers only; source operands are read from this.
    fn regs_snapshot(&self) -> FlatMachineState {
        FlatMachineState { vlen: self.vlen, vregs: self.vregs.clone(), mem: HashMap::new() }
    }

    pub fn mask_bit(&self, i: usize) -> bool {
        self.vregs[0][i / 8] >> (i % 8) & 1 == 1
    }
}

/// Bytes of one destination register group touched by an instruction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DestWrite {
    pub base: VReg,
    pub regs: usize,
    /// Width the written bytes are encoded with (mask results use e8).
    pub eew: Eew,
    /// One flag per byte of the group.
    pub written: Vec<bool>,
}

impl DestWrite {
    fn new(base: VReg, regs: usize, eew: Eew, vlenb: usize) -> Self {
        DestWrite { base, regs, eew, written: vec![false; regs * vlenb] }
    }

    fn mark_elem(&mut self, eew: Eew, i: usize) {
        let eb = eew.bytes();
        self.written[i * eb..(i + 1) * eb].fill(true);
    }

    /// True when every byte of register `k` of the group is overwritten.
    pub fn covers_register(&self, k: usize) -> bool {
        let vlenb = self.written.len() / self.regs;
        self.written[k * vlenb..(k + 1) * vlenb].iter().all(|w| *w)
    }

    pub fn any_in_register(&self, k: usize) -> bool {
        let vlenb = self.written.len() / self.regs;
        self.written[k * vlenb..(k + 1) * vlenb].iter().any(|w| *w)
    }
}

/// Side effects of one instruction, in element order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExecEffect {
    pub dest: Option<DestWrite>,
    /// `(address, value)` read by loads, in access order.
    pub loads: Vec<(u64, u8)>,
    /// `(address, value)` written by stores, in access order.
    pub stores: Vec<(u64, u8)>,
}

fn width_mask(eew: Eew) -> u64 {
    if eew == Eew::E64 {
        u64::MAX
    } else {
        (1u64 << eew.bits()) - 1
    }
}

fn sext(x: u64, eew: Eew) -> i64 {
    let sh = 64 - eew.bits();
    ((x << sh) as i64) >> sh
}

/// Register count of a group of `eew` elements under the current vtype.
fn emul(csr: &CsrState, eew: Eew) -> Result<usize> {
    let num = csr.vtype.lmul.factor() * eew.bits() as usize;
    let den = csr.vtype.sew.bits() as usize;
    if num < den {
        return Err(Error::illegal(format!(
            "fractional EMUL for {eew} under SEW {} LMUL {}",
            csr.vtype.sew.bits(),
            csr.vtype.lmul.factor()
        )));
    }
    let e = num / den;
    if e > 8 {
        return Err(Error::illegal(format!("EMUL {e} exceeds 8")));
    }
    Ok(e)
}

fn check_group(r: VReg, regs: usize, what: &str) -> Result<()> {
    if !r.idx().is_multiple_of(regs) || r.idx() + regs > 32 {
        return Err(Error::illegal(format!("{what} {r} not aligned to a {regs}-register group")));
    }
    Ok(())
}

fn overlaps(a: VReg, an: usize, b: VReg, bn: usize) -> bool {
    a.idx() < b.idx() + bn && b.idx() < a.idx() + an
}

fn no_v0_dest(masked: bool, vd: VReg, regs: usize) -> Result<()> {
    if masked && overlaps(vd, regs, VReg::V0, 1) {
        return Err(Error::illegal("masked instruction may not write v0"));
    }
    Ok(())
}

const CANONICAL_NAN_32: u64 = 0x7fc0_0000;
const CANONICAL_NAN_64: u64 = 0x7ff8_0000_0000_0000;

/// Any NaN result is the canonical quiet NaN; input payloads never propagate.
fn fp(op: ArithOp, eew: Eew, a: u64, b: u64, acc: u64) -> Result<u64> {
    match eew {
        Eew::E32 => {
            let (a, b, c) = (f32::from_bits(a as u32), f32::from_bits(b as u32), f32::from_bits(acc as u32));
            let r = match op {
                ArithOp::FAdd => a + b,
                ArithOp::FMul => a * b,
                _ => b.mul_add(a, c),
            };
            Ok(if r.is_nan() { CANONICAL_NAN_32 } else { r.to_bits() as u64 })
        }
        Eew::E64 => {
            let (a, b, c) = (f64::from_bits(a), f64::from_bits(b), f64::from_bits(acc));
            let r = match op {
                ArithOp::FAdd => a + b,
                ArithOp::FMul => a * b,
                _ => b.mul_add(a, c),
            };
            Ok(if r.is_nan() { CANONICAL_NAN_64 } else { r.to_bits() })
        }
        _ => Err(Error::illegal(format!("floating point needs SEW 32 or 64, got {}", eew.bits()))),
    }
}

fn scalar_bits(src: Src, eew: Eew) -> u64 {
    match src {
        Src::X(x) => x as u64 & width_mask(eew),
        Src::F(f) => match eew {
            Eew::E32 => (f as f32).to_bits() as u64,
            _ => f.to_bits() & width_mask(eew),
        },
        Src::V(_) => unreachable!("vector operand has no scalar value"),
    }
}

/// Executes one instruction against the flat state.
///
/// Tail and masked-off bytes of the destination are left untouched. `Config`
/// updates `csr`; scalar events touch memory only.
pub fn exec_flat(instr: &VectorInstr, state: &mut FlatMachineState, csr: &mut CsrState) -> Result<ExecEffect> {
    let vl = csr.vl;
    let sew = csr.vtype.sew;
    let vlenb = state.vlenb();
    let lmul = csr.vtype.lmul.factor();
    let mut eff = ExecEffect::default();
    // Mask is sampled before any destination update.
    let mask: Vec<bool> = if instr.is_masked() { (0..vl).map(|i| state.mask_bit(i)).collect() } else { vec![true; vl] };

    match *instr {
        VectorInstr::Config { avl, vtype } => {
            *csr = set_vtype(avl, vtype, csr)?;
        }
        VectorInstr::Arith { op, vd, src, vs2, masked } => {
            check_group(vd, lmul, "vd")?;
            no_v0_dest(masked, vd, lmul)?;
            if let Src::V(v) = src {
                check_group(v, lmul, "vs1")?;
            }
            if let Some(v) = vs2 {
                check_group(v, lmul, "vs2")?;
            }
            if op.is_float() && !matches!(sew, Eew::E32 | Eew::E64) {
                return Err(Error::illegal(format!("{} needs SEW 32 or 64", op.mnemonic())));
            }
            let wm = width_mask(sew);
            let mut dw = DestWrite::new(vd, lmul, sew, vlenb);
            let snap = state.regs_snapshot();
            for i in (0..vl).filter(|&i| mask[i]) {
                let b = match src {
                    Src::V(v) => snap.elem(v, sew, i),
                    s => scalar_bits(s, sew),
                };
                let a = vs2.map(|v| snap.elem(v, sew, i)).unwrap_or(0);
                let acc = snap.elem(vd, sew, i);
                let r = match op {
                    ArithOp::Add => a.wrapping_add(b),
                    ArithOp::Sub => a.wrapping_sub(b),
                    ArithOp::And => a & b,
                    ArithOp::Or => a | b,
                    ArithOp::Xor => a ^ b,
                    ArithOp::Mul => a.wrapping_mul(b),
                    ArithOp::Macc => acc.wrapping_add(a.wrapping_mul(b)),
                    ArithOp::Mv => b,
                    ArithOp::FAdd | ArithOp::FMul | ArithOp::FMacc => fp(op, sew, a, b, acc)?,
                } & wm;
                state.set_elem(vd, sew, i, r);
                dw.mark_elem(sew, i);
            }
            eff.dest = Some(dw);
        }
        VectorInstr::Widening { op, vd, src, vs2, wide_vs2, masked } => {
            let wide = sew.double().ok_or_else(|| Error::illegal("widening from SEW 64"))?;
            let dregs = emul(csr, wide)?;
            check_group(vd, dregs, "vd")?;
            no_v0_dest(masked, vd, dregs)?;
            let s2regs = if wide_vs2 { dregs } else { lmul };
            check_group(vs2, s2regs, "vs2")?;
            if !wide_vs2 && overlaps(vd, dregs, vs2, lmul) {
                return Err(Error::illegal("widening destination overlaps narrow source"));
            }
            if let Src::V(v) = src {
                check_group(v, lmul, "vs1")?;
                if overlaps(vd, dregs, v, lmul) {
                    return Err(Error::illegal("widening destination overlaps narrow source"));
                }
            }
            let mut dw = DestWrite::new(vd, dregs, wide, vlenb);
            let snap = state.regs_snapshot();
            for i in (0..vl).filter(|&i| mask[i]) {
                let b = sext(
                    match src {
                        Src::V(v) => snap.elem(v, sew, i),
                        s => scalar_bits(s, sew),
                    },
                    sew,
                );
                let a = if wide_vs2 { sext(snap.elem(vs2, wide, i), wide) } else { sext(snap.elem(vs2, sew, i), sew) };
                let r = match op {
                    WideOp::Add => a.wrapping_add(b),
                    WideOp::Mul => a.wrapping_mul(b),
                } as u64
                    & width_mask(wide);
                state.set_elem(vd, wide, i, r);
                dw.mark_elem(wide, i);
            }
            eff.dest = Some(dw);
        }
        VectorInstr::Narrowing { vd, src, vs2, masked } => {
            let wide = sew.double().ok_or_else(|| Error::illegal("narrowing source wider than 64 bits"))?;
            let sregs = emul(csr, wide)?;
            check_group(vd, lmul, "vd")?;
            check_group(vs2, sregs, "vs2")?;
            no_v0_dest(masked, vd, lmul)?;
            if overlaps(vd, lmul, vs2, sregs) && vd != vs2 {
                return Err(Error::illegal("narrowing destination overlaps the upper part of the source"));
            }
            if let Src::V(v) = src {
                check_group(v, lmul, "vs1")?;
            }
            let mut dw = DestWrite::new(vd, lmul, sew, vlenb);
            let snap = state.regs_snapshot();
            for i in (0..vl).filter(|&i| mask[i]) {
                let sh = match src {
                    Src::V(v) => snap.elem(v, sew, i),
                    s => scalar_bits(s, sew),
                } & (wide.bits() as u64 - 1);
                let r = (snap.elem(vs2, wide, i) >> sh) & width_mask(sew);
                state.set_elem(vd, sew, i, r);
                dw.mark_elem(sew, i);
            }
            eff.dest = Some(dw);
        }
        VectorInstr::MaskGen { op, vd, src, vs2, masked } => {
            check_group(vs2, lmul, "vs2")?;
            if let Src::V(v) = src {
                check_group(v, lmul, "vs1")?;
            }
            let _ = masked;
            let mut dw = DestWrite::new(vd, 1, Eew::E8, vlenb);
            let snap = state.regs_snapshot();
            for i in (0..vl).filter(|&i| mask[i]) {
                let b = match src {
                    Src::V(v) => snap.elem(v, sew, i),
                    s => scalar_bits(s, sew),
                };
                let a = snap.elem(vs2, sew, i);
                let bit = match op {
                    CmpOp::Eq => a == b,
                    CmpOp::Lt => sext(a, sew) < sext(b, sew),
                };
                let byte = &mut state.vregs[vd.idx()][i / 8];
                *byte = (*byte & !(1 << (i % 8))) | ((bit as u8) << (i % 8));
                dw.written[i / 8] = true;
            }
            eff.dest = Some(dw);
        }
        VectorInstr::Slide { dir, vd, vs2, offset, masked } => {
            check_group(vd, lmul, "vd")?;
            check_group(vs2, lmul, "vs2")?;
            no_v0_dest(masked, vd, lmul)?;
            if dir == SlideDir::Up && overlaps(vd, lmul, vs2, lmul) {
                return Err(Error::illegal("vslideup destination overlaps source"));
            }
            let vlmax = csr.vlmax();
            let mut dw = DestWrite::new(vd, lmul, sew, vlenb);
            let snap = state.regs_snapshot();
            for i in (0..vl).filter(|&i| mask[i]) {
                let v = match dir {
                    SlideDir::Up if i < offset => continue,
                    SlideDir::Up => snap.elem(vs2, sew, i - offset),
                    SlideDir::Down => match i.checked_add(offset) {
                        Some(j) if j < vlmax => snap.elem(vs2, sew, j),
                        _ => 0,
                    },
                };
                state.set_elem(vd, sew, i, v);
                dw.mark_elem(sew, i);
            }
            eff.dest = Some(dw);
        }
        VectorInstr::Reduction { vd, vs2, vs1, masked } => {
            check_group(vs2, lmul, "vs2")?;
            no_v0_dest(masked, vd, 1)?;
            if vl > 0 {
                let mut acc = state.elem(vs1, sew, 0);
                for i in (0..vl).filter(|&i| mask[i]) {
                    acc = acc.wrapping_add(state.elem(vs2, sew, i));
                }
                state.set_elem(vd, sew, 0, acc & width_mask(sew));
                let mut dw = DestWrite::new(vd, 1, sew, vlenb);
                dw.mark_elem(sew, 0);
                eff.dest = Some(dw);
            }
        }
        VectorInstr::Load { eew, vd, base, stride, masked } => {
            let regs = emul(csr, eew)?;
            check_group(vd, regs, "vd")?;
            no_v0_dest(masked, vd, regs)?;
            let stride = stride.unwrap_or(eew.bytes() as i64);
            let mut dw = DestWrite::new(vd, regs, eew, vlenb);
            for i in (0..vl).filter(|&i| mask[i]) {
                let addr = base.wrapping_add((i as i64).wrapping_mul(stride) as u64);
                let bytes = state.read_bytes(addr, eew.bytes());
                for (k, b) in bytes.iter().enumerate() {
                    eff.loads.push((addr + k as u64, *b));
                }
                let mut buf = [0u8; 8];
                buf[..eew.bytes()].copy_from_slice(&bytes);
                state.set_elem(vd, eew, i, u64::from_le_bytes(buf));
                dw.mark_elem(eew, i);
            }
            eff.dest = Some(dw);
        }
        VectorInstr::Store { eew, vs3, base, stride, .. } => {
            let regs = emul(csr, eew)?;
            check_group(vs3, regs, "vs3")?;
            let stride = stride.unwrap_or(eew.bytes() as i64);
            for i in (0..vl).filter(|&i| mask[i]) {
                let addr = base.wrapping_add((i as i64).wrapping_mul(stride) as u64);
                let bytes = state.elem(vs3, eew, i).to_le_bytes();
                for k in 0..eew.bytes() {
                    state.write_byte(addr + k as u64, bytes[k]);
                    eff.stores.push((addr + k as u64, bytes[k]));
                }
            }
        }
        VectorInstr::ScalarLoad { addr } => eff.loads.push((addr, state.read_byte(addr))),
        VectorInstr::ScalarStore { addr, val } => {
            state.write_byte(addr, val);
            eff.stores.push((addr, val));
        }
        VectorInstr::ScalarOp | VectorInstr::Barrier | VectorInstr::Fence => {}
    }
    Ok(eff)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rvv::decode_line;
    use crate::rvv::vtype::{Lmul, VType};

    fn v(i: u32) -> VReg {
        VReg::new(i).unwrap()
    }

    fn csr(vl: usize, sew: Eew) -> CsrState {
        CsrState { vl, vtype: VType::new(sew, Lmul::M1), vlen: 512 }
    }

    fn run(line: &str, st: &mut FlatMachineState, c: &mut CsrState) -> ExecEffect {
        exec_flat(&decode_line(line).unwrap(), st, c).unwrap()
    }

    #[test]
    fn vadd_example() {
        let mut st = FlatMachineState::new(512);
        let mut c = csr(4, Eew::E32);
        for i in 0..4 {
            st.set_elem(v(2), Eew::E32, i, i as u64 + 1);
            st.set_elem(v(3), Eew::E32, i, 10 * (i as u64 + 1));
        }
        run("vadd.vv v1, v2, v3", &mut st, &mut c);
        let got: Vec<u64> = (0..4).map(|i| st.elem(v(1), Eew::E32, i)).collect();
        assert_eq!(got, vec![11, 22, 33, 44]);
    }

    #[test]
    fn vredsum_series() {
        let mut st = FlatMachineState::new(512);
        let mut c = csr(8, Eew::E8);
        for i in 0..8 {
            st.set_elem(v(4), Eew::E8, i, i as u64 + 1);
        }
        run("vredsum.vs v1, v4, v2", &mut st, &mut c);
        assert_eq!(st.elem(v(1), Eew::E8, 0), 36);
    }

    #[test]
    fn masked_vadd_keeps_inactive_elements() {
        let mut st = FlatMachineState::new(512);
        let mut c = csr(4, Eew::E32);
        st.vreg_mut(0)[0] = 0b1010; // elements 1 and 3 active
        for i in 0..4 {
            st.set_elem(v(1), Eew::E32, i, 100 + i as u64);
            st.set_elem(v(2), Eew::E32, i, 1);
            st.set_elem(v(3), Eew::E32, i, 2);
        }
        run("vadd.vv v1, v2, v3, v0.m", &mut st, &mut c);
        let got: Vec<u64> = (0..4).map(|i| st.elem(v(1), Eew::E32, i)).collect();
        assert_eq!(got, vec![100, 3, 102, 3]);
    }

    #[test]
    fn sub_is_vs2_minus_vs1_and_wraps() {
        let mut st = FlatMachineState::new(512);
        let mut c = csr(1, Eew::E8);
        st.set_elem(v(2), Eew::E8, 0, 5);
        st.set_elem(v(3), Eew::E8, 0, 3);
        run("vsub.vv v1, v2, v3", &mut st, &mut c);
        assert_eq!(st.elem(v(1), Eew::E8, 0), 254);
    }

    #[test]
    fn widening_and_narrowing() {
        let mut st = FlatMachineState::new(512);
        let mut c = csr(2, Eew::E8);
        st.set_elem(v(2), Eew::E8, 0, 0xff); // -1
        st.set_elem(v(2), Eew::E8, 1, 100);
        run("vwmul.vx v4, 3, v2", &mut st, &mut c);
        assert_eq!(st.elem(v(4), Eew::E16, 0), (-3i16) as u16 as u64);
        assert_eq!(st.elem(v(4), Eew::E16, 1), 300);
        run("vnsrl.wx v6, v4, 4", &mut st, &mut c);
        assert_eq!(st.elem(v(6), Eew::E8, 1), 300 >> 4);
        // vd == vs2 is legal and reads each wide element before overwriting it
        run("vnsrl.wx v4, v4, 0", &mut st, &mut c);
        assert_eq!(st.elem(v(4), Eew::E8, 1), 300 & 0xff);
    }

    #[test]
    fn float_fma() {
        let mut st = FlatMachineState::new(512);
        let mut c = csr(2, Eew::E64);
        st.set_elem(v(8), Eew::E64, 0, 2.0f64.to_bits());
        st.set_elem(v(8), Eew::E64, 1, (-1.0f64).to_bits());
        st.set_elem(v(4), Eew::E64, 0, 1.0f64.to_bits());
        run("vfmacc.vf v4, 3.5, v8", &mut st, &mut c);
        assert_eq!(f64::from_bits(st.elem(v(4), Eew::E64, 0)), 8.0);
        assert_eq!(f64::from_bits(st.elem(v(4), Eew::E64, 1)), -3.5);
        let mut c8 = csr(2, Eew::E8);
        assert!(exec_flat(&decode_line("vfadd.vv v1, v2, v3").unwrap(), &mut st, &mut c8).is_err());
    }

    #[test]
    fn nan_results_are_canonical() {
        let mut st = FlatMachineState::new(512);
        let mut c = csr(2, Eew::E64);
        st.set_elem(v(2), Eew::E64, 0, 0xfff0_0000_dead_beef);
        st.set_elem(v(3), Eew::E64, 0, 0x7ff0_0000_0000_0001);
        st.set_elem(v(2), Eew::E64, 1, f64::INFINITY.to_bits());
        run("vfmul.vv v1, v2, v3", &mut st, &mut c);
        assert_eq!(st.elem(v(1), Eew::E64, 0), 0x7ff8_0000_0000_0000);
        assert_eq!(st.elem(v(1), Eew::E64, 1), 0x7ff8_0000_0000_0000);
        let mut c32 = csr(1, Eew::E32);
        st.set_elem(v(2), Eew::E32, 0, 0xffc0_1234);
        run("vfadd.vv v1, v2, v3", &mut st, &mut c32);
        assert_eq!(st.elem(v(1), Eew::E32, 0), 0x7fc0_0000);
    }

    #[test]
    fn compares_and_slides() {
        let mut st = FlatMachineState::new(512);
        let mut c = csr(4, Eew::E16);
        for i in 0..4 {
            st.set_elem(v(2), Eew::E16, i, i as u64);
        }
        run("vmslt.vx v1, 2, v2", &mut st, &mut c);
        assert_eq!(st.vreg(1)[0] & 0xf, 0b0011);
        run("vslideup v3, v2, 1", &mut st, &mut c);
        assert_eq!((0..4).map(|i| st.elem(v(3), Eew::E16, i)).collect::<Vec<_>>(), vec![0, 0, 1, 2]);
        run("vslidedown v4, v2, 2", &mut st, &mut c);
        assert_eq!((0..4).map(|i| st.elem(v(4), Eew::E16, i)).collect::<Vec<_>>(), vec![2, 3, 0, 0]);
        assert!(exec_flat(&decode_line("vslideup v2, v2, 1").unwrap(), &mut st, &mut c).is_err());
    }

    #[test]
    fn strided_memory() {
        let mut st = FlatMachineState::new(512);
        let mut c = csr(3, Eew::E16);
        st.write_bytes(0x100, &[1, 0, 9, 9, 2, 0, 9, 9, 3, 0]);
        run("vle16 v2, base=0x100, stride=4", &mut st, &mut c);
        assert_eq!((0..3).map(|i| st.elem(v(2), Eew::E16, i)).collect::<Vec<_>>(), vec![1, 2, 3]);
        let eff = run("vse16 v2, base=0x200", &mut st, &mut c);
        assert_eq!(eff.stores.len(), 6);
        assert_eq!(st.read_bytes(0x200, 6), vec![1, 0, 2, 0, 3, 0]);
    }

    #[test]
    fn illegal_forms() {
        let mut st = FlatMachineState::new(512);
        let mut c = CsrState { vl: 4, vtype: VType::new(Eew::E32, Lmul::M2), vlen: 512 };
        for bad in ["vadd.vv v1, v2, v4", "vadd.vv v0, v2, v4, v0.m", "vwadd.vv v2, v2, v4"] {
            assert!(exec_flat(&decode_line(bad).unwrap(), &mut st, &mut c).is_err(), "{bad}");
        }
    }
}
