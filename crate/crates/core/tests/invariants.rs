use std::collections::HashSet;

use proptest::prelude::*;

use vlanesim::banks::{bank_of, BankConfig};
use vlanesim::coherency::{blocking_rule, on_vector_store, CacheModel, MemKind, PendingOps};
use vlanesim::layout::{deshuffle, map_byte, map_flat, plan_reshuffle, shuffle, EewTag, LaneImage, LayoutConfig};
use vlanesim::rvv::{
    exec_flat, set_vtype, vlmax, ArithOp, CsrState, Eew, FlatMachineState, Lmul, Src, VReg, VType, VectorInstr,
};

fn eew() -> impl Strategy<Value = Eew> {
    prop::sample::select(Eew::ALL.to_vec())
}

fn geometry() -> impl Strategy<Value = LayoutConfig> {
    (0u32..5, 0u32..4).prop_map(|(l, v)| LayoutConfig::new(1 << l, [128, 256, 512, 1024][v as usize]).unwrap())
}

proptest! {
    #[test]
    fn byte_map_is_a_balanced_bijection(cfg in geometry(), eew in eew()) {
        let mut seen = HashSet::new();
        let mut per_lane = vec![0usize; cfg.lanes];
        for e in 0..cfg.vlenb() / eew.bytes() {
            for b in 0..eew.bytes() {
                let m = map_byte(e, b, eew, &cfg).unwrap();
                prop_assert_eq!(m, map_flat(e * eew.bytes() + b, eew, &cfg));
                prop_assert!(seen.insert((m.lane, m.offset)));
                per_lane[m.lane] += 1;
            }
        }
        prop_assert!(per_lane.iter().all(|&n| n == cfg.bytes_per_lane()));
    }

    #[test]
    fn shuffle_round_trips(cfg in geometry(), eew in eew(), seed in any::<u64>()) {
        let flat: Vec<u8> = (0..cfg.vlenb()).map(|i| (seed >> (i % 57)) as u8 ^ i as u8).collect();
        let slices = shuffle(&flat, eew, &cfg).unwrap();
        prop_assert_eq!(slices.len(), cfg.lanes);
        prop_assert_eq!(deshuffle(&slices, eew, &cfg).unwrap(), flat);
    }

    #[test]
    fn partial_writes_keep_unwritten_bytes(cfg in geometry(), old in eew(), new in eew(), keep in 0usize..64) {
        let flat: Vec<u8> = (0..cfg.vlenb()).map(|i| i as u8).collect();
        let mut tags = [EewTag::Uninit; 32];
        tags[3] = EewTag::Encoded(old);
        let zero = vec![0u8; cfg.vlenb()];
        let mut regs: Vec<&[u8]> = vec![&zero; 32];
        regs[3] = &flat;
        let mut img = LaneImage::from_flat(cfg, &regs, &tags).unwrap();
        let written: Vec<bool> = (0..cfg.vlenb()).map(|i| i >= keep.min(cfg.vlenb())).collect();
        let update = vec![0xeeu8; cfg.vlenb()];
        let full = written.iter().all(|w| *w);
        if let Some(op) = plan_reshuffle(VReg::new(3).unwrap(), img.tag(3), new, full) {
            img.reshuffle(&op).unwrap();
        }
        img.write_partial(3, new, &update, &written);
        let got = img.read_flat(3);
        for i in 0..cfg.vlenb() {
            prop_assert_eq!(got[i], if written[i] { 0xee } else { flat[i] });
        }
    }

    #[test]
    fn banks_follow_lane_address(lanes in 0u32..5, reg in 0usize..32, off in 0usize..64) {
        let cfg = LayoutConfig::new(1 << lanes, 4096).unwrap();
        let b = BankConfig::default();
        let off = off % cfg.bytes_per_lane();
        let bank = bank_of(reg, off, &b, &cfg).unwrap();
        prop_assert!(bank < 8);
        prop_assert_eq!(bank, ((reg * cfg.bytes_per_lane() + off) / 8) % 8);
    }

    #[test]
    fn vl_never_exceeds_vlmax(avl in 0usize..5000, sew in eew(), lmul in 0usize..4) {
        let lmul = [Lmul::M1, Lmul::M2, Lmul::M4, Lmul::M8][lmul];
        let csr = CsrState::new(512).unwrap();
        let vt = VType::new(sew, lmul);
        let next = set_vtype(avl, vt, &csr).unwrap();
        prop_assert_eq!(next.vl, avl.min(vlmax(512, vt)));
    }

    #[test]
    fn tails_and_masked_off_elements_are_undisturbed(vl in 0usize..16, sew in eew(), seed in any::<u64>()) {
        let mut s = FlatMachineState::new(512);
        for r in 0..32 {
            for (i, b) in s.vreg_mut(r).iter_mut().enumerate() {
                *b = (seed.rotate_left((r * 7 + i) as u32 % 64) as u8) ^ (i as u8);
            }
        }
        let mut csr = CsrState::new(512).unwrap();
        exec_flat(&VectorInstr::Config { avl: vl, vtype: VType::new(sew, Lmul::M1) }, &mut s, &mut csr).unwrap();
        let before = s.clone();
        let vd = VReg::new(4).unwrap();
        let instr = VectorInstr::Arith {
            op: ArithOp::Add,
            vd,
            src: Src::V(VReg::new(5).unwrap()),
            vs2: Some(VReg::new(6).unwrap()),
            masked: true,
        };
        exec_flat(&instr, &mut s, &mut csr).unwrap();
        for i in 0..csr.vlmax() {
            if i >= csr.vl || !before.mask_bit(i) {
                prop_assert_eq!(s.elem(vd, sew, i), before.elem(vd, sew, i));
            }
        }
    }
}

#[test]
fn rule_table() {
    let mut p = PendingOps::default();
    assert_eq!(blocking_rule(MemKind::ScalarLoad, &p), None);
    p.vector_stores.push((1, 0..64));
    assert!(blocking_rule(MemKind::ScalarLoad, &p).is_some());
    assert!(blocking_rule(MemKind::ScalarStore, &p).is_some());
    assert_eq!(blocking_rule(MemKind::VectorLoad, &p), None);
    p.retire(1);
    p.vector_loads.push((2, 0..64));
    assert_eq!(blocking_rule(MemKind::ScalarLoad, &p), None);
    assert!(blocking_rule(MemKind::ScalarStore, &p).is_some());
    p.retire(2);
    p.scalar_stores.push((3, 8));
    assert!(blocking_rule(MemKind::VectorLoad, &p).is_some());
    assert!(blocking_rule(MemKind::VectorStore, &p).is_some());
    assert_eq!(blocking_rule(MemKind::ScalarLoad, &p), None);
}

#[test]
fn vector_store_invalidates_overlapping_lines() {
    let mut c = CacheModel::with_line_bits(256).unwrap();
    for a in [0u64, 32, 64, 4096] {
        c.access(a);
    }
    let gone = on_vector_store(40..70, &mut c);
    assert_eq!(gone, vec![32, 64]);
    assert!(c.is_resident(0) && c.is_resident(4096));
    assert!(!c.is_resident(40) && !c.is_resident(64));
}
