//! Where each byte of a 128-bit register lands in a 4-lane VRF, for every
//! element width, and what a mixed-width partial write costs.

use vlanesim::layout::{deshuffle, plan_reshuffle, shuffle, EewTag, LayoutConfig};
use vlanesim::rvv::{Eew, VReg};

fn main() -> vlanesim::Result<()> {
    let cfg = LayoutConfig::new(4, 128)?;
    let flat: Vec<u8> = (0..cfg.vlenb() as u8).collect();

    for eew in Eew::ALL {
        let slices = shuffle(&flat, eew, &cfg)?;
        println!("{eew}:");
        for (lane, s) in slices.iter().enumerate() {
            println!("  lane {lane}: {s:02x?}");
        }
        assert_eq!(deshuffle(&slices, eew, &cfg)?, flat);
    }

    let v5 = VReg::new(5)?;
    let tag = EewTag::Encoded(Eew::E64);
    match plan_reshuffle(v5, tag, Eew::E16, false) {
        Some(op) => println!("partial e16 write into an e64 register: {op:?}"),
        None => println!("no reshuffle needed"),
    }
    assert!(plan_reshuffle(v5, tag, Eew::E16, true).is_none());
    Ok(())
}
