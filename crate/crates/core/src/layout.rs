//! Byte layout of a lane-split vector register file.
//!
//! Element `i` of a register lives in lane `i mod lanes`, so the lane that
//! owns a given flat byte depends on the element width the register was
//! written with. Every register therefore carries an [`EewTag`], and any unit
//! that sees a whole register (loads, stores, slides, the mask unit) has to
//! shuffle or deshuffle through that tag.
//!
//! When a register holds fewer elements than there are lanes, each element is
//! spread over `lanes / elements` neighbouring lanes in per-lane-slice chunks,
//! which keeps the map a bijection with equal bytes per lane.

use crate::rvv::{Eew, VReg};
use crate::{Error, Result};

/// Bytes each lane moves per cycle.
pub const DATAPATH_BYTES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LayoutConfig {
    pub lanes: usize,
    /// Bits per vector register.
    pub vlen: usize,
}

impl LayoutConfig {
    pub fn new(lanes: usize, vlen: usize) -> Result<Self> {
        if lanes == 0 || !lanes.is_power_of_two() {
            return Err(Error::Config(format!("lane count {lanes} must be a power of two")));
        }
        if !vlen.is_multiple_of(8) || vlen / 8 < lanes || !(vlen / 8).is_multiple_of(lanes) {
            return Err(Error::Config(format!("VLEN {vlen} does not split evenly into {lanes} lanes")));
        }
        Ok(LayoutConfig { lanes, vlen })
    }

    pub fn vlenb(&self) -> usize {
        self.vlen / 8
    }

    /// Bytes of one register held by each lane.
    pub fn bytes_per_lane(&self) -> usize {
        self.vlen / (8 * self.lanes)
    }
}

/// Width a register's bytes are currently encoded with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum EewTag {
    #[default]
    Uninit,
    Encoded(Eew),
}

impl EewTag {
    pub fn eew(self) -> Option<Eew> {
        match self {
            EewTag::Uninit => None,
            EewTag::Encoded(e) => Some(e),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MappedAddr {
    pub lane: usize,
    pub offset: usize,
}

/// Where byte `byte_in_elem` of element `elem_idx` lives.
pub fn map_byte(elem_idx: usize, byte_in_elem: usize, eew: Eew, cfg: &LayoutConfig) -> Result<MappedAddr> {
    let eb = eew.bytes();
    let elems = cfg.vlenb() / eb;
    if byte_in_elem >= eb {
        return Err(Error::Layout(format!("byte {byte_in_elem} outside a {eew} element")));
    }
    if elem_idx >= elems {
        return Err(Error::Layout(format!(
            "element {elem_idx} beyond register capacity {elems} at {eew}"
        )));
    }
    Ok(map_unchecked(elem_idx, byte_in_elem, eb, elems, cfg))
}

#[inline]
fn map_unchecked(elem: usize, byte: usize, eb: usize, elems: usize, cfg: &LayoutConfig) -> MappedAddr {
    let l = cfg.lanes;
    if elems >= l {
        MappedAddr { lane: elem % l, offset: (elem / l) * eb + byte }
    } else {
        let bpl = cfg.bytes_per_lane();
        MappedAddr { lane: elem + elems * (byte / bpl), offset: byte % bpl }
    }
}

/// Lane/offset of flat byte `k` of a register encoded at `eew`.
#[inline]
pub fn map_flat(k: usize, eew: Eew, cfg: &LayoutConfig) -> MappedAddr {
    let eb = eew.bytes();
    map_unchecked(k / eb, k % eb, eb, cfg.vlenb() / eb, cfg)
}

/// One register split into per-lane slices.
pub type LaneSlices = Vec<Vec<u8>>;

pub fn shuffle(flat: &[u8], eew: Eew, cfg: &LayoutConfig) -> Result<LaneSlices> {
    if flat.len() != cfg.vlenb() {
        return Err(Error::Layout(format!("flat register has {} bytes, expected {}", flat.len(), cfg.vlenb())));
    }
    let mut out = vec![vec![0u8; cfg.bytes_per_lane()]; cfg.lanes];
    for (k, b) in flat.iter().enumerate() {
        let m = map_flat(k, eew, cfg);
        out[m.lane][m.offset] = *b;
    }
    Ok(out)
}

pub fn deshuffle(slices: &[Vec<u8>], eew: Eew, cfg: &LayoutConfig) -> Result<Vec<u8>> {
    let bpl = cfg.bytes_per_lane();
    if slices.len() != cfg.lanes || slices.iter().any(|s| s.len() != bpl) {
        return Err(Error::Layout(format!("expected {} lane slices of {bpl} bytes", cfg.lanes)));
    }
    Ok((0..cfg.vlenb())
        .map(|k| {
            let m = map_flat(k, eew, cfg);
            slices[m.lane][m.offset]
        })
        .collect())
}

/// Whole-register re-encoding injected ahead of an EEW-changing partial write.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ReshuffleOp {
    pub reg: VReg,
    pub from: Eew,
    pub to: Eew,
}

impl ReshuffleOp {
    pub fn apply(&self, slices: &[Vec<u8>], cfg: &LayoutConfig) -> Result<LaneSlices> {
        shuffle(&deshuffle(slices, self.from, cfg)?, self.to, cfg)
    }
}

/// Decides whether writing `vd` at `eew_new` needs a reshuffle first.
pub fn plan_reshuffle(vd: VReg, tag: EewTag, eew_new: Eew, writes_full_register: bool) -> Option<ReshuffleOp> {
    match tag {
        EewTag::Encoded(old) if old != eew_new && !writes_full_register => {
            Some(ReshuffleOp { reg: vd, from: old, to: eew_new })
        }
        _ => None,
    }
}

/// Mask bits `0..vl` of a register stored in lanes.
pub fn extract_mask(slices: &[Vec<u8>], tag: EewTag, vl: usize, cfg: &LayoutConfig) -> Result<Vec<bool>> {
    let eew = tag.eew().ok_or_else(|| Error::Layout("mask register was never written".into()))?;
    if vl > cfg.vlen {
        return Err(Error::Layout(format!("vl {vl} exceeds the {} mask bits of a register", cfg.vlen)));
    }
    let flat = deshuffle(slices, eew, cfg)?;
    Ok((0..vl).map(|i| flat[i / 8] >> (i % 8) & 1 == 1).collect())
}

/// Per-lane enable strobes: lane `k` receives bits `k, k + lanes, ...` in order.
pub fn distribute_mask(bits: &[bool], cfg: &LayoutConfig) -> Vec<Vec<bool>> {
    let mut out = vec![Vec::with_capacity(bits.len() / cfg.lanes + 1); cfg.lanes];
    for (i, b) in bits.iter().enumerate() {
        out[i % cfg.lanes].push(*b);
    }
    out
}

/// The whole register file in lane-split form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LaneImage {
    cfg: LayoutConfig,
    regs: Vec<LaneSlices>,
    tags: [EewTag; 32],
}

impl LaneImage {
    pub fn new(cfg: LayoutConfig) -> Self {
        LaneImage {
            cfg,
            regs: vec![vec![vec![0; cfg.bytes_per_lane()]; cfg.lanes]; 32],
            tags: [EewTag::Uninit; 32],
        }
    }

    /// Encodes flat registers with the given per-register widths.
    pub fn from_flat(cfg: LayoutConfig, regs: &[&[u8]], tags: &[EewTag; 32]) -> Result<Self> {
        let mut img = LaneImage::new(cfg);
        for (r, flat) in regs.iter().enumerate() {
            let tag = tags[r];
            let eew = match tag {
                EewTag::Encoded(e) => e,
                EewTag::Uninit if flat.iter().all(|b| *b == 0) => Eew::E8,
                EewTag::Uninit => {
                    return Err(Error::Layout(format!("v{r} has contents but no encoding")));
                }
            };
            img.regs[r] = shuffle(flat, eew, &cfg)?;
            img.tags[r] = tag;
        }
        Ok(img)
    }

    pub fn cfg(&self) -> &LayoutConfig {
        &self.cfg
    }

    pub fn tag(&self, r: usize) -> EewTag {
        self.tags[r]
    }

    pub fn slices(&self, r: usize) -> &LaneSlices {
        &self.regs[r]
    }

    /// Flat view of register `r`. Uninitialized registers are all zero in every encoding.
    pub fn read_flat(&self, r: usize) -> Vec<u8> {
        let eew = self.tags[r].eew().unwrap_or(Eew::E8);
        deshuffle(&self.regs[r], eew, &self.cfg).expect("image slices are well formed")
    }

    pub fn reshuffle(&mut self, op: &ReshuffleOp) -> Result<()> {
        if self.tags[op.reg.idx()] != EewTag::Encoded(op.from) {
            return Err(Error::Layout(format!("{} is not encoded at {}", op.reg, op.from)));
        }
        self.regs[op.reg.idx()] = op.apply(&self.regs[op.reg.idx()], &self.cfg)?;
        self.tags[op.reg.idx()] = EewTag::Encoded(op.to);
        Ok(())
    }

    /// Stores flat bytes `k` (for each `written[k]`) of register `r` using encoding `eew`,
    /// then retags the register. Bytes not written keep their lane position.
    pub fn write_partial(&mut self, r: usize, eew: Eew, flat: &[u8], written: &[bool]) {
        for (k, (b, w)) in flat.iter().zip(written).enumerate() {
            if *w {
                let m = map_flat(k, eew, &self.cfg);
                self.regs[r][m.lane][m.offset] = *b;
            }
        }
        self.tags[r] = EewTag::Encoded(eew);
    }

    pub fn mask_bits(&self, vl: usize) -> Result<Vec<bool>> {
        extract_mask(&self.regs[0], self.tags[0], vl, &self.cfg)
    }
}
